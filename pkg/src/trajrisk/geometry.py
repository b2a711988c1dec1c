"""Road model built from lane-divider point triplets.

Dividers arrive as three (x, y) points each (nearest, farthest, one in
between).  In a road-aligned frame (global frame rotated by the EGO yaw so
the road runs along +x) every divider is fit as a quadratic y(x) via
Gauss-Jordan elimination.  Sorted by lateral position, adjacent divider
pairs form lanes; the EGO-lane plus immediate neighbors are kept, at most
three lanes.  Without divider data a virtual lane of legal width is placed
around the EGO-vehicle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import SimulationConfig
from .errors import DegenerateDividerError, RoadError
from .scenario import ObjectKind, ObjectState, Point2, Scenario

_OFFSET_FIT_SAMPLES = 9
# Divider gaps wider than this are treated as a missing shared divider and
# split by a synthesized one (legal lanes are ~2.75-3.75 m).
_GAP_SPLIT_FACTOR = 1.5


def gauss_jordan_solve(matrix, rhs):
    """Solve a small dense linear system by Gauss-Jordan elimination.

    Partial pivoting; raises DegenerateDividerError when the system is
    singular to working precision.
    """
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float)
    n = a.shape[0]
    scale = max(np.abs(a).max(), 1.0)
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[pivot_row, col]) < 1e-12 * scale:
            raise DegenerateDividerError("singular system in divider fit")
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        inv = 1.0 / a[col, col]
        a[col] *= inv
        b[col] *= inv
        for row in range(n):
            if row != col:
                factor = a[row, col]
                a[row] -= factor * a[col]
                b[row] -= factor * b[col]
    return b


@dataclass(frozen=True)
class FrameTransform:
    """Rotation + translation between the global and road-aligned frames."""

    origin_x: float
    origin_y: float
    angle: float  # rad, road +x direction in the global frame

    def to_road(self, x, y):
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx = np.asarray(x) - self.origin_x
        dy = np.asarray(y) - self.origin_y
        return c * dx + s * dy, -s * dx + c * dy

    def to_global(self, x, y):
        c, s = math.cos(self.angle), math.sin(self.angle)
        x = np.asarray(x)
        y = np.asarray(y)
        return self.origin_x + c * x - s * y, self.origin_y + s * x + c * y

    def yaw_to_road(self, yaw):
        return np.asarray(yaw) - self.angle

    @classmethod
    def from_ego(cls, ego: ObjectState) -> "FrameTransform":
        return cls(ego.position.x, ego.position.y, ego.yaw)


@dataclass(frozen=True)
class LaneDivider:
    """Quadratic divider y = a*x^2 + b*x + c in the road-aligned frame."""

    a: float
    b: float
    c: float
    x_min: float
    x_max: float

    def y(self, x):
        x = np.asarray(x, dtype=float)
        return (self.a * x + self.b) * x + self.c

    def slope(self, x):
        return 2.0 * self.a * np.asarray(x, dtype=float) + self.b

    def coefficients(self) -> tuple[float, float, float]:
        return self.a, self.b, self.c


def fit_divider(p1: Point2, p2: Point2, p3: Point2) -> LaneDivider:
    """Fit the unique quadratic through three road-frame points.

    The three points must have pairwise distinct abscissae; the valid range
    is spanned by the outermost points after ordering.
    """
    points = sorted((p1, p2, p3), key=lambda p: p.x)
    xs = [p.x for p in points]
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(xs[i] - xs[j]) < 1e-9:
                raise DegenerateDividerError(
                    f"degenerate divider: duplicate abscissa x={xs[i]:.6f}")
    matrix = [[p.x * p.x, p.x, 1.0] for p in points]
    rhs = [p.y for p in points]
    a, b, c = gauss_jordan_solve(matrix, rhs)
    return LaneDivider(a=float(a), b=float(b), c=float(c),
                       x_min=xs[0], x_max=xs[2])


def offset_curve(divider: LaneDivider, lateral_offset: float) -> LaneDivider:
    """Curve at constant perpendicular distance from a divider.

    The exact normal offset of a quadratic is not polynomial; it is sampled
    and refit as a quadratic (least squares) so downstream consumers keep a
    uniform representation.  Positive offsets go to +y (left).
    """
    if lateral_offset == 0.0:
        return replace(divider)
    xs = np.linspace(divider.x_min, divider.x_max, _OFFSET_FIT_SAMPLES)
    ys = divider.y(xs)
    slopes = divider.slope(xs)
    inv_norm = 1.0 / np.sqrt(1.0 + slopes * slopes)
    # Unit normal of y = f(x) pointing to +y is (-f', 1)/sqrt(1+f'^2).
    off_x = xs - lateral_offset * slopes * inv_norm
    off_y = ys + lateral_offset * inv_norm
    coeffs = np.polyfit(off_x, off_y, 2)
    return LaneDivider(a=float(coeffs[0]), b=float(coeffs[1]), c=float(coeffs[2]),
                       x_min=divider.x_min, x_max=divider.x_max)


def perpendicular_distance(divider: LaneDivider, x: float, y: float) -> float:
    """Signed perpendicular distance from a road-frame point to the curve.

    Positive when the point lies on the +y side.  Uses the local tangent at
    the foot of the vertical through x, accurate for road-like slopes.
    """
    slope = float(divider.slope(x))
    return float((y - divider.y(x)) / math.sqrt(1.0 + slope * slope))


@dataclass(frozen=True)
class Lane:
    """One lane bounded by two dividers, lower at smaller y."""

    index: int
    role: str  # "ego", "left", "right"
    lower: LaneDivider
    upper: LaneDivider
    counter_traffic: bool = False

    def width_at(self, x) -> float:
        return float(np.mean(self.upper.y(x) - self.lower.y(x)))

    def centerline(self) -> LaneDivider:
        return LaneDivider(
            a=0.5 * (self.lower.a + self.upper.a),
            b=0.5 * (self.lower.b + self.upper.b),
            c=0.5 * (self.lower.c + self.upper.c),
            x_min=max(self.lower.x_min, self.upper.x_min),
            x_max=min(self.lower.x_max, self.upper.x_max),
        )

    def contains_y(self, x: float, y: float) -> bool:
        return bool(self.lower.y(x) <= y <= self.upper.y(x))


@dataclass(frozen=True)
class RoadModel:
    """Up to three lanes (left, ego, right) in a shared road-aligned frame."""

    lanes: tuple[Lane, ...]  # ordered left, ego, right; any subset present
    transform: FrameTransform
    virtual: bool = False
    synthesized_dividers: int = 0

    def lane_by_role(self, role: str) -> Lane | None:
        for lane in self.lanes:
            if lane.role == role:
                return lane
        return None

    @property
    def ego_lane(self) -> Lane:
        lane = self.lane_by_role("ego")
        assert lane is not None, "road model always carries an ego lane"
        return lane

    def neighbors_of(self, role: str) -> tuple[str, ...]:
        order = {"left": 1, "ego": 0, "right": -1}
        present = {lane.role: lane for lane in self.lanes}
        level = order[role]
        out = []
        for other, other_level in order.items():
            if abs(other_level - level) == 1 and other in present:
                out.append(other)
        return tuple(out)


@dataclass(frozen=True)
class LaneAssociation:
    lane: Lane | None
    off_road: bool = False


def _virtual_lane(ego: ObjectState, config: SimulationConfig) -> Lane:
    # Straight lane of legal width around the EGO state; forward extent
    # covers anything reachable within the horizon.
    reach = ego.velocity * config.horizon + 0.5 * config.accel_range * config.horizon**2
    x_max = reach + ego.length + 20.0
    half = config.virtual_lane_width / 2.0
    lower = LaneDivider(0.0, 0.0, -half, -x_max, x_max)
    upper = LaneDivider(0.0, 0.0, +half, -x_max, x_max)
    return Lane(index=0, role="ego", lower=lower, upper=upper)


def _check_no_crossing(sorted_dividers: list[LaneDivider]) -> None:
    for low, high in zip(sorted_dividers, sorted_dividers[1:]):
        x_lo = max(low.x_min, high.x_min)
        x_hi = min(low.x_max, high.x_max)
        if x_lo >= x_hi:
            continue
        xs = np.linspace(x_lo, x_hi, 64)
        gap = high.y(xs) - low.y(xs)
        if np.any(gap <= 0.0):
            raise RoadError("dividers cross inside their valid range")


def _split_wide_gaps(sorted_dividers: list[LaneDivider],
                     config: SimulationConfig) -> tuple[list[LaneDivider], int]:
    threshold = _GAP_SPLIT_FACTOR * config.virtual_lane_width
    out: list[LaneDivider] = []
    synthesized = 0
    for i, divider in enumerate(sorted_dividers):
        out.append(divider)
        if i + 1 >= len(sorted_dividers):
            break
        nxt = sorted_dividers[i + 1]
        x_lo = max(divider.x_min, nxt.x_min)
        x_hi = min(divider.x_max, nxt.x_max)
        probe = 0.5 * (x_lo + x_hi) if x_lo < x_hi else 0.0
        gap = float(nxt.y(probe) - divider.y(probe))
        if gap > threshold:
            middle = LaneDivider(
                a=0.5 * (divider.a + nxt.a),
                b=0.5 * (divider.b + nxt.b),
                c=0.5 * (divider.c + nxt.c),
                x_min=min(divider.x_min, nxt.x_min),
                x_max=max(divider.x_max, nxt.x_max),
            )
            out.append(middle)
            synthesized += 1
    return out, synthesized


def build_road(dividers: list[LaneDivider], ego_road_state: ObjectState,
               config: SimulationConfig, transform: FrameTransform,
               counter_traffic: frozenset[str] = frozenset()) -> RoadModel:
    """Assemble lanes from fitted dividers (road frame, EGO at the origin).

    Fewer than two dividers yield a virtual EGO lane.  Divider gaps wide
    enough to hide a missing shared divider are split by a synthesized one.
    The EGO-lane and its immediate neighbors are kept.
    """
    if len(dividers) < 2:
        lane = _virtual_lane(ego_road_state, config)
        lane = replace(lane, counter_traffic="ego" in counter_traffic)
        return RoadModel(lanes=(lane,), transform=transform, virtual=True)

    ordered = sorted(dividers, key=lambda d: float(d.y(0.0)))
    _check_no_crossing(ordered)
    ordered, synthesized = _split_wide_gaps(ordered, config)

    lanes = [
        Lane(index=i, role="", lower=low, upper=high)
        for i, (low, high) in enumerate(zip(ordered, ordered[1:]))
    ]

    # EGO sits at the road-frame origin; its lane is the one whose dividers
    # bound y=0, else the nearest lane.
    ego_idx = None
    for i, lane in enumerate(lanes):
        if lane.lower.y(0.0) <= 0.0 <= lane.upper.y(0.0):
            ego_idx = i
            break
    if ego_idx is None:
        distances = [
            min(abs(float(lane.lower.y(0.0))), abs(float(lane.upper.y(0.0))))
            for lane in lanes
        ]
        ego_idx = int(np.argmin(distances))

    kept: list[Lane] = []
    for i, lane in enumerate(lanes):
        if i == ego_idx:
            role = "ego"
        elif i == ego_idx + 1:
            role = "left"
        elif i == ego_idx - 1:
            role = "right"
        else:
            continue
        kept.append(replace(lane, role=role, counter_traffic=role in counter_traffic))

    # Present lanes ordered left, ego, right.
    by_role = {lane.role: lane for lane in kept}
    ordered_lanes = tuple(by_role[r] for r in ("left", "ego", "right") if r in by_role)
    return RoadModel(lanes=ordered_lanes, transform=transform,
                     synthesized_dividers=synthesized)


def build_road_from_scenario(scenario: Scenario) -> RoadModel:
    """Fit all divider triplets and assemble the road for a scenario."""
    transform = FrameTransform.from_ego(scenario.ego)
    fitted = []
    for triplet in scenario.dividers:
        road_points = []
        for p in triplet:
            x, y = transform.to_road(p.x, p.y)
            road_points.append(Point2(float(x), float(y)))
        fitted.append(fit_divider(*road_points))
    return build_road(fitted, scenario.ego, scenario.config, transform,
                      scenario.counter_traffic)


def associate_lane(obj: ObjectState, road: RoadModel) -> LaneAssociation:
    """Associate a traffic participant with a lane by its center of gravity.

    Pedestrians are not bound to the road and never associate.  The
    EGO-vehicle always maps to the ego lane.  A vehicle exactly on a shared
    divider takes the lane its heading points into; one outside all lanes
    maps to the nearest lane, flagged off-road.
    """
    if obj.kind is ObjectKind.PEDESTRIAN:
        return LaneAssociation(lane=None)
    if obj.kind is ObjectKind.EGO_VEHICLE:
        return LaneAssociation(lane=road.ego_lane)

    x, y = road.transform.to_road(obj.position.x, obj.position.y)
    x, y = float(x), float(y)
    candidates = []
    for lane in road.lanes:
        lo = float(lane.lower.y(x))
        hi = float(lane.upper.y(x))
        if lo < y < hi:
            return LaneAssociation(lane=lane)
        candidates.append((lane, lo, hi))

    # On a shared divider: pick the lane the heading points into.
    heading_y = math.sin(float(road.transform.yaw_to_road(obj.yaw)))
    for lane, lo, hi in candidates:
        if abs(y - lo) < 1e-9 or abs(y - hi) < 1e-9:
            on_lower = abs(y - lo) < abs(y - hi)
            wants_upper = heading_y > 0.0
            take = (on_lower and wants_upper) or (not on_lower and not wants_upper)
            if take or len(road.lanes) == 1:
                return LaneAssociation(lane=lane)

    distances = [min(abs(y - lo), abs(y - hi)) for _, lo, hi in candidates]
    nearest = candidates[int(np.argmin(distances))][0]
    return LaneAssociation(lane=nearest, off_road=True)
