"""Scenario domain types, input validation and JSON (de)serialization.

A scenario is one sensor frame: the EGO-vehicle state, any number of
collision objects (vehicles and pedestrians) and up to four lane-divider
point triplets.  ``validate_scenario`` turns the raw JSON dict into an
immutable ``Scenario`` with classified vehicles, clamped pedestrian speeds
and a fully resolved configuration; everything downstream assumes validated
input and is safe to share across workers.

JSON schema (SI units, radians, global frame), see README for the full
field-by-field reference::

    {
      "timestamp": 0.0,
      "ego": {"x":, "y":, "yaw":, "v":, "length":, "width":, ...},
      "objects": [{"id":, "kind":, "x":, ...}, ...],
      "dividers": [[[x, y], [x, y], [x, y]], ...],
      "counter_traffic": ["left"],
      "config": {...}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .config import SimulationConfig
from .errors import ScenarioError
from .vehicles import VehicleParameters, classify_vehicle

MAX_DIVIDERS = 4


@dataclass(frozen=True)
class Point2:
    """Point in the global frame, meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ScenarioError(f"non-finite coordinates ({self.x}, {self.y})")


class ObjectKind(str, Enum):
    EGO_VEHICLE = "ego_vehicle"
    CO_VEHICLE = "co_vehicle"
    PEDESTRIAN = "pedestrian"


@dataclass(frozen=True)
class ObjectState:
    """Kinematic state and footprint dimensions of one traffic participant.

    yaw, sideslip in rad; velocity over ground m/s; yaw_rate rad/s;
    acceleration m/s^2; dimensions m.  Sideslip applies to vehicles only.
    """

    object_id: str
    kind: ObjectKind
    position: Point2
    yaw: float
    velocity: float
    length: float
    width: float
    sideslip: float = 0.0
    yaw_rate: float = 0.0
    acceleration: float = 0.0
    height: float | None = None

    def __post_init__(self):
        values = [self.yaw, self.velocity, self.sideslip, self.yaw_rate,
                  self.acceleration, self.length, self.width]
        if self.height is not None:
            values.append(self.height)
        if not all(math.isfinite(v) for v in values):
            raise ScenarioError(f"object {self.object_id!r} has non-finite fields")
        if self.velocity < 0:
            raise ScenarioError(f"object {self.object_id!r} has negative velocity")
        if self.length <= 0 or self.width <= 0:
            raise ScenarioError(f"object {self.object_id!r} must have positive dimensions")


@dataclass(frozen=True)
class Scenario:
    """Validated, immutable input frame for the evaluation pipeline."""

    ego: ObjectState
    ego_params: VehicleParameters
    objects: tuple[ObjectState, ...]
    object_params: tuple[VehicleParameters | None, ...]  # None for pedestrians
    dividers: tuple[tuple[Point2, Point2, Point2], ...]
    counter_traffic: frozenset[str]
    config: SimulationConfig
    timestamp: float = 0.0

    @property
    def co_count(self) -> int:
        return len(self.objects)

    def params_for(self, object_id: str) -> VehicleParameters | None:
        if object_id == self.ego.object_id:
            return self.ego_params
        for obj, params in zip(self.objects, self.object_params):
            if obj.object_id == object_id:
                return params
        raise KeyError(object_id)

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "ego": _state_to_dict(self.ego),
            "objects": [_state_to_dict(o) for o in self.objects],
            "dividers": [[[p.x, p.y] for p in triplet] for triplet in self.dividers],
            "counter_traffic": sorted(self.counter_traffic),
            "config": self.config.to_dict(),
        }


def _state_to_dict(state: ObjectState) -> dict:
    out = {
        "id": state.object_id,
        "kind": state.kind.value,
        "x": state.position.x,
        "y": state.position.y,
        "yaw": state.yaw,
        "v": state.velocity,
        "sideslip": state.sideslip,
        "yaw_rate": state.yaw_rate,
        "accel": state.acceleration,
        "length": state.length,
        "width": state.width,
    }
    if state.height is not None:
        out["height"] = state.height
    return out


def _require_finite_number(raw: dict, key: str, owner: str, default=None) -> float:
    if key not in raw:
        if default is None:
            raise ScenarioError(f"{owner}: missing required field {key!r}")
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{owner}: field {key!r} must be a number")
    if not math.isfinite(value):
        raise ScenarioError(f"{owner}: field {key!r} is not finite")
    return float(value)


def _parse_state(raw: dict, kind: ObjectKind, object_id: str,
                 config: SimulationConfig) -> ObjectState:
    owner = f"object {object_id!r}"
    if kind is ObjectKind.PEDESTRIAN:
        default_length, default_width = config.pedestrian_footprint
    else:
        default_length = default_width = None
    velocity = _require_finite_number(raw, "v", owner)
    if kind is ObjectKind.PEDESTRIAN:
        # Pedestrians walk or run; open-road speeds above a fast run are
        # treated as sensor noise and clamped rather than rejected.
        velocity = min(max(velocity, 0.0), config.pedestrian_speed_max)
    return ObjectState(
        object_id=object_id,
        kind=kind,
        position=Point2(_require_finite_number(raw, "x", owner),
                        _require_finite_number(raw, "y", owner)),
        yaw=_require_finite_number(raw, "yaw", owner),
        velocity=velocity,
        sideslip=_require_finite_number(raw, "sideslip", owner, default=0.0),
        yaw_rate=_require_finite_number(raw, "yaw_rate", owner, default=0.0),
        acceleration=_require_finite_number(raw, "accel", owner, default=0.0),
        length=_require_finite_number(raw, "length", owner, default=default_length),
        width=_require_finite_number(raw, "width", owner, default=default_width),
        height=(_require_finite_number(raw, "height", owner) if "height" in raw else None),
    )


def _check_divider_triplet(triplet: tuple[Point2, Point2, Point2], ego: ObjectState,
                           index: int) -> None:
    # Degeneracy is judged in the road-aligned frame (rotated by EGO yaw)
    # where dividers must be functions y(x): duplicate abscissae defeat the fit.
    cos_y, sin_y = math.cos(-ego.yaw), math.sin(-ego.yaw)
    xs = [cos_y * (p.x - ego.position.x) - sin_y * (p.y - ego.position.y) for p in triplet]
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(xs[i] - xs[j]) < 1e-9:
                raise ScenarioError(
                    f"degenerate divider {index}: points share the abscissa "
                    f"x={xs[i]:.6f} in the road-aligned frame"
                )


def validate_scenario(raw: dict) -> Scenario:
    """Validate a raw scenario dict and resolve all defaults.

    Raises ScenarioError on missing EGO state, non-finite numbers, degenerate
    divider triplets or more than four dividers.
    """
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if "ego" not in raw or not isinstance(raw["ego"], dict):
        raise ScenarioError("scenario is missing the EGO state")

    config = SimulationConfig.from_dict(raw.get("config", {}))
    timestamp = _require_finite_number(raw, "timestamp", "scenario", default=0.0)

    ego = _parse_state(raw["ego"], ObjectKind.EGO_VEHICLE,
                       str(raw["ego"].get("id", "ego")), config)
    ego_params = classify_vehicle(ego.length, ego.width, ego.height)

    objects: list[ObjectState] = []
    object_params: list[VehicleParameters | None] = []
    seen_ids = {ego.object_id}
    for pos, entry in enumerate(raw.get("objects", [])):
        if not isinstance(entry, dict):
            raise ScenarioError(f"objects[{pos}] must be a JSON object")
        kind_name = entry.get("kind", "co_vehicle")
        try:
            kind = ObjectKind(kind_name)
        except ValueError:
            raise ScenarioError(f"objects[{pos}]: unknown kind {kind_name!r}") from None
        if kind is ObjectKind.EGO_VEHICLE:
            raise ScenarioError(f"objects[{pos}]: only one EGO state is allowed")
        object_id = str(entry.get("id", f"co{pos}"))
        if object_id in seen_ids:
            raise ScenarioError(f"duplicate object id {object_id!r}")
        seen_ids.add(object_id)
        state = _parse_state(entry, kind, object_id, config)
        objects.append(state)
        if kind is ObjectKind.CO_VEHICLE:
            object_params.append(classify_vehicle(state.length, state.width, state.height))
        else:
            object_params.append(None)

    raw_dividers = raw.get("dividers", [])
    if len(raw_dividers) > MAX_DIVIDERS:
        raise ScenarioError(f"at most {MAX_DIVIDERS} dividers are supported, "
                            f"got {len(raw_dividers)}")
    dividers = []
    for index, triplet in enumerate(raw_dividers):
        if len(triplet) != 3:
            raise ScenarioError(f"divider {index} must contain exactly 3 points")
        points = tuple(Point2(_as_float(p[0], index), _as_float(p[1], index))
                       for p in triplet)
        _check_divider_triplet(points, ego, index)
        dividers.append(points)

    counter = raw.get("counter_traffic", [])
    if not isinstance(counter, list) or not all(r in ("left", "right", "ego") for r in counter):
        raise ScenarioError("counter_traffic must list lane roles from {left, right, ego}")

    return Scenario(
        ego=ego,
        ego_params=ego_params,
        objects=tuple(objects),
        object_params=tuple(object_params),
        dividers=tuple(dividers),
        counter_traffic=frozenset(counter),
        config=config,
        timestamp=timestamp,
    )


def _as_float(value, divider_index: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"divider {divider_index}: coordinates must be numbers")
    if not math.isfinite(value):
        raise ScenarioError(f"divider {divider_index}: non-finite coordinate")
    return float(value)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return validate_scenario(raw)


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2))
