"""Hypothesis generation: profiles, path sampling, lateral control, rollouts.

Each vehicle hypothesis combines one longitudinal profile (acceleration for
the one-track model, tire slip for the two-track model) with one complete
path (three sections parallel to lane dividers, one per sampling instance).
Pedestrian hypotheses pair a fixed heading with a constant acceleration
sample, mirroring the path/profile counts so the combinatorics are uniform.

Rollouts advance whole hypothesis batches step by step with numpy; every
lane of the batch is an independent trajectory, so execution order and
worker partitioning cannot change results.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import GRAVITY, SimulationConfig
from .dynamics import (
    body_acceleration,
    euler_step,
    one_track_derivatives,
    pedestrian_step,
    two_track_derivatives,
)
from .errors import ScenarioError
from .geometry import (
    Lane,
    LaneDivider,
    RoadModel,
    associate_lane,
    offset_curve,
    perpendicular_distance,
)
from .scenario import ObjectKind, ObjectState
from .vehicles import VehicleParameters


# ---------------------------------------------------------------------------
# Longitudinal profiles

@dataclass(frozen=True)
class AccelerationProfile:
    """Longitudinal command profile with actuation latency and ramp limit.

    kind "acceleration": target in m/s^2, ramp limit in m/s^3 (jerk).
    kind "slip": target dimensionless, ramp limit in 1/s.
    Before the latency elapses the profile holds the vehicle's current
    command; afterwards it approaches the target monotonically.
    """

    profile_id: int
    kind: str
    target: float
    latency: float
    ramp_limit: float

    def value(self, t, initial):
        ramp_time = np.maximum(np.asarray(t, dtype=float) - self.latency, 0.0)
        budget = self.ramp_limit * ramp_time
        return initial + np.clip(self.target - initial, -budget, budget)


def build_profiles(config: SimulationConfig, kind: str) -> list[AccelerationProfile]:
    """The h_acc profile set: extremes, zero, and equally spaced negatives.

    Maximum, minimum and zero are always present; the remaining samples are
    distributed equally over the negative range (shedding kinetic energy is
    the robust reaction in critical situations).
    """
    h = config.accel_profile_count
    if h < 3:
        raise ScenarioError("need at least 3 profiles (min, zero, max)")
    if kind == "acceleration":
        extreme = config.accel_range
        ramp = config.profile_jerk
    elif kind == "slip":
        extreme = config.slip_range
        ramp = config.profile_jerk * config.slip_range / config.accel_range
    else:
        raise ScenarioError(f"unknown profile kind {kind!r}")

    negative_count = h - 2
    targets = [-extreme * k / negative_count for k in range(negative_count, 0, -1)]
    targets += [0.0, extreme]
    return [
        AccelerationProfile(profile_id=i, kind=kind, target=t,
                            latency=config.profile_latency, ramp_limit=ramp)
        for i, t in enumerate(targets)
    ]


def pedestrian_heading_samples(config: SimulationConfig) -> np.ndarray:
    """h_CO_str headings equally spaced over the full circle (global frame)."""
    n = config.co_path_count
    return np.arange(n) * (2.0 * math.pi / n)


def pedestrian_accel_samples(config: SimulationConfig) -> np.ndarray:
    """h_acc accelerations equally spaced in [-range, +range]."""
    r = config.pedestrian_accel_range
    return np.linspace(-r, r, config.accel_profile_count)


# ---------------------------------------------------------------------------
# Path sampling

@dataclass(frozen=True)
class PathSection:
    curve: LaneDivider
    lane_role: str
    counter_traffic: bool
    slot: int


@dataclass(frozen=True)
class PathSpec:
    """One complete path: a section per sampling instance."""

    path_id: int
    object_id: str
    sections: tuple[PathSection, ...]
    counter_traffic: bool
    lane_changes: int


def _lane_slots(lane: Lane, road: RoadModel, config: SimulationConfig) -> list[tuple[Lane, float]]:
    slots = [(lane, f) for f in config.own_lane_fractions]
    neighbor_roles = road.neighbors_of(lane.role)
    for role in ("left", "ego", "right"):
        if role in neighbor_roles:
            neighbor = road.lane_by_role(role)
            slots += [(neighbor, f) for f in config.neighbor_lane_fractions]
    return slots


def _section_for_slot(lane: Lane, fraction: float, sample_x: float) -> LaneDivider:
    lo = float(lane.lower.y(sample_x))
    hi = float(lane.upper.y(sample_x))
    sample_y = lo + fraction * (hi - lo)
    offset = perpendicular_distance(lane.lower, sample_x, sample_y)
    return offset_curve(lane.lower, offset)


def sample_paths(obj: ObjectState, road: RoadModel, reference_poses: np.ndarray,
                 config: SimulationConfig) -> list[PathSpec]:
    """Complete paths for a vehicle from lateral samples along its reference.

    The lanes are sampled where the reference trajectory crosses each
    sampling instance: three slots on the own lane, two per available
    neighbor.  Collision objects get one complete path per slot (their
    sections chain the same slot); the EGO-vehicle, which the driver can
    actually influence, gets every cross-instance slot combination.
    """
    assoc = associate_lane(obj, road)
    if assoc.lane is None:
        raise ScenarioError(f"object {obj.object_id!r} has no lane association")
    slots = _lane_slots(assoc.lane, road, config)

    tau = config.step
    sections_per_instance: list[list[PathSection]] = []
    for t_sample in config.sampling_instances:
        pose_idx = round(t_sample / tau) - 1
        gx, gy = reference_poses[pose_idx, 0], reference_poses[pose_idx, 1]
        rx, _ = road.transform.to_road(gx, gy)
        sections = [
            PathSection(curve=_section_for_slot(lane, fraction, float(rx)),
                        lane_role=lane.role, counter_traffic=lane.counter_traffic,
                        slot=slot_idx)
            for slot_idx, (lane, fraction) in enumerate(slots)
        ]
        sections_per_instance.append(sections)

    n_instances = len(config.sampling_instances)
    paths: list[PathSpec] = []
    if obj.kind is ObjectKind.EGO_VEHICLE:
        combos = itertools.product(range(len(slots)), repeat=n_instances)
    else:
        combos = ((k,) * n_instances for k in range(len(slots)))
    for path_id, combo in enumerate(combos):
        chain = tuple(sections_per_instance[i][slot] for i, slot in enumerate(combo))
        roles = [s.lane_role for s in chain]
        changes = sum(1 for a, b in zip(roles, roles[1:]) if a != b)
        paths.append(PathSpec(
            path_id=path_id,
            object_id=obj.object_id,
            sections=chain,
            counter_traffic=any(s.counter_traffic for s in chain),
            lane_changes=changes,
        ))
    return paths


def centerline_path(obj: ObjectState, road: RoadModel,
                    config: SimulationConfig) -> PathSpec:
    """Reference path: the object's lane centerline at every instance."""
    assoc = associate_lane(obj, road)
    if assoc.lane is None:
        raise ScenarioError(f"object {obj.object_id!r} has no lane association")
    center = assoc.lane.centerline()
    section = PathSection(curve=center, lane_role=assoc.lane.role,
                          counter_traffic=assoc.lane.counter_traffic, slot=-1)
    return PathSpec(path_id=-1, object_id=obj.object_id,
                    sections=(section,) * len(config.sampling_instances),
                    counter_traffic=False, lane_changes=0)


# ---------------------------------------------------------------------------
# Lateral controller

def steering_command(velocity, d_path, e_yaw):
    """Optimized two-term P-control law for the front steering angle.

    d_path is the signed distance from the predicted center of gravity to
    the active path section (positive: section lies to the left), e_yaw the
    yaw error toward the section direction.  The output is in degrees at the
    front wheels (the yaw gain 3.8197 ~ 12/pi folds the radian error into
    degrees); callers convert to radians before applying steering limits.
    """
    inner = np.abs((-0.018 * np.asarray(velocity, dtype=float) + 1.5) * d_path)
    return (inner + 0.5) * d_path + (-inner + 9.5) * (3.8197 * e_yaw)


def _wrap_angle(angle):
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def lateral_controller(velocity, x, y, yaw, sideslip, section_a, section_b, section_c,
                       road_transform, prev_steering, params: VehicleParameters,
                       config: SimulationConfig, tau: float):
    """Steering angle toward the active section, limited in angle and rate.

    Evaluates the control law at a speed-scaled prediction point ahead of
    the vehicle; the raw command (degrees) is converted to radians, clamped
    to the maximum steering angle and rate-limited against the previous
    step's angle.
    """
    v = np.asarray(velocity, dtype=float)
    t_pred = np.clip(config.controller_prediction_base + config.controller_prediction_gain * v,
                     config.controller_prediction_base, config.controller_prediction_max)
    heading = yaw + sideslip
    px = x + np.cos(heading) * v * t_pred
    py = y + np.sin(heading) * v * t_pred
    rx, ry = road_transform.to_road(px, py)

    curve_y = (section_a * rx + section_b) * rx + section_c
    slope = 2.0 * section_a * rx + section_b
    inv_norm = 1.0 / np.sqrt(1.0 + slope * slope)
    d_path = (curve_y - ry) * inv_norm
    e_yaw = _wrap_angle(np.arctan(slope) - (yaw - road_transform.angle))
    # Sections are curves y(x) with a +x tangent; a vehicle driving against
    # the road direction (counter traffic) follows the same curve backwards,
    # so fold the tangent into its direction of travel and flip the lateral
    # sign with it.
    backward = np.abs(e_yaw) > math.pi / 2.0
    e_yaw = np.where(backward, _wrap_angle(e_yaw - math.pi), e_yaw)
    d_path = np.where(backward, -d_path, d_path)

    command = np.radians(steering_command(v, d_path, e_yaw))
    command = np.clip(command, -params.max_steering_angle, params.max_steering_angle)
    max_delta = params.max_steering_rate * tau
    return np.clip(command, prev_steering - max_delta, prev_steering + max_delta)


# ---------------------------------------------------------------------------
# Rollouts

@dataclass(frozen=True)
class Trajectory:
    """One hypothesis rollout: poses are (steps, 5) rows of x, y, yaw, v, sideslip."""

    object_id: str
    hypothesis_id: int
    profile_id: int
    path_id: int
    poses: np.ndarray
    drivable: bool = True


@dataclass
class HypothesisSet:
    """All trajectories of one object plus the quantities used for scoring."""

    object_id: str
    kind: ObjectKind
    length: float
    width: float
    poses: np.ndarray            # (H, steps, 5)
    profile_count: int
    path_count: int
    profile_targets: np.ndarray  # (H,) acceleration-equivalent target, m/s^2
    reference_accel: float       # m/s^2
    terminal_offsets: np.ndarray  # (H,) |lateral offset| from reference path, m
    lane_changes: np.ndarray     # (H,) int
    counter_traffic: np.ndarray  # (H,) bool
    reference_poses: np.ndarray  # (steps, 5)

    @property
    def count(self) -> int:
        return self.poses.shape[0]

    def profile_of(self, hypothesis: int) -> int:
        return hypothesis // self.path_count

    def path_of(self, hypothesis: int) -> int:
        return hypothesis % self.path_count

    def trajectory(self, hypothesis: int) -> Trajectory:
        return Trajectory(
            object_id=self.object_id,
            hypothesis_id=hypothesis,
            profile_id=self.profile_of(hypothesis),
            path_id=self.path_of(hypothesis),
            poses=self.poses[hypothesis],
        )


def _section_index(t: float, instances: tuple[float, ...]) -> int:
    # Section i governs until its sampling instance; the last one to the horizon.
    for i, boundary in enumerate(instances[:-1]):
        if t < boundary:
            return i
    return len(instances) - 1


def _section_coefficient_arrays(paths: list[PathSpec], n_instances: int):
    coeffs = np.empty((n_instances, len(paths), 3))
    for k, path in enumerate(paths):
        for s in range(n_instances):
            coeffs[s, k, :] = path.sections[s].curve.coefficients()
    return coeffs


@dataclass(frozen=True)
class _ParamRows:
    """Per-row vehicle parameters; duck-compatible with VehicleParameters."""

    mass: np.ndarray
    yaw_inertia: np.ndarray
    cog_to_front: np.ndarray
    cog_to_rear: np.ndarray
    cornering_stiffness_front: np.ndarray
    cornering_stiffness_rear: np.ndarray
    max_steering_angle: np.ndarray
    max_steering_rate: np.ndarray

    @property
    def wheelbase(self) -> np.ndarray:
        return self.cog_to_front + self.cog_to_rear

    @classmethod
    def tile(cls, params_per_row: list[tuple[VehicleParameters, int]]) -> "_ParamRows":
        fields = ("mass", "yaw_inertia", "cog_to_front", "cog_to_rear",
                  "cornering_stiffness_front", "cornering_stiffness_rear",
                  "max_steering_angle", "max_steering_rate")
        columns = {name: [] for name in fields}
        for params, count in params_per_row:
            for name in fields:
                columns[name].append(np.full(count, getattr(params, name)))
        return cls(**{name: np.concatenate(columns[name]) for name in fields})


def _slip_equivalent(acceleration: float, config: SimulationConfig) -> float:
    """Commanded slip producing the given acceleration in the linear force
    balance F = slip_stiffness * m * g * slip."""
    return float(np.clip(acceleration / (config.slip_stiffness_factor * GRAVITY),
                         -config.slip_range, config.slip_range))


def _rollout_rows(starts: np.ndarray, params, coeffs_by_instance: list[np.ndarray],
                  targets: np.ndarray, initial_cmd: np.ndarray,
                  latency: float, ramp: float, road: RoadModel,
                  config: SimulationConfig, model: str,
                  steering_out: np.ndarray | None = None) -> np.ndarray:
    """Advance a flat batch of trajectory rows through all time steps.

    starts columns: x, y, yaw, v, sideslip, yaw_rate, acceleration.  params
    may be one VehicleParameters or per-row _ParamRows.  Every operation is
    element-wise per row, so any partition of the rows computes bit-identical
    results.
    """
    if model not in ("one_track", "two_track"):
        raise ScenarioError(f"unknown vehicle model {model!r}")
    steps = config.steps
    tau = config.step

    x = starts[:, 0].copy()
    y = starts[:, 1].copy()
    yaw = starts[:, 2].copy()
    v = starts[:, 3].copy()
    beta = starts[:, 4].copy()
    yaw_rate = starts[:, 5].copy()
    ax, ay = body_acceleration(v, beta, 0.0, yaw_rate, starts[:, 6])
    ax = np.asarray(ax, dtype=float).copy()
    ay = np.asarray(ay, dtype=float).copy()
    prev_steer = np.zeros(x.shape[0])

    poses = np.empty((x.shape[0], steps, 5))
    for n in range(steps):
        t = n * tau
        s = _section_index(t, config.sampling_instances)
        abc = coeffs_by_instance[s]
        steer = lateral_controller(v, x, y, yaw, beta, abc[:, 0], abc[:, 1], abc[:, 2],
                                   road.transform, prev_steer, params, config, tau)
        prev_steer = steer
        if steering_out is not None:
            steering_out[:, n] = steer

        ramp_budget = ramp * max(t - latency, 0.0)
        command = initial_cmd + np.clip(targets - initial_cmd, -ramp_budget, ramp_budget)

        if model == "one_track":
            moving = v >= config.low_speed_threshold
            v_dot = command
            beta_dot, yaw_acc = one_track_derivatives(
                np.maximum(v, config.low_speed_threshold), beta, yaw_rate, steer, params)
            beta_dot = np.where(moving, beta_dot, 0.0)
            yaw_acc = np.where(moving, yaw_acc, 0.0)
        else:
            v_dot, beta_dot, yaw_acc = two_track_derivatives(
                v, beta, yaw_rate, steer, command, params,
                config.slip_stiffness_factor, config.friction_coefficient,
                config.low_speed_threshold)

        x, y, yaw, v, beta, yaw_rate, ax, ay = euler_step(
            x, y, yaw, v, beta, yaw_rate, ax, ay, v_dot, beta_dot, yaw_acc, tau)
        # A stopped vehicle neither yaws nor drifts.
        stopped = v <= 0.0
        yaw_rate = np.where(stopped, 0.0, yaw_rate)

        poses[:, n, 0] = x
        poses[:, n, 1] = y
        poses[:, n, 2] = yaw
        poses[:, n, 3] = v
        poses[:, n, 4] = beta
    return poses


def _start_rows(obj: ObjectState, count: int) -> np.ndarray:
    row = [obj.position.x, obj.position.y, obj.yaw, obj.velocity,
           obj.sideslip, obj.yaw_rate, obj.acceleration]
    return np.tile(np.asarray(row, dtype=float), (count, 1))


def _hypothesis_rows(obj: ObjectState, profiles: list[AccelerationProfile],
                     paths: list[PathSpec], config: SimulationConfig, model: str):
    """Per-row arrays (starts, coefficients, targets, initial commands)."""
    n_paths = len(paths)
    n_hyp = len(profiles) * n_paths
    section_coeffs = _section_coefficient_arrays(paths, len(config.sampling_instances))
    path_index = np.tile(np.arange(n_paths), len(profiles))
    coeffs_by_instance = [section_coeffs[s][path_index]
                          for s in range(len(config.sampling_instances))]
    targets = np.repeat([p.target for p in profiles], n_paths)
    if model == "two_track":
        initial = _slip_equivalent(obj.acceleration, config)
    else:
        initial = obj.acceleration
    initial_cmd = np.full(n_hyp, initial)
    return _start_rows(obj, n_hyp), coeffs_by_instance, targets, initial_cmd


def rollout_vehicle_batch(obj: ObjectState, params: VehicleParameters,
                          profiles: list[AccelerationProfile], paths: list[PathSpec],
                          road: RoadModel, config: SimulationConfig,
                          model: str, steering_out: np.ndarray | None = None) -> np.ndarray:
    """Roll out every (profile x path) hypothesis of one vehicle.

    Returns poses of shape (len(profiles)*len(paths), steps, 5); hypothesis
    index is profile-major.  Time steps are strictly sequential, hypotheses
    advance in lockstep.  ``steering_out`` (same leading shape, steps columns)
    records the applied steering angles when given.
    """
    starts, coeffs, targets, initial_cmd = _hypothesis_rows(
        obj, profiles, paths, config, model)
    return _rollout_rows(starts, params, coeffs, targets, initial_cmd,
                         profiles[0].latency, profiles[0].ramp_limit,
                         road, config, model, steering_out)


def rollout_pedestrian_batch(obj: ObjectState, headings: np.ndarray,
                             accels: np.ndarray, config: SimulationConfig) -> np.ndarray:
    """Roll out the pedestrian (acceleration x heading) grid.

    Hypothesis index is acceleration-major, mirroring the vehicles'
    profile-major layout so the counting formulas apply unchanged.
    """
    n_acc = len(accels)
    n_head = len(headings)
    n_hyp = n_acc * n_head
    steps = config.steps
    tau = config.step

    heading = np.tile(headings, n_acc)
    v_dot = np.repeat(accels, n_head)
    x = np.full(n_hyp, obj.position.x)
    y = np.full(n_hyp, obj.position.y)
    v = np.full(n_hyp, obj.velocity)

    poses = np.empty((n_hyp, steps, 5))
    for n in range(steps):
        x, y, v = pedestrian_step(x, y, v, heading, v_dot, tau,
                                  v_max=config.pedestrian_speed_max)
        poses[:, n, 0] = x
        poses[:, n, 1] = y
        poses[:, n, 2] = heading
        poses[:, n, 3] = v
        poses[:, n, 4] = 0.0
    return poses


def rollout(obj: ObjectState, params: VehicleParameters | None,
            profile: AccelerationProfile | None, path: PathSpec | None,
            road: RoadModel | None, config: SimulationConfig,
            pedestrian_heading: float | None = None,
            pedestrian_accel: float | None = None) -> Trajectory:
    """Roll out a single hypothesis (batch of one); mainly a test surface."""
    if obj.kind is ObjectKind.PEDESTRIAN:
        poses = rollout_pedestrian_batch(
            obj, np.array([pedestrian_heading]), np.array([pedestrian_accel]), config)
        return Trajectory(obj.object_id, 0, 0, 0, poses[0])
    model = "two_track" if obj.kind is ObjectKind.EGO_VEHICLE else "one_track"
    poses = rollout_vehicle_batch(obj, params, [profile], [path], road, config, model)
    return Trajectory(obj.object_id, 0, profile.profile_id, path.path_id, poses[0])


# ---------------------------------------------------------------------------
# Reference trajectories and full per-object hypothesis sets

def build_reference_trajectory(obj: ObjectState, params: VehicleParameters | None,
                               road: RoadModel | None,
                               config: SimulationConfig) -> np.ndarray:
    """Expected-behavior rollout: current acceleration, toward the lane middle.

    Pedestrians, which are not bound to the road, continue straight at
    constant speed.  Returns poses of shape (steps, 5).
    """
    if obj.kind is ObjectKind.PEDESTRIAN:
        return rollout_pedestrian_batch(obj, np.array([obj.yaw]), np.array([0.0]), config)[0]
    model = "two_track" if obj.kind is ObjectKind.EGO_VEHICLE else "one_track"
    # Constant command equal to the current acceleration: target == initial,
    # so latency and ramp are inert (finite ramp keeps the arithmetic clean).
    constant = AccelerationProfile(
        profile_id=-1,
        kind="acceleration" if model == "one_track" else "slip",
        target=(obj.acceleration if model == "one_track" else float(np.clip(
            obj.acceleration / (config.slip_stiffness_factor * GRAVITY),
            -config.slip_range, config.slip_range))),
        latency=0.0,
        ramp_limit=1e9,
    )
    path = centerline_path(obj, road, config)
    return rollout_vehicle_batch(obj, params, [constant], [path], road, config, model)[0]


def _terminal_offsets_vehicle(poses: np.ndarray, road: RoadModel,
                              reference_curve: LaneDivider) -> np.ndarray:
    rx, ry = road.transform.to_road(poses[:, -1, 0], poses[:, -1, 1])
    slope = reference_curve.slope(rx)
    dy = ry - reference_curve.y(rx)
    return np.abs(dy / np.sqrt(1.0 + slope * slope))


def _terminal_offsets_pedestrian(poses: np.ndarray, obj: ObjectState) -> np.ndarray:
    dx = poses[:, -1, 0] - obj.position.x
    dy = poses[:, -1, 1] - obj.position.y
    return np.abs(-math.sin(obj.yaw) * dx + math.cos(obj.yaw) * dy)


def _assemble_pedestrian_set(obj: ObjectState, poses: np.ndarray,
                             headings: np.ndarray, accels: np.ndarray,
                             reference: np.ndarray) -> HypothesisSet:
    n_hyp = poses.shape[0]
    return HypothesisSet(
        object_id=obj.object_id,
        kind=obj.kind,
        length=obj.length,
        width=obj.width,
        poses=poses,
        profile_count=len(accels),
        path_count=len(headings),
        profile_targets=np.repeat(accels, len(headings)),
        reference_accel=0.0,
        terminal_offsets=_terminal_offsets_pedestrian(poses, obj),
        lane_changes=np.zeros(n_hyp, dtype=int),
        counter_traffic=np.zeros(n_hyp, dtype=bool),
        reference_poses=reference,
    )


def _assemble_vehicle_set(obj: ObjectState, road: RoadModel, config: SimulationConfig,
                          poses: np.ndarray, profiles: list[AccelerationProfile],
                          paths: list[PathSpec], reference: np.ndarray,
                          slip_kind: bool) -> HypothesisSet:
    if slip_kind:
        accel_targets = np.array([p.target * config.slip_stiffness_factor * GRAVITY
                                  for p in profiles])
    else:
        accel_targets = np.array([p.target for p in profiles])
    n_paths = len(paths)
    assoc_lane = associate_lane(obj, road).lane
    return HypothesisSet(
        object_id=obj.object_id,
        kind=obj.kind,
        length=obj.length,
        width=obj.width,
        poses=poses,
        profile_count=len(profiles),
        path_count=n_paths,
        profile_targets=np.repeat(accel_targets, n_paths),
        reference_accel=obj.acceleration,
        terminal_offsets=_terminal_offsets_vehicle(poses, road, assoc_lane.centerline()),
        lane_changes=np.tile(np.array([p.lane_changes for p in paths]), len(profiles)),
        counter_traffic=np.tile(np.array([p.counter_traffic for p in paths]), len(profiles)),
        reference_poses=reference,
    )


def generate_hypotheses(obj: ObjectState, params: VehicleParameters | None,
                        road: RoadModel, config: SimulationConfig) -> HypothesisSet:
    """All hypotheses of one object plus its reference and scoring inputs."""
    reference = build_reference_trajectory(obj, params, road, config)

    if obj.kind is ObjectKind.PEDESTRIAN:
        headings = pedestrian_heading_samples(config)
        accels = pedestrian_accel_samples(config)
        poses = rollout_pedestrian_batch(obj, headings, accels, config)
        return _assemble_pedestrian_set(obj, poses, headings, accels, reference)

    model = "two_track" if obj.kind is ObjectKind.EGO_VEHICLE else "one_track"
    kind = "slip" if model == "two_track" else "acceleration"
    profiles = build_profiles(config, kind)
    paths = sample_paths(obj, road, reference, config)
    poses = rollout_vehicle_batch(obj, params, profiles, paths, road, config, model)
    return _assemble_vehicle_set(obj, road, config, poses, profiles, paths,
                                 reference, slip_kind=(kind == "slip"))


def generate_all(scenario, road: RoadModel, config: SimulationConfig) -> dict:
    """Hypothesis sets for every scenario object, batched across objects.

    All one-track rollouts (references, then hypothesis grids of every
    vehicle CO) run as single flat row batches.  Row-wise the arithmetic is
    identical to per-object generation, so the split sets match
    ``generate_hypotheses`` bit for bit; only the Python-level dispatch
    overhead is shared.
    """
    results: dict[str, HypothesisSet] = {}
    ego = scenario.ego
    results[ego.object_id] = generate_hypotheses(ego, scenario.ego_params, road, config)

    co_vehicles = [(obj, par) for obj, par in zip(scenario.objects, scenario.object_params)
                   if obj.kind is ObjectKind.CO_VEHICLE]
    pedestrians = [obj for obj in scenario.objects
                   if obj.kind is ObjectKind.PEDESTRIAN]

    if co_vehicles:
        # Merged constant-command reference rollout, one row per CO.
        centerlines = [centerline_path(obj, road, config) for obj, _ in co_vehicles]
        ref_coeffs = [
            np.concatenate([_section_coefficient_arrays([path], len(config.sampling_instances))[s]
                            for path in centerlines])
            for s in range(len(config.sampling_instances))
        ]
        starts = np.concatenate([_start_rows(obj, 1) for obj, _ in co_vehicles])
        accels = starts[:, 6]
        param_rows = _ParamRows.tile([(par, 1) for _, par in co_vehicles])
        references = _rollout_rows(starts, param_rows, ref_coeffs, accels.copy(),
                                   accels.copy(), 0.0, 1e9, road, config, "one_track")

        # Merged hypothesis rollout: contiguous row blocks per CO.
        profiles = build_profiles(config, "acceleration")
        paths_per_object = []
        blocks = []
        for k, (obj, par) in enumerate(co_vehicles):
            paths = sample_paths(obj, road, references[k], config)
            paths_per_object.append(paths)
            blocks.append(_hypothesis_rows(obj, profiles, paths, config, "one_track"))
        starts = np.concatenate([b[0] for b in blocks])
        coeffs = [np.concatenate([b[1][s] for b in blocks])
                  for s in range(len(config.sampling_instances))]
        targets = np.concatenate([b[2] for b in blocks])
        initial_cmd = np.concatenate([b[3] for b in blocks])
        param_rows = _ParamRows.tile(
            [(par, len(profiles) * len(paths))
             for (_, par), paths in zip(co_vehicles, paths_per_object)])
        poses = _rollout_rows(starts, param_rows, coeffs, targets, initial_cmd,
                              profiles[0].latency, profiles[0].ramp_limit,
                              road, config, "one_track")
        offset = 0
        for k, (obj, par) in enumerate(co_vehicles):
            count = len(profiles) * len(paths_per_object[k])
            results[obj.object_id] = _assemble_vehicle_set(
                obj, road, config, poses[offset:offset + count], profiles,
                paths_per_object[k], references[k], slip_kind=False)
            offset += count

    for obj in pedestrians:
        results[obj.object_id] = generate_hypotheses(obj, None, road, config)
    return results


def count_trajectories(co_count: int, config: SimulationConfig) -> int:
    """Total parallel trajectory count r_tra for the nominal full road."""
    return (co_count * config.accel_profile_count * config.co_path_count
            + config.accel_profile_count * config.ego_path_count)
