"""Simulation configuration and its canonical defaults.

Every tunable of the pipeline lives here so that tests and the CLI never
hard-code constants.  Defaults give the canonical workload: 2 s horizon at
20 ms steps, 6 acceleration profiles, 7 complete paths per collision object
and 7^3 = 343 complete paths for the EGO-vehicle on a full three-lane road.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ScenarioError

GRAVITY = 9.81  # m/s^2


@dataclass(frozen=True)
class SimulationConfig:
    # Time discretization
    horizon: float = 2.0            # s, prediction horizon T
    step: float = 0.02              # s, integration/collision step tau

    # Hypothesis counts
    accel_profile_count: int = 6    # h_acc, acceleration/slip profiles per vehicle
    co_path_count: int = 7          # h_CO_str, complete paths per CO on a full road

    # Longitudinal variation
    accel_range: float = 9.7        # m/s^2, one-track profile extreme
    slip_range: float = 0.1         # dimensionless, two-track profile extreme
    profile_latency: float = 0.2    # s before a profile starts acting
    profile_jerk: float = 30.0      # m/s^3 ramp limit toward the profile target

    # Path sampling
    sampling_instances: tuple[float, ...] = (1.0, 1.5, 2.0)  # s along the reference
    own_lane_fractions: tuple[float, ...] = (0.25, 0.5, 0.75)
    neighbor_lane_fractions: tuple[float, ...] = (1.0 / 3.0, 2.0 / 3.0)

    # Lateral controller
    controller_prediction_base: float = 0.1    # s
    controller_prediction_gain: float = 0.02   # s per m/s
    controller_prediction_max: float = 0.5     # s
    low_speed_threshold: float = 1.0           # m/s, below: lateral dynamics frozen

    # Two-track tire model
    slip_stiffness_factor: float = 10.0  # longitudinal force per unit slip, in wheel loads
    friction_coefficient: float = 1.0    # friction-circle mu

    # Pedestrians
    pedestrian_speed_max: float = 2.7    # m/s
    pedestrian_accel_range: float = 12.0  # m/s^2, heading-wise acceleration samples
    pedestrian_footprint: tuple[float, float] = (0.5, 0.5)  # m, default length x width

    # Scoring
    weight_accel: float = 0.5
    weight_path: float = 0.5
    accel_score_scale: float = 4.85      # m/s^2, e-folding of the profile deviation score
    path_score_scale: float = 1.75       # m, e-folding of the terminal offset score
    lane_change_penalty: float = 0.25    # added to the maneuver-complexity divisor per change
    counter_traffic_penalty: float = 4.0  # divisor when a counter-traffic lane is entered

    # Road model
    virtual_lane_width: float = 3.5      # m, legal width used for synthesized lanes

    # Collision recognition
    collision_mode: str = "paper"        # "paper" (double vertex containment) or "exact" (SAT)
    footprint_subdivisions: int = 1      # vertices per rectangle edge

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.horizon <= 0 or self.step <= 0:
            raise ScenarioError("horizon and step must be positive")
        steps = self.horizon / self.step
        if abs(steps - round(steps)) > 1e-9:
            raise ScenarioError(f"horizon {self.horizon} is not a whole number of {self.step} s steps")
        if self.accel_profile_count < 3:
            raise ScenarioError("accel_profile_count must be at least 3 (min, zero, max)")
        expected_paths = len(self.own_lane_fractions) + 2 * len(self.neighbor_lane_fractions)
        if self.co_path_count != expected_paths:
            raise ScenarioError(
                f"co_path_count {self.co_path_count} inconsistent with lane sample "
                f"fractions (3 own + 2 per neighbor = {expected_paths})"
            )
        if not all(0.0 < t <= self.horizon for t in self.sampling_instances):
            raise ScenarioError("sampling instances must lie within (0, horizon]")
        if list(self.sampling_instances) != sorted(self.sampling_instances):
            raise ScenarioError("sampling instances must be ascending")
        if self.weight_accel <= 0 or self.weight_path <= 0:
            raise ScenarioError("scoring weights must be positive")
        if self.lane_change_penalty < 0 or self.counter_traffic_penalty < 1:
            raise ScenarioError("penalty factors must keep divisors >= 1")
        if self.collision_mode not in ("paper", "exact"):
            raise ScenarioError(f"unknown collision mode {self.collision_mode!r}")
        if self.footprint_subdivisions < 1:
            raise ScenarioError("footprint_subdivisions must be >= 1")

    @property
    def steps(self) -> int:
        """Number of simulated time steps T/tau."""
        return round(self.horizon / self.step)

    @property
    def sections_per_instance(self) -> int:
        """Lateral sample slots per sampling instance on a full road."""
        return len(self.own_lane_fractions) + 2 * len(self.neighbor_lane_fractions)

    @property
    def ego_path_count(self) -> int:
        """h_EGO_str on a full road: slot combinations across all instances."""
        return self.sections_per_instance ** len(self.sampling_instances)

    def with_overrides(self, **overrides) -> "SimulationConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ScenarioError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "SimulationConfig":
        if not isinstance(raw, dict):
            raise ScenarioError("config must be a JSON object")
        kwargs = dict(raw)
        for key in ("sampling_instances", "own_lane_fractions", "neighbor_lane_fractions",
                    "pedestrian_footprint"):
            if key in kwargs and isinstance(kwargs[key], list):
                kwargs[key] = tuple(kwargs[key])
        return cls().with_overrides(**kwargs)
