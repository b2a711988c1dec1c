"""Pipeline orchestration: street, generation, collision, risk.

The four stages run strictly in order; inside a stage, work items (divider
fits, per-object rollouts, trajectory pairs) are independent and execute
over immutable inputs into disjoint output slots, so results are
bit-identical for any worker count.  Flat index spaces tie the stages
together: trajectories live in one array ordered EGO block first, then one
block per collision object, hypothesis index profile-major within a block.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .collision import CollisionMatrix, count_pose_combinations, detect_collisions
from .config import SimulationConfig
from .errors import EngineError, TrajriskError
from .geometry import RoadModel, build_road_from_scenario
from .hypotheses import HypothesisSet, generate_all
from .risk import CriticalityResult, aggregate_criticality, normalize, score_components
from .scenario import Scenario

STAGES = ("street", "generation", "collision", "risk")


@dataclass(frozen=True)
class ObjectBlock:
    """Position of one object's hypotheses in the flat trajectory array."""

    object_id: str
    start: int
    profile_count: int
    path_count: int

    @property
    def count(self) -> int:
        return self.profile_count * self.path_count

    def flat_index(self, profile: int, path: int) -> int:
        if not (0 <= profile < self.profile_count and 0 <= path < self.path_count):
            raise IndexError("profile/path index out of range")
        return self.start + profile * self.path_count + path

    def decompose(self, flat: int) -> tuple[int, int]:
        local = flat - self.start
        if not 0 <= local < self.count:
            raise IndexError("flat index outside this block")
        return local // self.path_count, local % self.path_count


@dataclass(frozen=True)
class IndexLayout:
    """Bijective maps between nested and flat hypothesis/pair indexes."""

    ego: ObjectBlock
    objects: tuple[ObjectBlock, ...]
    steps: int

    @property
    def r_ego(self) -> int:
        return self.ego.count

    @property
    def r_co(self) -> int:
        return sum(block.count for block in self.objects)

    @property
    def r_tra(self) -> int:
        return self.r_ego + self.r_co

    @property
    def r_col(self) -> int:
        return self.r_ego * self.r_co

    def block_for(self, object_id: str) -> ObjectBlock:
        if object_id == self.ego.object_id:
            return self.ego
        for block in self.objects:
            if block.object_id == object_id:
                return block
        raise KeyError(object_id)

    def decompose(self, flat: int) -> tuple[str, int, int]:
        for block in (self.ego, *self.objects):
            if block.start <= flat < block.start + block.count:
                profile, path = block.decompose(flat)
                return block.object_id, profile, path
        raise IndexError(f"flat index {flat} out of range")

    def pair_index(self, ego_index: int, column: int) -> int:
        if not (0 <= ego_index < self.r_ego and 0 <= column < self.r_co):
            raise IndexError("pair index out of range")
        return ego_index * self.r_co + column

    def pair_decompose(self, pair: int) -> tuple[int, int]:
        if not 0 <= pair < self.r_col:
            raise IndexError("pair index out of range")
        return pair // self.r_co, pair % self.r_co

    def column_local_index(self) -> np.ndarray:
        """Per matrix column: hypothesis index local to its object."""
        out = np.empty(self.r_co, dtype=np.int64)
        offset = 0
        for block in self.objects:
            out[offset:offset + block.count] = np.arange(block.count)
            offset += block.count
        return out


@dataclass(frozen=True)
class RunMetrics:
    """Per-run workload and timing figures."""

    stage_seconds: dict[str, float]
    pose_combinations: int
    combinations_per_second: float
    worker_count: int
    trajectory_count: int
    pair_count: int

    @property
    def total_seconds(self) -> float:
        return sum(self.stage_seconds.values())

    def to_dict(self) -> dict:
        return {
            "stage_seconds": dict(self.stage_seconds),
            "pose_combinations": self.pose_combinations,
            "combinations_per_second": self.combinations_per_second,
            "worker_count": self.worker_count,
            "trajectory_count": self.trajectory_count,
            "pair_count": self.pair_count,
        }


@dataclass
class EvaluationContext:
    """All intermediate products of one evaluation, for tests and tooling."""

    scenario: Scenario
    road: RoadModel | None = None
    hypotheses: dict = field(default_factory=dict)  # object_id -> HypothesisSet
    layout: IndexLayout | None = None
    matrix: CollisionMatrix | None = None
    ego_probabilities: np.ndarray | None = None
    column_probabilities: np.ndarray | None = None
    result: CriticalityResult | None = None
    metrics: RunMetrics | None = None


def resolve_workers(policy) -> int:
    """Translate a worker policy (int, 'auto', 'sequential', None) to a count."""
    if policy in (None, "sequential"):
        return 1
    if policy == "auto":
        return os.cpu_count() or 1
    count = int(policy)
    if count < 1:
        raise TrajriskError(f"invalid worker count {policy!r}")
    return count


def _layout_from_sets(scenario: Scenario, hypotheses: dict, steps: int) -> IndexLayout:
    ego_set = hypotheses[scenario.ego.object_id]
    blocks = []
    offset = ego_set.count
    for obj in scenario.objects:
        hyp_set = hypotheses[obj.object_id]
        blocks.append(ObjectBlock(object_id=obj.object_id, start=offset,
                                  profile_count=hyp_set.profile_count,
                                  path_count=hyp_set.path_count))
        offset += hyp_set.count
    return IndexLayout(
        ego=ObjectBlock(object_id=scenario.ego.object_id, start=0,
                        profile_count=ego_set.profile_count,
                        path_count=ego_set.path_count),
        objects=tuple(blocks),
        steps=steps,
    )


def compute_layout(scenario: Scenario) -> IndexLayout:
    """Index layout of a scenario: street and generation stages only.

    Gives the engine-reported workload counts (r_tra, r_col, pose
    combinations) without paying for the collision scan.
    """
    road = build_road_from_scenario(scenario)
    hypotheses = generate_all(scenario, road, scenario.config)
    return _layout_from_sets(scenario, hypotheses, scenario.config.steps)


def run_pipeline(scenario: Scenario, workers=1,
                 stage_hook=None) -> EvaluationContext:
    """Execute all four stages and return every intermediate product.

    ``stage_hook(name, phase)`` is called around each stage ('enter'/'exit');
    used by instrumentation tests of the stage ordering.
    """
    worker_count = resolve_workers(workers)
    config = scenario.config
    ctx = EvaluationContext(scenario=scenario)
    stage_seconds: dict[str, float] = {}

    def staged(name, fn):
        if stage_hook:
            stage_hook(name, "enter")
        start = time.perf_counter()
        try:
            out = fn()
        except TrajriskError as exc:
            raise EngineError(name, exc) from exc
        stage_seconds[name] = time.perf_counter() - start
        if stage_hook:
            stage_hook(name, "exit")
        return out

    ctx.road = staged("street", lambda: build_road_from_scenario(scenario))

    ctx.hypotheses = staged(
        "generation", lambda: generate_all(scenario, ctx.road, config))

    ego_set: HypothesisSet = ctx.hypotheses[scenario.ego.object_id]
    ctx.layout = _layout_from_sets(scenario, ctx.hypotheses, config.steps)

    def collision():
        co_sets = [ctx.hypotheses[obj.object_id] for obj in scenario.objects]
        return detect_collisions(
            ego_set.poses, (ego_set.length, ego_set.width),
            [s.poses for s in co_sets],
            [(s.length, s.width) for s in co_sets],
            [s.object_id for s in co_sets],
            config, workers=worker_count)

    ctx.matrix = staged("collision", collision)

    def risk():
        ego_scores = score_components(ego_set, config)[4]
        ctx.ego_probabilities = normalize(ego_scores)
        column_probs = []
        for obj in scenario.objects:
            hyp_set = ctx.hypotheses[obj.object_id]
            column_probs.append(normalize(score_components(hyp_set, config)[4]))
        ctx.column_probabilities = (
            np.concatenate(column_probs) if column_probs else np.empty(0))
        return aggregate_criticality(
            ctx.matrix.steps, ctx.matrix.column_objects,
            ctx.layout.column_local_index(),
            ctx.ego_probabilities, ctx.column_probabilities,
            tuple(obj.object_id for obj in scenario.objects),
            timestamp=scenario.timestamp)

    ctx.result = staged("risk", risk)

    pose_combinations = ctx.layout.r_col * config.steps
    total = sum(stage_seconds.values())
    ctx.metrics = RunMetrics(
        stage_seconds=stage_seconds,
        pose_combinations=pose_combinations,
        combinations_per_second=pose_combinations / total if total > 0 else 0.0,
        worker_count=worker_count,
        trajectory_count=ctx.layout.r_tra,
        pair_count=ctx.layout.r_col,
    )
    return ctx


def evaluate(scenario: Scenario, workers=1) -> tuple[CriticalityResult, RunMetrics]:
    """Evaluate one scenario frame; output is independent of the worker policy."""
    ctx = run_pipeline(scenario, workers=workers)
    return ctx.result, ctx.metrics


@dataclass(frozen=True)
class FrameOutcome:
    """Per-frame result of a replay; failed frames carry the error instead."""

    timestamp: float
    result: CriticalityResult | None
    metrics: RunMetrics | None
    error: str | None = None


def evaluate_stream(frames, workers=1):
    """Evaluate time-ordered scenario frames independently, from the ground up.

    Frames may be validated Scenario objects or raw scenario dicts.  Yields
    one FrameOutcome per frame; a failing frame is reported in place without
    aborting the stream.
    """
    from .scenario import validate_scenario

    for frame in frames:
        timestamp = float("nan")
        try:
            if isinstance(frame, Scenario):
                scenario = frame
            else:
                scenario = validate_scenario(frame)
            timestamp = scenario.timestamp
            result, metrics = evaluate(scenario, workers=workers)
            yield FrameOutcome(timestamp=timestamp, result=result, metrics=metrics)
        except TrajriskError as exc:
            if isinstance(frame, dict):
                timestamp = frame.get("timestamp", timestamp)
            yield FrameOutcome(timestamp=timestamp, result=None, metrics=None,
                               error=str(exc))


def verify_pose_combination_count(co_count: int, config: SimulationConfig,
                                  metrics: RunMetrics) -> bool:
    """Metrics invariant: reported pose combinations match the closed formula."""
    return metrics.pose_combinations == count_pose_combinations(co_count, config)
