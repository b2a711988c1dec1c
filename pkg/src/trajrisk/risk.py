"""Hypothesis scoring, occurrence probabilities and scenario criticality.

Each hypothesis is scored against its object's reference trajectory: close
acceleration and small terminal path offset score high, maneuver complexity
and entering counter-traffic lanes divide the score down.  Per object the
scores are L1-normalized into occurrence probabilities.  Colliding
combinations multiply the EGO and CO trajectory probabilities; with several
collision objects the combination probabilities are scaled down in
chronological order, approximating the conditional probability that no
earlier collision happened.  The criticality p_cra is the sum over the
(scaled) colliding combinations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import SimulationConfig
from .errors import ScenarioError
from .hypotheses import HypothesisSet


@dataclass(frozen=True)
class HypothesisScore:
    """Score components of one hypothesis (probability set after normalization)."""

    trajectory_index: int
    accel_score: float        # n_acc in (0, 1]
    path_score: float         # d_str in (0, 1]
    complexity_penalty: float  # c_com >= 1
    counter_penalty: float     # c_cou >= 1
    combined: float           # n_h > 0
    probability: float = float("nan")


def score_components(hypotheses: HypothesisSet, config: SimulationConfig):
    """Vectorized score factors (n_acc, d_str, c_com, c_cou, n_h) per hypothesis."""
    n_acc = np.exp(-np.abs(hypotheses.profile_targets - hypotheses.reference_accel)
                   / config.accel_score_scale)
    d_str = np.exp(-hypotheses.terminal_offsets / config.path_score_scale)
    c_com = 1.0 + config.lane_change_penalty * hypotheses.lane_changes
    c_cou = np.where(hypotheses.counter_traffic, config.counter_traffic_penalty, 1.0)
    n_h = (config.weight_accel * n_acc + config.weight_path * d_str) / (c_com * c_cou)
    return n_acc, d_str, c_com, c_cou, n_h


def score_hypothesis(hypotheses: HypothesisSet, index: int,
                     config: SimulationConfig) -> HypothesisScore:
    """Score of a single hypothesis against its object's reference."""
    n_acc, d_str, c_com, c_cou, n_h = score_components(hypotheses, config)
    return HypothesisScore(
        trajectory_index=index,
        accel_score=float(n_acc[index]),
        path_score=float(d_str[index]),
        complexity_penalty=float(c_com[index]),
        counter_penalty=float(c_cou[index]),
        combined=float(n_h[index]),
    )


def normalize(scores: np.ndarray) -> np.ndarray:
    """L1-normalize per-object scores into occurrence probabilities."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ScenarioError("cannot normalize an empty score set")
    if np.any(scores <= 0.0):
        raise ScenarioError("scores must be positive for L1 normalization")
    return scores / scores.sum()


def scored_hypotheses(hypotheses: HypothesisSet,
                      config: SimulationConfig) -> list[HypothesisScore]:
    """All hypothesis scores of one object with probabilities filled in."""
    n_acc, d_str, c_com, c_cou, n_h = score_components(hypotheses, config)
    probabilities = normalize(n_h)
    return [
        HypothesisScore(
            trajectory_index=i,
            accel_score=float(n_acc[i]),
            path_score=float(d_str[i]),
            complexity_penalty=float(c_com[i]),
            counter_penalty=float(c_cou[i]),
            combined=float(n_h[i]),
            probability=float(probabilities[i]),
        )
        for i in range(hypotheses.count)
    ]


@dataclass(frozen=True)
class CollidingCombination:
    """One colliding (EGO trajectory, CO trajectory) pair."""

    ego_index: int
    object_id: str
    co_index: int       # hypothesis index within the object
    column: int         # CO column in the collision matrix
    step: int           # earliest colliding time step
    probability: float  # p_EGO,i * p_CO,j
    scaled_probability: float


def apply_conditional_scaling(
        combinations: list[CollidingCombination]) -> list[CollidingCombination]:
    """Scale combination probabilities down in chronological order.

    The first combination to occur keeps its probability; each later one is
    multiplied by the running probability that no earlier combination
    collided (ties broken by EGO index, then column, for determinism).
    """
    ordered = sorted(combinations, key=lambda c: (c.step, c.ego_index, c.column))
    survival = 1.0
    scaled = []
    for combo in ordered:
        scaled.append(replace(combo, scaled_probability=survival * combo.probability))
        survival *= 1.0 - combo.probability
    return scaled


@dataclass(frozen=True)
class CriticalityResult:
    """Scenario-level output: collision probability, per-CO split, escape routes."""

    p_cra: float
    co_probabilities: tuple[tuple[str, float], ...]
    combinations: tuple[CollidingCombination, ...]
    escape_routes: tuple[tuple[int, float], ...]  # (EGO trajectory index, probability)
    timestamp: float = 0.0

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "p_cra": self.p_cra,
            "co_probabilities": {k: v for k, v in self.co_probabilities},
            "colliding_combinations": [
                {
                    "ego_index": c.ego_index,
                    "object_id": c.object_id,
                    "co_index": c.co_index,
                    "step": c.step,
                    "probability": c.probability,
                    "scaled_probability": c.scaled_probability,
                }
                for c in self.combinations
            ],
            "escape_routes": [[i, p] for i, p in self.escape_routes],
        }


def aggregate_criticality(collision_steps: np.ndarray, column_objects: tuple[str, ...],
                          column_local_index: np.ndarray,
                          ego_probabilities: np.ndarray,
                          column_probabilities: np.ndarray,
                          object_ids: tuple[str, ...],
                          timestamp: float = 0.0) -> CriticalityResult:
    """Aggregate the collision matrix and probabilities into p_cra.

    With a single collision object the colliding combinations are mutually
    exclusive and p_cra is the plain double sum of the probability products.
    With two or more objects involved, simultaneous hypotheses of different
    objects are not exclusive and the chronological conditional scaling is
    applied before summing.
    """
    i_idx, j_idx = np.nonzero(collision_steps >= 0)
    raw = ego_probabilities[i_idx] * column_probabilities[j_idx]
    steps = collision_steps[i_idx, j_idx]

    combos = [
        CollidingCombination(
            ego_index=int(i),
            object_id=column_objects[j],
            co_index=int(column_local_index[j]),
            column=int(j),
            step=int(step),
            probability=float(p),
            scaled_probability=float(p),
        )
        for i, j, step, p in zip(i_idx, j_idx, steps, raw)
    ]

    involved_objects = {c.object_id for c in combos}
    if len(involved_objects) >= 2:
        combos = apply_conditional_scaling(combos)

    p_cra = float(sum(c.scaled_probability for c in combos))

    per_object = []
    for obj_id in object_ids:
        per_object.append(
            (obj_id, float(sum(c.scaled_probability for c in combos
                               if c.object_id == obj_id))))

    colliding_ego = np.zeros(len(ego_probabilities), dtype=bool)
    colliding_ego[i_idx] = True
    escape_indices = np.nonzero(~colliding_ego)[0]
    order = np.lexsort((escape_indices, -ego_probabilities[escape_indices]))
    escapes = tuple((int(escape_indices[k]), float(ego_probabilities[escape_indices[k]]))
                    for k in order)

    return CriticalityResult(
        p_cra=p_cra,
        co_probabilities=tuple(per_object),
        combinations=tuple(combos),
        escape_routes=escapes,
        timestamp=timestamp,
    )
