"""Scikit-learn style front end for the criticality engine.

The engine is a fully model-based predictor: a scenario frame goes in, a
collision probability comes out, and every knob is a constructor parameter.
Wrapping it as a ``BaseEstimator`` makes it compose with the surrounding
ecosystem (``get_params``/``set_params``, ``clone``, parameter grids).
There is nothing to learn from data, so ``fit`` validates the configuration
and returns the estimator, like other stateless transformers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .config import SimulationConfig
from .engine import RunMetrics, evaluate, evaluate_stream
from .risk import CriticalityResult
from .scenario import Scenario, validate_scenario


class CriticalityEstimator(BaseEstimator):
    """Estimate the collision probability of multi-object traffic scenarios.

    Parameters mirror SimulationConfig; see its docstring for units and
    defaults.  ``workers`` selects the execution policy (1, N or "auto") and
    never changes results.

    Examples
    --------
    >>> est = CriticalityEstimator(collision_mode="exact").fit()
    >>> p = est.predict([scenario_dict])  # doctest: +SKIP
    """

    def __init__(self, horizon=2.0, step=0.02, accel_profile_count=6,
                 co_path_count=7, accel_range=9.7, slip_range=0.1,
                 profile_latency=0.2, profile_jerk=30.0,
                 weight_accel=0.5, weight_path=0.5,
                 accel_score_scale=4.85, path_score_scale=1.75,
                 lane_change_penalty=0.25, counter_traffic_penalty=4.0,
                 collision_mode="paper", footprint_subdivisions=1,
                 workers=1):
        self.horizon = horizon
        self.step = step
        self.accel_profile_count = accel_profile_count
        self.co_path_count = co_path_count
        self.accel_range = accel_range
        self.slip_range = slip_range
        self.profile_latency = profile_latency
        self.profile_jerk = profile_jerk
        self.weight_accel = weight_accel
        self.weight_path = weight_path
        self.accel_score_scale = accel_score_scale
        self.path_score_scale = path_score_scale
        self.lane_change_penalty = lane_change_penalty
        self.counter_traffic_penalty = counter_traffic_penalty
        self.collision_mode = collision_mode
        self.footprint_subdivisions = footprint_subdivisions
        self.workers = workers

    def _build_config(self) -> SimulationConfig:
        return SimulationConfig(
            horizon=self.horizon,
            step=self.step,
            accel_profile_count=self.accel_profile_count,
            co_path_count=self.co_path_count,
            accel_range=self.accel_range,
            slip_range=self.slip_range,
            profile_latency=self.profile_latency,
            profile_jerk=self.profile_jerk,
            weight_accel=self.weight_accel,
            weight_path=self.weight_path,
            accel_score_scale=self.accel_score_scale,
            path_score_scale=self.path_score_scale,
            lane_change_penalty=self.lane_change_penalty,
            counter_traffic_penalty=self.counter_traffic_penalty,
            collision_mode=self.collision_mode,
            footprint_subdivisions=self.footprint_subdivisions,
        )

    def fit(self, X=None, y=None):
        """Validate the configuration; the model itself is not data-driven."""
        self.config_ = self._build_config()
        return self

    def _check_fitted(self):
        if not hasattr(self, "config_"):
            raise NotFittedError("call fit() before predicting")

    def _as_scenario(self, frame) -> Scenario:
        if isinstance(frame, Scenario):
            return frame
        raw = dict(frame)
        # Estimator parameters override per-frame config, keeping one source
        # of truth for a fitted estimator.
        raw["config"] = self.config_.to_dict()
        return validate_scenario(raw)

    def predict(self, X) -> np.ndarray:
        """Collision probability p_cra for each scenario frame in X."""
        self._check_fitted()
        out = []
        for frame in X:
            result, _ = evaluate(self._as_scenario(frame), workers=self.workers)
            out.append(result.p_cra)
        return np.asarray(out)

    def evaluate_frame(self, frame) -> tuple[CriticalityResult, RunMetrics]:
        """Full single-frame output: criticality result plus run metrics."""
        self._check_fitted()
        return evaluate(self._as_scenario(frame), workers=self.workers)

    def stream(self, frames):
        """Per-frame outcomes for a time-ordered frame sequence."""
        self._check_fitted()
        return evaluate_stream((self._as_scenario(f) for f in frames),
                               workers=self.workers)
