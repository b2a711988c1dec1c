"""Data-parallel collision criticality estimation for traffic scenarios.

The engine simulates every combination of model-based trajectory hypotheses
for an EGO-vehicle, surrounding vehicles and pedestrians, detects polygon
overlaps per time step, and aggregates the collision probability of the
scenario together with ranked escape routes.
"""

from .config import SimulationConfig
from .engine import RunMetrics, evaluate, evaluate_stream
from .errors import EngineError, ScenarioError, TrajriskError
from .estimator import CriticalityEstimator
from .risk import CriticalityResult
from .scenario import Scenario, load_scenario, validate_scenario
from .vehicles import classify_vehicle

__version__ = "0.1.0"

__all__ = [
    "CriticalityEstimator",
    "CriticalityResult",
    "EngineError",
    "RunMetrics",
    "Scenario",
    "ScenarioError",
    "SimulationConfig",
    "TrajriskError",
    "__version__",
    "classify_vehicle",
    "evaluate",
    "evaluate_stream",
    "load_scenario",
    "validate_scenario",
]
