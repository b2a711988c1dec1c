"""Shared scenario builders for the test suite."""

import numpy as np
import pytest

from trajrisk.scenario import validate_scenario


def straight_divider(y, x0=0.0, x1=200.0):
    """Divider point triplet for a straight line at constant lateral offset."""
    return [[x0, y], [(x0 + x1) / 2.0, y], [x1, y]]


def curved_divider(a, b, c, x0=0.0, x1=120.0):
    """Triplet sampled from y = a x^2 + b x + c."""
    xs = [x0, (x0 + x1) / 2.0, x1]
    return [[x, (a * x + b) * x + c] for x in xs]


def road_dividers(lanes=3, lane_width=3.5, x0=0.0, x1=200.0):
    """Straight dividers for the given lane count, EGO lane centered on y=0."""
    half = lane_width / 2.0
    if lanes == 1:
        ys = [-half, half]
    elif lanes == 2:
        ys = [-half, half, half + lane_width]
    elif lanes == 3:
        ys = [-half - lane_width, -half, half, half + lane_width]
    else:
        raise ValueError(lanes)
    return [straight_divider(y, x0, x1) for y in ys]


def ego_dict(x=0.0, y=0.0, yaw=0.0, v=15.0, accel=0.0, length=4.5, width=1.8, **extra):
    out = {"id": "ego", "kind": "ego_vehicle", "x": x, "y": y, "yaw": yaw,
           "v": v, "accel": accel, "length": length, "width": width}
    out.update(extra)
    return out


def co_dict(object_id, x, y, yaw=0.0, v=10.0, accel=0.0, length=4.2, width=1.7, **extra):
    out = {"id": object_id, "kind": "co_vehicle", "x": x, "y": y, "yaw": yaw,
           "v": v, "accel": accel, "length": length, "width": width}
    out.update(extra)
    return out


def ped_dict(object_id, x, y, yaw=0.0, v=1.5, **extra):
    out = {"id": object_id, "kind": "pedestrian", "x": x, "y": y, "yaw": yaw, "v": v}
    out.update(extra)
    return out


def scenario_dict(ego=None, objects=(), lanes=3, dividers=None, config=None,
                  timestamp=0.0, counter_traffic=()):
    out = {
        "timestamp": timestamp,
        "ego": ego or ego_dict(),
        "objects": list(objects),
        "dividers": road_dividers(lanes) if dividers is None else dividers,
    }
    if config is not None:
        out["config"] = config
    if counter_traffic:
        out["counter_traffic"] = list(counter_traffic)
    return out


def make_scenario(**kwargs):
    return validate_scenario(scenario_dict(**kwargs))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def three_lane_scenario():
    return make_scenario()


@pytest.fixture
def s1_scenario():
    """Three collision objects on a three-lane road (S1-scale workload)."""
    objects = [
        co_dict("car1", 45.0, 0.2, v=10.0),
        co_dict("car2", 80.0, -0.3, v=14.0),
        co_dict("car3", 25.0, 0.0, v=18.0),
    ]
    return make_scenario(ego=ego_dict(v=20.0), objects=objects,
                         dividers=road_dividers(3, x0=-20.0, x1=300.0))
