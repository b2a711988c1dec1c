"""Pipeline orchestration: index layout, determinism, streaming, metrics."""

import pytest

from conftest import co_dict, ego_dict, make_scenario, ped_dict, road_dividers, scenario_dict
from trajrisk.engine import (
    EngineError,
    verify_pose_combination_count,
    IndexLayout,
    ObjectBlock,
    evaluate,
    evaluate_stream,
    resolve_workers,
    run_pipeline,
)
from trajrisk.errors import TrajriskError
from trajrisk.scenario import validate_scenario


def s2_scenario():
    objects = [co_dict(f"car{k}", 40.0 + 55.0 * k, 0.1 * (k % 3 - 1), v=8.0 + k)
               for k in range(10)]
    return make_scenario(ego=ego_dict(v=25.0), objects=objects,
                         dividers=road_dividers(3, x0=-20.0, x1=700.0))


# ---------------------------------------------------------------------------
# Index layout

def test_layout_bijective_roundtrip():
    scenario = make_scenario(objects=[co_dict("c1", 40.0, 0.0),
                                      ped_dict("p1", 20.0, 8.0)],
                             config={"accel_profile_count": 3})
    ctx = run_pipeline(scenario)
    layout = ctx.layout
    assert layout.r_ego == 3 * 343
    assert layout.r_co == 3 * 7 + 3 * 7
    assert layout.r_tra == layout.r_ego + layout.r_co
    seen = set()
    for flat in range(layout.r_tra):
        object_id, profile, path = layout.decompose(flat)
        assert layout.block_for(object_id).flat_index(profile, path) == flat
        seen.add((object_id, profile, path))
    assert len(seen) == layout.r_tra
    for pair in range(0, layout.r_col, 97):
        i, j = layout.pair_decompose(pair)
        assert layout.pair_index(i, j) == pair
    with pytest.raises(IndexError):
        layout.decompose(layout.r_tra)
    with pytest.raises(IndexError):
        layout.pair_index(layout.r_ego, 0)


def test_block_index_bounds():
    block = ObjectBlock("x", start=10, profile_count=2, path_count=3)
    assert block.count == 6
    assert block.flat_index(1, 2) == 15
    assert block.decompose(10) == (0, 0)
    with pytest.raises(IndexError):
        block.flat_index(2, 0)


# ---------------------------------------------------------------------------
# Whole-pipeline behavior

def test_ego_alone_counts_and_zero_criticality(three_lane_scenario):
    result, metrics = evaluate(three_lane_scenario)
    assert metrics.trajectory_count == 2058
    assert metrics.pair_count == 0
    assert result.p_cra == 0.0
    assert len(result.escape_routes) == 2058


def test_s2_pose_combination_metric():
    ctx = run_pipeline(s2_scenario())
    assert ctx.metrics.pose_combinations == 86_436_000
    assert verify_pose_combination_count(10, ctx.scenario.config, ctx.metrics)
    assert ctx.metrics.trajectory_count == 2478
    assert ctx.metrics.pair_count == 864_360


def test_trajectory_storage_matches_r_tra(s1_scenario):
    # Trajectory buffers hold exactly r_tra * steps poses, nothing per pair.
    ctx = run_pipeline(s1_scenario)
    total_rows = sum(h.poses.shape[0] for h in ctx.hypotheses.values())
    assert total_rows == ctx.layout.r_tra
    for hyp_set in ctx.hypotheses.values():
        assert hyp_set.poses.shape[1] == ctx.scenario.config.steps


def test_worker_policies_bit_identical(s1_scenario):
    results = {}
    for workers in (1, 2, "auto"):
        result, _ = evaluate(s1_scenario, workers=workers)
        results[workers] = result
    assert results[1] == results[2] == results["auto"]
    assert results[1].to_dict() == results[2].to_dict()


def test_repeated_runs_bit_identical(s1_scenario):
    first, _ = evaluate(s1_scenario)
    second, _ = evaluate(s1_scenario)
    third, _ = evaluate(s1_scenario)
    assert first == second == third


def test_stage_order_enforced(three_lane_scenario):
    trace = []
    run_pipeline(three_lane_scenario,
                 stage_hook=lambda name, phase: trace.append((name, phase)))
    assert trace == [
        ("street", "enter"), ("street", "exit"),
        ("generation", "enter"), ("generation", "exit"),
        ("collision", "enter"), ("collision", "exit"),
        ("risk", "enter"), ("risk", "exit"),
    ]


def test_engine_error_carries_stage(monkeypatch, three_lane_scenario):
    import trajrisk.engine as engine_module

    def broken(*args, **kwargs):
        raise TrajriskError("boom")

    monkeypatch.setattr(engine_module, "generate_all", broken)
    with pytest.raises(EngineError) as err:
        evaluate(three_lane_scenario)
    assert err.value.stage == "generation"
    assert "boom" in str(err.value)


def test_resolve_workers():
    assert resolve_workers(None) == 1
    assert resolve_workers("sequential") == 1
    assert resolve_workers(3) == 3
    assert resolve_workers("auto") >= 1
    with pytest.raises(TrajriskError):
        resolve_workers(0)


def test_collision_probabilities_are_plausible(s1_scenario):
    result, _ = evaluate(s1_scenario)
    assert 0.0 <= result.p_cra <= 1.0
    assert result.p_cra == pytest.approx(
        sum(p for _, p in result.co_probabilities), abs=1e-12)
    # p_cra = 0 iff no colliding combinations.
    assert (result.p_cra == 0.0) == (len(result.combinations) == 0)


def test_trajectory_count_per_lane_configuration():
    # One lane: 3 slots per instance -> 27 EGO paths, 3 CO paths; pedestrian
    # grids always use the configured 7 headings.
    scenario = make_scenario(lanes=1,
                             objects=[co_dict("c1", 50.0, 0.0),
                                      ped_dict("p1", 20.0, 9.0)])
    ctx = run_pipeline(scenario)
    assert ctx.layout.r_ego == 6 * 27
    assert ctx.layout.block_for("c1").count == 6 * 3
    assert ctx.layout.block_for("p1").count == 6 * 7
    assert ctx.layout.r_tra == sum(h.poses.shape[0] for h in ctx.hypotheses.values())

    two_lane = make_scenario(lanes=2, objects=[co_dict("c1", 50.0, 0.0)])
    ctx2 = run_pipeline(two_lane)
    assert ctx2.layout.r_ego == 6 * 125
    assert ctx2.layout.block_for("c1").count == 6 * 5


def test_no_dividers_virtual_lane_evaluation():
    scenario = validate_scenario({"ego": ego_dict(v=20.0)})
    result, metrics = evaluate(scenario)
    assert metrics.trajectory_count == 6 * 27
    assert result.p_cra == 0.0


# ---------------------------------------------------------------------------
# Frame streams

def test_static_scene_constant_over_frames():
    frames = [make_scenario(objects=[co_dict("c1", 60.0, 0.0, v=15.0)],
                            timestamp=0.1 * k) for k in range(5)]
    outcomes = list(evaluate_stream(frames))
    assert len(outcomes) == 5
    assert all(o.error is None for o in outcomes)
    assert [o.timestamp for o in outcomes] == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])
    values = {o.result.p_cra for o in outcomes}
    assert len(values) == 1


def test_stream_reports_frame_errors_without_aborting():
    frames = [
        scenario_dict(timestamp=0.0),
        {"timestamp": 0.1},  # missing EGO
        scenario_dict(timestamp=0.2),
    ]
    outcomes = list(evaluate_stream(frames))
    assert len(outcomes) == 3
    assert outcomes[0].error is None
    assert outcomes[1].error is not None and "EGO" in outcomes[1].error
    assert outcomes[2].error is None
