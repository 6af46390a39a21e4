import json

import numpy as np
import pytest

from rsudeploy.scenario import (ABSENT, ScenarioError, SyntheticSpec, cell_center, distance_m, load_scenario,
                                save_scenario, scenario_from_dict, synth_scenario, traffic_volume,
                                traffic_volume_map)

from conftest import make_scenario


def test_minimal_file(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({
        "grid": {"width": 2, "height": 2, "cell_size_m": 20},
        "obstacles": [],
        "periods": {"count": 2, "length_s": 30},
        "traces": [{"id": "a", "positions": [0, 0]}],
    }))
    s = load_scenario(path)
    assert s.num_cells == 4
    assert s.num_periods == 2
    assert s.num_vehicles == 1


def test_obstacle_index_out_of_range():
    with pytest.raises(ScenarioError):
        make_scenario(2, 2, obstacles=[4], traces=[[0]])


def test_trace_index_out_of_range():
    with pytest.raises(ScenarioError):
        make_scenario(2, 2, traces=[[7]])


def test_trace_length_mismatch():
    with pytest.raises(ScenarioError):
        make_scenario(2, 2, traces=[[0, 1], [0]], periods=2)


def test_paper_sized_grid_has_2500_cells():
    s = make_scenario(50, 50, traces=[[0]])
    assert s.num_cells == 2500


def test_cell_center_and_distance():
    s = make_scenario(50, 50, traces=[[0]])
    assert cell_center(s, 0) == (10.0, 10.0)
    assert cell_center(s, 51) == (30.0, 30.0)
    with pytest.raises(IndexError):
        cell_center(s, 2500)
    assert distance_m(s, 7, 7) == 0.0
    assert distance_m(s, 0, 1) == pytest.approx(20.0)
    assert distance_m(s, 0, 51) == pytest.approx(28.284, abs=1e-3)


def test_traffic_volume():
    empty = make_scenario(3, 3, traces=[])
    assert traffic_volume(empty, 4, 10.0) == 0
    s = make_scenario(3, 3, traces=[[4, 4, 4]])
    assert traffic_volume(s, 4, 0.1) == 3
    far = make_scenario(10, 1, traces=[[5]])  # vehicle 100 m from cell 0
    assert traffic_volume(far, 0, 50.0) == 0
    np.testing.assert_array_equal(traffic_volume_map(s, 0.1), [0, 0, 0, 0, 3, 0, 0, 0, 0])


def test_absent_positions_and_sensitive_vehicles():
    s = make_scenario(3, 3, traces=[[0, ABSENT], [8, 8]], areas=[(50.0, 50.0, 5.0)])
    assert s.positions[0, 1] == ABSENT
    np.testing.assert_array_equal(s.sensitive_vehicles, [False, True])


def test_round_trip(tmp_path):
    s = synth_scenario(3)
    save_scenario(s, tmp_path / "a.json")
    assert load_scenario(tmp_path / "a.json") == s


def test_synth_shape_and_determinism():
    spec = SyntheticSpec(obstacle_blocks=0, vehicles=50, periods=4)
    s = synth_scenario(1, spec)
    assert s.num_vehicles == 50
    assert all(len(t.positions) == 4 for t in s.traces)
    assert json.dumps(synth_scenario(1, spec).to_dict()) == json.dumps(s.to_dict())
    assert synth_scenario(2, spec).to_dict()["traces"] != s.to_dict()["traces"]


def test_synth_defaults_match_desk_batch():
    s = synth_scenario(0)
    assert (s.width_cells, s.height_cells) == (20, 20)
    assert s.num_vehicles == 60 and s.num_periods == 4
    assert len(s.sensitive_areas) == 2
    assert s.obstacles.any()
    pos = s.positions[s.positions != ABSENT]
    assert not s.obstacles[pos].any()


def test_from_dict_rejects_garbage():
    with pytest.raises(ScenarioError):
        scenario_from_dict({"grid": {"width": 0, "height": 2, "cell_size_m": 20}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"nope": 1})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"grid": {"width": 2, "height": 2, "cell_size_m": 20},
                            "traces": [{"id": "a", "positions": ["x"]}]})
