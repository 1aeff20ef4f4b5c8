import json
import math
import pathlib

import pytest

import slicenego as sn

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_risk_estimators():
    xs = list(range(1, 101))
    assert sn.empirical_var(xs, 0.95) == 95
    assert sn.empirical_cvar(xs, 0.95) == pytest.approx(98.0)
    assert sn.confidence_score(10.0, 2.0) == pytest.approx(0.8)
    assert sn.confidence_score(0.0, 1.0) == 0.0
    with pytest.raises(sn.ParameterError):
        sn.empirical_var(xs, 1.5)
    with pytest.raises(ValueError):
        sn.empirical_var([], 0.5)


def test_queue_step_conserves_bits():
    q = sn.QueueState(1e4, 2e4)
    nxt = sn.step_queues(q, sn.Action(10.0, 10.0), 5e4, 6.0)
    # edge serves 1e5 bits/slot, radio 6e4 bits/slot
    assert nxt.edge_bits == 0.0
    assert nxt.ran_bits == pytest.approx(2e4 - 2e4 + 6e4)
    with pytest.raises(sn.ContractViolation):
        sn.step_queues(sn.QueueState(-1.0, 0.0), sn.Action(1, 1), 0.0, 6.0)


def test_power_and_split():
    a, b = sn.prop_fair_split(40.0, 40.0, 90.0, 30.0)
    assert a.bandwidth_mhz == pytest.approx(30.0)
    assert b.cpu_ghz == pytest.approx(10.0)
    assert sn.power_w(sn.Action(20.0, 20.0)) == pytest.approx(5 + 10 + 4)
    assert sn.energy_saving_fraction(sn.Action(10, 10), sn.Action(20, 20)) > 0


def test_prediction_is_seeded():
    first = sn.predict(sn.Action(20.0, 20.0), 30.0, 10.0, seed=3, n_mc=500)
    again = sn.predict(sn.Action(20.0, 20.0), 30.0, 10.0, seed=3, n_mc=500)
    assert first == again
    assert first["cvar_ms"] >= first["var_ms"] >= 0.0
    assert 0.0 <= first["confidence"] <= 1.0


def test_config_round_trip_and_strictness():
    cfg = sn.default_config()
    assert cfg["schema_version"] == 1
    assert [s["name"] for s in cfg["slices"]] == ["eMBB", "URLLC"]
    assert sn.load_config(CONFIGS / "default.json") == cfg
    cfg["bogus"] = 1
    with pytest.raises(sn.ParseError):
        sn.run_experiment(cfg)


def test_small_experiment(tmp_path):
    cfg = sn.default_config()
    cfg.update(n_trials=2, eval_slots=1200, workers=1)
    cfg["system"]["n_mc"] = 300
    results, summary = sn.run_experiment(cfg, tmp_path)
    assert len(results) == 4
    assert len(summary) == 4
    for r in results:
        assert r.status != sn.NegotiationStatus.aborted
        lines = r.transcript.splitlines()
        assert json.loads(lines[0])["event"] == "start"
        assert json.loads(lines[-1])["event"] == "outcome"
    for row in summary:
        assert row["completed"] == 2
        assert math.isfinite(row["tail_latency_ms"])
    text = (tmp_path / "summary.csv").read_text()
    assert text.startswith("# schema_version=1\n")


def test_recorded_scenario():
    cfg = sn.load_config(CONFIGS / "recorded_scenario.json")
    r = sn.run_trial(json.dumps(cfg), sn.Strategy.unbiased, 0)
    assert r.status == sn.NegotiationStatus.consensus
    assert r.rounds == 2
    assert r.final_allocation[0] == sn.Action(14.0, 4.0)
    assert r.final_allocation[1] == sn.Action(23.0, 19.5)
