import math

import numpy as np
import pytest

import aisf


@pytest.fixture(scope="module")
def network():
    return aisf.generate(n_vessels=12, seed=2021)


def test_generate_is_deterministic(network):
    again = aisf.generate(n_vessels=12, seed=2021)
    assert network.vessel_count == 12 == len(network)
    assert network.total_messages == again.total_messages
    vid = network.vessel_ids()[0]
    ts, feats = network.trajectory(vid)
    ts2, feats2 = again.trajectory(vid)
    assert feats.shape == (len(ts), 5)
    np.testing.assert_array_equal(feats, feats2)
    np.testing.assert_array_equal(np.diff(ts), feats[1:, 2])
    assert feats[0, 2] == 0.0


def test_csv_round_trip(network, tmp_path):
    path = tmp_path / "ais.csv"
    network.write_csv(str(path))
    loaded, report = aisf.load_csv(str(path))
    assert report["malformed"] == 0
    assert report["messages"] == network.total_messages
    vid = network.vessel_ids()[3]
    np.testing.assert_array_equal(loaded.trajectory(vid)[1], network.trajectory(vid)[1])


def test_stats_tail():
    heavy = aisf.generate(n_vessels=50, seed=2021, outlier_rate=0.05)
    assert heavy.stats()["delta_t_max_over_median"] > 100


def test_metrics():
    assert aisf.hte([0.0], [1.0]) == pytest.approx(math.tanh(1.0))
    assert aisf.rpd([0.0], [1.0]) == 2.0
    assert aisf.rpd([1.0], [0.0]) == -2.0
    assert aisf.rmse([3.0, 4.0], [0.0, 0.0]) == pytest.approx(math.sqrt(12.5))
    assert aisf.mae([3.0, -4.0], [0.0, 0.0]) == 3.5
    assert aisf.huber([0.5], [0.0]) == 0.125
    with pytest.raises(ValueError):
        aisf.hte([1.0, 2.0], [1.0])
    rng = np.random.default_rng(0)
    p, y = rng.normal(size=(10, 5, 5)), rng.normal(size=(10, 5, 5))
    rep = aisf.metric_report(p, y)
    assert rep["n_elements"] == 250
    assert set(rep["per_variable"]) == set(aisf.VARIABLES)
    assert rep["mae"] == pytest.approx(np.abs(p - y).mean(), rel=1e-12)


def test_regime_presets():
    assert aisf.regime("low") == (15, 5)
    assert aisf.regime("medium") == (15, 25)
    assert aisf.regime("high") == (30, 50)
    with pytest.raises(aisf.ConfigError):
        aisf.regime("extreme")


def test_train_and_evaluate(network, tmp_path):
    ckpt = tmp_path / "checkpoint.json"
    rep = aisf.train(network, model="proposed", regime="low", epochs=2, channels=8, hidden=8, checkpoint=str(ckpt))
    assert len(rep["epoch_log"]) == 2
    assert -2 <= rep["rpd"] <= 2
    assert rep["model"] == "proposed"
    ev = aisf.evaluate(network, str(ckpt))
    for key in ("hte", "mae", "huber", "rmse", "rpd"):
        assert ev[key] == pytest.approx(rep[key], abs=1e-10)
    again = aisf.train(network, model="proposed", regime="low", epochs=2, channels=8, hidden=8)
    assert again["epoch_log"] == rep["epoch_log"]


def test_train_seeds(network):
    out = aisf.train_seeds(network, model="chain", regime="low")
    assert out["aggregate"]["n_runs"] == 5
    assert [r["seed"] for r in out["runs"]] == [2021, 2121, 2221, 2321, 2421]


def test_bad_model_name(network):
    with pytest.raises(aisf.ConfigError):
        aisf.train(network, model="transformer")


def test_gradcheck():
    rows = aisf.gradcheck(filter="layer.gru", trials=5)
    assert rows and all(r["passed"] for r in rows)
    bad = aisf.gradcheck(filter="op.tanh", trials=3, inject_wrong_sign=True)
    assert not any(r["passed"] for r in bad)
