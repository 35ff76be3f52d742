import json
import math

import pytest

import sbs_monitor as sm


def test_version_and_scenarios():
    assert sm.__version__ == "1.0.0"
    assert sm.scenario_names() == ["fig1", "fig2", "timescales", "discrimination", "verify"]


def test_closed_forms():
    spin = sm.SpinParams(beta=math.pi / 3, lambda_=0.75, g=1.0)
    gamma = sm.decoherence_factor([spin], math.pi / 4)
    assert gamma == pytest.approx(complex(0.70710678118654752, 0.17677669529663688), abs=1e-14)
    assert sm.macrofraction_fidelity([spin], math.pi / 4) == pytest.approx(0.9519716382329886, abs=1e-14)
    kappa, _ = sm.lln_exponents(spin, math.pi / 4)
    assert kappa == pytest.approx(0.09844007281325252, abs=1e-13)


def test_bounds():
    assert sm.majority_success(3, 0.5) == 0.5
    assert sm.majority_success_heterogeneous([0.5, 0.5, 0.5]) == pytest.approx(0.5)
    assert sm.chernoff_bound(100, 0.3) == pytest.approx(1 - math.exp(-4.5))
    assert sm.broadcast_entropy_bound(0.25, 2) == pytest.approx(8.122556, abs=1e-6)
    ts = sm.time_scales(200, 100, 0.5, 1 / 3)
    assert ts["ratio_sq"] == pytest.approx(4.0)
    assert ts["t_broadcast"] == pytest.approx(0.8312, abs=1e-4)


def test_invalid_spin_rejected():
    with pytest.raises(ValueError):
        sm.SpinParams(lambda_=1.5)


def test_run_scenario(tmp_path):
    status, outputs, _ = sm.run_scenario(
        "timescales", {"timescales": {"cases": [{"macro_size": 100, "total_spins": 200, "observed_fraction": 0.5}]}},
        tmp_path)
    assert status == 0
    assert outputs == ["timescales.csv", "manifest.json"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["scenario"] == "timescales"
    assert "ratio_sq" in (tmp_path / "timescales.csv").read_text()


def test_config_error():
    with pytest.raises(sm.ConfigError, match="bogus"):
        sm.run_scenario("timescales", {"bogus": 1})
    assert json.loads(sm.default_config())["format_version"] == 1


def test_verify_suites():
    report = sm.verify(qubit_instances=20, late_instances=5, qutrit_instances=5)
    assert report["convention"]["failed"] == 0
    assert report["proposition1_sqrt"]["failed"] == 0
    assert report["corollary1"]["failed"] == 0
