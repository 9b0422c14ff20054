import json
import math

import pytest

import blpdemand


def test_share_round_trip():
    inside, outside = blpdemand.predict_shares([0.5, -1.0, 2.0])
    assert math.isclose(outside + sum(inside), 1.0, rel_tol=0, abs_tol=1e-12)
    delta = blpdemand.invert_shares(inside, outside)
    assert delta == pytest.approx([0.5, -1.0, 2.0], abs=1e-12)


def test_shares_from_quantities():
    inside, outside = blpdemand.shares_from_quantities([50, 50], 200)
    assert inside == [0.25, 0.25]
    assert outside == 0.5


def test_domain_errors_raise():
    with pytest.raises(blpdemand.BlpError):
        blpdemand.shares_from_quantities([150, 60], 200)
    with pytest.raises(ValueError):
        blpdemand.invert_shares([0.5], 0.0)


def test_tails():
    assert round(blpdemand.chi_square_upper_tail(3.841, 1), 4) == 0.05
    assert blpdemand.f_upper_tail(0.0, 2, 15) == 1.0


@pytest.fixture
def market(tmp_path):
    config = {"xi_scale": 0.0, "price_endogeneity": 0.8, "periods": 10, "seed": 7}
    path = tmp_path / "market.csv"
    blpdemand.generate_market(config, path)
    return path


SPEC = {
    "dependent": "log_share_diff",
    "exogenous": ["x1", "x2"],
    "endogenous": ["price"],
    "instruments": ["cost1", "cost2"],
}


def test_noiseless_estimate_recovers_truth(market):
    r = blpdemand.estimate(SPEC, market)
    coef = dict(zip(r["names"], r["coefficients"]))
    assert coef["x1"] == pytest.approx(1.0, abs=1e-8)
    assert coef["x2"] == pytest.approx(-0.5, abs=1e-8)
    assert coef["price"] == pytest.approx(-1.0, abs=1e-8)
    assert r["n_observations"] == 50
    assert r["estimator"] == "tsls"


def test_spec_file_and_method_override(market, tmp_path):
    spec = dict(SPEC, dataset=market.name)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    r = blpdemand.estimate(path, method="ols")
    assert r["estimator"] == "ols"
    assert r["names"] == ["Constant", "x1", "x2", "price"]


def test_diagnose(market):
    d = blpdemand.diagnose(SPEC, market)
    assert d["first_stage"]["df_numerator"] == 2
    assert d["sargan"]["df"] == 1


def test_unknown_column(market):
    with pytest.raises(blpdemand.BlpError, match="Weight"):
        blpdemand.estimate(dict(SPEC, exogenous=["Weight"]), market)


def test_simulate_is_deterministic():
    config = {"price_endogeneity": 0.8, "periods": 10}
    a = blpdemand.simulate(config, replications=20, seed=5, threads=1)
    b = blpdemand.simulate(config, replications=20, seed=5, threads=4)
    assert a == b
    assert [s["estimator"] for s in a] == ["ols", "tsls"]
    with pytest.raises(blpdemand.BlpError):
        blpdemand.simulate({"xi_scale": -1})
