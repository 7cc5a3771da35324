import json

import mpmath
import numpy as np
import pytest

from psdyn.models import MODEL_IDS, get_model, load_model, model_from_dict, model_to_dict
from psdyn.ode import rhs

mpmath.mp.dps = 40


def covid_reference(x, p, where):
    """Right-hand side typed out term by term, evaluated in 40-digit arithmetic."""
    x1, x2, x3 = (mpmath.mpf(float(v)) for v in x)
    p = mpmath.mpf(p)
    f1 = (-mpmath.mpf("0.1053") * x3**2 + mpmath.mpf("2.3430e-5") * x1**2
          + mpmath.mpf("0.1521") * x2 * x3 - mpmath.mpf("0.0018") * x1 * x2)
    if where == "x2":
        f2 = mpmath.mpf("0.1606") * x3**2 - mpmath.mpf("0.205") * x1 + p * x2
    else:
        f2 = mpmath.mpf("0.1606") * x3**2 - p * x1 + mpmath.mpf("0.4404071") * x2
    f3 = (mpmath.mpf("0.2845") * x3 - mpmath.mpf("0.0001") * x1 * x3
          - mpmath.mpf("1.2155e-5") * x1 * x2 + mpmath.mpf("2.3788e-6") * x1**2)
    return [f1, f2, f3]


def lorenz_reference(x, rho):
    x1, x2, x3 = (mpmath.mpf(float(v)) for v in x)
    return [10 * (x2 - x1), mpmath.mpf(rho) * x1 - x2 - x1 * x3, x1 * x2 - mpmath.mpf(8) / 3 * x3]


def _close(got, want, scale):
    for g, w in zip(got, want):
        assert abs(mpmath.mpf(float(g)) - w) <= 1e-13 * scale


@pytest.mark.parametrize("model,where,p", [("covid_p2", "x2", 0.423), ("covid_p1", "x1", 0.211)])
def test_covid_rhs_matches_reference(model, where, p, rng):
    sys_ = get_model(model)
    for _ in range(200):
        x = rng.uniform([1e3, 1e2, 10], [2e4, 5e3, 300])
        want = covid_reference(x, p, where)
        scale = max(1.0, max(abs(float(w)) for w in want), float(np.max(np.abs(x)))**2 * 1e-4)
        _close(rhs(sys_, p, x), want, scale)


def test_lorenz_rhs_matches_reference(rng):
    sys_ = get_model("lorenz_rho")
    for _ in range(200):
        x = rng.uniform(-30, 30, 3)
        rho = float(rng.uniform(0, 60))
        want = lorenz_reference(x, rho)
        _close(rhs(sys_, rho, x), want, 1e3)


def test_registry_metadata():
    assert set(MODEL_IDS) == {"covid_p2", "covid_p1", "lorenz_rho"}
    assert get_model("covid_p2").p_range == (0.40, 0.46)
    assert get_model("covid_p1").p_range == (0.20, 0.22)
    with pytest.raises(KeyError):
        get_model("nope")


def test_B_is_read_only():
    with pytest.raises(ValueError):
        get_model("covid_p2").B[0, 0] = 1.0


@pytest.mark.parametrize("model", ["covid_p2", "covid_p1", "lorenz_rho"])
def test_json_round_trip(model, tmp_path, rng):
    sys_ = get_model(model)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model_to_dict(sys_)))
    back = load_model(path)
    x = rng.uniform(1, 100, 3)
    assert np.array_equal(rhs(back, sys_.default_p, x), rhs(sys_, sys_.default_p, x))
    assert back.default_x0 == sys_.default_x0


def test_model_document_errors():
    with pytest.raises(ValueError, match="missing field"):
        model_from_dict({"dim": 1, "g": [[]], "B": [[1.0]]})
    with pytest.raises(ValueError):
        model_from_dict({"dim": 2, "g": [[]], "B": [[1.0]], "default_p": 1, "x0": [1]})
