import warnings

import numpy as np
import pytest

from psdyn.models import get_model
from psdyn.ode import DivergenceError, integrate, rhs, rk4_step, run_schedule


def test_rk4_single_step_matches_taylor_polynomial(linear_1d):
    # one RK4 step of x' = x is the degree-4 Taylor polynomial of e^h
    h = 0.1
    x1 = rk4_step(linear_1d, 1.0, [1.0], h)
    assert x1[0] == pytest.approx(1 + h + h**2 / 2 + h**3 / 6 + h**4 / 24, rel=1e-15)
    assert x1[0] == pytest.approx(1.1051708333333333, rel=1e-15)


def test_rk4_global_order_four(oscillator):
    errs = []
    hs = [0.1, 0.05, 0.025, 0.0125]
    for h in hs:
        n = int(round(2.0 / h))
        traj = integrate(oscillator, 1.0, [1.0, 0.0], h, n)
        errs.append(np.linalg.norm(traj.states[-1] - [np.cos(2.0), -np.sin(2.0)]))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(orders - 4.0) < 0.2), orders


def test_rhs_is_affine_in_p():
    sys_ = get_model("covid_p2")
    x = np.array([8000.0, 1200.0, 90.0])
    g = sys_.g(x)
    for p in (0.41, 0.43):
        np.testing.assert_allclose(rhs(sys_, p, x), g + p * sys_.B @ x, rtol=1e-14)


def test_integrate_shapes_and_params(oscillator):
    traj = integrate(oscillator, 1.0, [1.0, 0.0], 0.01, 50)
    assert traj.states.shape == (51, 2)
    assert traj.steps == 50
    assert np.all(traj.params == 1.0)
    np.testing.assert_allclose(traj.times[-1], 0.5)
    assert traj.states[0].tolist() == [1.0, 0.0]


def test_run_schedule_matches_step_by_step(oscillator, rng):
    params = rng.uniform(0.5, 1.5, 21)
    traj = run_schedule(oscillator, params, [1.0, 0.5], 0.05)
    x = np.array([1.0, 0.5])
    for n in range(20):
        x = rk4_step(oscillator, params[n], x, 0.05)
        assert np.array_equal(x, traj.states[n + 1])


def test_divergence_reports_step_and_partial_run():
    lor = get_model("lorenz_rho")
    with pytest.raises(DivergenceError) as info:
        integrate(lor, 28.0, [1.0, 1.0, 1.0], 0.2, 10_000)
    err = info.value
    assert err.step >= 1
    assert err.trajectory.meta["status"] == "divergent"
    assert len(err.trajectory) == err.step + 1
    assert np.all(np.isfinite(err.trajectory.states))
    assert "last finite state" in str(err)


def test_bad_inputs(oscillator):
    with pytest.raises(ValueError):
        integrate(oscillator, 1.0, [1.0], 0.01, 10)
    with pytest.raises(ValueError):
        integrate(oscillator, 1.0, [np.nan, 0.0], 0.01, 10)
    with pytest.raises(ValueError):
        integrate(oscillator, 1.0, [1.0, 0.0], 0.0, 10)


def test_out_of_range_parameter_warns():
    with pytest.warns(UserWarning):
        integrate(get_model("covid_p2"), 0.9, [9000.0, 1300.0, 110.0], 0.005, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate(get_model("lorenz_rho"), 28.0, [1.0, 1.0, 1.0], 0.005, 1)
