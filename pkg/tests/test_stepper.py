import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdlab import Boundary, Grid, Problem, ReactionSpec, StepperConfig, builtin, simulate, step_imex
from rdlab.errors import InvalidParameterError
from rdlab.meshfield import heat_propagate_spectral, neumann_eigenvalues
from rdlab.stepper import detect_blowup, fit_blowup_time


def test_linear_decay_matches_exponential(make_scalar):
    res = simulate(make_scalar("-u", 1.0, T=1.0))
    assert res.terminal == "completed" and res.t_end == 1.0
    assert np.max(np.abs(res.final[0].values - math.exp(-1.0))) < 1e-6


def test_one_step_crank_nicolson_against_spectral():
    grid = Grid.interval(1.0, 257)
    u0 = grid.from_function(lambda x: np.cos(np.pi * x))
    prob = Problem(grid, ReactionSpec.scalar("0"), u0, 1.0)
    (u1,) = step_imex(u0, 0.0, 1e-3, prob, StepperConfig(theta=0.5))
    exact = heat_propagate_spectral(u0, 1.0, 1e-3)
    assert np.max(np.abs(u1.values - exact.values)) <= 1e-5


def test_one_step_backward_euler_is_first_order():
    grid = Grid.interval(1.0, 129)
    u0 = grid.from_function(lambda x: np.cos(np.pi * x))
    prob = Problem(grid, ReactionSpec.scalar("0"), u0, 1.0)
    lam = neumann_eigenvalues(129, 1.0)[1]
    for dt in (1e-3, 1e-4):
        (u1,) = step_imex(u0, 0.0, dt, prob)
        assert np.allclose(u1.values, u0.values / (1 + lam * dt), atol=1e-12)


def test_step_imex_accepts_arrays_and_rejects_bad_input(make_scalar):
    prob = make_scalar("u", 1.0, nodes=17)
    out = step_imex(np.ones(17), 0.0, 0.1, prob)
    assert isinstance(out, tuple) and out[0].shape == (17,)
    assert np.allclose(out[0], 1.1)
    with pytest.raises(InvalidParameterError):
        step_imex(np.ones(17), 0.0, -0.1, prob)
    with pytest.raises(InvalidParameterError):
        step_imex(np.full(17, np.nan), 0.0, 0.1, prob)


def test_dirichlet_sine_mode_decays():
    grid = Grid.interval(1.0, 257, "dirichlet")
    u0 = grid.from_function(lambda x: np.sin(np.pi * x))
    res = simulate(Problem(grid, ReactionSpec.scalar("0"), u0, 0.1))
    exact = math.exp(-np.pi**2 * 0.1) * np.sin(np.pi * grid.axes[0])
    assert np.max(np.abs(res.final[0].values - exact)) < 1e-4
    assert res.final[0].values[0] == 0.0 and res.final[0].values[-1] == 0.0


def test_robin_boundary_loses_mass():
    grid = Grid.interval(1.0, 129, Boundary.robin(1.0, 1.0))
    res = simulate(Problem(grid, ReactionSpec.scalar("0"), grid.constant(1.0), 0.5))
    mass = res.trace["mass_u"]
    assert np.all(np.diff(mass) < 0)


def test_two_dimensional_run_matches_spectral():
    grid = Grid.rectangle((1.0, 1.0), (33, 33))
    u0 = grid.from_function(lambda x, y: 2 + np.cos(np.pi * x) * np.cos(np.pi * y))
    res = simulate(Problem(grid, ReactionSpec.scalar("0"), u0, 0.05), StepperConfig(error_tol=1e-7))
    exact = heat_propagate_spectral(u0, 1.0, 0.05)
    assert np.max(np.abs(res.final[0].values - exact.values)) < 1e-5
    mass = res.trace["mass_u"]
    assert np.max(np.abs(mass - mass[0])) / mass[0] < 1e-9


def test_quadratic_blowup_is_detected(make_scalar):
    res = simulate(make_scalar("u^2", 1.0, T=2.0, nodes=65), StepperConfig(error_tol=1e-5))
    assert res.terminal == "blowup" and res.blew_up
    assert abs(res.t_est - 1.0) < 1e-3
    assert abs(res.beta - 1.0) < 0.05
    assert res.summary()["max_linf"]["u"] >= 1e8


def test_frank_kamenetskii_pair_stays_bounded():
    grid = Grid.interval(1.0, 129)
    prob = Problem(grid, builtin("frank_kamenetskii"), grid.constant(1.0), 3.0,
                   a=2.0, b=1.0, v0=grid.constant(0.1))
    res = simulate(prob)
    assert res.terminal == "completed"
    assert np.all(res.trace["min_u"] > 0) and np.all(res.trace["min_v"] > 0)
    total = res.trace["mass_u"] + res.trace["mass_v"]
    assert np.max(np.abs(total - total[0])) < 1e-9


def test_negative_minimum_is_recorded_as_event(make_scalar):
    res = simulate(make_scalar("-1", 0.5, T=1.0, nodes=17))
    assert any(e["kind"] == "negative" for e in res.events)


def test_step_limit_and_dt_underflow(make_scalar):
    res = simulate(make_scalar("-u", 1.0, T=1.0, nodes=17), StepperConfig(max_steps=5))
    assert res.terminal == "step_limit" and res.steps == 5
    cfg = StepperConfig(dt_init=1e-3, dt_min=1e-3, dt_max=1e-3, error_tol=1e-14)
    res = simulate(make_scalar("sin(10*t)*u", 1.0, T=1.0, nodes=17), cfg)
    assert res.terminal == "dt_underflow"


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        StepperConfig(dt_min=1.0, dt_init=0.1)
    with pytest.raises(InvalidParameterError):
        StepperConfig(theta=0.3)
    with pytest.raises(InvalidParameterError):
        StepperConfig(stride=0)
    assert StepperConfig().to_dict()["trace_p"] == [2.0]


def test_problem_validation():
    grid = Grid.interval(1.0, 9)
    with pytest.raises(InvalidParameterError):
        Problem(grid, ReactionSpec.scalar("u"), grid.constant(1.0), 1.0, a=0.0)
    with pytest.raises(InvalidParameterError):
        Problem(grid, builtin("frank_kamenetskii"), grid.constant(1.0), 1.0)
    with pytest.raises(InvalidParameterError):
        Problem(grid, ReactionSpec.scalar("u"), grid.constant(0.0), 1.0, require_positive=True)
    with pytest.raises(InvalidParameterError):
        simulate(Problem(grid, ReactionSpec.scalar("u"), grid.constant(1e9), 1.0))


def test_determinism(make_scalar):
    a = simulate(make_scalar("u*(1-u)", 0.3, T=2.0, nodes=33)).trace.to_csv()
    b = simulate(make_scalar("u*(1-u)", 0.3, T=2.0, nodes=33)).trace.to_csv()
    assert a == b


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pure_diffusion_invariants(seed):
    grid = Grid.interval(1.0, 33)
    rng = np.random.default_rng(seed)
    u0 = grid.field(rng.uniform(0.0, 1.0, grid.shape))
    res = simulate(Problem(grid, ReactionSpec.scalar("0"), u0, 0.2), StepperConfig(error_tol=1e-5))
    mass = res.trace["mass_u"]
    linf = res.trace["linf_u"]
    assert np.max(np.abs(mass - mass[0])) <= 1e-10 * max(mass[0], 1e-12)
    assert np.all(np.diff(linf) <= 1e-12)
    assert np.all(res.trace["min_u"] >= u0.values.min() - 1e-12)


# ---------------------------------------------------------- blow-up fit


@pytest.mark.parametrize("beta, T", [(1.0, 1.0), (0.5, 0.5), (2.0, 3.0)])
def test_fit_recovers_power_law(beta, T):
    t = T - np.logspace(-1, -6, 40)
    t_est, b, K = fit_blowup_time(t, 2.0 * (T - t) ** (-beta))
    assert t_est == pytest.approx(T, abs=1e-8)
    assert b == pytest.approx(beta, rel=1e-6)
    assert K == pytest.approx(2.0, rel=1e-5)


def test_fit_tolerates_repeated_final_time():
    t = np.concatenate([1 - np.logspace(-1, -9, 30), [1 - 1e-9]])
    t_est, b, _ = fit_blowup_time(t, 1.0 / (1 - t))
    assert t_est == pytest.approx(1.0, abs=1e-7)


def test_detect_blowup_reasons():
    cfg = StepperConfig()
    t = np.linspace(0, 0.99, 10)
    assert detect_blowup(t, np.ones(10), cfg) is None
    ev = detect_blowup(t, 1.0 / (1.0 - t) * np.r_[np.ones(9), 1e9], cfg)
    assert ev.reason == "threshold"
    dts = np.full(10, cfg.dt_min)
    ev = detect_blowup(t, 1.0 / (1.0 - t), cfg, dts)
    assert ev.reason == "dt_floor" and ev.t_est == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidParameterError):
        detect_blowup(t[:2], np.ones(2), cfg)
