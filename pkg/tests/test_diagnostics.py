import math

import numpy as np
import pytest

from rdlab import Grid, Problem, ReactionSpec, StepperConfig, builtin, simulate
from rdlab.diagnostics import (
    HypothesisReport,
    check_mass_control,
    check_positivity_condition,
    check_ratio_trend,
    check_sign_condition,
    fit_smoothing,
    gronwall_ledger,
    lemma1_probe,
    max_principle_oracle,
    spike,
    theorem_probe,
)
from rdlab.errors import InvalidParameterError
from rdlab.trace import sign_summary


@pytest.fixture(scope="module")
def sin_run():
    grid = Grid.interval(1.0, 33)
    return simulate(Problem(grid, ReactionSpec.scalar("sin(t)*u"), grid.constant(1.0), 10.0),
                    StepperConfig(stride=1))


def test_sign_summary_classes():
    assert sign_summary(np.array([1.0, 2.0])) == "all-positive"
    assert sign_summary(np.array([-1.0, -2.0])) == "all-negative"
    assert sign_summary(np.array([-1.0, 2.0])) == "mixed"
    assert sign_summary(np.array([0.0, 2.0])) == "has-zero"
    assert sign_summary(np.array([np.nan])) == "non-finite"


def test_sign_condition_fails_with_witness_for_oscillating_reaction(sin_run):
    rep = check_sign_condition(sin_run.trace)
    assert rep.condition == "H17" and rep.verdict == "fails"
    changes = rep.details["sign_changes"]
    assert min(abs(c - math.pi) for c in changes) < 0.1
    assert min(abs(c - 3 * math.pi) for c in changes) < 0.1
    assert rep.witness["t"] == pytest.approx(3 * math.pi, abs=0.1)


def test_sign_condition_holds_for_growth(make_scalar):
    res = simulate(make_scalar("u", 1.0, T=1.0, nodes=17))
    rep = check_sign_condition(res.trace)
    assert rep.holds and rep.t0_detected == 0.0


def test_report_needs_witness_on_failure():
    with pytest.raises(ValueError):
        HypothesisReport("P", "fails")
    with pytest.raises(ValueError):
        HypothesisReport("bogus", "holds")
    d = HypothesisReport("P", "holds", details={"x": np.float64(1.0)}).to_dict()
    assert d["schema_version"] == 1 and isinstance(d["details"]["x"], float)


def test_positivity_condition():
    assert check_positivity_condition(builtin("frank_kamenetskii")).holds
    rep = check_positivity_condition(ReactionSpec.scalar("u - 1"))
    assert rep.verdict == "fails" and rep.witness["u"] == 0.0 and rep.witness["f"] == -1.0
    rep = check_positivity_condition(ReactionSpec.scalar("ln(u)"))
    assert rep.verdict == "undetermined"


def test_mass_control():
    rep = check_mass_control(builtin("frank_kamenetskii"), 1.0)
    assert rep.condition == "Mprime" and rep.holds and rep.details["zero_sum"]
    assert check_mass_control(builtin("mass_control_pair"), strict=True).holds
    bad = check_mass_control(ReactionSpec.pair("u*v", "u"), 1.0)
    assert bad.verdict == "fails" and bad.witness["u"] == 1e6 and bad.witness["v"] == 1e6
    with pytest.raises(InvalidParameterError):
        check_mass_control(ReactionSpec.scalar("u"))


def test_ratio_trend():
    assert check_ratio_trend(builtin("haraux_youkana", gamma=0.5)).holds
    assert check_ratio_trend(builtin("frank_kamenetskii")).verdict == "fails"


def test_gronwall_detects_superlinear_mass_growth():
    grid = Grid.interval(1.0, 17)
    prob = Problem(grid, ReactionSpec.pair("u^2", "0"), grid.constant(1.0), 0.8,
                   a=1.0, b=1.0, v0=grid.constant(1.0))
    rep = gronwall_ledger(simulate(prob).trace, C=1.0)
    assert rep.verdict == "fails" and rep.witness["slope"] > rep.witness["bound"]


def test_maximum_principle_flags_a_source():
    # zero Dirichlet data and a unit source: the interior rises toward x(1-x)/2
    grid = Grid.interval(1.0, 33, "dirichlet")
    res = simulate(Problem(grid, ReactionSpec.scalar("1"), grid.constant(0.0), 0.5), StepperConfig(stride=1))
    rep = max_principle_oracle(res.record, "sub")
    assert rep.verdict == "fails" and rep.excess > 0.05
    assert max_principle_oracle(res.record, "super").verdict == "holds"
    with pytest.raises(InvalidParameterError):
        max_principle_oracle(res.record, "sideways")


def test_lemma1_statuses(make_scalar):
    res = simulate(make_scalar("u", 1.0, T=1.0, nodes=17), StepperConfig(stride=1))
    assert lemma1_probe(res.record, 1.5).status == "not_applicable"
    res = simulate(make_scalar("0", 2.0, T=1.0, nodes=17), StepperConfig(stride=1))
    out = lemma1_probe(res.record, 2.0)
    assert out.status == "witness" and abs(out.witness["f"]) <= 1e-6
    with pytest.raises(InvalidParameterError):
        lemma1_probe(res.record, -1.0)


def test_smoothing_fixed_mode_and_cosine_window():
    grid = Grid.interval(1.0, 2049)
    fit = fit_smoothing(1.0, math.inf, spike(grid, 1.0), mode="fixed")
    assert fit.slope == pytest.approx(-0.5, abs=0.01)
    # the fixed spike probes only the L^1 scaling
    fit2 = fit_smoothing(2.0, math.inf, spike(grid, 2.0), mode="fixed")
    assert fit2.slope == pytest.approx(-0.5, abs=0.01)
    flat = grid.from_function(lambda x: np.cos(np.pi * x))
    fit3 = fit_smoothing(1.0, math.inf, flat, boundary_guard=math.inf)
    assert abs(fit3.slope) < 0.01


def test_smoothing_in_two_dimensions():
    grid = Grid.rectangle((1.0, 1.0), 257)
    fit = fit_smoothing(1.0, math.inf, spike(grid, 1.0), t_samples=np.logspace(-4.5, -3.5, 10))
    assert fit.theory_slope == -1.0
    assert fit.slope == pytest.approx(-1.0, abs=0.05)


def test_smoothing_argument_checks():
    grid = Grid.interval(1.0, 257)
    with pytest.raises(InvalidParameterError):
        fit_smoothing(2.0, 1.0, spike(grid))
    with pytest.raises(InvalidParameterError):
        fit_smoothing(1.0, 2.0, spike(grid), t_samples=[1e-4, 1e-3])
    with pytest.raises(InvalidParameterError):
        fit_smoothing(1.0, 2.0, spike(grid), t_samples=np.logspace(-1, 0, 10))


def test_theorem_probe_cells(make_scalar):
    res = simulate(make_scalar("u^2", 2.0, T=1.0, nodes=33), StepperConfig(error_tol=1e-5))
    probe = theorem_probe(res.trace, terminal=res.terminal)
    assert probe.conclusion == "blowup" and not probe.hypotheses_held
    assert probe.cell == "failed/blowup" and not probe.counterexample_candidate
    res = simulate(make_scalar("exp(-t)*u", 1.0, T=5.0, nodes=33))
    probe = theorem_probe(res.trace, terminal=res.terminal)
    assert probe.cell == "held/bounded"
    assert probe.M1 >= 1.0 and probe.alpha == 1.0 and probe.epsilon_lower_bound >= 1.0
    d = probe.to_dict()
    assert d["kind"] == "theorem_probe" and "H17" in d["reports"]


def test_theorem_probe_flags_counterexample_when_hypotheses_hold_but_run_blows_up(make_scalar):
    res = simulate(make_scalar("u^2", 1.0, T=0.5, nodes=17))
    probe = theorem_probe(res.trace, terminal="blowup", L1_cap=1e12)
    assert probe.hypotheses_held and probe.counterexample_candidate
