"""Spatially homogeneous companion problems: ``u' = f(t, u)`` and the integral test.

``integrate_ode`` uses the Dormand-Prince 5(4) pair from
:func:`scipy.integrate.solve_ivp` with a terminal event at the blow-up
threshold; ``classify_criterion`` decides whether ``int ds / (1 + f(s))``
(or ``int ds / f(s)``) is finite from the shape of its partial sums.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from . import dsl
from .errors import InvalidInputError, InvalidParameterError, NonFiniteResultError
from .stepper import StepperConfig, fit_blowup_time, simulate

__all__ = [
    "OdeResult",
    "CriterionVerdict",
    "integrate_ode",
    "classify_criterion",
    "classify_both",
    "check_monotone",
    "compare_pde_ode",
]


def _as_ast(f, aliases=None):
    if isinstance(f, str):
        return dsl.parse(f, aliases=aliases)
    return f


@dataclass
class OdeResult:
    terminal: str  # completed | blowup
    t: np.ndarray
    u: np.ndarray
    t_est: float = None
    beta: float = None
    steps: int = 0
    sol: object = field(default=None, repr=False)

    def __call__(self, t):
        """Dense-output value(s) at ``t`` inside the integrated interval."""
        return self.sol(t)[0]


def integrate_ode(f, u0, T=100.0, rtol=1e-10, atol=1e-12, blowup=1e10):
    """Integrate ``u' = f(t, u)`` from ``u(0) = u0`` up to ``T`` or blow-up.

    Blow-up is declared when ``|u|`` reaches ``blowup`` or the step size
    underflows while ``|u|`` is growing; ``t_est`` is the power-law
    extrapolation used by the PDE stepper.
    """
    expr = _as_ast(f)
    extra = dsl.variables(expr) - {"t", "u"}
    if extra:
        raise InvalidParameterError(f"ODE right-hand side may only use t and u, found {sorted(extra)}")
    if not math.isfinite(u0):
        raise InvalidParameterError("u0 must be finite")
    dsl.evaluate(expr, t=0.0, u=float(u0))  # raises on a non-finite start

    def rhs(t, y):
        return [dsl.evaluate(expr, t=t, u=y[0])]

    def hit(t, y):
        return abs(y[0]) - blowup

    hit.terminal = True
    sol = solve_ivp(rhs, (0.0, float(T)), [float(u0)], method="RK45", rtol=rtol, atol=atol,
                    events=hit, dense_output=True)
    t, u = sol.t, sol.y[0]
    res = OdeResult("completed", t, u, steps=int(t.size - 1), sol=sol.sol)
    crossed = sol.status == 1
    growing = t.size >= 3 and np.all(np.diff(np.abs(u[-3:])) > 0)
    stalled = sol.status == -1 and growing and abs(u[-1]) >= 2.0 * max(abs(u0), 1.0)
    if crossed or stalled:
        res.terminal = "blowup"
        n = np.abs(u)
        keep = n >= n[-1] * 1e-3
        tw, nw = t[keep], n[keep]
        if tw.size >= 3:
            res.t_est, res.beta, _ = fit_blowup_time(tw, nw)
        else:
            res.t_est = float(t[-1])
    elif sol.status != 0:
        raise NonFiniteResultError(f"ODE integration failed: {sol.message}")
    return res


# ------------------------------------------------------------ criterion


@dataclass
class CriterionVerdict:
    classification: str  # finite | infinite | inconclusive
    estimate: float
    error_bound: float
    truncation: float
    form: str = "bu"
    lower: float = 0.0
    reason: str = ""
    increments: list = field(default_factory=list)

    def to_dict(self):
        return {
            "schema_version": 1,
            "classification": self.classification,
            "estimate": self.estimate,
            "error_bound": self.error_bound if math.isfinite(self.error_bound) else repr(self.error_bound),
            "truncation": self.truncation,
            "form": self.form,
            "lower": self.lower,
            "reason": self.reason,
        }


def _integrand(expr, form):
    def g(s):
        fs = dsl.evaluate(expr, {"u": s, "t": 0.0, "x": 0.0, "y": 0.0, "v": 0.0}, strict=False)
        if math.isnan(fs):
            raise InvalidInputError(f"reaction is undefined at s={s}")
        if form == "bu":
            return 1.0 / (1.0 + fs)
        if fs <= 0:
            raise InvalidInputError(f"1/f form needs f > 0, f({s}) = {fs}")
        return 1.0 / fs
    return g


def classify_criterion(f, lower=0.0, form="bu", s_start=1e2, s_stop=1e12, tail_tol=1e-12):
    """Tri-state test of ``int_lower^inf ds / (1 + f(s))`` (``form='bu'``) or ``ds / f(s)``.

    The integral is accumulated over ``[lower, s_start]`` and then over
    doubling segments ``[S, 2S]`` up to ``s_stop``. Geometrically shrinking
    segment increments below ``tail_tol`` give ``finite``; increments that
    stop shrinking (constant: log growth, increasing: power growth) give
    ``infinite``; anything else is ``inconclusive``.
    """
    expr = _as_ast(f, {"s": "u"})
    if form not in ("bu", "reciprocal"):
        raise InvalidParameterError("form must be 'bu' or 'reciprocal'")
    if form == "reciprocal" and not lower > 0:
        raise InvalidParameterError("the 1/f form needs a positive lower limit")
    probe = np.concatenate([np.linspace(lower, lower + 1.0, 11), lower + np.logspace(0, 12, 49)])
    fv = np.asarray(dsl.evaluate(expr, {"u": probe, "t": 0.0, "x": 0.0, "y": 0.0, "v": 0.0},
                                 strict=False), dtype=float) * np.ones_like(probe)
    if np.any(fv < 0):
        i = int(np.argmax(fv < 0))
        raise InvalidInputError(f"f must be nonnegative: f({probe[i]:g}) = {fv[i]:g}")
    if form == "reciprocal" and np.any(fv <= 0):
        i = int(np.argmax(fv <= 0))
        raise InvalidInputError(f"1/f form needs f > 0, f({probe[i]:g}) = {fv[i]:g}")
    g = _integrand(expr, form)
    s0 = max(s_start, lower * 2 if lower > 0 else s_start)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        head, err = quad(g, lower, s0, limit=400, epsabs=1e-14, epsrel=1e-13)
        total, errsum = head, err
        incs = []
        S = s0
        while S < s_stop:
            val, err = quad(g, S, 2 * S, limit=200, epsabs=1e-15, epsrel=1e-13)
            incs.append(val)
            total += val
            errsum += err
            S *= 2
    trunc = S
    tail = np.asarray(incs[-8:])
    verdict = CriterionVerdict("inconclusive", total, math.inf, trunc, form, float(lower),
                               increments=[float(x) for x in incs])
    trouble = [w for w in caught if issubclass(w.category, IntegrationWarning)]
    if trouble:
        verdict.reason = f"quadrature unreliable: {str(trouble[0].message).splitlines()[0]}"
        return verdict
    if np.all(tail <= 1e-300):
        verdict.classification = "finite"
        verdict.error_bound = errsum
        verdict.reason = "tail vanishes"
        return verdict
    ratios = tail[1:] / np.where(tail[:-1] > 0, tail[:-1], np.nan)
    rmax = float(np.nanmax(ratios))
    if tail[-1] <= tail_tol and rmax < 0.95:
        geo = tail[-1] * rmax / (1.0 - rmax)
        verdict.classification = "finite"
        verdict.estimate = total + geo
        verdict.error_bound = geo + errsum
        verdict.reason = f"increments shrink geometrically (ratio {rmax:.3g})"
        return verdict
    rmin = float(np.nanmin(ratios))
    if rmin >= 0.99:
        verdict.classification = "infinite"
        verdict.reason = "logarithmic growth" if rmax < 1.05 else "power-law growth"
        return verdict
    diffs = np.diff(tail)
    if np.any(diffs > 0) and np.any(diffs < 0):
        verdict.reason = "oscillatory tail increments"
    else:
        verdict.reason = f"slowly varying tail (ratio {rmax:.3g}, last increment {tail[-1]:.3g})"
    return verdict


def classify_both(f, a=1.0):
    """Both integral forms, reported separately: ``ds/(1+f)`` from 0 and ``ds/f`` from ``a``."""
    out = {"bu": classify_criterion(f, 0.0, "bu")}
    try:
        out["reciprocal"] = classify_criterion(f, a, "reciprocal")
    except InvalidInputError as exc:
        out["reciprocal"] = CriterionVerdict("inconclusive", math.nan, math.inf, 0.0,
                                             "reciprocal", a, reason=str(exc))
    return out


def check_monotone(f, g, lower=0.0, form="bu"):
    """Consistency of the classifier under ``f <= g``.

    A larger reaction gives a smaller integrand, so ``f`` finite with
    ``g`` infinite is a violation. Returns ``(violation, verdict_f, verdict_g)``.
    """
    ef, eg = _as_ast(f, {"s": "u"}), _as_ast(g, {"s": "u"})
    s = lower + np.concatenate([np.linspace(0, 1, 11), np.logspace(0, 12, 49)])
    env = {"u": s, "t": 0.0, "x": 0.0, "y": 0.0, "v": 0.0}
    with np.errstate(all="ignore"):
        fv = np.asarray(dsl.evaluate(ef, env, strict=False)) * np.ones_like(s)
        gv = np.asarray(dsl.evaluate(eg, env, strict=False)) * np.ones_like(s)
    if not np.all(fv <= gv):
        raise InvalidInputError("f <= g does not hold on the sampled grid")
    vf = classify_criterion(ef, lower, form)
    vg = classify_criterion(eg, lower, form)
    return (vf.classification == "finite" and vg.classification == "infinite"), vf, vg


# ------------------------------------------------------------ comparison


@dataclass
class Comparison:
    max_deviation: float
    t_compare: float
    pde_terminal: str
    ode_terminal: str
    pde_t_est: float = None
    ode_t_est: float = None
    blowup_gap: float = None


def compare_pde_ode(problem, config=None, margin=0.05, ode_rtol=1e-11):
    """Run the PDE and its ODE reduction and compare ``||u||_inf`` with ``|u_ode|``.

    Requires spatially constant ``u0`` and a reaction free of ``x, y``.
    Samples up to ``min(T, t_est_pde - margin, t_est_ode - margin)`` are
    compared; ``blowup_gap`` is the relative gap between blow-up estimates.
    """
    config = config or StepperConfig()
    if problem.reaction.is_system:
        raise InvalidParameterError("comparison is defined for scalar problems")
    if dsl.variables(problem.reaction.f) & {"x", "y"}:
        raise InvalidParameterError("reaction must not depend on x or y")
    u0 = problem.u0.values
    if np.ptp(u0) != 0:
        raise InvalidParameterError("initial data must be spatially constant")
    pde = simulate(problem, config)
    ode = integrate_ode(problem.reaction.f, float(u0.flat[0]), problem.T, rtol=ode_rtol,
                        atol=1e-14, blowup=max(1e10, config.blowup_threshold))
    t_cmp = float(problem.T)
    gap = None
    if pde.t_est is not None:
        t_cmp = min(t_cmp, pde.t_est - margin)
    if ode.t_est is not None:
        t_cmp = min(t_cmp, ode.t_est - margin)
    if pde.t_est is not None and ode.t_est is not None:
        gap = abs(pde.t_est - ode.t_est) / abs(ode.t_est)
    t = pde.trace["t"]
    keep = (t <= t_cmp) & (t <= ode.t[-1])
    dev = float(np.max(np.abs(pde.trace["linf_u"][keep] - np.abs(ode(t[keep]))))) if keep.any() else math.nan
    return Comparison(dev, t_cmp, pde.terminal, ode.terminal, pde.t_est, ode.t_est, gap)
