"""Machine-checkable verdicts over traces, records and reaction specs.

Every verdict is a statement about the sampled set it was computed from,
never about the continuum problem. Checkers are deterministic: the sample
grids are fixed and nothing here draws random numbers.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import dsl
from .errors import InvalidParameterError
from .meshfield import Field, _norm_values, heat_propagate_spectral
from .trace import SCHEMA_VERSION, eval_reaction, sign_summary

__all__ = [
    "HypothesisReport",
    "SmoothingFit",
    "check_sign_condition",
    "check_positivity_condition",
    "check_mass_control",
    "check_ratio_trend",
    "gronwall_ledger",
    "max_principle_oracle",
    "lemma1_probe",
    "fit_smoothing",
    "spike",
    "theorem_probe",
]

CONDITIONS = ("P", "P3prime", "H17", "MU1", "Mprime", "Mstrict", "Exp4")
UNIFORM = ("all-positive", "all-negative")


def _clean(obj):
    """Recursively convert numpy scalars/arrays so ``json.dumps`` accepts them."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class HypothesisReport:
    condition: str
    verdict: str  # holds | fails | undetermined
    witness: dict = None
    t0_detected: float = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition id {self.condition!r}")
        if self.verdict not in ("holds", "fails", "undetermined"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == "fails" and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def holds(self):
        return self.verdict == "holds"

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION}
        d.update(asdict(self))
        return _clean(d)


# ------------------------------------------------------------ sign condition


def check_sign_condition(trace, persistence=0.5):
    """Find the latest time after which every reaction keeps one strict sign.

    ``t0_detected`` is the first sample of the longest uniform-sign suffix.
    On a finite horizon any suffix is trivially "eventually uniform", so the
    condition is reported as holding only when that suffix covers at least
    ``1 - persistence`` of the simulated interval.
    """
    n = len(trace)
    cond = "MU1" if trace.ncomp == 2 else "H17"
    if n == 0:
        raise InvalidParameterError("empty trace")
    times = trace["t"]
    signs = list(zip(*(trace[f"{r}_sign"] for r in trace.reactions)))
    changes = [
        float(times[i]) for i in range(1, n)
        if signs[i] != signs[i - 1]
    ]
    details = {"sign_changes": changes[:200], "final_signs": list(signs[-1])}
    last = signs[-1]
    if not all(s in UNIFORM for s in last):
        return HypothesisReport(cond, "fails", _sign_witness(trace, n - 1), None, details)
    start = n - 1
    while start > 0 and signs[start - 1] == last:
        start -= 1
    t0 = float(times[start])
    t_first, t_last = float(times[0]), float(times[-1])
    details["uniform_fraction"] = 1.0 if t_last == t_first else (t_last - t0) / (t_last - t_first)
    if start == 0 or t0 - t_first <= persistence * (t_last - t_first):
        return HypothesisReport(cond, "holds", None, t0, details)
    return HypothesisReport(cond, "fails", _sign_witness(trace, start - 1), t0, details)


def _sign_witness(trace, i):
    w = {}
    for r in trace.reactions:
        w.update(trace.witness(i, r))
        w[f"{r}_sign"] = trace[f"{r}_sign"][i]
    return w


# ------------------------------------------------------- reaction samplers


_T_GRID = np.linspace(0.0, 10.0, 11)
_X_GRID = np.linspace(0.0, 1.0, 5)
_PARTNER_GRID = np.concatenate([np.linspace(0.0, 1.0, 6)[1:], np.logspace(0.0, 2.0, 9)[1:]])


def _sample_env(exprs, t_grid, x_grid, u_vals, v_vals):
    names = set().union(*(dsl.variables(e) for e in exprs))
    axes = {"t": t_grid, "x": x_grid, "y": x_grid if "y" in names else np.zeros(1),
            "u": np.asarray(u_vals, float), "v": np.asarray(v_vals, float)}
    order = ("t", "x", "y", "u", "v")
    mesh = np.meshgrid(*(axes[k] for k in order), indexing="ij")
    return dict(zip(order, (m.ravel() for m in mesh)))


def _sample_witness(env, i, **extra):
    w = {k: float(env[k][i]) for k in ("t", "x", "y", "u", "v")}
    w.update({k: float(v) for k, v in extra.items()})
    return w


def check_positivity_condition(reaction, t_grid=None, x_grid=None, partner_grid=None,
                               zero_tol=1e-10):
    """Sample ``f(t,x,0)`` (scalar) or ``f(t,x,0,v)``, ``g(t,x,u,0)`` (pair) and require >= 0."""
    t_grid = _T_GRID if t_grid is None else np.asarray(t_grid, float)
    x_grid = _X_GRID if x_grid is None else np.asarray(x_grid, float)
    partner = _PARTNER_GRID if partner_grid is None else np.asarray(partner_grid, float)
    if reaction.is_system:
        cond = "P3prime"
        cases = [("f", reaction.f, [0.0], partner), ("g", reaction.g, partner, [0.0])]
    else:
        cond = "P"
        cases = [("f", reaction.f, [0.0], [0.0])]
    worst = None
    n = 0
    for name, expr, us, vs in cases:
        env = _sample_env([expr], t_grid, x_grid, us, vs)
        vals = np.broadcast_to(dsl.evaluate(expr, env, strict=False), env["t"].shape)
        n += vals.size
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.argmax(bad))
            return HypothesisReport(cond, "undetermined", _sample_witness(env, i, **{name: vals[i]}),
                                    details={"reason": "non-finite evaluation", "reaction": name})
        i = int(np.argmin(vals))
        if worst is None or vals[i] < worst[0]:
            worst = (float(vals[i]), _sample_witness(env, i, **{name: vals[i]}))
    details = {"samples": n, "min_value": worst[0]}
    if worst[0] >= -zero_tol:
        return HypothesisReport(cond, "holds", details=details)
    return HypothesisReport(cond, "fails", worst[1], details=details)


_MASS_GRID = np.logspace(-6.0, 6.0, 25)


def check_mass_control(pair, C=1.0, strict=False, uv_grid=None, t_grid=None, x_grid=None,
                       zero_tol=1e-10):
    """Sample ``f + g - C (u + v + 1)`` (or ``f + g`` when ``strict``) on a log grid.

    Samples where the reaction overflows are skipped and counted in
    ``details['skipped']``; the verdict is over the finite samples.
    """
    if not pair.is_system:
        raise InvalidParameterError("mass control applies to a system pair")
    if not strict and not C >= 0:
        raise InvalidParameterError("C must be nonnegative")
    uv = _MASS_GRID if uv_grid is None else np.asarray(uv_grid, float)
    t_grid = _T_GRID if t_grid is None else np.asarray(t_grid, float)
    x_grid = _X_GRID if x_grid is None else np.asarray(x_grid, float)
    env = _sample_env(pair.exprs, t_grid, x_grid, uv, uv)
    shape = env["t"].shape
    f = np.broadcast_to(dsl.evaluate(pair.f, env, strict=False), shape)
    g = np.broadcast_to(dsl.evaluate(pair.g, env, strict=False), shape)
    with np.errstate(all="ignore"):
        s = f + g
        excess = s if strict else s - C * (env["u"] + env["v"] + 1.0)
        tol = zero_tol * (1.0 + np.abs(f) + np.abs(g))
    finite = np.isfinite(excess) & np.isfinite(tol)
    cond = "Mstrict" if strict else "Mprime"
    details = {"C": None if strict else float(C), "samples": int(excess.size),
               "skipped": int((~finite).sum())}
    if not finite.any():
        return HypothesisReport(cond, "undetermined", details={**details, "reason": "no finite samples"})
    margin = np.where(finite, excess - tol, -np.inf)
    i = int(np.argmax(margin))
    details["max_excess"] = float(excess[i])
    if margin[i] <= 0:
        details["zero_sum"] = bool(np.all(np.abs(s[finite]) <= tol[finite]))
        return HypothesisReport(cond, "holds", details=details)
    return HypothesisReport(cond, "fails", _sample_witness(env, i, f=f[i], g=g[i], excess=excess[i]),
                            details=details)


def check_ratio_trend(pair, v_grid=None):
    """Heuristic trend test for ``G'(v) / F(v) -> 0`` on a pair ``(-u F(v), u G(v))``.

    ``F`` and ``G`` are read off at ``u = 1``; ``G'`` is a centred difference.
    Holds when the ratio decreases over the finite part of the grid.
    """
    v = np.logspace(0.0, 3.0, 31) if v_grid is None else np.asarray(v_grid, float)
    env = {"t": 0.0, "x": 0.0, "y": 0.0, "u": 1.0}
    h = 1e-6 * np.maximum(1.0, v)
    F = -np.asarray(dsl.evaluate(pair.f, env, strict=False, v=v))
    gp = np.asarray(dsl.evaluate(pair.g, env, strict=False, v=v + h))
    gm = np.asarray(dsl.evaluate(pair.g, env, strict=False, v=v - h))
    with np.errstate(all="ignore"):
        ratio = (gp - gm) / (2 * h) / F
    ok = np.isfinite(ratio)
    details = {"heuristic": True, "v_max_finite": float(v[ok].max()) if ok.any() else None}
    if ok.sum() < 3:
        return HypothesisReport("Exp4", "undetermined", details={**details, "reason": "overflow"})
    r = ratio[ok]
    details["ratio_first"], details["ratio_last"] = float(r[0]), float(r[-1])
    decreasing = np.all(np.diff(r) <= 1e-6 * np.abs(r[:-1])) and r[-1] < 0.5 * r[0]
    if decreasing:
        return HypothesisReport("Exp4", "holds", details=details)
    j = int(np.argmax(np.where(ok, np.abs(ratio), -np.inf)))
    return HypothesisReport("Exp4", "fails", {"v": float(v[j]), "ratio": float(ratio[j])}, details=details)


# ------------------------------------------------------------------ Gronwall


@dataclass
class GronwallReport:
    verdict: str
    C: float
    C_prime: float = None
    max_violation: float = None
    mass_drift: float = None
    witness: dict = None
    samples: int = 0

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "kind": "gronwall"}
        d.update(asdict(self))
        return _clean(d)


def gronwall_ledger(trace, C=1.0, slope_tol=1e-8):
    """Check ``y' <= C (y + |Omega|)`` for ``y = integral of (u + v)`` along a trace.

    Forward differences are compared against the right-hand side at the
    larger endpoint. ``C_prime`` is the smallest constant with
    ``y(t) + |Omega| <= C_prime * exp(C t)`` over the samples.
    """
    n = len(trace)
    if n < 3:
        return GronwallReport("undetermined", C, samples=n)
    t = trace["t"]
    y = sum(trace[f"mass_{c}"] for c in trace.components)
    area = trace.measure
    slope = np.diff(y) / np.diff(t)
    rhs = C * (np.maximum(y[:-1], y[1:]) + area)
    excess = slope - rhs - slope_tol * (1.0 + np.abs(rhs))
    c_prime = float(np.max((y + area) * np.exp(-C * t)))
    drift = float(np.max(np.abs(y - y[0])) / max(abs(y[0]), 1e-300))
    i = int(np.argmax(excess))
    if excess[i] <= 0:
        return GronwallReport("holds", C, c_prime, float(excess[i]), drift, samples=n)
    w = {"t": float(t[i]), "y": float(y[i]), "slope": float(slope[i]), "bound": float(rhs[i])}
    return GronwallReport("fails", C, c_prime, float(excess[i]), drift, w, n)


# --------------------------------------------------------- maximum principle


@dataclass
class ExtremumReport:
    direction: str
    verdict: str
    interior: float
    parabolic_boundary: float
    excess: float
    witness: dict = None
    samples: int = 0

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "kind": "max_principle"}
        d.update(asdict(self))
        return _clean(d)


def max_principle_oracle(record, direction="sub", mp_tol=1e-8, component=0):
    """Compare the space-time extremum with the extremum on the parabolic boundary.

    The parabolic boundary is the ``t = 0`` layer plus boundary nodes at
    every recorded time. ``sub`` checks the maximum, ``super`` the minimum.
    Verdicts hold over the recorded (strided) samples only.
    """
    if direction not in ("sub", "super"):
        raise InvalidParameterError("direction must be 'sub' or 'super'")
    data = record.component(component)
    mask = np.broadcast_to(record.grid.boundary_mask, data.shape).copy()
    mask[0] = True
    sgn = 1.0 if direction == "sub" else -1.0
    s = sgn * data
    gamma = float(s[mask].max())
    interior_vals = np.where(mask, -np.inf, s)
    k = int(np.argmax(interior_vals))
    inner = float(interior_vals.flat[k]) if len(record) > 1 else -math.inf
    excess = inner - gamma
    verdict = "holds" if excess <= mp_tol else "fails"
    witness = None
    if math.isfinite(inner):
        idx = np.unravel_index(k, data.shape)
        witness = {"t": record.times[idx[0]],
                   "x": [float(ax[i]) for ax, i in zip(record.grid.axes, idx[1:])],
                   "u": float(data[idx])}
    return ExtremumReport(direction, verdict, sgn * inner, sgn * gamma, excess, witness,
                          int(data.size))


# ------------------------------------------------------------------- level crossings


@dataclass
class Lemma1Result:
    status: str  # witness | violated | not_applicable
    level: float
    crossings: list = field(default_factory=list)
    witness: dict = None

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "kind": "lemma1"}
        d.update(asdict(self))
        return _clean(d)


def _level_hits(times, series, c, level_tol):
    """Times at which one node's series meets level ``c`` (sample hits or interpolated crossings)."""
    s = series - c
    hits = []
    for k in range(len(times)):
        if abs(s[k]) <= level_tol:
            hits.append(times[k])
        elif k + 1 < len(times) and abs(s[k + 1]) > level_tol and s[k] * s[k + 1] < 0:
            lam = s[k] / (s[k] - s[k + 1])
            hits.append(times[k] + lam * (times[k + 1] - times[k]))
    return hits


def lemma1_probe(record, c, zero_tol=1e-6, level_tol=None, component=0, reaction=None,
                 time_tol=None):
    """Look for three level-``c`` hits at increasing times, then a reaction zero between them.

    Level hits are samples within ``level_tol`` of ``c`` or sign changes of
    ``u - c`` between consecutive samples at one node (located by linear
    interpolation). Between the first and third hit the reaction is
    searched for ``|f| <= zero_tol`` at recorded samples, a mixed-sign
    sample, or a sign change between samples refined by root bracketing.
    """
    if not c > 0:
        raise InvalidParameterError("level c must be positive")
    level_tol = 1e-9 * (1.0 + abs(c)) if level_tol is None else level_tol
    reaction = reaction or record.reaction
    expr = reaction.exprs[component]
    grid = record.grid
    times = np.asarray(record.times)
    data = record.component(component)
    flat = data.reshape(len(times), -1)
    events = []
    for j in range(flat.shape[1]):
        for th in _level_hits(times, flat[:, j], c, level_tol):
            events.append((float(th), j))
    events.sort()
    if time_tol is None:
        time_tol = 1e-9 * max(1.0, float(times[-1] - times[0]))
    triple = []
    for th, j in events:
        # hits closer than time_tol are the same instant
        if not triple or th > triple[-1][0] + time_tol:
            triple.append((th, j))
        if len(triple) == 3:
            break

    def node_x(j):
        idx = np.unravel_index(j, grid.shape)
        return [float(ax[i]) for ax, i in zip(grid.axes, idx)]

    crossings = [{"t": th, "x": node_x(j)} for th, j in triple]
    if len(triple) < 3:
        return Lemma1Result("not_applicable", c, crossings)
    t1, t3 = triple[0][0], triple[2][0]
    inside = [k for k in range(len(times)) if t1 < times[k] < t3]
    fvals = {}
    for k in inside:
        fv = eval_reaction(expr, grid, times[k], record.fields[k])
        fvals[k] = fv
        m = int(np.argmin(np.abs(fv)))
        if abs(fv.flat[m]) <= zero_tol or sign_summary(fv) == "mixed":
            return Lemma1Result("witness", c, crossings, _lemma_witness(grid, record, k, m, fv.flat[m]))
    # bracket sign changes between consecutive samples inside [t1, t3]
    span = [k for k in range(len(times)) if t1 <= times[k] <= t3]
    if inside:
        span = sorted(set(span) | {max(inside[0] - 1, 0), min(inside[-1] + 1, len(times) - 1)})
    for k0, k1 in zip(span[:-1], span[1:]):
        f0 = fvals.get(k0)
        if f0 is None:
            f0 = fvals[k0] = eval_reaction(expr, grid, times[k0], record.fields[k0])
        f1 = fvals.get(k1)
        if f1 is None:
            f1 = fvals[k1] = eval_reaction(expr, grid, times[k1], record.fields[k1])
        flips = np.nonzero((np.sign(f0) * np.sign(f1)).ravel() < 0)[0]
        for m in flips:
            wit = _refine_zero(expr, grid, record, k0, k1, int(m), max(t1, times[k0]), min(t3, times[k1]))
            if wit is not None and abs(wit["f"]) <= zero_tol:
                return Lemma1Result("witness", c, crossings, wit)
    return Lemma1Result("violated", c, crossings)


def _lemma_witness(grid, record, k, m, fval):
    idx = np.unravel_index(m, grid.shape)
    w = {"t": record.times[k], "x": [float(ax[i]) for ax, i in zip(grid.axes, idx)]}
    for name, comp in zip(("u", "v"), record.fields[k]):
        w[name] = float(comp.flat[m])
    w["f"] = float(fval)
    return w


def _refine_zero(expr, grid, record, k0, k1, m, lo, hi):
    """Root of ``tau -> f(tau, x_m, u_lin(tau))`` with ``u`` linear between samples."""
    ta, tb = record.times[k0], record.times[k1]
    idx = np.unravel_index(m, grid.shape)
    xs = [float(ax[i]) for ax, i in zip(grid.axes, idx)]
    ua = [float(s.flat[m]) for s in record.fields[k0]]
    ub = [float(s.flat[m]) for s in record.fields[k1]]
    names = ("u", "v")

    def state_at(tau):
        lam = (tau - ta) / (tb - ta)
        return {n: a + lam * (b - a) for n, a, b in zip(names, ua, ub)}

    def fn(tau):
        env = {"t": tau, "x": xs[0], "y": xs[1] if len(xs) > 1 else 0.0}
        env.update(state_at(tau))
        return dsl.evaluate(expr, env)

    try:
        fa, fb = fn(lo), fn(hi)
        if fa == 0:
            root = lo
        elif fb == 0:
            root = hi
        elif fa * fb < 0:
            root = brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        else:
            return None
        val = fn(root)
    except (ArithmeticError, ValueError):
        return None
    w = {"t": float(root), "x": xs}
    w.update(state_at(root))
    w["f"] = float(val)
    return w


# ---------------------------------------------------------------- smoothing


@dataclass
class SmoothingFit:
    p: float
    q: float
    n: int
    slope: float
    intercept: float
    theory_slope: float
    C: float
    r2: float
    mode: str = "adapted"
    times: list = field(default_factory=list)
    norms: list = field(default_factory=list)

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "kind": "smoothing_fit"}
        d.update(asdict(self))
        return _clean(d)


def theory_slope(n, p, q):
    return -(n / 2.0) * (1.0 / p - (0.0 if math.isinf(q) else 1.0 / q))


def spike(grid, p=1.0, center=None):
    """Single-node spike normalised to unit L^p norm (trapezoid)."""
    vals = np.zeros(grid.shape)
    if center is None:
        center = tuple(n // 2 for n in grid.shape)
    vals[center] = 1.0
    norm = _norm_values(grid, vals, float(p))
    return Field(grid, vals / norm)


def fit_smoothing(p, q, initial, coeff=1.0, t_samples=None, mode="adapted", boundary_guard=1e-6):
    """Fit the exponent of ``||S(t) v||_q <= C t^(-(n/2)(1/p - 1/q)) ||v||_p``.

    ``mode='fixed'`` propagates ``initial`` itself and fits
    ``||S(t) v||_q / ||v||_p``. A fixed spike only probes the L^1 scaling, so
    the default ``mode='adapted'`` uses the datum ``v_t = S(t) v`` (a
    near-delta of width ``sqrt(t)``) at each sample time and fits
    ``||S(2t) v||_q / ||S(t) v||_p``, which tracks the operator-norm
    exponent for every ``p < q``.

    Sample times where the propagated field has reached the boundary
    (boundary values above ``boundary_guard`` times the peak) are dropped.
    """
    p, q = float(p), float(q)
    if not 1.0 <= p < q:
        raise InvalidParameterError("need 1 <= p < q <= inf")
    if mode not in ("adapted", "fixed"):
        raise InvalidParameterError("mode must be 'adapted' or 'fixed'")
    if t_samples is None:
        t_samples = np.logspace(-5, -3, 16)
    t_samples = np.asarray(t_samples, dtype=float)
    if t_samples.size < 8:
        raise InvalidParameterError("need at least 8 sample times")
    grid = initial.grid
    bmask = grid.boundary_mask
    kept_t, norms = [], []
    vp = _norm_values(grid, initial.values, p)
    for t in t_samples:
        out = heat_propagate_spectral(initial, coeff, 2 * t if mode == "adapted" else t)
        peak = np.max(np.abs(out.values))
        if np.max(np.abs(out.values[bmask])) >= boundary_guard * peak:
            continue
        if mode == "adapted":
            denom = _norm_values(grid, heat_propagate_spectral(initial, coeff, t).values, p)
        else:
            denom = vp
        kept_t.append(float(t))
        norms.append(_norm_values(grid, out.values, q) / denom)
    if len(kept_t) < 8:
        raise InvalidParameterError(
            f"only {len(kept_t)} sample times before the solution reaches the boundary"
        )
    lt, ln = np.log(kept_t), np.log(norms)
    slope, intercept = np.polyfit(lt, ln, 1)
    resid = ln - (slope * lt + intercept)
    ss_tot = float(np.sum((ln - ln.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return SmoothingFit(p, q, grid.dim, float(slope), float(intercept),
                        theory_slope(grid.dim, p, q), float(math.exp(intercept)), r2,
                        mode, kept_t, [float(x) for x in norms])


# ------------------------------------------------------------- theorem probe


@dataclass
class TheoremProbe:
    hypotheses_held: bool
    conclusion: str  # bounded | blowup
    cell: str
    counterexample_candidate: bool
    M1: float = None
    alpha: float = None
    epsilon_lower_bound: float = None
    L1_cap: float = None
    t0: float = None
    reports: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"schema_version": SCHEMA_VERSION, "kind": "theorem_probe"}
        d.update(asdict(self))
        return _clean(d)


def theorem_probe(trace, reports=None, L1_cap=None, mass_C=1.0, terminal=None):
    """Place a run in the (hypotheses held/failed) x (bounded/blow-up) table.

    Hypotheses: the sign condition holds after a detected ``t0``, the
    running sup of ``||u||_1`` (and ``||v||_1``) after ``t0`` stays below
    ``L1_cap``, plus positivity, and mass control for systems. The cell
    "held/blowup" is flagged as a counterexample candidate.
    """
    reports = dict(reports or {})
    reaction = trace.reaction
    sign_id = "MU1" if trace.ncomp == 2 else "H17"
    if sign_id not in reports:
        reports[sign_id] = check_sign_condition(trace)
    pos_id = "P3prime" if trace.ncomp == 2 else "P"
    if pos_id not in reports:
        reports[pos_id] = check_positivity_condition(reaction)
    if trace.ncomp == 2 and "Mprime" not in reports:
        reports["Mprime"] = check_mass_control(reaction, mass_C)
    times = trace["t"]
    l1_0 = sum(trace[f"l1_{c}"][0] for c in trace.components)
    if L1_cap is None:
        L1_cap = 10.0 * (1.0 + l1_0) * (1.0 + trace.measure)
    sign = reports[sign_id]
    t0 = sign.t0_detected if sign.t0_detected is not None else float(times[0])
    after = times >= t0
    sup_l1 = max(float(np.max(trace[f"l1_{c}"][after])) for c in trace.components)
    i0 = int(np.argmax(after))
    alpha = float(trace["linf_u"][i0])
    M1 = float(np.max(trace["l1_u"][after]))
    eps = max(1.0, M1 / (alpha * trace.measure)) if alpha > 0 else math.inf
    required = [sign_id, pos_id] + (["Mprime"] if trace.ncomp == 2 else [])
    held = all(reports[r].holds for r in required) and sup_l1 <= L1_cap
    if terminal is None:
        terminal = "completed" if times[-1] >= trace.horizon * (1 - 1e-12) else "blowup"
    conclusion = "bounded" if terminal == "completed" else "blowup"
    cell = f"{'held' if held else 'failed'}/{conclusion}"
    return TheoremProbe(held, conclusion, cell, held and conclusion == "blowup",
                        M1, alpha, eps, float(L1_cap), t0,
                        {k: v.to_dict() for k, v in reports.items()})
