"""IMEX time stepping with step-doubling control and blow-up detection.

One step solves, for each component with diffusion coefficient ``c``::

    (I - theta*dt*c*L) u_new = u + dt*f(t, x, u[, v]) + (1 - theta)*dt*c*L u

The reaction is explicit, diffusion is theta-implicit. In 1D the system is
tridiagonal (banded LU); in 2D it is solved by preconditioned conjugate
gradients on ``W @ A``, which is symmetric positive definite for the
trapezoid weights ``W``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import cg

from .errors import InvalidParameterError, LinearSolveError, NonFiniteResultError
from .meshfield import Field, Grid
from .trace import SpaceTimeRecord, Trace, eval_reaction

log = logging.getLogger(__name__)

__all__ = [
    "StepperConfig",
    "Problem",
    "SimResult",
    "BlowupEvent",
    "step_imex",
    "simulate",
    "detect_blowup",
    "fit_blowup_time",
]


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 0.1
    error_tol: float = 1e-6
    blowup_threshold: float = 1e8
    theta: float = 1.0
    # accept 2*u_half - u_full (second order) instead of u_half
    richardson: bool = True
    stride: int = 10
    trace_p: tuple = (2.0,)
    max_steps: int = 2_000_000
    safety: float = 0.9
    cg_tol: float = 1e-10

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise InvalidParameterError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.error_tol > 0:
            raise InvalidParameterError("error_tol must be positive")
        if not self.blowup_threshold > 0:
            raise InvalidParameterError("blowup_threshold must be positive")
        if not 0.5 <= self.theta <= 1.0:
            raise InvalidParameterError("theta must lie in [1/2, 1]")
        if self.stride < 1:
            raise InvalidParameterError("stride must be >= 1")

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["trace_p"] = list(self.trace_p)
        return d


@dataclass
class Problem:
    grid: Grid
    reaction: object
    u0: Field
    T: float
    a: float = 1.0
    b: float = None
    v0: Field = None
    name: str = ""
    require_positive: bool = False

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameterError("diffusion coefficient a must be positive")
        if not self.T > 0:
            raise InvalidParameterError("horizon T must be positive")
        if self.reaction.is_system:
            if self.v0 is None or self.b is None:
                raise InvalidParameterError("systems need v0 and b")
            if not self.b > 0:
                raise InvalidParameterError("diffusion coefficient b must be positive")
        elif self.v0 is not None:
            raise InvalidParameterError("scalar problem cannot take v0")
        if self.require_positive:
            for name, f0 in zip(("u0", "v0"), self.initial):
                if np.min(f0.values) <= 0:
                    raise InvalidParameterError(f"{name} must be strictly positive")

    @property
    def initial(self):
        return (self.u0,) if self.v0 is None else (self.u0, self.v0)

    @property
    def coeffs(self):
        return (self.a,) if self.v0 is None else (self.a, self.b)


@dataclass
class BlowupEvent:
    t_detect: float
    t_est: float
    beta: float
    reason: str
    component: str = "u"


@dataclass
class SimResult:
    terminal: str  # completed | blowup | dt_underflow | step_limit
    t_end: float
    final: tuple
    trace: Trace
    record: SpaceTimeRecord
    t_est: float = None
    component: str = None
    beta: float = None
    steps: int = 0
    rejected: int = 0
    events: list = field(default_factory=list)

    @property
    def blew_up(self):
        return self.terminal == "blowup"

    def summary(self):
        return {
            "terminal": self.terminal,
            "t_end": self.t_end,
            "t_est": self.t_est,
            "component": self.component,
            "beta": self.beta,
            "steps": self.steps,
            "rejected": self.rejected,
            "max_linf": {c: float(np.max(self.trace[f"linf_{c}"])) for c in self.trace.components},
            "events": self.events[:20],
        }


class _Integrator:
    """Caches operator pieces for one (grid, coefficients, theta) triple."""

    def __init__(self, problem, config):
        self.grid = problem.grid
        self.problem = problem
        self.config = config
        self.coeffs = problem.coeffs
        self.exprs = problem.reaction.exprs
        g = self.grid
        L = g.laplacian_matrix
        self.L = L
        self.pinned = g.boundary.fixes_values
        self.mask = g.boundary_mask.ravel()
        if g.dim == 1:
            self.diags = (L.diagonal(1), L.diagonal(0), L.diagonal(-1))
        else:
            w = g.weights.ravel()
            self.W = sp.diags(w)
            self.w = w
            self.WL = (self.W @ L).tocsr()
            self.Ldiag = L.diagonal()

    def solve(self, rhs, scale):
        """Solve ``(I - scale*L) x = rhs`` for a flat ``rhs``."""
        if self.grid.dim == 1:
            up, mid, lo = self.diags
            n = rhs.size
            ab = np.zeros((3, n))
            ab[0, 1:] = -scale * up
            ab[1] = 1.0 - scale * mid
            ab[2, :-1] = -scale * lo
            return solve_banded((1, 1), ab, rhs, check_finite=False)
        A = self.W - scale * self.WL
        b = self.w * rhs
        diag = self.w * (1.0 - scale * self.Ldiag)
        M = sp.diags(1.0 / diag)
        x, info = cg(A, b, rtol=self.config.cg_tol, atol=0.0, M=M, maxiter=10 * rhs.size)
        if info != 0:
            raise LinearSolveError(f"conjugate gradient did not converge (info={info})")
        return x

    def step(self, state, t, dt):
        theta = self.config.theta
        out = []
        rates = [eval_reaction(e, self.grid, t, state) for e in self.exprs]
        for u, f, c in zip(state, rates, self.coeffs):
            flat = u.ravel()
            # increment form: (I - theta dt c L) d = dt f + dt c L u, so constants stay exact
            rhs = dt * f.ravel() + dt * c * (self.L @ flat)
            if self.pinned:
                rhs[self.mask] = -flat[self.mask]
            new = flat + self.solve(rhs, theta * dt * c)
            if not np.all(np.isfinite(new)):
                raise NonFiniteResultError("step produced non-finite values")
            out.append(new.reshape(self.grid.shape))
        return tuple(out)


def _as_arrays(state):
    return tuple(np.asarray(s.values if isinstance(s, Field) else s, dtype=float) for s in state)


def step_imex(state, t, dt, problem, config=None):
    """Advance ``state`` (tuple of Fields or arrays) by one IMEX step of size ``dt``."""
    config = config or StepperConfig()
    if not dt > 0:
        raise InvalidParameterError("dt must be positive")
    if isinstance(state, (Field, np.ndarray)):
        state = (state,)
    arrays = _as_arrays(state)
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise InvalidParameterError("state must be finite")
    new = _Integrator(problem, config).step(arrays, t, dt)
    if isinstance(state[0], Field):
        return tuple(Field(problem.grid, a) for a in new)
    return new


# ------------------------------------------------------------ blow-up


def fit_blowup_time(times, norms):
    """Least-squares fit of ``N(t) = K (T - t)^(-beta)`` in log-log form.

    The blow-up time ``T`` is found by a scan over ``log(T - t_last)``
    followed by bounded refinement; ``K`` and ``beta`` come from the linear
    regression at that ``T``. Returns ``(T, beta, K)``.
    """
    t = np.asarray(times, dtype=float)
    n = np.asarray(norms, dtype=float)
    if t.size < 3:
        raise InvalidParameterError("need at least 3 samples to fit a blow-up time")
    keep = np.concatenate([[True], np.diff(t) > 0])
    t, n = t[keep], n[keep]
    if t.size < 3:
        raise InvalidParameterError("need at least 3 distinct sample times to fit a blow-up time")
    logn = np.log(n)
    span = t[-1] - t[0]
    if span <= 0:
        raise InvalidParameterError("samples must span a positive time interval")

    def ssr(log_delta):
        tau = np.log(t[-1] + np.exp(log_delta) - t)
        A = np.column_stack([np.ones_like(tau), -tau])
        coef, res, *_ = np.linalg.lstsq(A, logn, rcond=None)
        r = logn - A @ coef
        return float(r @ r), coef

    floor = 8 * np.spacing(abs(t[-1]))  # keep T - t_last resolvable
    lo, hi = math.log(max(span * 1e-9, floor)), math.log(max(span * 1e3, floor * 10))
    grid = np.linspace(lo, hi, 241)
    vals = [ssr(s)[0] for s in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if b > a:
        best = minimize_scalar(lambda s: ssr(s)[0], bounds=(a, b), method="bounded",
                               options={"xatol": 1e-10})
        s = best.x if best.fun <= vals[k] else grid[k]
    else:
        s = grid[k]
    _, (logk, beta) = ssr(s)
    return float(t[-1] + math.exp(s)), float(beta), float(math.exp(logk))


def detect_blowup(times, norms, config=None, dts=None, component="u"):
    """Inspect a window of accepted steps; return a :class:`BlowupEvent` or None.

    Blow-up is declared when the last norm reaches ``blowup_threshold``, or
    when the step size has hit ``dt_min`` while the norm at least doubled
    over the window. ``t_est`` comes from :func:`fit_blowup_time`.
    """
    config = config or StepperConfig()
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.size < 3:
        raise InvalidParameterError("blow-up detection needs a window of >= 3 steps")
    crossed = np.nonzero(norms >= config.blowup_threshold)[0]
    reason = None
    if crossed.size:
        reason = "threshold"
        stop = int(crossed[0]) + 1
    elif dts is not None and np.min(dts) <= config.dt_min * (1 + 1e-12) and norms[-1] >= 2.0 * norms[0]:
        reason = "dt_floor"
        stop = times.size
    if reason is None:
        return None
    t_detect = float(times[stop - 1])
    tw, nw = times[:stop], norms[:stop]
    t_est, beta = t_detect, float("nan")
    if stop >= 3 and nw[-1] > nw[0] and np.all(nw > 0):
        try:
            t_est, beta, _ = fit_blowup_time(tw, nw)
        except (InvalidParameterError, np.linalg.LinAlgError, ValueError):
            pass
    return BlowupEvent(t_detect, t_est, beta, reason, component)


def _blowup_window(trace, comp, decades=3.0, max_points=400):
    t = trace["t"]
    n = trace[f"linf_{comp}"]
    dt = trace["dt"]
    keep = np.nonzero(n >= n[-1] * 10.0 ** (-decades))[0]
    start = keep[0] if keep.size else 0
    start = min(start, max(len(t) - 3, 0))
    idx = np.arange(start, len(t))
    if idx.size > max_points:
        idx = np.unique(np.linspace(start, len(t) - 1, max_points).astype(int))
    return t[idx], n[idx], dt[idx]


# ------------------------------------------------------------ driver


def simulate(problem, config=None):
    """Adaptive IMEX run to the horizon, blow-up, or step-size underflow."""
    config = config or StepperConfig()
    grid = problem.grid
    integ = _Integrator(problem, config)
    state = _as_arrays(problem.initial)
    for s in state:
        if np.max(np.abs(s)) >= config.blowup_threshold:
            raise InvalidParameterError("blowup_threshold must exceed the initial data max")
    trace = Trace(grid, problem.reaction, problem.T, config.trace_p)
    record = SpaceTimeRecord(grid, problem.reaction, config.stride)
    comps = trace.components
    t = 0.0
    T = float(problem.T)
    dt = config.dt_init
    steps = rejected = 0
    events = []
    trace.record(t, 0.0, state)
    record.add(t, state)
    terminal = "completed"
    bevent = None

    def finish(kind):
        if record.times[-1] != t:
            record.add(t, state)
        res = SimResult(kind, t, tuple(Field(grid, s) for s in state), trace, record,
                        steps=steps, rejected=rejected, events=events)
        if bevent is not None:
            res.t_est, res.component, res.beta = bevent.t_est, bevent.component, bevent.beta
        return res

    while T - t > 1e-14 * max(1.0, T):
        if steps >= config.max_steps:
            terminal = "step_limit"
            break
        h = min(dt, T - t)
        try:
            full = integ.step(state, t, h)
            half = integ.step(state, t, 0.5 * h)
            half = integ.step(half, t + 0.5 * h, 0.5 * h)
            err = max(
                float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))
                for a, b in zip(full, half)
            )
            ok = math.isfinite(err)
        except NonFiniteResultError:
            ok, err = False, math.inf
        if ok and err <= config.error_tol:
            if config.richardson:
                new = tuple(2.0 * b - a for a, b in zip(full, half))
            else:
                new = half
            t = t + h if h < T - t else T
            state = new
            steps += 1
            trace.record(t, h, state)
            if steps % config.stride == 0:
                record.add(t, state)
            for c, s in zip(comps, state):
                m = float(s.min())
                if m < 0 and len(events) < 1000:
                    events.append({"kind": "negative", "t": t, "component": c, "min": m})
            hit = [c for c, s in zip(comps, state) if np.max(np.abs(s)) >= config.blowup_threshold]
            if hit:
                c = hit[0]
                tw, nw, dw = _blowup_window(trace, c)
                bevent = detect_blowup(tw, nw, config, dw, c) or BlowupEvent(t, t, float("nan"), "threshold", c)
                terminal = "blowup"
                break
            factor = 2.0 if err == 0 else min(2.0, max(0.2, config.safety * math.sqrt(config.error_tol / err)))
            dt = min(config.dt_max, max(config.dt_min, h * factor))
        else:
            rejected += 1
            if ok:
                factor = min(1.0, max(0.2, config.safety * math.sqrt(config.error_tol / err)))
            else:
                factor = 0.2
            if h <= config.dt_min * (1 + 1e-12):
                terminal = "dt_underflow"
                for c in comps:
                    tw, nw, dw = _blowup_window(trace, c, decades=1.0)
                    if tw.size >= 3:
                        dw = np.append(dw, h)
                        ev = detect_blowup(tw, nw, config, dw[1:], c)
                        if ev is not None:
                            bevent, terminal = ev, "blowup"
                            break
                break
            dt = max(config.dt_min, h * factor)
    log.debug("simulate %s: %s at t=%g after %d steps (%d rejected)",
              problem.name, terminal, t, steps, rejected)
    return finish(terminal)


def with_overrides(config, **kw):
    return replace(config, **kw)
