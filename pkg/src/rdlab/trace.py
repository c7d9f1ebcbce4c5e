"""Per-step trace and strided space-time record filled in by the stepper."""
from __future__ import annotations

import io

import numpy as np

from . import dsl
from .meshfield import _norm_values

SCHEMA_VERSION = 1


def sign_summary(values, scale_tol=1e-10):
    """Classify a sampled reaction field as all-positive/all-negative/mixed/has-zero.

    A sample counts as zero when ``|f| <= scale_tol * (1 + max|f|)``.
    """
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        return "non-finite"
    amax = float(np.max(np.abs(values)))
    tol = scale_tol * (1.0 + amax)
    lo, hi = float(values.min()), float(values.max())
    if lo < -tol and hi > tol:
        return "mixed"
    if np.min(np.abs(values)) <= tol:
        return "has-zero"
    return "all-positive" if lo > 0 else "all-negative"


def reaction_bindings(grid, t, state):
    env = {"t": t, "x": grid.coords[0], "y": grid.coords[1] if grid.dim == 2 else 0.0}
    env["u"] = state[0]
    if len(state) > 1:
        env["v"] = state[1]
    return env


def eval_reaction(expr, grid, t, state):
    r = dsl.evaluate(expr, reaction_bindings(grid, t, state))
    return np.broadcast_to(r, grid.shape)


class Trace:
    """Columnar time series, one row per accepted step (row 0 is ``t = 0``)."""

    def __init__(self, grid, reaction, horizon, p_list=(2.0,), zero_tol=1e-10):
        self.grid = grid
        self.reaction = reaction
        self.horizon = float(horizon)
        self.p_list = tuple(float(p) for p in p_list)
        self.zero_tol = zero_tol
        self.ncomp = 2 if reaction.is_system else 1
        self.columns = {name: [] for name in self.column_names()}
        self.lp = {(c, p): [] for c in self.components for p in self.p_list}
        # node of smallest |f| (resp. |g|) at each sample: (x-coords, u, v, value)
        self.zero_points = {r: [] for r in self.reactions}

    @property
    def components(self):
        return ("u", "v")[: self.ncomp]

    @property
    def reactions(self):
        return ("f", "g")[: self.ncomp]

    @property
    def measure(self):
        return self.grid.domain.measure

    def column_names(self):
        names = ["t", "dt"]
        for c in self.components:
            names += [f"l1_{c}", f"linf_{c}", f"min_{c}", f"mass_{c}"]
        for r in self.reactions:
            names += [f"{r}_min", f"{r}_max", f"{r}_sign"]
        return names

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, name):
        col = self.columns[name]
        if name.endswith("_sign"):
            return list(col)
        return np.asarray(col, dtype=float)

    def record(self, t, dt, state):
        grid = self.grid
        cols = self.columns
        cols["t"].append(float(t))
        cols["dt"].append(float(dt))
        for c, vals in zip(self.components, state):
            cols[f"l1_{c}"].append(_norm_values(grid, vals, 1.0))
            cols[f"linf_{c}"].append(float(np.max(np.abs(vals))))
            cols[f"min_{c}"].append(float(np.min(vals)))
            cols[f"mass_{c}"].append(float(np.sum(grid.weights * vals)))
            for p in self.p_list:
                self.lp[(c, p)].append(_norm_values(grid, vals, p))
        for r, expr in zip(self.reactions, self.reaction.exprs):
            try:
                fv = eval_reaction(expr, grid, t, state)
            except ArithmeticError:
                fv = np.full(grid.shape, np.nan)
            ok = np.all(np.isfinite(fv))
            cols[f"{r}_min"].append(float(fv.min()) if ok else float("nan"))
            cols[f"{r}_max"].append(float(fv.max()) if ok else float("nan"))
            cols[f"{r}_sign"].append(sign_summary(fv, self.zero_tol))
            if ok:
                k = int(np.argmin(np.abs(fv)))
                idx = np.unravel_index(k, grid.shape)
                xs = tuple(float(ax[i]) for ax, i in zip(grid.axes, idx))
                self.zero_points[r].append((xs, *(float(s[idx]) for s in state), float(fv[idx])))
            else:
                self.zero_points[r].append(None)

    def witness(self, i, reaction="f"):
        """Witness dict ``{t, x, u[, v], value}`` for trace row ``i``."""
        zp = self.zero_points[reaction][i]
        w = {"t": self.columns["t"][i]}
        if zp is None:
            return w
        w["x"] = list(zp[0])
        for c, val in zip(self.components, zp[1:-1]):
            w[c] = val
        w[reaction] = zp[-1]
        return w

    def to_csv(self, path_or_buf=None, header_comment=None):
        """Write the fixed-header CSV; returns the text when no target is given."""
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        names = self.column_names()
        buf.write(",".join(names) + "\n")
        for i in range(len(self)):
            row = []
            for name in names:
                val = self.columns[name][i]
                row.append(val if isinstance(val, str) else repr(float(val)))
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return text


class SpaceTimeRecord:
    """Fields at a strided subset of accepted steps (always first and last)."""

    def __init__(self, grid, reaction, stride=10):
        self.grid = grid
        self.reaction = reaction
        self.stride = int(stride)
        self.times = []
        self.fields = []

    def add(self, t, state):
        self.times.append(float(t))
        self.fields.append(tuple(np.array(s, copy=True) for s in state))

    def __len__(self):
        return len(self.times)

    def component(self, i=0):
        """Stacked array ``(n_samples, *grid.shape)`` for component ``i``."""
        return np.stack([f[i] for f in self.fields])
