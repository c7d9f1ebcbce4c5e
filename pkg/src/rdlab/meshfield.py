"""Structured grids, nodal fields and the finite-difference operators on them.

Grids are node-centred and uniform per axis: an axis of length ``L`` with
``n`` nodes has spacing ``L / (n - 1)`` and nodes at ``0, h, ..., L``.
Two-dimensional fields are stored row-major with shape ``(nx, ny)``; the
flat index of node ``(i, j)`` is ``i * ny + j``.

Boundary closures use a ghost node behind every boundary node:

* Neumann: the ghost mirrors the first interior node (zero normal difference).
* Robin ``alpha du/dn + beta u = 0``: the ghost is eliminated with the
  centred normal difference, which only modifies the boundary diagonal.
* Dirichlet: boundary nodes carry zero and the operator returns zero there.

With trapezoid weights ``W`` the matrix ``W @ L`` is symmetric for all three
closures, which is what makes the Neumann operator conserve the trapezoid
integral exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy import fft

from .errors import InvalidFieldError, InvalidParameterError, UnsupportedBoundaryError

__all__ = [
    "Boundary",
    "Domain",
    "Grid",
    "Field",
    "laplacian",
    "norm_p",
    "integrate",
    "heat_propagate_spectral",
    "neumann_eigenvalues",
]


@dataclass(frozen=True)
class Boundary:
    kind: str = "neumann"
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in ("neumann", "dirichlet", "robin"):
            raise InvalidParameterError(f"unknown boundary kind {self.kind!r}")
        if kind == "robin":
            if self.alpha < 0 or self.beta < 0:
                raise InvalidParameterError("Robin coefficients must be nonnegative")
            if self.alpha + self.beta <= 0:
                raise InvalidParameterError("Robin requires alpha + beta > 0")

    @classmethod
    def neumann(cls):
        return cls("neumann")

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @classmethod
    def robin(cls, alpha, beta):
        return cls("robin", float(alpha), float(beta))

    @property
    def fixes_values(self):
        """True when boundary nodes are pinned to zero (Dirichlet, or Robin with alpha=0)."""
        return self.kind == "dirichlet" or (self.kind == "robin" and self.alpha == 0)

    def to_dict(self):
        if self.kind == "robin":
            return {"kind": "robin", "alpha": self.alpha, "beta": self.beta}
        return {"kind": self.kind}


@dataclass(frozen=True)
class Domain:
    """An interval ``[0, L]`` or a rectangle ``[0, Lx] x [0, Ly]``."""

    dim: int
    lengths: tuple
    boundary: Boundary = dc_field(default_factory=Boundary)

    def __post_init__(self):
        lengths = tuple(float(x) for x in np.atleast_1d(self.lengths))
        object.__setattr__(self, "lengths", lengths)
        if isinstance(self.boundary, str):
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.dim not in (1, 2):
            raise InvalidParameterError(f"dim must be 1 or 2, got {self.dim}")
        if len(lengths) != self.dim:
            raise InvalidParameterError("need one length per axis")
        if any(not np.isfinite(x) or x <= 0 for x in lengths):
            raise InvalidParameterError("domain lengths must be positive")

    @property
    def measure(self):
        return float(np.prod(self.lengths))


def _axis_operator(n, h, boundary):
    """Unscaled 1D second-difference matrix with the ghost-node closure."""
    main = np.full(n, -2.0)
    upper = np.ones(n - 1)
    lower = np.ones(n - 1)
    if boundary.fixes_values:
        main[[0, -1]] = 0.0
        upper[0] = 0.0
        lower[-1] = 0.0
        # boundary columns drop out: neighbours see a zero boundary value
        upper[-1] = 0.0
        lower[0] = 0.0
    else:
        upper[0] = 2.0
        lower[-1] = 2.0
        if boundary.kind == "robin":
            main[[0, -1]] -= 2.0 * h * boundary.beta / boundary.alpha
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr") / h**2


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[[0, -1]] = 0.5 * h
    return w


@dataclass(frozen=True)
class Grid:
    domain: Domain
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        object.__setattr__(self, "counts", counts)
        if len(counts) != self.domain.dim:
            raise InvalidParameterError("need one node count per axis")
        if any(c < 3 for c in counts):
            raise InvalidParameterError("each axis needs at least 3 nodes")

    @classmethod
    def interval(cls, length=1.0, nodes=257, boundary="neumann"):
        return cls(Domain(1, (length,), _as_boundary(boundary)), (nodes,))

    @classmethod
    def rectangle(cls, lengths=(1.0, 1.0), nodes=(129, 129), boundary="neumann"):
        if np.isscalar(nodes):
            nodes = (nodes, nodes)
        return cls(Domain(2, tuple(lengths), _as_boundary(boundary)), tuple(nodes))

    @property
    def dim(self):
        return self.domain.dim

    @property
    def shape(self):
        return self.counts

    @property
    def size(self):
        return int(np.prod(self.counts))

    @property
    def boundary(self):
        return self.domain.boundary

    @property
    def spacings(self):
        return tuple(L / (n - 1) for L, n in zip(self.domain.lengths, self.counts))

    @cached_property
    def axes(self):
        return tuple(np.linspace(0.0, L, n) for L, n in zip(self.domain.lengths, self.counts))

    @cached_property
    def coords(self):
        """Nodal coordinate arrays, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def weights(self):
        """Trapezoid quadrature weights, tensorised in 2D."""
        ws = [_trapezoid_weights(n, h) for n, h in zip(self.counts, self.spacings)]
        if self.dim == 1:
            return ws[0]
        return np.outer(ws[0], ws[1])

    @cached_property
    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            mask[[0, -1]] = True
        else:
            mask[[0, -1], :] = True
            mask[:, [0, -1]] = True
        return mask

    @cached_property
    def laplacian_matrix(self):
        """Sparse unscaled Laplacian acting on row-major flattened values."""
        ops = [_axis_operator(n, h, self.boundary) for n, h in zip(self.counts, self.spacings)]
        if self.dim == 1:
            return ops[0].tocsr()
        nx, ny = self.counts
        L = sp.kron(ops[0], sp.identity(ny)) + sp.kron(sp.identity(nx), ops[1])
        if self.boundary.fixes_values:
            keep = sp.diags((~self.boundary_mask).ravel().astype(float))
            L = keep @ L @ keep
        return L.tocsr()

    def field(self, values):
        return Field(self, values)

    def constant(self, c):
        return Field(self, np.full(self.shape, float(c)))

    def from_function(self, fn):
        return Field(self, np.broadcast_to(fn(*self.coords), self.shape))


def _as_boundary(b):
    if isinstance(b, Boundary):
        return b
    if isinstance(b, str):
        return Boundary(b)
    if isinstance(b, dict):
        return Boundary(**b)
    raise InvalidParameterError(f"cannot interpret boundary {b!r}")


class Field:
    """Nodal values on a grid. Values are copied and frozen on construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            if values.size == grid.size:
                values = values.reshape(grid.shape)
            else:
                raise InvalidFieldError(
                    f"field has {values.size} values, grid has {grid.size} nodes"
                )
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("field contains non-finite values")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"Field(shape={self.grid.shape}, min={self.values.min():.6g}, max={self.values.max():.6g})"

    def with_values(self, values):
        return Field(self.grid, values)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


def _check_finite(field):
    if not np.all(np.isfinite(field.values)):
        raise InvalidFieldError("field contains non-finite values")


def apply_laplacian(grid, values, coeff=1.0):
    """Array-level Laplacian used by the stepper; no validation."""
    out = grid.laplacian_matrix @ np.ravel(values)
    return coeff * out.reshape(grid.shape)


def laplacian(field, coeff=1.0):
    """Second-order central-difference Laplacian of ``field`` scaled by ``coeff``."""
    _check_finite(field)
    if not coeff > 0:
        raise InvalidParameterError("diffusion coefficient must be positive")
    return Field(field.grid, apply_laplacian(field.grid, field.values, coeff))


def norm_p(field, p):
    """Trapezoid L^p norm; ``p = inf`` is the nodal max of ``|u|``."""
    p = float(p)
    if not p >= 1:
        raise InvalidParameterError(f"norm exponent must be >= 1, got {p}")
    return _norm_values(field.grid, field.values, p)


def _norm_values(grid, values, p):
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(np.sum(grid.weights * a))
    scale = a.max()
    if scale == 0:
        return 0.0
    # scaled to keep |u|^p in range for large p
    return float(scale * np.sum(grid.weights * (a / scale) ** p) ** (1.0 / p))


def integrate(field):
    """Signed trapezoid integral over the domain."""
    _check_finite(field)
    return float(np.sum(field.grid.weights * field.values))


def neumann_eigenvalues(n, length):
    """Eigenvalues (positive) of minus the discrete Neumann second difference."""
    h = length / (n - 1)
    k = np.arange(n)
    return (2.0 / h**2) * (1.0 - np.cos(k * np.pi / (n - 1)))


def heat_propagate_spectral(field, coeff, t):
    """Exact solution of the semi-discrete heat equation ``u' = coeff * L u``.

    The DCT-I vectors are the eigenvectors of the Neumann stencil, so this
    is the matrix exponential of the stepper's spatial operator.
    """
    if field.grid.boundary.kind != "neumann":
        raise UnsupportedBoundaryError("spectral propagator requires Neumann boundaries")
    if not t >= 0:
        raise InvalidParameterError("propagation time must be nonnegative")
    if not coeff > 0:
        raise InvalidParameterError("diffusion coefficient must be positive")
    _check_finite(field)
    grid = field.grid
    lams = [neumann_eigenvalues(n, L) for n, L in zip(grid.counts, grid.domain.lengths)]
    if grid.dim == 1:
        decay = np.exp(-coeff * lams[0] * t)
    else:
        decay = np.exp(-coeff * t * (lams[0][:, None] + lams[1][None, :]))
    coeffs = fft.dctn(field.values, type=1)
    return Field(grid, fft.idctn(coeffs * decay, type=1))
