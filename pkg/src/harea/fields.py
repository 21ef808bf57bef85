"""Scalar and vector fields on cell grids, and the discrete differential ops.

The gradient takes a forward difference along each axis; where the forward
neighbor is exterior it falls back to a backward difference, and only cells
isolated along an axis get a zero component.  The divergence is assembled as
the exact negative adjoint of that stencil, so ``<grad u, p> = -<u, div p>``
holds to rounding for every pair.  Boundary attachment is never encoded in the
stencils; it enters the model only through the boundary penalty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import Grid

__all__ = [
    "FieldError",
    "ScalarField",
    "VectorField",
    "star",
    "xstar_field",
    "gradient",
    "divergence",
    "vee_wedge",
    "lipschitz_estimate",
    "operator_norm_sq",
]


class FieldError(ValueError):
    """Raised for malformed fields or mismatched grids."""


def _check_same_grid(a, b):
    ga, gb = a.grid, b.grid
    if ga is gb:
        return
    if ga.nx != gb.nx or ga.ny != gb.ny or ga.h != gb.h or not np.array_equal(
        ga.interior_mask, gb.interior_mask
    ) or not np.array_equal(ga.origin, gb.origin):
        raise FieldError("fields live on different grids")


@dataclass(eq=False)
class ScalarField:
    """A real value per interior cell, stored as a full (nx, ny) array.

    Exterior entries are kept at zero; every operation reads and writes
    interior cells only.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.ny):
            raise FieldError(f"values shape {v.shape} != grid shape")
        m = self.grid.interior_mask
        if not np.all(np.isfinite(v[m])):
            raise FieldError("non-finite value on an interior cell")
        out = np.zeros_like(v)
        out[m] = v[m]
        self.values = out

    # constructors ---------------------------------------------------------

    @staticmethod
    def zeros(grid: Grid) -> "ScalarField":
        return ScalarField(grid, np.zeros((grid.nx, grid.ny)))

    @staticmethod
    def constant(grid: Grid, c: float) -> "ScalarField":
        return ScalarField(grid, np.full((grid.nx, grid.ny), float(c)))

    @staticmethod
    def from_function(grid: Grid, f: Callable) -> "ScalarField":
        X, Y = grid.cell_centers()
        return ScalarField(grid, np.asarray(f(X, Y), dtype=float))

    # helpers --------------------------------------------------------------

    def interior(self) -> np.ndarray:
        """Interior values as a 1d array in row-major cell order."""
        return self.values[self.grid.interior_mask]

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())

    def sup_norm(self) -> float:
        v = self.interior()
        return float(np.max(np.abs(v))) if v.size else 0.0

    def __add__(self, other):
        if isinstance(other, ScalarField):
            _check_same_grid(self, other)
            return ScalarField(self.grid, self.values + other.values)
        return ScalarField(self.grid, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            _check_same_grid(self, other)
            return ScalarField(self.grid, self.values - other.values)
        return ScalarField(self.grid, self.values - float(other))

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__


@dataclass(eq=False)
class VectorField:
    """A 2-vector per interior cell, stored as a full (nx, ny, 2) array."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nx, self.grid.ny, 2):
            raise FieldError(f"values shape {v.shape} != grid vector shape")
        m = self.grid.interior_mask
        if not np.all(np.isfinite(v[m])):
            raise FieldError("non-finite vector on an interior cell")
        out = np.zeros_like(v)
        out[m] = v[m]
        self.values = out

    @staticmethod
    def zeros(grid: Grid) -> "VectorField":
        return VectorField(grid, np.zeros((grid.nx, grid.ny, 2)))

    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior_mask]

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.values.copy())

    def norms(self) -> np.ndarray:
        """Euclidean length per cell, shape (nx, ny), zero outside."""
        return np.hypot(self.values[..., 0], self.values[..., 1])

    def __add__(self, other):
        _check_same_grid(self, other)
        return VectorField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return VectorField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return VectorField(self.grid, self.values * float(c))

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# pointwise algebra


def star(z: np.ndarray) -> np.ndarray:
    """Quarter-turn rotation (x, y) -> (-y, x), acting on the last axis.

    Identities (used throughout the tests): star(star(z)) = -z;
    <z, star(z)> = 0; <star(a), star(b)> = <a, b>.
    """
    z = np.asarray(z, dtype=float)
    return np.stack((-z[..., 1], z[..., 0]), axis=-1)


def xstar_field(grid: Grid) -> VectorField:
    """The drift field X*(x, y) = 2(-y, x) sampled at interior cell centers."""
    X, Y = grid.cell_centers()
    v = np.stack((-2.0 * Y, 2.0 * X), axis=-1)
    return VectorField(grid, v)


# ---------------------------------------------------------------------------
# difference operators


def _raw_gradient(grid: Grid, v: np.ndarray) -> np.ndarray:
    h = grid.h
    fwd = np.zeros_like(v)
    fwd[:-1, :] = v[1:, :] - v[:-1, :]
    bwd = np.zeros_like(v)
    bwd[1:, :] = v[1:, :] - v[:-1, :]
    gx = np.where(grid.fwd_x, fwd, np.where(grid.bwd_x, bwd, 0.0)) / h
    fwd = np.zeros_like(v)
    fwd[:, :-1] = v[:, 1:] - v[:, :-1]
    bwd = np.zeros_like(v)
    bwd[:, 1:] = v[:, 1:] - v[:, :-1]
    gy = np.where(grid.fwd_y, fwd, np.where(grid.bwd_y, bwd, 0.0)) / h
    return np.stack((gx, gy), axis=-1)


def _raw_divergence(grid: Grid, p: np.ndarray) -> np.ndarray:
    h = grid.h
    out = np.zeros((grid.nx, grid.ny))
    px, py = p[..., 0], p[..., 1]

    t = np.where(grid.fwd_x, px, 0.0)
    out += t
    out[1:, :] -= t[:-1, :]
    t = np.where(grid.bwd_x, px, 0.0)
    out -= t
    out[:-1, :] += t[1:, :]

    t = np.where(grid.fwd_y, py, 0.0)
    out += t
    out[:, 1:] -= t[:, :-1]
    t = np.where(grid.bwd_y, py, 0.0)
    out -= t
    out[:, :-1] += t[:, 1:]

    out /= h
    out[~grid.interior_mask] = 0.0
    return out


def gradient(u: ScalarField) -> VectorField:
    """Per-cell difference gradient (forward, with backward fallback at the rim)."""
    return VectorField(u.grid, _raw_gradient(u.grid, u.values))


def divergence(p: VectorField) -> ScalarField:
    """Exact negative adjoint of :func:`gradient` under the cell inner product."""
    return ScalarField(p.grid, _raw_divergence(p.grid, p.values))


def vee_wedge(u: ScalarField, v: ScalarField) -> tuple[ScalarField, ScalarField]:
    """Pointwise maximum and minimum of two fields on the same grid."""
    _check_same_grid(u, v)
    return (
        ScalarField(u.grid, np.maximum(u.values, v.values)),
        ScalarField(u.grid, np.minimum(u.values, v.values)),
    )


def lipschitz_estimate(u: ScalarField) -> float:
    """Largest Euclidean gradient length over interior cells."""
    g = gradient(u)
    n = g.norms()[u.grid.interior_mask]
    return float(np.max(n)) if n.size else 0.0


def operator_norm_sq(grid: Grid, iters: int = 60) -> float:
    """Deterministic power estimate of ||gradient||^2 for the step-size rule.

    The uniform-grid bound 8/h^2 is used as a floor; the backward fallback at
    the rim can push the true norm slightly above it, so the estimate carries a
    2% safety factor.
    """
    cached = getattr(grid, "_opnorm_sq", None)
    if cached is not None:
        return cached
    m = grid.interior_mask
    rng = np.random.default_rng(1234)
    v = np.zeros((grid.nx, grid.ny))
    v[m] = rng.standard_normal(int(m.sum()))
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return 8.0 / grid.h**2
    v /= nrm
    lam = 0.0
    for _ in range(iters):
        w = -_raw_divergence(grid, _raw_gradient(grid, v))
        lam = float(np.sqrt(np.sum(w * w)))
        if lam == 0:
            break
        v = w / lam
    est = max(lam * 1.02, 8.0 / grid.h**2)
    object.__setattr__(grid, "_opnorm_sq", est)
    return est
