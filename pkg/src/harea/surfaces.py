"""Named closed-form surfaces and boundary expressions.

These are the data the config format accepts by name.  Two of them are known
exact minimizers used as references by the checks:

* ``es1``: boundary expression x(y - x^2 + 1); over the parabolic domain its
  minimizer is the half-plane-kinked saddle 2xy for y > 0, 0 for y <= 0.
* ``es2``: the surface -2xy + y|y|, a minimizer under its own trace on any
  bounded domain; its horizontal vector is (-4y, 2|y|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Affine",
    "zero",
    "es1_datum",
    "es1_surface",
    "es2_surface",
    "named_datum",
    "exact_surface_for",
    "DATUM_NAMES",
]


def zero(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Affine:
    """The affine surface <a, z> + b."""

    a: tuple[float, float]
    b: float = 0.0

    def __call__(self, x, y):
        return self.a[0] * np.asarray(x, float) + self.a[1] * np.asarray(y, float) + self.b


def es1_datum(x, y):
    """Boundary expression x(y - x^2 + 1) for the parabolic-domain example."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return x * (y - x * x + 1.0)


def es1_surface(x, y):
    """The kinked saddle: 2xy above the x-axis, 0 on and below it."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return np.where(y > 0.0, 2.0 * x * y, 0.0)


def es2_surface(x, y):
    """The antisymmetric saddle -2xy + y|y| (its own boundary expression)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return -2.0 * x * y + y * np.abs(y)


DATUM_NAMES = ("zero", "affine", "es1", "es2")


def named_datum(kind: str, a=None, b=0.0):
    """Return the boundary expression for a named datum kind."""
    if kind == "zero":
        return zero
    if kind == "affine":
        if a is None:
            raise ValueError("affine datum needs slope 'a'")
        return Affine((float(a[0]), float(a[1])), float(b))
    if kind == "es1":
        return es1_datum
    if kind == "es2":
        return es2_surface
    raise ValueError(f"unknown datum kind {kind!r}; known: {DATUM_NAMES}")


def exact_surface_for(kind: str, a=None, b=0.0):
    """Exact minimizer surface for data whose minimizer is known in closed
    form (affine on any domain; es1 on the parabolic domain; es2 anywhere
    under its own trace).  Returns None when no closed form is available."""
    if kind == "zero":
        return None
    if kind == "affine":
        return Affine((float(a[0]), float(a[1])), float(b))
    if kind == "es1":
        return es1_surface
    if kind == "es2":
        return es2_surface
    return None
