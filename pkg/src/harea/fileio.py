"""Plain-text artifact formats: CSV fields, PGM images, JSON reports.

Every format is readable without libraries: fields are ``x,y,value`` CSV with
a metadata comment carrying the lattice, images are ASCII PGM, reports are
JSON.  Values are serialized with 17 significant digits so a write/read cycle
reproduces each double bit-exactly.  All writers go through a temp file and
an atomic rename, so a crash never leaves a half-written artifact.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .fields import ScalarField, VectorField
from .geometry import Grid

__all__ = [
    "FormatError",
    "read_field",
    "write_field",
    "read_vector_field",
    "write_vector_field",
    "write_pgm",
    "write_json",
    "read_json",
]

_MAGIC = "# harea field v1"


class FormatError(ValueError):
    """Raised when an artifact file does not match its declared format."""


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def write_field(u: ScalarField, path: str) -> None:
    """One CSV row per interior cell, row-major; lattice in a comment line."""
    g = u.grid
    lines = [
        f"{_MAGIC} h={_g17(g.h)} ox={_g17(g.origin[0])} oy={_g17(g.origin[1])}"
        f" nx={g.nx} ny={g.ny}",
        "x,y,value",
    ]
    X, Y = g.cell_centers()
    m = g.interior_mask
    for x, y, v in zip(X[m], Y[m], u.values[m]):
        lines.append(f"{_g17(x)},{_g17(y)},{_g17(v)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_field(path: str, grid: Grid | None = None) -> ScalarField:
    """Inverse of :func:`write_field`.

    The grid is rebuilt from the metadata line and the listed cells; values
    off the listed cells are zero, as in every solver-produced field.  When
    ``grid`` is supplied the file must describe that exact lattice and mask.
    """
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith(_MAGIC):
        raise FormatError(f"{path}: missing field header line '{_MAGIC} ...'")
    meta = {}
    for tok in lines[0][len(_MAGIC) :].split():
        k, _, v = tok.partition("=")
        meta[k] = v
    try:
        h = float(meta["h"])
        origin = (float(meta["ox"]), float(meta["oy"]))
        nx, ny = int(meta["nx"]), int(meta["ny"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad metadata line: {exc}") from exc
    if len(lines) < 2 or lines[1].strip() != "x,y,value":
        raise FormatError(f"{path}: missing 'x,y,value' header row")

    mask = np.zeros((nx, ny), dtype=bool)
    vals = np.zeros((nx, ny))
    for ln, row in enumerate(lines[2:], start=3):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 3:
            raise FormatError(f"{path}:{ln}: expected 3 comma-separated values")
        x, y, v = (float(p) for p in parts)
        i = int(round((x - origin[0]) / h - 0.5))
        j = int(round((y - origin[1]) / h - 0.5))
        if not (0 <= i < nx and 0 <= j < ny):
            raise FormatError(f"{path}:{ln}: point ({x}, {y}) outside the declared lattice")
        mask[i, j] = True
        vals[i, j] = v

    g = Grid(h=h, origin=np.asarray(origin), nx=nx, ny=ny, interior_mask=mask)
    if grid is not None:
        if not (
            grid.nx == nx
            and grid.ny == ny
            and abs(grid.h - h) <= 1e-15 * max(h, 1.0)
            and np.allclose(grid.origin, origin, atol=1e-12)
            and np.array_equal(grid.interior_mask, mask)
        ):
            raise FormatError(
                f"{path}: field lattice (h={h}, {nx}x{ny} at {origin}) does not match "
                f"the expected grid (h={grid.h}, {grid.nx}x{grid.ny} at "
                f"{tuple(grid.origin)})"
            )
        g = grid
    return ScalarField(g, vals)


def write_vector_field(p: VectorField, path: str) -> None:
    """Like :func:`write_field` with two value columns, ``x,y,px,py``."""
    g = p.grid
    lines = [
        f"{_MAGIC} h={_g17(g.h)} ox={_g17(g.origin[0])} oy={_g17(g.origin[1])}"
        f" nx={g.nx} ny={g.ny}",
        "x,y,px,py",
    ]
    X, Y = g.cell_centers()
    m = g.interior_mask
    for x, y, (px, py) in zip(X[m], Y[m], p.values[m]):
        lines.append(f"{_g17(x)},{_g17(y)},{_g17(px)},{_g17(py)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_vector_field(path: str, grid: Grid | None = None) -> VectorField:
    """Inverse of :func:`write_vector_field`; same lattice rules as
    :func:`read_field`."""
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith(_MAGIC):
        raise FormatError(f"{path}: missing field header line '{_MAGIC} ...'")
    meta = {}
    for tok in lines[0][len(_MAGIC) :].split():
        k, _, v = tok.partition("=")
        meta[k] = v
    try:
        h = float(meta["h"])
        origin = (float(meta["ox"]), float(meta["oy"]))
        nx, ny = int(meta["nx"]), int(meta["ny"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad metadata line: {exc}") from exc
    if len(lines) < 2 or lines[1].strip() != "x,y,px,py":
        raise FormatError(f"{path}: missing 'x,y,px,py' header row")
    mask = np.zeros((nx, ny), dtype=bool)
    vals = np.zeros((nx, ny, 2))
    for ln, row in enumerate(lines[2:], start=3):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 4:
            raise FormatError(f"{path}:{ln}: expected 4 comma-separated values")
        x, y, px, py = (float(p) for p in parts)
        i = int(round((x - origin[0]) / h - 0.5))
        j = int(round((y - origin[1]) / h - 0.5))
        if not (0 <= i < nx and 0 <= j < ny):
            raise FormatError(f"{path}:{ln}: point ({x}, {y}) outside the declared lattice")
        mask[i, j] = True
        vals[i, j] = (px, py)
    g = Grid(h=h, origin=np.asarray(origin), nx=nx, ny=ny, interior_mask=mask)
    if grid is not None:
        if not (
            grid.nx == nx
            and grid.ny == ny
            and abs(grid.h - h) <= 1e-15 * max(h, 1.0)
            and np.allclose(grid.origin, origin, atol=1e-12)
            and np.array_equal(grid.interior_mask, mask)
        ):
            raise FormatError(f"{path}: vector field lattice does not match the expected grid")
        g = grid
    return VectorField(g, vals)


def write_pgm(values: np.ndarray, path: str, mask: np.ndarray | None = None) -> None:
    """ASCII PGM (P2) of a 2d array, min-max scaled to 0..255.

    The array's first axis is x, so rows of the image are written north-up.
    Cells outside ``mask`` render as 0.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 2:
        raise FormatError("image data must be a 2d array")
    sel = np.ones_like(a, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    pix = np.zeros(a.shape, dtype=int)
    if sel.any():
        lo = float(np.min(a[sel]))
        hi = float(np.max(a[sel]))
        span = hi - lo
        if span > 0:
            pix[sel] = np.clip(np.round(255.0 * (a[sel] - lo) / span), 0, 255).astype(int)
        else:
            pix[sel] = 255
    nx, ny = a.shape
    lines = ["P2", f"{nx} {ny}", "255"]
    for j in range(ny - 1, -1, -1):
        lines.append(" ".join(str(int(p)) for p in pix[:, j]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(obj: dict, path: str) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)
