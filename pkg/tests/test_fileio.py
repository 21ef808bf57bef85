import os

import numpy as np
import pytest

from harea import DomainSpec, ScalarField, VectorField, rasterize
from harea.fileio import (
    FormatError,
    read_field,
    read_vector_field,
    write_field,
    write_pgm,
    write_vector_field,
)


@pytest.fixture()
def grid():
    return rasterize(DomainSpec.disk((0.0, 0.0), 1.0), 0.25)


def random_field(grid, rng):
    v = np.zeros((grid.nx, grid.ny))
    v[grid.interior_mask] = rng.standard_normal(grid.interior_count)
    return ScalarField(grid, v)


def test_roundtrip_100_random_fields(grid, tmp_path):
    rng = np.random.default_rng(42)
    path = str(tmp_path / "f.csv")
    for _ in range(100):
        u = random_field(grid, rng)
        write_field(u, path)
        back = read_field(path)
        assert np.array_equal(back.values, u.values)  # bit-exact
        assert back.grid.same_lattice(grid)
        assert np.array_equal(back.grid.interior_mask, grid.interior_mask)


def test_roundtrip_extreme_values(grid, tmp_path):
    v = np.zeros((grid.nx, grid.ny))
    cells = np.argwhere(grid.interior_mask)
    v[grid.interior_mask] = 1.0
    v[tuple(cells[0])] = 1e-300
    v[tuple(cells[1])] = -1.2345678901234567e300
    v[tuple(cells[2])] = np.nextafter(0.5, 1.0)
    u = ScalarField(grid, v)
    path = str(tmp_path / "f.csv")
    write_field(u, path)
    assert np.array_equal(read_field(path).values, u.values)


def test_single_cell_field_single_row(tmp_path):
    from harea import Grid

    grid = Grid(h=1.0, origin=np.zeros(2), nx=1, ny=1,
                interior_mask=np.ones((1, 1), dtype=bool))
    u = ScalarField(grid, np.full((1, 1), 3.25))
    path = str(tmp_path / "one.csv")
    write_field(u, path)
    with open(path) as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    assert len(lines) == 3  # metadata, header, one data row
    assert lines[1] == "x,y,value"


def test_missing_header_rejected(tmp_path):
    path = str(tmp_path / "bad.csv")
    with open(path, "w") as f:
        f.write("x,y,value\n0.5,0.5,1.0\n")
    with pytest.raises(FormatError, match="header"):
        read_field(path)


def test_malformed_row_rejected(grid, tmp_path):
    path = str(tmp_path / "f.csv")
    write_field(random_field(grid, np.random.default_rng(0)), path)
    with open(path) as f:
        text = f.read()
    with open(path, "w") as f:
        f.write(text + "not,enough\n")
    with pytest.raises(FormatError, match="3 comma-separated"):
        read_field(path)


def test_grid_mismatch_described(grid, tmp_path):
    path = str(tmp_path / "f.csv")
    write_field(random_field(grid, np.random.default_rng(0)), path)
    other = rasterize(DomainSpec.disk((0.0, 0.0), 1.0), 0.2)
    with pytest.raises(FormatError, match="does not match"):
        read_field(path, grid=other)


def test_vector_roundtrip(grid, tmp_path):
    rng = np.random.default_rng(7)
    v = np.zeros((grid.nx, grid.ny, 2))
    v[grid.interior_mask] = rng.standard_normal((grid.interior_count, 2))
    p = VectorField(grid, v)
    path = str(tmp_path / "p.csv")
    write_vector_field(p, path)
    back = read_vector_field(path, grid)
    assert np.array_equal(back.values, p.values)


def test_pgm_format(grid, tmp_path):
    path = str(tmp_path / "img.pgm")
    X, _ = grid.cell_centers()
    write_pgm(X, path, grid.interior_mask)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "P2"
    assert lines[1] == f"{grid.nx} {grid.ny}"
    assert lines[2] == "255"
    pix = np.array([int(t) for row in lines[3:] for t in row.split()])
    assert pix.min() >= 0 and pix.max() == 255
    assert len(pix) == grid.nx * grid.ny


def test_pgm_constant_input(grid, tmp_path):
    path = str(tmp_path / "flat.pgm")
    write_pgm(np.ones((grid.nx, grid.ny)), path, grid.interior_mask)
    with open(path) as f:
        lines = f.read().splitlines()
    pix = np.array([int(t) for row in lines[3:] for t in row.split()]).reshape(
        -1, grid.nx
    )
    # flat data renders as full white inside, black outside
    assert set(pix.ravel()) <= {0, 255}


def test_writes_are_atomic_no_temp_left(grid, tmp_path):
    path = str(tmp_path / "f.csv")
    for seed in range(3):
        write_field(random_field(grid, np.random.default_rng(seed)), path)
    leftovers = [n for n in os.listdir(tmp_path) if n != "f.csv"]
    assert leftovers == []
