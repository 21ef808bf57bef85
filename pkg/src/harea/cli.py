"""Command-line front end.

Subcommands
-----------
solve      minimize the penalized area for a configured domain and datum
energy     evaluate the penalized energy of a stored field
bsc        certify the smallest slope constant of a boundary datum
barriers   write the lower/upper envelope fields implied by the certificate
verify     run named property checks and write their reports
reproduce  regenerate a worked example and compare against golden metrics
refine     solve across grid refinements and tabulate the errors

Exit codes: 0 success / all checks passed; 1 a check failed, the solver did
not converge, or a slope certificate was refused; 2 usage or config errors.
Heavy numeric imports happen after the HAREA_THREADS cap is applied, so the
cap reaches the underlying BLAS.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

__all__ = ["dispatch", "main", "UsageError"]

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


class UsageError(Exception):
    """Configuration or invocation problem; maps to exit code 2."""


def _apply_thread_cap() -> None:
    raw = os.environ.get("HAREA_THREADS", "").strip()
    if not raw:
        return
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"HAREA_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise UsageError("HAREA_THREADS must be >= 0 (0 = automatic)")
    if n == 0:
        return
    for var in _THREAD_VARS:
        os.environ.setdefault(var, str(n))


# ---------------------------------------------------------------------------
# config parsing


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise UsageError(f"{where}: unknown keys {unknown}")


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        )
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    _reject_unknown(cfg, {"domain", "h", "datum", "solver", "out", "levels", "samples"}, path)
    return cfg


def _build_domain(block):
    from .geometry import DomainSpec

    if not isinstance(block, dict) or "kind" not in block:
        raise UsageError("domain block must be an object with a 'kind'")
    kind = block["kind"]
    if kind == "disk":
        _reject_unknown(block, {"kind", "center", "radius"}, "domain")
        return DomainSpec.disk(tuple(block.get("center", (0.0, 0.0))), float(block.get("radius", 1.0)))
    if kind == "polygon":
        _reject_unknown(block, {"kind", "vertices"}, "domain")
        if "vertices" not in block:
            raise UsageError("polygon domain needs 'vertices'")
        return DomainSpec.polygon([tuple(v) for v in block["vertices"]])
    if kind == "parabolic":
        _reject_unknown(block, {"kind"}, "domain")
        return DomainSpec.parabolic()
    raise UsageError(f"unknown domain kind {kind!r} (disk, polygon, parabolic)")


def _check_datum_block(block) -> None:
    if not isinstance(block, dict) or "kind" not in block:
        raise UsageError("datum block must be an object with a 'kind'")
    kind = block["kind"]
    if kind == "affine":
        _reject_unknown(block, {"kind", "a", "b"}, "datum")
        if "a" not in block:
            raise UsageError("affine datum needs slope 'a': [ax, ay]")
    elif kind in ("zero", "es1", "es2"):
        _reject_unknown(block, {"kind"}, "datum")
    elif kind == "samples":
        _reject_unknown(block, {"kind", "path"}, "datum")
        if "path" not in block:
            raise UsageError("samples datum needs 'path'")
    else:
        raise UsageError(
            f"unknown datum kind {kind!r} (zero, affine, es1, es2, samples)"
        )


def _build_solver(block, args):
    from .solver import SolverConfig

    block = dict(block or {})
    _reject_unknown(
        block,
        {"mode", "energy_mode", "max_iters", "tol", "step_sigma", "step_tau", "theta", "seed"},
        "solver",
    )
    if getattr(args, "mode", None):
        block["mode"] = args.mode
    if getattr(args, "energy", None):
        block["energy_mode"] = args.energy
    try:
        return SolverConfig(**block)
    except Exception as exc:
        raise UsageError(f"solver block: {exc}")


def _read_samples_file(path: str):
    import numpy as np

    try:
        with open(path) as f:
            rows = f.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read samples {path}: {exc.strerror or exc}")
    pts, vals = [], []
    for ln, row in enumerate(rows, start=1):
        s = row.strip()
        if not s or s.startswith("#") or s.lower() == "x,y,value":
            continue
        parts = s.split(",")
        if len(parts) != 3:
            raise UsageError(f"{path}:{ln}: expected 'x,y,value'")
        try:
            x, y, v = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"{path}:{ln}: non-numeric entry")
        pts.append((x, y))
        vals.append(v)
    if len(pts) < 3:
        raise UsageError(f"{path}: need at least 3 samples")
    return np.asarray(pts), np.asarray(vals)


def _datum_on_faces(grid, block):
    import numpy as np

    from .geometry import BoundaryDatum, boundary_faces, sample_datum
    from .surfaces import named_datum

    faces = boundary_faces(grid)
    if block["kind"] == "samples":
        pts, vals = _read_samples_file(block["path"])
        mid = faces.midpoint
        d2 = (mid[:, 0, None] - pts[None, :, 0]) ** 2 + (mid[:, 1, None] - pts[None, :, 1]) ** 2
        return BoundaryDatum(faces, vals[np.argmin(d2, axis=1)])
    expr = named_datum(block["kind"], block.get("a"), block.get("b", 0.0))
    return sample_datum(faces, expr, provenance=block["kind"])


def _bsc_samples(domain, block, n: int):
    from .bsc import boundary_samples
    from .surfaces import named_datum

    if block["kind"] == "samples":
        pts, vals = _read_samples_file(block["path"])
        return [((float(p[0]), float(p[1])), float(v)) for p, v in zip(pts, vals)]
    expr = named_datum(block["kind"], block.get("a"), block.get("b", 0.0))
    return boundary_samples(domain, expr, n)


def _resolve(args, need):
    """Load + override the run config; returns (cfg_dict, domain, h, out)."""
    if not getattr(args, "config", None):
        raise UsageError("this subcommand requires -c/--config")
    cfg = _load_config(args.config)
    for key in need:
        if key not in cfg:
            raise UsageError(f"{args.config}: missing required key '{key}'")
    domain = _build_domain(cfg["domain"]) if "domain" in cfg else None
    h = float(args.h) if args.h is not None else float(cfg.get("h", 0.0))
    if "datum" in cfg:
        _check_datum_block(cfg["datum"])
    out = args.out or cfg.get("out", "results")
    return cfg, domain, h, out


def _rasterized(domain, h):
    from .geometry import DomainError, rasterize

    if h <= 0:
        raise UsageError(f"grid spacing h must be positive, got {h}")
    try:
        return rasterize(domain, h)
    except DomainError as exc:
        raise UsageError(str(exc))


def _echo(cfg, h, solver=None) -> dict:
    e = {"domain": cfg.get("domain"), "h": h, "datum": cfg.get("datum")}
    if solver is not None:
        e["solver"] = solver.to_json()
    return e


# ---------------------------------------------------------------------------
# subcommands


def _with_tuned_steps(scfg, grid):
    """Fill omitted steps with the fast asymmetric pair.

    The library's symmetric default is a safe but slow regime; runs launched
    from a config deserve the tuned steps unless the config pins its own.
    """
    if scfg.step_sigma is not None or scfg.step_tau is not None:
        return scfg
    from dataclasses import replace

    from .solver import balanced_steps

    s, t = balanced_steps(grid, grid.h / 2.0)
    return replace(scfg, step_sigma=s, step_tau=t)


def _cmd_solve(args) -> int:
    from .fileio import write_field, write_json, write_pgm, write_vector_field

    cfg, domain, h, out = _resolve(args, need=("domain", "h", "datum"))
    grid = _rasterized(domain, h)
    scfg = _with_tuned_steps(_build_solver(cfg.get("solver"), args), grid)
    datum = _datum_on_faces(grid, cfg["datum"])
    from .solver import solve

    rep = solve(grid, datum, scfg)
    os.makedirs(out, exist_ok=True)
    write_field(rep.u, os.path.join(out, "solution.csv"))
    write_vector_field(rep.dual, os.path.join(out, "dual.csv"))
    write_pgm(rep.u.values, os.path.join(out, "solution.pgm"), grid.interior_mask)
    write_json(
        {"run": _echo(cfg, h, scfg), "result": rep.to_json()},
        os.path.join(out, "report.json"),
    )
    print(
        f"solved {grid.interior_count} cells: energy {rep.energy.total:.9g}, "
        f"{rep.iterations} iterations, converged={rep.converged}"
    )
    print(f"wrote {out}/solution.csv, {out}/dual.csv, {out}/solution.pgm, {out}/report.json")
    return 0 if rep.converged else 1


def _cmd_energy(args) -> int:
    from .energy import penalized_energy
    from .fileio import read_field, write_json

    cfg, domain, h, out = _resolve(args, need=("domain", "h", "datum"))
    scfg = _build_solver(cfg.get("solver"), args)
    grid = _rasterized(domain, h)
    datum = _datum_on_faces(grid, cfg["datum"])
    path = args.field or os.path.join(out, "solution.csv")
    u = read_field(path, grid)
    br = penalized_energy(u, datum, scfg.energy_mode)
    os.makedirs(out, exist_ok=True)
    write_json({"run": _echo(cfg, h, scfg), "energy": br.to_json()}, os.path.join(out, "energy.json"))
    print(f"area {br.interior:.9g} + penalty {br.penalty:.9g} = {br.total:.9g}")
    print(f"wrote {out}/energy.json")
    return 0


def _cmd_bsc(args) -> int:
    from .bsc import BscViolation, minimal_Q
    from .fileio import write_json

    cfg, domain, h, out = _resolve(args, need=("domain", "datum"))
    n = int(cfg.get("samples", 200))
    samples = _bsc_samples(domain, cfg["datum"], n)
    grid = _rasterized(domain, h) if h > 0 else None
    os.makedirs(out, exist_ok=True)
    try:
        rep = minimal_Q(samples, grid=grid)
    except BscViolation as exc:
        write_json(
            {
                "run": _echo(cfg, h),
                "feasible": False,
                "witness": list(exc.witness),
                "slack": exc.slack,
            },
            os.path.join(out, "bsc.json"),
        )
        print(f"slope condition violated at {exc.witness} (slack {exc.slack:.6g})")
        print(f"wrote {out}/bsc.json")
        return 1
    write_json({"run": _echo(cfg, h), **rep.to_json()}, os.path.join(out, "bsc.json"))
    print(f"certified: Q_min {rep.Q_min:.9g}, gradient bound K {rep.K:.9g}")
    print(f"wrote {out}/bsc.json")
    return 0


def _cmd_barriers(args) -> int:
    from .bsc import BscViolation, barriers, minimal_Q
    from .fileio import write_field, write_json

    cfg, domain, h, out = _resolve(args, need=("domain", "h", "datum"))
    n = int(cfg.get("samples", 200))
    samples = _bsc_samples(domain, cfg["datum"], n)
    grid = _rasterized(domain, h)
    os.makedirs(out, exist_ok=True)
    try:
        rep = minimal_Q(samples, grid=grid)
    except BscViolation as exc:
        print(f"slope condition violated at {exc.witness}; no barriers exist")
        return 1
    f, g = barriers(samples, rep, grid)
    write_field(f, os.path.join(out, "barrier_lower.csv"))
    write_field(g, os.path.join(out, "barrier_upper.csv"))
    write_json({"run": _echo(cfg, h), **rep.to_json()}, os.path.join(out, "bsc.json"))
    print(f"wrote {out}/barrier_lower.csv, {out}/barrier_upper.csv, {out}/bsc.json")
    return 0


def _cmd_verify(args) -> int:
    from .checks import CheckId, run_suite
    from .fileio import write_json

    if args.check:
        try:
            ids = [CheckId(c) for c in args.check]
        except ValueError:
            valid = ", ".join(c.value for c in CheckId)
            raise UsageError(f"unknown check id (valid: {valid})")
    else:
        ids = None
    reports, summary = run_suite(ids)
    out = args.out or "results"
    os.makedirs(out, exist_ok=True)
    write_json(
        {"reports": [r.to_json() for r in reports], "summary": summary},
        os.path.join(out, "verify.json"),
    )
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.check_id.value:24s} {r.runtime:7.1f}s")
        if not r.passed:
            for k, thr in r.thresholds.items():
                flag = "" if r.metrics[k] <= thr else "  <-- exceeded"
                print(f"        {k} = {r.metrics[k]:.6g} (threshold {thr:.6g}){flag}")
    print(
        f"{summary['passed']}/{summary['total']} checks passed "
        f"in {summary['runtime']:.1f}s; wrote {out}/verify.json"
    )
    return 0 if summary["failed"] == 0 else 1


def _reproduce_metrics(example: str):
    """Solve the named worked example and derive its comparison metrics."""
    import numpy as np

    from .checks import _cfg_for, _erode
    from .energy import char_set, euler_residual
    from .fields import ScalarField
    from .geometry import DomainSpec, boundary_faces, rasterize, sample_datum
    from .solver import solve
    from .surfaces import es1_datum, es1_surface, es2_surface

    h = 1.0 / 64.0
    if example == "es1":
        grid = rasterize(DomainSpec.parabolic(), h)
        expr, exact = es1_datum, es1_surface
    else:
        grid = rasterize(
            DomainSpec.polygon([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]), h
        )
        expr, exact = es2_surface, es2_surface
    datum = sample_datum(boundary_faces(grid), expr)
    rep = solve(grid, datum, _cfg_for(grid, None, 30000, 1e-9))
    ref = ScalarField.from_function(grid, exact)
    m = grid.interior_mask
    rel_l1 = float(
        np.sum(np.abs(rep.u.values - ref.values)[m]) / np.sum(np.abs(ref.values)[m])
    )
    cs = char_set(rep.u) & _erode(m, 4)
    res = euler_residual(rep.u)
    core = _erode(m, 2)
    metrics = {
        "energy_total": float(rep.energy.total),
        "rel_l1": rel_l1,
        "sup_abs": float(np.max(np.abs(rep.u.values[m]))),
        "char_cells": float(int(np.sum(cs))),
        "residual_core_max": float(np.max(np.abs(res.values[core]))),
    }
    return grid, rep, cs, res, metrics


def _cmd_reproduce(args) -> int:
    from importlib import resources

    from .fileio import write_field, write_json, write_pgm

    example = args.example
    ref = resources.files("harea.golden").joinpath(f"{example}.json")
    golden = json.loads(ref.read_text())
    grid, rep, cs, res, metrics = _reproduce_metrics(example)
    out = args.out or "results"
    os.makedirs(out, exist_ok=True)
    write_field(rep.u, os.path.join(out, "solution.csv"))
    write_field(res, os.path.join(out, "residual.csv"))
    write_pgm(cs.astype(float), os.path.join(out, "char.pgm"), grid.interior_mask)
    ok = True
    rows = []
    for k, want in golden["metrics"].items():
        tol = golden["tolerances"][k]
        got = metrics[k]
        good = abs(got - want) <= tol
        ok = ok and good
        rows.append((k, got, want, tol, good))
    write_json(
        {
            "example": example,
            "metrics": metrics,
            "golden": golden["metrics"],
            "tolerances": golden["tolerances"],
            "match": ok,
        },
        os.path.join(out, "report.json"),
    )
    for k, got, want, tol, good in rows:
        mark = "ok " if good else "MISMATCH"
        print(f"{mark} {k:18s} {got:.9g} vs golden {want:.9g} (tol {tol:g})")
    print(f"wrote {out}/solution.csv, {out}/residual.csv, {out}/char.pgm, {out}/report.json")
    return 0 if ok else 1


def _cmd_refine(args) -> int:
    from .fileio import write_json
    from .solver import refine_study
    from .surfaces import exact_surface_for, named_datum

    cfg, domain, h, out = _resolve(args, need=("domain", "h", "datum"))
    block = cfg["datum"]
    if block["kind"] == "samples":
        raise UsageError("refine needs a closed-form datum (zero, affine, es1, es2)")
    levels = int(cfg.get("levels", 3))
    if levels < 2:
        raise UsageError("refine needs at least 2 levels")
    scfg = _build_solver(cfg.get("solver"), args) if cfg.get("solver") else None
    expr = named_datum(block["kind"], block.get("a"), block.get("b", 0.0))
    exact = exact_surface_for(block["kind"], block.get("a"), block.get("b", 0.0))
    norm = "l1" if block["kind"] in ("es1", "es2") else "sup"
    hs = [h / 2**k for k in range(levels)]
    rows, monotone = refine_study(domain, expr, hs, scfg, exact=exact, error_norm=norm)
    os.makedirs(out, exist_ok=True)
    lines = ["h,error,iterations,converged"]
    print(f"{'h':>12s} {'error':>14s} {'iters':>8s}  converged")
    for r in rows:
        err = "" if r.error is None else format(r.error, ".17g")
        lines.append(f"{format(r.h, '.17g')},{err},{r.iterations},{int(r.converged)}")
        err_disp = "-" if r.error is None else f"{r.error:.6g}"
        print(f"{r.h:12.6g} {err_disp:>14s} {r.iterations:8d}  {r.converged}")
    from .fileio import _atomic_write

    _atomic_write(os.path.join(out, "refine.csv"), "\n".join(lines) + "\n")
    write_json(
        {"run": _echo(cfg, h), "monotone": monotone, "norm": norm},
        os.path.join(out, "refine.json"),
    )
    print(f"monotone decrease: {monotone}")
    print(f"wrote {out}/refine.csv, {out}/refine.json")
    return 0


# ---------------------------------------------------------------------------
# wiring


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="harea",
        description="Area-minimizing t-graphs: solver, certificates, and property checks.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("-c", "--config", help="JSON run config")
        sp.add_argument("--out", help="output directory (default: config 'out' or results/)")
        sp.add_argument("--h", type=float, help="grid spacing override")
        sp.add_argument("--mode", choices=("penalized", "constrained"), help="solver mode override")
        sp.add_argument("--energy", choices=("iso", "aniso"), help="energy mode override")

    sp = sub.add_parser("solve", help="minimize the penalized area functional")
    common(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("energy", help="evaluate the energy of a stored field")
    common(sp)
    sp.add_argument("field", nargs="?", help="field CSV (default: <out>/solution.csv)")
    sp.set_defaults(func=_cmd_energy)

    sp = sub.add_parser("bsc", help="certify the minimal slope constant")
    common(sp)
    sp.set_defaults(func=_cmd_bsc)

    sp = sub.add_parser("barriers", help="write certified lower/upper envelopes")
    common(sp)
    sp.set_defaults(func=_cmd_barriers)

    sp = sub.add_parser("verify", help="run the named property checks")
    sp.add_argument("--check", action="append", help="check id (repeatable; default: all)")
    sp.add_argument("--out", help="output directory for verify.json")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("reproduce", help="regenerate a worked example against goldens")
    sp.add_argument("example", choices=("es1", "es2"))
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=_cmd_reproduce)

    sp = sub.add_parser("refine", help="error table across grid refinements")
    common(sp)
    sp.set_defaults(func=_cmd_refine)
    return p


def dispatch(argv=None) -> int:
    """Parse argv, run the subcommand, and return the process exit code."""
    try:
        _apply_thread_cap()
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    from .bsc import BscError, BscViolation
    from .energy import EnergyError
    from .fileio import FormatError
    from .geometry import DomainError
    from .solver import SolverError

    try:
        return int(args.func(args))
    except (UsageError, FormatError, DomainError, BscError, EnergyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, BscViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
