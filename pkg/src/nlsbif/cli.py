"""Command-line front end: ``nlsbif {scatter,spectrum,branch,validate,coalesce}``.

Every command writes plain data files into ``--out`` (CSV with a ``.meta.json``
sidecar, or JSON with a ``meta`` block) so runs can be diffed byte for byte.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .branch import Controls, coalescence_scan, threshold_branch, trace_from_point
from .config import Tolerances, override_tolerances, tolerances
from .errors import ConfigError, DeltaNotEvaluable, DepthExceeded, IntegrationFailure, NlsbifError
from .potential import from_descriptor
from .scattering import CSV_HEADER, Target, scattering_data
from .spectrum import (Box, Parity, SpectralClass, detect_threshold, locate_complex_zeros,
                       mode_and_nondegeneracy, scan_axis)

BRANCH_HEADER = ["branch_id", "seed_class", "k_star_im", "E", "eps", "N", "H1", "x_L", "x_R",
                 "sign_L", "sign_R", "residual"]
AXIS_CUT = 2e-3
SEED_TARGETS = (Target.W, Target.S_MINUS)


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def _floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} colon-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad number in {what} {text!r}") from exc


def _range(text: str, what: str) -> tuple[float, float, int]:
    a, b, n = _floats(text, 3, what)
    if not (n >= 2 and n == int(n)) or not a < b:
        raise ConfigError(f"{what} must be a:b:n with a < b and integer n >= 2")
    return a, b, int(n)


def parse_k_grid(text: str) -> np.ndarray:
    """``real:a:b:n``, ``axis:a:b:n`` (k = i kappa) or ``box:re0:re1:im0:im1:nre:nim``."""
    kind, _, rest = text.partition(":")
    if kind == "real":
        a, b, n = _range(rest, "--k-grid real")
        return np.linspace(a, b, n).astype(complex)
    if kind == "axis":
        a, b, n = _range(rest, "--k-grid axis")
        return 1j * np.linspace(a, b, n)
    if kind == "box":
        r0, r1, i0, i1, nr, ni = _floats(rest, 6, "--k-grid box")
        if nr < 1 or ni < 1 or nr != int(nr) or ni != int(ni):
            raise ConfigError("--k-grid box needs integer nre, nim >= 1")
        re, im = np.meshgrid(np.linspace(r0, r1, int(nr)), np.linspace(i0, i1, int(ni)), indexing="ij")
        return (re + 1j * im).ravel()
    raise ConfigError(f"--k-grid must start with real:, axis: or box:, got {text!r}")


def parse_box(text: str) -> Box:
    r0, r1, i0, i1 = _floats(text, 4, "--box")
    try:
        return Box(r0, r1, i0, i1)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_tolerances(items: list[str] | None) -> dict:
    """``NAME=VALUE`` pairs checked against :class:`Tolerances`."""
    names = {f.name for f in dataclasses.fields(Tolerances)}
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or name not in names:
            raise ConfigError(f"--tol expects NAME=VALUE with NAME in {sorted(names)}, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value {value!r}") from exc
    try:
        dataclasses.replace(tolerances(), **out)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return out


def _out_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


def _jobs(n: int | None) -> int:
    return max(1, n if n else (os.cpu_count() or 1))


def _pmap(fn, items: list, jobs: int) -> list:
    """Order-preserving map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# workers (module level so they pickle)
# ---------------------------------------------------------------------------

def _scatter_chunk(job):
    spec, tol, ks = job
    with override_tolerances(**tol):
        return [scattering_data(spec, k).row() for k in ks]


def _spectrum_job(job):
    spec, tol, kind, args = job
    with override_tolerances(**tol):
        if kind == "axis":
            target, lo, hi, n = args
            pts = scan_axis(spec, Target(target), lo, hi, n)
            return [mode_and_nondegeneracy(spec, p) for p in pts], None
        target, box = args
        try:
            return locate_complex_zeros(spec, Target(target), box), None
        except DepthExceeded as exc:
            return list(exc.partial), str(exc)


def _branch_job(job):
    spec, tol, point, controls = job
    with override_tolerances(**tol):
        return trace_from_point(spec, point, controls)


def _axis_pieces(lo: float, hi: float, n: int) -> list[tuple[float, float, int]]:
    """Split ``[lo, hi]`` around the excluded neighbourhood of kappa = 0."""
    pieces = []
    width = hi - lo
    if lo < -AXIS_CUT:
        a, b = lo, min(hi, -AXIS_CUT)
        pieces.append((a, b, max(2, round(n * (b - a) / width))))
    if hi > AXIS_CUT:
        a, b = max(lo, AXIS_CUT), hi
        pieces.append((a, b, max(2, round(n * (b - a) / width))))
    return pieces


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_scatter(args, spec, tol) -> int:
    ks = parse_k_grid(args.k_grid)
    jobs = _jobs(args.jobs)
    chunks = [c for c in np.array_split(ks, jobs * 4 if jobs > 1 else 1) if len(c)]
    rows = [r for part in _pmap(_scatter_chunk, [(spec, tol, list(c)) for c in chunks], jobs)
            for r in part]
    path = io.write_csv(args.out / "scatter.csv", CSV_HEADER, rows,
                        io.meta_block(spec, command="scatter", k_grid=args.k_grid))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def spectrum_points(spec, tol, kappa_range, box, jobs):
    """Axis zeros of w and s_-, a threshold point if present, complex w zeros in ``box``."""
    lo, hi, n = kappa_range
    jobs_list = [(spec, tol, "axis", (t.value, a, b, m))
                 for t in SEED_TARGETS for a, b, m in _axis_pieces(lo, hi, n)]
    if box is not None:
        jobs_list.append((spec, tol, "box", (Target.W.value, box)))
    points, warnings = [], []
    for job, (pts, warn) in zip(jobs_list, _pmap(_spectrum_job, jobs_list, jobs)):
        if job[2] == "box":
            # the complex search may rediscover zeros the axis scan already holds
            seen = [p.k_star for p in points]
            pts = [p for p in pts if all(abs(p.k_star - k) > 1e-6 * (1 + abs(k)) for k in seen)]
        points.extend(pts)
        if warn:
            warnings.append(warn)
    thr = detect_threshold(spec)
    if thr is not None:
        points.append(thr)
    points.sort(key=lambda p: (p.target.value, p.k_star.imag, p.k_star.real))
    return points, warnings


def cmd_spectrum(args, spec, tol) -> int:
    box = parse_box(args.box) if args.box else None
    points, warnings = spectrum_points(spec, tol, _range(args.kappa_range, "--kappa-range"), box,
                                       _jobs(args.jobs))
    meta = io.meta_block(spec, command="spectrum", kappa_range=args.kappa_range, box=args.box,
                         warnings=warnings)
    path = io.write_json(args.out / "spectrum.json", {"meta": meta, "zeros": [p.as_json() for p in points]})
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {path} ({len(points)} zeros)")
    return 0


def _branch_rows(bid: int, seed_class: str, k_im: float, curve) -> list[list]:
    return [[bid, seed_class, k_im, p.E, p.eps, p.N, p.H1, p.x_L, p.x_R, p.sign_L, p.sign_R, res]
            for p, res in zip(curve.points, curve.global_residuals)]


def cmd_branch(args, spec, tol) -> int:
    controls = Controls(eps0=args.eps0, E_min=args.e_min, max_points=args.max_points)
    jobs = _jobs(args.jobs)
    seeds = []
    if args.kappa is not None:
        pts = scan_axis(spec, Target(args.target), args.kappa - 0.05, args.kappa + 0.05, 11)
        if not pts:
            raise ConfigError(f"no {args.target} zero near kappa = {args.kappa}")
        seeds = [min(pts, key=lambda p: abs(p.kappa - args.kappa))]
    elif not args.threshold or args.seed_class:
        pts, _ = spectrum_points(spec, tol, _range(args.kappa_range, "--kappa-range"), None, jobs)
        wanted = {c.value for c in SpectralClass} if args.seed_class in (None, "all") else {args.seed_class}
        seeds = [p for p in pts if p.cls.value in wanted and p.cls is not SpectralClass.THRESHOLD]
    curves = _pmap(_branch_job, [(spec, tol, p, controls) for p in seeds], jobs)
    labelled = [(p.cls.value, p.kappa, c) for p, c in zip(seeds, curves)]
    if args.threshold:
        if args.parity is None:
            raise ConfigError("--threshold needs --parity even|odd")
        with override_tolerances(**tol):
            labelled.append((SpectralClass.THRESHOLD.value, 0.0,
                             threshold_branch(spec, Parity(args.parity), controls)))
    rows, summary = [], []
    for bid, (cls, k_im, curve) in enumerate(labelled):
        rows.extend(_branch_rows(bid, cls, k_im, curve))
        term = curve.termination.value if curve.termination else None
        summary.append({"branch_id": bid, "seed_class": cls, "k_star_im": k_im, "points": len(curve.points),
                        "termination": term})
        print(f"branch {bid}: {cls} kappa={k_im:+.10g} points={len(curve.points)} termination={term}")
        if args.profiles:
            pdir = args.out / "profiles"
            pdir.mkdir(exist_ok=True)
            for i, p in enumerate(curve.points):
                doc = p.as_json(spec)
                doc["meta"] = io.meta_block(spec, branch_id=bid, index=i)
                io.write_json(pdir / f"branch{bid:03d}_{i:05d}.json", doc)
    # rows keep arclength order inside each branch; branches are already in id order
    path = io.write_csv(args.out / "branch.csv", BRANCH_HEADER, rows,
                        io.meta_block(spec, command="branch", controls=dataclasses.asdict(controls),
                                      branches=summary), sort=False)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_coalesce(args, spec, tol) -> int:
    a, b, n = _range(args.alpha_range, "--alpha-range")
    lo, hi, m = _range(args.kappa_range, "--kappa-range")
    if hi > -AXIS_CUT:
        raise ConfigError("--kappa-range for coalesce must lie in the lower half-plane (kappa < -0.002)")
    box = parse_box(args.box) if args.box else None
    base = args.descriptor

    def family(alpha):
        return from_descriptor({**base, "alpha": alpha})

    report = coalescence_scan(family, np.linspace(a, b, n), Target(args.target), (lo, hi), box, m)
    doc = {"meta": io.meta_block(spec, command="coalesce", alpha_range=args.alpha_range,
                                 kappa_range=args.kappa_range, target=args.target),
           **report.as_json()}
    path = io.write_json(args.out / "coalesce.json", doc)
    print(f"wrote {path}; bracket = {report.bracket}")
    return 0


def cmd_validate(args, tol) -> int:
    from .validate import run_checks

    only = args.only.split(",") if args.only else None
    try:
        checks = run_checks(only)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    for c in checks:
        print(c.row())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlsbif", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--potential", metavar="FILE", help="JSON or TOML potential descriptor")
    src.add_argument("--inline", metavar="JSON", help="potential descriptor given inline")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")

    p = sub.add_parser("scatter", parents=[common], help="w, s_-, s_+, t, r_- and r_+ on a k-grid")
    p.add_argument("--k-grid", required=True, help="real:a:b:n | axis:a:b:n | box:re0:re1:im0:im1:nre:nim")

    p = sub.add_parser("spectrum", parents=[common], help="classified zeros of w and s_-")
    p.add_argument("--kappa-range", default="-4:4:400", help="axis scan a:b:n (default -4:4:400)")
    p.add_argument("--box", help="also search complex zeros of w in re0:re1:im0:im1")

    p = sub.add_parser("branch", parents=[common], help="trace nonlinear bound-state branches")
    p.add_argument("--kappa-range", default="-4:4:400")
    p.add_argument("--seed-class", choices=["all"] + [c.value for c in SpectralClass if c.value != "ThresholdResonance"])
    p.add_argument("--kappa", type=float, help="seed from the axis zero nearest i*KAPPA instead of a scan")
    p.add_argument("--target", choices=[t.value for t in SEED_TARGETS], default=Target.W.value)
    p.add_argument("--eps0", type=float, default=1e-6)
    p.add_argument("--e-min", type=float, default=-25.0)
    p.add_argument("--max-points", type=int, default=2000)
    p.add_argument("--profiles", action="store_true", help="write one profile JSON per branch point")
    p.add_argument("--threshold", action="store_true", help="also trace the threshold branch")
    p.add_argument("--parity", choices=[q.value for q in Parity])

    p = sub.add_parser("coalesce", parents=[common], help="find where two axis zeros leave the axis")
    p.add_argument("--alpha-range", required=True, help="a:b:n values of the descriptor's alpha")
    p.add_argument("--kappa-range", default="-4:-0.01:400")
    p.add_argument("--box", help="counting rectangle re0:re1:im0:im1 (default: around the axis range)")
    p.add_argument("--target", choices=[t.value for t in SEED_TARGETS], default=Target.W.value)

    p = sub.add_parser("validate", parents=[common], help="run the oracle and invariant checks")
    p.add_argument("--only", help="comma-separated groups: delta,squarewell,scattering,spectrum,threshold,"
                                  "branch-residual")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        tol = parse_tolerances(args.tol)
        with override_tolerances(**tol):
            if args.command == "validate":
                return cmd_validate(args, tol)
            args.out = _out_dir(args.out)
            args.descriptor = io.load_descriptor(args.potential, args.inline)
            spec = from_descriptor(args.descriptor)
            handler = {"scatter": cmd_scatter, "spectrum": cmd_spectrum, "branch": cmd_branch,
                       "coalesce": cmd_coalesce}[args.command]
            return handler(args, spec, tol)
    except (ConfigError, DeltaNotEvaluable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationFailure as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 3
    except (NlsbifError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
