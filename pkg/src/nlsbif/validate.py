"""Oracle and invariant checks behind ``nlsbif validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import oracle
from .branch import Controls, threshold_branch, trace_from_point
from .errors import NlsbifError
from .glue import assemble, inner_from_boundary_data, relative_jumps
from .potential import double_barrier, smooth_well, square_well
from .scattering import Target, s_minus, s_plus, scattering_data, unitarity_defect, wronskian
from .spectrum import Box, Parity, count_zeros_box, detect_threshold, scan_axis
from .nlsolve import solve_threshold_symmetric


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    target: str
    observed: float | str
    tolerance: float
    passed: bool

    def row(self) -> str:
        obs = self.observed if isinstance(self.observed, str) else f"{self.observed:.3e}"
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.group:<15} {self.name:<38} target={self.target:<14} observed={obs:<12} tol={self.tolerance:.1e}"


def _le(group, name, target, observed, tol) -> Check:
    return Check(group, name, target, float(observed), tol, bool(observed <= tol))


def _delta() -> list[Check]:
    out = []
    d = oracle.delta_state(1.0, -1.0)
    out.append(_le("delta", "x_R(alpha=1, E=-1)", "artanh(1/2)", abs(d.x_R - math.atanh(0.5)), 1e-12))
    for a in (1.0, -1.0):
        s = oracle.delta_state(a, -1.0)
        out.append(_le("delta", f"jump condition alpha={a:+g}", "0", abs(s.jump_defect()), 1e-10))
        near = oracle.delta_state(a, oracle.delta_threshold_energy(a) - 1e-13)
        out.append(_le("delta", f"N limit alpha={a:+g}", f"{oracle.delta_mass_limit(a):g}",
                       abs(near.N - oracle.delta_mass_limit(a)), 1e-6))
    worst = 0.0
    for a in (1.0, -1.0):
        for E in (-0.3, -1.0, -4.0):
            s = oracle.delta_state(a, E)
            inner = inner_from_boundary_data(E, float(oracle.soliton(0.0, E, s.x_L)),
                                             float(oracle.soliton_prime(0.0, E, s.x_L)),
                                             float(oracle.soliton(0.0, E, s.x_R)),
                                             float(oracle.soliton_prime(0.0, E, s.x_R)))
            worst = max(worst, abs(assemble(inner).N - s.N))
    out.append(_le("delta", "glue N vs closed form", "0", worst, 1e-8))
    return out


def _squarewell() -> list[Check]:
    spec = square_well(2.0)
    worst = 0.0
    for re in np.linspace(-5, 5, 5):
        for im in np.linspace(-5, 5, 5):
            k = complex(re, im)
            num, ref = scattering_data(spec, k), oracle.squarewell_scattering(2.0, 1.0, k)
            for a, b in ((num.w, ref.w), (num.s_minus, ref.s_minus), (num.s_plus, ref.s_plus)):
                worst = max(worst, abs(a - b) / max(abs(b), abs(ref.w), 1e-300))
    out = [_le("squarewell", "ODE vs closed form (5x5 grid)", "0", worst, 1e-8)]
    w0 = abs(wronskian(square_well(math.pi ** 2 / 4), 0.0))
    out.append(_le("squarewell", "w(0) at alpha=pi^2/4", "0", w0, 1e-8))
    return out


def _scattering() -> list[Check]:
    spec = square_well(2.0)
    ks = np.logspace(-1, 1, 50)
    out = [_le("scattering", "unitarity, 50 real k", "0", float(np.max(unitarity_defect(spec, ks))), 1e-8)]
    k = 1.3 + 0.2j
    lop = smooth_well(5.0, -0.5)
    out.append(_le("scattering", "s_+(k) = s_-(-k), asymmetric V", "0",
                   abs(s_plus(lop, k, x=0.3) - s_minus(lop, -k, x=-0.2)), 1e-9))
    out.append(_le("scattering", "w(-conj k) = conj w(k)", "0",
                   abs(wronskian(spec, -k.conjugate()) - wronskian(spec, k).conjugate()), 1e-9))
    dx = max(abs(wronskian(spec, k, x) - wronskian(spec, k)) for x in (-0.5, 0.5))
    out.append(_le("scattering", "w independent of x", "0", dx, 1e-9))
    return out


def _spectrum() -> list[Check]:
    spec = square_well(2.0)
    pts = scan_axis(spec, Target.W, 0.05, 1.4, 50)
    ref = brentq(lambda kap: math.sqrt(2 - kap * kap) * math.tan(math.sqrt(2 - kap * kap)) - kap, 0.5, 1.3,
                 xtol=1e-15)
    obs = abs(pts[0].kappa - ref) if len(pts) == 1 else math.inf
    out = [_le("spectrum", "bound state kappa (p tan p = kappa)", f"{ref:.6f}", obs, 1e-10)]
    free = count_zeros_box(square_well(0.0), Target.W, Box(-1, 1, -1, -0.1))
    out.append(Check("spectrum", "free box count", "0", float(free), 0.0, free == 0))
    anti = scan_axis(spec, Target.W, -3.0, -0.05, 60)
    ok = len(anti) >= 1
    n = count_zeros_box(spec, Target.W, Box(-0.2, 0.2, anti[0].kappa - 0.2, anti[0].kappa + 0.2)) if ok else -1
    out.append(Check("spectrum", "axis scan vs contour count", "1", float(n), 0.0, n == 1))
    return out


def _threshold() -> list[Check]:
    spec = square_well(math.pi ** 2 / 4)
    pt = detect_threshold(spec)
    good = pt is not None and pt.parity is Parity.ODD
    out = [Check("threshold", "detected, odd parity", "Odd", "Odd" if good else str(pt and pt.parity), 0.0, good)]
    eps = 1e-6
    sol = solve_threshold_symmetric(spec, eps, Parity.ODD, -2 * eps / math.pi ** 2)
    g = assemble(sol)
    out.append(_le("threshold", "x_R at eps=1e-6", "0.75", abs(g.x_R - 0.75), 1e-3))
    out.append(_le("threshold", "E/eps", "-2/pi^2", abs(g.E / eps + 2 / math.pi ** 2) / (2 / math.pi ** 2), 1e-2))
    return out


def _branch_residual() -> list[Check]:
    out = []
    controls = Controls(max_points=60)
    cases = []
    sw = square_well(2.0)
    cases.append(("bound state, square well", sw, scan_axis(sw, Target.W, 0.05, 1.4, 50)[0]))
    db = double_barrier(0.5)
    cases.append(("anti-bound, double barrier", db, scan_axis(db, Target.W, -3.0, -0.01, 100)[0]))
    for label, spec, point in cases:
        curve = trace_from_point(spec, point, controls)
        res = max(curve.global_residuals) if curve.points else math.inf
        jumps = max(max(relative_jumps(p).values()) for p in curve.points) if curve.points else math.inf
        out.append(_le("branch-residual", f"ODE residual, {label}", "0", res, 1e-6))
        out.append(_le("branch-residual", f"jumps, {label}", "0", jumps, 1e-9))
    thr = threshold_branch(square_well(math.pi ** 2 / 4), Parity.ODD, Controls(max_points=25), growth=2.0)
    out.append(_le("branch-residual", "ODE residual, threshold branch", "0", max(thr.global_residuals), 1e-6))
    out.append(_le("branch-residual", "jumps, threshold branch", "0",
                   max(max(relative_jumps(p).values()) for p in thr.points), 1e-9))
    return out


GROUPS: dict[str, Callable[[], list[Check]]] = {
    "delta": _delta,
    "squarewell": _squarewell,
    "scattering": _scattering,
    "spectrum": _spectrum,
    "threshold": _threshold,
    "branch-residual": _branch_residual,
}


def run_checks(only: list[str] | None = None) -> list[Check]:
    """Run the selected groups (all by default); errors become failed checks."""
    names = list(GROUPS) if not only else only
    unknown = [n for n in names if n not in GROUPS]
    if unknown:
        raise KeyError(f"unknown validation group(s): {', '.join(unknown)}")
    out: list[Check] = []
    for name in names:
        try:
            out.extend(GROUPS[name]())
        except (NlsbifError, ArithmeticError, ValueError) as exc:
            out.append(Check(name, "group raised", "no error", f"{type(exc).__name__}", 0.0, False))
    return out
