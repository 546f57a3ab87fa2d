"""Continuation of nonlinear bound-state branches from linear spectral points.

Generic branches are seeded by Newton in ``kappa`` at a small ``eps`` and then
traced by pseudo-arclength continuation in ``(kappa, s)``, where ``s`` is the
left log-derivative of the inner profile. Threshold branches of even
potentials are swept directly in ``eps`` with warm starts.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (BCOutOfRange, BoundaryZero, Degenerate, IntegrationFailure, LogDerivOutOfRange,
                     NewtonDiverged, NoThreshold, NotOnAxis, NotSymmetric, ZeroBoundaryValue)
from .glue import GluedState, assemble, global_residual
from .nlsolve import (BCSignature, InnerSolution, flux_tolerance, shoot_slope, solve_kappa,
                      solve_threshold_symmetric, threshold_slope)
from .potential import PotentialSpec
from .scattering import Target
from .spectrum import (Box, Parity, SpectralClass, SpectralPoint, count_zeros_box, detect_threshold,
                       locate_complex_zeros, mode_and_nondegeneracy, scan_axis)

log = logging.getLogger(__name__)

SEED_DEGENERATE_TOL = 1e-6
EPS_FLOOR = 1e-14
_GLUE_ERRORS = (LogDerivOutOfRange, ZeroBoundaryValue)
_SOLVE_ERRORS = (BCOutOfRange, IntegrationFailure, NewtonDiverged, Degenerate)


class Termination(str, enum.Enum):
    REACHED_EPS_MAX = "ReachedEpsMax"
    REACHED_E_MIN = "ReachedEMin"
    NEWTON_FAILED = "NewtonFailed"
    BC_OUT_OF_RANGE = "BCOutOfRange"
    DEGENERATE = "Degenerate"
    MAX_POINTS = "MaxPoints"
    REACHED_EPS_MIN = "ReachedEpsMin"


@dataclass(frozen=True)
class Controls:
    ds0: float = 0.01
    ds_max: float = 0.05
    ds_min: float = 1e-7
    E_min: float = -25.0
    eps_max: float = 10.0
    max_points: int = 2000
    eps0: float = 1e-6
    check_residual: bool = True


@dataclass
class BranchCurve:
    seed: SpectralPoint | None
    points: list[GluedState] = field(default_factory=list)
    termination: Termination | None = None
    global_residuals: list[float] = field(default_factory=list)
    stats: dict = field(default_factory=lambda: {"accepted": 0, "rejected": 0, "newton_iterations": 0,
                                                 "ds_min_used": math.inf, "ds_max_used": 0.0})

    @property
    def E(self) -> np.ndarray:
        return np.array([p.E for p in self.points])

    @property
    def N(self) -> np.ndarray:
        return np.array([p.N for p in self.points])

    @property
    def eps(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    @property
    def x_R(self) -> np.ndarray:
        return np.array([p.x_R for p in self.points])

    def _append(self, spec, state, check):
        self.points.append(state)
        self.global_residuals.append(global_residual(spec, state) if check else math.nan)


def signature_for(point: SpectralPoint) -> BCSignature:
    if point.cls is SpectralClass.COMPLEX_RESONANCE or not point.on_axis:
        raise NotOnAxis("branches are only seeded from zeros on the imaginary axis")
    if point.cls is SpectralClass.THRESHOLD:
        raise NotOnAxis("use threshold_branch for threshold resonances")
    return BCSignature(*point.signature())


def seed_branch(spec: PotentialSpec, point: SpectralPoint, eps0: float = 1e-6) -> GluedState:
    """First branch point at ``eps0`` from a simple, non-degenerate axis zero."""
    sig = signature_for(point)
    if point.nondegeneracy is None:
        point = mode_and_nondegeneracy(spec, point)
    if abs(point.nondegeneracy) < SEED_DEGENERATE_TOL:
        raise Degenerate(f"non-degeneracy {point.nondegeneracy:.3e} below {SEED_DEGENERATE_TOL:g}")
    if not point.simple:
        raise Degenerate("the seed zero is not simple")
    inner = solve_kappa(spec, eps0, sig, point.kappa)
    return assemble(inner)


def _tangent(inner: InnerSolution) -> np.ndarray:
    # null vector of [G_kappa, G_s] in the (kappa, s) plane
    t = np.array([-inner.dF_dslope, inner.dF_dkappa])
    n = np.linalg.norm(t)
    if not n > 0 or not np.all(np.isfinite(t)):
        raise Degenerate("no tangent: both partial derivatives vanish")
    return t / n


def _corrector(spec, z0, tangent, ds, max_iter=8):
    """Bordered Newton for ``G = 0`` and ``tangent . (z - z0) = ds``. Returns (inner, iterations)."""
    z = z0 + ds * tangent
    step = math.inf
    for it in range(1, max_iter + 1):
        kappa, slope = z
        if kappa * z0[0] <= 0:
            return None, it
        try:
            sol = shoot_slope(spec, kappa, slope)
        except (BCOutOfRange, IntegrationFailure):
            return None, it
        if abs(sol.residual_F) < flux_tolerance(sol) and step < 1e-9 * (1 + abs(kappa)):
            return sol, it
        g = np.array([sol.residual_F, tangent @ (z - z0) - ds])
        J = np.array([[sol.dF_dkappa, sol.dF_dslope], tangent])
        if not np.all(np.isfinite(J)):
            return None, it
        try:
            dz = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            return None, it
        step = float(np.max(np.abs(dz)))
        z = z + dz
    return None, max_iter


def continue_branch(spec: PotentialSpec, start: GluedState, controls: Controls = Controls(),
                    seed: SpectralPoint | None = None) -> BranchCurve:
    """Pseudo-arclength continuation from ``start`` until a control bound or a failure.

    The unknowns are ``kappa`` and the left log-derivative ``s = u'(-b)``, with
    ``eps = 2 (kappa^2 - s^2)`` and the right-end flux as residual. The first
    predictor follows the tangent towards growing ``eps``; later ones use the
    secant through the last two accepted points.
    """
    inner = start.inner
    first = shoot_slope(spec, inner.kappa, inner.left_slope)
    curve = BranchCurve(seed=seed)
    curve._append(spec, start, controls.check_residual)
    z_prev = None
    z = np.array([inner.kappa, inner.left_slope])
    tangent = _tangent(first)
    # orient towards increasing eps: d eps = 4 (kappa dkappa - s ds)
    if z[0] * tangent[0] - z[1] * tangent[1] < 0:
        tangent = -tangent
    ds = controls.ds0
    easy = 0
    stats = curve.stats
    while True:
        if len(curve.points) >= controls.max_points:
            curve.termination = Termination.MAX_POINTS
            break
        if z_prev is not None:
            sec = z - z_prev
            tangent = sec / np.linalg.norm(sec)
        sol, its = _corrector(spec, z, tangent, ds)
        stats["newton_iterations"] += its
        if sol is None:
            stats["rejected"] += 1
            ds *= 0.5
            easy = 0
            if ds < controls.ds_min:
                curve.termination = Termination.NEWTON_FAILED
                break
            continue
        if -sol.kappa ** 2 < controls.E_min:
            curve.termination = Termination.REACHED_E_MIN
            break
        if sol.eps > controls.eps_max:
            curve.termination = Termination.REACHED_EPS_MAX
            break
        if sol.eps < EPS_FLOOR:
            curve.termination = Termination.REACHED_EPS_MIN
            break
        try:
            state = assemble(sol)
        except _GLUE_ERRORS:
            curve.termination = Termination.BC_OUT_OF_RANGE
            break
        curve._append(spec, state, controls.check_residual)
        stats["accepted"] += 1
        stats["ds_min_used"] = min(stats["ds_min_used"], ds)
        stats["ds_max_used"] = max(stats["ds_max_used"], ds)
        z_prev, z = z, np.array([sol.kappa, sol.left_slope])
        easy = easy + 1 if its <= 3 else 0
        if easy >= 3:
            ds = min(2 * ds, controls.ds_max)
            easy = 0
    return curve


def solve_slope(spec: PotentialSpec, kappa: float, slope_guess: float, max_iter: int = 50) -> InnerSolution:
    """Newton in ``s`` at fixed ``kappa`` for the flux form (used for branch cross-checks)."""
    slope = slope_guess
    for _ in range(max_iter):
        sol = shoot_slope(spec, kappa, slope)
        d = -sol.residual_F / sol.dF_dslope
        slope += d
        if abs(d) < 1e-14 * (1 + abs(slope)):
            return shoot_slope(spec, kappa, slope)
    raise NewtonDiverged("Newton in s did not converge")


def trace_from_point(spec: PotentialSpec, point: SpectralPoint, controls: Controls = Controls()) -> BranchCurve:
    """Seed and continue; failures to seed become an empty curve with a termination reason."""
    try:
        start = seed_branch(spec, point, controls.eps0)
    except Degenerate:
        return BranchCurve(seed=point, termination=Termination.DEGENERATE)
    except (NewtonDiverged, IntegrationFailure):
        return BranchCurve(seed=point, termination=Termination.NEWTON_FAILED)
    except BCOutOfRange:
        return BranchCurve(seed=point, termination=Termination.BC_OUT_OF_RANGE)
    return continue_branch(spec, start, controls, seed=point)


def threshold_branch(spec: PotentialSpec, parity: Parity, controls: Controls = Controls(),
                     eps_values: Sequence[float] | None = None, growth: float = 1.25) -> BranchCurve:
    """Sweep ``eps`` upward along the symmetric branch born at a threshold resonance."""
    if not spec.is_even():
        raise NotSymmetric("threshold branches need an even potential")
    point = detect_threshold(spec)
    if point is None:
        raise NoThreshold("w(0) is not small against its local scale")
    parity = Parity(parity)
    if point.parity is not None and point.parity is not parity:
        raise NoThreshold(f"the threshold mode is {point.parity.value}, not {parity.value}")
    slope = threshold_slope(spec, parity)
    if eps_values is None:
        eps_values = []
        e = controls.eps0
        while e <= controls.eps_max and len(eps_values) < controls.max_points:
            eps_values.append(e)
            e *= growth
    curve = BranchCurve(seed=point)
    hist: list[tuple[float, float]] = []
    for eps in eps_values:
        if len(hist) >= 2:
            (e1, E1), (e2, E2) = hist[-2], hist[-1]
            guess = E2 + (E2 - E1) / (e2 - e1) * (eps - e2)
        elif hist:
            guess = hist[-1][1] * eps / hist[-1][0]
        else:
            guess = slope * eps
        if not guess < 0:
            guess = slope * eps
        try:
            inner = solve_threshold_symmetric(spec, eps, parity, guess)
        except (NewtonDiverged, IntegrationFailure):
            curve.termination = Termination.NEWTON_FAILED
            break
        if inner.E < controls.E_min:
            curve.termination = Termination.REACHED_E_MIN
            break
        try:
            state = assemble(inner)
        except _GLUE_ERRORS:
            curve.termination = Termination.BC_OUT_OF_RANGE
            break
        curve._append(spec, state, controls.check_residual)
        hist.append((eps, inner.E))
    else:
        curve.termination = Termination.REACHED_EPS_MAX
    curve.stats["accepted"] = len(curve.points)
    return curve


# ---------------------------------------------------------------------------
# coalescence of axis zeros
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoalescenceRow:
    alpha: float
    axis_kappas: tuple[float, ...]
    box_count: int


@dataclass
class CoalescenceReport:
    rows: list[CoalescenceRow]
    bracket: tuple[float, float] | None
    before: list[SpectralPoint] = field(default_factory=list)
    after: list[SpectralPoint] = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "rows": [{"alpha": r.alpha, "axis_kappas": list(r.axis_kappas), "box_count": r.box_count}
                     for r in self.rows],
            "bracket": None if self.bracket is None else list(self.bracket),
            "before": [p.as_json() for p in self.before],
            "after": [p.as_json() for p in self.after],
        }


def coalescence_scan(family: Callable[[float], PotentialSpec], alphas: Sequence[float],
                     target: Target = Target.W, kappa_range: tuple[float, float] = (-4.0, -1e-2),
                     box: Box | None = None, n_grid: int = 200) -> CoalescenceReport:
    """Track axis zeros of ``target`` across ``alphas`` and find where two merge and leave the axis.

    The bracket is the first pair of consecutive ``alpha`` values where the axis
    count drops by two while the argument-principle count in ``box`` (a lower
    half-plane rectangle straddling the axis segment) stays the same.
    """
    if box is None:
        box = Box(-2.0, 2.0, kappa_range[0], kappa_range[1])
    rows = []
    for a in alphas:
        spec = family(a)
        axis = scan_axis(spec, target, kappa_range[0], kappa_range[1], n_grid)
        try:
            count = count_zeros_box(spec, target, box)
        except BoundaryZero:
            count = -1
        rows.append(CoalescenceRow(float(a), tuple(p.kappa for p in axis), count))
    bracket = None
    before: list[SpectralPoint] = []
    after: list[SpectralPoint] = []
    for r0, r1 in zip(rows, rows[1:]):
        if len(r0.axis_kappas) - len(r1.axis_kappas) == 2 and r0.box_count == r1.box_count >= 0:
            bracket = (r0.alpha, r1.alpha)
            before = scan_axis(family(r0.alpha), target, kappa_range[0], kappa_range[1], n_grid)
            after = [p for p in locate_complex_zeros(family(r1.alpha), target, box) if not p.on_axis]
            break
    return CoalescenceReport(rows=rows, bracket=bracket, before=before, after=after)

