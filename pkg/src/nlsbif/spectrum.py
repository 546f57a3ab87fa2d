"""Zeros of ``w`` and ``s_pm``: location, polishing and classification.

Zeros on the imaginary axis ``k = i kappa`` are found by sign changes of the
real restriction; zeros elsewhere by the argument principle on rectangles,
with recursive subdivision and complex Newton polishing.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _ode
from .config import tolerances
from .errors import BoundaryZero, DepthExceeded, NotOnAxis
from .potential import PotentialSpec
from .scattering import Target, axis_value, target_value, wronskian

AXIS_GAP = 1e-3
THRESHOLD_SCALE_RADIUS = 0.5
DEGENERATE_TOL = 1e-8
PANEL = 16


class SpectralClass(str, enum.Enum):
    BOUND_STATE = "BoundStatePole"
    ANTI_BOUND = "AntiBoundState"
    COMPLEX_RESONANCE = "ComplexResonance"
    TRANSMISSION = "TransmissionResonance"
    THRESHOLD = "ThresholdResonance"


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class ModeTrace:
    U_at_minus_b: float
    U_at_plus_b: float
    int_U2: float
    int_U4: float


@dataclass(frozen=True)
class SpectralPoint:
    k_star: complex
    target: Target
    cls: SpectralClass
    residual: float
    derivative: complex = 0j
    scale: float = 1.0
    mode_trace: ModeTrace | None = None
    nondegeneracy: float | None = None
    parity: Parity | None = None
    degenerate: bool = False

    @property
    def kappa(self) -> float:
        return self.k_star.imag

    @property
    def on_axis(self) -> bool:
        return abs(self.k_star.real) < 1e-6 * (1 + abs(self.k_star))

    @property
    def simple(self) -> bool:
        return abs(self.derivative) > 1e-6 * self.scale

    def signature(self) -> tuple[int, int]:
        """Boundary signs ``(sigma_L, sigma_R)`` with ``u'(+-b) = sigma u sqrt(...)``."""
        if self.cls is SpectralClass.THRESHOLD:
            raise NotOnAxis("threshold points have no generic signature")
        sgn = 1 if self.kappa > 0 else -1
        if self.target is Target.W:
            return sgn, -sgn
        if self.target is Target.S_MINUS:
            return -sgn, -sgn
        return sgn, sgn

    def as_json(self) -> dict:
        return {
            "k": [self.k_star.real, self.k_star.imag],
            "target": self.target.value,
            "class": self.cls.value,
            "residual": self.residual,
            "nondegeneracy": self.nondegeneracy,
            "parity": None if self.parity is None else self.parity.value,
        }


@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"degenerate box {self}")

    def inflate(self, frac: float) -> "Box":
        dr = frac * (self.re_max - self.re_min)
        di = frac * (self.im_max - self.im_min)
        return Box(self.re_min - dr, self.re_max + dr, self.im_min - di, self.im_max + di)

    def contains(self, k: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= k.real <= self.re_max + pad
                and self.im_min - pad <= k.imag <= self.im_max + pad)

    def split(self, frac: float = 0.5) -> tuple["Box", "Box"]:
        if self.re_max - self.re_min >= self.im_max - self.im_min:
            m = self.re_min + frac * (self.re_max - self.re_min)
            return Box(self.re_min, m, self.im_min, self.im_max), Box(m, self.re_max, self.im_min, self.im_max)
        m = self.im_min + frac * (self.im_max - self.im_min)
        return Box(self.re_min, self.re_max, self.im_min, m), Box(self.re_min, self.re_max, m, self.im_max)

    def corners(self) -> list[complex]:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]


def classify(target: Target, k: complex) -> SpectralClass:
    on_axis = abs(k.real) < 1e-6 * (1 + abs(k))
    if abs(k) < AXIS_GAP:
        return SpectralClass.THRESHOLD
    if Target(target) is not Target.W:
        return SpectralClass.TRANSMISSION
    if not on_axis:
        return SpectralClass.COMPLEX_RESONANCE
    return SpectralClass.BOUND_STATE if k.imag > 0 else SpectralClass.ANTI_BOUND


def _local_scale(spec, target, k, radius=0.25, n=8) -> float:
    pts = k + radius * np.exp(2j * np.pi * np.arange(n) / n)
    return float(max(abs(target_value(spec, target, p)) for p in pts))


def _make_point(spec, target, k) -> SpectralPoint:
    val, der = target_value(spec, target, k, derivative=True)
    return SpectralPoint(k_star=k, target=Target(target), cls=classify(target, k), residual=abs(val),
                         derivative=der, scale=_local_scale(spec, target, k))


# ---------------------------------------------------------------------------
# imaginary axis
# ---------------------------------------------------------------------------

def _axis_root(spec, target, lo, hi, flo, fhi, xtol=1e-12, max_iter=100):
    """Bisection to a narrow bracket, then bracket-safeguarded Newton."""
    width = hi - lo
    while hi - lo > 1e-3 * width:
        mid = 0.5 * (lo + hi)
        fm = axis_value(spec, target, mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f, df = axis_value(spec, target, x, derivative=True)
        if f == 0:
            return x
        if (f > 0) == (flo > 0):
            lo, flo = x, f
        else:
            hi = x
        step = f / df if df != 0 else math.inf
        new = x - step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - x) < xtol:
            return new
        x = new
    return x


def scan_axis(spec: PotentialSpec, target: Target, kappa_min: float, kappa_max: float,
              n_grid: int = 200) -> list[SpectralPoint]:
    """Zeros of ``kappa -> target(i kappa)`` on ``[kappa_min, kappa_max]``."""
    if not kappa_min < kappa_max or n_grid < 2:
        raise ValueError("need kappa_min < kappa_max and n_grid >= 2")
    if kappa_min < AXIS_GAP and kappa_max > -AXIS_GAP:
        raise ValueError("the scan interval must avoid |kappa| < 1e-3; use detect_threshold there")
    if spec.is_zero():
        return []  # the free operator has no zeros off k = 0, and s_pm vanish identically
    grid = np.linspace(kappa_min, kappa_max, n_grid)
    vals = [axis_value(spec, target, x) for x in grid]
    roots = []
    for i in range(n_grid - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(_axis_root(spec, target, a, b, fa, fb))
    if vals[-1] == 0:
        roots.append(grid[-1])
    return [_make_point(spec, target, complex(0.0, r)) for r in roots]


# ---------------------------------------------------------------------------
# argument principle
# ---------------------------------------------------------------------------

def _contour(spec, target, box: Box, panels: int):
    """Return (n0, n1, min|f|, max|f|): zeroth/first moments of f'/f around ``box``."""
    xg, wg = np.polynomial.legendre.leggauss(PANEL)
    corners = box.corners()
    n0 = n1 = 0j
    fmin, fmax = math.inf, 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        edges = np.linspace(0.0, 1.0, panels + 1)
        for p0, p1 in zip(edges[:-1], edges[1:]):
            h = 0.5 * (p1 - p0)
            for t, wt in zip(p0 + h * (xg + 1), wg):
                k = a + t * (b - a)
                f, df = target_value(spec, target, k, derivative=True)
                af = abs(f)
                fmin, fmax = min(fmin, af), max(fmax, af)
                if af == 0:
                    return None, None, 0.0, fmax
                g = df / f * (b - a) * h * wt
                n0 += g
                n1 += k * g
    return n0 / (2j * math.pi), n1 / (2j * math.pi), fmin, fmax


def _count(spec, target, box, max_level=6):
    """Count and first moment, or None when the boundary passes too close to a zero."""
    panels = 2
    for _ in range(max_level):
        n0, n1, fmin, fmax = _contour(spec, target, box, panels)
        if n0 is None or fmin < 1e-8 * fmax:
            return None
        n = round(n0.real)
        if abs(n0 - n) < 0.05:
            return n, n1
        panels *= 2
    return None


def count_zeros_box(spec: PotentialSpec, target: Target, box: Box) -> int:
    """Number of zeros of ``target`` inside ``box`` by the argument principle."""
    for _ in range(4):
        res = _count(spec, target, box)
        if res is not None:
            return res[0]
        box = box.inflate(0.01)
    raise BoundaryZero("a zero sits on the contour even after inflating the box three times")


def _newton_complex(spec, target, k, tol_scale, max_iter=60):
    for _ in range(max_iter):
        f, df = target_value(spec, target, k, derivative=True)
        if df == 0:
            break
        step = f / df
        k = k - step
        if abs(step) < 1e-14 * (1 + abs(k)):
            break
    f = target_value(spec, target, k)
    return k, abs(f)


def _locate(spec, target, box, depth, max_depth, found, pending):
    res = None
    for frac in (0.0, 0.01, -0.01, 0.02):
        trial = box if frac == 0 else box.inflate(frac)
        res = _count(spec, target, trial)
        if res is not None:
            break
    if res is None:
        raise BoundaryZero(f"cannot isolate zeros near {box}")
    n, moment = res
    if n == 0:
        return
    if n == 1:
        k, resid = _newton_complex(spec, target, complex(moment), 1.0)
        if box.contains(k, pad=1e-6 * (1 + abs(k))):
            found.append(k)
            return
    if depth >= max_depth:
        pending.append(box)
        return
    for frac in (0.5, 0.45, 0.55, 0.4, 0.6):
        left, right = box.split(frac)
        if _count(spec, target, left) is not None and _count(spec, target, right) is not None:
            break
    _locate(spec, target, left, depth + 1, max_depth, found, pending)
    _locate(spec, target, right, depth + 1, max_depth, found, pending)


def _snap_axis(k: complex) -> complex:
    if abs(k.real) < 1e-6 * (1 + abs(k)):
        return complex(0.0, k.imag)
    return k


def locate_complex_zeros(spec: PotentialSpec, target: Target, box: Box,
                         max_depth: int = 10) -> list[SpectralPoint]:
    """All zeros of ``target`` in ``box``, polished by Newton, sorted by (Im k, Re k)."""
    found: list[complex] = []
    pending: list[Box] = []
    _locate(spec, target, box, 0, max_depth, found, pending)
    uniq: list[complex] = []
    for k in found:
        if all(abs(k - u) > 1e-8 * (1 + abs(k)) for u in uniq):
            uniq.append(k)
    pts = [_make_point(spec, target, _snap_axis(k)) for k in uniq]
    pts.sort(key=lambda p: (p.k_star.imag, p.k_star.real))
    if pending:
        raise DepthExceeded(f"{len(pending)} sub-boxes still hold several zeros", partial=pts)
    return pts


# ---------------------------------------------------------------------------
# threshold and modes
# ---------------------------------------------------------------------------

def _mode(spec: PotentialSpec, kappa: float, slope: float, x_eval=None):
    """Integrate ``U'' = (V + kappa^2) U`` from -b with U=1, U'=slope, accumulating int U^2, int U^4."""
    V = spec.scalar()
    k2 = kappa * kappa

    def rhs(x, y):
        u, du = y[0], y[1]
        u2 = u * u
        return [du, (V(x) + k2) * u, u2, u2 * u2]

    b = spec.b
    return _ode.integrate(rhs, np.array([1.0, slope, 0.0, 0.0]), -b, b, spec.interior_breaks(),
                          x_eval=x_eval)


def threshold_mode(spec: PotentialSpec, x_eval=None):
    """Zero-energy mode with ``U(-b) = 1``, ``U'(-b) = 0`` on [-b, b]."""
    return _mode(spec, 0.0, 0.0, x_eval=x_eval)


def threshold_parity(spec: PotentialSpec, tol: float = 1e-8) -> Parity | None:
    if not spec.is_even():
        return None
    x = np.linspace(-spec.b, spec.b, 401)
    _, xs, ys = threshold_mode(spec, x_eval=x)
    u = ys[0]
    scale = np.max(np.abs(u))
    if np.max(np.abs(u - u[::-1])) < tol * scale:
        return Parity.EVEN
    if np.max(np.abs(u + u[::-1])) < tol * scale:
        return Parity.ODD
    return None


def detect_threshold(spec: PotentialSpec) -> SpectralPoint | None:
    """Return a threshold resonance point when ``|w(0)|`` is negligible against ``|w|`` on |k|=0.5."""
    if spec.is_zero():
        return None  # w(0) = 0 here, but the free operator is not counted as a threshold resonance
    w0 = wronskian(spec, 0j)
    pts = THRESHOLD_SCALE_RADIUS * np.exp(2j * np.pi * np.arange(8) / 8)
    scale = float(np.mean([abs(wronskian(spec, p)) for p in pts]))
    if abs(w0) >= tolerances().threshold_rel * scale:
        return None
    y, _, _ = threshold_mode(spec)
    trace = ModeTrace(1.0, float(y[0]), float(y[2]), float(y[3]))
    return SpectralPoint(k_star=0j, target=Target.W, cls=SpectralClass.THRESHOLD, residual=abs(w0),
                         scale=scale, mode_trace=trace, parity=threshold_parity(spec))


def nondegeneracy_value(kappa, trace: ModeTrace, sigma_l: int, sigma_r: int) -> float:
    """``2 kappa int U^2 + a U(-b)^2 + c U(b)^2`` with signs set by the boundary signature.

    Outgoing (w) zeros give ``+ +``, right transmission (s_-) zeros ``- +``, left
    transmission (s_+) zeros ``+ -``.
    """
    sgn = 1 if kappa > 0 else -1
    a = sigma_l * sgn
    c = -sigma_r * sgn
    return 2 * kappa * trace.int_U2 + a * trace.U_at_minus_b ** 2 + c * trace.U_at_plus_b ** 2


def mode_and_nondegeneracy(spec: PotentialSpec, point: SpectralPoint) -> SpectralPoint:
    """Attach the normalised mode trace (``U(-b) = 1``) and the non-degeneracy value."""
    if not point.on_axis or point.cls is SpectralClass.THRESHOLD or abs(point.kappa) < AXIS_GAP:
        raise NotOnAxis("mode traces need a non-zero purely imaginary k")
    kappa = point.kappa
    sl, sr = point.signature()
    y, _, _ = _mode(spec, kappa, sl * abs(kappa))
    trace = ModeTrace(1.0, float(y[0]), float(y[2]), float(y[3]))
    nd = nondegeneracy_value(kappa, trace, sl, sr)
    return replace(point, mode_trace=trace, nondegeneracy=nd, degenerate=abs(nd) < DEGENERATE_TOL)


def mode_profile(spec: PotentialSpec, point: SpectralPoint, x):
    """Sampled linear mode ``U(x)`` normalised to ``U(-b) = 1``."""
    sl, _ = point.signature()
    _, xs, ys = _mode(spec, point.kappa, sl * abs(point.kappa), x_eval=x)
    return xs, ys[0], ys[1]
