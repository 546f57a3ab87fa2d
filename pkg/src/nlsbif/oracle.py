"""Closed-form references: square-well Wronskians, delta-potential states, the 1-soliton.

Nothing here touches the ODE integrator; these formulas are the ground truth
the numerical modules are tested against.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import AboveThreshold
from .scattering import ScatteringData


def _cos_sinc(q2: complex, y: float) -> tuple[complex, complex, complex]:
    """cos(q y), sin(q y)/q and q sin(q y), written to be even in q."""
    q = cmath.sqrt(q2)
    c = cmath.cos(q * y)
    if abs(q * y) < 1e-8:
        s = y * (1 - q2 * y * y / 6)
    else:
        s = cmath.sin(q * y) / q
    return c, s, q2 * s


def squarewell_jost(alpha: float, b: float, k: complex, x: float, side: int):
    """Interior Jost value (f, f') for ``V = -alpha`` on ``|x| <= b``."""
    k = complex(k)
    q2 = k * k + alpha
    x0 = side * b
    e = cmath.exp(1j * k * b)
    c, s, qs = _cos_sinc(q2, x - x0)
    isk = 1j * side * k
    return e * (c + isk * s), e * (-qs + isk * c)


def squarewell_scattering(alpha: float, b: float, k: complex) -> ScatteringData:
    """Closed-form ``w``, ``s_pm``, ``t``, ``r_pm`` for the square well ``-alpha chi_[-b,b]``."""
    k = complex(k)
    q2 = k * k + alpha
    c, s, _ = _cos_sinc(q2, 2 * b)
    w = cmath.exp(2j * k * b) * (2j * k * c + (k * k + q2) * s)
    sm = -alpha * s
    sp = sm
    if w != 0 and k != 0:
        t, rm, rp = 2j * k / w, sm / w, sp / w
    else:
        t = rm = rp = None
    return ScatteringData(k, w, sm, sp, t, rm, rp)


def squarewell_axis_w(alpha: float, b: float, kappa: float) -> float:
    """``w(i kappa)`` of the square well, real-valued."""
    return squarewell_scattering(alpha, b, 1j * kappa).w.real


@dataclass(frozen=True)
class SolitonFacts:
    peak: float
    mass: float


def soliton_facts(E: float) -> SolitonFacts:
    if not E < 0:
        raise ValueError("soliton needs E < 0")
    return SolitonFacts(peak=math.sqrt(-2 * E), mass=4 * math.sqrt(-E))


def soliton(x, E: float, center: float = 0.0):
    mu = math.sqrt(-E)
    return math.sqrt(-2 * E) / np.cosh(mu * (np.asarray(x, dtype=float) - center))


def soliton_prime(x, E: float, center: float = 0.0):
    mu = math.sqrt(-E)
    z = mu * (np.asarray(x, dtype=float) - center)
    return -math.sqrt(-2 * E) * mu * np.tanh(z) / np.cosh(z)


@dataclass(frozen=True)
class DeltaState:
    alpha: float
    E: float
    x_R: float
    x_L: float
    N: float

    @property
    def E_star(self) -> float:
        return -self.alpha ** 2 / 4

    def profile(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, soliton(x, self.E, self.x_R), soliton(x, self.E, self.x_L))

    def profile_prime(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, soliton_prime(x, self.E, self.x_R), soliton_prime(x, self.E, self.x_L))

    def jump_defect(self) -> float:
        """``psi'(0+) - psi'(0-) - alpha psi(0)``; zero for a true state."""
        right = soliton_prime(0.0, self.E, self.x_R)
        left = soliton_prime(0.0, self.E, self.x_L)
        return float(right - left - self.alpha * soliton(0.0, self.E, self.x_R))


def delta_threshold_energy(alpha: float) -> float:
    return -alpha ** 2 / 4


def delta_state(alpha: float, E: float) -> DeltaState:
    """Nonlinear bound state of ``-psi'' + alpha delta psi - psi^3 = E psi``.

    Two soliton flanks centred at ``x_R = -x_L = artanh(alpha / 2 sqrt|E|) / sqrt|E|``.
    The mass uses the closed-form half-line integrals cut at the origin.
    """
    if alpha == 0:
        raise ValueError("alpha must be non-zero")
    if not E < delta_threshold_energy(alpha):
        raise AboveThreshold(f"need E < -alpha^2/4 = {delta_threshold_energy(alpha)}")
    mu = math.sqrt(-E)
    x_R = math.atanh(alpha / (2 * mu)) / mu
    # each half carries 2 mu (1 + tanh(mu x_R)) = 2 mu + alpha
    half = 2 * mu * (1 + math.tanh(mu * x_R))
    return DeltaState(alpha=alpha, E=E, x_R=x_R, x_L=-x_R, N=2 * half)


def delta_mass_limit(alpha: float) -> float:
    """Limit of the mass as ``E`` decreases to ``-alpha^2/4``: ``8 sqrt(-E_star)`` or 0."""
    return 8 * math.sqrt(-delta_threshold_energy(alpha)) if alpha > 0 else 0.0
