"""Glue soliton tails onto inner solutions.

Outside ``[-b, b]`` a nonlinear bound state is a translated 1-soliton
``S(x - c; E) = sqrt(-2E) sech(sqrt(-E) (x - c))``. The centres ``x_L, x_R``
follow from matching the logarithmic derivative of ``psi = sqrt(eps) u`` at
``-b`` and ``+b``; amplitude continuity then holds automatically because both
sides share the same flux functional.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import LogDerivOutOfRange, ZeroBoundaryValue
from .nlsolve import InnerSolution, reshoot
from .potential import PotentialSpec

ARTANH_CLAMP = 1.0 - 1e-14
# beyond this |u'/u| / mu the artanh inversion loses digits; invert the amplitude instead
AMPLITUDE_SWITCH = 0.7


@dataclass(frozen=True)
class Soliton:
    E: float
    center: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not self.E < 0:
            raise ValueError("soliton needs E < 0")

    @property
    def mu(self) -> float:
        return math.sqrt(-self.E)

    @property
    def peak(self) -> float:
        return math.sqrt(-2 * self.E)

    @property
    def mass(self) -> float:
        return 4 * self.mu

    def __call__(self, x):
        return self.sign * self.peak / np.cosh(self.mu * (np.asarray(x, dtype=float) - self.center))

    def derivative(self, x):
        z = self.mu * (np.asarray(x, dtype=float) - self.center)
        return -self.sign * self.peak * self.mu * np.tanh(z) / np.cosh(z)


def one_minus_tanh(y: float) -> float:
    """``1 - tanh(y)`` without cancellation for large positive ``y``."""
    return 2.0 * float(expit(-2.0 * y))


def tail_mass(E: float, from_x: float, center: float) -> float:
    """``int_{from_x}^inf S(x - center; E)^2 dx``."""
    if not E < 0:
        raise ValueError("tail_mass needs E < 0")
    mu = math.sqrt(-E)
    return 2 * mu * one_minus_tanh(mu * (from_x - center))


def tail_dirichlet(E: float, from_x: float, center: float) -> float:
    """``int_{from_x}^inf S'(x - center; E)^2 dx = (2 mu^3 / 3)(1 - t^3)`` with ``t = tanh(mu z0)``."""
    if not E < 0:
        raise ValueError("tail_dirichlet needs E < 0")
    mu = math.sqrt(-E)
    y = mu * (from_x - center)
    t = math.tanh(y)
    return (2 * mu ** 3 / 3) * one_minus_tanh(y) * (1 + t + t * t)


@dataclass(frozen=True)
class GluedState:
    E: float
    eps: float
    inner: InnerSolution
    x_L: float
    x_R: float
    sign_L: int
    sign_R: int
    N: float
    H1: float
    residuals: dict = field(default_factory=dict)

    @property
    def amplitude(self) -> float:
        inner_max = math.sqrt(self.eps) * float(np.max(np.abs(self.inner.u)))
        tail_max = math.sqrt(-2 * self.E)
        peak_out = tail_max if (self.x_R > self.inner.grid[-1] or self.x_L < self.inner.grid[0]) else 0.0
        return max(inner_max, peak_out, abs(self.psi_b(1)), abs(self.psi_b(-1)))

    @property
    def b(self) -> float:
        return float(self.inner.grid[-1])

    def psi_b(self, side: int) -> float:
        u = self.inner.u_right if side > 0 else self.inner.u_left
        return math.sqrt(self.eps) * u

    def right_tail(self) -> Soliton:
        return Soliton(self.E, self.x_R, self.sign_R)

    def left_tail(self) -> Soliton:
        return Soliton(self.E, self.x_L, self.sign_L)

    def max_jump(self) -> float:
        return max(abs(v) for v in self.residuals.values())

    def profile(self, spec: PotentialSpec, x):
        """Evaluate ``psi`` on sorted points ``x`` (re-shooting the inner part on them)."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        dout = np.empty_like(x)
        b = self.b
        right, left = x > b, x < -b
        out[right], dout[right] = self.right_tail()(x[right]), self.right_tail().derivative(x[right])
        out[left], dout[left] = self.left_tail()(x[left]), self.left_tail().derivative(x[left])
        mid = ~(right | left)
        if np.any(mid):
            inner = reshoot(spec, self.inner, x[mid])
            xs = inner.grid
            idx = np.searchsorted(xs, x[mid])
            s = math.sqrt(self.eps)
            out[mid] = s * inner.u[idx]
            dout[mid] = s * inner.u_prime[idx]
        return out, dout

    def as_json(self, spec: PotentialSpec, grid=None) -> dict:
        if grid is None:
            span = self.b + max(abs(self.x_L), abs(self.x_R)) + 8.0 / math.sqrt(-self.E)
            span = min(span, self.b + 60.0)
            grid = np.linspace(-span, span, 801)
        psi, _ = self.profile(spec, grid)
        return {"E": self.E, "eps": self.eps, "x_L": self.x_L, "x_R": self.x_R,
                "signs": [self.sign_L, self.sign_R], "grid": [float(v) for v in grid],
                "psi": [float(v) for v in psi], "N": self.N, "H1": self.H1}


def inner_from_boundary_data(E: float, psi_left: float, dpsi_left: float, psi_right: float,
                             dpsi_right: float, b: float = 0.0, int_psi2: float = 0.0,
                             int_dpsi2: float = 0.0) -> InnerSolution:
    """Wrap boundary values of ``psi`` at ``-b`` and ``+b`` as an inner solution with ``eps = 1``.

    With ``b = 0`` this represents a point interaction such as ``alpha delta(x)``,
    where ``psi'`` jumps across the origin.
    """
    return InnerSolution(kappa=math.sqrt(-E), eps=1.0, signature=None, grid=np.array([-b, b]),
                         u=np.array([psi_left, psi_right]), u_prime=np.array([dpsi_left, dpsi_right]),
                         residual_F=0.0, int_u2=int_psi2, int_u4=math.nan, int_up2=int_dpsi2, E=E)


def match_tail(inner: InnerSolution, side: int) -> tuple[float, int]:
    """Soliton centre and sign matching ``psi'/psi`` at ``x = side * b``.

    ``side = +1`` gives ``x_R``, ``side = -1`` gives ``x_L``.
    """
    E = inner.energy
    if not E < 0:
        raise LogDerivOutOfRange("gluing needs E < 0")
    mu = math.sqrt(-E)
    b = float(inner.grid[-1]) if side > 0 else -float(inner.grid[0])
    u, up = (inner.u_right, inner.up_right) if side > 0 else (inner.u_left, inner.up_left)
    if u == 0:
        raise ZeroBoundaryValue(f"u vanishes at x={side * b:+g}")
    sign = 1 if u > 0 else -1
    ell = up / u
    z = ell / mu
    if abs(z) >= 1:
        raise LogDerivOutOfRange(f"|u'/u| / sqrt(-E) = {abs(z):.17g} >= 1 at x={side * b:+g}")
    # right: S'/S at b - x_R is mu tanh(mu (x_R - b)) = ell; left mirrored
    if abs(z) <= AMPLITUDE_SWITCH:
        shift = math.atanh(max(-ARTANH_CLAMP, min(ARTANH_CLAMP, z))) / mu
    else:
        psi = math.sqrt(inner.eps) * abs(u)
        ratio = math.sqrt(-2 * E) / psi
        shift = math.copysign(math.acosh(max(ratio, 1.0)) / mu, z)
    center = b + shift if side > 0 else -b + shift
    return center, sign


def assemble(inner: InnerSolution) -> GluedState:
    """Glue both tails onto ``inner`` and compute mass, H1 norm and jump residuals."""
    E = inner.energy
    x_R, s_R = match_tail(inner, 1)
    x_L, s_L = match_tail(inner, -1)
    b = float(inner.grid[-1])
    eps = inner.eps
    T_R = tail_mass(E, b, x_R)
    T_L = tail_mass(E, b, -x_L)
    D_R = tail_dirichlet(E, b, x_R)
    D_L = tail_dirichlet(E, b, -x_L)
    N = eps * inner.int_u2 + T_L + T_R
    H1 = eps * (inner.int_up2 + inner.int_u2) + T_L + T_R + D_L + D_R
    right, left = Soliton(E, x_R, s_R), Soliton(E, x_L, s_L)
    s = math.sqrt(eps)
    residuals = {
        "psi_jump_b": float(s * inner.u_right - right(b)),
        "dpsi_jump_b": float(s * inner.up_right - right.derivative(b)),
        "psi_jump_mb": float(s * inner.u_left - left(-b)),
        "dpsi_jump_mb": float(s * inner.up_left - left.derivative(-b)),
    }
    return GluedState(E=E, eps=eps, inner=inner, x_L=x_L, x_R=x_R, sign_L=s_L, sign_R=s_R,
                      N=N, H1=H1, residuals=residuals)


def jump_scale(state: GluedState) -> float:
    """Local amplitude used to normalise the jump residuals."""
    return max(abs(state.psi_b(1)), abs(state.psi_b(-1)), math.sqrt(state.eps) * float(np.max(np.abs(state.inner.u))),
               1e-300)


def relative_jumps(state: GluedState) -> dict:
    """Jump residuals divided by the local amplitude and, for derivatives, by ``1 + sqrt(-E)``."""
    amp = jump_scale(state)
    mu = math.sqrt(-state.E)
    out = {}
    for key, val in state.residuals.items():
        scale = amp * (1 + mu) if key.startswith("dpsi") else amp
        out[key] = abs(val) / scale
    return out


# ---------------------------------------------------------------------------
# global residual
# ---------------------------------------------------------------------------

_D1_STENCIL = np.array([-1, 9, -45, 0, 45, -9, 1], dtype=float) / 60.0


def global_residual(spec: PotentialSpec, state: GluedState, window: float = 5.0) -> float:
    """Sup-norm of ``-psi'' + V psi - psi^3 - E psi`` over ``amplitude`` on a fine grid.

    ``psi''`` is the 7-point sixth-order central difference of the sampled
    ``psi'``; differencing once instead of twice keeps the interpolation error
    of the sampled inner solution from being amplified by ``1/h^2``. Stencils
    crossing ``+-b`` or an interior break of ``V`` are skipped.
    """
    b = spec.b
    E = state.E
    vmax = float(np.max(np.abs(spec(np.linspace(-b, b, 401)))))
    wave = math.sqrt(vmax + abs(E) + 2 * state.amplitude ** 2 + 1.0)
    h = min(0.01, 0.05 / wave)
    lo, hi = -b - window, b + window
    n = int(math.ceil((hi - lo) / h))
    x = np.linspace(lo, hi, n + 1)
    h = x[1] - x[0]
    psi, dpsi = state.profile(spec, x)
    d2 = np.convolve(dpsi, _D1_STENCIL[::-1], mode="valid") / h
    xc = x[3:-3]
    V = np.where(np.abs(xc) <= b, spec(xc), 0.0)
    res = -d2 + V * psi[3:-3] - psi[3:-3] ** 3 - E * psi[3:-3]
    cuts = np.array([-b, b, *spec.interior_breaks()])
    ok = np.min(np.abs(xc[:, None] - cuts[None, :]), axis=1) > 3.5 * h
    return float(np.max(np.abs(res[ok])) / state.amplitude)


def brute_mass(spec: PotentialSpec, state: GluedState, n: int = 20001) -> float:
    """``int psi^2`` by quadrature over ``[-b - 40/mu, b + 40/mu]`` (test helper)."""
    from scipy.integrate import quad

    mu = math.sqrt(-state.E)
    b = spec.b
    L = 40.0 / mu
    right, left = state.right_tail(), state.left_tail()
    tails = quad(lambda x: float(right(x)) ** 2, b, b + L, limit=400, epsabs=0, epsrel=1e-13,
                 points=[state.x_R] if b < state.x_R < b + L else None)[0]
    tails += quad(lambda x: float(left(x)) ** 2, -b - L, -b, limit=400, epsabs=0, epsrel=1e-13,
                  points=[state.x_L] if -b - L < state.x_L < -b else None)[0]
    x = np.linspace(-b, b, n)
    psi, _ = state.profile(spec, x)
    from scipy.integrate import simpson

    return tails + float(simpson(psi ** 2, x=x))


def profile_json(spec: PotentialSpec, state: GluedState) -> str:
    return json.dumps(state.as_json(spec), sort_keys=True)
