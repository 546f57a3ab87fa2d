"""Shooting + Newton for the nonlinear boundary-value problem on [-b, b].

The inner profile ``u`` solves ``-u'' + V u - eps u^3 = -kappa^2 u`` with
``u(-b) = 1`` and the nonlinear flux conditions

    u'(-b) = sigma_L sqrt(kappa^2 - eps/2),
    u'(b)  = sigma_R u(b) sqrt(kappa^2 - eps u(b)^2 / 2).

``kappa`` is signed: ``E = -kappa^2`` and the sign of ``kappa`` records the
spectral point the branch was seeded at. The signs ``sigma_L, sigma_R`` say
whether the profile decays (``u'/u`` pointing inwards) or grows towards the
respective end of the support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _ode
from .errors import BCOutOfRange, Degenerate, IntegrationFailure, NewtonDiverged, NotOnAxis, NotSymmetric
from .potential import PotentialSpec
from .spectrum import Parity, SpectralClass, SpectralPoint

MAX_NEWTON = 50
MAX_HALVINGS = 30


@dataclass(frozen=True)
class BCSignature:
    sigma_L: int
    sigma_R: int

    def __post_init__(self):
        if self.sigma_L not in (1, -1) or self.sigma_R not in (1, -1):
            raise ValueError("signature entries must be +1 or -1")

    @classmethod
    def for_point(cls, point: SpectralPoint) -> "BCSignature":
        return cls(*point.signature())


BOUND = BCSignature(1, -1)
ANTI_BOUND = BCSignature(-1, 1)


@dataclass(frozen=True)
class InnerSolution:
    kappa: float
    eps: float
    signature: BCSignature | None
    grid: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    residual_F: float
    int_u2: float
    int_u4: float
    int_up2: float
    dF_dkappa: float = math.nan
    dF_deps: float = math.nan
    dF_dslope: float = math.nan
    left_slope: float = math.nan
    E: float | None = None
    parity: Parity | None = None

    @property
    def energy(self) -> float:
        return -self.kappa ** 2 if self.E is None else self.E

    @property
    def u_left(self) -> float:
        return float(self.u[0])

    @property
    def u_right(self) -> float:
        return float(self.u[-1])

    @property
    def up_left(self) -> float:
        return float(self.u_prime[0])

    @property
    def up_right(self) -> float:
        return float(self.u_prime[-1])

    def flux(self, side: int) -> float:
        """``u'^2 + (eps/2) u^4 + E u^2`` at ``x = side * b``; zero on a solution."""
        u, up = (self.u_right, self.up_right) if side > 0 else (self.u_left, self.up_left)
        return up * up + 0.5 * self.eps * u ** 4 + self.energy * u * u

    def tolerance(self) -> float:
        return 1e-10 * (1 + abs(self.u_right) * abs(self.kappa))


def _grid_or_none(grid):
    return None if grid is None else np.asarray(grid, dtype=float)


@dataclass(frozen=True)
class _Shot:
    """End values of the IVP from ``-b`` and their sensitivities to ``kappa``, ``eps`` and ``s``."""
    u: float
    du: float
    u_k: float
    du_k: float
    u_e: float
    du_e: float
    u_s: float
    du_s: float
    i2: float
    i4: float
    ip2: float
    xs: np.ndarray
    ys: np.ndarray


def _ivp(spec: PotentialSpec, kappa: float, eps: float, slope: float, grid=None) -> _Shot:
    """Integrate ``u'' = (V + kappa^2) u - eps u^3`` with ``u(-b) = 1``, ``u'(-b) = slope``."""
    V = spec.scalar()
    k2 = kappa * kappa

    def rhs(x, y):
        u, du, pk, dpk, pe, dpe, ps, dps = y[:8]
        u2 = u * u
        lin = V(x) + k2
        jac = lin - 3.0 * eps * u2
        return [du, lin * u - eps * u2 * u,
                dpk, jac * pk + 2.0 * kappa * u,
                dpe, jac * pe - u2 * u,
                dps, jac * ps,
                u2, u2 * u2, du * du]

    y0 = np.array([1.0, slope, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    b = spec.b
    x_eval = _grid_or_none(grid)
    if x_eval is not None:
        x_eval = np.union1d(x_eval, [-b, b])
    y, xs, ys = _ode.integrate(rhs, y0, -b, b, spec.interior_breaks(), x_eval=x_eval)
    return _Shot(*(float(v) for v in y), xs=xs, ys=ys)


def _inner(shot: _Shot, kappa, eps, slope, signature, F, F_k, F_e, F_s=math.nan) -> InnerSolution:
    return InnerSolution(kappa=float(kappa), eps=float(eps), signature=signature, grid=shot.xs,
                         u=shot.ys[0].copy(), u_prime=shot.ys[1].copy(), residual_F=F,
                         int_u2=shot.i2, int_u4=shot.i4, int_up2=shot.ip2, dF_dkappa=F_k,
                         dF_deps=F_e, dF_dslope=F_s, left_slope=float(slope))


def shoot(spec: PotentialSpec, kappa: float, eps: float, signature: BCSignature,
          grid=None) -> InnerSolution:
    """Integrate from ``-b`` to ``b`` and evaluate the right-end residual and its derivatives.

    ``F = u'(b) - sigma_R u(b) sqrt(kappa^2 - eps u(b)^2 / 2)``.
    """
    if kappa == 0:
        raise ValueError("kappa must be non-zero")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    r2 = kappa * kappa - 0.5 * eps
    if r2 <= 0:
        raise BCOutOfRange(f"kappa^2 - eps/2 = {r2:.3e} <= 0 at the left end")
    r = math.sqrt(r2)
    sl, sr = signature.sigma_L, signature.sigma_R
    sh = _ivp(spec, kappa, eps, sl * r, grid)
    # total derivatives through the left boundary slope sigma_L r(kappa, eps)
    p = sh.u_k + sh.u_s * sl * kappa / r
    dp = sh.du_k + sh.du_s * sl * kappa / r
    q = sh.u_e - sh.u_s * sl / (4.0 * r)
    dq = sh.du_e - sh.du_s * sl / (4.0 * r)
    u, du = sh.u, sh.du
    R2 = kappa * kappa - 0.5 * eps * u * u
    if R2 < 0:
        raise BCOutOfRange(f"kappa^2 - eps u(b)^2/2 = {R2:.3e} < 0 at the right end")
    R = math.sqrt(R2)
    F = du - sr * u * R
    if R > 0:
        F_k = dp - sr * (p * R + u * (kappa - 0.5 * eps * u * p) / R)
        F_e = dq - sr * (q * R + u * (-0.25 * u * u - 0.5 * eps * u * q) / R)
    else:
        F_k = F_e = math.nan
    return _inner(sh, kappa, eps, sl * r, signature, F, F_k, F_e)


def shoot_slope(spec: PotentialSpec, kappa: float, slope: float, grid=None) -> InnerSolution:
    """Shoot with the left log-derivative ``s = u'(-b)`` as unknown and ``eps = 2 (kappa^2 - s^2)``.

    The residual is the right-end flux ``G = u'(b)^2 + (eps/2) u(b)^4 - kappa^2 u(b)^2``;
    ``dF_dkappa`` and ``dF_dslope`` hold its partial derivatives. Unlike :func:`shoot`
    this form has no square-root branch points, so it stays regular when a soliton
    centre crosses an end of the support.
    """
    if kappa == 0:
        raise ValueError("kappa must be non-zero")
    eps = 2.0 * (kappa * kappa - slope * slope)
    if eps < 0:
        raise BCOutOfRange(f"|u'(-b)/u(-b)| = {abs(slope):.6g} exceeds |kappa| = {abs(kappa):.6g}")
    sh = _ivp(spec, kappa, eps, slope, grid)
    u, du = sh.u, sh.du
    G = du * du + 0.5 * eps * u ** 4 - kappa * kappa * u * u

    def dG(u_t, du_t, eps_t, kappa_t):
        return (2 * du * du_t + 0.5 * eps_t * u ** 4 + 2 * eps * u ** 3 * u_t
                - 2 * kappa * kappa_t * u * u - 2 * kappa * kappa * u * u_t)

    G_k = dG(sh.u_k + 4 * kappa * sh.u_e, sh.du_k + 4 * kappa * sh.du_e, 4 * kappa, 1.0)
    G_s = dG(sh.u_s - 4 * slope * sh.u_e, sh.du_s - 4 * slope * sh.du_e, -4 * slope, 0.0)
    G_e = dG(sh.u_e, sh.du_e, 1.0, 0.0)
    return _inner(sh, kappa, eps, slope, None, G, G_k, G_e, G_s)


def flux_tolerance(sol: "InnerSolution") -> float:
    """Convergence threshold for the flux residual of :func:`shoot_slope`."""
    return 1e-10 * (sol.up_right ** 2 + (sol.kappa * sol.u_right) ** 2) + 1e-300


def reshoot(spec: PotentialSpec, inner: "InnerSolution", grid) -> "InnerSolution":
    """Recompute an inner solution on ``grid`` from its own initial data."""
    if inner.E is not None:
        return threshold_inner(spec, inner.E, inner.eps, inner.parity, grid=grid)
    sh = _ivp(spec, inner.kappa, inner.eps, inner.left_slope, grid)
    return _inner(sh, inner.kappa, inner.eps, inner.left_slope, inner.signature, inner.residual_F,
                  inner.dF_dkappa, inner.dF_deps, inner.dF_dslope)


def residual_F(spec, kappa, eps, signature) -> float:
    return shoot(spec, kappa, eps, signature).residual_F


def _try_shoot(spec, kappa, eps, signature):
    try:
        return shoot(spec, kappa, eps, signature)
    except (BCOutOfRange, IntegrationFailure):
        return None


def solve_kappa(spec: PotentialSpec, eps: float, signature: BCSignature, kappa_guess: float,
                grid=None, max_iter: int = MAX_NEWTON) -> InnerSolution:
    """Damped Newton on ``kappa -> F(kappa, eps)`` keeping the sign of ``kappa``."""
    sol = shoot(spec, kappa_guess, eps, signature)
    if not abs(sol.dF_dkappa) > 1e-8:
        raise Degenerate(f"dF/dkappa = {sol.dF_dkappa:.3e} at the initial guess")
    kappa = kappa_guess
    for _ in range(max_iter):
        if abs(sol.residual_F) < sol.tolerance():
            return shoot(spec, kappa, eps, signature, grid=grid) if grid is not None else sol
        d = sol.dF_dkappa
        if not abs(d) > 1e-300 or not math.isfinite(d):
            raise Degenerate("dF/dkappa vanished during Newton")
        step = -sol.residual_F / d
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            trial = kappa + lam * step
            if trial * kappa > 0:
                new = _try_shoot(spec, trial, eps, signature)
                if new is not None and abs(new.residual_F) < max(abs(sol.residual_F), sol.tolerance()) * 1.5:
                    break
            lam *= 0.5
        else:
            raise NewtonDiverged(f"no acceptable step from kappa={kappa:.6g} at eps={eps:.3e}")
        kappa, sol = trial, new
        if abs(lam * step) < 1e-15 * abs(kappa) and abs(sol.residual_F) < 100 * sol.tolerance():
            return shoot(spec, kappa, eps, signature, grid=grid) if grid is not None else sol
    raise NewtonDiverged(f"Newton in kappa did not converge in {max_iter} iterations")


def solve_eps(spec: PotentialSpec, kappa: float, signature: BCSignature, eps_guess: float,
              grid=None, max_iter: int = MAX_NEWTON) -> InnerSolution:
    """Newton on ``eps -> F(kappa, eps)`` at fixed ``kappa`` (used for branch cross-checks)."""
    eps = eps_guess
    sol = shoot(spec, kappa, eps, signature)
    for _ in range(max_iter):
        if abs(sol.residual_F) < sol.tolerance():
            return shoot(spec, kappa, eps, signature, grid=grid) if grid is not None else sol
        d = sol.dF_deps
        if not abs(d) > 1e-300:
            raise Degenerate("dF/deps vanished")
        step = -sol.residual_F / d
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            trial = eps + lam * step
            if trial > 0:
                new = _try_shoot(spec, kappa, trial, signature)
                if new is not None and abs(new.residual_F) < max(abs(sol.residual_F), sol.tolerance()) * 1.5:
                    break
            lam *= 0.5
        else:
            raise NewtonDiverged(f"no acceptable step from eps={eps:.6g}")
        eps, sol = trial, new
    raise NewtonDiverged(f"Newton in eps did not converge in {max_iter} iterations")


def dF_dkappa_formula(point: SpectralPoint) -> float:
    """Closed-form ``dF/dkappa`` at ``(kappa_*, 0)``: the non-degeneracy value over ``U_*(b)``."""
    if point.mode_trace is None or point.nondegeneracy is None:
        raise NotOnAxis("the point needs mode_and_nondegeneracy first")
    if point.cls is SpectralClass.THRESHOLD:
        raise NotOnAxis("no formula at the threshold")
    return point.nondegeneracy / point.mode_trace.U_at_plus_b


# ---------------------------------------------------------------------------
# threshold resonance, symmetric potentials
# ---------------------------------------------------------------------------

def _half_shoot(spec, E, eps, parity: Parity, grid_half=None):
    V = spec.scalar()

    def rhs(x, y):
        u, du, g, dg = y[:4]
        u2 = u * u
        lin = V(x) - E
        return [du, lin * u - eps * u2 * u,
                dg, (lin - 3.0 * eps * u2) * g - u,
                u2, u2 * u2, du * du]

    y0 = [0.0, 1.0] if parity is Parity.ODD else [1.0, 0.0]
    y0 = np.array(y0 + [0.0] * 5)
    b = spec.b
    x_eval = None if grid_half is None else np.union1d(grid_half, [0.0, b])
    y, xs, ys = _ode.integrate(rhs, y0, 0.0, b, [x for x in spec.interior_breaks() if x > 0], x_eval=x_eval)
    u, du, g, dg = (float(v) for v in y[:4])
    F = du * du + E * u * u + 0.5 * eps * u ** 4
    F_E = 2 * du * dg + u * u + 2 * E * u * g + 2 * eps * u ** 3 * g
    return F, F_E, y, xs, ys


def solve_threshold_symmetric(spec: PotentialSpec, eps: float, parity: Parity, E_guess: float,
                              grid=None, max_iter: int = MAX_NEWTON) -> InnerSolution:
    """Newton on ``E -> F(E, eps) = u'(b)^2 + E u(b)^2 + (eps/2) u(b)^4`` for even potentials.

    The half-line profile starts at the origin with ``(u, u') = (0, 1)`` for odd
    and ``(1, 0)`` for even parity and is extended to ``[-b, 0]`` by symmetry.
    """
    if not spec.is_even():
        raise NotSymmetric("threshold branches need an even potential")
    if not eps > 0 or not E_guess < 0:
        raise ValueError("need eps > 0 and E_guess < 0")
    parity = Parity(parity)
    E = E_guess
    F, F_E, *_ = _half_shoot(spec, E, eps, parity)
    for _ in range(max_iter):
        step = -F / F_E
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            trial = E + lam * step
            if trial < 0:
                try:
                    nF, nFE, *_ = _half_shoot(spec, trial, eps, parity)
                except IntegrationFailure:
                    nF = math.inf
                if abs(nF) <= abs(F) or abs(lam * step) < 1e-15 * abs(E):
                    break
            lam *= 0.5
        else:
            raise NewtonDiverged(f"threshold Newton stalled at E={E:.6g}")
        done = abs(lam * step) <= 4e-16 * abs(E) or nF == 0
        E, F, F_E = trial, nF, nFE
        if done or abs(lam * step) < 1e-14 * abs(E):
            break
    else:
        raise NewtonDiverged("threshold Newton did not converge")
    return threshold_inner(spec, E, eps, parity, grid=grid)


def threshold_inner(spec: PotentialSpec, E: float, eps: float, parity: Parity, grid=None) -> InnerSolution:
    """Symmetric inner profile at given ``(E, eps)``, sampled at ``grid`` (or the solver steps)."""
    parity = Parity(parity)
    half = None if grid is None else np.abs(np.asarray(grid, dtype=float))
    _, _, y, xs, ys = _half_shoot(spec, E, eps, parity, grid_half=half)
    sgn = -1.0 if parity is Parity.ODD else 1.0
    # mirror: u(-x) = sgn u(x), u'(-x) = -sgn u'(x); xs starts at 0
    mx = -xs[:0:-1]
    mu = sgn * ys[0][:0:-1]
    mup = -sgn * ys[1][:0:-1]
    grid_full = np.concatenate([mx, xs])
    u = np.concatenate([mu, ys[0]])
    up = np.concatenate([mup, ys[1]])
    if grid is not None:
        keep = np.isin(grid_full, np.union1d(grid, [-spec.b, spec.b]))
        grid_full, u, up = grid_full[keep], u[keep], up[keep]
    F_final = float(up[-1] ** 2 + E * u[-1] ** 2 + 0.5 * eps * u[-1] ** 4)
    return InnerSolution(kappa=math.sqrt(-E), eps=float(eps), signature=None, grid=grid_full, u=u,
                         u_prime=up, residual_F=F_final, int_u2=2 * float(y[4]), int_u4=2 * float(y[5]),
                         int_up2=2 * float(y[6]), E=float(E), parity=parity)


def threshold_slope(spec: PotentialSpec, parity: Parity) -> float:
    """Linear slope ``E'(0) = -u_*(b)^2 / 2`` of the threshold branch for the normalised mode."""
    F, F_E, y, _, _ = _half_shoot(spec, 0.0, 0.0, Parity(parity))
    return -0.5 * float(y[0]) ** 2


__all__ = [
    "BCSignature", "BOUND", "ANTI_BOUND", "InnerSolution", "shoot", "residual_F", "solve_kappa",
    "solve_eps", "shoot_slope", "flux_tolerance", "reshoot", "dF_dkappa_formula", "solve_threshold_symmetric", "threshold_inner", "threshold_slope"
]
