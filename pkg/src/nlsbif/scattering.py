"""Jost solutions, Wronskians and scattering coefficients.

For ``k`` in the complex plane the Jost solutions are

    f_+(x, k) = exp(+ikx)  for x >= b,      f_-(x, k) = exp(-ikx)  for x <= -b,

continued through the support by integrating ``-f'' + V f = k^2 f``. From them

    w(k)   = f_- f_+' - f_-' f_+
    s_-(k) = f_+(x, k) f_-'(x, -k) - f_+'(x, k) f_-(x, -k)
    s_+(k) = s_-(-k)

and ``t = 2ik / w``, ``r_pm = s_pm / w``.
"""
from __future__ import annotations

import cmath
import enum
import functools
from dataclasses import dataclass

import numpy as np

from . import _ode
from .config import tolerances
from .errors import DeltaNotEvaluable, NotOnAxis
from .potential import PotentialKind, PotentialSpec

RESCALE_THRESHOLD = 20.0
EVAL_POINT = 0.0


class Side(enum.IntEnum):
    PLUS = 1
    MINUS = -1


class Target(str, enum.Enum):
    W = "w"
    S_MINUS = "s_minus"
    S_PLUS = "s_plus"


@dataclass(frozen=True)
class JostValue:
    f: complex
    f_prime: complex
    side: Side
    x: float
    df_dk: complex | None = None
    df_prime_dk: complex | None = None


@dataclass(frozen=True)
class ScatteringData:
    k: complex
    w: complex
    s_minus: complex
    s_plus: complex
    t: complex | None
    r_minus: complex | None
    r_plus: complex | None

    def row(self) -> list[float]:
        nan = complex(float("nan"), float("nan"))
        vals = [self.k, self.w, self.s_minus, self.s_plus,
                nan if self.t is None else self.t,
                nan if self.r_minus is None else self.r_minus,
                nan if self.r_plus is None else self.r_plus]
        return [p for v in vals for p in (v.real, v.imag)]


CSV_HEADER = ["k_re", "k_im", "w_re", "w_im", "sm_re", "sm_im", "sp_re", "sp_im",
              "t_re", "t_im", "rm_re", "rm_im", "rp_re", "rp_im"]


def _check(spec: PotentialSpec):
    if spec.kind is PotentialKind.DELTA:
        raise DeltaNotEvaluable("delta potentials are handled by nlsbif.oracle")


@functools.lru_cache(maxsize=8192)
def _jost(spec: PotentialSpec, k: complex, s: int, x: float, rtol: float, atol: float):
    """(f, f', df/dk, df'/dk) of the Jost solution on side ``s`` at ``x``."""
    b = spec.b
    x0 = s * b
    if s * x >= b:
        e = cmath.exp(1j * s * k * x)
        return (e, 1j * s * k * e, 1j * s * x * e, e * (1j * s - k * x))
    if s * x < -b:
        raise ValueError(f"x={x} lies beyond the far edge of the support")
    V = spec.scalar()
    isk = 1j * s * k
    if abs(k.imag) * 2 * b > RESCALE_THRESHOLD:
        # integrate m = f exp(-iskx): m'' = V m - 2isk m'
        def rhs(t, y):
            m, dm, mk, dmk = y
            v = V(t)
            return [dm, v * m - 2 * isk * dm, dmk, v * mk - 2 * isk * dmk - 2j * s * dm]

        y0 = np.array([1, 0, 0, 0], dtype=complex)
        y, _, _ = _ode.integrate(rhs, y0, x0, x, spec.interior_breaks(), rtol=rtol, atol=atol)
        m, dm, mk, dmk = y
        e = cmath.exp(isk * x)
        fp = isk * m + dm
        return (e * m, e * fp, e * (1j * s * x * m + mk),
                e * (1j * s * x * fp + 1j * s * m + isk * mk + dmk))

    k2 = k * k

    def rhs(t, y):
        f, df, g, dg = y
        c = V(t) - k2
        return [df, c * f, dg, c * g - 2 * k * f]

    e = cmath.exp(1j * k * b)
    y0 = np.array([e, isk * e, 1j * b * e, e * (1j * s - k * x0)], dtype=complex)
    y, _, _ = _ode.integrate(rhs, y0, x0, x, spec.interior_breaks(), rtol=rtol, atol=atol)
    return tuple(complex(v) for v in y)


def _jost_tuple(spec, k, s, x):
    _check(spec)
    tol = tolerances()
    return _jost(spec, complex(k), int(s), float(x), tol.rtol, tol.atol)


def jost_plus(spec: PotentialSpec, k: complex, x_eval: float = EVAL_POINT) -> JostValue:
    """Value of ``f_+(x_eval, k)`` and its x- and k-derivatives."""
    f, fp, fk, fpk = _jost_tuple(spec, k, 1, x_eval)
    return JostValue(f, fp, Side.PLUS, float(x_eval), fk, fpk)


def jost_minus(spec: PotentialSpec, k: complex, x_eval: float = EVAL_POINT) -> JostValue:
    """Value of ``f_-(x_eval, k)`` and its x- and k-derivatives."""
    f, fp, fk, fpk = _jost_tuple(spec, k, -1, x_eval)
    return JostValue(f, fp, Side.MINUS, float(x_eval), fk, fpk)


def wronskian(spec: PotentialSpec, k: complex, x: float = EVAL_POINT, derivative: bool = False):
    """``w(k)``, optionally with ``dw/dk`` from the variational equations."""
    fp, dfp, fpk, dfpk = _jost_tuple(spec, k, 1, x)
    fm, dfm, fmk, dfmk = _jost_tuple(spec, k, -1, x)
    w = fm * dfp - dfm * fp
    if not derivative:
        return w
    return w, fmk * dfp + fm * dfpk - dfmk * fp - dfm * fpk


def s_minus(spec: PotentialSpec, k: complex, x: float = EVAL_POINT, derivative: bool = False):
    """``s_-(k)``; its zeros are right transmission resonances."""
    k = complex(k)
    fp, dfp, fpk, dfpk = _jost_tuple(spec, k, 1, x)
    fm, dfm, fmk, dfmk = _jost_tuple(spec, -k, -1, x)
    s = fp * dfm - dfp * fm
    if not derivative:
        return s
    # d/dk of f_-(x, -k) is -fmk
    return s, fpk * dfm - fp * dfmk - dfpk * fm + dfp * fmk


def s_plus(spec: PotentialSpec, k: complex, x: float = EVAL_POINT, derivative: bool = False):
    """``s_+(k) = f_+(x,-k) f_-'(x,k) - f_+'(x,-k) f_-(x,k)``."""
    k = complex(k)
    fp, dfp, fpk, dfpk = _jost_tuple(spec, -k, 1, x)
    fm, dfm, fmk, dfmk = _jost_tuple(spec, k, -1, x)
    s = fp * dfm - dfp * fm
    if not derivative:
        return s
    return s, -fpk * dfm + fp * dfmk + dfpk * fm - dfp * fmk


_TARGETS = {Target.W: wronskian, Target.S_MINUS: s_minus, Target.S_PLUS: s_plus}


def target_value(spec: PotentialSpec, target: Target, k: complex, derivative: bool = False):
    return _TARGETS[Target(target)](spec, k, derivative=derivative)


def scattering_data(spec: PotentialSpec, k: complex, x: float = EVAL_POINT) -> ScatteringData:
    """All Wronskians and, where defined, ``t`` and ``r_pm`` at ``k``."""
    k = complex(k)
    w = wronskian(spec, k, x)
    sm = s_minus(spec, k, x)
    sp = s_plus(spec, k, x)
    if w != 0 and k != 0:
        t, rm, rp = 2j * k / w, sm / w, sp / w
    else:
        t = rm = rp = None
    return ScatteringData(k, w, sm, sp, t, rm, rp)


def axis_value(spec: PotentialSpec, target: Target, kappa: float, derivative: bool = False):
    """Real restriction ``kappa -> target(i kappa)``, optionally with d/dkappa."""
    out = target_value(spec, target, 1j * float(kappa), derivative=derivative)
    if not derivative:
        return out.real
    val, dval = out
    return val.real, (1j * dval).real


def wronskian_on_axis(spec: PotentialSpec, kappa: float) -> float:
    """``w(i kappa)``, real for real potentials (free case: ``-2 kappa``)."""
    w = wronskian(spec, 1j * float(kappa))
    if abs(w.imag) > 1e-8 * max(1.0, abs(w.real)):
        raise NotOnAxis(f"w(i kappa) has imaginary part {w.imag:.3e}")
    return w.real


def unitarity_defect(spec: PotentialSpec, ks) -> np.ndarray:
    """``| |r_-|^2 + |t|^2 - 1 |`` on real wavenumbers."""
    out = []
    for k in np.asarray(ks, dtype=float):
        d = scattering_data(spec, k)
        out.append(abs(abs(d.r_minus) ** 2 + abs(d.t) ** 2 - 1.0))
    return np.array(out)
