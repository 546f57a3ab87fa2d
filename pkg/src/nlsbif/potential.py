"""Real, compactly supported potentials on [-b, b].

Four families are supported:

* ``SQUARE_WELL``: ``V = -alpha`` on ``|x| <= b`` (a barrier when ``alpha < 0``).
* ``SMOOTH_WELL``: ``V = -alpha W(x; beta) / max W`` on ``|x| <= 1`` with
  ``W(x; beta) = exp(-(x - beta)^2 / 4) (1 + cos(pi x)) / 2``.
* ``PIECEWISE_CUBIC``: user-tabulated cubic cells, continuous at interior knots.
* ``DELTA``: ``alpha * delta(x)``; only the closed forms in :mod:`nlsbif.oracle`
  know how to handle it.
"""
from __future__ import annotations

import bisect
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import ConfigError, DeltaNotEvaluable, WrongKind

CONTINUITY_TOL = 1e-8


class PotentialKind(str, enum.Enum):
    SQUARE_WELL = "square_well"
    SMOOTH_WELL = "smooth_well"
    PIECEWISE_CUBIC = "piecewise"
    DELTA = "delta"


@dataclass(frozen=True)
class PotentialSpec:
    kind: PotentialKind
    alpha: float = 0.0
    beta: float = 0.0
    half_width_b: float = 1.0
    breakpoints: tuple[float, ...] = ()
    coeffs: tuple[tuple[float, float, float, float], ...] = ()
    normalizer: float = field(default=1.0, compare=False)

    @property
    def b(self) -> float:
        return self.half_width_b

    def __call__(self, x):
        return evaluate(self, x)

    def interior_breaks(self) -> tuple[float, ...]:
        """Points strictly inside (-b, b) where V is not smooth."""
        if self.kind is PotentialKind.PIECEWISE_CUBIC:
            return self.breakpoints[1:-1]
        return ()

    def scalar(self):
        """Return a fast ``float -> float`` evaluator valid on [-b, b]."""
        kind = self.kind
        if kind is PotentialKind.SQUARE_WELL:
            v = -self.alpha
            return lambda x: v
        if kind is PotentialKind.SMOOTH_WELL:
            scale = -self.alpha / self.normalizer
            beta = self.beta
            exp, cos, pi = math.exp, math.cos, math.pi
            return lambda x: scale * exp(-0.25 * (x - beta) ** 2) * 0.5 * (1.0 + cos(pi * x))
        if kind is PotentialKind.PIECEWISE_CUBIC:
            knots = self.breakpoints
            coeffs = self.coeffs

            def v(x):
                i = min(max(bisect.bisect_right(knots, x) - 1, 0), len(coeffs) - 1)
                c0, c1, c2, c3 = coeffs[i]
                t = x - knots[i]
                return c0 + t * (c1 + t * (c2 + t * c3))

            return v
        raise DeltaNotEvaluable("the delta potential has no pointwise values")

    def is_zero(self) -> bool:
        """True for the free operator (every coefficient vanishes)."""
        if self.kind is PotentialKind.PIECEWISE_CUBIC:
            return all(c == 0 for row in self.coeffs for c in row)
        return self.alpha == 0

    def is_even(self, tol: float = 1e-10, n: int = 2001) -> bool:
        if self.kind is PotentialKind.DELTA:
            return True
        x = np.linspace(0.0, self.b, n)
        return bool(np.max(np.abs(evaluate(self, x) - evaluate(self, -x))) <= tol)

    def descriptor(self) -> dict:
        d = {"kind": self.kind.value, "alpha": self.alpha, "b": self.b}
        if self.kind is PotentialKind.SMOOTH_WELL:
            d["beta"] = self.beta
        if self.kind is PotentialKind.PIECEWISE_CUBIC:
            d["breakpoints"] = list(self.breakpoints)
            d["coeffs"] = [list(c) for c in self.coeffs]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def square_well(alpha: float, b: float = 1.0) -> PotentialSpec:
    if not b > 0:
        raise ConfigError("half width b must be positive")
    return PotentialSpec(PotentialKind.SQUARE_WELL, alpha=float(alpha), half_width_b=float(b))


def smooth_well(alpha: float, beta: float = 0.0) -> PotentialSpec:
    norm = _envelope_max(float(beta))[0]
    return PotentialSpec(PotentialKind.SMOOTH_WELL, alpha=float(alpha), beta=float(beta),
                         half_width_b=1.0, normalizer=norm)


def delta(alpha: float) -> PotentialSpec:
    return PotentialSpec(PotentialKind.DELTA, alpha=float(alpha), half_width_b=0.0)


def piecewise_cubic(breakpoints: Sequence[float], coeffs: Sequence[Sequence[float]]) -> PotentialSpec:
    """Build a potential from cubic cells ``c0 + c1 t + c2 t^2 + c3 t^3``, ``t = x - x_i``.

    The knots must be increasing and symmetric about the origin in extent
    (first knot ``-b``, last knot ``+b``); values must agree across interior
    knots to within 1e-8.
    """
    knots = tuple(float(x) for x in breakpoints)
    cells = tuple(tuple(float(c) for c in (list(row) + [0.0] * 4)[:4]) for row in coeffs)
    if len(knots) < 2 or len(cells) != len(knots) - 1:
        raise ConfigError("need n+1 breakpoints for n cubic cells")
    if any(b <= a for a, b in zip(knots, knots[1:])):
        raise ConfigError("breakpoints must be strictly increasing")
    if not math.isclose(knots[0], -knots[-1], abs_tol=1e-12) or knots[-1] <= 0:
        raise ConfigError("breakpoints must span [-b, b] with b > 0")
    for i in range(1, len(knots) - 1):
        c0, c1, c2, c3 = cells[i - 1]
        t = knots[i] - knots[i - 1]
        left = c0 + t * (c1 + t * (c2 + t * c3))
        right = cells[i][0]
        if abs(left - right) > CONTINUITY_TOL:
            raise ConfigError(f"piecewise potential is discontinuous at x={knots[i]:g}")
    return PotentialSpec(PotentialKind.PIECEWISE_CUBIC, half_width_b=knots[-1],
                         breakpoints=knots, coeffs=cells)


def double_barrier(height: float, inner: float = 0.5, peak: float = 1.0, b: float = 1.5) -> PotentialSpec:
    """Two tent-shaped barriers of the given height on ``inner <= |x| <= b``, zero in between."""

    def ramp(x0, x1, v0, v1):
        return [v0, (v1 - v0) / (x1 - x0), 0.0, 0.0]

    knots = [-b, -peak, -inner, inner, peak, b]
    cells = [ramp(-b, -peak, 0.0, height), ramp(-peak, -inner, height, 0.0), [0.0, 0.0, 0.0, 0.0],
             ramp(inner, peak, 0.0, height), ramp(peak, b, height, 0.0)]
    return piecewise_cubic(knots, cells)


def envelope(x, beta: float):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.25 * (x - beta) ** 2) * 0.5 * (1.0 + np.cos(np.pi * x))


def _envelope_max(beta: float, n: int = 4001) -> tuple[float, float]:
    x = np.linspace(-1.0, 1.0, n)
    w = envelope(x, beta)
    i = int(np.argmax(w))
    if i == 0 or i == n - 1:
        return float(w[i]), float(x[i])
    xmax = optimize.golden(lambda t: -float(envelope(t, beta)), brack=(x[i - 1], x[i], x[i + 1]), tol=1e-12)
    return float(envelope(xmax, beta)), float(xmax)


def max_of_envelope(spec: PotentialSpec) -> float:
    """Maximum of the smooth-well envelope over ``|x| <= 1``."""
    if spec.kind is not PotentialKind.SMOOTH_WELL:
        raise WrongKind("max_of_envelope needs a smooth well")
    return _envelope_max(spec.beta)[0]


def envelope_argmax(spec: PotentialSpec) -> float:
    if spec.kind is not PotentialKind.SMOOTH_WELL:
        raise WrongKind("envelope_argmax needs a smooth well")
    return _envelope_max(spec.beta)[1]


def evaluate(spec: PotentialSpec, x):
    """Evaluate V at ``x`` (scalar or array); exactly zero for ``|x| > b``."""
    if spec.kind is PotentialKind.DELTA:
        raise DeltaNotEvaluable("the delta potential has no pointwise values")
    xa = np.asarray(x, dtype=float)
    inside = np.abs(xa) <= spec.b
    if spec.kind is PotentialKind.SQUARE_WELL:
        v = np.where(inside, -spec.alpha, 0.0)
    elif spec.kind is PotentialKind.SMOOTH_WELL:
        v = np.where(inside, -spec.alpha * envelope(xa, spec.beta) / spec.normalizer, 0.0)
    else:
        knots = np.asarray(spec.breakpoints)
        c = np.asarray(spec.coeffs)
        idx = np.clip(np.searchsorted(knots, xa, side="right") - 1, 0, len(c) - 1)
        t = xa - knots[idx]
        cell = c[idx]
        poly = cell[..., 0] + t * (cell[..., 1] + t * (cell[..., 2] + t * cell[..., 3]))
        v = np.where(inside, poly, 0.0)
    v = v + 0.0  # normalise -0.0
    return float(v) if np.ndim(v) == 0 else v


def from_descriptor(d: dict) -> PotentialSpec:
    """Build a spec from the JSON/TOML descriptor used by the CLI.

    Besides the four stored kinds, ``"double_barrier"`` is accepted as a
    shorthand: ``alpha`` is the barrier height and ``inner``, ``peak``, ``b``
    place the ramps (see :func:`double_barrier`).
    """
    if d.get("kind") == "double_barrier":
        return double_barrier(float(d.get("alpha", 0.5)), float(d.get("inner", 0.5)),
                              float(d.get("peak", 1.0)), float(d.get("b", 1.5)))
    try:
        kind = PotentialKind(d["kind"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad potential kind in {d!r}") from exc
    alpha = float(d.get("alpha", 0.0))
    if kind is PotentialKind.SQUARE_WELL:
        return square_well(alpha, float(d.get("b", 1.0)))
    if kind is PotentialKind.SMOOTH_WELL:
        return smooth_well(alpha, float(d.get("beta", 0.0)))
    if kind is PotentialKind.DELTA:
        return delta(alpha)
    if "breakpoints" not in d or "coeffs" not in d:
        raise ConfigError("piecewise potential needs 'breakpoints' and 'coeffs'")
    return piecewise_cubic(d["breakpoints"], d["coeffs"])
