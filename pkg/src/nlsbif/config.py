"""Numerical tolerances, overridable per call-tree through a context manager."""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    rtol: float = 1e-11
    atol: float = 1e-13
    threshold_rel: float = 1e-6
    degenerate: float = 1e-6

    def __post_init__(self):
        for field in dataclasses.fields(self):
            if not getattr(self, field.name) > 0:
                raise ValueError(f"tolerance {field.name} must be positive")


_CURRENT = contextvars.ContextVar("nlsbif_tolerances", default=Tolerances())


def tolerances() -> Tolerances:
    return _CURRENT.get()


@contextlib.contextmanager
def override_tolerances(**changes):
    """Temporarily replace fields of the active :class:`Tolerances`.

    >>> with override_tolerances(rtol=1e-9):
    ...     tolerances().rtol
    1e-09
    """
    token = _CURRENT.set(dataclasses.replace(_CURRENT.get(), **changes))
    try:
        yield _CURRENT.get()
    finally:
        _CURRENT.reset(token)
