import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nlsbif.errors import ConfigError, DeltaNotEvaluable
from nlsbif.potential import (delta, double_barrier, envelope, envelope_argmax, evaluate, from_descriptor,
                              max_of_envelope, piecewise_cubic, smooth_well, square_well)


def test_square_well_values():
    assert evaluate(square_well(math.pi ** 2 / 4), 0.0) == pytest.approx(-math.pi ** 2 / 4)
    assert evaluate(square_well(2.0), 1.5) == 0.0


def test_smooth_well_peak_is_minus_alpha():
    assert evaluate(smooth_well(1.0, 0.0), 0.0) == pytest.approx(-1.0, abs=1e-12)
    x = np.linspace(-1, 1, 20001)
    assert np.min(evaluate(smooth_well(1.0, 0.0), x)) == pytest.approx(-1.0, abs=1e-12)


def test_envelope_maximum_against_grid_scan():
    x = np.linspace(-1, 1, 100001)
    for beta in (0.0, -11.0, 2.5):
        grid_max = float(np.max(envelope(x, beta)))
        m = max_of_envelope(smooth_well(1.0, beta))
        assert m == pytest.approx(grid_max, rel=1e-9)
        assert 0 < m <= 1
    assert max_of_envelope(smooth_well(1.0, 0.0)) == pytest.approx(1.0)
    assert envelope_argmax(smooth_well(1.0, 0.0)) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("spec", [square_well(2.0), smooth_well(3.0, -11.0), double_barrier(0.7)])
def test_zero_outside_support(spec):
    x = np.concatenate([np.linspace(spec.b + 1e-12, spec.b + 10, 50), -np.linspace(spec.b + 1e-12, spec.b + 10, 50)])
    assert np.all(evaluate(spec, x) == 0.0)


def test_even_specs():
    x = np.linspace(-1, 1, 1001)
    v = evaluate(smooth_well(5.0, 0.0), x)
    assert np.max(np.abs(v - v[::-1])) <= 4 * np.finfo(float).eps * 5.0
    assert smooth_well(5.0, 0.0).is_even()
    assert not smooth_well(5.0, -0.5).is_even()
    assert double_barrier(0.5).is_even()


def test_square_well_integral():
    spec = square_well(2.0, 0.7)
    val, _ = quad(lambda x: evaluate(spec, x), -0.7, 0.7, epsabs=1e-13)
    assert val == pytest.approx(-2 * 2.0 * 0.7, abs=1e-10)


def test_piecewise_continuity_checked():
    piecewise_cubic([-1, 0, 1], [[0, 1, 0, 0], [1, -1, 0, 0]])
    with pytest.raises(ConfigError):
        piecewise_cubic([-1, 0, 1], [[0, 1, 0, 0], [2, -1, 0, 0]])


def test_delta_has_no_pointwise_values():
    with pytest.raises(DeltaNotEvaluable):
        evaluate(delta(1.0), 0.3)


def test_descriptor_round_trip():
    for spec in (square_well(2.0, 1.5), smooth_well(4.0, -3.0), double_barrier(0.5)):
        again = from_descriptor(spec.descriptor())
        assert again.digest() == spec.digest()
        x = np.linspace(-2, 2, 101)
        np.testing.assert_allclose(evaluate(again, x), evaluate(spec, x), rtol=0, atol=1e-15)
    with pytest.raises(ConfigError):
        from_descriptor({"kind": "nope"})


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 30.0), st.floats(-15.0, 15.0), st.floats(-3.0, 3.0))
def test_smooth_well_bounded_by_alpha(alpha, beta, x):
    v = evaluate(smooth_well(alpha, beta), x)
    assert -alpha * (1 + 1e-12) <= v <= 0.0
