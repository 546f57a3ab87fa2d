import math

import numpy as np
import pytest
from scipy.optimize import brentq

from nlsbif import oracle
from nlsbif.errors import NotOnAxis
from nlsbif.potential import double_barrier, smooth_well, square_well
from nlsbif.scattering import Target, s_minus, wronskian
from nlsbif.spectrum import (Box, Parity, SpectralClass, count_zeros_box, detect_threshold,
                             locate_complex_zeros, mode_and_nondegeneracy, mode_profile, scan_axis,
                             threshold_mode, threshold_parity)

FREE = square_well(0.0)


def _bound_kappa():
    return brentq(lambda k: math.sqrt(2 - k * k) * math.tan(math.sqrt(2 - k * k)) - k, 0.5, 1.3, xtol=1e-15)


def test_bound_state_scan(bound_point):
    assert bound_point.cls is SpectralClass.BOUND_STATE
    assert bound_point.kappa == pytest.approx(_bound_kappa(), abs=1e-10)
    assert bound_point.on_axis and bound_point.simple


def test_anti_bound_scan_against_oracle(well2):
    pts = scan_axis(well2, Target.W, -3.0, -0.05, 60)
    assert pts and all(p.cls is SpectralClass.ANTI_BOUND for p in pts)
    for p in pts:
        assert abs(oracle.squarewell_axis_w(2.0, 1.0, p.kappa)) < 1e-9


def test_free_has_no_zeros():
    assert scan_axis(FREE, Target.W, 0.05, 3.0, 30) == []
    assert scan_axis(FREE, Target.S_MINUS, -3.0, -0.05, 30) == []
    assert count_zeros_box(FREE, Target.W, Box(-1, 1, -1, -0.1)) == 0
    assert detect_threshold(FREE) is None


def test_scan_refuses_origin(well2):
    with pytest.raises(ValueError):
        scan_axis(well2, Target.W, -1.0, 1.0)


def test_axis_scan_agrees_with_thin_box(well2):
    pts = scan_axis(well2, Target.W, -3.0, -0.05, 60)
    assert count_zeros_box(well2, Target.W, Box(-0.1, 0.1, -3.0, -0.05)) == len(pts)


def test_boundary_zero_inflates(well2):
    # a zero exactly on the edge is handled by the inflation retries
    (pt,) = scan_axis(well2, Target.W, 0.05, 1.4, 50)
    n = count_zeros_box(well2, Target.W, Box(-0.2, 0.2, pt.kappa, pt.kappa + 0.3))
    assert n == 1


def test_square_well_alpha8_resonances():
    spec = square_well(8.0)
    box = Box(-6, 6, -3, -0.1)
    n = count_zeros_box(spec, Target.W, box)
    assert n % 2 == 0 and n > 0
    pts = locate_complex_zeros(spec, Target.W, box)
    assert len(pts) == n
    ks = [p.k_star for p in pts]
    for k in ks:
        assert min(abs(-k.conjugate() - q) for q in ks) < 1e-8
        small = Box(k.real - 0.05, k.real + 0.05, k.imag - 0.05, k.imag + 0.05)
        assert count_zeros_box(spec, Target.W, small) == 1
        assert abs(s_minus(spec, k)) > 1e-6
    assert all(p.cls is SpectralClass.COMPLEX_RESONANCE for p in pts)


def test_empty_box_gives_empty_list(well2):
    assert locate_complex_zeros(well2, Target.W, Box(2, 3, -0.5, -0.1)) == []


def test_coalescing_pair_leaves_axis():
    before = scan_axis(double_barrier(0.5), Target.W, -2.0, -0.05, 200)
    after = scan_axis(double_barrier(1.0), Target.W, -2.0, -0.05, 200)
    assert len(before) - len(after) == 2
    box = Box(-1.0, 1.0, -2.0, -0.05)
    assert count_zeros_box(double_barrier(0.5), Target.W, box) == count_zeros_box(double_barrier(1.0), Target.W, box)
    off = [p for p in locate_complex_zeros(double_barrier(1.0), Target.W, box) if not p.on_axis]
    assert len(off) == 2
    assert abs(off[0].k_star + off[1].k_star.conjugate()) < 1e-8


def test_threshold_detection(threshold_well):
    pt = detect_threshold(threshold_well)
    assert pt is not None and pt.cls is SpectralClass.THRESHOLD
    assert pt.parity is Parity.ODD
    assert detect_threshold(square_well(2.0)) is None
    with pytest.raises(NotOnAxis):
        pt.signature()


def test_threshold_mode_definite_parity(threshold_well):
    assert threshold_parity(threshold_well) is Parity.ODD
    x = np.linspace(0, 1, 21)
    y, xs, ys = threshold_mode(threshold_well, x_eval=np.concatenate([-x[::-1], x]))
    u = ys[0]
    assert np.max(np.abs(u + u[::-1])) < 1e-8


def test_threshold_mode_closed_form_integrals(threshold_well):
    # rescaled mode (2/pi) sin(pi x / 2): U(1) = 2/pi, int_0^1 U^2 = 2/pi^2, int_0^1 U^4 = 6/pi^4
    pt = detect_threshold(threshold_well)
    tr = pt.mode_trace
    scale = (2 / math.pi) / tr.U_at_plus_b
    assert tr.U_at_plus_b * scale == pytest.approx(2 / math.pi)
    assert 0.5 * tr.int_U2 * scale ** 2 == pytest.approx(2 / math.pi ** 2, rel=1e-9)
    assert 0.5 * tr.int_U4 * scale ** 4 == pytest.approx(6 / math.pi ** 4, rel=1e-9)


def test_alpha_star_smooth_well():
    """Zero-energy resonance of the beta = -11 smooth well near alpha = 24.04031."""
    def w0(alpha):
        return wronskian(smooth_well(alpha, -11.0), 0j).real

    a = brentq(w0, 23.5, 24.5, xtol=1e-10)
    assert abs(a - 24.04031) < 1e-3
    assert detect_threshold(smooth_well(a, -11.0)) is not None


def test_nondegeneracy_bound_state(well2, bound_point):
    pt = mode_and_nondegeneracy(well2, bound_point)
    assert pt.nondegeneracy > 0 and not pt.degenerate
    x = np.linspace(-1, 1, 5)
    _, U, _ = mode_profile(well2, pt, x)
    assert U[0] == pytest.approx(1.0)
    assert U[-1] == pytest.approx(pt.mode_trace.U_at_plus_b)


def test_signatures(bound_point, anti_bound_points):
    assert bound_point.signature() == (1, -1)
    assert anti_bound_points[0].signature() == (-1, 1)
    t = scan_axis(square_well(4.0), Target.S_MINUS, -3.0, -0.05, 100)
    assert t and t[0].cls is SpectralClass.TRANSMISSION
    assert t[0].signature() == (1, 1)


def test_box_validation():
    with pytest.raises(ValueError):
        Box(1, 0, -1, 0)
