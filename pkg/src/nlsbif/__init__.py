"""Scattering data, resonances and nonlinear bound-state branches for 1D Schrodinger operators.

Typical use::

    from nlsbif import square_well, scan_axis, Target, trace_from_point

    spec = square_well(2.0)
    pole = scan_axis(spec, Target.W, 0.05, 1.4, 50)[0]
    curve = trace_from_point(spec, pole)
"""
from .branch import BranchCurve, Controls, coalescence_scan, continue_branch, seed_branch, threshold_branch, trace_from_point
from .config import Tolerances, override_tolerances, tolerances
from .glue import GluedState, assemble, global_residual, match_tail, tail_mass
from .nlsolve import BCSignature, InnerSolution, shoot, solve_kappa, solve_threshold_symmetric
from .potential import (PotentialKind, PotentialSpec, delta, double_barrier, piecewise_cubic, smooth_well,
                        square_well)
from .scattering import Target, s_minus, s_plus, scattering_data, wronskian
from .spectrum import (Box, Parity, SpectralClass, SpectralPoint, count_zeros_box, detect_threshold,
                       locate_complex_zeros, mode_and_nondegeneracy, scan_axis)

__version__ = "0.1.0"
