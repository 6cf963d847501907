# coding: utf-8


"""Tolerances, capacity caps and default grids shared by every module."""


import numpy as np


__all__ = ['tolerance_table']


# numkernel
PFAFFIAN_CHECK_TOL = 1e-9
SKEW_TOL = 1e-12
HERMITIAN_TOL = 1e-12
SINGULAR_PIVOT_TOL = 1e-13

# selfdual
UNITARY_TOL = 1e-12
PROJECTION_TOL = 1e-11
SELF_DUAL_TOL = 1e-11
TRACE_TOL = 1e-10
KERNEL_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-10
ORIENTATION_TOL = 1e-8
PAIRING_RESIDUAL_TOL = 1e-6

# fock
CAR_TOL = 1e-13
EVEN_TOL = 1e-12
ADJOINT_TOL = 1e-10
SYMBOL_TOL = 1e-10
MAX_FOCK_MODES = 10

# grassmann
PRUNE_TOL = 1e-15
MAX_GRASSMANN_GENERATORS = 24
MAX_WICK_GENERATORS = 40
MAX_WICK_TERMS = 2 ** 16

# covariance
GRID_MARGIN = 1.01
COVARIANCE_SELF_DUAL_TOL = 1e-9
BOUND_SLACK = 1e-9
PSD_FLOOR = -1e-12
COVARIANCE_AGREEMENT_TOL = 1e-9
# doubling ratio of the H^(n) error, which scales as n^-2
APPROXIMANT_RATIO_RANGE = (0.2, 0.3)

# genfunc
LOG_ARGUMENT_IMAG_TOL = 1e-10
TRACE_FORMULA_TOL = 1e-10
PATH_AGREEMENT_TOL = 1e-9
MIN_EMPIRICAL_ORDER = 0.8
DEFAULT_N_LIST = (4, 8, 16, 24)
# Relative error allowed at n = 24 for the interacting toys (beta = 1, s = 0.3); initial
# calibration value, to be frozen once a verified run has been recorded.
FEYNMAN_KAC_THRESHOLD = 5e-2

# lattice
DECAY_SLACK = 1e-6
ZERO_EIGENVALUE_TOL = 1e-10
MU_GRID = tuple(np.round(np.arange(1, 21) * 0.1, 10))
EPSILON_GRID = (0.25, 0.5, 1.0)
# max/min of omega over beta in {1, 2, 4, 8, 16} for the gapped pairing chain; initial
# calibration value, to be frozen once a verified run has been recorded.
GAPPED_UNIFORMITY_FACTOR = 3.0
# slack on the fitted beta exponents of D and omega above d / eps
FERMI_EXPONENT_SLACK = 0.5
DECAY_EXPONENT_SLACK = 1.5
# gimel for the gapped rows of verify when --gimel is not given
VERIFY_GIMEL = 0.1
LATTICE_SUM_BOX = {1: 4000, 2: 200, 3: 40}


def tolerance_table():
    """
    Collect the module constants embedded in every report.

    Returns
    -------
    table: dict
        constant name -> value, with tuples turned into lists
    """
    table = {}
    for name, value in sorted(globals().items()):
        if not name.isupper():
            continue
        if isinstance(value, tuple):
            value = [float(v) for v in value]
        elif isinstance(value, dict):
            value = {str(k): v for k, v in value.items()}
        table[name] = value

    return table
