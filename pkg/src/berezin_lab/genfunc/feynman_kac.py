# coding: utf-8


"""Feynman-Kac representation of generating functions at finite time resolution.

The right-hand side at resolution n is the Gaussian Berezin integral

    int dmu_C(h) exp(beta s/n sum_{k >= n} kappa^(k)(K) - beta/n sum_{k < n} kappa^(k)(W))

with C the discrete-time covariance of :mod:`berezin_lab.covariance.covariance`. It is compared
with the exact ratio of Fock traces, which does not depend on n.
"""


import logging
from itertools import product

import numpy as np
import pandas as pd

from .. import config
from ..algebra.fock import bilinear_element, check_even_self_adjoint, log_trace_ratio, tracial_state
from ..algebra.selfdual import extended_projection
from ..covariance.covariance import (TimeGrid, covariance_direct, require_diagonalizing,
                                     require_fine_grid)
from ..errors import CapacityExceeded, ShapeMismatch
from ..grassmann.algebra import GrassmannElement, GrassmannSpace, bilinear_grassmann, grassmann_exp
from ..grassmann.circle import chernoff_step, kappa_iso
from ..grassmann.gaussian import gaussian_integral, generator_moment_matrix, wick_sum
from .trace import literal_integral, sweep_integral


__all__ = ['gaussian_expectation', 'feynman_kac_rhs', 'feynman_kac_lhs', 'feynman_kac_chernoff',
           'tracial_feynman_kac', 'tracial_chernoff', 'max_literal_n', 'ConvergenceReport',
           'convergence_study']


logger = logging.getLogger(__name__)


METHODS = ('sweep', 'literal', 'wick')


def _sweep_expectation(operator, projection, grid, factors):
    single = GrassmannSpace(projection, (0,))
    weight = grassmann_exp(0.5 * grid.step * bilinear_grassmann(single, operator.H))
    weights = [weight if k < grid.n else GrassmannElement.scalar(single, 1.0) for k in range(grid.n_beta)]
    sites = [f.wedge(w) for f, w in zip(factors, weights)]
    # det(PCP) is the inverse of the unweighted integral
    return sweep_integral(projection, sites) / sweep_integral(projection, weights)


def _literal_expectation(operator, projection, grid, factors):
    cov = covariance_direct(operator, projection, grid)
    space = GrassmannSpace(projection, range(grid.n_beta))
    integrand = GrassmannElement.scalar(space, 1.0)
    for k, factor in enumerate(factors):
        integrand = integrand.wedge(factor.at_copy(k, space))
    return gaussian_integral(cov.operator(), integrand, projection=extended_projection(projection, grid.n_beta))


def _wick_expectation(operator, projection, grid, factors):
    sizes = [len(f) for f in factors]
    count = int(np.prod(sizes, dtype=float))
    if count > config.MAX_WICK_TERMS:
        raise CapacityExceeded('Wick expansion of {} terms'.format(count), cap=config.MAX_WICK_TERMS)
    cov = covariance_direct(operator, projection, grid)
    moments = generator_moment_matrix(cov.operator(), np.kron(np.eye(grid.n_beta), projection.slot_basis))
    block = 2 * projection.m
    per_copy = []
    for k, factor in enumerate(factors):
        per_copy.append([([k * block + s for s in range(block) if mask >> s & 1], coeff)
                         for mask, coeff in zip(factor.masks.tolist(), factor.coeffs.tolist())])

    def monomials():
        # copies are visited in ascending order, so the concatenated slots stay sorted
        for choice in product(*per_copy):
            slots = [s for part, _ in choice for s in part]
            yield slots, np.prod([c for _, c in choice])

    logger.debug('Wick expansion over %d monomials', count)
    return wick_sum(moments, monomials())


def gaussian_expectation(operator, projection, grid, factors, method='sweep'):
    """
    Gaussian Berezin integral of factors[0]^(0) ^ ... ^ factors[n_beta-1]^(n_beta-1).

    Parameters
    ----------
    operator: SelfDualOperator
        self-dual Hamiltonian H defining the covariance
    projection: BasisProjection
        projection diagonalizing H
    grid: TimeGrid
    factors: list of GrassmannElement
        one single-copy element over ``projection`` per copy
    method: {'sweep', 'literal', 'wick'}, default 'sweep'
        'sweep' needs even factors; 'literal' is capped at MAX_GRASSMANN_GENERATORS
        generators overall; 'wick' at MAX_WICK_TERMS monomials

    Returns
    -------
    value: complex
    """
    if len(factors) != grid.n_beta:
        raise ShapeMismatch('{} factors for {} copies'.format(len(factors), grid.n_beta))
    operator.require_hamiltonian()
    require_fine_grid(operator, grid.beta, grid.n)
    require_diagonalizing(operator, projection)
    if method == 'sweep':
        value = _sweep_expectation(operator, projection, grid, factors)
    elif method == 'literal':
        value = _literal_expectation(operator, projection, grid, factors)
    elif method == 'wick':
        value = _wick_expectation(operator, projection, grid, factors)
    else:
        raise ValueError('unknown evaluation method {!r}'.format(method))

    return complex(value)


def _check_observables(w, k):
    if w.rep is not k.rep and w.rep.dimension != k.rep.dimension:
        raise ShapeMismatch('W and K belong to different Fock representations')
    check_even_self_adjoint(w.rep, w, 'W')
    check_even_self_adjoint(k.rep, k, 'K')


def feynman_kac_rhs(operator, projection, w, k, beta, s, n, method='sweep'):
    """
    Gaussian Berezin integral of the time-sliced interaction and observable.

    Parameters
    ----------
    operator: SelfDualOperator
        self-dual Hamiltonian H
    projection: BasisProjection
        projection diagonalizing H; also the projection of the Fock representation of W and K
    w, k: FockOperator
        even self-adjoint interaction and observable
    beta: float
    s: float
    n: int
        time resolution, n > 1.01 beta ||H||
    method: {'sweep', 'literal', 'wick'}, default 'sweep'

    Returns
    -------
    value: complex

    Raises
    ------
    GridTooCoarse, ParityViolation, CapacityExceeded
    """
    _check_observables(w, k)
    grid = TimeGrid(n, beta)
    interaction = grassmann_exp(-grid.step * kappa_iso(projection, w))
    observable = grassmann_exp(grid.step * s * kappa_iso(projection, k))
    factors = [interaction if j < grid.n else observable for j in range(grid.n_beta)]
    value = gaussian_expectation(operator, projection, grid, factors, method=method)
    logger.debug('Feynman-Kac right-hand side at n = %d (%s): %s', n, method, value)

    return value


def feynman_kac_lhs(operator, w, k, beta, s):
    """
    tr(exp(beta(<B,HB>/2 - W)) exp(sK)) / tr(exp(beta/2 <B,HB>)) from exact exponentials.

    Examples
    --------
    With W = K = 0 the ratio is 1.
    """
    _check_observables(w, k)
    return complex(np.exp(log_trace_ratio(w.rep, operator, w, k, beta, s)))


def _power(a, p):
    return np.linalg.matrix_power(a.M, int(p))


def feynman_kac_chernoff(operator, projection, w, k, beta, s, n):
    """
    tr(Y1^n Y2^(n_beta - n)) / tr(Y0^n) for the single Chernoff factors

    Y1 of beta(<B,HB>/2 - W), Y2 of beta s K and Y0 of beta/2 <B,HB>.
    """
    _check_observables(w, k)
    grid = TimeGrid(n, beta)
    rep = w.rep
    q = bilinear_element(rep, operator.H)
    y1 = chernoff_step(projection, beta * (0.5 * q - w), n)
    y2 = chernoff_step(projection, beta * s * k, n)
    y0 = chernoff_step(projection, 0.5 * beta * q, n)
    numerator = np.trace(_power(y1, n) @ _power(y2, grid.n_beta - n))

    return complex(numerator / np.trace(_power(y0, n)))


def tracial_feynman_kac(operator, projection, w, k, beta, s, n, method='sweep'):
    """
    2^-m int d(h) e^{<h, d_P h>/2} exp(-beta/n sum_{k<n} kappa^(k)(Hb) + beta s/n sum_{k>=n} kappa^(k)(K))

    with Hb = -<B,HB>/2 + W, so the Gibbs weight sits in the exponent rather than in the
    covariance.

    Parameters
    ----------
    method: {'sweep', 'literal'}, default 'sweep'
    """
    _check_observables(w, k)
    grid = TimeGrid(n, beta)
    q = bilinear_element(w.rep, operator.H)
    weight = grassmann_exp(-grid.step * kappa_iso(projection, w - 0.5 * q))
    observable = grassmann_exp(grid.step * s * kappa_iso(projection, k))
    sites = [weight if j < grid.n else observable for j in range(grid.n_beta)]
    if method == 'sweep':
        value = sweep_integral(projection, sites)
    elif method == 'literal':
        value = literal_integral(projection, sites)
    else:
        raise ValueError('unknown tracial method {!r}'.format(method))

    return value / 2 ** projection.m


def tracial_chernoff(operator, projection, w, k, beta, s, n):
    """Normalized trace of Y^n Y2^(n_beta - n), Y the Chernoff factor of -beta(-<B,HB>/2 + W)."""
    _check_observables(w, k)
    grid = TimeGrid(n, beta)
    rep = w.rep
    q = bilinear_element(rep, operator.H)
    y = chernoff_step(projection, -beta * (w - 0.5 * q), n)
    y2 = chernoff_step(projection, beta * s * k, n)

    return tracial_state(rep, rep.operator(_power(y, n) @ _power(y2, grid.n_beta - n)))


def max_literal_n(beta, m):
    """Largest n whose copied space fits the literal Grassmann cap, 0 if none does."""
    best = 0
    n = 1
    while TimeGrid(n, beta).n_beta * 2 * m <= config.MAX_GRASSMANN_GENERATORS:
        best = n
        n += 1
    return best


class ConvergenceReport(object):
    COLUMNS = ['n', 'rhs_re', 'rhs_im', 'lhs_re', 'abs_err', 'ratio']

    def __init__(self, table, metadata):
        """
        Parameters
        ----------
        table: pandas.DataFrame
            one row per n, columns COLUMNS
        metadata: dict
            beta, s, method, model description and the capacity-limited literal n
        """
        ns = table['n'].to_numpy()
        if np.any(np.diff(ns) <= 0):
            raise ShapeMismatch('n must increase strictly across rows')
        self.table = table[self.COLUMNS].reset_index(drop=True)
        self.metadata = dict(metadata)
        self.metadata['monotone'] = self.monotone()

    def __repr__(self):
        return 'ConvergenceReport({} rows, beta={}, s={})'.format(
            len(self.table), self.metadata.get('beta'), self.metadata.get('s'))

    def monotone(self):
        err = self.table['abs_err'].to_numpy()
        return bool(np.all(np.diff(err) <= 0))

    def empirical_order(self):
        """Slope of -log(abs_err) against log(n); nan with fewer than two non-zero errors."""
        t = self.table[self.table['abs_err'] > 0]
        if len(t) < 2:
            return float('nan')
        slope = np.polyfit(np.log(t['n'].to_numpy(dtype=float)), np.log(t['abs_err'].to_numpy()), 1)[0]
        return float(-slope)

    def relative_error(self):
        """Error of the last row relative to |lhs|."""
        last = self.table.iloc[-1]
        return float(last['abs_err'] / max(abs(last['lhs_re']), np.finfo(float).tiny))

    def to_records(self):
        return self.table.to_dict(orient='records')


def convergence_study(operator, projection, w, k, beta, s, n_list=None, method='sweep', description=''):
    """
    Right-hand side at every n against the exact left-hand side.

    Parameters
    ----------
    operator: SelfDualOperator
    projection: BasisProjection
    w, k: FockOperator
    beta, s: float
    n_list: iterable of int, optional
        defaults to DEFAULT_N_LIST; duplicates are dropped and the list sorted
    method: {'sweep', 'literal', 'wick'}, default 'sweep'
    description: str, default ''
        free text stored in the metadata

    Returns
    -------
    ConvergenceReport
    """
    ns = sorted(set(int(n) for n in (config.DEFAULT_N_LIST if n_list is None else n_list)))
    if not ns:
        raise ShapeMismatch('empty n list')
    lhs = feynman_kac_lhs(operator, w, k, beta, s)
    rows = []
    previous = None
    for n in ns:
        rhs = feynman_kac_rhs(operator, projection, w, k, beta, s, n, method=method)
        err = abs(rhs - lhs)
        rows.append({'n': n, 'rhs_re': rhs.real, 'rhs_im': rhs.imag, 'lhs_re': lhs.real, 'abs_err': err,
                     'ratio': err / previous if previous else np.nan})
        previous = err
        logger.info('n = %d: rhs %.12g, error %.3e', n, rhs.real, err)
    metadata = {'beta': float(beta), 's': float(s), 'm': projection.m, 'method': method,
                'description': description, 'n_list': ns, 'lhs_im': lhs.imag,
                'max_literal_n': max_literal_n(beta, projection.m)}

    return ConvergenceReport(pd.DataFrame(rows, columns=ConvergenceReport.COLUMNS), metadata)
