# coding: utf-8


"""Discrete-time covariances on the copied space.

The copied space holds ``n_beta`` orthogonal copies of the base self-dual space; a vector of
copy k is written phi^(k) and copies are laid out in increasing order, so every operator
below is an ``n_beta x n_beta`` array of ``2m x 2m`` blocks.
"""


import logging

import numpy as np
import pandas as pd

from .. import config
from ..algebra.selfdual import SelfDualOperator, extended_space, kmap
from ..errors import GridTooCoarse, NotApplicable, ShapeMismatch
from ..grassmann.algebra import GrassmannElement, pairing_element
from ..linalg.numkernel import as_matrix, hermitian_eig, hermitian_function, matrix_inverse, max_abs


__all__ = ['strict_floor', 'TimeGrid', 'CovarianceOperator', 'require_fine_grid', 'require_diagonalizing',
           'derivative_matrix', 'discrete_derivative',
           'selfdual_derivative', 'derivative_element', 'covariance_direct', 'h_n_approximant',
           'approximant_errors', 'chernoff_generator', 'alpha_n', 'covariance_closed_form',
           'closed_form_covariance', 'compare_constructions']


logger = logging.getLogger(__name__)


def strict_floor(x):
    """Largest natural number strictly smaller than x; integral x gives x - 1."""
    k = int(np.floor(x))
    if abs(x - round(x)) <= 1e-12:
        k = int(round(x)) - 1
    return max(k, 0)


class TimeGrid(object):
    def __init__(self, n, beta):
        """
        Parameters
        ----------
        n: int
            number of interacting time slices
        beta: float
            inverse temperature
        """
        if int(n) != n or n < 1:
            raise ValueError('n must be a positive integer, got {}'.format(n))
        if not beta > 0:
            raise ValueError('beta must be positive, got {}'.format(beta))
        self.n = int(n)
        self.beta = float(beta)
        self.n_beta = self.n + strict_floor(self.n / self.beta)

    def __repr__(self):
        return 'TimeGrid(n={}, beta={}, n_beta={})'.format(self.n, self.beta, self.n_beta)

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and (self.n, self.beta) == (other.n, other.beta)

    def __hash__(self):
        return hash((self.n, self.beta))

    @property
    def step(self):
        return self.beta / self.n

    def interacting(self):
        """Indicator 1[k < n] over the copies."""
        return (np.arange(self.n_beta) < self.n).astype(float)


class CovarianceOperator(object):
    def __init__(self, grid, projection, matrix, source):
        """
        Parameters
        ----------
        grid: TimeGrid
        projection: BasisProjection
            projection of the base space used to build the covariance
        matrix: array-like
            operator of order n_beta * 2m on the copied space
        source: {'direct-inverse', 'closed-form'}
        """
        c = as_matrix(matrix, name='covariance')
        self.grid = grid
        self.projection = projection
        self.space = projection.space
        self.block_size = self.space.dim
        if c.shape[0] != grid.n_beta * self.block_size:
            raise ShapeMismatch('covariance of order {} for {} copies of dimension {}'.format(
                c.shape[0], grid.n_beta, self.block_size))
        self.extended = extended_space(self.space, grid.n_beta)
        self.matrix = c
        self.source = source

    def __repr__(self):
        return 'CovarianceOperator({}, m={}, source={!r})'.format(self.grid, self.space.m, self.source)

    def block(self, k1, k2):
        """2m x 2m block <phi^(k1), C phi'^(k2)>."""
        nb = self.grid.n_beta
        if not (0 <= k1 < nb and 0 <= k2 < nb):
            raise ShapeMismatch('copy indices ({}, {}) outside 0..{}'.format(k1, k2, nb - 1))
        d = self.block_size
        return self.matrix[k1 * d:(k1 + 1) * d, k2 * d:(k2 + 1) * d]

    def operator(self):
        return SelfDualOperator(self.extended, self.matrix, tol=config.COVARIANCE_SELF_DUAL_TOL)

    def self_duality_residual(self):
        return self.extended.self_duality_residual(self.matrix)

    def diagonal_residual(self):
        """||P^ C - C P^|| for the copy-wise extension P^ of the projection."""
        p_hat = np.kron(np.eye(self.grid.n_beta), self.projection.P)
        return max_abs(p_hat @ self.matrix - self.matrix @ p_hat)

    def antisymmetry_residual(self):
        """max over copy pairs of ||c(k2, k1) + A c(k1, k2)* A||."""
        nb = self.grid.n_beta
        worst = 0.0
        for k1 in range(nb):
            for k2 in range(nb):
                swapped = self.space.conjugate_operator(self.block(k1, k2).conj().T)
                worst = max(worst, max_abs(self.block(k2, k1) + swapped))
        return worst

    def max_deviation(self, other):
        return max_abs(self.matrix - other.matrix)


def derivative_matrix(n_beta):
    """
    Copy-coordinate matrix D of the discrete derivative; column k is the image of copy k.

    Examples
    --------
    >>> derivative_matrix(2)
    array([[ 1., -1.],
           [ 1.,  1.]])
    """
    d = np.eye(n_beta)
    for k in range(1, n_beta):
        d[k - 1, k] = -1.0
    d[n_beta - 1, 0] += 1.0
    return d


def discrete_derivative(grid, base_dim):
    """d phi^(0) = phi^(0) + phi^(n_beta-1) and d phi^(k) = phi^(k) - phi^(k-1)."""
    return np.kron(derivative_matrix(grid.n_beta), np.eye(base_dim))


def selfdual_derivative(grid, projection):
    """
    d_P = P^ d P^ - A^ P^ d* P^ A^ on the copied space.

    Parameters
    ----------
    grid: TimeGrid
    projection: BasisProjection
        projection of the base space, extended copy-wise

    Returns
    -------
    numpy.ndarray
    """
    space = projection.space
    ext = extended_space(space, grid.n_beta)
    d = discrete_derivative(grid, space.dim)
    p_hat = np.kron(np.eye(grid.n_beta), projection.P)
    return p_hat @ d @ p_hat - ext.conjugate_operator(p_hat @ d.conj().T @ p_hat)


def derivative_element(space, n_beta=None):
    """
    (1/2)<h, d_P h> assembled from the pairings <h^(k), h^(l)> = sum_j (A psi_j)^(k) ^ psi_j^(l).

    Parameters
    ----------
    space: GrassmannSpace
        copies labelled 0..n_beta-1 over the projection P
    n_beta: int, optional
        defaults to the number of copies of ``space``

    Returns
    -------
    GrassmannElement
    """
    n_beta = len(space.labels) if n_beta is None else n_beta
    if space.labels != tuple(range(n_beta)):
        raise ShapeMismatch('copies must be labelled 0..{}'.format(n_beta - 1))
    d = derivative_matrix(n_beta)
    total = GrassmannElement.zero(space)
    for l, k in zip(*np.nonzero(d)):
        total = total + d[l, k] * pairing_element(space, int(k), int(l))
    return total


def require_fine_grid(operator, beta, n):
    norm = operator.norm()
    if not n > config.GRID_MARGIN * beta * norm:
        raise GridTooCoarse('n = {} does not exceed {} beta ||H|| = {:.6g}'.format(
            n, config.GRID_MARGIN, config.GRID_MARGIN * beta * norm), n=n, beta=beta, norm=norm)


def require_diagonalizing(operator, projection):
    operator.space.check(projection.space)
    h = operator.H
    residual = max_abs(projection.P @ h - h @ projection.P)
    if residual > config.RECONSTRUCTION_TOL * max(1.0, max_abs(h)):
        raise NotApplicable('projection does not diagonalize H', residual=residual)


def covariance_direct(operator, projection, grid):
    """
    C = (d_P + beta/n 1[k<n] H^)^-1 by a direct matrix inverse.

    Parameters
    ----------
    operator: SelfDualOperator
        self-dual Hamiltonian H
    projection: BasisProjection
        projection diagonalizing H
    grid: TimeGrid

    Returns
    -------
    CovarianceOperator

    Raises
    ------
    GridTooCoarse
        if n <= 1.01 beta ||H||
    """
    operator.require_hamiltonian()
    require_fine_grid(operator, grid.beta, grid.n)
    require_diagonalizing(operator, projection)
    h_hat = np.kron(np.diag(grid.interacting()), operator.H)
    inverse = selfdual_derivative(grid, projection) + grid.step * h_hat
    matrix = matrix_inverse(inverse)
    logger.info('direct covariance: %s, order %d', grid, matrix.shape[0])

    return CovarianceOperator(grid, projection, matrix, 'direct-inverse')


def h_n_approximant(operator, beta, n):
    """
    H^(n) = (n / 2 beta) ln((1 + beta H / n) / (1 - beta H / n)).

    Examples
    --------
    An eigenvalue 0.5 at beta = 1, n = 10 becomes 5 ln(1.05 / 0.95) = 0.5004172929...
    """
    operator.require_hamiltonian()
    norm = operator.norm()
    if not n > beta * norm:
        raise GridTooCoarse('n = {} does not exceed beta ||H|| = {:.6g}'.format(n, beta * norm),
                            n=n, beta=beta, norm=norm)
    x = beta / n

    def approx(w):
        return 0.5 / x * (np.log1p(x * w) - np.log1p(-x * w))

    return SelfDualOperator(operator.space, hermitian_function(operator.H, approx))


def approximant_errors(operator, beta, n_list):
    """
    Operator-norm error of H^(n) against H for every n, with the ratio to the previous n.

    Returns
    -------
    pandas.DataFrame
        columns n, error, ratio
    """
    rows = []
    previous = None
    for n in sorted(n_list):
        error = float(np.linalg.norm(h_n_approximant(operator, beta, n).H - operator.H, 2))
        ratio = error / previous if previous else np.nan
        rows.append({'n': int(n), 'error': error, 'ratio': ratio})
        previous = error
    return pd.DataFrame(rows, columns=['n', 'error', 'ratio'])


def chernoff_generator(operator, projection, beta, n):
    """
    H_c = 2K(P L P) with L = (n / beta) ln(1 + beta H / n) on ran P.

    exp(beta/2 <B, H_c B>) is proportional to the n-th Chernoff power of the exponential of
    beta/2 <B, H B>.
    """
    operator.require_hamiltonian()
    require_fine_grid(operator, beta, n)
    require_diagonalizing(operator, projection)
    x = beta / n
    p = projection.P
    php = p @ operator.H @ p
    log_block = hermitian_function(0.5 * (php + php.conj().T), lambda w: np.log1p(x * w) / x)

    return kmap(operator.space, 2.0 * p @ log_block @ p)


def alpha_n(grid, k, q):
    """beta/n [min(n - k, q - k)]_+."""
    return grid.step * max(min(grid.n - k, q - k), 0)


class _FermiFactors(object):
    """g(a) = e^{-a Hc}/(1 + e^{-beta Hc}) and h(a) = e^{a Hc}/(1 + e^{beta Hc}), evaluated stably."""

    def __init__(self, generator, beta):
        self.w, self.u = hermitian_eig(generator)
        self.beta = beta

    def _apply(self, exponent):
        return (self.u * np.exp(exponent)) @ self.u.conj().T

    def low(self, a):
        return self._apply(-a * self.w - np.logaddexp(0.0, -self.beta * self.w))

    def high(self, a):
        return self._apply(a * self.w - np.logaddexp(0.0, self.beta * self.w))


def _closed_form_block(projection, factors, grid, k1, k2):
    p, q = projection.P, projection.complement
    alpha = lambda k, l: alpha_n(grid, k, l)
    if k1 < k2:
        return p @ factors.low(alpha(k1, k2 + 1)) @ p + q @ factors.low(alpha(k1 + 1, k2)) @ q
    if k1 > k2:
        return -p @ factors.high(alpha(k2 + 1, k1)) @ p - q @ factors.high(alpha(k2, k1 + 1)) @ q
    return p @ factors.low(alpha(k1, k1 + 1)) @ p - q @ factors.high(alpha(k1, k1 + 1)) @ q


def covariance_closed_form(operator, projection, grid, k1, k2):
    """
    Block (k1, k2) of the covariance from quasi-free correlations of the Chernoff generator.

    Parameters
    ----------
    operator: SelfDualOperator
        self-dual Hamiltonian H
    projection: BasisProjection
        projection diagonalizing H
    grid: TimeGrid
    k1, k2: int
        copy indices in 0..n_beta-1

    Returns
    -------
    numpy.ndarray
        2m x 2m block
    """
    nb = grid.n_beta
    if not (0 <= k1 < nb and 0 <= k2 < nb):
        raise ShapeMismatch('copy indices ({}, {}) outside 0..{}'.format(k1, k2, nb - 1))
    generator = chernoff_generator(operator, projection, grid.beta, grid.n)
    return _closed_form_block(projection, _FermiFactors(generator.H, grid.beta), grid, k1, k2)


def closed_form_covariance(operator, projection, grid):
    """Full covariance assembled block by block from :func:`covariance_closed_form`."""
    generator = chernoff_generator(operator, projection, grid.beta, grid.n)
    factors = _FermiFactors(generator.H, grid.beta)
    nb = grid.n_beta
    rows = [np.hstack([_closed_form_block(projection, factors, grid, k1, k2) for k2 in range(nb)])
            for k1 in range(nb)]
    logger.info('closed-form covariance: %s', grid)

    return CovarianceOperator(grid, projection, np.vstack(rows), 'closed-form')


def compare_constructions(operator, projection, grid):
    """
    Agreement of the direct inverse with the closed form.

    Returns
    -------
    dict
        max block deviation, self-duality and anti-symmetry residuals of both constructions
    """
    direct = covariance_direct(operator, projection, grid)
    closed = closed_form_covariance(operator, projection, grid)
    record = {'n': grid.n, 'beta': grid.beta, 'n_beta': grid.n_beta, 'm': projection.m,
              'max_deviation': direct.max_deviation(closed),
              'direct_self_duality': direct.self_duality_residual(),
              'closed_self_duality': closed.self_duality_residual(),
              'closed_antisymmetry': closed.antisymmetry_residual(),
              'direct_diagonal': direct.diagonal_residual()}
    logger.debug('covariance agreement %s', record)
    return record
