# coding: utf-8


"""Dense complex linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` of dtype ``complex128``; :func:`as_matrix` performs the
shape and finiteness checks every public entry point relies on.
"""


import logging

import numpy as np
import scipy.linalg

from .. import config
from ..errors import NotHermitian, NotSkewSymmetric, OddOrder, ShapeMismatch, Singular


__all__ = ['as_matrix', 'pfaffian', 'hermitian_eig', 'hermitian_function', 'matrix_exp',
           'matrix_inverse', 'skew_part', 'max_abs']


logger = logging.getLogger(__name__)


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_matrix(a, name='matrix', square=True):
    """
    Validate and convert an array-like to a complex matrix.

    Parameters
    ----------
    a: array-like
        2-d input
    name: str
        used in error messages
    square: bool, default True
        whether the matrix must be square

    Returns
    -------
    m: numpy.ndarray
        complex128 copy of ``a``
    """
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeMismatch('{} must be 2-dimensional, got shape {}'.format(name, m.shape))
    if square and m.shape[0] != m.shape[1]:
        raise ShapeMismatch('{} must be square, got shape {}'.format(name, m.shape))
    if not np.all(np.isfinite(m)):
        raise ShapeMismatch('{} has non-finite entries'.format(name))

    return m


def skew_part(m):
    """(M - M^t)/2, used before Pfaffians of matrices assembled in floating point."""
    m = np.asarray(m, dtype=np.complex128)
    return 0.5 * (m - m.T)


def pfaffian(m):
    """
    Pfaffian of a skew-symmetric matrix by Parlett-Reid tridiagonalization.

    Parameters
    ----------
    m: array-like
        skew-symmetric matrix of even order 2N

    Returns
    -------
    pf: complex
        Pf(M), with Pf(M)^2 = det(M)

    Examples
    --------
    >>> pfaffian([[0, 5], [-5, 0]])
    (5+0j)
    """
    a = as_matrix(m, name='pfaffian argument')
    n = a.shape[0]
    scale = max_abs(a)
    if max_abs(a + a.T) > config.SKEW_TOL * scale:
        raise NotSkewSymmetric('matrix is not skew-symmetric', residual=max_abs(a + a.T))
    if n % 2:
        raise OddOrder('Pfaffian needs an even order, got {}'.format(n))
    if n == 0:
        return 1.0 + 0.0j
    if scale == 0.0:
        return 0.0 + 0.0j

    pf = 1.0 + 0.0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0 + 0.0j
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)

    return complex(pf)


def hermitian_eig(a):
    """
    Eigendecomposition A = U diag(w) U* of a Hermitian matrix.

    Returns
    -------
    w: numpy.ndarray
        real eigenvalues in ascending order
    u: numpy.ndarray
        unitary matrix of eigenvectors (columns)
    """
    a = as_matrix(a, name='Hermitian matrix')
    if max_abs(a - a.conj().T) > config.HERMITIAN_TOL * max(max_abs(a), 1e-300):
        raise NotHermitian('matrix is not Hermitian', residual=max_abs(a - a.conj().T))
    w, u = scipy.linalg.eigh(0.5 * (a + a.conj().T))
    order = np.argsort(w, kind='stable')

    return w[order], u[:, order]


def hermitian_function(a, func):
    """f(A) = U f(w) U* for Hermitian A and a vectorized scalar function f."""
    w, u = hermitian_eig(a)
    return (u * func(w)) @ u.conj().T


def matrix_exp(a):
    """exp(A) by scaling and squaring."""
    a = as_matrix(a, name='exponent')
    return scipy.linalg.expm(a)


def matrix_inverse(a):
    """
    Inverse through an LU factorization with partial pivoting.

    Raises
    ------
    Singular
        if a pivot falls below 1e-13 times the largest entry
    """
    a = as_matrix(a, name='matrix to invert')
    n = a.shape[0]
    if n == 0:
        return a.copy()
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest <= config.SINGULAR_PIVOT_TOL * max_abs(a):
        raise Singular('matrix is numerically singular', pivot=smallest)
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=np.complex128), check_finite=False)
    logger.debug('inverted %dx%d matrix, smallest pivot %.3e', n, n, smallest)

    return inv
