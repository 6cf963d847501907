# coding: utf-8


"""Gaussian Berezin integrals.

Two evaluation routes are provided. :func:`gaussian_integral` follows the definition
literally: normalization determinant, orientation sign and a full Berezin integral of
exp(<H, C^-1 H>/2) ^ xi. :func:`wick_integral` expands xi into monomials and integrates each
one as a Pfaffian of the moment matrix <A e_s, C e_t>.
"""


import logging

import numpy as np

from .. import config
from ..algebra.selfdual import diagonalizing_projection, extended_projection, orientation_sign
from ..errors import CapacityExceeded, NotApplicable, ShapeMismatch, Singular, SingularCovariance
from ..linalg.numkernel import as_matrix, matrix_inverse, max_abs, pfaffian, skew_part
from .algebra import bilinear_grassmann, grassmann_exp, popcount


__all__ = ['moment_matrix', 'gaussian_moment_pfaffian',
           'gaussian_integral', 'generator_moment_matrix', 'wick_sum', 'wick_integral']


logger = logging.getLogger(__name__)


def _columns(space, vectors):
    """Vectors as matrix columns; a list or tuple holds one vector per entry."""
    if isinstance(vectors, (list, tuple)):
        if not vectors:
            return np.zeros((space.dim, 0), dtype=np.complex128)
        phi = np.array(vectors, dtype=np.complex128).T
    else:
        phi = np.asarray(vectors, dtype=np.complex128)
    if phi.ndim != 2 or phi.shape[0] != space.dim:
        raise ShapeMismatch('vectors do not match a space of dimension {}'.format(space.dim))
    return phi


def moment_matrix(covariance, vectors):
    """
    Skew-symmetric matrix [<A phi_k, C phi_l>].

    Parameters
    ----------
    covariance: SelfDualOperator
    vectors: list or numpy.ndarray
        list of vectors phi_1..phi_2N, or a matrix holding them as columns

    Returns
    -------
    numpy.ndarray
    """
    phi = _columns(covariance.space, vectors)
    conj_phi = covariance.space.conjugate(phi)

    return skew_part(conj_phi.conj().T @ covariance.H @ phi)


def gaussian_moment_pfaffian(covariance, vectors):
    """
    Moment of a product of vectors under the Gaussian integral with covariance C.

    Odd numbers of vectors give 0; an even number 2N gives Pf[<A phi_k, C phi_l>].

    Examples
    --------
    The N = 1 moment is the single matrix element <A phi_1, C phi_2>.
    """
    phi = _columns(covariance.space, vectors)
    if phi.shape[1] == 0:
        return 1.0 + 0.0j
    if phi.shape[1] % 2:
        return 0.0j
    return pfaffian(moment_matrix(covariance, phi))


def _covariance_space(covariance, space):
    if covariance.space.dim != space.n_slots:
        raise ShapeMismatch('covariance of order {} for {} generators'.format(covariance.space.dim, space.n_slots))
    if max_abs(covariance.space.J - space.involution_matrix()) > config.UNITARY_TOL:
        raise ShapeMismatch('covariance involution differs from the copy-wise involution')


def _diagonalizing(covariance, space, projection):
    if projection is None:
        if covariance.is_hamiltonian:
            projection = diagonalizing_projection(covariance)
        else:
            projection = extended_projection(space.projection, len(space.labels))
    c = covariance.H
    residual = max_abs(projection.P @ c - c @ projection.P)
    if residual > config.COVARIANCE_SELF_DUAL_TOL * max(1.0, max_abs(c)):
        raise NotApplicable('projection does not diagonalize the covariance', residual=residual)
    return projection


def gaussian_integral(covariance, xi, projection=None):
    """
    Literal Gaussian Berezin integral det(PCP on ran P) int_P exp(<H, C^-1 H>/2) ^ xi.

    The Berezin integral is taken over the reference slots of ``xi.space`` and converted to P
    through the orientation sign of the pair of projections.

    Parameters
    ----------
    covariance: SelfDualOperator
        invertible self-dual operator on the copy-wise extended space of ``xi.space``
    xi: GrassmannElement
    projection: BasisProjection, optional
        projection diagonalizing C; defaults to the spectral projection of a Hermitian C, else
        to the copy-wise reference projection

    Returns
    -------
    value: complex
    """
    space = xi.space
    _covariance_space(covariance, space)
    projection = _diagonalizing(covariance, space, projection)
    try:
        inverse = matrix_inverse(covariance.H)
    except Singular as exc:
        raise SingularCovariance('covariance is not invertible', **exc.context) from exc
    psi = projection.range_basis
    normalization = complex(np.linalg.det(psi.conj().T @ covariance.H @ psi))
    sign = orientation_sign(extended_projection(space.projection, len(space.labels)), projection)
    weight = grassmann_exp(0.5 * bilinear_grassmann(space, inverse))
    value = normalization * sign * weight.wedge(xi).integrate_all()
    logger.debug('literal Gaussian integral over %d generators: %s', space.n_slots, value)

    return complex(value)


def generator_moment_matrix(covariance, slot_matrix):
    """G[s, t] = <A e_s, C e_t> for the generator vectors e_s given as columns."""
    e = as_matrix(slot_matrix, name='slot matrix', square=False)
    return skew_part(covariance.space.conjugate(e).conj().T @ covariance.H @ e)


def wick_sum(moments, monomials):
    """
    Sum of coefficient * Pf(G[slots, slots]) over (slots, coefficient) pairs.

    ``slots`` must list the generators of each monomial in the order of the wedge product.
    """
    total = 0.0j
    count = 0
    for slots, coeff in monomials:
        count += 1
        if count > config.MAX_WICK_TERMS:
            raise CapacityExceeded('Wick expansion exceeds {} terms'.format(config.MAX_WICK_TERMS))
        degree = len(slots)
        if degree % 2:
            continue
        if degree > config.MAX_WICK_GENERATORS:
            raise CapacityExceeded('monomial of degree {} in the Wick expansion'.format(degree),
                                   cap=config.MAX_WICK_GENERATORS)
        if degree == 0:
            total += coeff
            continue
        idx = np.asarray(slots)
        total += coeff * pfaffian(moments[np.ix_(idx, idx)])

    return complex(total)


def wick_integral(covariance, xi):
    """Gaussian integral of xi monomial by monomial, each one a Pfaffian."""
    space = xi.space
    _covariance_space(covariance, space)
    moments = generator_moment_matrix(covariance, space.slot_matrix())
    even = popcount(xi.masks) % 2 == 0
    monomials = (([s for s in range(space.n_slots) if int(mask) >> s & 1], coeff)
                 for mask, coeff in zip(xi.masks[even], xi.coeffs[even]))

    return wick_sum(moments, monomials)
