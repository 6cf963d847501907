# coding: utf-8


"""Circle product, involution and the canonical isomorphism with the CAR algebra."""


import logging
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial

import numpy as np
import scipy.linalg

from ..algebra.fock import FockRep, is_even
from ..errors import ShapeMismatch, SpaceMismatch
from ..linalg.numkernel import hermitian_function, max_abs, pfaffian
from .algebra import GrassmannElement, GrassmannSpace, grassmann_exp, pairing_element


__all__ = ['fock_rep_for', 'kappa_iso', 'kappa_inv', 'circle_product', 'antisymmetrized_circle',
           'wedge_expansion', 'star_involution', 'chernoff_step', 'chernoff_approx', 'chernoff_bilinear_product']


logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def fock_rep_for(projection):
    """Shared Fock representation of a basis projection."""
    return FockRep(projection)


def _same_projection(p1, p2):
    return p1 is p2 or (p1.range_basis.shape == p2.range_basis.shape
                        and max_abs(p1.range_basis - p2.range_basis) <= 1e-12)


def _single_copy(xi, projection):
    if len(xi.space.labels) != 1:
        raise SpaceMismatch('a single-copy element is required, got copies {}'.format(xi.space.labels))
    if not _same_projection(xi.space.projection, projection):
        xi = xi.to_projection(projection)
    return xi


def kappa_iso(projection, a):
    """
    Grassmann element of a Fock operator under the canonical isomorphism.

    Parameters
    ----------
    projection: BasisProjection
        fixes the slot basis and must be the projection of ``a.rep``
    a: FockOperator

    Returns
    -------
    GrassmannElement
        element on the single copy 0 of ``projection``
    """
    if not _same_projection(a.rep.projection, projection):
        raise SpaceMismatch('Fock operator belongs to another basis projection')
    rep = a.rep
    coeffs = scipy.linalg.lu_solve(rep.monomial_factorization(), a.M.ravel())
    xi = GrassmannElement(GrassmannSpace(projection, (0,)), np.arange(4 ** rep.m), coeffs)
    # an even operator has no odd monomials
    return xi.even_part() if is_even(rep, a) else xi


def kappa_inv(projection, xi):
    """Fock operator sum_M c_M (normal monomial M)."""
    xi = _single_copy(xi, projection)
    rep = fock_rep_for(projection)
    mat = np.zeros((rep.dimension, rep.dimension), dtype=np.complex128)
    for mask, coeff in zip(xi.masks.tolist(), xi.coeffs):
        mat += coeff * rep.normal_monomial(mask)

    return rep.operator(mat)


def _kappa_copy(xi, target, conjugate_label, plain_label):
    """Send A h_P directions to copy ``conjugate_label`` and h_P directions to ``plain_label``."""
    m = xi.space.m
    slot_map = [target.slot(plain_label, d) if d < m else target.slot(conjugate_label, d)
                for d in range(xi.space.block)]
    return xi.relabel(target, slot_map)


def _circle_berezin(projection, xi, zeta):
    m = projection.m
    space = GrassmannSpace(projection, (0, 1))
    weight = grassmann_exp(-pairing_element(space, 0, 0) + pairing_element(space, 0, 1)
                           - pairing_element(space, 1, 1) + pairing_element(space, 1, 0))
    integrand = _kappa_copy(xi, space, 0, 1).wedge(_kappa_copy(zeta, space, 1, 0)).wedge(weight)
    out = integrand.integrate_copy(1)
    return (-1) ** m * out


def circle_product(projection, xi, zeta, method='fock'):
    """
    Circle product xi o_P zeta of two single-copy elements.

    Parameters
    ----------
    projection: BasisProjection
    xi, zeta: GrassmannElement
    method: {'fock', 'berezin'}, default 'fock'
        'fock' multiplies the images under the inverse canonical isomorphism; 'berezin'
        evaluates the defining integral over an auxiliary copy

    Returns
    -------
    GrassmannElement
        on the space of ``xi``
    """
    home = xi.space
    if home != zeta.space:
        raise SpaceMismatch('circle product of elements on different spaces')
    a = _single_copy(xi, projection)
    b = _single_copy(zeta, projection)
    if method == 'fock':
        out = kappa_iso(projection, kappa_inv(projection, a) @ kappa_inv(projection, b))
    elif method == 'berezin':
        out = _circle_berezin(projection, a, b)
    else:
        raise ValueError('unknown circle product method {!r}'.format(method))
    out = GrassmannElement(GrassmannSpace(projection, home.labels), out.masks, out.coeffs)
    if not _same_projection(home.projection, projection):
        out = out.to_projection(home.projection)

    return GrassmannElement(home, out.masks, out.coeffs)


def _vector_elements(projection, vectors):
    space = GrassmannSpace(projection, (0,))
    return space, [GrassmannElement.vector(space, v) for v in vectors]


def antisymmetrized_circle(projection, vectors, method='fock'):
    """(1/N!) sum_pi (-1)^pi phi_pi(1) o_P ... o_P phi_pi(N)."""
    if len(vectors) < 2:
        raise ShapeMismatch('at least two vectors are required')
    space, elements = _vector_elements(projection, vectors)
    n = len(elements)
    total = GrassmannElement.zero(space)
    for perm in permutations(range(n)):
        inversions = sum(1 for i, j in combinations(range(n), 2) if perm[i] > perm[j])
        product = elements[perm[0]]
        for k in perm[1:]:
            product = circle_product(projection, product, elements[k], method=method)
        total = total + (-1) ** inversions * product

    return total / factorial(n)


def wedge_expansion(projection, vectors):
    """
    Wedge expansion of the antisymmetrized circle product.

    Sum over even subsets N of Pf[<A phi_k, (P^perp - P)/2 phi_l>]_{k,l in N} times
    sign(N, {1..N}) times the wedge of the remaining vectors in increasing order.
    """
    space, elements = _vector_elements(projection, vectors)
    phi = np.array(vectors, dtype=np.complex128).T
    kernel = 0.5 * (projection.complement - projection.P)
    pairing = projection.space.conjugate(phi).conj().T @ kernel @ phi
    n = phi.shape[1]
    total = GrassmannElement.zero(space)
    for size in range(0, n + 1, 2):
        for chosen in combinations(range(n), size):
            rest = [k for k in range(n) if k not in chosen]
            # moving the chosen indices to the front, in order
            inversions = sum(1 for c in chosen for r in rest if r < c)
            weight = pfaffian(0.5 * (pairing[np.ix_(chosen, chosen)] - pairing[np.ix_(chosen, chosen)].T)) \
                if size else 1.0
            term = GrassmannElement.scalar(space, 1.0)
            for k in rest:
                term = term.wedge(elements[k])
            total = total + (-1) ** inversions * weight * term

    return total


def star_involution(xi, projection=None):
    """
    Involution of the Grassmann algebra; antilinear, (xi ^ zeta)* = zeta* ^ xi*.

    A degree-n monomial e_1...e_n maps to (A e_n)...(A e_1); with respect to another basis
    projection the element is first rewritten in that projection's slots.
    """
    if len(xi.space.labels) != 1:
        raise SpaceMismatch('the involution acts on single-copy elements')
    home = xi.space
    if projection is not None and not _same_projection(home.projection, projection):
        return star_involution(xi.to_projection(projection)).to_projection(home.projection)
    slot_map = [home.conjugate_slot(s) for s in range(home.block)]
    mapped = xi.relabel(home, slot_map)
    degrees = mapped.degrees()
    reversal = np.where((degrees * (degrees - 1) // 2) % 2 == 0, 1.0, -1.0)

    return GrassmannElement(home, mapped.masks, reversal * np.conj(mapped.coeffs))


def chernoff_step(projection, a, n):
    """Single factor kappa^-1(exp(kappa(A)/n)) of the Chernoff product."""
    if n < 1:
        raise ValueError('n must be a positive integer')
    step = kappa_inv(projection, grassmann_exp(kappa_iso(projection, a) / n))
    logger.debug('Chernoff factor for n = %d built from %d modes', n, projection.m)
    return a.rep.operator(step.M)


def chernoff_approx(projection, a, n):
    """
    X_A^(n) = [kappa^-1(exp(kappa(A)/n))]^n.

    Returns
    -------
    FockOperator
    """
    step = chernoff_step(projection, a, n)
    return a.rep.operator(np.linalg.matrix_power(step.M, int(n)))


def chernoff_bilinear_product(rep, operator, n, s=1.0):
    """
    exp(s Tr(P^perp H P^perp)) prod_j (1 + 2/n <psi_j, H psi_j> B(psi_j) B(psi_j)*)^(s n).

    The range basis of ``rep.projection`` must consist of eigenvectors of 2PHP, which is the
    case for the output of ``diagonalizing_projection``.
    """
    psi = rep.projection.range_basis
    h = operator.H
    product = np.eye(rep.dimension, dtype=np.complex128)
    for j in range(rep.m):
        energy = complex(psi[:, j].conj() @ h @ psi[:, j])
        a = rep.annihilators[j]
        product = product @ (np.eye(rep.dimension) + 2.0 / n * energy * (a @ a.conj().T))
    shift = np.trace(rep.projection.complement @ h @ rep.projection.complement)
    power = hermitian_function(0.5 * (product + product.conj().T), lambda w: w ** (s * n))

    return rep.operator(np.exp(s * shift) * power)
