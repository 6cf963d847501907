# coding: utf-8


"""Tracial state as a Berezin integral over copies of the one-particle space.

Both evaluators below compute

    int_P d(h^(N)) exp((1/2) <h, d_P h>) sites[0]^(0) ^ ... ^ sites[N-1]^(N-1)

for single-copy Grassmann elements ``sites``. :func:`literal_integral` builds the full
integrand on N copies. :func:`sweep_integral` needs even sites and removes one copy at a
time, keeping at most three copies alive; the weight splits into commuting even factors,
one per copy and one per neighbouring pair of copies.
"""


import logging


from ..errors import ParityViolation, ShapeMismatch, SpaceMismatch
from ..grassmann.algebra import GrassmannElement, GrassmannSpace, grassmann_exp, pairing_element
from ..grassmann.circle import kappa_iso
from ..covariance.covariance import derivative_element


__all__ = ['literal_integral', 'sweep_integral', 'trace_formula']


logger = logging.getLogger(__name__)


def _check_sites(projection, sites, even):
    if not sites:
        raise ShapeMismatch('at least one copy is required')
    home = GrassmannSpace(projection, (0,))
    for k, site in enumerate(sites):
        if site.space != home:
            raise SpaceMismatch('site {} is not a single-copy element over the projection'.format(k))
        if even and not site.is_even():
            raise ParityViolation('site {} is not even'.format(k))


def literal_integral(projection, sites):
    """
    Full evaluation on ``len(sites)`` copies; subject to the Grassmann generator cap.

    Parameters
    ----------
    projection: BasisProjection
    sites: list of GrassmannElement
        single-copy elements over ``projection``

    Returns
    -------
    value: complex
    """
    _check_sites(projection, sites, even=False)
    space = GrassmannSpace(projection, range(len(sites)))
    integrand = GrassmannElement.scalar(space, 1.0)
    for k, site in enumerate(sites):
        integrand = integrand.wedge(site.at_copy(k, space))
    integrand = integrand.wedge(grassmann_exp(derivative_element(space)))
    logger.debug('literal integral over %d generators, %d terms', space.n_slots, len(integrand))

    return complex(integrand.integrate_all())


def _bond(space, k, l, sign):
    return grassmann_exp(sign * pairing_element(space, k, l))


def sweep_integral(projection, sites):
    """
    Copy-by-copy evaluation for even sites.

    The derivative matrix has diagonal 1 (2 for a single copy), -1 on the bonds
    <h^(k), h^(k-1)> and +1 on the wrap-around bond <h^(0), h^(N-1)>.
    """
    _check_sites(projection, sites, even=True)
    n_copies = len(sites)
    single = GrassmannSpace(projection, (0,))
    diagonal = 2.0 if n_copies == 1 else 1.0
    local = grassmann_exp(diagonal * pairing_element(single, 0, 0))
    sites = [s.wedge(local) for s in sites]
    if n_copies == 1:
        return complex(sites[0].integrate_all())

    pair = GrassmannSpace(projection, (0, 1))
    acc = sites[0].at_copy(0, pair).wedge(sites[1].at_copy(1, pair)).wedge(_bond(pair, 1, 0, -1.0))
    for j in range(1, n_copies - 1):
        triple = GrassmannSpace(projection, (0, j, j + 1))
        acc = acc.embed(triple)
        acc = acc.wedge(sites[j + 1].at_copy(j + 1, triple)).wedge(_bond(triple, j + 1, j, -1.0))
        acc = acc.integrate_copy(j)
    last = acc.space
    acc = acc.wedge(_bond(last, 0, n_copies - 1, 1.0))
    value = acc.integrate_copy(n_copies - 1).integrate_all()
    logger.debug('sweep over %d copies of %d modes', n_copies, projection.m)

    return complex(value)


def trace_formula(projection, operators, method='literal'):
    """
    tr(A_0 ... A_{n-1}) as 2^{-m} int_P d(h^(n)) e^{<h, d_P h>/2} prod_k kappa_P^(k)(A_k).

    Parameters
    ----------
    projection: BasisProjection
    operators: list of FockOperator
        operators of the Fock representation of ``projection``
    method: {'literal', 'sweep'}, default 'literal'
        'sweep' requires even operators

    Returns
    -------
    value: complex
        the normalized trace

    Raises
    ------
    CapacityExceeded
        on the literal path, if n dim H exceeds the generator cap
    """
    sites = [kappa_iso(projection, a) for a in operators]
    if method == 'literal':
        value = literal_integral(projection, sites)
    elif method == 'sweep':
        value = sweep_integral(projection, sites)
    else:
        raise ValueError('unknown trace formula method {!r}'.format(method))

    return value / 2 ** projection.m
