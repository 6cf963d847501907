# coding: utf-8


"""Finite-volume logarithmic moment generating functions of lattice models.

Interactions and observables are lists of terms, each one a dict with a ``kind``:

    {"kind": "density", "s": ..., "u": ...}                      u n_{x,s}
    {"kind": "density_pair", "dx": [...], "s": ..., "t": ..., "u": ...}
                                                                 u n_{x,s} n_{x+dx,t}
    {"kind": "hopping", "dx": [...], "s": ..., "t": ..., "re": ..., "im": ...}
                                                                 c a*_{x,s} a_{x+dx,t} + h.c.

A term is summed over every site x of the region, or placed at ``"site"`` only when that key
is present; translates leaving the region are dropped.
"""


import logging

import numpy as np

from .. import config
from ..algebra.fock import FockRep, log_trace_ratio
from ..errors import ModelError, NotApplicable
from ..lattice.model import build_hamiltonian, canonical_projection


__all__ = ['build_interaction', 'energy_density', 'log_moment_generating', 'TERM_KINDS']


logger = logging.getLogger(__name__)


TERM_KINDS = ('density', 'density_pair', 'hopping')


class _Modes(object):
    """Lattice annihilators a_{x,s} = B(e_(x,s)) inside a Fock representation of the box."""

    def __init__(self, model, rep):
        if rep.space.dim != 2 * model.m:
            raise ModelError('Fock representation of dimension {} for a box with {} modes'.format(
                rep.space.dim, model.m))
        self.model = model
        self.rep = rep
        self._eye = np.eye(2 * model.m)
        self._cache = {}

    def annihilator(self, site, spin):
        j = self.model.mode_index(site, spin)
        if j not in self._cache:
            self._cache[j] = self.rep.generator(self._eye[:, j]).M
        return self._cache[j]

    def number(self, site, spin):
        a = self.annihilator(site, spin)
        return a.conj().T @ a


def _shift(x, dx):
    return tuple(a + b for a, b in zip(x, dx))


def _term_sites(model, term, region):
    if 'site' in term:
        site = tuple(int(c) for c in term['site'])
        if len(site) != model.d:
            raise ModelError('term site {} does not have {} components'.format(site, model.d))
        return [site] if site in region else []
    return sorted(region)


def _term_matrix(modes, term, x, region):
    kind = term.get('kind')
    dx = tuple(int(c) for c in term.get('dx', [0] * modes.model.d))
    y = _shift(x, dx)
    if y not in region:
        return None
    if kind == 'density':
        return float(term['u']) * modes.number(x, term['s'])
    if kind == 'density_pair':
        return float(term['u']) * modes.number(x, term['s']) @ modes.number(y, term['t'])
    if kind == 'hopping':
        c = complex(float(term.get('re', 0.0)), float(term.get('im', 0.0)))
        hop = c * modes.annihilator(x, term['s']).conj().T @ modes.annihilator(y, term['t'])
        return hop + hop.conj().T
    raise ModelError('unknown term kind {!r}; expected one of {}'.format(kind, TERM_KINDS))


def build_interaction(model, terms, region_half_side, rep):
    """
    Sum of the terms over the sites of Lambda_l, l = ``region_half_side``.

    Parameters
    ----------
    model: LatticeModel
    terms: list of dict
    region_half_side: int
    rep: FockRep
        any Fock representation of the self-dual space of ``model``

    Returns
    -------
    FockOperator
        even and self-adjoint

    Raises
    ------
    ModelError
        on an unknown kind, spin or malformed term
    """
    if region_half_side > model.L:
        raise ModelError('region half-side {} exceeds the box half-side {}'.format(region_half_side, model.L))
    modes = _Modes(model, rep)
    region = set(model.sites(region_half_side))
    total = np.zeros((rep.dimension, rep.dimension), dtype=np.complex128)
    for term in terms:
        try:
            for x in _term_sites(model, term, region):
                mat = _term_matrix(modes, term, x, region)
                if mat is not None:
                    total += mat
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError('malformed term {!r}'.format(term)) from exc
    logger.debug('%d terms over %d sites', len(terms), len(region))

    return rep.operator(total)


def energy_density(model, terms, half_side, rep):
    """K = sum_{x in Lambda_l} Psi_x, that is |Lambda_l| times the mean density of Psi."""
    return build_interaction(model, terms, half_side, rep)


def log_moment_generating(model, w_terms, k_terms, beta, s, volumes):
    """
    J(s) = 1/|Lambda_l| ln[tr(e^{beta(<B,HB>/2 - W)} e^{sK}) / tr(e^{beta(<B,HB>/2 - W)})].

    H is the Hamiltonian of the box Lambda_{L_f}, W the interaction restricted to
    Lambda_{L_i} and K the observable summed over Lambda_l; everything is exact Fock-space
    linear algebra.

    Parameters
    ----------
    model: LatticeModel
    w_terms, k_terms: list of dict
    beta: float
    s: float
    volumes: tuple of int
        (L_f, L_i, l) with l <= L_i <= L_f

    Returns
    -------
    value: float

    Raises
    ------
    CapacityExceeded
        if the box of half-side L_f has more than MAX_FOCK_MODES modes
    NotApplicable
        if the argument of the logarithm is not a positive real
    """
    l_f, l_i, l = (int(v) for v in volumes)
    if not 0 <= l <= l_i <= l_f:
        raise ModelError('volumes must satisfy 0 <= l <= L_i <= L_f, got {}'.format(volumes))
    box = model.with_size(l_f)
    rep = FockRep(canonical_projection(box))
    operator = build_hamiltonian(box)
    w = build_interaction(box, w_terms, l_i, rep)
    k = energy_density(box, k_terms, l, rep)
    value = log_trace_ratio(rep, operator, w, k, beta, s, include_interaction_in_reference=True)
    if abs(value.imag) > config.LOG_ARGUMENT_IMAG_TOL:
        raise NotApplicable('the trace ratio is not a positive real', imag=float(value.imag))
    volume = len(box.sites(l))
    logger.info('J(%.6g) on volumes %s: %.12g', s, (l_f, l_i, l), value.real / volume)

    return float(value.real / volume)
