# coding: utf-8


"""Fermion models on boxes of Z^d in the self-dual formalism.

The box Lambda_L = {-L, ..., L}^d carries |S| spin modes per site; modes (x, s) are ordered
site-major, sites in lexicographic order. The self-dual space of the box is h + h*, and the
index of the A-image of mode j is m + j.
"""


import json
import logging
import os
from itertools import product

import numpy as np

from ..algebra.selfdual import BasisProjection, SelfDualOperator, SelfDualSpace, kappa_one_particle, kappa_tilde
from ..errors import ModelError


__all__ = ['LatticeModel', 'model_from_dict', 'load_model', 'bundled_model', 'bundled_models',
           'build_hamiltonian', 'canonical_projection', 'DATA_DIR']


logger = logging.getLogger(__name__)


DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.realpath(__file__))), 'data')

_MATCH_TOL = 1e-12


class LatticeModel(object):
    def __init__(self, d, L, spins, hopping, pairing=None, interaction=None, observable=None, name=''):
        """
        Parameters
        ----------
        d: int
            spatial dimension
        L: int
            half-side of the box
        spins: list
            spin labels
        hopping: dict
            (dx, s, t) -> amplitude, already closed under (dx, s, t) -> (-dx, t, s) with conjugation
        pairing: dict, optional
            (dx, s, t) -> amplitude, closed under (dx, s, t) -> (-dx, t, s) with a sign flip
        interaction, observable: list of dict, optional
            term lists understood by :mod:`berezin_lab.genfunc.moment`
        name: str, default ''
        """
        if int(d) != d or d < 1:
            raise ModelError('dimension must be a positive integer, got {}'.format(d))
        if int(L) != L or L < 0:
            raise ModelError('box half-side must be a non-negative integer, got {}'.format(L))
        if not spins or len(set(spins)) != len(spins):
            raise ModelError('spin labels must be distinct and non-empty')
        self.d = int(d)
        self.L = int(L)
        self.spins = list(spins)
        self.hopping = dict(hopping)
        self.pairing = dict(pairing or {})
        self.interaction = list(interaction or [])
        self.observable = list(observable or [])
        self.name = name
        self._sites = [tuple(x) for x in product(range(-self.L, self.L + 1), repeat=self.d)]
        self._modes = [(x, s) for x in self._sites for s in self.spins]
        self._index = {mode: j for j, mode in enumerate(self._modes)}

    def __repr__(self):
        return 'LatticeModel(name={!r}, d={}, L={}, spins={})'.format(self.name, self.d, self.L, self.spins)

    @property
    def m(self):
        return len(self._modes)

    @property
    def interaction_range(self):
        """Largest Euclidean length of a hopping or pairing vector."""
        keys = list(self.hopping) + list(self.pairing)
        return max((float(np.linalg.norm(dx)) for dx, _, _ in keys), default=0.0)

    def sites(self, half_side=None):
        """Sites of Lambda_l for l = ``half_side`` (default L), as tuples."""
        if half_side is None:
            return list(self._sites)
        return [x for x in self._sites if max((abs(c) for c in x), default=0) <= half_side]

    def modes(self):
        return list(self._modes)

    def mode_index(self, site, spin):
        try:
            return self._index[(tuple(site), spin)]
        except KeyError:
            raise ModelError('mode ({}, {!r}) is not part of the box'.format(tuple(site), spin))

    def contains(self, site):
        site = tuple(site)
        return len(site) == self.d and all(-self.L <= c <= self.L for c in site)

    def with_size(self, L):
        return LatticeModel(self.d, L, self.spins, self.hopping, self.pairing, self.interaction,
                            self.observable, name=self.name)

    def _kernel(self, amplitudes):
        k = np.zeros((self.m, self.m), dtype=np.complex128)
        for (dx, s, t), value in amplitudes.items():
            for x in self._sites:
                y = tuple(a + b for a, b in zip(x, dx))
                # open boundary: bonds leaving the box are dropped
                if (y, t) in self._index:
                    k[self._index[(x, s)], self._index[(y, t)]] = value
        return k

    def one_particle(self):
        """
        Hopping matrix h and pairing matrix G on the modes of the box.

        Returns
        -------
        h: numpy.ndarray
            Hermitian, h[(x,s), (x+dx,t)] = hopping(dx, s, t)
        g: numpy.ndarray
            antisymmetric, G[(x,s), (x+dx,t)] = pairing(dx, s, t)
        """
        return self._kernel(self.hopping), self._kernel(self.pairing)

    def positions(self):
        """Site coordinates of every index of the self-dual space, shape (2m, d)."""
        coords = np.array([x for x, _ in self._modes], dtype=float).reshape(self.m, self.d)
        return np.vstack([coords, coords])

    def distances(self):
        """Euclidean distances |x1 - x2| between the sites of all pairs of self-dual indices."""
        pos = self.positions()
        return np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)

    def to_dict(self):
        def entries(amplitudes):
            return [{'dx': list(dx), 's': s, 't': t, 're': float(np.real(v)), 'im': float(np.imag(v))}
                    for (dx, s, t), v in sorted(amplitudes.items(), key=lambda kv: repr(kv[0]))]
        return {'name': self.name, 'd': self.d, 'L': self.L, 'spins': self.spins,
                'hopping': entries(self.hopping), 'pairing': entries(self.pairing),
                'interaction': self.interaction, 'observable': self.observable}


def _amplitude(entry):
    return complex(float(entry.get('re', 0.0)), float(entry.get('im', 0.0)))


def _complete(entries, d, spins, partner, kind):
    """Add the partner (-dx, t, s) of every entry; a contradicting pair raises ModelError."""
    table = {}

    def put(key, value):
        if key in table and abs(table[key] - value) > _MATCH_TOL:
            raise ModelError('{} amplitudes for {} are inconsistent: {} vs {}'.format(kind, key, table[key], value))
        table[key] = value

    for entry in entries:
        try:
            dx = tuple(int(c) for c in entry['dx'])
            s, t = entry['s'], entry['t']
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError('malformed {} entry {!r}'.format(kind, entry)) from exc
        if len(dx) != d:
            raise ModelError('{} vector {} does not have {} components'.format(kind, dx, d))
        if s not in spins or t not in spins:
            raise ModelError('unknown spin label in {} entry {!r}'.format(kind, entry))
        value = _amplitude(entry)
        back = tuple(-c for c in dx)
        put((dx, s, t), value)
        put((back, t, s), partner(value))
    return {key: value for key, value in table.items() if value != 0}


def model_from_dict(data):
    """
    LatticeModel from its JSON description.

    Only one member of each pair (dx, s, t), (-dx, t, s) needs to be given; the other one is
    completed by conjugation for hopping and by a sign flip for pairing.

    Raises
    ------
    ModelError
        on missing fields, unknown spins or inconsistent pairs
    """
    try:
        d = int(data['d'])
        L = int(data['L'])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError('model needs integer fields d and L') from exc
    spins = list(data.get('spins', [0]))
    hopping = _complete(data.get('hopping', []), d, spins, np.conj, 'hopping')
    pairing = _complete(data.get('pairing', []), d, spins, lambda v: -v, 'pairing')
    model = LatticeModel(d, L, spins, hopping, pairing, data.get('interaction'), data.get('observable'),
                         name=data.get('name', ''))
    logger.debug('loaded %r with %d hopping and %d pairing amplitudes', model, len(hopping), len(pairing))

    return model


def load_model(path):
    """
    Read a model file.

    Raises
    ------
    FileNotFoundError, json.JSONDecodeError, ModelError
    """
    with open(path) as f:
        data = json.load(f)
    return model_from_dict(data)


def bundled_models():
    return sorted(os.path.splitext(f)[0] for f in os.listdir(DATA_DIR) if f.endswith('.json'))


def bundled_model(name):
    """Model shipped with the package, e.g. ``bundled_model('single_mode')``."""
    path = os.path.join(DATA_DIR, name + '.json')
    if not os.path.exists(path):
        raise ModelError('no bundled model {!r}; available: {}'.format(name, bundled_models()))
    return load_model(path)


def build_hamiltonian(model):
    """
    H_L = 2(kappa(h) + kappa~(G)) = [[h, G], [-conj G, -conj h]] on h_L + h_L*.

    exp(beta/2 <B, H_L B>) is proportional to exp(-beta(dGamma(h) + dUpsilon(G))).

    Returns
    -------
    SelfDualOperator
        a self-dual Hamiltonian with open boundary conditions
    """
    h, g = model.one_particle()
    space = SelfDualSpace.canonical(model.m)
    operator = SelfDualOperator(space, 2.0 * (kappa_one_particle(h) + kappa_tilde(g)))
    operator.require_hamiltonian()
    logger.debug('Hamiltonian of %r on %d modes, norm %.6g', model, model.m, operator.norm())

    return operator


def canonical_projection(model):
    """Projection on the annihilation block; it diagonalizes H_L when there is no pairing."""
    return BasisProjection.canonical(SelfDualSpace.canonical(model.m))
