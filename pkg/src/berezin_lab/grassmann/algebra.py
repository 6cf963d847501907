# coding: utf-8


"""Finite Grassmann algebras over copies of a self-dual space.

Generators are the slot vectors of a reference basis projection, repeated once per copy.
Inside a copy the slot order is psi_0..psi_{m-1} followed by A psi_0..A psi_{m-1}, and copies
are laid out in increasing label order. A monomial is a bitmask over these slots, read in
ascending slot order. Every sign in the module comes from this single order.
"""


import logging
from itertools import combinations

import numpy as np

from .. import config
from ..errors import CapacityExceeded, ShapeMismatch, SpaceMismatch
from ..linalg.numkernel import as_matrix


__all__ = ['GrassmannSpace', 'GrassmannElement', 'wedge', 'berezin_derivative', 'berezin_integral',
           'grassmann_exp', 'bilinear_grassmann', 'pairing_element', 'popcount', 'TOP_MONOMIAL_SIGN']


logger = logging.getLogger(__name__)


_POPCOUNT16 = np.array([bin(i).count('1') for i in range(1 << 16)], dtype=np.int64)
_CHUNK_PAIRS = 1 << 22


def popcount(x):
    """Number of set bits of every entry of an integer array."""
    x = np.asarray(x, dtype=np.int64)
    return (_POPCOUNT16[x & 0xFFFF] + _POPCOUNT16[(x >> 16) & 0xFFFF]
            + _POPCOUNT16[(x >> 32) & 0xFFFF] + _POPCOUNT16[(x >> 48) & 0xFFFF])


def _merge_sign(a, b, n_slots):
    """Sign of xi_a ^ xi_b = sign * xi_{a|b} for disjoint ascending monomials."""
    inversions = np.zeros(a.shape, dtype=np.int64)
    for j in range(n_slots):
        inversions += ((b >> j) & 1) * popcount(a >> (j + 1))
    return 1 - 2 * (inversions & 1)


class GrassmannSpace(object):
    def __init__(self, projection, labels=(0,), cap=None):
        """
        Parameters
        ----------
        projection: BasisProjection
            reference projection; its slot basis labels the generators of every copy
        labels: int or iterable of int
            copy labels; an int n means labels 0..n-1
        cap: int, optional
            maximal number of generators, default MAX_GRASSMANN_GENERATORS
        """
        if isinstance(labels, (int, np.integer)):
            labels = range(int(labels))
        labels = tuple(sorted(int(k) for k in labels))
        if len(set(labels)) != len(labels):
            raise ShapeMismatch('copy labels must be distinct')
        self.projection = projection
        self.base = projection.space
        self.m = projection.m
        self.block = 2 * self.m
        self.labels = labels
        self.n_slots = len(labels) * self.block
        cap = config.MAX_GRASSMANN_GENERATORS if cap is None else cap
        if self.n_slots > cap:
            raise CapacityExceeded('{} generators exceed the cap of {}'.format(self.n_slots, cap),
                                   generators=self.n_slots, cap=cap)
        self._position = {k: p for p, k in enumerate(labels)}

    def __eq__(self, other):
        return (isinstance(other, GrassmannSpace) and self.labels == other.labels
                and (self.projection is other.projection
                     or np.allclose(self.projection.slot_basis, other.projection.slot_basis)))

    def __repr__(self):
        return 'GrassmannSpace(m={}, labels={})'.format(self.m, self.labels)

    def with_labels(self, labels, cap=None):
        return GrassmannSpace(self.projection, labels, cap=cap)

    def position(self, label):
        try:
            return self._position[label]
        except KeyError:
            raise SpaceMismatch('copy {} is not part of {}'.format(label, self))

    def slot(self, label, direction):
        return self.position(label) * self.block + direction

    def conjugate_slot(self, slot):
        """Slot of A e_s; A maps psi_i to A psi_i within the same copy."""
        base, direction = divmod(slot, self.block)
        return base * self.block + (direction + self.m) % self.block

    def block_mask(self, label):
        return ((1 << self.block) - 1) << (self.position(label) * self.block)

    def slot_matrix(self):
        """Block-diagonal matrix whose columns are the generator vectors in ambient coordinates."""
        return np.kron(np.eye(len(self.labels)), self.projection.slot_basis)

    def involution_matrix(self):
        return np.kron(np.eye(len(self.labels)), self.base.J)

    def check(self, other):
        if self != other:
            raise SpaceMismatch('Grassmann elements live on different spaces: {} vs {}'.format(self, other))


class GrassmannElement(object):
    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, space, masks, coeffs, prune=True):
        """
        Parameters
        ----------
        space: GrassmannSpace
        masks: array-like of int
            monomial bitmasks; repeated masks are summed
        coeffs: array-like of complex
        prune: bool, default True
            drop coefficients with modulus below PRUNE_TOL
        """
        masks = np.asarray(masks, dtype=np.int64).ravel()
        coeffs = np.asarray(coeffs, dtype=np.complex128).ravel()
        if masks.shape != coeffs.shape:
            raise ShapeMismatch('masks and coefficients differ in length')
        if masks.size:
            uniq, inverse = np.unique(masks, return_inverse=True)
            if uniq.size != masks.size:
                re = np.bincount(inverse, weights=coeffs.real, minlength=uniq.size)
                im = np.bincount(inverse, weights=coeffs.imag, minlength=uniq.size)
                coeffs = re + 1j * im
            else:
                coeffs = coeffs[np.argsort(masks, kind='stable')]
            masks = uniq
            if prune:
                keep = np.abs(coeffs) > config.PRUNE_TOL
                masks, coeffs = masks[keep], coeffs[keep]
        self.space = space
        self.masks = masks
        self.coeffs = coeffs

    # constructors

    @classmethod
    def zero(cls, space):
        return cls(space, [], [])

    @classmethod
    def scalar(cls, space, value):
        return cls(space, [0], [value])

    @classmethod
    def generator(cls, space, slot):
        return cls(space, [1 << slot], [1.0])

    @classmethod
    def vector(cls, space, phi, label=None):
        """The vector phi of copy ``label`` as a degree-one element."""
        label = space.labels[0] if label is None else label
        c = space.projection.coordinates(phi)
        offset = space.slot(label, 0)
        return cls(space, [1 << (offset + s) for s in range(space.block)], c)

    @classmethod
    def from_terms(cls, space, terms):
        """Element from (slot tuple, coefficient) pairs; slots may come in any order."""
        masks, coeffs = [], []
        for slots, coeff in terms:
            sign, mask = _sort_slots(slots)
            if sign:
                masks.append(mask)
                coeffs.append(sign * coeff)
        return cls(space, masks, coeffs)

    def __repr__(self):
        return 'GrassmannElement({} terms on {})'.format(self.masks.size, self.space)

    def __len__(self):
        return int(self.masks.size)

    def terms(self):
        return dict(zip(self.masks.tolist(), self.coeffs.tolist()))

    def copy_with(self, masks, coeffs, space=None):
        return GrassmannElement(self.space if space is None else space, masks, coeffs)

    # linear structure

    def _coerce(self, other):
        if isinstance(other, GrassmannElement):
            self.space.check(other.space)
            return other
        return GrassmannElement.scalar(self.space, other)

    def __add__(self, other):
        other = self._coerce(other)
        return self.copy_with(np.concatenate([self.masks, other.masks]),
                              np.concatenate([self.coeffs, other.coeffs]))

    __radd__ = __add__

    def __neg__(self):
        return self.copy_with(self.masks, -self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, scalar):
        if isinstance(scalar, GrassmannElement):
            return self.wedge(scalar)
        return self.copy_with(self.masks, scalar * self.coeffs)

    def __rmul__(self, scalar):
        return self.copy_with(self.masks, scalar * self.coeffs)

    def __truediv__(self, scalar):
        return self.copy_with(self.masks, self.coeffs / scalar)

    # inspection

    def scalar_part(self):
        hit = self.masks == 0
        return complex(self.coeffs[hit][0]) if hit.any() else 0.0j

    def degrees(self):
        return popcount(self.masks)

    def homogeneous_part(self, degree):
        keep = self.degrees() == degree
        return self.copy_with(self.masks[keep], self.coeffs[keep])

    def is_even(self):
        return bool(np.all(self.degrees() % 2 == 0))

    def even_part(self):
        keep = self.degrees() % 2 == 0
        return self.copy_with(self.masks[keep], self.coeffs[keep])

    def coefficient(self, mask):
        hit = self.masks == mask
        return complex(self.coeffs[hit][0]) if hit.any() else 0.0j

    def max_abs_difference(self, other):
        diff = self - other
        return float(np.max(np.abs(diff.coeffs))) if len(diff) else 0.0

    def support_labels(self):
        used = np.bitwise_or.reduce(self.masks) if self.masks.size else 0
        return tuple(k for k in self.space.labels if used & self.space.block_mask(k))

    # products

    def wedge(self, other):
        self.space.check(other.space)
        if not len(self) or not len(other):
            return GrassmannElement.zero(self.space)
        out_masks, out_coeffs = [], []
        rows = max(1, _CHUNK_PAIRS // len(other))
        for start in range(0, len(self), rows):
            a = self.masks[start:start + rows]
            ai, bi = np.nonzero((a[:, None] & other.masks[None, :]) == 0)
            am, bm = a[ai], other.masks[bi]
            sign = _merge_sign(am, bm, self.space.n_slots)
            out_masks.append(am | bm)
            out_coeffs.append(sign * self.coeffs[start + ai] * other.coeffs[bi])
        return self.copy_with(np.concatenate(out_masks), np.concatenate(out_coeffs))

    def derivative_slot(self, slot):
        """Left derivative with respect to the generator in ``slot``."""
        bit = 1 << slot
        hit = (self.masks & bit) != 0
        masks = self.masks[hit]
        sign = 1 - 2 * (popcount(masks & (bit - 1)) & 1)
        return self.copy_with(masks ^ bit, sign * self.coeffs[hit])

    # relabelling

    def relabel(self, target, slot_map):
        """
        Move generator s to slot ``slot_map[s]`` of ``target``, re-sorting with permutation signs.

        Parameters
        ----------
        target: GrassmannSpace
        slot_map: sequence of int
            injective map from source slots to target slots
        """
        slot_map = np.asarray(slot_map, dtype=np.int64)
        masks = np.zeros_like(self.masks)
        for s, t in enumerate(slot_map):
            masks |= ((self.masks >> s) & 1) << t
        inversions = np.zeros_like(self.masks)
        for a, b in combinations(range(slot_map.size), 2):
            if slot_map[a] > slot_map[b]:
                inversions += ((self.masks >> a) & 1) & ((self.masks >> b) & 1)
        sign = 1 - 2 * (inversions & 1)
        return GrassmannElement(target, masks, sign * self.coeffs)

    def embed(self, target):
        """Same element in a space whose copy labels contain those of this one."""
        src = self.space
        if target.projection is not src.projection and not np.allclose(
                target.projection.slot_basis, src.projection.slot_basis):
            raise SpaceMismatch('embedding needs the same reference projection')
        slot_map = [target.slot(k, d) for k in src.labels for d in range(src.block)]
        return self.relabel(target, slot_map)

    def at_copy(self, label, target):
        """Single-copy element moved to copy ``label`` of ``target``."""
        if len(self.space.labels) != 1:
            raise SpaceMismatch('at_copy needs a single-copy element')
        return self.relabel(target, [target.slot(label, d) for d in range(self.space.block)])

    def to_projection(self, projection):
        """
        Rewrite the element over the slot basis of another reference projection.

        Each generator e_s is a linear combination of the new slot vectors, so a degree-n
        monomial maps to minors of the change-of-basis matrix.
        """
        src = self.space
        if projection is src.projection:
            return self
        src.base.check(projection.space)
        target = GrassmannSpace(projection, src.labels, cap=src.n_slots)
        change = projection.slot_basis.conj().T @ src.projection.slot_basis
        full = np.kron(np.eye(len(src.labels)), change)
        n = src.n_slots
        masks, coeffs = [], []
        degrees = self.degrees()
        for degree in np.unique(degrees):
            rows = [c for c in combinations(range(n), int(degree))]
            row_masks = np.array([sum(1 << r for r in rs) for rs in rows], dtype=np.int64)
            for mask, coeff in zip(self.masks[degrees == degree], self.coeffs[degrees == degree]):
                cols = [s for s in range(n) if int(mask) >> s & 1]
                if not cols:
                    masks.append(0)
                    coeffs.append(coeff)
                    continue
                sub = np.array([full[np.ix_(rs, cols)] for rs in rows])
                dets = np.linalg.det(sub)
                masks.extend(row_masks.tolist())
                coeffs.extend((coeff * dets).tolist())
        return GrassmannElement(target, masks, coeffs)

    def integrate_copy(self, label):
        """
        Berezin integral over copy ``label`` with respect to the reference projection.

        Applies prod_i (d/d psi_i d/d A psi_i) and removes the copy from the space.
        """
        space = self.space
        m = space.m
        out = self
        for i in range(m):
            out = out.derivative_slot(space.slot(label, m + i))
            out = out.derivative_slot(space.slot(label, i))
        return out._drop_copy(label)

    def _drop_copy(self, label):
        space = self.space
        if self.masks.size and np.any(self.masks & space.block_mask(label)):
            raise SpaceMismatch('copy {} still carries generators'.format(label))
        pos = space.position(label) * space.block
        low = (1 << pos) - 1
        masks = (self.masks & low) | ((self.masks >> space.block) & ~low)
        remaining = tuple(k for k in space.labels if k != label)
        return GrassmannElement(space.with_labels(remaining, cap=space.n_slots), masks, self.coeffs)

    def integrate_all(self):
        """Full Berezin integral; returns a complex number."""
        out = self
        for label in self.space.labels:
            out = out.integrate_copy(label)
        return out.scalar_part()


def _sort_slots(slots):
    slots = list(slots)
    if len(set(slots)) != len(slots):
        return 0, 0
    inversions = sum(1 for a, b in combinations(range(len(slots)), 2) if slots[a] > slots[b])
    mask = 0
    for s in slots:
        mask |= 1 << s
    return (-1) ** inversions, mask


def wedge(xi, zeta):
    return xi.wedge(zeta)


def berezin_derivative(phi, label, xi):
    """
    d/d phi^{(label)} applied to xi; antilinear in phi.

    Parameters
    ----------
    phi: array-like
        vector of the base self-dual space
    label: int
        copy carrying phi
    xi: GrassmannElement

    Returns
    -------
    GrassmannElement
    """
    space = xi.space
    c = space.projection.coordinates(phi)
    out = GrassmannElement.zero(space)
    for s in range(space.block):
        if c[s] != 0:
            out = out + np.conj(c[s]) * xi.derivative_slot(space.slot(label, s))
    return out


def berezin_integral(projection, label, xi):
    """
    Berezin integral over copy ``label`` with respect to ``projection``.

    The reference projection of the space is integrated slot by slot; any other projection
    is integrated through derivatives along its own range basis.
    """
    space = xi.space
    if projection is space.projection:
        return xi.integrate_copy(label)
    space.base.check(projection.space)
    out = xi
    for i in range(projection.m):
        psi = projection.range_basis[:, i]
        out = berezin_derivative(projection.space.conjugate(psi), label, out)
        out = berezin_derivative(psi, label, out)
    return out._drop_copy(label)


def grassmann_exp(xi):
    """exp(xi) = e^c (1 + N + N^2/2 + ...), c the scalar part; the series terminates."""
    c = xi.scalar_part()
    nil = xi - c
    result = GrassmannElement.scalar(xi.space, 1.0)
    term = result
    for k in range(1, xi.space.n_slots + 1):
        term = term.wedge(nil) / k
        if not len(term):
            break
        result = result + term
    return np.exp(c) * result


def bilinear_grassmann(space, h):
    """
    <H, H H> = sum_st <e_s, H e_t> (A e_t) ^ e_s over the generator vectors of ``space``.

    Parameters
    ----------
    space: GrassmannSpace
    h: array-like
        operator on the direct sum of the copies, in ambient coordinates ordered by copy

    Returns
    -------
    GrassmannElement
        homogeneous of degree two
    """
    h = as_matrix(h, name='operator')
    if h.shape[0] != space.n_slots:
        raise ShapeMismatch('operator of order {} on {} generators'.format(h.shape[0], space.n_slots))
    e = space.slot_matrix()
    hs = e.conj().T @ h @ e
    s_idx, t_idx = np.nonzero(np.abs(hs) > 0)
    conj_t = np.array([space.conjugate_slot(t) for t in t_idx], dtype=np.int64)
    keep = conj_t != s_idx
    s_idx, conj_t, vals = s_idx[keep], conj_t[keep], hs[s_idx[keep], t_idx[keep]]
    sign = np.where(conj_t < s_idx, 1.0, -1.0)
    masks = (np.int64(1) << conj_t) | (np.int64(1) << s_idx.astype(np.int64))

    return GrassmannElement(space, masks, sign * vals)


def pairing_element(space, k, l):
    """<h_P^{(k)}, h_P^{(l)}> = sum_j (A psi_j)^{(k)} ^ psi_j^{(l)}."""
    m = space.m
    terms = [((space.slot(k, m + j), space.slot(l, j)), 1.0) for j in range(m)]
    return GrassmannElement.from_terms(space, terms)


def _top_monomial_sign(m):
    """Integral of the canonical top monomial psi_0..psi_{m-1} A psi_0..A psi_{m-1}."""
    return (-1) ** (m * (m + 1) // 2)


TOP_MONOMIAL_SIGN = _top_monomial_sign
