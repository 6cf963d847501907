# coding: utf-8


"""Self-dual Hilbert spaces, basis projections and self-dual operators.

An antiunitary involution is stored as a unitary matrix ``J`` acting after complex
conjugation, ``A(v) = J conj(v)``, so every construction below stays within complex matrix
algebra.
"""


import logging

import numpy as np
import scipy.linalg

from .. import config
from ..errors import (DegenerateOverlap, KernelPairingFailure, NotAntisymmetric, NotBasisProjection,
                      NotBogoliubov, NotHermitian, NotSelfDual, ShapeMismatch, SpaceMismatch,
                      VerificationFailure)
from ..linalg.numkernel import as_matrix, hermitian_eig, max_abs


__all__ = ['SelfDualSpace', 'BasisProjection', 'SelfDualOperator', 'extended_space', 'extended_projection',
           'kmap', 'diagonalizing_projection',
           'bogoliubov_transform', 'bogoliubov_determinant', 'lift_one_particle', 'kappa_one_particle',
           'kappa_tilde', 'orientation_sign', 'random_hamiltonian', 'random_bogoliubov',
           'swap_bogoliubov']


logger = logging.getLogger(__name__)


class SelfDualSpace(object):
    def __init__(self, involution):
        """
        Parameters
        ----------
        involution: array-like
            unitary J with J conj(J) = 1; the involution is v -> J conj(v)
        """
        j = as_matrix(involution, name='involution')
        dim = j.shape[0]
        if dim % 2:
            raise ShapeMismatch('a self-dual space has even dimension, got {}'.format(dim))
        eye = np.eye(dim)
        if max_abs(j @ j.conj().T - eye) > config.UNITARY_TOL:
            raise ShapeMismatch('involution matrix is not unitary')
        if max_abs(j @ j.conj() - eye) > config.UNITARY_TOL:
            raise ShapeMismatch('involution does not square to the identity')
        self.J = j
        self.dim = dim
        self.m = dim // 2

    @classmethod
    def canonical(cls, m):
        """h + h* with (x, y) -> (conj y, conj x)."""
        eye = np.eye(m)
        zero = np.zeros((m, m))
        return cls(np.block([[zero, eye], [eye, zero]]))

    def __eq__(self, other):
        return isinstance(other, SelfDualSpace) and self.dim == other.dim and np.allclose(self.J, other.J)

    def __hash__(self):
        return hash((self.dim, self.J.real.round(12).tobytes()))

    def __repr__(self):
        return 'SelfDualSpace(dim={})'.format(self.dim)

    def conjugate(self, v):
        """Apply the involution to a vector or to every column of a matrix."""
        return self.J @ np.conj(np.asarray(v, dtype=np.complex128))

    def conjugate_operator(self, x):
        """A X A, a linear operator."""
        return self.J @ np.conj(np.asarray(x, dtype=np.complex128)) @ self.J.conj().T

    def self_duality_residual(self, x):
        x = np.asarray(x, dtype=np.complex128)
        return max_abs(x.conj().T + self.conjugate_operator(x))

    def is_self_dual(self, x):
        """X* = -A X A, up to SELF_DUAL_TOL."""
        return self.self_duality_residual(x) <= config.SELF_DUAL_TOL * max(1.0, max_abs(x))

    def check(self, other):
        if self != other:
            raise SpaceMismatch('operands live on different self-dual spaces')


class BasisProjection(object):
    def __init__(self, space, range_basis):
        """
        Parameters
        ----------
        space: SelfDualSpace
        range_basis: array-like
            dim x m matrix whose orthonormal columns span ran P
        """
        basis = np.array(range_basis, dtype=np.complex128)
        if basis.shape != (space.dim, space.m):
            raise ShapeMismatch('range basis must have shape {}, got {}'.format((space.dim, space.m), basis.shape))
        if max_abs(basis.conj().T @ basis - np.eye(space.m)) > config.PROJECTION_TOL:
            raise NotBasisProjection('range basis columns are not orthonormal')
        self.space = space
        self.m = space.m
        self.range_basis = basis
        self.P = basis @ basis.conj().T
        self.complement = np.eye(space.dim) - self.P
        residual = max_abs(space.conjugate_operator(self.P) - self.complement)
        if residual > config.PROJECTION_TOL:
            raise NotBasisProjection('A P A differs from 1 - P', residual=residual)
        # slot order: psi_0..psi_{m-1}, then A psi_0..A psi_{m-1}
        self.slot_basis = np.hstack([basis, space.conjugate(basis)])

    @classmethod
    def canonical(cls, space):
        """Projection on the first block of a canonical space."""
        return cls(space, np.eye(space.dim)[:, :space.m])

    @classmethod
    def from_matrix(cls, space, p):
        p = as_matrix(p, name='projection')
        w, u = hermitian_eig(0.5 * (p + p.conj().T))
        if max_abs(p @ p - p) > config.PROJECTION_TOL:
            raise NotBasisProjection('matrix is not idempotent')
        return cls(space, u[:, w > 0.5])

    def __repr__(self):
        return 'BasisProjection(dim={})'.format(self.space.dim)

    def coordinates(self, v):
        """Components of v (or of every column) in the slot basis."""
        return self.slot_basis.conj().T @ np.asarray(v, dtype=np.complex128)

    def in_slot_basis(self, x):
        """Matrix of a linear operator in the slot basis."""
        return self.slot_basis.conj().T @ np.asarray(x, dtype=np.complex128) @ self.slot_basis

    def conjugation_residual(self):
        """||P A P||, zero when A(ran P) is orthogonal to ran P."""
        return max_abs(self.P @ self.space.conjugate_operator(self.P))


class SelfDualOperator(object):
    def __init__(self, space, matrix, tol=None):
        """
        Parameters
        ----------
        space: SelfDualSpace
        matrix: array-like
            H with H* = -A H A
        tol: float, optional
            self-duality tolerance relative to max(1, |H|_max)
        """
        h = as_matrix(matrix, name='self-dual operator')
        if h.shape[0] != space.dim:
            raise ShapeMismatch('operator of order {} on a space of dimension {}'.format(h.shape[0], space.dim))
        tol = config.SELF_DUAL_TOL if tol is None else tol
        scale = max(1.0, max_abs(h))
        residual = space.self_duality_residual(h)
        if residual > tol * scale:
            raise NotSelfDual('H* differs from -A H A', residual=residual)
        if abs(np.trace(h)) > config.TRACE_TOL * scale * space.dim:
            raise NotSelfDual('self-dual operator with non-zero trace', trace=complex(np.trace(h)))
        self.space = space
        self.H = h
        self.is_hamiltonian = max_abs(h - h.conj().T) <= config.HERMITIAN_TOL * scale * 10

    def __repr__(self):
        return 'SelfDualOperator(dim={}, hamiltonian={})'.format(self.space.dim, self.is_hamiltonian)

    def norm(self):
        return float(np.linalg.norm(self.H, 2))

    def require_hamiltonian(self):
        if not self.is_hamiltonian:
            raise NotHermitian('a self-dual Hamiltonian is required')


def extended_space(space, copies):
    """Direct sum of ``copies`` orthogonal copies, the involution acting copy-wise."""
    return SelfDualSpace(np.kron(np.eye(copies), space.J))


def extended_projection(projection, copies):
    """Copy-wise extension of a basis projection to :func:`extended_space`."""
    return BasisProjection(extended_space(projection.space, copies),
                           np.kron(np.eye(copies), projection.range_basis))


def kmap(space, h):
    """K(H) = (H - A H* A)/2."""
    h = as_matrix(h, name='operator')
    if h.shape[0] != space.dim:
        raise ShapeMismatch('operator of order {} on a space of dimension {}'.format(h.shape[0], space.dim))
    return SelfDualOperator(space, 0.5 * (h - space.conjugate_operator(h.conj().T)))


def _real_kernel_basis(space, kernel):
    """Orthonormal A-fixed vectors spanning the kernel, built greedily in column order."""
    target = kernel.shape[1]
    accepted = []
    smallest = np.inf
    for idx in range(kernel.shape[1]):
        v = kernel[:, idx]
        av = space.conjugate(v)
        for cand in (v + av, 1j * (v - av)):
            w = cand.copy()
            for r in accepted:
                w = w - r * np.real(np.vdot(r, w))
            norm = np.linalg.norm(w)
            if norm > config.PAIRING_RESIDUAL_TOL:
                accepted.append(w / norm)
            else:
                smallest = min(smallest, norm)
            if len(accepted) == target:
                return np.array(accepted).T
    raise KernelPairingFailure('kernel pairing is numerically degenerate',
                               found=len(accepted), needed=target, overlap=smallest)


def diagonalizing_projection(operator):
    """
    Basis projection P = 1[H>0] + P0 diagonalizing a self-dual Hamiltonian.

    Parameters
    ----------
    operator: SelfDualOperator
        a self-dual Hamiltonian

    Returns
    -------
    projection: BasisProjection
        range basis made of the positive eigenvectors followed by the kernel pairs
    """
    operator.require_hamiltonian()
    space = operator.space
    w, u = hermitian_eig(operator.H)
    positive = u[:, w > config.KERNEL_TOL]
    kernel = u[:, np.abs(w) <= config.KERNEL_TOL]
    columns = [positive]
    if kernel.shape[1]:
        if kernel.shape[1] % 2:
            raise KernelPairingFailure('odd-dimensional kernel', dimension=kernel.shape[1])
        real = _real_kernel_basis(space, kernel)
        paired = (real[:, 0::2] + 1j * real[:, 1::2]) / np.sqrt(2.0)
        columns.append(paired)
        logger.debug('paired a %d-dimensional kernel', kernel.shape[1])
    projection = BasisProjection(space, np.hstack(columns))

    h = operator.H
    p, q = projection.P, projection.complement
    hp = 2 * p @ h @ p
    rebuilt = 0.5 * (p @ hp @ p - q @ space.conjugate_operator(hp.conj().T) @ q)
    residual = max_abs(rebuilt - h)
    if residual > config.RECONSTRUCTION_TOL * max(1.0, max_abs(h)):
        raise VerificationFailure('projection does not diagonalize H', residual=residual)

    return projection


def bogoliubov_determinant(space, u):
    """det(U) of a Bogoliubov transformation, checked to be +1 or -1."""
    u = as_matrix(u, name='Bogoliubov transformation')
    if u.shape[0] != space.dim:
        raise ShapeMismatch('transformation of order {} on a space of dimension {}'.format(u.shape[0], space.dim))
    if max_abs(u @ u.conj().T - np.eye(space.dim)) > config.PROJECTION_TOL:
        raise NotBogoliubov('U is not unitary')
    if max_abs(u @ space.J - space.J @ u.conj()) > config.PROJECTION_TOL:
        raise NotBogoliubov('U does not commute with the involution')
    det = complex(np.linalg.det(u))
    sign = 1.0 if det.real >= 0 else -1.0
    if abs(det - sign) > config.ORIENTATION_TOL:
        raise DegenerateOverlap('det(U) is not +-1', det=det)

    return int(sign)


def bogoliubov_transform(projection, u):
    """P_U = U P U*, with the range basis carried along by U."""
    space = projection.space
    det = bogoliubov_determinant(space, u)
    logger.debug('Bogoliubov transformation with det %+d', det)
    return BasisProjection(space, np.asarray(u, dtype=np.complex128) @ projection.range_basis)


def orientation_sign(p1, p2):
    """
    det(U) for the Bogoliubov U mapping the slot basis of P1 onto that of P2.

    Returns
    -------
    sign: int
        +1 or -1
    """
    p1.space.check(p2.space)
    u = p2.slot_basis @ p1.slot_basis.conj().T
    try:
        return bogoliubov_determinant(p1.space, u)
    except NotBogoliubov as exc:
        raise DegenerateOverlap('cannot build a Bogoliubov map between the projections') from exc


def kappa_one_particle(h):
    """kappa(h) = diag(h, -conj h)/2 on h + h*."""
    h = as_matrix(h, name='one-particle operator')
    zero = np.zeros_like(h)
    return 0.5 * np.block([[h, zero], [zero, -h.conj()]])


def kappa_tilde(g):
    """Lift of an antilinear pairing x -> G conj(x) with G^t = -G."""
    g = as_matrix(g, name='pairing matrix')
    zero = np.zeros_like(g)
    return 0.5 * np.block([[zero, g], [-g.conj(), zero]])


def lift_one_particle(h, g=None):
    """
    Self-dual operator -(kappa(h) + kappa~(g)) on the canonical space h + h*.

    Its Fock bilinear element is dGamma(h) + dUpsilon(g) - Tr(h)/2.

    Parameters
    ----------
    h: array-like
        Hermitian m x m matrix
    g: array-like, optional
        antisymmetric m x m pairing matrix

    Returns
    -------
    operator: SelfDualOperator
    """
    h = as_matrix(h, name='one-particle Hamiltonian')
    if max_abs(h - h.conj().T) > config.HERMITIAN_TOL * max(1.0, max_abs(h)):
        raise NotHermitian('h is not Hermitian')
    m = h.shape[0]
    g = np.zeros((m, m), dtype=np.complex128) if g is None else as_matrix(g, name='pairing matrix')
    if g.shape != h.shape:
        raise ShapeMismatch('pairing and hopping blocks differ in shape')
    if max_abs(g + g.T) > config.HERMITIAN_TOL * max(1.0, max_abs(g)):
        raise NotAntisymmetric('pairing matrix is not antisymmetric')
    space = SelfDualSpace.canonical(m)

    return SelfDualOperator(space, -(kappa_one_particle(h) + kappa_tilde(g)))


def random_hamiltonian(space, rng, scale=1.0):
    """K of a Gaussian random Hermitian matrix."""
    x = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    return kmap(space, scale * 0.5 * (x + x.conj().T))


def random_bogoliubov(space, rng):
    """exp(iX) for a random self-dual Hamiltonian X."""
    x = random_hamiltonian(space, rng).H
    return scipy.linalg.expm(1j * x)


def swap_bogoliubov(projection, index):
    """Bogoliubov map exchanging psi_i and A psi_i and fixing the other slots."""
    e = projection.slot_basis
    m = projection.m
    perm = np.arange(2 * m)
    perm[index], perm[m + index] = m + index, index

    return e[:, perm] @ e.conj().T
