# coding: utf-8


"""Fock-space representation of the self-dual CAR algebra.

Everything in this module is exact dense linear algebra on 2^m x 2^m matrices, so it serves as
the reference against which the Grassmann and covariance constructions are checked.

Conventions: mode j is the j-th column of the range basis of the defining projection, the
occupation basis index 0 is the empty state, and

    a_j = sz x ... x sz x s- x 1 x ... x 1,    s- = [[0, 1], [0, 0]].
"""


import logging
from functools import lru_cache, reduce

import numpy as np
import scipy.linalg

from .. import config
from ..errors import CapacityExceeded, NotApplicable, NotSelfAdjoint, ParityViolation, ShapeMismatch, SymbolViolation
from ..linalg.numkernel import as_matrix, hermitian_eig, max_abs, pfaffian


__all__ = ['FockRep', 'FockOperator', 'build_fock_rep', 'bilinear_element', 'tracial_state',
           'gibbs_density', 'gibbs_expectation', 'fock_state', 'expectation', 'quasifree_symbol',
           'quasifree_moment', 'is_even', 'check_even_self_adjoint', 'schatten_norm', 'generating_function_exact',
           'log_trace_ratio', 'quasi_free_dynamics']


logger = logging.getLogger(__name__)


_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_EYE2 = np.eye(2, dtype=np.complex128)


@lru_cache(maxsize=None)
def jordan_wigner_annihilators(m):
    """Tuple of the m annihilation matrices; cached and read-only."""
    ops = []
    for j in range(m):
        factors = [_SIGMA_Z] * j + [_SIGMA_MINUS] + [_EYE2] * (m - j - 1)
        op = reduce(np.kron, factors, np.ones((1, 1), dtype=np.complex128))
        op.setflags(write=False)
        ops.append(op)

    return tuple(ops)


class FockOperator(object):
    __array_ufunc__ = None

    def __init__(self, rep, matrix):
        """
        Parameters
        ----------
        rep: FockRep
        matrix: array-like
            2^m x 2^m matrix
        """
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (rep.dimension, rep.dimension):
            raise ShapeMismatch('operator shape {} does not match Fock dimension {}'.format(m.shape, rep.dimension))
        self.rep = rep
        self.M = m

    def __repr__(self):
        return 'FockOperator(m={})'.format(self.rep.m)

    def _other(self, other):
        if isinstance(other, FockOperator):
            if other.rep is not self.rep and other.rep.dimension != self.rep.dimension:
                raise ShapeMismatch('operators from different Fock representations')
            return other.M
        return other * np.eye(self.rep.dimension)

    def __add__(self, other):
        return FockOperator(self.rep, self.M + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return FockOperator(self.rep, self.M - self._other(other))

    def __rsub__(self, other):
        return FockOperator(self.rep, self._other(other) - self.M)

    def __neg__(self):
        return FockOperator(self.rep, -self.M)

    def __mul__(self, scalar):
        return FockOperator(self.rep, scalar * self.M)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return FockOperator(self.rep, self.M @ self._other(other))

    def dagger(self):
        return FockOperator(self.rep, self.M.conj().T)

    def distance(self, other):
        return max_abs(self.M - self._other(other))

    def adjoint_residual(self):
        return max_abs(self.M - self.M.conj().T)


class FockRep(object):
    def __init__(self, projection):
        """
        Parameters
        ----------
        projection: BasisProjection
            fixes the one-particle space, hence annihilators and creators
        """
        m = projection.m
        if m > config.MAX_FOCK_MODES:
            raise CapacityExceeded('Fock representation limited to {} modes'.format(config.MAX_FOCK_MODES), m=m)
        self.projection = projection
        self.space = projection.space
        self.m = m
        self.dimension = 2 ** m
        self.annihilators = jordan_wigner_annihilators(m)
        self.parity = reduce(np.kron, [_SIGMA_Z] * m, np.ones((1, 1), dtype=np.complex128))
        self._slot_operators = None
        self._monomial_lu = None

    def __repr__(self):
        return 'FockRep(m={})'.format(self.m)

    def identity(self):
        return FockOperator(self, np.eye(self.dimension))

    def operator(self, matrix):
        return FockOperator(self, matrix)

    def annihilation(self, i):
        return FockOperator(self, self.annihilators[i])

    def creation(self, i):
        return FockOperator(self, self.annihilators[i].conj().T)

    def number(self, i):
        a = self.annihilators[i]
        return FockOperator(self, a.conj().T @ a)

    def total_number(self):
        return reduce(lambda x, y: x + y, (self.number(i) for i in range(self.m)), 0 * self.identity())

    @property
    def slot_operators(self):
        """B(e_s) for the slot basis: a_0..a_{m-1}, then a_0*..a_{m-1}*."""
        if self._slot_operators is None:
            creators = [a.conj().T for a in self.annihilators]
            self._slot_operators = list(self.annihilators) + creators
        return self._slot_operators

    def generator(self, phi):
        """
        Field operator B(phi) = a(P phi) + a*(A P^perp phi).

        Parameters
        ----------
        phi: array-like
            vector of the self-dual space

        Returns
        -------
        b: FockOperator
        """
        c = self.projection.coordinates(phi)
        if c.shape != (2 * self.m,):
            raise ShapeMismatch('vector of length {} for a space of dimension {}'.format(len(c), 2 * self.m))
        # B is antilinear in phi
        mat = sum(np.conj(c[s]) * op for s, op in enumerate(self.slot_operators))
        return FockOperator(self, mat)

    def dgamma(self, h):
        """Second quantization sum_ij h_ij a_i* a_j."""
        h = as_matrix(h, name='one-particle operator')
        a = self.annihilators
        mat = sum(h[i, j] * a[i].conj().T @ a[j] for i in range(self.m) for j in range(self.m))
        return FockOperator(self, mat)

    def dupsilon(self, g):
        """Pairing term (sum_ij G_ij a_i* a_j* + conj(G_ij) a_j a_i)/2."""
        g = as_matrix(g, name='pairing matrix')
        a = self.annihilators
        mat = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for i in range(self.m):
            for j in range(self.m):
                if g[i, j] != 0:
                    mat += 0.5 * (g[i, j] * a[i].conj().T @ a[j].conj().T + np.conj(g[i, j]) * a[j] @ a[i])
        return FockOperator(self, mat)

    def normal_monomial(self, mask):
        """
        Image of the canonical Grassmann monomial with slot bitmask ``mask``.

        Slots 0..m-1 carry psi_i (creators a_i*), slots m..2m-1 carry A psi_i (annihilators
        a_i); the monomial psi_B ^ A psi_A maps to (-1)^{|A||B|} a_A a*_B.
        """
        m = self.m
        creators = [i for i in range(m) if mask >> i & 1]
        annihilators = [i for i in range(m) if mask >> (m + i) & 1]
        mat = np.eye(self.dimension, dtype=np.complex128)
        for i in annihilators:
            mat = mat @ self.annihilators[i]
        for i in creators:
            mat = mat @ self.annihilators[i].conj().T
        if (len(creators) * len(annihilators)) % 2:
            mat = -mat
        return mat

    def monomial_factorization(self):
        """LU factors of the matrix whose columns are the flattened normal monomials."""
        if self._monomial_lu is None:
            if 2 * self.m > 12:
                raise CapacityExceeded('canonical isomorphism limited to 6 modes', m=self.m)
            columns = [self.normal_monomial(mask).ravel() for mask in range(4 ** self.m)]
            self._monomial_lu = scipy.linalg.lu_factor(np.array(columns).T)
            logger.debug('factorized %d normal monomials', 4 ** self.m)
        return self._monomial_lu


def build_fock_rep(projection):
    return FockRep(projection)


def bilinear_element(rep, h):
    """
    <B, H B> = sum_ij <e_i, H e_j> B(e_j) B(e_i)* over the slot basis.

    Parameters
    ----------
    rep: FockRep
    h: array-like
        operator on the self-dual space

    Returns
    -------
    element: FockOperator
    """
    h = as_matrix(h, name='operator')
    if h.shape[0] != 2 * rep.m:
        raise ShapeMismatch('operator of order {} for {} modes'.format(h.shape[0], rep.m))
    hs = rep.projection.in_slot_basis(h)
    ops = rep.slot_operators
    mat = np.zeros((rep.dimension, rep.dimension), dtype=np.complex128)
    for i, bi in enumerate(ops):
        bi_dag = bi.conj().T
        for j, bj in enumerate(ops):
            if hs[i, j] != 0:
                mat += hs[i, j] * (bj @ bi_dag)

    return FockOperator(rep, mat)


def tracial_state(rep, a):
    return complex(np.trace(a.M)) / rep.dimension


def _hermitian_exp_shifted(mat):
    """(exp(A - c), c) for Hermitian A with c its largest eigenvalue."""
    w, u = hermitian_eig(mat)
    shift = float(w[-1]) if w.size else 0.0
    return (u * np.exp(w - shift)) @ u.conj().T, shift


def gibbs_density(rep, operator, beta):
    """Normalized density matrix exp(beta/2 <B,HB>)/tr(...)."""
    operator.require_hamiltonian()
    q = bilinear_element(rep, operator.H).M
    rho, _ = _hermitian_exp_shifted(0.5 * beta * 0.5 * (q + q.conj().T))
    return rho / np.trace(rho)


def fock_state(rep):
    """Density matrix of the vacuum of the defining projection."""
    rho = np.zeros((rep.dimension, rep.dimension), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def expectation(density, a):
    return complex(np.trace(density @ a.M))


def gibbs_expectation(rep, operator, beta, a):
    """
    Gibbs state rho_H(A) = tr(A exp(beta/2 <B,HB>)) / tr(exp(beta/2 <B,HB>)).

    Parameters
    ----------
    rep: FockRep
    operator: SelfDualOperator
        self-dual Hamiltonian
    beta: float
        inverse temperature
    a: FockOperator

    Returns
    -------
    value: complex
    """
    return expectation(gibbs_density(rep, operator, beta), a)


def quasifree_symbol(rep, density):
    """
    Symbol S with <phi1, S phi2> = rho(B(phi1) B(A phi2)).

    Parameters
    ----------
    rep: FockRep
    density: numpy.ndarray
        density matrix of the state

    Returns
    -------
    symbol: numpy.ndarray

    Raises
    ------
    SymbolViolation
        unless 0 <= S <= 1 and S + A S A = 1
    """
    space = rep.space
    eye = np.eye(space.dim)
    fields = [rep.generator(eye[:, k]).M for k in range(space.dim)]
    conj_fields = [rep.generator(space.conjugate(eye[:, k])).M for k in range(space.dim)]
    s = np.array([[np.trace(density @ fields[k] @ conj_fields[l]) for l in range(space.dim)]
                  for k in range(space.dim)])
    residual = max_abs(s + space.conjugate_operator(s) - eye)
    if residual > config.SYMBOL_TOL:
        raise SymbolViolation('S + A S A differs from 1', residual=residual)
    w, _ = hermitian_eig(0.5 * (s + s.conj().T))
    if w[0] < -config.SYMBOL_TOL or w[-1] > 1 + config.SYMBOL_TOL:
        raise SymbolViolation('symbol spectrum leaves [0, 1]', low=w[0], high=w[-1])

    return s


def quasifree_moment(rep, density, vectors):
    """
    Direct and Pfaffian evaluation of rho(B(phi_1)...B(phi_2N)).

    Returns
    -------
    direct: complex
    pfaffian_value: complex
        Pf of the matrix rho(B(phi_k) B(phi_l)), k < l
    """
    fields = [rep.generator(v).M for v in vectors]
    n = len(fields)
    product = reduce(np.matmul, fields, np.eye(rep.dimension, dtype=np.complex128))
    direct = complex(np.trace(density @ product))
    if n % 2:
        return direct, 0.0j
    o = np.zeros((n, n), dtype=np.complex128)
    for k in range(n):
        for l in range(k + 1, n):
            o[k, l] = np.trace(density @ fields[k] @ fields[l])
            o[l, k] = -o[k, l]

    return direct, pfaffian(o)


def is_even(rep, a):
    p = rep.parity
    return max_abs(p @ a.M @ p - a.M) <= config.EVEN_TOL


def schatten_norm(rep, a, s):
    """
    Normalized Schatten norm (tr |A|^s)^{1/s}; ``s = numpy.inf`` gives the operator norm.
    """
    sv = scipy.linalg.svdvals(a.M)
    if np.isinf(s):
        return float(sv.max())
    if s < 1:
        raise NotApplicable('Schatten index must be >= 1', s=s)
    return float((np.sum(sv ** s) / rep.dimension) ** (1.0 / s))


def check_even_self_adjoint(rep, a, name):
    if not is_even(rep, a):
        raise ParityViolation('{} is not even'.format(name))
    residual = a.adjoint_residual()
    if residual > config.ADJOINT_TOL * max(1.0, max_abs(a.M)):
        raise NotSelfAdjoint('{} is not self-adjoint'.format(name), residual=residual)


def log_trace_ratio(rep, operator, w, k, beta, s, include_interaction_in_reference=False):
    """
    ln of tr(exp(beta(<B,HB>/2 - W)) exp(sK)) / tr(exp(beta/2 <B,HB> - [beta W])).

    Exponentials are shifted by their top eigenvalue before the traces are taken; the
    returned value is complex, with the branch fixed by the positive real trace ratio.
    """
    operator.require_hamiltonian()
    check_even_self_adjoint(rep, w, 'W')
    check_even_self_adjoint(rep, k, 'K')
    q = bilinear_element(rep, operator.H).M
    q = 0.5 * (q + q.conj().T)
    wm = 0.5 * (w.M + w.M.conj().T)
    km = 0.5 * (k.M + k.M.conj().T)
    e1, c1 = _hermitian_exp_shifted(beta * (0.5 * q - wm))
    e2, c2 = _hermitian_exp_shifted(s * km)
    reference = 0.5 * beta * q - (beta * wm if include_interaction_in_reference else 0.0)
    e0, c0 = _hermitian_exp_shifted(reference)
    ratio = np.trace(e1 @ e2) / np.trace(e0)

    return complex(np.log(ratio)) + c1 + c2 - c0


def generating_function_exact(rep, operator, w, k, beta, s):
    """
    ln[tr(exp(beta(<B,HB>/2 - W)) exp(sK)) / tr(exp(beta/2 <B,HB>))] by exact exponentials.

    Returns
    -------
    value: float
    """
    value = log_trace_ratio(rep, operator, w, k, beta, s)
    if abs(value.imag) > config.LOG_ARGUMENT_IMAG_TOL:
        raise NotSelfAdjoint('trace ratio is not a positive real', imag=value.imag)
    return value.real


def quasi_free_dynamics(rep, operator, z, phi):
    """
    Both sides of exp(-z/2 <B,HB>) B(phi)* exp(z/2 <B,HB>) = B(exp(zH) phi)*.

    Returns
    -------
    lhs, rhs: numpy.ndarray
    """
    q = bilinear_element(rep, operator.H).M
    left = scipy.linalg.expm(-0.5 * z * q)
    right = scipy.linalg.expm(0.5 * z * q)
    field_dag = rep.generator(phi).M.conj().T
    lhs = left @ field_dag @ right
    rhs = rep.generator(scipy.linalg.expm(z * operator.H) @ np.asarray(phi, dtype=np.complex128)).M.conj().T

    return lhs, rhs
