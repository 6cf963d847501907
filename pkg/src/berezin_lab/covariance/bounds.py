# coding: utf-8


"""Monte-Carlo checks of the determinant and Pfaffian bounds on discrete-time covariances."""


import logging
from itertools import product

import numpy as np
import pandas as pd

from .. import config
from ..errors import NotPSD, ShapeMismatch
from ..linalg.numkernel import as_matrix, max_abs, pfaffian, skew_part


__all__ = ['psd_factor', 'det_bound_ratio', 'pfaffian_bound_ratio', 'sharpness_sweep', 'bound_statistics']


logger = logging.getLogger(__name__)


def _statistics(name, ratios, **extra):
    ratios = np.asarray(ratios, dtype=float)
    limit = 1.0 + config.BOUND_SLACK
    stats = {'check': name, 'samples': int(ratios.size),
             'max_ratio': float(ratios.max()) if ratios.size else 0.0,
             'mean_ratio': float(ratios.mean()) if ratios.size else 0.0,
             'violations': int(np.sum(ratios > limit))}
    stats['passed'] = stats['violations'] == 0
    stats.update(extra)
    logger.info('%s: %d samples, max ratio %.6f', name, stats['samples'], stats['max_ratio'])
    return stats


def _at_copy(cov, k, phi):
    """Vector phi placed in copy k of the copied space."""
    d = cov.block_size
    out = np.zeros(cov.matrix.shape[0], dtype=np.complex128)
    out[k * d:(k + 1) * d] = phi
    return out


def _gaussian_columns(rng, basis, count):
    z = rng.normal(size=(basis.shape[1], count)) + 1j * rng.normal(size=(basis.shape[1], count))
    return basis @ z


def det_bound_ratio(cov, samples, seed, max_pairs=4):
    """
    |det[<phi_q^(k_q), C phi_{N+l}^(k_{N+l})>]| / prod ||phi_q|| for phi_q in ran P.

    Parameters
    ----------
    cov: CovarianceOperator
        built from a projection P diagonalizing H
    samples: int
    seed: int
    max_pairs: int, default 4
        N is drawn uniformly from 1..max_pairs

    Returns
    -------
    dict
        check, samples, max_ratio, mean_ratio, violations, passed
    """
    rng = np.random.default_rng(seed)
    psi = cov.projection.range_basis
    nb = cov.grid.n_beta
    ratios = np.empty(samples)
    for i in range(samples):
        n = int(rng.integers(1, max_pairs + 1))
        times = rng.integers(0, nb, size=2 * n)
        phi = _gaussian_columns(rng, psi, 2 * n)
        m = np.array([[phi[:, q].conj() @ cov.block(times[q], times[n + l]) @ phi[:, n + l]
                       for l in range(n)] for q in range(n)])
        ratios[i] = abs(np.linalg.det(m)) / np.prod(np.linalg.norm(phi, axis=0))

    return _statistics('determinant', ratios, seed=seed)


def psd_factor(weight):
    """
    R with M = R^t R for a real symmetric positive semi-definite M.

    Eigenvalues down to PSD_FLOOR are clipped to zero; R = sqrt(L) V^t from M = V L V^t.
    """
    w_mat = np.asarray(weight)
    if w_mat.ndim == 0:
        w_mat = w_mat.reshape(1, 1)
    if np.iscomplexobj(w_mat):
        if max_abs(w_mat.imag) > 0:
            raise NotPSD('weight matrix must be real')
        w_mat = w_mat.real
    w_mat = as_matrix(w_mat, name='weight matrix').real
    if max_abs(w_mat - w_mat.T) > config.HERMITIAN_TOL * max(1.0, max_abs(w_mat)):
        raise NotPSD('weight matrix is not symmetric')
    lam, v = np.linalg.eigh(0.5 * (w_mat + w_mat.T))
    if lam.min() < config.PSD_FLOOR:
        raise NotPSD('weight matrix has a negative eigenvalue', eigenvalue=float(lam.min()))
    lam = np.clip(lam, 0.0, None)

    return np.sqrt(lam)[:, None] * v.T, w_mat


class _TensorModel(object):
    """Copied space tensored with R^r: involution A^ x (real conjugation), covariance C x 1."""

    def __init__(self, cov, root):
        self.cov = cov
        self.root = root
        r = root.shape[0]
        eye = np.eye(r)
        self.J = np.kron(cov.extended.J, eye)
        self.C = np.kron(cov.matrix, eye)
        self.P = np.kron(np.kron(np.eye(cov.grid.n_beta), cov.projection.P), eye)

    def vector(self, k, phi, j):
        return np.kron(_at_copy(self.cov, k, phi), self.root[:, j])

    def moments(self, x):
        return skew_part((self.J @ x.conj()).conj().T @ self.C @ x)

    def weight(self, x):
        """||(P x 1) x|| + ||(P^perp x 1) x|| per column."""
        px = self.P @ x
        return np.linalg.norm(px, axis=0) + np.linalg.norm(x - px, axis=0)


def pfaffian_bound_ratio(cov, samples, seed, weight=None, max_pairs=3):
    """
    |Pf[M_{j_q j_l} <A phi_q^(k_q), C phi_l^(k_l)>]| over prod (||P phi_q|| + ||P^perp phi_q||) M_{j_q j_q}^(1/2).

    The weighted Pfaffian is evaluated twice: directly as a Hadamard product, and as the
    unweighted Pfaffian of the vectors phi_q x R e_{j_q} on the tensor-extended space. The
    ratio uses the tensor route; the largest gap between the two routes is reported.

    Parameters
    ----------
    cov: CovarianceOperator
    samples: int
    seed: int
    weight: array-like, optional
        real symmetric positive semi-definite matrix M; indices j_q are drawn uniformly
    max_pairs: int, default 3

    Returns
    -------
    dict
        as :func:`det_bound_ratio`, plus route_gap
    """
    rng = np.random.default_rng(seed)
    root, w_mat = psd_factor(1.0 if weight is None else weight)
    tensor = _TensorModel(cov, root)
    dim = cov.block_size
    nb = cov.grid.n_beta
    base = np.eye(dim, dtype=np.complex128)
    ratios = np.empty(samples)
    gap = 0.0
    for i in range(samples):
        size = 2 * int(rng.integers(1, max_pairs + 1))
        times = rng.integers(0, nb, size=size)
        labels = rng.integers(0, w_mat.shape[0], size=size)
        phi = _gaussian_columns(rng, base, size)
        x = np.array([tensor.vector(times[q], phi[:, q], labels[q]) for q in range(size)]).T
        value = pfaffian(tensor.moments(x))
        bound = float(np.prod(tensor.weight(x)))
        plain = np.array([_at_copy(cov, times[q], phi[:, q]) for q in range(size)]).T
        moments = skew_part((cov.extended.conjugate(plain)).conj().T @ cov.matrix @ plain)
        direct = pfaffian(w_mat[np.ix_(labels, labels)] * moments)
        gap = max(gap, abs(direct - value) / max(1.0, bound))
        ratios[i] = abs(value) / bound if bound > 0 else 0.0

    name = 'pfaffian' if weight is None else 'pfaffian-weighted'
    return _statistics(name, ratios, seed=seed, route_gap=gap)


def sharpness_sweep(cov, samples, seed, max_pairs=3):
    """
    Pfaffian bound ratios on basis vectors of ran P and A ran P.

    Every single pair (N = 1) over all copy pairs is enumerated first, followed by ``samples``
    random draws with N <= max_pairs. Basis vectors have unit bound, so ratios are |Pf|.
    """
    rng = np.random.default_rng(seed)
    e = cov.projection.slot_basis
    nb = cov.grid.n_beta
    ratios = []
    for a, b, k1, k2 in product(range(e.shape[1]), range(e.shape[1]), range(nb), range(nb)):
        left = cov.space.conjugate(e[:, a])
        ratios.append(abs(left.conj() @ cov.block(k1, k2) @ e[:, b]))
    enumerated = len(ratios)
    for _ in range(samples):
        size = 2 * int(rng.integers(1, max_pairs + 1))
        times = rng.integers(0, nb, size=size)
        picks = rng.integers(0, e.shape[1], size=size)
        x = np.array([_at_copy(cov, times[q], e[:, picks[q]]) for q in range(size)]).T
        moments = skew_part(cov.extended.conjugate(x).conj().T @ cov.matrix @ x)
        ratios.append(abs(pfaffian(moments)))

    return _statistics('sharpness', ratios, seed=seed, enumerated=enumerated)


def bound_statistics(cov, samples, seed, weight=None):
    """
    Determinant, Pfaffian and weighted Pfaffian sweeps plus the sharpness sweep.

    Returns
    -------
    pandas.DataFrame
        one row per check
    """
    if samples < 1:
        raise ShapeMismatch('at least one sample is required')
    rows = [det_bound_ratio(cov, samples, seed),
            pfaffian_bound_ratio(cov, samples, seed + 1)]
    if weight is not None:
        rows.append(pfaffian_bound_ratio(cov, samples, seed + 2, weight=weight))
    sharpness = sharpness_sweep(cov, samples, seed + 3)
    # this row records a lower bound on sharpness, not a violation count
    sharpness['passed'] = sharpness['max_ratio'] >= 0.5
    rows.append(sharpness)
    columns = ['check', 'samples', 'max_ratio', 'mean_ratio', 'violations', 'passed']
    table = pd.DataFrame(rows)
    extra = [c for c in table.columns if c not in columns]

    return table[columns + extra]
