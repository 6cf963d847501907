# coding: utf-8


"""Spatial decay of resolvents, Fermi distributions and discrete-time covariances.

Every quantity here is the finite-volume value on a box Lambda_L; sums over the index set run
over the 2m indices of the self-dual space, the distance between two indices being the
Euclidean distance |x - y| of their sites.
"""


import logging
from functools import lru_cache

import numpy as np
import pandas as pd
import scipy.integrate
import scipy.special

from .. import config
from ..algebra.selfdual import diagonalizing_projection
from ..errors import GapTooSmall, GridTooCoarse, NotApplicable, VerificationFailure
from ..linalg.numkernel import as_matrix, hermitian_eig
from .model import build_hamiltonian, canonical_projection


__all__ = ['combes_thomas_S', 'combes_thomas_check', 'combes_thomas_scan', 'resolvent_difference_check',
           'lattice_sum', 'fermi_summability', 'fermi_summability_bound', 'projection_constant',
           'u1_grid', 'alpha_metric', 'alpha_tilde', 'decay_value', 'summability_bound', 'gapped_bound',
           'DecayEstimate', 'decay_parameter', 'spectral_gap', 'gapped_summability_check',
           'uniformity_ratio', 'projection_drift', 'fit_beta_exponent']


logger = logging.getLogger(__name__)


MIN_U1_POINTS = 16
MIN_U2_PANELS = 64
MIN_ALPHA_POINTS = 16


def _matrix(operator):
    return as_matrix(getattr(operator, 'H', operator), name='operator')


def _check_exponents(mu, epsilon):
    if mu < 0:
        raise ValueError('mu must be non-negative, got {}'.format(mu))
    if not 0 < epsilon <= 1:
        raise ValueError('epsilon must lie in (0, 1], got {}'.format(epsilon))


def _weights(model, rate, epsilon):
    return np.exp(rate * model.distances() ** epsilon)


def combes_thomas_S(model, operator, mu, epsilon):
    """
    S(H, mu) = sup_x sum_y (e^{mu |x-y|^eps} - 1) |H_xy|.

    Examples
    --------
    On the bulk of a nearest-neighbour chain with unit hopping and eps = 1,
    S = 2 (e^mu - 1).
    """
    _check_exponents(mu, epsilon)
    h = _matrix(operator)
    excess = np.expm1(mu * model.distances() ** epsilon)
    return float(np.max(np.sum(excess * np.abs(h), axis=1)))


def combes_thomas_check(model, operator, z, mu, epsilon):
    """
    max_xy |(z - H)^-1_xy| (Delta - S) e^{mu |x-y|^eps}, at most 1 when the estimate holds.

    Parameters
    ----------
    model: LatticeModel
    operator: SelfDualOperator or array-like
        Hermitian operator on the self-dual space of the box
    z: complex
    mu: float
    epsilon: float

    Returns
    -------
    ratio: float

    Raises
    ------
    NotApplicable
        unless the distance Delta of z to the spectrum exceeds S(H, mu)
    """
    h = _matrix(operator)
    w, u = hermitian_eig(h)
    delta = float(np.min(np.abs(z - w)))
    s = combes_thomas_S(model, h, mu, epsilon)
    if not delta > s:
        raise NotApplicable('spectral distance does not exceed S(H, mu)', delta=delta, S=s, mu=mu)
    resolvent = (u / (z - w)) @ u.conj().T

    return float(np.max(np.abs(resolvent) * (delta - s) * _weights(model, mu, epsilon)))


def combes_thomas_scan(model, operator, z_list, mu_list, epsilon_list):
    """
    Combes-Thomas ratios on a grid of (z, mu, eps); inapplicable points are kept and flagged.

    Returns
    -------
    pandas.DataFrame
        columns z_re, z_im, mu, epsilon, S, delta, applicable, ratio, passed
    """
    h = _matrix(operator)
    w = np.linalg.eigvalsh(0.5 * (h + h.conj().T))
    rows = []
    for z in z_list:
        delta = float(np.min(np.abs(z - w)))
        for mu in mu_list:
            for eps in epsilon_list:
                s = combes_thomas_S(model, h, mu, eps)
                try:
                    ratio = combes_thomas_check(model, h, z, mu, eps)
                    applicable = True
                except NotApplicable:
                    ratio, applicable = np.nan, False
                rows.append({'z_re': complex(z).real, 'z_im': complex(z).imag, 'mu': mu, 'epsilon': eps,
                             'S': s, 'delta': delta, 'applicable': applicable, 'ratio': ratio,
                             'passed': (not applicable) or ratio <= 1 + config.BOUND_SLACK})
    table = pd.DataFrame(rows)
    logger.info('Combes-Thomas scan: %d applicable points of %d', int(table['applicable'].sum()), len(table))
    return table


def resolvent_difference_check(model, operator, mu, epsilon, eta=None, u_grid=None):
    """
    max |M_xy| e^{mu |x-y|^eps} / (12 sqrt(M_xx M_yy)) for M = ((H - u)^2 + eta^2)^-1.

    Parameters
    ----------
    eta: float, optional
        defaults to 2 S(H, mu)
    u_grid: array-like, optional
        defaults to nine points spanning [-||H|| - 1, ||H|| + 1]

    Raises
    ------
    NotApplicable
        if eta is not positive or S(H, mu) > eta / 2
    """
    h = _matrix(operator)
    w, u = hermitian_eig(h)
    s = combes_thomas_S(model, h, mu, epsilon)
    eta = 2.0 * s if eta is None else float(eta)
    if eta <= 0 or s > 0.5 * eta:
        raise NotApplicable('S(H, mu) must not exceed eta / 2 with eta > 0', S=s, eta=eta)
    if u_grid is None:
        top = float(np.max(np.abs(w))) + 1.0
        u_grid = np.linspace(-top, top, 9)
    weights = _weights(model, mu, epsilon)
    worst = 0.0
    for point in u_grid:
        m = (u / ((w - point) ** 2 + eta ** 2)) @ u.conj().T
        diag = np.sqrt(np.abs(np.real(np.diag(m))))
        worst = max(worst, float(np.max(np.abs(m) * weights / (12.0 * np.outer(diag, diag)))))

    return worst


@lru_cache(maxsize=8)
def _box_norms(d, box):
    axes = np.meshgrid(*([np.arange(-box, box + 1, dtype=float)] * d), indexing='ij')
    r = np.sqrt(sum(a ** 2 for a in axes)).ravel()
    return r[r <= box]


def lattice_sum(c, epsilon, d):
    """
    sum_{x in Z^d} e^{c |x|^eps}.

    Lattice points with |x| <= B are summed exactly; beyond B the sum is replaced by the radial
    integral, which is a regularized incomplete gamma function. Returns inf for c >= 0.
    """
    if c >= 0:
        return np.inf
    _check_exponents(0.0, epsilon)
    box = config.LATTICE_SUM_BOX.get(d, 20)
    inner = float(np.sum(np.exp(c * _box_norms(d, box) ** epsilon)))
    a = -c
    shape = d / epsilon
    q = scipy.special.gammaincc(shape, a * box ** epsilon)
    if q <= 0:
        return inner
    log_area = np.log(2.0) + 0.5 * d * np.log(np.pi) - scipy.special.gammaln(0.5 * d)
    tail = np.exp(log_area - np.log(epsilon) - shape * np.log(a) + scipy.special.gammaln(shape) + np.log(q))

    return inner + float(tail)


def _fermi_matrix(w, u, alpha, beta):
    return (u * np.exp(alpha * w - np.logaddexp(0.0, beta * w))) @ u.conj().T


def fermi_summability(model, operator, beta, upsilon, epsilon, alpha_points=MIN_ALPHA_POINTS):
    """
    sup over alpha in [0, beta] and x of sum_y e^{upsilon |x-y|^eps} |(e^{alpha H}/(1 + e^{beta H}))_xy|.

    The supremum over alpha runs over ``alpha_points`` equidistant points, both ends included.

    Raises
    ------
    GridTooCoarse
        for fewer than 16 alpha points
    """
    if alpha_points < MIN_ALPHA_POINTS:
        raise GridTooCoarse('at least {} alpha points are required'.format(MIN_ALPHA_POINTS), points=alpha_points)
    _check_exponents(upsilon, epsilon)
    w, u = hermitian_eig(_matrix(operator))
    weights = _weights(model, upsilon, epsilon)
    best = 0.0
    for alpha in np.linspace(0.0, beta, alpha_points):
        rows = np.sum(weights * np.abs(_fermi_matrix(w, u, alpha, beta)), axis=1)
        best = max(best, float(rows.max()))
    logger.debug('Fermi summability at beta = %g: %.6g', beta, best)

    return best


def _scan(model, operator, upsilon, rate_limit, mu=None, epsilon=None):
    """min over (mu, eps) of lattice_sum(upsilon - mu min(1, rate_limit / S_eps(H, mu)), eps, d)."""
    mus = config.MU_GRID if mu is None else (mu,)
    epsilons = config.EPSILON_GRID if epsilon is None else (epsilon,)
    best = (np.inf, None, None)
    for eps in epsilons:
        for m in mus:
            s = combes_thomas_S(model, operator, m, eps)
            factor = 1.0 if s <= 0 else min(1.0, rate_limit / s)
            value = lattice_sum(upsilon - m * factor, eps, model.d)
            if value < best[0]:
                best = (value, m, eps)
    return best


def fermi_summability_bound(model, operator, beta, upsilon, mu=None, epsilon=None):
    """
    96 |S| inf_{mu, eps} sum_x e^{(upsilon - mu min(1, pi / (4 beta S(H, mu)))) |x|^eps}.

    The infimum runs over MU_GRID x EPSILON_GRID; a given ``mu`` or ``epsilon`` fixes that
    coordinate instead.

    Returns
    -------
    bound: float
    mu, epsilon: float
        the minimizing parameters, None when the bound is infinite
    """
    value, m, eps = _scan(model, operator, upsilon, np.pi / (4.0 * beta), mu=mu, epsilon=epsilon)
    return 96.0 * len(model.spins) * value, m, eps


def projection_constant(model, projection, upsilon, epsilon):
    """D_P = sup_x sum_y e^{upsilon |x-y|^eps} |P_xy|."""
    p = getattr(projection, 'P', projection)
    return float(np.max(np.sum(_weights(model, upsilon, epsilon) * np.abs(p), axis=1)))


def u1_grid(beta, points=MIN_U1_POINTS):
    """Equidistant points of [0, beta + 1), the right end excluded."""
    return np.linspace(0.0, beta + 1.0, points, endpoint=False)


def alpha_metric(u1, u2, beta):
    """alpha(u1, u2) = [min(beta - min(u1, u2), |u1 - u2|)]_+."""
    return max(min(beta - min(u1, u2), abs(u1 - u2)), 0.0)


def alpha_tilde(u1, u2, beta):
    a = alpha_metric(u1, u2, beta)
    return min(a, beta - a)


class _CovarianceKernel(object):
    """F_{u1,u2}(H, P) through the spectral decomposition of H, computed once."""

    def __init__(self, h, projection, beta):
        self.w, self.u = hermitian_eig(h)
        self.p = getattr(projection, 'P', projection)
        self.q = np.eye(self.p.shape[0]) - self.p
        self.beta = beta

    def _sandwich(self, exponent):
        f = (self.u * np.exp(exponent)) @ self.u.conj().T
        return self.p @ f @ self.p + self.q @ f @ self.q

    def forward(self, alpha):
        """u1 < u2: P g P + P^perp g P^perp, g = e^{-alpha H}/(1 + e^{-beta H})."""
        return self._sandwich(-alpha * self.w - np.logaddexp(0.0, -self.beta * self.w))

    def backward(self, alpha):
        """u1 >= u2: -(P h P + P^perp h P^perp), h = e^{alpha H}/(1 + e^{beta H})."""
        return -self._sandwich(alpha * self.w - np.logaddexp(0.0, self.beta * self.w))


def _u2_nodes(u1, beta, panels):
    nodes = np.concatenate([np.linspace(0.0, beta + 1.0, panels + 1), [u1, beta]])
    return np.unique(nodes)


def decay_value(model, operator, projection, beta, upsilon, epsilon, gimel=0.0,
                u1_points=MIN_U1_POINTS, u2_panels=MIN_U2_PANELS):
    """
    omega = sup_{u1} sup_x1 sum_x2 e^{upsilon |x1-x2|^eps} int e^{gimel at(u1,u2)} |F_{u1,u2}(H,P)_{x1 x2}| du2.

    The u2 integral is a trapezoid rule over [0, beta + 1) with ``u2_panels`` uniform panels,
    refined with nodes at u1 and beta; each panel takes the branch of F of its interior, so the
    jump of F at u2 = u1 falls on a panel boundary.

    Raises
    ------
    GridTooCoarse
        for fewer than 16 u1 points or 64 u2 panels
    """
    if u1_points < MIN_U1_POINTS or u2_panels < MIN_U2_PANELS:
        raise GridTooCoarse('u1 grid needs {} points and the u2 quadrature {} panels'.format(
            MIN_U1_POINTS, MIN_U2_PANELS), u1_points=u1_points, u2_panels=u2_panels)
    _check_exponents(upsilon, epsilon)
    kernel = _CovarianceKernel(_matrix(operator), projection, beta)
    weights = _weights(model, upsilon, epsilon)
    best = 0.0
    for u1 in u1_grid(beta, u1_points):
        nodes = _u2_nodes(u1, beta, u2_panels)
        integral = np.zeros_like(weights)
        for a, b in zip(nodes[:-1], nodes[1:]):
            branch = kernel.forward if 0.5 * (a + b) > u1 else kernel.backward
            ends = [np.exp(gimel * alpha_tilde(u1, v, beta)) * np.abs(branch(alpha_metric(u1, v, beta)))
                    for v in (a, b)]
            integral += 0.5 * (b - a) * (ends[0] + ends[1])
        best = max(best, float(np.max(np.sum(weights * integral, axis=1))))
    logger.debug('omega at beta = %g, gimel = %g: %.6g', beta, gimel, best)

    return best


def summability_bound(model, operator, projection, beta, upsilon, epsilon, alpha_points=MIN_ALPHA_POINTS):
    """
    2 (D_P + 1)^2 D_{H,beta,upsilon,eps} (beta + 1).

    Returns
    -------
    bound: float
    parts: dict
        D_P and D
    """
    d_p = projection_constant(model, projection, upsilon, epsilon)
    d_h = fermi_summability(model, operator, beta, upsilon, epsilon, alpha_points=alpha_points)
    return 2.0 * (d_p + 1.0) ** 2 * d_h * (beta + 1.0), {'D_P': d_p, 'D': d_h}


def spectral_gap(operator):
    """min |eigenvalue|, reported as 0 below ZERO_EIGENVALUE_TOL."""
    h = _matrix(operator)
    gap = float(np.min(np.abs(np.linalg.eigvalsh(0.5 * (h + h.conj().T)))))
    return 0.0 if gap < config.ZERO_EIGENVALUE_TOL else gap


def _time_integral(u1, beta, rate):
    points = sorted({p for p in (u1, beta, 0.5 * beta) if 0.0 < p < beta + 1.0})
    value, _ = scipy.integrate.quad(lambda v: np.exp(rate * alpha_tilde(u1, v, beta)), 0.0, beta + 1.0,
                                    points=points or None, limit=200)
    return value


def gapped_bound(model, operator, beta, upsilon, gimel, u1_points=MIN_U1_POINTS):
    """
    152 |S| inf_{mu, eps} sum_x e^{(upsilon - mu min(1, g / (4 S(H, mu)))) |x|^eps}
    times sup_{u1} int_0^{beta+1} e^{(gimel - g/2) at(u1, u2)} du2 / (1 - e^{-beta g / 2}).

    Raises
    ------
    GapTooSmall
        unless the spectral gap g exceeds 2 gimel
    """
    gap = spectral_gap(operator)
    if not gap > 2.0 * gimel:
        raise GapTooSmall('spectral gap {:.6g} does not exceed 2 gimel = {:.6g}'.format(gap, 2.0 * gimel),
                          gap=gap, gimel=gimel)
    space, mu, eps = _scan(model, operator, upsilon, 0.25 * gap)
    rate = gimel - 0.5 * gap
    time = max(_time_integral(u1, beta, rate) for u1 in u1_grid(beta, u1_points))
    time /= -np.expm1(-0.5 * beta * gap)
    bound = 152.0 * len(model.spins) * space * time

    return bound, {'gap': gap, 'mu': mu, 'epsilon_scan': eps, 'space_sum': space, 'time_integral': time}


class DecayEstimate(object):
    def __init__(self, value, bound, parameters):
        """
        Parameters
        ----------
        value: float
            omega
        bound: float
            right-hand side of the summability estimate at the same parameters
        parameters: dict
        """
        if value < 0:
            raise ValueError('omega cannot be negative')
        self.value = float(value)
        self.bound = float(bound)
        self.parameters = dict(parameters)
        self.satisfied = self.value <= self.bound * (1.0 + config.DECAY_SLACK)

    def __repr__(self):
        return 'DecayEstimate(value={:.6g}, bound={:.6g}, satisfied={})'.format(self.value, self.bound, self.satisfied)

    def to_record(self):
        record = {'omega': self.value, 'bound': self.bound, 'satisfied': self.satisfied}
        record.update(self.parameters)
        return record


def decay_parameter(model, operator, projection, beta, upsilon, epsilon, gimel=0.0,
                    u1_points=MIN_U1_POINTS, u2_panels=MIN_U2_PANELS, alpha_points=MIN_ALPHA_POINTS,
                    theorem=None):
    """
    omega at finite volume together with the bound it is compared against.

    Parameters
    ----------
    model: LatticeModel
    operator: SelfDualOperator
        self-dual Hamiltonian of the box
    projection: BasisProjection
    beta, upsilon, epsilon, gimel: float
    u1_points, u2_panels, alpha_points: int
        grid resolutions
    theorem: {'general', 'gapped'}, optional
        'general' compares with 2 (D_P + 1)^2 D (beta + 1) and needs gimel = 0; 'gapped'
        compares with :func:`gapped_bound`, which assumes P = 1[H > 0] + P0. Defaults to
        'general' for gimel = 0 and 'gapped' otherwise.

    Returns
    -------
    DecayEstimate
    """
    theorem = theorem or ('general' if gimel == 0 else 'gapped')
    value = decay_value(model, operator, projection, beta, upsilon, epsilon, gimel, u1_points, u2_panels)
    parameters = {'beta': float(beta), 'upsilon': float(upsilon), 'epsilon': float(epsilon),
                  'gimel': float(gimel), 'L': model.L, 'u1_points': int(u1_points), 'u2_panels': int(u2_panels),
                  'theorem': theorem}
    if theorem == 'general':
        if gimel != 0:
            raise NotApplicable('the general summability bound holds for gimel = 0 only', gimel=gimel)
        bound, parts = summability_bound(model, operator, projection, beta, upsilon, epsilon, alpha_points)
        parameters['alpha_points'] = int(alpha_points)
    elif theorem == 'gapped':
        bound, parts = gapped_bound(model, operator, beta, upsilon, gimel, u1_points)
    else:
        raise ValueError('unknown theorem {!r}'.format(theorem))
    parameters.update(parts)
    estimate = DecayEstimate(value, bound, parameters)
    logger.info('beta = %g: omega %.6g, bound %.6g', beta, value, bound)

    return estimate


def uniformity_ratio(estimates):
    values = np.array([e.value for e in estimates])
    return float(values.max() / values.min()) if values.min() > 0 else np.inf


def gapped_summability_check(model, beta_list, upsilon, epsilon, gimel, u1_points=MIN_U1_POINTS,
                             u2_panels=MIN_U2_PANELS, strict=False):
    """
    omega with P = 1[H > 0] + P0 against the gapped bound, for every beta.

    With gimel = 0 the general bound is used instead.

    Parameters
    ----------
    strict: bool, default False
        raise VerificationFailure if a bound fails or omega varies across beta by more than
        GAPPED_UNIFORMITY_FACTOR

    Returns
    -------
    list of DecayEstimate
        each one carrying the uniformity ratio of the whole list in its parameters

    Raises
    ------
    GapTooSmall
        unless the spectral gap exceeds 2 gimel
    """
    operator = build_hamiltonian(model)
    gap = spectral_gap(operator)
    if not gap > 2.0 * gimel:
        raise GapTooSmall('spectral gap {:.6g} does not exceed 2 gimel = {:.6g}'.format(gap, 2.0 * gimel),
                          gap=gap, gimel=gimel)
    projection = diagonalizing_projection(operator)
    estimates = [decay_parameter(model, operator, projection, beta, upsilon, epsilon, gimel,
                                 u1_points=u1_points, u2_panels=u2_panels)
                 for beta in beta_list]
    ratio = uniformity_ratio(estimates)
    for e in estimates:
        e.parameters['uniformity_ratio'] = ratio
    logger.info('gapped check over beta %s: uniformity ratio %.4g', list(beta_list), ratio)
    if strict:
        failed = [e.parameters['beta'] for e in estimates if not e.satisfied]
        if failed or ratio > config.GAPPED_UNIFORMITY_FACTOR:
            raise VerificationFailure('gapped summability check failed', failed_betas=failed, ratio=ratio)

    return estimates


def projection_drift(model, step=2, projection_builder=None):
    """
    ||P_L - P_{L+step}|| on the indices of Lambda_L.

    Parameters
    ----------
    projection_builder: callable, optional
        model -> BasisProjection; defaults to the canonical projection for models without
        pairing and to 1[H > 0] + P0 otherwise
    """
    if projection_builder is None:
        def projection_builder(mdl):
            if not mdl.pairing:
                return canonical_projection(mdl)
            return diagonalizing_projection(build_hamiltonian(mdl))
    large = model.with_size(model.L + step)
    small_p = projection_builder(model).P
    large_p = projection_builder(large).P
    plain = [large.mode_index(x, s) for x, s in model.modes()]
    index = plain + [large.m + j for j in plain]
    drift = float(np.linalg.norm(large_p[np.ix_(index, index)] - small_p, 2))
    logger.debug('projection drift from L = %d to %d: %.3e', model.L, model.L + step, drift)

    return drift


def fit_beta_exponent(betas, values):
    """Slope of log(value) against log(beta + 1)."""
    x = np.log(np.asarray(betas, dtype=float) + 1.0)
    return float(np.polyfit(x, np.log(np.asarray(values, dtype=float)), 1)[0])
