# coding: utf-8


"""Command-line driver: ``berezin-lab {genfunc,covariance,pfbound,decay,verify}``.

Exit codes: 0 on success, 1 when a check fails or a computation raises, 2 on input errors
(bad flags, unreadable or malformed models, unusable paths).
Every failure also leaves ``failure.json`` in the output directory.
"""


import argparse
import json
import logging
import traceback
from dataclasses import asdict, dataclass
from functools import reduce

import numpy as np
import pandas as pd

from . import config
from .algebra.fock import FockRep, tracial_state
from .algebra.selfdual import diagonalizing_projection
from .covariance.bounds import bound_statistics
from .covariance.covariance import TimeGrid, approximant_errors, compare_constructions, covariance_direct
from .errors import (BerezinLabError, CapacityExceeded, ConfigError, GapTooSmall, GridTooCoarse, ModelError,
                     NotApplicable, VerificationFailure)
from .genfunc.feynman_kac import convergence_study, feynman_kac_rhs
from .genfunc.moment import build_interaction, energy_density, log_moment_generating
from .genfunc.trace import trace_formula
from .lattice.decay import (combes_thomas_scan, decay_parameter, fermi_summability, fit_beta_exponent,
                            gapped_summability_check, projection_drift, resolvent_difference_check)
from .lattice.model import build_hamiltonian, bundled_model, bundled_models, canonical_projection, load_model
from .linalg.numkernel import pfaffian
from .utils.report import write_failure, write_report


__all__ = ['RunConfig', 'build_parser', 'config_from_args', 'run', 'main']


logger = logging.getLogger(__name__)


COMMANDS = ('genfunc', 'covariance', 'pfbound', 'decay', 'verify')
DEFAULT_MODELS = {'decay': 'pairing_chain'}
DEFAULT_SEED = 7
RANDOMIZED = ('pfbound', 'verify')
COMBES_THOMAS_Z = (3j, 2.5 + 1j)
COMBES_THOMAS_MU = (0.25, 0.5)
COMBES_THOMAS_EPSILON = (0.5, 1.0)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = ''
    beta: float = 1.0
    s: float = 0.3
    n_list: tuple = config.DEFAULT_N_LIST
    beta_list: tuple = (1.0, 2.0, 4.0, 8.0)
    upsilon: float = 0.1
    epsilon: float = 1.0
    gimel: float = 0.0
    seed: int = DEFAULT_SEED
    seed_defaulted: bool = False
    samples: int = 1000
    grid_u1: int = 16
    grid_u2: int = 64
    l_list: tuple = ()
    method: str = 'sweep'
    out: str = 'berezin_out'
    fmt: str = 'csv'

    def validate(self):
        """Raise ConfigError naming the first field outside its admissible range."""
        checks = [
            ('command', self.command in COMMANDS),
            ('beta', self.beta > 0),
            ('n_list', len(self.n_list) > 0 and all(int(n) == n and n >= 1 for n in self.n_list)),
            ('beta_list', len(self.beta_list) > 0 and all(b > 0 for b in self.beta_list)),
            ('upsilon', self.upsilon >= 0),
            ('epsilon', 0 < self.epsilon <= 1),
            ('gimel', self.gimel >= 0),
            ('seed', self.seed >= 0),
            ('samples', self.samples >= 1),
            ('grid_u1', self.grid_u1 >= 16),
            ('grid_u2', self.grid_u2 >= 64),
            ('l_list', not self.l_list or (len(self.l_list) == 3
                                           and 0 <= self.l_list[2] <= self.l_list[1] <= self.l_list[0])),
            ('method', self.method in ('sweep', 'literal', 'wick')),
            ('fmt', self.fmt in ('csv', 'json')),
        ]
        for field, ok in checks:
            if not ok:
                raise ConfigError('invalid value for {}: {!r}'.format(field, getattr(self, field)), field=field)
        return self

    def to_dict(self):
        return asdict(self)


def _number_list(kind):
    def parse(text):
        try:
            return tuple(kind(v) for v in text.split(',') if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError('expected a comma-separated list, got {!r}'.format(text))
    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--model', default='', help='model JSON file or bundled model name')
    common.add_argument('--beta', type=float, default=1.0)
    common.add_argument('--s', type=float, default=0.3)
    common.add_argument('--n-list', type=_number_list(int), default=config.DEFAULT_N_LIST)
    common.add_argument('--beta-list', type=_number_list(float), default=(1.0, 2.0, 4.0, 8.0))
    common.add_argument('--upsilon', type=float, default=0.1)
    common.add_argument('--epsilon', type=float, default=1.0)
    common.add_argument('--gimel', type=float, default=0.0)
    common.add_argument('--seed', type=int, default=None, help='defaults to {}'.format(DEFAULT_SEED))
    common.add_argument('--samples', type=int, default=1000)
    common.add_argument('--grid-u1', type=int, default=16)
    common.add_argument('--grid-u2', type=int, default=64)
    common.add_argument('--l-list', type=_number_list(int), default=(),
                        help='volumes L_f,L_i,l; switches genfunc to the lattice moment generating function')
    common.add_argument('--method', default='sweep', choices=['sweep', 'literal', 'wick'])
    common.add_argument('--out', default='berezin_out')
    common.add_argument('--format', dest='fmt', default='csv', choices=['csv', 'json'])
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--quiet', action='store_true')

    parser = argparse.ArgumentParser(prog='berezin-lab', description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('genfunc', parents=[common], help='Feynman-Kac convergence report')
    sub.add_parser('covariance', parents=[common], help='closed-form against direct covariance')
    sub.add_parser('pfbound', parents=[common], help='determinant and Pfaffian bound statistics')
    sub.add_parser('decay', parents=[common], help='summability of the covariance per beta')
    sub.add_parser('verify', parents=[common], help='full verification suite')
    return parser


def config_from_args(args):
    fields = RunConfig.__dataclass_fields__
    values = {k: v for k, v in vars(args).items() if k in fields}
    if values.get('seed') is None:
        values.update(seed=DEFAULT_SEED, seed_defaulted=True)
    return RunConfig(**values).validate()


def _load(cfg):
    if cfg.model in bundled_models():
        return bundled_model(cfg.model)
    if cfg.model:
        return load_model(cfg.model)
    return bundled_model(DEFAULT_MODELS.get(cfg.command, 'single_mode'))


def _projection(model, operator):
    return canonical_projection(model) if not model.pairing else diagonalizing_projection(operator)


def _quantum_system(model):
    """Hamiltonian, projection and the interaction and observable of the box."""
    operator = build_hamiltonian(model)
    projection = _projection(model, operator)
    rep = FockRep(projection)
    w = build_interaction(model, model.interaction, model.L, rep)
    k = energy_density(model, model.observable, model.L, rep)
    return operator, projection, rep, w, k


def _admissible(cfg, operator):
    ns = [n for n in sorted(set(cfg.n_list)) if n > config.GRID_MARGIN * cfg.beta * operator.norm()]
    if not ns:
        raise GridTooCoarse('no n in {} exceeds {} beta ||H||'.format(list(cfg.n_list), config.GRID_MARGIN),
                            norm=operator.norm())
    return ns


def run_genfunc(cfg, model):
    if cfg.l_list:
        grid = cfg.s * np.linspace(-1.0, 1.0, 5)
        rows = [{'s': float(s), 'J': log_moment_generating(model, model.interaction, model.observable, cfg.beta,
                                                           s, cfg.l_list)} for s in grid]
        return pd.DataFrame(rows), {'volumes': list(cfg.l_list), 'model': model.name}, []
    operator, projection, _, w, k = _quantum_system(model)
    report = convergence_study(operator, projection, w, k, cfg.beta, cfg.s, _admissible(cfg, operator),
                               method=cfg.method, description=model.name)
    return report.table, report.metadata, []


def run_covariance(cfg, model):
    operator = build_hamiltonian(model)
    projection = diagonalizing_projection(operator)
    rows = [compare_constructions(operator, projection, TimeGrid(n, cfg.beta)) for n in _admissible(cfg, operator)]
    table = pd.DataFrame(rows)
    table['passed'] = table['max_deviation'] <= config.COVARIANCE_AGREEMENT_TOL
    failed = ['n={}'.format(n) for n in table.loc[~table['passed'], 'n']]
    return table, {'model': model.name}, failed


def _weight_matrix(seed):
    a = np.random.default_rng(seed).normal(size=(3, 3))
    return a @ a.T


def run_pfbound(cfg, model):
    operator = build_hamiltonian(model)
    projection = diagonalizing_projection(operator)
    frames = []
    for n in _admissible(cfg, operator):
        cov = covariance_direct(operator, projection, TimeGrid(n, cfg.beta))
        table = bound_statistics(cov, cfg.samples, cfg.seed, weight=_weight_matrix(cfg.seed))
        table.insert(0, 'n', n)
        frames.append(table)
    table = pd.concat(frames, ignore_index=True)
    failed = ['{} at n={}'.format(r.check, r.n) for r in table.itertuples() if not r.passed]
    return table, {'model': model.name}, failed


def run_decay(cfg, model):
    operator = build_hamiltonian(model)
    projection = _projection(model, operator)
    drift = projection_drift(model)
    rows = []
    for beta in cfg.beta_list:
        estimate = decay_parameter(model, operator, projection, beta, cfg.upsilon, cfg.epsilon, cfg.gimel,
                                   u1_points=cfg.grid_u1, u2_panels=cfg.grid_u2)
        record = estimate.to_record()
        record['projection_drift'] = drift
        rows.append(record)
    table = pd.DataFrame(rows)
    failed = ['beta={}'.format(r['beta']) for r in rows if not r['satisfied']]
    metadata = {'model': model.name, 'L': model.L, 'projection_drift': drift,
                'note': 'finite-volume values on the box of half-side L; no infinite-volume limit is taken'}
    return table, metadata, failed


def _check(name, value, threshold, passed):
    return {'name': name, 'value': float(value), 'threshold': float(threshold), 'passed': bool(passed)}


def _pfaffian_check(rng):
    worst = 0.0
    for _ in range(50):
        n = 2 * int(rng.integers(1, 6))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = a - a.T
        det = np.linalg.det(m)
        worst = max(worst, abs(pfaffian(m) ** 2 - det) / (1 + abs(det)))
    return _check('pfaffian_squared', worst, config.PFAFFIAN_CHECK_TOL, worst <= config.PFAFFIAN_CHECK_TOL)


def _car_check(rep):
    ops = rep.slot_operators
    eye = np.eye(rep.dimension)
    worst = 0.0
    for s, b in enumerate(ops):
        for t, c in enumerate(ops):
            anti = b @ c.conj().T + c.conj().T @ b
            worst = max(worst, float(np.max(np.abs(anti - (s == t) * eye))))
    return _check('car', worst, config.CAR_TOL, worst <= config.CAR_TOL)


def _random_even(rep, rng):
    x = rng.normal(size=(rep.dimension, rep.dimension)) + 1j * rng.normal(size=(rep.dimension, rep.dimension))
    return rep.operator(0.5 * (x + rep.parity @ x @ rep.parity))


def _trace_check(projection, rep, rng):
    worst = 0.0
    for n in (1, 2, 3):
        ops = [_random_even(rep, rng) for _ in range(n)]
        exact = tracial_state(rep, reduce(lambda a, b: a @ b, ops))
        worst = max(worst, abs(trace_formula(projection, ops, method='literal') - exact))
    return _check('trace_formula', worst, config.TRACE_FORMULA_TOL, worst <= config.TRACE_FORMULA_TOL)


def _path_checks(cfg, operator, projection, w, k, n):
    rows = []
    reference = feynman_kac_rhs(operator, projection, w, k, cfg.beta, cfg.s, n, method='sweep')
    for method in ('literal', 'wick'):
        try:
            value = feynman_kac_rhs(operator, projection, w, k, cfg.beta, cfg.s, n, method=method)
        except CapacityExceeded:
            logger.info('%s path skipped at n = %d: capacity exceeded', method, n)
            continue
        gap = abs(value - reference)
        rows.append(_check('{}_vs_sweep'.format(method), gap, config.PATH_AGREEMENT_TOL,
                           gap <= config.PATH_AGREEMENT_TOL))
    return rows


def _approximant_check(cfg, operator):
    norm = operator.norm()
    if norm == 0:
        logger.info('approximant check skipped: H = 0')
        return []
    n0 = max(16, int(2 ** np.ceil(np.log2(8.0 * cfg.beta * norm))))
    ratios = approximant_errors(operator, cfg.beta, [n0, 2 * n0, 4 * n0])['ratio'].dropna().to_numpy()
    low, high = config.APPROXIMANT_RATIO_RANGE
    worst = float(ratios[np.argmax(np.abs(ratios - 0.25))])
    return [_check('approximant_ratio', worst, high, low <= worst <= high)]


def _lattice_models(model):
    """The model itself where it has a box, else the bundled chains."""
    lattice = model if model.L >= 1 else bundled_model('chain')
    gapped = model if model.L >= 1 and model.pairing else bundled_model('pairing_chain')
    return lattice, gapped


def _combes_thomas_checks(lattice, operator):
    table = combes_thomas_scan(lattice, operator, COMBES_THOMAS_Z, COMBES_THOMAS_MU, COMBES_THOMAS_EPSILON)
    applicable = table.loc[table['applicable'], 'ratio']
    worst = float(applicable.max()) if len(applicable) else 0.0
    rows = [_check('combes_thomas', worst, 1.0 + config.BOUND_SLACK, table['passed'].all())]
    try:
        ratio = resolvent_difference_check(lattice, operator, 0.3, 1.0)
    except NotApplicable as exc:
        logger.info('resolvent difference check skipped: %s', exc.message)
        return rows
    rows.append(_check('resolvent_difference', ratio, 1.0 + config.BOUND_SLACK, ratio <= 1.0 + config.BOUND_SLACK))
    return rows


def _summability_checks(cfg, lattice, operator):
    projection = _projection(lattice, operator)
    fermi, omega, worst = [], [], 0.0
    for beta in cfg.beta_list:
        fermi.append(fermi_summability(lattice, operator, beta, cfg.upsilon, cfg.epsilon))
        estimate = decay_parameter(lattice, operator, projection, beta, cfg.upsilon, cfg.epsilon, 0.0,
                                   u1_points=cfg.grid_u1, u2_panels=cfg.grid_u2)
        omega.append(estimate.value)
        worst = max(worst, estimate.value / estimate.bound)
    rows = [_check('summability_bound', worst, 1.0 + config.DECAY_SLACK, worst <= 1.0 + config.DECAY_SLACK)]
    if len(set(cfg.beta_list)) < 2:
        logger.info('beta exponents skipped: a single beta')
        return rows
    limit = lattice.d / cfg.epsilon
    for name, values, slack in (('fermi_exponent', fermi, config.FERMI_EXPONENT_SLACK),
                                ('decay_exponent', omega, config.DECAY_EXPONENT_SLACK)):
        exponent = fit_beta_exponent(cfg.beta_list, values)
        rows.append(_check(name, exponent, limit + slack, exponent <= limit + slack))
    return rows


def _gapped_checks(cfg, gapped):
    gimel = cfg.gimel if cfg.gimel > 0 else config.VERIFY_GIMEL
    try:
        estimates = gapped_summability_check(gapped, tuple(cfg.beta_list), cfg.upsilon, cfg.epsilon, gimel,
                                             u1_points=cfg.grid_u1, u2_panels=cfg.grid_u2)
    except GapTooSmall as exc:
        return [_check('gapped_gap', exc.context['gap'], 2.0 * gimel, False)]
    worst = max(e.value / e.bound for e in estimates)
    ratio = estimates[0].parameters['uniformity_ratio']
    return [_check('gapped_bound', worst, 1.0 + config.DECAY_SLACK, all(e.satisfied for e in estimates)),
            _check('gapped_uniformity', ratio, config.GAPPED_UNIFORMITY_FACTOR,
                   ratio <= config.GAPPED_UNIFORMITY_FACTOR)]


def run_verify(cfg, model):
    rng = np.random.default_rng(cfg.seed)
    operator, projection, rep, w, k = _quantum_system(model)
    rows = [_pfaffian_check(rng), _car_check(rep)]
    if 6 * projection.m <= config.MAX_GRASSMANN_GENERATORS:
        rows.append(_trace_check(projection, rep, rng))
    ns = _admissible(cfg, operator)
    cov_projection = diagonalizing_projection(operator)
    agreement = compare_constructions(operator, cov_projection, TimeGrid(ns[0], cfg.beta))['max_deviation']
    rows.append(_check('covariance_agreement', agreement, config.COVARIANCE_AGREEMENT_TOL,
                       agreement <= config.COVARIANCE_AGREEMENT_TOL))
    rows.extend(_path_checks(cfg, operator, projection, w, k, ns[0]))

    report = convergence_study(operator, projection, w, k, cfg.beta, cfg.s, ns, description=model.name)
    errors = report.table['abs_err']
    if errors.max() <= config.PATH_AGREEMENT_TOL:
        rows.append(_check('feynman_kac_exact', errors.max(), config.PATH_AGREEMENT_TOL, True))
    else:
        order = report.empirical_order()
        rows.append(_check('feynman_kac_order', order, config.MIN_EMPIRICAL_ORDER,
                           order >= config.MIN_EMPIRICAL_ORDER))
        relative = report.relative_error()
        rows.append(_check('feynman_kac_relative_error', relative, config.FEYNMAN_KAC_THRESHOLD,
                           relative <= config.FEYNMAN_KAC_THRESHOLD))
    imag = float(np.max(np.abs(report.table['rhs_im'])))
    rows.append(_check('feynman_kac_real', imag, config.LOG_ARGUMENT_IMAG_TOL, imag <= config.LOG_ARGUMENT_IMAG_TOL))

    cov = covariance_direct(operator, cov_projection, TimeGrid(ns[0], cfg.beta))
    stats = bound_statistics(cov, cfg.samples, cfg.seed, weight=_weight_matrix(cfg.seed))
    for r in stats.itertuples():
        threshold = 0.5 if r.check == 'sharpness' else 1.0 + config.BOUND_SLACK
        rows.append(_check('bound_' + r.check, r.max_ratio, threshold, r.passed))
    rows.extend(_approximant_check(cfg, operator))

    lattice, gapped = _lattice_models(model)
    lattice_operator = build_hamiltonian(lattice)
    rows.extend(_combes_thomas_checks(lattice, lattice_operator))
    rows.extend(_summability_checks(cfg, lattice, lattice_operator))
    rows.extend(_gapped_checks(cfg, gapped))

    table = pd.DataFrame(rows, columns=['name', 'value', 'threshold', 'passed'])
    failed = table.loc[~table['passed'], 'name'].tolist()
    return table, {'model': model.name, 'lattice_model': lattice.name, 'gapped_model': gapped.name}, failed


RUNNERS = {'genfunc': run_genfunc, 'covariance': run_covariance, 'pfbound': run_pfbound,
           'decay': run_decay, 'verify': run_verify}


def _fail(cfg, exc, code):
    if isinstance(exc, BerezinLabError):
        record = exc.to_record()
    else:
        record = {'error': type(exc).__name__, 'message': str(exc)}
    logger.error('%s: %s', record['error'], record['message'])
    logger.debug(traceback.format_exc())
    record['exit_code'] = code
    try:
        write_failure(cfg.out, record, run_config=cfg.to_dict())
    except OSError as err:
        logger.error('no failure record written to %s: %s', cfg.out, err)
    return code


def run(cfg):
    """
    Execute one command and write its report.

    Returns
    -------
    exit_code: int
        0 on success, 1 on a failed check or computation error, 2 on input errors
    """
    settings = cfg.to_dict()
    if cfg.command in RANDOMIZED and cfg.seed_defaulted:
        logger.warning('no --seed given, %s runs with the default seed %d', cfg.command, cfg.seed)
    try:
        model = _load(cfg)
        table, metadata, failed = RUNNERS[cfg.command](cfg, model)
        path = write_report(table, cfg.out, cfg.command, fmt=cfg.fmt, run_config=settings, metadata=metadata)
        if failed:
            raise VerificationFailure('{} failed: {}'.format(cfg.command, ', '.join(failed)), report=path)
        logger.info('%s finished, report in %s', cfg.command, path)
        return 0
    except (ConfigError, ModelError, OSError, json.JSONDecodeError) as exc:
        return _fail(cfg, exc, 2)
    except BerezinLabError as exc:
        return _fail(cfg, exc, 1)
    except Exception as exc:
        return _fail(cfg, exc, 1)


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        record = exc.to_record()
        record['exit_code'] = 2
        logger.error(exc.message)
        write_failure(args.out, record, run_config=vars(args))
        return 2
    return run(cfg)


if __name__ == '__main__':
    raise SystemExit(main())
