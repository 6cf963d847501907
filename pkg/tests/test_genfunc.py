from functools import reduce

import numpy as np
import pandas as pd
import pytest

from berezin_lab.algebra.fock import FockRep, tracial_state
from berezin_lab.algebra.selfdual import diagonalizing_projection
from berezin_lab.errors import ModelError, ShapeMismatch
from berezin_lab.genfunc.feynman_kac import (ConvergenceReport, convergence_study, feynman_kac_chernoff,
                                             feynman_kac_lhs, feynman_kac_rhs, max_literal_n, tracial_chernoff,
                                             tracial_feynman_kac)
from berezin_lab.genfunc.moment import build_interaction, energy_density, log_moment_generating
from berezin_lab.genfunc.trace import trace_formula
from berezin_lab.lattice.model import build_hamiltonian, bundled_model, canonical_projection, model_from_dict


def random_even(rep, rng):
    x = rng.normal(size=(rep.dimension, rep.dimension)) + 1j * rng.normal(size=(rep.dimension, rep.dimension))
    return rep.operator(0.5 * (x + rep.parity @ x @ rep.parity))


def single_mode_system():
    model = bundled_model('single_mode')
    operator = build_hamiltonian(model)
    projection = diagonalizing_projection(operator)
    rep = FockRep(projection)
    w = build_interaction(model, model.interaction, model.L, rep)
    k = energy_density(model, model.observable, model.L, rep)
    return operator, projection, rep, w, k


@pytest.mark.parametrize('count', [1, 2, 3])
def test_trace_formula_matches_normalized_trace(rng, count):
    _, projection, rep, _, _ = single_mode_system()
    ops = [random_even(rep, rng) for _ in range(count)]
    exact = tracial_state(rep, reduce(lambda a, b: a @ b, ops))
    assert trace_formula(projection, ops, method='literal') == pytest.approx(exact, abs=1e-10)
    assert trace_formula(projection, ops, method='sweep') == pytest.approx(exact, abs=1e-10)


def test_trace_formula_on_two_modes(rng):
    operator = build_hamiltonian(bundled_model('two_spin'))
    projection = diagonalizing_projection(operator)
    rep = FockRep(projection)
    ops = [random_even(rep, rng) for _ in range(2)]
    exact = tracial_state(rep, ops[0] @ ops[1])
    assert trace_formula(projection, ops) == pytest.approx(exact, abs=1e-10)


def test_free_right_hand_side_is_one():
    operator, projection, rep, _, _ = single_mode_system()
    zero = 0 * rep.identity()
    for method in ('sweep', 'literal', 'wick'):
        assert feynman_kac_rhs(operator, projection, zero, zero, 1.0, 0.3, 4, method=method) == pytest.approx(1.0)
    assert feynman_kac_lhs(operator, zero, zero, 1.0, 0.3) == pytest.approx(1.0)


def test_evaluation_paths_agree():
    operator, projection, _, w, k = single_mode_system()
    values = [feynman_kac_rhs(operator, projection, w, k, 1.0, 0.3, 4, method=method)
              for method in ('sweep', 'literal', 'wick')]
    assert values[1] == pytest.approx(values[0], abs=1e-9)
    assert values[2] == pytest.approx(values[0], abs=1e-9)


@pytest.mark.parametrize('n', [4, 8])
def test_right_hand_side_equals_chernoff_products(n):
    operator, projection, _, w, k = single_mode_system()
    rhs = feynman_kac_rhs(operator, projection, w, k, 1.0, 0.3, n)
    assert rhs == pytest.approx(feynman_kac_chernoff(operator, projection, w, k, 1.0, 0.3, n), abs=1e-10)


def test_tracial_form_equals_chernoff_trace():
    operator, projection, _, w, k = single_mode_system()
    sweep = tracial_feynman_kac(operator, projection, w, k, 1.0, 0.3, 4)
    literal = tracial_feynman_kac(operator, projection, w, k, 1.0, 0.3, 4, method='literal')
    chernoff = tracial_chernoff(operator, projection, w, k, 1.0, 0.3, 4)
    assert sweep == pytest.approx(chernoff, abs=1e-10)
    assert literal == pytest.approx(chernoff, abs=1e-10)


def test_convergence_on_the_single_mode():
    operator, projection, _, w, k = single_mode_system()
    report = convergence_study(operator, projection, w, k, 1.0, 0.3, [4, 8, 16, 24], description='single mode')
    assert list(report.table.columns) == ConvergenceReport.COLUMNS
    assert report.relative_error() < 5e-2
    assert report.empirical_order() > 0.8
    assert report.metadata['monotone']
    assert report.metadata['max_literal_n'] == max_literal_n(1.0, 1)
    assert np.all(np.abs(report.table['rhs_im']) < 1e-10)


def test_report_needs_increasing_n():
    table = pd.DataFrame({'n': [8, 4], 'rhs_re': [1.0, 1.0], 'rhs_im': [0.0, 0.0], 'lhs_re': [1.0, 1.0],
                          'abs_err': [0.0, 0.0], 'ratio': [np.nan, np.nan]})
    with pytest.raises(ShapeMismatch):
        ConvergenceReport(table, {})


def test_max_literal_n():
    # n_beta 2 m must stay within 24 generators
    assert max_literal_n(1.0, 1) == 6
    assert max_literal_n(1.0, 7) == 1
    assert max_literal_n(1.0, 13) == 0


FREE_CHAIN = {'name': 'free_chain', 'd': 1, 'L': 2, 'spins': [0],
              'hopping': [{'dx': [0], 's': 0, 't': 0, 're': 0.4}, {'dx': [1], 's': 0, 't': 0, 're': -1.0}],
              'observable': [{'kind': 'density', 's': 0, 'u': 1.0}]}


def test_free_moment_generating_function_is_a_determinant():
    model = model_from_dict(FREE_CHAIN)
    beta, s = 0.9, 0.5
    h, _ = model.one_particle()
    region = np.diag([1.0 if max(abs(c) for c in x) <= 1 else 0.0 for x, _ in model.modes()])
    w, u = np.linalg.eigh(h)
    gibbs = (u * np.exp(-beta * w)) @ u.conj().T
    weighted = gibbs @ np.diag(np.exp(s * np.diag(region)))
    expected = (np.log(np.linalg.det(np.eye(model.m) + weighted).real)
                - np.log(np.linalg.det(np.eye(model.m) + gibbs).real)) / 3
    value = log_moment_generating(model, [], model.observable, beta, s, (2, 1, 1))
    assert value == pytest.approx(expected, rel=1e-10)
    assert log_moment_generating(model, [], model.observable, beta, 0.0, (2, 1, 1)) == pytest.approx(0.0, abs=1e-12)


def test_interaction_restricted_to_the_region():
    model = bundled_model('chain')
    rep = FockRep(canonical_projection(model))
    full = build_interaction(model, [{'kind': 'density', 's': 0, 'u': 1.0}], 2, rep)
    inner = build_interaction(model, [{'kind': 'density', 's': 0, 'u': 1.0}], 1, rep)
    assert np.trace(full.M).real == pytest.approx(5 * 2 ** 4)
    assert np.trace(inner.M).real == pytest.approx(3 * 2 ** 4)
    pinned = build_interaction(model, [{'kind': 'density', 's': 0, 'u': 1.0, 'site': [0]}], 2, rep)
    assert np.trace(pinned.M).real == pytest.approx(2 ** 4)


def test_interaction_errors():
    model = bundled_model('chain')
    rep = FockRep(canonical_projection(model))
    with pytest.raises(ModelError):
        build_interaction(model, [{'kind': 'quartic', 'u': 1.0}], 1, rep)
    with pytest.raises(ModelError):
        build_interaction(model, [{'kind': 'density', 'u': 1.0}], 1, rep)
    with pytest.raises(ModelError):
        build_interaction(model, [], 3, rep)
    with pytest.raises(ModelError):
        log_moment_generating(model, [], [], 1.0, 0.1, (1, 2, 0))
