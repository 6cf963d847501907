import numpy as np
import pytest
import scipy.integrate

from berezin_lab.errors import GapTooSmall, GridTooCoarse, ModelError, NotApplicable
from berezin_lab.lattice.decay import (DecayEstimate, alpha_metric, alpha_tilde, combes_thomas_check,
                                       combes_thomas_S, combes_thomas_scan, decay_parameter, decay_value,
                                       fermi_summability, fermi_summability_bound, fit_beta_exponent, gapped_bound,
                                       gapped_summability_check, lattice_sum, projection_constant, projection_drift,
                                       resolvent_difference_check, spectral_gap, u1_grid, uniformity_ratio)
from berezin_lab.lattice.model import (bundled_model, bundled_models, build_hamiltonian, canonical_projection,
                                       load_model, model_from_dict)


def test_bundled_models():
    assert bundled_models() == ['chain', 'pairing_chain', 'single_mode', 'two_spin']
    with pytest.raises(ModelError):
        bundled_model('ladder')


def test_chain_one_particle_operator():
    model = bundled_model('chain')
    assert model.m == 5
    assert model.mode_index((-2,), 0) == 0
    assert model.mode_index((2,), 0) == 4
    h, g = model.one_particle()
    expected = np.eye(5, k=1) + np.eye(5, k=-1)
    np.testing.assert_allclose(h, expected)
    np.testing.assert_allclose(g, 0.0)
    assert model.interaction_range == 1.0
    assert model.contains((2,)) and not model.contains((3,))


def test_pairing_completion_is_antisymmetric():
    model = bundled_model('pairing_chain')
    h, g = model.one_particle()
    np.testing.assert_allclose(g, -g.T)
    np.testing.assert_allclose(h, h.conj().T)
    assert g[model.mode_index((0,), 0), model.mode_index((1,), 0)] == 0.5
    operator = build_hamiltonian(model)
    assert operator.is_hamiltonian
    assert spectral_gap(operator) > 0.5


def test_spin_ordering_is_site_major():
    model = bundled_model('two_spin')
    assert model.modes() == [((0,), 'up'), ((0,), 'down')]
    d = model.distances()
    assert d.shape == (4, 4)
    np.testing.assert_allclose(d, 0.0)


def test_model_errors(tmp_path):
    base = {'d': 1, 'L': 1, 'spins': [0]}
    with pytest.raises(ModelError):
        model_from_dict(dict(base, pairing=[{'dx': [0], 's': 0, 't': 0, 're': 0.5}]))
    with pytest.raises(ModelError):
        model_from_dict(dict(base, hopping=[{'dx': [1], 's': 0, 't': 1, 're': 1.0}]))
    with pytest.raises(ModelError):
        model_from_dict(dict(base, hopping=[{'dx': [1, 0], 's': 0, 't': 0, 're': 1.0}]))
    with pytest.raises(ModelError):
        model_from_dict({'L': 1})
    with pytest.raises(ModelError):
        model_from_dict(dict(base, hopping=[{'dx': [1], 's': 0, 't': 0, 're': 1.0},
                                           {'dx': [-1], 's': 0, 't': 0, 're': 2.0}]))
    with pytest.raises(FileNotFoundError):
        load_model(str(tmp_path / 'missing.json'))


def test_to_dict_round_trip():
    model = bundled_model('pairing_chain')
    again = model_from_dict(model.to_dict())
    for a, b in zip(model.one_particle(), again.one_particle()):
        np.testing.assert_allclose(a, b)


def test_combes_thomas_on_the_chain():
    model = bundled_model('chain')
    operator = build_hamiltonian(model)
    mu = 0.5
    assert combes_thomas_S(model, operator, mu, 1.0) == pytest.approx(2.0 * (np.exp(mu) - 1.0))
    assert combes_thomas_check(model, operator, 3j, mu, 1.0) <= 1.0
    with pytest.raises(NotApplicable):
        combes_thomas_check(model, operator, 0.05j, mu, 1.0)
    table = combes_thomas_scan(model, operator, [3j, 2.5 + 1j], [0.25, 0.5], [0.5, 1.0])
    assert len(table) == 8
    assert table['passed'].all()


def test_resolvent_difference_check():
    model = bundled_model('chain')
    operator = build_hamiltonian(model)
    assert resolvent_difference_check(model, operator, 0.3, 1.0) <= 1.0
    with pytest.raises(NotApplicable):
        resolvent_difference_check(model, operator, 0.3, 1.0, eta=0.1)


def test_lattice_sum():
    assert lattice_sum(0.0, 1.0, 1) == np.inf
    assert lattice_sum(-1.0, 1.0, 1) == pytest.approx(1.0 + 2.0 / (np.e - 1.0), rel=1e-12)
    assert lattice_sum(-1.0, 0.5, 2) > lattice_sum(-1.0, 1.0, 2)


def test_fermi_summability_is_below_its_bound():
    model = bundled_model('chain')
    operator = build_hamiltonian(model)
    value = fermi_summability(model, operator, 1.0, 0.1, 1.0)
    bound, mu, eps = fermi_summability_bound(model, operator, 1.0, 0.1)
    assert 0.0 < value <= bound
    assert mu is not None and eps is not None
    with pytest.raises(GridTooCoarse):
        fermi_summability(model, operator, 1.0, 0.1, 1.0, alpha_points=8)


def test_time_metric():
    assert alpha_metric(0.2, 0.5, 1.0) == pytest.approx(0.3)
    assert alpha_tilde(0.2, 0.5, 1.0) == pytest.approx(0.3)
    assert alpha_metric(0.9, 0.1, 1.0) == pytest.approx(0.8)
    assert alpha_tilde(0.9, 0.1, 1.0) == pytest.approx(0.2)
    assert alpha_metric(1.5, 1.8, 1.0) == 0.0
    grid = u1_grid(1.0, 16)
    assert len(grid) == 16 and grid[0] == 0.0 and grid[-1] < 2.0


def test_canonical_projection_constant_is_one():
    model = bundled_model('chain')
    assert projection_constant(model, canonical_projection(model), 0.1, 1.0) == pytest.approx(1.0)


def scalar_omega(beta, u1):
    """Largest diagonal time integral of the single-mode covariance kernel, by adaptive quadrature."""
    best = 0.0
    for lam in (1.0, -1.0):
        def integrand(v):
            a = alpha_metric(u1, v, beta)
            if v > u1:
                return np.exp(-a * lam) / (1.0 + np.exp(-beta * lam))
            return np.exp(a * lam) / (1.0 + np.exp(beta * lam))
        points = [p for p in (u1, beta) if 0.0 < p < beta + 1.0]
        value, _ = scipy.integrate.quad(integrand, 0.0, beta + 1.0, points=points or None, limit=200)
        best = max(best, value)
    return best


def test_decay_value_matches_quadrature_on_a_single_mode():
    beta = 1.0
    model = bundled_model('single_mode')
    operator = build_hamiltonian(model)
    value = decay_value(model, operator, canonical_projection(model), beta, 0.1, 1.0, u2_panels=256)
    expected = max(scalar_omega(beta, u1) for u1 in u1_grid(beta, 16))
    assert value == pytest.approx(expected, rel=1e-3)
    with pytest.raises(GridTooCoarse):
        decay_value(model, operator, canonical_projection(model), beta, 0.1, 1.0, u2_panels=32)


def test_general_decay_estimate_holds_on_the_chain():
    model = bundled_model('chain')
    operator = build_hamiltonian(model)
    estimate = decay_parameter(model, operator, canonical_projection(model), 1.0, 0.1, 1.0)
    assert estimate.satisfied
    assert estimate.parameters['theorem'] == 'general'
    assert estimate.parameters['D_P'] == pytest.approx(1.0)
    assert estimate.to_record()['omega'] == estimate.value


def test_gapped_bound_needs_a_gap():
    model = bundled_model('chain')
    with pytest.raises(GapTooSmall):
        gapped_bound(model, build_hamiltonian(model), 1.0, 0.1, 0.1)


def test_gapped_check_on_the_pairing_chain():
    model = bundled_model('pairing_chain')
    estimates = gapped_summability_check(model, [1.0, 2.0], 0.1, 1.0, 0.1)
    assert len(estimates) == 2
    assert all(e.satisfied for e in estimates)
    assert all(e.parameters['theorem'] == 'gapped' for e in estimates)
    assert estimates[0].parameters['uniformity_ratio'] == uniformity_ratio(estimates)


def test_decay_estimate_rejects_negative_values():
    with pytest.raises(ValueError):
        DecayEstimate(-1.0, 1.0, {})
    assert not DecayEstimate(2.0, 1.0, {}).satisfied


def test_projection_drift():
    assert projection_drift(bundled_model('chain')) == 0.0
    assert 0.0 <= projection_drift(bundled_model('pairing_chain')) <= 2.0


def test_fit_beta_exponent():
    betas = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit_beta_exponent(betas, 3.0 * (betas + 1.0) ** 2) == pytest.approx(2.0)
