import numpy as np
import pytest

from berezin_lab.algebra.fock import FockRep, bilinear_element
from berezin_lab.algebra.selfdual import BasisProjection, SelfDualOperator, SelfDualSpace, diagonalizing_projection
from berezin_lab.errors import CapacityExceeded, SpaceMismatch
from berezin_lab.grassmann.algebra import (TOP_MONOMIAL_SIGN, GrassmannElement, GrassmannSpace, berezin_derivative,
                                           grassmann_exp, pairing_element)
from berezin_lab.grassmann.circle import (antisymmetrized_circle, chernoff_approx, circle_product, kappa_inv,
                                          kappa_iso, star_involution, wedge_expansion)
from berezin_lab.grassmann.gaussian import (gaussian_integral, gaussian_moment_pfaffian, moment_matrix,
                                            wick_integral)


def canonical_projection(m):
    return BasisProjection.canonical(SelfDualSpace.canonical(m))


def random_element(space, rng, even=False):
    masks = np.arange(1 << space.n_slots)
    if even:
        masks = masks[[bin(int(x)).count('1') % 2 == 0 for x in masks]]
    coeffs = rng.normal(size=masks.size) + 1j * rng.normal(size=masks.size)
    return GrassmannElement(space, masks, coeffs)


def test_wedge_anticommutes():
    space = GrassmannSpace(canonical_projection(2))
    e0 = GrassmannElement.generator(space, 0)
    e1 = GrassmannElement.generator(space, 1)
    assert e0.wedge(e1).max_abs_difference(-e1.wedge(e0)) == 0.0
    assert len(e0.wedge(e0)) == 0


def test_derivatives():
    space = GrassmannSpace(canonical_projection(2))
    e1 = GrassmannElement.generator(space, 1)
    assert e1.derivative_slot(1).scalar_part() == 1.0
    assert len(e1.derivative_slot(2)) == 0
    assert len(GrassmannElement.scalar(space, 3.0).derivative_slot(0)) == 0
    phi = np.array([0.0, 2.0j, 0.0, 0.0])
    # antilinear in the direction
    assert berezin_derivative(phi, 0, e1).scalar_part() == pytest.approx(-2.0j)


@pytest.mark.parametrize('m', [1, 2, 3])
def test_berezin_integral_of_top_monomial(m):
    space = GrassmannSpace(canonical_projection(m))
    top = GrassmannElement(space, [(1 << space.n_slots) - 1], [1.0])
    assert top.integrate_all() == TOP_MONOMIAL_SIGN(m)
    assert GrassmannElement.scalar(space, 1.0).integrate_all() == 0.0


def test_grassmann_exp():
    space = GrassmannSpace(canonical_projection(1))
    assert grassmann_exp(GrassmannElement.scalar(space, 0.5)).scalar_part() == pytest.approx(np.exp(0.5))
    pair = pairing_element(space, 0, 0)
    expected = 1.0 + pair
    assert grassmann_exp(pair).max_abs_difference(expected) == pytest.approx(0.0)


def test_generator_cap():
    with pytest.raises(CapacityExceeded):
        GrassmannSpace(canonical_projection(2), range(7))


def test_relabel_round_trip(rng):
    projection = canonical_projection(1)
    single = GrassmannSpace(projection)
    pair = GrassmannSpace(projection, (0, 1))
    xi = random_element(single, rng)
    moved = xi.at_copy(1, pair)
    assert moved.support_labels() == (1,)
    with pytest.raises(SpaceMismatch):
        moved.wedge(xi)


def test_canonical_isomorphism_round_trip(rng):
    projection = canonical_projection(2)
    rep = FockRep(projection)
    a = rep.operator(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    assert kappa_inv(projection, kappa_iso(projection, a)).distance(a) < 1e-10


def test_circle_product_routes_agree(rng):
    projection = canonical_projection(1)
    space = GrassmannSpace(projection)
    xi, zeta = random_element(space, rng), random_element(space, rng)
    fock = circle_product(projection, xi, zeta, method='fock')
    berezin = circle_product(projection, xi, zeta, method='berezin')
    assert fock.max_abs_difference(berezin) < 1e-10


def test_circle_product_is_associative(rng):
    projection = canonical_projection(1)
    space = GrassmannSpace(projection)
    a, b, c = (random_element(space, rng) for _ in range(3))
    left = circle_product(projection, circle_product(projection, a, b), c)
    right = circle_product(projection, a, circle_product(projection, b, c))
    assert left.max_abs_difference(right) < 1e-10


@pytest.mark.parametrize('count', [2, 3])
def test_wedge_expansion_matches_antisymmetrized_circle(rng, count):
    projection = canonical_projection(2)
    vectors = [rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(count)]
    direct = antisymmetrized_circle(projection, vectors)
    assert direct.max_abs_difference(wedge_expansion(projection, vectors)) < 1e-10


def test_star_involution_is_an_involution(rng):
    space = GrassmannSpace(canonical_projection(2))
    xi = random_element(space, rng)
    assert star_involution(star_involution(xi)).max_abs_difference(xi) < 1e-12


def test_chernoff_product_converges_to_exponential(rng):
    operator = SelfDualOperator(SelfDualSpace.canonical(1), np.diag([0.6, -0.6]))
    projection = diagonalizing_projection(operator)
    rep = FockRep(projection)
    a = 0.5 * bilinear_element(rep, operator.H) + 0.3 * rep.number(0)
    exact = np.linalg.eigh(a.M)
    target = (exact[1] * np.exp(exact[0])) @ exact[1].conj().T
    assert chernoff_approx(projection, 0 * rep.identity(), 5).distance(rep.identity()) < 1e-12
    errors = [np.max(np.abs(chernoff_approx(projection, a, n).M - target)) for n in (4, 16, 64)]
    assert errors[0] > errors[1] > errors[2]


def hamiltonian_covariance(m, rng):
    space = SelfDualSpace.canonical(m)
    x = rng.normal(size=(2 * m, 2 * m)) + 1j * rng.normal(size=(2 * m, 2 * m))
    h = 0.5 * (x + x.conj().T)
    h = 0.5 * (h - space.conjugate_operator(h.conj().T))
    w, u = np.linalg.eigh(h)
    # push the spectrum away from zero
    w = np.sign(w) * (np.abs(w) + 0.5)
    return SelfDualOperator(space, (u * w) @ u.conj().T)


def test_gaussian_integral_of_one_and_odd_elements(rng):
    cov = hamiltonian_covariance(2, rng)
    space = GrassmannSpace(canonical_projection(2))
    assert gaussian_integral(cov, GrassmannElement.scalar(space, 1.0)) == pytest.approx(1.0)
    assert gaussian_integral(cov, GrassmannElement.generator(space, 1)) == pytest.approx(0.0, abs=1e-12)
    assert gaussian_moment_pfaffian(cov, [np.ones(4)]) == 0.0


def test_gaussian_pair_moment(rng):
    cov = hamiltonian_covariance(2, rng)
    space = GrassmannSpace(canonical_projection(2))
    phi = [rng.normal(size=4) + 1j * rng.normal(size=4) for _ in range(2)]
    xi = GrassmannElement.vector(space, phi[0]).wedge(GrassmannElement.vector(space, phi[1]))
    expected = moment_matrix(cov, phi)[0, 1]
    assert gaussian_integral(cov, xi) == pytest.approx(expected, abs=1e-10)
    assert gaussian_moment_pfaffian(cov, phi) == pytest.approx(expected, abs=1e-12)


def test_literal_and_wick_integrals_agree(rng):
    cov = hamiltonian_covariance(2, rng)
    space = GrassmannSpace(canonical_projection(2))
    xi = random_element(space, rng, even=True)
    assert gaussian_integral(cov, xi) == pytest.approx(wick_integral(cov, xi), abs=1e-9)

