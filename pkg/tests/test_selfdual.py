import numpy as np
import pytest

from berezin_lab.algebra.selfdual import (BasisProjection, SelfDualOperator, SelfDualSpace, bogoliubov_transform,
                                          diagonalizing_projection, extended_projection, kmap, lift_one_particle,
                                          orientation_sign, random_bogoliubov, random_hamiltonian, swap_bogoliubov)
from berezin_lab.errors import NotBasisProjection, NotHermitian, NotSelfDual, ShapeMismatch


def test_canonical_space_involution():
    space = SelfDualSpace.canonical(2)
    v = np.array([1.0, 2j, 3.0, 4.0])
    np.testing.assert_allclose(space.conjugate(v), [3.0, 4.0, 1.0, -2j])
    np.testing.assert_allclose(space.conjugate(space.conjugate(v)), v)


def test_odd_dimension_is_rejected():
    with pytest.raises(ShapeMismatch):
        SelfDualSpace(np.eye(3))


def test_kmap_examples(rng):
    space = SelfDualSpace.canonical(2)
    np.testing.assert_allclose(kmap(space, np.eye(4)).H, 0.0, atol=1e-14)
    h = random_hamiltonian(space, rng).H
    np.testing.assert_allclose(kmap(space, h).H, h, atol=1e-12)
    assert space.is_self_dual(h)
    assert not space.is_self_dual(np.eye(4))


def test_self_dual_operator_rejects_identity():
    with pytest.raises(NotSelfDual):
        SelfDualOperator(SelfDualSpace.canonical(1), np.eye(2))


def test_projection_must_satisfy_involution_relation():
    space = SelfDualSpace.canonical(1)
    with pytest.raises(NotBasisProjection):
        BasisProjection(space, np.array([[1.0], [1.0]]) / np.sqrt(2.0))


def test_diagonalizing_projection_of_a_single_mode():
    space = SelfDualSpace.canonical(1)
    projection = diagonalizing_projection(SelfDualOperator(space, np.diag([1.0, -1.0])))
    np.testing.assert_allclose(projection.P, np.diag([1.0, 0.0]), atol=1e-12)


def test_diagonalizing_projection_invariants(make_hamiltonian):
    operator = make_hamiltonian(3)
    projection = diagonalizing_projection(operator)
    p, h = projection.P, operator.H
    np.testing.assert_allclose(p @ h, h @ p, atol=1e-10)
    np.testing.assert_allclose(operator.space.conjugate_operator(p), np.eye(6) - p, atol=1e-10)
    assert np.linalg.eigvalsh(p @ h @ p).min() >= -1e-10


def test_diagonalizing_projection_pairs_a_kernel():
    space = SelfDualSpace.canonical(2)
    operator = SelfDualOperator(space, np.diag([0.7, 0.0, -0.7, 0.0]))
    projection = diagonalizing_projection(operator)
    kernel = np.diag([0.0, 1.0, 0.0, 1.0])
    p0 = kernel @ projection.P @ kernel
    assert np.trace(p0).real == pytest.approx(1.0)
    np.testing.assert_allclose(space.conjugate_operator(p0), kernel - p0, atol=1e-10)


def test_orientation_signs(rng):
    space = SelfDualSpace.canonical(2)
    projection = BasisProjection.canonical(space)
    assert orientation_sign(projection, projection) == 1
    swapped = bogoliubov_transform(projection, swap_bogoliubov(projection, 0))
    assert orientation_sign(projection, swapped) == -1
    rotated = bogoliubov_transform(projection, random_bogoliubov(space, rng))
    assert orientation_sign(projection, rotated) == 1


def test_extended_projection_is_copy_wise():
    projection = BasisProjection.canonical(SelfDualSpace.canonical(1))
    ext = extended_projection(projection, 3)
    np.testing.assert_allclose(ext.P, np.kron(np.eye(3), projection.P))


def test_lift_one_particle_blocks():
    h = np.array([[1.0, 0.5j], [-0.5j, -2.0]])
    g = np.array([[0.0, 0.3], [-0.3, 0.0]])
    operator = lift_one_particle(h, g)
    np.testing.assert_allclose(operator.H[:2, :2], -0.5 * h)
    np.testing.assert_allclose(operator.H[:2, 2:], -0.5 * g)
    with pytest.raises(NotHermitian):
        lift_one_particle(np.array([[0.0, 1.0], [0.0, 0.0]]))


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_kmap_is_an_idempotent_self_dual_projection(seed):
    rng = np.random.default_rng(seed)
    space = SelfDualSpace.canonical(2)
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    k = kmap(space, x).H
    np.testing.assert_allclose(kmap(space, k).H, k, atol=1e-12)
    np.testing.assert_allclose(k.conj().T, kmap(space, x.conj().T).H, atol=1e-12)
    np.testing.assert_allclose(k.conj().T, -space.conjugate_operator(k), atol=1e-12)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_orientation_signs_compose(seed):
    rng = np.random.default_rng(seed)
    space = SelfDualSpace.canonical(3)
    p1 = BasisProjection.canonical(space)
    p2 = bogoliubov_transform(p1, random_bogoliubov(space, rng))
    p2 = bogoliubov_transform(p2, swap_bogoliubov(p2, 1))
    p3 = bogoliubov_transform(p2, random_bogoliubov(space, rng))
    assert orientation_sign(p1, p2) == -1
    assert orientation_sign(p2, p1) == orientation_sign(p1, p2)
    assert orientation_sign(p1, p3) == orientation_sign(p1, p2) * orientation_sign(p2, p3)


@pytest.mark.parametrize('delta', [0.4, 1.0, 2.5])
def test_lift_of_a_pairing_term(delta):
    g = np.array([[0.0, delta], [-delta, 0.0]])
    operator = lift_one_particle(np.zeros((2, 2)), g)
    assert np.trace(operator.H) == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(operator.H), 0.5 * delta * np.array([-1, -1, 1, 1]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(-2.0 * operator.H), delta * np.array([-1, -1, 1, 1]), atol=1e-12)
