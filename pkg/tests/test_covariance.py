import numpy as np
import pytest

from berezin_lab.algebra.selfdual import SelfDualOperator, SelfDualSpace, diagonalizing_projection
from berezin_lab.covariance.bounds import bound_statistics, det_bound_ratio, psd_factor
from berezin_lab.covariance.covariance import (TimeGrid, approximant_errors, closed_form_covariance,
                                               compare_constructions, covariance_closed_form, covariance_direct,
                                               derivative_matrix, h_n_approximant, strict_floor)
from berezin_lab.errors import GridTooCoarse, NotApplicable, NotPSD


def test_strict_floor_and_grid():
    assert strict_floor(2.0) == 1
    assert strict_floor(2.5) == 2
    assert strict_floor(0.5) == 0
    assert TimeGrid(4, 1.0).n_beta == 7
    assert TimeGrid(8, 2.0).n_beta == 11
    assert TimeGrid(8, 2.0).step == pytest.approx(0.25)
    with pytest.raises(ValueError):
        TimeGrid(0, 1.0)


def test_derivative_matrix():
    np.testing.assert_array_equal(derivative_matrix(2), [[1.0, -1.0], [1.0, 1.0]])
    d = derivative_matrix(4)
    assert d[3, 0] == 1.0
    assert d[1, 2] == -1.0
    assert np.trace(d) == 4.0


def test_h_n_approximant_scalar_value():
    operator = SelfDualOperator(SelfDualSpace.canonical(1), np.diag([0.5, -0.5]))
    approx = h_n_approximant(operator, 1.0, 10)
    assert approx.H[0, 0].real == pytest.approx(5.0 * np.log(1.05 / 0.95), rel=1e-12)
    assert approx.H[0, 0].real == pytest.approx(0.500417293, abs=1e-9)


def test_approximant_accepts_n_just_above_beta_norm():
    operator = SelfDualOperator(SelfDualSpace.canonical(1), np.diag([1.0, -1.0]))
    approx = h_n_approximant(operator, 3.98, 4)
    assert approx.H[0, 0].real == pytest.approx(np.arctanh(0.995) / 0.995, rel=1e-12)
    with pytest.raises(GridTooCoarse):
        h_n_approximant(operator, 4.0, 4)


def test_approximant_errors_decrease(make_hamiltonian):
    table = approximant_errors(make_hamiltonian(2), 1.0, [4, 8, 16])
    assert list(table['n']) == [4, 8, 16]
    assert table['error'].is_monotonic_decreasing


def test_coarse_grid_is_rejected():
    operator = SelfDualOperator(SelfDualSpace.canonical(1), np.diag([1.0, -1.0]))
    projection = diagonalizing_projection(operator)
    with pytest.raises(GridTooCoarse):
        covariance_direct(operator, projection, TimeGrid(1, 1.0))


def test_non_diagonalizing_projection_is_rejected(make_hamiltonian):
    operator = make_hamiltonian(2)
    other = diagonalizing_projection(make_hamiltonian(2))
    with pytest.raises(NotApplicable):
        covariance_direct(operator, other, TimeGrid(8, 1.0))


@pytest.mark.parametrize('m', [1, 2])
@pytest.mark.parametrize('beta', [0.5, 1.0, 2.0])
@pytest.mark.parametrize('n', [8, 16])
def test_closed_form_agrees_with_direct_inverse(make_hamiltonian, m, beta, n):
    operator = make_hamiltonian(m)
    projection = diagonalizing_projection(operator)
    record = compare_constructions(operator, projection, TimeGrid(n, beta))
    assert record['max_deviation'] <= 1e-9
    assert record['closed_self_duality'] <= 1e-9
    assert record['closed_antisymmetry'] <= 1e-9
    assert record['direct_diagonal'] <= 1e-9


def test_single_block_of_the_closed_form(make_hamiltonian):
    operator = make_hamiltonian(1)
    projection = diagonalizing_projection(operator)
    grid = TimeGrid(6, 1.0)
    full = closed_form_covariance(operator, projection, grid)
    np.testing.assert_allclose(covariance_closed_form(operator, projection, grid, 2, 5), full.block(2, 5))


def test_zero_hamiltonian_diagonal_blocks():
    space = SelfDualSpace.canonical(1)
    operator = SelfDualOperator(space, np.zeros((2, 2)))
    projection = diagonalizing_projection(operator)
    cov = covariance_direct(operator, projection, TimeGrid(4, 1.0))
    for k in range(cov.grid.n_beta):
        np.testing.assert_allclose(cov.block(k, k), 0.5 * (projection.P - projection.complement), atol=1e-12)


def test_psd_factor():
    root, w = psd_factor([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(root.T @ root, w, atol=1e-12)
    with pytest.raises(NotPSD):
        psd_factor([[1.0, 0.0], [0.0, -1.0]])


def test_bound_statistics(make_hamiltonian):
    operator = make_hamiltonian(1)
    projection = diagonalizing_projection(operator)
    cov = covariance_direct(operator, projection, TimeGrid(4, 1.0))
    table = bound_statistics(cov, 100, 7, weight=np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert list(table['check']) == ['determinant', 'pfaffian', 'pfaffian-weighted', 'sharpness']
    assert table['passed'].all()
    assert det_bound_ratio(cov, 20, 3)['samples'] == 20
