from itertools import permutations
from math import factorial

import numpy as np
import pytest

from berezin_lab.errors import NotHermitian, NotSkewSymmetric, OddOrder, ShapeMismatch, Singular
from berezin_lab.linalg.numkernel import (as_matrix, hermitian_eig, hermitian_function, matrix_exp, matrix_inverse,
                                          pfaffian)


def test_pfaffian_small_cases():
    assert pfaffian([[0, 5], [-5, 0]]) == pytest.approx(5.0)
    assert pfaffian(np.zeros((4, 4))) == 0.0
    a, b, c, d, e, f = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    m = np.array([[0, a, b, c],
                  [-a, 0, d, e],
                  [-b, -d, 0, f],
                  [-c, -e, -f, 0]])
    assert pfaffian(m) == pytest.approx(a * f - b * e + c * d)


def test_pfaffian_squares_to_determinant(rng):
    for n in (2, 4, 6, 8):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = x - x.T
        det = np.linalg.det(m)
        assert abs(pfaffian(m) ** 2 - det) <= 1e-9 * (1 + abs(det))


def permutation_sign(perm):
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def pfaffian_by_permutations(m):
    """(2^k k!)^{-1} sum over all permutations of sgn(s) prod_i m[s(2i), s(2i+1)]."""
    n = m.shape[0]
    total = 0.0
    for perm in permutations(range(n)):
        term = permutation_sign(perm)
        for i in range(0, n, 2):
            term = term * m[perm[i], perm[i + 1]]
        total += term
    return total / (2 ** (n // 2) * factorial(n // 2))


@pytest.mark.parametrize('n', [2, 4, 6, 8])
def test_pfaffian_matches_permutation_sum(rng, n):
    for _ in range(3 if n < 8 else 1):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = x - x.T
        expected = pfaffian_by_permutations(m)
        assert abs(pfaffian(m) - expected) <= 1e-10 * (1 + abs(expected))


def test_pfaffian_flips_sign_under_a_row_and_column_swap(rng):
    x = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    m = x - x.T
    order = [0, 4, 2, 3, 1, 5]
    swapped = m[np.ix_(order, order)]
    assert pfaffian(swapped) == pytest.approx(-pfaffian(m), rel=1e-10)


def test_pfaffian_leaves_input_untouched(rng):
    x = rng.normal(size=(4, 4))
    m = x - x.T
    before = m.copy()
    pfaffian(m)
    np.testing.assert_array_equal(m, before)


def test_pfaffian_rejects_bad_input():
    with pytest.raises(NotSkewSymmetric):
        pfaffian([[0, 1], [1, 0]])
    with pytest.raises(OddOrder):
        pfaffian(np.zeros((3, 3)))
    with pytest.raises(ShapeMismatch):
        pfaffian(np.zeros((2, 3)))


def test_hermitian_eig_examples():
    w, _ = hermitian_eig(np.diag([3.0, -1.0]))
    np.testing.assert_allclose(w, [-1.0, 3.0])
    w, u = hermitian_eig([[0, 1], [1, 0]])
    np.testing.assert_allclose(w, [-1.0, 1.0])
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    with pytest.raises(NotHermitian):
        hermitian_eig([[0, 1], [0, 0]])


def test_matrix_exp_matches_spectral_exponential(rng):
    np.testing.assert_allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(matrix_exp(np.diag([1.0, -2.0])), np.diag(np.exp([1.0, -2.0])))
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = 0.5 * (x + x.conj().T)
    expected = hermitian_function(a, np.exp)
    assert np.max(np.abs(matrix_exp(a) - expected)) <= 1e-10 * np.max(np.abs(expected))


def test_matrix_exp_of_negated_argument_is_the_inverse(rng):
    for _ in range(5):
        a = 0.5 * (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
        np.testing.assert_allclose(matrix_exp(a) @ matrix_exp(-a), np.eye(5), atol=1e-9)


def test_matrix_inverse():
    np.testing.assert_allclose(matrix_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    np.testing.assert_allclose(matrix_inverse(np.eye(3)), np.eye(3))
    with pytest.raises(Singular):
        matrix_inverse([[1.0, 1.0], [1.0, 1.0]])


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ShapeMismatch):
        as_matrix([[np.nan, 0.0], [0.0, 1.0]])
