import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blochfactor.errors import InfeasibleError, InvalidInputError
from blochfactor.numkit import haar_unitary, least_norm_solve, lp_feasible, opnorm


def test_opnorm_jordan_block():
    # singular values of [[1,1],[0,1]] are the roots of s^4 - 3 s^2 + 1
    expected = np.sqrt((3 + np.sqrt(5)) / 2)
    assert opnorm([[1, 1], [0, 1]]) == pytest.approx(expected, rel=1e-12)


def test_opnorm_zero_and_vector():
    assert opnorm(np.zeros((3, 2))) == 0.0
    assert opnorm([3, 4j]) == pytest.approx(5.0)


def test_opnorm_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        opnorm([[np.nan]])
    with pytest.raises(InvalidInputError):
        opnorm(np.ones((129, 2)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_opnorm_matches_svd(m, n, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((m, n)) + 1j * r.standard_normal((m, n))
    assert opnorm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-9)


def test_least_norm_matches_projection(rng):
    a = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
    b = rng.standard_normal(3) + 0j
    x, res = least_norm_solve(a, b)
    assert res <= 1e-10
    np.testing.assert_allclose(x, np.linalg.pinv(a) @ b, atol=1e-9)


def test_least_norm_inconsistent():
    with pytest.raises(InfeasibleError) as info:
        least_norm_solve([[1, 0], [1, 0]], [1, 2])
    assert info.value.residual > 0.1


def test_least_norm_empty_rows():
    x, res = least_norm_solve(np.zeros((0, 4)), [])
    assert x.shape == (4,) and res == 0.0


def test_lp_feasible_agrees_with_grid_search():
    # two weights, so the simplex is a segment; search it on a 1/64 lattice
    r = np.random.default_rng(7)
    for _ in range(30):
        a = r.standard_normal((4, 2))
        b = r.standard_normal(4) - 0.5
        lattice = [np.array([t, 1 - t]) for t in np.linspace(0, 1, 65)]
        grid_ok = any(np.all(a @ w - b >= 1e-6) for w in lattice)
        w = lp_feasible(a, b)
        if grid_ok:
            assert w is not None
        if w is not None:
            assert w.sum() == pytest.approx(1.0) and np.all(w >= 0)
            assert np.min(a @ w - b) >= -1e-8


def test_lp_infeasible_returns_none():
    assert lp_feasible([[1.0, 1.0]], [2.0]) is None


def test_lp_limits():
    with pytest.raises(InvalidInputError):
        lp_feasible(np.ones((501, 2)), np.zeros(501))


def test_haar_unitary_is_unitary_and_seeded():
    u = haar_unitary(8, seed=3)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    np.testing.assert_array_equal(u, haar_unitary(8, seed=3))


def test_haar_moments():
    # E|U_11|^2 = 1/n and E|U_11|^4 = 2/(n(n+1)) under Haar measure
    r = np.random.default_rng(0)
    n = 4
    vals = np.array([abs(haar_unitary(n, r)[0, 0]) ** 2 for _ in range(4000)])
    assert vals.mean() == pytest.approx(1 / n, abs=0.01)
    assert (vals ** 2).mean() == pytest.approx(2 / (n * (n + 1)), abs=0.01)


def test_haar_bounds():
    with pytest.raises(InvalidInputError):
        haar_unitary(65)
