import itertools

import numpy as np
import pytest

from sparsco.objectives import (CsProblem, QcsProblem, compute_lambda_s, cs_gradient,
                                cs_newton_rhs, cs_restricted_hessian, cs_value,
                                qcs_gradient, qcs_restricted_hessian, qcs_value,
                                restricted_least_squares)


def central_diff_grad(f, x, idx, h=1e-6):
    out = []
    for i in idx:
        e = np.zeros_like(x)
        e[i] = h
        out.append((f(x + e) - f(x - e)) / (2 * h))
    return np.array(out)


def central_diff_jac(grad, x, gamma, h=1e-6):
    # d grad_gamma / d x_gamma, column j from perturbing x_j
    cols = []
    for j in gamma:
        e = np.zeros_like(x)
        e[j] = h
        cols.append((grad(x + e)[gamma] - grad(x - e)[gamma]) / (2 * h))
    return np.array(cols).T


A2 = np.array([[1.0, 2.0], [0.0, 1.0]])


def test_cs_value_examples():
    p = CsProblem(np.eye(2), [1, 2])
    assert cs_value(p, [0, 0]) == 2.5
    assert cs_value(p, [1, 2]) == 0.0
    assert cs_value(CsProblem(A2, [0, 0]), [1, 1]) == 5.0


def test_cs_gradient_examples():
    p = CsProblem(np.eye(2), [1, 2])
    np.testing.assert_array_equal(cs_gradient(p, [0, 0]), [-1, -2])
    np.testing.assert_array_equal(cs_gradient(p, [1, 2]), [0, 0])
    np.testing.assert_array_equal(cs_gradient(CsProblem(A2, [0, 0]), [1, 1]), [3, 7])


def test_cs_hessian_examples():
    np.testing.assert_array_equal(cs_restricted_hessian(CsProblem(A2, [0, 0]), [0, 1]),
                                  [[1, 2], [2, 5]])
    np.testing.assert_array_equal(cs_restricted_hessian(CsProblem(np.eye(4), np.ones(4)), [1, 3]),
                                  np.eye(2))
    A = np.random.default_rng(0).standard_normal((5, 4))
    H = cs_restricted_hessian(CsProblem(A, np.zeros(5)), [2])
    np.testing.assert_allclose(H, [[A[:, 2] @ A[:, 2]]])


def test_cs_newton_rhs_examples():
    np.testing.assert_array_equal(cs_newton_rhs(CsProblem(np.eye(2), [1, 2]), [1]), [2])
    A = np.random.default_rng(1).standard_normal((6, 9))
    p = CsProblem(A, np.zeros(6))
    np.testing.assert_array_equal(cs_newton_rhs(p, [0, 4]), [0, 0])


def test_cs_newton_matches_restricted_least_squares():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((12, 20))
    p = CsProblem(A, rng.standard_normal(12))
    T = [1, 5, 7, 11]
    v = np.linalg.solve(cs_restricted_hessian(p, T), cs_newton_rhs(p, T))
    np.testing.assert_allclose(v, restricted_least_squares(p, T)[T], rtol=1e-10)


def test_cs_gradient_differences_are_exact():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((15, 25))
    p = CsProblem(A, rng.standard_normal(15))
    for _ in range(10):
        x, y = rng.uniform(-1, 1, 25), rng.uniform(-1, 1, 25)
        lhs = p.gradient(x) - p.gradient(y)
        np.testing.assert_allclose(lhs, A.T @ A @ (x - y), atol=1e-12)


def test_cs_gradient_finite_differences():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((10, 18))
    p = CsProblem(A, rng.standard_normal(10))
    x = rng.uniform(-1, 1, 18)
    idx = rng.choice(18, 10, replace=False)
    g = p.gradient(x)[idx]
    fd = central_diff_grad(p.value, x, idx)
    assert np.all(np.abs(fd - g) <= 1e-5 * (1 + np.abs(g)))


def test_qcs_value_examples():
    p = QcsProblem([[1.0]], [1.0])
    assert qcs_value(p, [2.0]) == 2.25
    rng = np.random.default_rng(5)
    rows = rng.standard_normal((7, 4))
    x_star = np.array([0.0, 1.5, 0.0, -0.5])
    p = QcsProblem(rows, (rows @ x_star) ** 2)
    assert qcs_value(p, x_star) == 0.0
    assert qcs_value(p, np.zeros(4)) == pytest.approx(np.sum(p.b ** 2) / (4 * 7))


def test_qcs_gradient_examples():
    p = QcsProblem([[1.0]], [1.0])
    np.testing.assert_allclose(qcs_gradient(p, [2.0]), [6.0])
    fd = central_diff_grad(p.value, np.array([2.0]), [0])
    np.testing.assert_allclose(fd, [6.0], rtol=1e-8)
    rng = np.random.default_rng(6)
    rows = rng.standard_normal((7, 4))
    x_star = np.array([0.0, 1.5, 0.0, -0.5])
    p = QcsProblem(rows, (rows @ x_star) ** 2)
    np.testing.assert_allclose(qcs_gradient(p, x_star), 0.0, atol=1e-14)
    np.testing.assert_array_equal(qcs_gradient(p, np.zeros(4)), 0.0)


def test_qcs_hessian_examples():
    p = QcsProblem([[1.0]], [1.0])
    np.testing.assert_allclose(qcs_restricted_hessian(p, [2.0], [0]), [[11.0]])
    fd = central_diff_jac(p.gradient, np.array([2.0]), [0])
    np.testing.assert_allclose(fd, [[11.0]], rtol=1e-7)

    rng = np.random.default_rng(7)
    rows = rng.standard_normal((9, 5))
    x_star = np.array([0.3, 0.0, -1.2, 0.0, 0.8])
    p = QcsProblem(rows, (rows @ x_star) ** 2)
    H0 = qcs_restricted_hessian(p, np.zeros(5), [0, 2, 4])
    assert np.all(np.linalg.eigvalsh(H0) < 0)
    Hs = qcs_restricted_hessian(p, x_star, [0, 2, 4])
    assert np.all(np.linalg.eigvalsh(Hs) >= -1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_qcs_derivatives_match_finite_differences(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(3, 21))
    m = int(rng.integers(3, 30))
    rows = rng.standard_normal((m, n))
    p = QcsProblem(rows, rng.uniform(0, 3, m))
    x = rng.uniform(-1, 1, n)
    idx = rng.choice(n, min(10, n), replace=False)
    g = p.gradient(x)[idx]
    fd = central_diff_grad(p.value, x, idx)
    assert np.all(np.abs(fd - g) <= 1e-5 * (1 + np.abs(g)))

    gamma = np.sort(rng.choice(n, min(4, n), replace=False))
    H = p.restricted_hessian(x, gamma)
    fdH = central_diff_jac(p.gradient, x, gamma)
    assert np.all(np.abs(fdH - H) <= 1e-4 * (1 + np.abs(H)))
    np.testing.assert_array_equal(H, H.T)


def test_restricted_least_squares_examples():
    p = CsProblem(np.eye(2), [1, 2])
    np.testing.assert_array_equal(restricted_least_squares(p, [1]), [0, 2])

    rng = np.random.default_rng(8)
    A = rng.standard_normal((20, 40))
    x_star = np.zeros(40)
    x_star[[3, 17, 30]] = [1.0, -2.0, 0.5]
    p = CsProblem(A, A @ x_star)
    np.testing.assert_allclose(restricted_least_squares(p, [3, 17, 30]), x_star, atol=1e-12)

    # b orthogonal to the columns in T
    A = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    p = CsProblem(A, [0.0, 0.0, 3.0])
    np.testing.assert_array_equal(restricted_least_squares(p, [0, 1]), [0, 0])


def test_restricted_least_squares_normal_equations():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((15, 30))
    p = CsProblem(A, rng.standard_normal(15))
    for _ in range(10):
        T = np.sort(rng.choice(30, 6, replace=False))
        z = restricted_least_squares(p, T)
        assert np.max(np.abs(p.gradient(z)[T])) < 1e-10
        assert np.count_nonzero(z[np.setdiff1d(np.arange(30), T)]) == 0


def test_restricted_least_squares_rank_deficient_flagged():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 1.0]])
    p = CsProblem(A, [1.0, 2.0])
    fit = restricted_least_squares(p, [0, 1], return_status=True)
    assert not fit.full_rank and fit.rank == 1
    # minimum-norm split across the duplicated columns
    np.testing.assert_allclose(fit.x[:2], [0.5, 0.5])


def brute_lambda_s(A, s):
    return min(np.linalg.eigvalsh(A[:, T].T @ A[:, T])[0]
               for T in itertools.combinations(range(A.shape[1]), s))


def brute_delta_s(A, s):
    # restricted isometry constant by enumerating supports
    d = 0.0
    for T in itertools.combinations(range(A.shape[1]), s):
        ev = np.linalg.eigvalsh(A[:, T].T @ A[:, T])
        d = max(d, 1 - ev[0], ev[-1] - 1)
    return d


def test_lambda_s_examples():
    assert compute_lambda_s(CsProblem(np.eye(5), np.ones(5)), 3) == pytest.approx(1.0)
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert compute_lambda_s(CsProblem(A, [0, 0]), 2) == pytest.approx(0.0, abs=1e-12)
    A = np.random.default_rng(10).standard_normal((6, 8))
    lam = compute_lambda_s(CsProblem(A, np.zeros(6)), 2)
    assert lam > 0
    assert lam == pytest.approx(brute_lambda_s(A, 2), rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_lambda_s_bounded_below_by_rip(seed):
    rng = np.random.default_rng(200 + seed)
    A = rng.standard_normal((6, 8))
    A /= np.linalg.norm(A, axis=0)
    s = int(rng.integers(1, 4))
    assert compute_lambda_s(CsProblem(A, np.zeros(6)), s) >= 1 - brute_delta_s(A, s) - 1e-12


def test_lambda_s_guard():
    with pytest.raises(ValueError, match="sample"):
        compute_lambda_s(CsProblem(np.ones((2, 60)), np.ones(2)), 30)


def test_problem_validation():
    with pytest.raises(ValueError):
        CsProblem([[np.nan]], [0.0])
    with pytest.raises(ValueError):
        CsProblem(np.eye(2), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        QcsProblem(np.ones((0, 3)), [])
