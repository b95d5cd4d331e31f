"""Compressive-sensing least squares and the quartic QCS objective, plus the
restricted least-squares (debiasing) solve and the lambda_s diagnostic."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import Objective, as_index_set, as_vector

LAMBDA_S_MAX_SUPPORTS = 1_000_000


def _as_matrix(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


class CsProblem(Objective):
    """``f(x) = 0.5 * ||A x - b||^2``."""

    def __init__(self, A, b):
        self.A = _as_matrix(A, "A")
        self.m, self.n = self.A.shape
        self.b = as_vector(b, self.m, "b")
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b

    def value(self, x):
        r = self.residual(x)
        return 0.5 * float(r @ r)

    def gradient(self, x):
        return self.A.T @ self.residual(x)

    def _hessian_block(self, x, gamma):
        As = self.A[:, gamma]
        return As.T @ As

    def gram(self, gamma) -> np.ndarray:
        """``A_G^T A_G``; the Hessian does not depend on x."""
        return self.restricted_hessian(None, gamma)

    def newton_rhs(self, gamma) -> np.ndarray:
        gamma = as_index_set(gamma, self.n)
        return self.A[:, gamma].T @ self.b

    def newton_system(self, u, gamma, grad):
        # the Newton point on gamma is the exact least-squares fit there
        return self.gram(gamma), self.newton_rhs(gamma), np.zeros(len(gamma))


class QcsProblem(Objective):
    """``f(x) = (1/4m) * sum_i (<a_i, x>^2 - b_i)^2``.

    Row ``i`` of ``rows`` is ``a_i``. Derivatives, with ``t = rows @ x``::

        grad = (1/m) * rows^T [(t^2 - b) * t]
        hess = (1/m) * rows^T diag(3 t^2 - b) rows
    """

    def __init__(self, rows, b):
        self.rows = _as_matrix(rows, "rows")
        self.m, self.n = self.rows.shape
        self.b = as_vector(b, self.m, "b")
        self.rows.setflags(write=False)
        self.b.setflags(write=False)

    def value(self, x):
        t = self.rows @ x
        r = t * t - self.b
        return float(r @ r) / (4.0 * self.m)

    def gradient(self, x):
        t = self.rows @ x
        return self.rows.T @ ((t * t - self.b) * t) / self.m

    def _hessian_block(self, x, gamma):
        t = self.rows @ x
        Ag = self.rows[:, gamma]
        w = 3.0 * t * t - self.b
        return (Ag.T * w) @ Ag / self.m

    @property
    def A(self):
        return self.rows


def cs_value(p: CsProblem, x) -> float:
    return p.value(as_vector(x, p.n))


def cs_gradient(p: CsProblem, x) -> np.ndarray:
    return p.gradient(as_vector(x, p.n))


def cs_restricted_hessian(p: CsProblem, gamma) -> np.ndarray:
    return p.gram(gamma)


def cs_newton_rhs(p: CsProblem, gamma) -> np.ndarray:
    return p.newton_rhs(gamma)


def qcs_value(p: QcsProblem, x) -> float:
    return p.value(as_vector(x, p.n))


def qcs_gradient(p: QcsProblem, x) -> np.ndarray:
    return p.gradient(as_vector(x, p.n))


def qcs_restricted_hessian(p: QcsProblem, x, gamma) -> np.ndarray:
    return p.restricted_hessian(as_vector(x, p.n), gamma)


@dataclass(frozen=True)
class LeastSquaresFit:
    x: np.ndarray
    rank: int
    full_rank: bool


def restricted_least_squares(p: CsProblem, T, *, return_status: bool = False):
    """Minimize ``0.5 * ||A z - b||^2`` over vectors supported on ``T``.

    Solved with a QR-based least-squares routine on ``A[:, T]``. A
    rank-deficient block yields the minimum-norm solution; pass
    ``return_status=True`` to get a :class:`LeastSquaresFit` carrying the
    numerical rank.
    """
    T = as_index_set(T, p.n)
    z = np.zeros(p.n)
    rank = 0
    if T.size:
        AT = p.A[:, T]
        sol, _, rank, _ = scipy.linalg.lstsq(AT, p.b, lapack_driver="gelsy")
        z[T] = sol
    if return_status:
        return LeastSquaresFit(z, int(rank), int(rank) == T.size)
    return z


def compute_lambda_s(p: CsProblem, s: int) -> float:
    """Smallest eigenvalue of ``A_T^T A_T`` over every support of size ``s``.

    Positive exactly when every ``s`` columns of ``A`` are independent.
    Enumerates all supports, so it is meant for small instances only.
    """
    n = p.n
    if not 1 <= s <= n:
        raise ValueError(f"s={s} must satisfy 1 <= s <= n={n}")
    count = math.comb(n, s)
    if count > LAMBDA_S_MAX_SUPPORTS:
        raise ValueError(
            f"C({n},{s})={count} supports exceeds the enumeration limit "
            f"{LAMBDA_S_MAX_SUPPORTS}; sample supports instead")
    G = p.A.T @ p.A
    best = np.inf
    for T in itertools.combinations(range(n), s):
        sub = G[np.ix_(T, T)]
        lam = scipy.linalg.eigvalsh(sub, subset_by_index=[0, 0])[0]
        best = min(best, float(lam))
    # the Gram matrix is PSD; clip round-off below zero
    return max(best, 0.0)
