"""Classical hard-thresholding solvers for compressive sensing: IHT, NIHT,
HTP, CoSaMP and SP.

They all share one loop: threshold a gradient-based point, optionally
debias on a candidate support, optionally prune back to ``s`` entries.
Every solver starts from ``x = 0`` and stops when
``||A x - b|| < residual_tol * ||b||``, when the iterate stops moving for
``stall_window`` consecutive iterations, or after ``max_iter`` iterations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import SolverResult, Termination
from .objectives import CsProblem, restricted_least_squares
from .thresholding import alpha_stationarity_residual, hard_threshold, top_k_indices


class Algorithm(enum.Enum):
    IHT = "iht"
    NIHT = "niht"
    HTP = "htp"
    COSAMP = "cosamp"
    SP = "sp"


@dataclass(frozen=True)
class BaselineConfig:
    algorithm: Algorithm = Algorithm.IHT
    step_mu: Optional[float] = None
    max_iter: int = 1000
    residual_tol: float = 1e-8
    stall_window: int = 3
    power_iterations: int = 50
    # NIHT acceptance constant
    niht_c: float = 0.01

    def __post_init__(self):
        if self.step_mu is not None and not self.step_mu > 0:
            raise ValueError("step_mu must be positive when given")
        if self.max_iter < 1 or self.stall_window < 1:
            raise ValueError("max_iter and stall_window must be positive")


def spectral_norm_sq(A: np.ndarray, iterations: int = 50) -> float:
    """Estimate ``lambda_max(A^T A)`` by power iteration from a fixed start."""
    n = A.shape[1]
    v = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(v @ (A.T @ (A @ v)))


def default_step(p: CsProblem, cfg: BaselineConfig) -> float:
    if cfg.step_mu is not None:
        return cfg.step_mu
    lam = spectral_norm_sq(p.A, cfg.power_iterations)
    return 1.0 / lam if lam > 0 else 1.0


class _Loop:
    """Book-keeping shared by the baseline solvers."""

    def __init__(self, p: CsProblem, s: int, cfg: BaselineConfig):
        if not 1 <= s <= p.n:
            raise ValueError(f"sparsity level s={s} must satisfy 1 <= s <= n={p.n}")
        self.p, self.s, self.cfg = p, s, cfg
        self.x = np.zeros(p.n)
        self.f_trace = [p.value(self.x)]
        self.bnorm = float(np.linalg.norm(p.b))
        self.still = 0
        self.k = 0
        self.termination = Termination.MAX_ITERATIONS

    def converged_at_start(self) -> bool:
        if self.bnorm == 0.0:
            self.termination = Termination.RESIDUAL_TOLERANCE
            return True
        return False

    def accept(self, x_new: np.ndarray) -> bool:
        """Take ``x_new``; return True when a stopping rule fires."""
        moved = not np.array_equal(x_new, self.x)
        self.x = x_new
        self.k += 1
        self.f_trace.append(self.p.value(x_new))
        self.still = 0 if moved else self.still + 1
        if np.linalg.norm(self.p.residual(x_new)) < self.cfg.residual_tol * self.bnorm:
            self.termination = Termination.RESIDUAL_TOLERANCE
            return True
        if self.still >= self.cfg.stall_window:
            self.termination = Termination.NO_PROGRESS
            return True
        return self.k >= self.cfg.max_iter

    def result(self, alpha: float) -> SolverResult:
        x = self.x
        return SolverResult(
            x_final=x,
            support=np.flatnonzero(x),
            f_trace=self.f_trace,
            iterations=self.k,
            newton_steps_taken=0,
            termination=self.termination,
            stationarity_residual=alpha_stationarity_residual(self.p, x, self.s, alpha),
        )


def iht_solve(p: CsProblem, s: int, cfg: BaselineConfig = BaselineConfig()) -> SolverResult:
    """``x <- Pi_s(x - mu * grad f(x))`` with a fixed step ``mu``."""
    loop = _Loop(p, s, cfg)
    mu = default_step(p, cfg)
    if not loop.converged_at_start():
        while True:
            u = hard_threshold(loop.x - mu * p.gradient(loop.x), s).vector
            if loop.accept(u):
                break
    return loop.result(mu)


def niht_solve(p: CsProblem, s: int, cfg: BaselineConfig = BaselineConfig()) -> SolverResult:
    """IHT with the normalized step of Blumensath and Davies.

    The step ``mu = ||g_T||^2 / ||A_T g_T||^2`` is computed on the current
    support ``T`` (top-``s`` gradient entries at the zero start). If the
    thresholded point changes support, ``mu`` is halved until
    ``mu <= (1 - c) ||dx||^2 / ||A dx||^2``.
    """
    loop = _Loop(p, s, cfg)
    A = p.A
    mu = 0.0
    if not loop.converged_at_start():
        while True:
            x = loop.x
            g = -p.gradient(x)
            T = np.flatnonzero(x)
            if T.size == 0:
                T = top_k_indices(np.abs(g), s)
            gT = g[T]
            AgT = A[:, T] @ gT
            denom = float(AgT @ AgT)
            if denom == 0.0:
                loop.accept(x)
                loop.termination = Termination.NO_PROGRESS
                break
            mu = float(gT @ gT) / denom
            for _ in range(60):
                u = hard_threshold(x + mu * g, s)
                if np.array_equal(u.support, T):
                    break
                dx = u.vector - x
                Adx = A @ dx
                omega = (1.0 - cfg.niht_c) * float(dx @ dx) / max(float(Adx @ Adx), 1e-300)
                if mu <= omega:
                    break
                mu *= 0.5
            if loop.accept(u.vector):
                break
    return loop.result(mu if mu > 0 else 1.0)


def htp_solve(p: CsProblem, s: int, cfg: BaselineConfig = BaselineConfig()) -> SolverResult:
    """Threshold a gradient step, then refit by least squares on its support."""
    loop = _Loop(p, s, cfg)
    mu = default_step(p, cfg)
    if not loop.converged_at_start():
        while True:
            u = hard_threshold(loop.x - mu * p.gradient(loop.x), s)
            v = restricted_least_squares(p, u.support)
            if loop.accept(v):
                break
    return loop.result(mu)


def _pursuit(p: CsProblem, s: int, cfg: BaselineConfig, r: int) -> SolverResult:
    loop = _Loop(p, s, cfg)
    if not loop.converged_at_start():
        while True:
            g = p.gradient(loop.x)
            picked = top_k_indices(np.abs(g), min(r, p.n))
            T = np.union1d(picked, np.flatnonzero(loop.x))
            v = restricted_least_squares(p, T)
            z = hard_threshold(v, s).vector
            if loop.accept(z):
                break
    return loop.result(default_step(p, replace(cfg, power_iterations=20)))


def cosamp_solve(p: CsProblem, s: int, cfg: BaselineConfig = BaselineConfig()) -> SolverResult:
    """Merge the top ``2s`` gradient entries with the support, fit, prune."""
    return _pursuit(p, s, cfg, 2 * s)


def sp_solve(p: CsProblem, s: int, cfg: BaselineConfig = BaselineConfig()) -> SolverResult:
    """Subspace pursuit: as CoSaMP with ``s`` new candidates per iteration."""
    return _pursuit(p, s, cfg, s)


SOLVERS = {
    Algorithm.IHT: iht_solve,
    Algorithm.NIHT: niht_solve,
    Algorithm.HTP: htp_solve,
    Algorithm.COSAMP: cosamp_solve,
    Algorithm.SP: sp_solve,
}


def solve_baseline(p: CsProblem, s: int, cfg: BaselineConfig) -> SolverResult:
    return SOLVERS[cfg.algorithm](p, s, cfg)
