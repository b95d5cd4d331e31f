"""Gradient projection Newton pursuit (GPNP).

Each iteration takes a hard-thresholded gradient step with backtracking,
then, once the support has settled or the gradient is small, tries a Newton
step restricted to an ``s``-element index set. The Newton point is kept only
if it gives sufficient decrease.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .core import (IterationRecord, Objective, SolverConfig, SolverResult,
                   Termination, halting_metric)
from .thresholding import (ThresholdResult, alpha_stationarity_residual,
                           choose_gamma, hard_threshold)

logger = logging.getLogger(__name__)

SPD_PIVOT_RTOL = 1e-12


class LineSearchStalled(Exception):
    """No step ``tau * gamma**q`` with ``q <= max_backtracks`` gave sufficient decrease."""


@dataclass(frozen=True)
class ProjectionStep:
    u: ThresholdResult
    alpha: float
    q: int
    f_u: float


def gradient_projection_step(obj: Objective, x, s: int, cfg: SolverConfig,
                             grad=None, f_x=None) -> ProjectionStep:
    """Backtrack ``alpha = tau * gamma**q`` until the thresholded step
    ``u = Pi_s(x - alpha * grad)`` satisfies
    ``f(u) <= f(x) - (sigma / 2) * ||u - x||^2``.

    Raises :class:`LineSearchStalled` once ``max_backtracks`` is exceeded.
    """
    x = np.asarray(x, dtype=np.float64)
    g = obj.gradient(x) if grad is None else grad
    fx = obj.value(x) if f_x is None else f_x
    alpha = cfg.tau
    for q in range(cfg.max_backtracks + 1):
        u = hard_threshold(x - alpha * g, s)
        fu = obj.value(u.vector)
        d = u.vector - x
        if fu <= fx - 0.5 * cfg.sigma * float(d @ d):
            return ProjectionStep(u, alpha, q, fu)
        alpha *= cfg.gamma
    raise LineSearchStalled(
        f"no sufficient decrease after {cfg.max_backtracks} backtracks")


def newton_gate(x_support, gamma, grad_norm_u: float, epsilon_gate: float) -> bool:
    """Newton is tried when the support matches ``gamma`` or the gradient is small."""
    x_support = np.asarray(x_support)
    gamma = np.asarray(gamma)
    same = x_support.shape == gamma.shape and bool(np.all(x_support == gamma))
    return same or grad_norm_u < epsilon_gate


def _spd_solve(H: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    # Cholesky with a relative pivot floor; None means "not solvable"
    if H.size == 0:
        return np.zeros(0)
    try:
        c, low = scipy.linalg.cho_factor(H, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        return None
    pivots = np.diag(c) ** 2
    scale = float(np.max(np.abs(np.diag(H))))
    if scale <= 0 or np.min(pivots) <= SPD_PIVOT_RTOL * scale:
        return None
    return scipy.linalg.cho_solve((c, low), rhs)


def newton_pursuit(obj: Objective, u, gamma, sigma: float, grad=None,
                   f_u=None) -> Optional[np.ndarray]:
    """Restricted Newton point on ``gamma`` or ``None`` if it is declined.

    Declines when the restricted Hessian is not numerically SPD, when the
    new objective value is non-finite, or when
    ``f(v) > f(u) - (sigma / 2) * ||v - u||^2``.
    """
    u = np.asarray(u, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.int64)
    g = obj.gradient(u) if grad is None else grad
    fu = obj.value(u) if f_u is None else f_u
    H, rhs, offset = obj.newton_system(u, gamma, g)
    sol = _spd_solve(H, rhs)
    if sol is None:
        return None
    v = np.zeros_like(u)
    v[gamma] = offset + sol
    if not np.all(np.isfinite(v)):
        return None
    fv = obj.value(v)
    if not np.isfinite(fv):
        return None
    d = v - u
    if fv <= fu - 0.5 * sigma * float(d @ d):
        return v
    return None


def solve(obj: Objective, s: int, cfg: Optional[SolverConfig] = None,
          keep_iterates: bool = False) -> SolverResult:
    """Run GPNP on ``min f(x) s.t. ||x||_0 <= s``.

    Stops when the halting metric (gradient norm, plus the spread of the last
    ``k0 + 1`` objective values) drops to ``epsilon_halt``, after
    ``max_iter`` iterations, or if the line search stalls.
    """
    cfg = SolverConfig() if cfg is None else cfg
    n = obj.n
    if not 1 <= s <= n:
        raise ValueError(f"sparsity level s={s} must satisfy 1 <= s <= n={n}")

    # x0 may be dense (all ones for QCS); the first projection makes it s-sparse
    x = cfg.initial_point(n)
    feasible = np.count_nonzero(x) <= s
    fx = obj.value(x)
    g = obj.gradient(x)
    pi = float(np.linalg.norm(g))
    f_trace = [fx]
    records = []
    iterates = [x.copy()] if keep_iterates else None
    newton_steps = 0
    last_alpha = cfg.tau
    termination = Termination.HALTING_METRIC
    k = 0

    while pi > cfg.epsilon_halt or not feasible:
        if k >= cfg.max_iter:
            termination = Termination.MAX_ITERATIONS
            break
        try:
            step = gradient_projection_step(obj, x, s, cfg, grad=g, f_x=fx)
        except LineSearchStalled:
            logger.debug("line search stalled at k=%d", k)
            termination = Termination.LINE_SEARCH_STALLED
            break
        last_alpha = step.alpha
        u = step.u.vector
        fu = step.f_u
        gu = obj.gradient(u)
        gamma = choose_gamma(u, gu, s)
        x_next, f_next, g_next = u, fu, gu

        took_newton = False
        newton_norm = float("nan")
        if newton_gate(np.flatnonzero(x), gamma, float(np.linalg.norm(gu)),
                       cfg.epsilon_gate):
            v = newton_pursuit(obj, u, gamma, cfg.sigma, grad=gu, f_u=fu)
            if v is not None:
                took_newton = True
                newton_steps += 1
                newton_norm = float(np.linalg.norm(v - u))
                x_next, f_next, g_next = v, obj.value(v), obj.gradient(v)

        step_norm = float(np.linalg.norm(x_next - x))
        x, fx, g = x_next, f_next, g_next
        feasible = True
        k += 1
        f_trace.append(fx)
        pi = halting_metric(f_trace, float(np.linalg.norm(g)), k, cfg.k0)
        records.append(IterationRecord(
            k=k, alpha=step.alpha, q=step.q, gamma_set=gamma,
            took_newton=took_newton, f_value=fx, pi=pi, step_norm=step_norm,
            f_before_newton=fu, newton_step_norm=newton_norm))
        if keep_iterates:
            iterates.append(x.copy())

    alpha_cert = min(cfg.tau, last_alpha)
    return SolverResult(
        x_final=x,
        support=np.flatnonzero(x),
        f_trace=f_trace,
        iterations=k,
        newton_steps_taken=newton_steps,
        termination=termination,
        stationarity_residual=alpha_stationarity_residual(obj, x, s, alpha_cert),
        records=records,
        iterates=iterates,
    )
