"""Shared types: vectors, index sets, the objective contract, solver
configuration/result records and the halting metric."""
from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


def as_vector(x, n: Optional[int] = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a 1-D float64 array, rejecting NaN/Inf entries."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_index_set(indices, n: Optional[int] = None) -> np.ndarray:
    """Sorted, duplicate-free int64 array of zero-based positions."""
    idx = np.unique(np.asarray(indices, dtype=np.int64).ravel())
    if idx.size and idx[0] < 0:
        raise ValueError("indices must be non-negative")
    if n is not None and idx.size and idx[-1] >= n:
        raise ValueError(f"index {idx[-1]} out of range for dimension {n}")
    return idx


def support(x: np.ndarray) -> np.ndarray:
    return np.flatnonzero(x)


class Objective(ABC):
    """Smooth objective ``f: R^n -> R`` with gradient and restricted Hessian.

    Implementations are immutable after construction so one instance may be
    shared by concurrent solves.
    """

    n: int

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _hessian_block(self, x: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        ...

    def restricted_hessian(self, x: np.ndarray, gamma) -> np.ndarray:
        """Symmetrized ``|gamma| x |gamma|`` block of the Hessian at ``x``."""
        gamma = as_index_set(gamma, self.n)
        H = np.asarray(self._hessian_block(x, gamma), dtype=np.float64)
        return 0.5 * (H + H.T)

    def newton_system(self, u: np.ndarray, gamma: np.ndarray, grad: np.ndarray):
        """Return ``(H, rhs, offset)`` with the Newton point on ``gamma``
        given by ``offset + H^{-1} rhs``.

        The generic form solves ``H (v - u) = -g`` on ``gamma``; subclasses
        with a closed form may override.
        """
        H = self.restricted_hessian(u, gamma)
        return H, -grad[gamma], u[gamma]


class X0Policy(enum.Enum):
    ALL_ZEROS = "zeros"
    ALL_ONES = "ones"
    CUSTOM = "custom"


class ProblemKind(enum.Enum):
    CS = "cs"
    QCS = "qcs"


class Termination(enum.Enum):
    HALTING_METRIC = "halting_metric"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_STALLED = "line_search_stalled"
    # baseline-only stopping rules
    RESIDUAL_TOLERANCE = "residual_tolerance"
    NO_PROGRESS = "no_progress"


@dataclass(frozen=True)
class SolverConfig:
    tau: float = 5.0
    sigma: float = 1e-4
    gamma: float = 0.5
    epsilon_gate: float = 0.01
    epsilon_halt: float = 1e-5
    k0: int = 5
    max_iter: int = 5000
    max_backtracks: int = 50
    x0_policy: X0Policy = X0Policy.ALL_ZEROS
    x0: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        for name in ("tau", "sigma", "epsilon_gate", "epsilon_halt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("k0", "max_iter", "max_backtracks"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.x0_policy is X0Policy.CUSTOM and self.x0 is None:
            raise ValueError("custom x0 policy requires an x0 vector")

    def initial_point(self, n: int) -> np.ndarray:
        if self.x0_policy is X0Policy.ALL_ZEROS:
            return np.zeros(n)
        if self.x0_policy is X0Policy.ALL_ONES:
            return np.ones(n)
        return as_vector(self.x0, n, "x0").copy()


def config_default(problem_kind: ProblemKind | str = ProblemKind.CS) -> SolverConfig:
    """Experiment defaults; only the starting point differs between kinds."""
    kind = ProblemKind(problem_kind) if isinstance(problem_kind, str) else problem_kind
    policy = X0Policy.ALL_ONES if kind is ProblemKind.QCS else X0Policy.ALL_ZEROS
    return SolverConfig(x0_policy=policy)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    alpha: float
    q: int
    gamma_set: np.ndarray
    took_newton: bool
    f_value: float
    pi: float
    step_norm: float = 0.0
    f_before_newton: float = float("nan")
    newton_step_norm: float = float("nan")


@dataclass
class SolverResult:
    x_final: np.ndarray
    support: np.ndarray
    f_trace: list
    iterations: int
    newton_steps_taken: int
    termination: Termination
    stationarity_residual: float
    records: list = field(default_factory=list)
    iterates: Optional[list] = None


def population_std(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("population_std of an empty sequence")
    return float(np.sqrt(np.mean((v - v.mean()) ** 2)))


def halting_metric(f_history: Sequence[float], grad_norm: float, k: int, k0: int) -> float:
    """Stopping quantity: the gradient norm, joined after ``k0`` iterations by
    the spread of the last ``k0 + 1`` objective values."""
    if k < k0:
        return float(grad_norm)
    window = list(f_history)[k - k0:k + 1]
    return max(population_std(window), float(grad_norm))
