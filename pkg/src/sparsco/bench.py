"""Synthetic instances, recovery metrics and the experiment drivers.

Randomness comes from numpy's counter-based Philox generator. A trial's
instance seed is ``base_seed + trial``; inside an instance the matrix, the
support and the nonzero values each draw from their own stream keyed by
``SeedSequence([seed, stream_id])``, so instances are reproducible
independently of execution order.
"""
from __future__ import annotations

import hashlib
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import gpnp
from .baselines import Algorithm, BaselineConfig, solve_baseline
from .core import ProblemKind, config_default
from .objectives import CsProblem, QcsProblem

logger = logging.getLogger(__name__)

RNG_NAME = "philox-v1"
STREAM_MATRIX, STREAM_SUPPORT, STREAM_VALUES = 0, 1, 2
SUCCESS_RE_ER = 1e-4
PSNR_CAP = 3100.0

GPNP_NAME = "gpnp"
ALGORITHMS = (GPNP_NAME,) + tuple(a.value for a in Algorithm)


def stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), stream_id])))


@dataclass(frozen=True)
class Instance:
    kind: ProblemKind
    problem: object
    x_star: Optional[np.ndarray]
    seed: Optional[int]
    dims: tuple

    @property
    def m(self):
        return self.dims[0]

    @property
    def n(self):
        return self.dims[1]

    @property
    def s(self):
        return self.dims[2]

    def digest(self) -> str:
        """SHA-256 over kind, dimensions and the raw float64 bytes."""
        h = hashlib.sha256()
        h.update(f"{self.kind.value}:{self.m}:{self.n}:{self.s}".encode())
        h.update(np.ascontiguousarray(self.problem.A, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.problem.b, dtype="<f8").tobytes())
        if self.x_star is not None:
            h.update(np.ascontiguousarray(self.x_star, dtype="<f8").tobytes())
        return h.hexdigest()


def _sparse_truth(n: int, s: int, seed: int) -> np.ndarray:
    idx = stream(seed, STREAM_SUPPORT).choice(n, size=s, replace=False)
    rng = stream(seed, STREAM_VALUES)
    vals = rng.standard_normal(s)
    while np.any(vals == 0.0):
        zero = vals == 0.0
        vals[zero] = rng.standard_normal(int(zero.sum()))
    x = np.zeros(n)
    x[idx] = vals
    return x


def _check_dims(m, n, s):
    if m < 1 or not 1 <= s <= n:
        raise ValueError(f"need m >= 1 and 1 <= s <= n, got m={m}, n={n}, s={s}")


def gen_gaussian_instance(m: int, n: int, s: int, seed: int) -> Instance:
    """Gaussian sensing matrix with unit-norm columns and ``b = A x*``."""
    _check_dims(m, n, s)
    A = stream(seed, STREAM_MATRIX).standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    x_star = _sparse_truth(n, s, seed)
    return Instance(ProblemKind.CS, CsProblem(A, A @ x_star), x_star, seed, (m, n, s))


def gen_qcs_instance(m: int, n: int, s: int, seed: int) -> Instance:
    """Gaussian rows ``a_i`` and phaseless data ``b_i = <a_i, x*>^2``."""
    _check_dims(m, n, s)
    rows = stream(seed, STREAM_MATRIX).standard_normal((m, n))
    x_star = _sparse_truth(n, s, seed)
    b = (rows @ x_star) ** 2
    return Instance(ProblemKind.QCS, QcsProblem(rows, b), x_star, seed, (m, n, s))


def relative_error(x, x_star) -> float:
    x = np.asarray(x, dtype=np.float64)
    x_star = np.asarray(x_star, dtype=np.float64)
    ref = float(np.linalg.norm(x_star))
    if ref == 0.0:
        raise ValueError("relative error is undefined for a zero reference vector")
    return float(np.linalg.norm(x - x_star)) / ref


def psnr(x, x_star, n: Optional[int] = None) -> float:
    """``10 log10(n / ||x - x*||^2)``, capped at ``PSNR_CAP`` for exact hits."""
    x = np.asarray(x, dtype=np.float64)
    x_star = np.asarray(x_star, dtype=np.float64)
    n = x.size if n is None else n
    err = float(np.sum((x - x_star) ** 2))
    if err < 1e-300:
        return PSNR_CAP
    return float(10.0 * np.log10(n / err))


@dataclass(frozen=True)
class TrialResult:
    algorithm: str
    m: int
    n: int
    s: int
    trial: int
    seed: int
    re_er: float
    psnr: float
    f_final: float
    iterations: int
    newton_steps: int
    time_s: float
    success: bool
    termination: str
    instance_hash: str = ""


def run_algorithm(name: str, inst: Instance):
    """Solve one instance with the named algorithm; returns the solver result."""
    if name == GPNP_NAME:
        return gpnp.solve(inst.problem, inst.s, config_default(inst.kind))
    if inst.kind is not ProblemKind.CS:
        raise ValueError(f"{name} only handles CS instances")
    return solve_baseline(inst.problem, inst.s, BaselineConfig(algorithm=Algorithm(name)))


def evaluate(name: str, inst: Instance, trial: int = 0) -> TrialResult:
    t0 = time.perf_counter()
    res = run_algorithm(name, inst)
    elapsed = time.perf_counter() - t0
    x = res.x_final
    if inst.x_star is None:
        err, pk = float("nan"), float("nan")
    else:
        ref = inst.x_star
        # QCS data cannot tell x* from -x*
        if inst.kind is ProblemKind.QCS and float(x @ ref) < 0:
            ref = -ref
        err, pk = relative_error(x, ref), psnr(x, ref, inst.n)
    digest = inst.digest()
    logger.debug("alg=%s trial=%d seed=%s instance=%s", name, trial, inst.seed, digest)
    return TrialResult(
        algorithm=name, m=inst.m, n=inst.n, s=inst.s, trial=trial,
        seed=-1 if inst.seed is None else int(inst.seed),
        re_er=err, psnr=pk, f_final=float(res.f_trace[-1]),
        iterations=res.iterations, newton_steps=res.newton_steps_taken,
        time_s=elapsed, success=bool(err < SUCCESS_RE_ER),
        termination=res.termination.value, instance_hash=digest)


def worker_count(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("GPNP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_cell(job):
    kind, m, n, s, trial, seed, algorithms = job
    gen = gen_qcs_instance if kind is ProblemKind.QCS else gen_gaussian_instance
    inst = gen(m, n, s, seed)
    return [evaluate(name, inst, trial) for name in algorithms]


def _run_jobs(jobs: list, workers: Optional[int]) -> list:
    # one job per instance: every algorithm sees the same generated data
    w = min(worker_count(workers), max(1, len(jobs)))
    if w == 1:
        chunks = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=w) as pool:
            chunks = list(pool.map(_run_cell, jobs))
    rows = [r for chunk in chunks for r in chunk]
    order = {name: i for i, name in enumerate(ALGORITHMS)}
    rows.sort(key=lambda r: (order.get(r.algorithm, len(order)), r.m, r.n, r.s, r.trial))
    return rows


def _validate_algorithms(algorithms: Optional[Iterable[str]]) -> list:
    names = list(algorithms) if algorithms else list(ALGORITHMS)
    bad = [a for a in names if a not in ALGORITHMS]
    if bad:
        raise ValueError(f"unknown algorithm(s) {bad}; valid names: {', '.join(ALGORITHMS)}")
    return names


def run_success_rate(algorithms, m: int, n: int, s_values: Sequence[int], trials: int,
                     base_seed: int, workers: Optional[int] = None) -> list:
    """Paired trials over a sparsity sweep at fixed ``(m, n)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    algs = _validate_algorithms(algorithms)
    jobs = [(ProblemKind.CS, m, n, s, t, base_seed + t, algs)
            for s in s_values for t in range(trials)]
    return _run_jobs(jobs, workers)


def run_sample_sweep(algorithms, n: int, s: int, m_fracs: Sequence[float], trials: int,
                     base_seed: int, workers: Optional[int] = None) -> list:
    """Paired trials over ``m = floor(frac * n)`` at fixed ``(n, s)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    algs = _validate_algorithms(algorithms)
    ms = sorted({int(np.floor(f * n + 1e-9)) for f in m_fracs})
    jobs = [(ProblemKind.CS, m, n, s, t, base_seed + t, algs)
            for m in ms for t in range(trials)]
    return _run_jobs(jobs, workers)


def run_scaling(algorithms, sizes: Sequence[tuple], trials: int, base_seed: int,
                workers: Optional[int] = None) -> list:
    """Paired trials at each ``(m, n, s)``; summarize with :func:`mean_by`."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    algs = _validate_algorithms(algorithms)
    jobs = [(ProblemKind.CS, m, n, s, t, base_seed + t, algs)
            for (m, n, s) in sizes for t in range(trials)]
    return _run_jobs(jobs, workers)


def run_qcs(n_values: Sequence[int], trials: int, base_seed: int,
            s_values: Sequence[int] = tuple(range(3, 16)), recovery_dims=(80, 120),
            workers: Optional[int] = None) -> list:
    """GPNP on QCS: a sparsity sweep at ``recovery_dims = (m, n)`` followed by
    a size sweep with ``m = 0.8 n`` and ``s = 0.01 n``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m0, n0 = recovery_dims
    cells = [(m0, n0, s) for s in s_values]
    cells += [(int(round(0.8 * n)), n, max(1, int(round(0.01 * n)))) for n in n_values]
    jobs = [(ProblemKind.QCS, m, n, s, t, base_seed + t, [GPNP_NAME])
            for (m, n, s) in cells for t in range(trials)]
    return _run_jobs(jobs, workers)


def success_rates(rows: Iterable[TrialResult], key: str = "s") -> dict:
    """``{(algorithm, key value): fraction of successes}``."""
    tally = {}
    for r in rows:
        k = (r.algorithm, getattr(r, key))
        ok, tot = tally.get(k, (0, 0))
        tally[k] = (ok + int(r.success), tot + 1)
    return {k: ok / tot for k, (ok, tot) in tally.items()}


def mean_by(rows: Iterable[TrialResult], field: str, only_success: bool = False) -> dict:
    """``{(algorithm, m, n, s): mean of field}``; NaN when a group is empty."""
    groups = {}
    for r in rows:
        k = (r.algorithm, r.m, r.n, r.s)
        groups.setdefault(k, [])
        if not only_success or r.success:
            groups[k].append(getattr(r, field))
    return {k: float(np.mean(v)) if v else float("nan") for k, v in groups.items()}
