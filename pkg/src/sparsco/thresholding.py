"""Hard thresholding, index-set selection and the alpha-stationarity residual.

All selections break ties in favour of the smallest index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThresholdResult:
    vector: np.ndarray
    support: np.ndarray


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Sorted indices of the ``k`` largest scores, ties to the smaller index.

    Uses a partial selection to find the cut value and only resolves ties
    at the boundary, so the cost stays O(n) expected.
    """
    n = scores.shape[0]
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k >= n:
        return np.arange(n, dtype=np.int64)
    cut = np.partition(scores, n - k)[n - k]
    above = np.flatnonzero(scores > cut)
    at_cut = np.flatnonzero(scores == cut)
    chosen = np.concatenate([above, at_cut[:k - above.size]])
    chosen.sort()
    return chosen.astype(np.int64, copy=False)


def hard_threshold(x, s: int) -> ThresholdResult:
    """Keep the ``s`` largest-magnitude entries of ``x`` and zero the rest.

    If ``x`` has fewer than ``s`` nonzeros the returned support is exactly
    ``supp(x)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= s <= n:
        raise ValueError(f"sparsity level s={s} must satisfy 1 <= s <= n={n}")
    idx = top_k_indices(np.abs(x), s)
    idx = idx[x[idx] != 0]
    out = np.zeros_like(x)
    out[idx] = x[idx]
    return ThresholdResult(out, idx)


def choose_gamma(u, grad, s: int) -> np.ndarray:
    """An index set of size ``s`` containing ``supp(u)``.

    When ``u`` has fewer than ``s`` nonzeros, pad with the off-support
    positions of largest ``|grad|``.
    """
    u = np.asarray(u)
    supp = np.flatnonzero(u)
    if supp.size > s:
        raise ValueError(f"u has {supp.size} nonzeros, more than s={s}")
    if supp.size == s:
        return supp.astype(np.int64)
    scores = np.abs(np.asarray(grad, dtype=np.float64))
    # -1 sorts below every real magnitude, so support entries are never picked
    scores = np.where(u != 0, -1.0, scores)
    pad = top_k_indices(scores, s - supp.size)
    return np.union1d(supp, pad).astype(np.int64)


def sth_largest_magnitude(x, s: int) -> float:
    a = np.abs(np.asarray(x, dtype=np.float64))
    if not 1 <= s <= a.size:
        raise ValueError(f"s={s} out of range for length {a.size}")
    return float(np.partition(a, a.size - s)[a.size - s])


def alpha_stationarity_residual(obj, x, s: int, alpha: float) -> float:
    """Zero exactly when ``x`` lies in ``Pi_s(x - alpha * grad f(x))``.

    For a full-support ``x`` this is the larger of the on-support gradient
    size and the excess of ``alpha * |off-support gradient|`` over the
    smallest kept magnitude; otherwise it is the full gradient size.
    """
    x = np.asarray(x, dtype=np.float64)
    g = obj.gradient(x)
    supp = np.flatnonzero(x)
    if supp.size > s:
        raise ValueError(f"x has {supp.size} nonzeros, more than s={s}")
    if supp.size < s:
        return float(np.max(np.abs(g))) if g.size else 0.0
    mask = np.zeros(x.size, dtype=bool)
    mask[supp] = True
    on = float(np.max(np.abs(g[mask])))
    off = float(np.max(np.abs(g[~mask]))) if (~mask).any() else 0.0
    return max(on, max(0.0, alpha * off - sth_largest_magnitude(x, s)))
