import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsco.core import (ProblemKind, SolverConfig, X0Policy, as_index_set,
                          config_default, halting_metric, population_std)


def test_config_default_cs():
    cfg = config_default(ProblemKind.CS)
    assert (cfg.tau, cfg.sigma, cfg.gamma) == (5.0, 1e-4, 0.5)
    assert (cfg.epsilon_gate, cfg.epsilon_halt) == (0.01, 1e-5)
    assert (cfg.k0, cfg.max_iter, cfg.max_backtracks) == (5, 5000, 50)
    assert cfg.x0_policy is X0Policy.ALL_ZEROS
    np.testing.assert_array_equal(cfg.initial_point(3), np.zeros(3))


def test_config_default_qcs():
    cfg = config_default("qcs")
    assert (cfg.tau, cfg.sigma, cfg.gamma, cfg.max_iter) == (5.0, 1e-4, 0.5, 5000)
    assert cfg.x0_policy is X0Policy.ALL_ONES
    np.testing.assert_array_equal(cfg.initial_point(3), np.ones(3))


def test_custom_x0():
    cfg = SolverConfig(x0_policy=X0Policy.CUSTOM, x0=np.array([1.0, 0.0]))
    np.testing.assert_array_equal(cfg.initial_point(2), [1.0, 0.0])
    with pytest.raises(ValueError):
        SolverConfig(x0_policy=X0Policy.CUSTOM)


@pytest.mark.parametrize("kwargs", [
    dict(gamma=1.0), dict(gamma=0.0), dict(tau=0.0), dict(sigma=-1.0),
    dict(epsilon_halt=0.0), dict(epsilon_gate=0.0), dict(k0=0), dict(max_iter=0),
])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_population_std_examples():
    assert population_std([2, 2, 2]) == 0.0
    assert population_std([0, 2]) == 1.0
    assert population_std([1, 2, 3, 4]) == pytest.approx(math.sqrt(1.25))
    with pytest.raises(ValueError):
        population_std([])


def test_halting_metric_examples():
    assert halting_metric([1.0, 0.5, 0.2], 0.7, k=2, k0=5) == 0.7
    assert halting_metric([3.0] * 6, 0.2, k=5, k0=5) == 0.2
    hist = [100.0, 6, 5, 4, 3, 2, 1]
    # window is the last k0 + 1 = 6 values: population std of 6..1
    expected = math.sqrt(sum((v - 3.5) ** 2 for v in range(1, 7)) / 6)
    assert halting_metric(hist, 0.1, k=6, k0=5) == pytest.approx(expected)
    assert expected == pytest.approx(1.70783, abs=1e-5)


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=12),
       st.floats(0, 10), st.floats(0, 10))
def test_halting_metric_monotone_in_grad_norm(hist, a, b):
    k = len(hist) - 1
    lo, hi = sorted((a, b))
    assert halting_metric(hist, lo, k, 5) <= halting_metric(hist, hi, k, 5)


def test_index_set_sorted_unique():
    np.testing.assert_array_equal(as_index_set([3, 1, 3, 0]), [0, 1, 3])
    with pytest.raises(ValueError):
        as_index_set([5], n=5)
