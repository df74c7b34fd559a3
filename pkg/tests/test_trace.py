import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tatrec.errors import UndefinedMetricError
from tatrec.trace import IterationTrace, h1_seminorm, rel_h1, rel_mse


def test_rel_mse_examples(rng):
    t = rng.random((6, 6)) + 0.1
    assert rel_mse(t, t) == 0.0
    assert rel_mse(np.zeros_like(t), t) == 100.0
    assert rel_mse(1.1 * t, t) == pytest.approx(10.0)
    with pytest.raises(UndefinedMetricError):
        rel_mse(t, np.zeros_like(t))
    with pytest.raises(ValueError):
        rel_mse(t, t[:3])


@settings(max_examples=30)
@given(arrays(float, (5, 4), elements=st.floats(-10, 10)), st.floats(0.1, 10))
def test_rel_mse_scale_invariant(e, a):
    t = np.arange(20.0).reshape(5, 4) + 1
    assert rel_mse(a * e, a * t) == pytest.approx(rel_mse(e, t), rel=1e-9, abs=1e-9)


def test_h1_seminorm():
    f = np.zeros((5, 5))
    f[2, 2] = 1.0
    assert h1_seminorm(f) == pytest.approx(2.0)  # four unit jumps
    with pytest.raises(UndefinedMetricError):
        rel_h1(f, np.zeros((5, 5)))
    assert rel_h1(f, f) == 0.0


def _trace(errors_from, keep_all=False):
    truth = np.ones((3, 3))
    tr = IterationTrace("X", keep_all=keep_all)
    for k in errors_from:
        tr.append(truth * (1 + k), 0.5, truth)
    return tr


def test_trace_best_and_memory_policy():
    tr = _trace([1.0, 0.5, 0.1, 0.3, 0.4])
    assert tr.best() == (pytest.approx(10.0), 2)
    assert tr.best_estimate is not None
    kept = [i for i, e in enumerate(tr.estimates) if e is not None]
    assert kept == [0, 2, 4]
    np.testing.assert_allclose(tr.ratios(), [0.5, 0.2, 3.0, 4 / 3])
    full = _trace([1.0, 0.5, 0.1], keep_all=True)
    assert all(e is not None for e in full.estimates)


def test_trace_csv(tmp_path):
    tr = _trace([1.0, 0.5])
    tr.to_csv(tmp_path / "a.csv")
    rows = list(csv.reader(open(tmp_path / "a.csv")))
    assert rows[0] == ["iteration", "rel_error_pct", "h1_error", "seconds"]
    assert float(rows[2][1]) == 50.0
    tr.to_csv(tmp_path / "b.csv", include_timing=False)
    assert next(csv.reader(open(tmp_path / "b.csv"))) == ["iteration", "rel_error_pct", "h1_error"]


def test_best_without_truth():
    tr = IterationTrace("X")
    tr.append(np.ones((2, 2)), 0.0)
    with pytest.raises(ValueError):
        tr.best()
