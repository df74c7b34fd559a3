import numpy as np
import pytest

from tatrec.bfn import default_truncation_radius
from tatrec.sensing import ObservationSeries
from tatrec.timereversal import neumann_series, time_reversal
from tatrec.trace import rel_mse


def test_zero_data_gives_zero(tiny_setup):
    s = tiny_setup
    zero = ObservationSeries.empty(s.mask, s.ts.n_steps, s.ts.dt)
    assert not time_reversal(zero, s.grid, s.speed, s.ts).any()


def test_zero_data_is_a_fixed_point(tiny_setup):
    s = tiny_setup
    zero = ObservationSeries.empty(s.mask, s.ts.n_steps, s.ts.dt)
    trace = neumann_series(zero, 3, s.grid, s.speed, s.ts, keep_all=True)
    assert all(not est.any() for est in trace.estimates)


def test_time_reversal_is_linear(tiny_setup, rng):
    s = tiny_setup
    a = s.data
    b = s.data.with_frames(rng.standard_normal(s.data.frames.shape))
    lhs = time_reversal(a * 2.0 + b * -0.5, s.grid, s.speed, s.ts)
    rhs = 2.0 * time_reversal(a, s.grid, s.speed, s.ts) - 0.5 * time_reversal(b, s.grid, s.speed, s.ts)
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


def test_output_supported_in_disc(tiny_setup):
    s = tiny_setup
    f = time_reversal(s.data, s.grid, s.speed, s.ts)
    assert not f[s.grid.radius() > default_truncation_radius(s.data)].any()


def test_neumann_series_improves_on_time_reversal(tiny_setup):
    s = tiny_setup
    tr = time_reversal(s.data, s.grid, s.speed, s.ts)
    trace = neumann_series(s.data, 5, s.grid, s.speed, s.ts, truth=s.truth)
    assert trace.rel_errors[0] == pytest.approx(rel_mse(tr, s.truth))
    assert trace.best()[0] < 0.5 * trace.rel_errors[0]
    res = np.array(trace.extras["residual"])
    assert np.all(np.diff(res) <= 1e-12 * res[0])


def test_length_mismatch_rejected(tiny_setup):
    s = tiny_setup
    short = ObservationSeries.empty(s.mask, s.ts.n_steps - 1, s.ts.dt)
    with pytest.raises(ValueError):
        time_reversal(short, s.grid, s.speed, s.ts)
