"""Time reversal and its Neumann-series refinement (comparison baselines)."""

from __future__ import annotations

import time

import numpy as np

from .bfn import default_truncation_radius, truncate
from .errors import InstabilityError
from .sensing import ObservationSeries
from .trace import IterationTrace
from .variational import apply_W
from .wave import AttenuationSpec, GridSpec, Propagator, TimeSpec, WaveState


def time_reversal(
    data: ObservationSeries,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    atten: AttenuationSpec | None = None,
    radius: float | None = None,
) -> np.ndarray:
    """Back-propagate the traces from a zero terminal state.

    Observed cells are overwritten with the time-reversed data after every
    step. The result is truncated to the object disc.
    """
    if data.n_steps != ts.n_steps:
        raise ValueError(f"data cover {data.n_steps} steps, model runs {ts.n_steps}")
    radius = radius or default_truncation_radius(data)
    idx = data.mask.flat_index
    n = ts.n_steps
    frames = data.frames

    def clamp(u, m):
        u.ravel()[idx] = frames[n - m]

    start = grid.zeros()
    start.ravel()[idx] = frames[n]
    prop = Propagator(grid, speed, ts, atten or AttenuationSpec())
    state = prop.run(WaveState.at_rest(start), n, clamp=clamp)
    return truncate(state.u_curr, grid, radius)


def neumann_series(
    data: ObservationSeries,
    n_iters: int,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    truth: np.ndarray | None = None,
    atten: AttenuationSpec | None = None,
    radius: float | None = None,
    keep_all: bool = False,
) -> IterationTrace:
    """``f_0 = TR(d)``, ``f_{n+1} = f_n + TR(d - W f_n)``.

    ``trace.extras["residual"]`` holds ``||d - W f_n||`` for each iterate.
    """
    radius = radius or default_truncation_radius(data)
    trace = IterationTrace("NS", keep_all=keep_all)
    t0 = time.perf_counter()
    f = time_reversal(data, grid, speed, ts, atten, radius)
    for it in range(n_iters + 1):
        try:
            res = data - apply_W(f, grid, speed, ts, data.mask, atten)
        except InstabilityError as exc:
            trace.flags.append(f"aborted at iteration {it}: {exc}")
            break
        trace.append(f, time.perf_counter() - t0, truth, residual=res.norm())
        if it == n_iters:
            break
        t0 = time.perf_counter()
        try:
            f = f + time_reversal(res, grid, speed, ts, atten, radius)
        except InstabilityError as exc:
            trace.flags.append(f"aborted at iteration {it + 1}: {exc}")
            break
    return trace
