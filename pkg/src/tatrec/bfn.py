"""Back-and-forth nudging reconstruction.

Each iteration runs the wave model forward from the current estimate, then
backward in time from the final state with a feedback term pulling the
solution towards the recorded data on the observation mask, and finally
truncates the result to the object disc.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InstabilityError
from .sensing import ObservationSeries
from .trace import IterationTrace
from .wave import AttenuationSpec, GridSpec, NudgingSpec, Propagator, TimeSpec, WaveState


@dataclass
class BfnParams:
    n_iters: int = 10
    k_gain: float | None = None  # None: 0.9 / dt
    truncation_radius: float | None = None  # None: just inside the sensor band
    attenuation: AttenuationSpec = field(default_factory=AttenuationSpec)
    initial_guess: np.ndarray | None = None
    k_factor: float = 0.9

    def gain(self, dt: float) -> float:
        k = self.k_factor / dt if self.k_gain is None else self.k_gain
        if not 0 <= k * dt < 2:
            raise ValueError(f"nudging gain k={k} violates 0 <= k dt < 2 (dt={dt})")
        return k


def default_truncation_radius(data: ObservationSeries, sensor_radius: float | None = None) -> float:
    """Radius of the disc strictly inside the observation band."""
    mask = data.mask
    g = mask.grid
    if sensor_radius is None:
        X, Y = g.mesh()
        r = np.hypot(X, Y).ravel()[mask.flat_index]
        return float(r.min()) - g.dx
    return sensor_radius - (mask.band_halfwidth + 1) * g.dx


def truncate(estimate: np.ndarray, grid: GridSpec, radius: float) -> np.ndarray:
    out = np.array(estimate, dtype=float)
    out[grid.radius() > radius] = 0.0
    return out


def forward_pass(f_est: np.ndarray, grid: GridSpec, speed: np.ndarray, ts: TimeSpec, atten=None) -> WaveState:
    prop = Propagator(grid, speed, ts, atten or AttenuationSpec())
    return prop.run(WaveState.at_rest(f_est), ts.n_steps)


def backward_pass(
    final: WaveState,
    data: ObservationSeries,
    params: BfnParams,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
) -> np.ndarray:
    """Nudged reversed-time run from ``final``; returns the slice at physical time 0.

    Swapping the two time levels of ``final`` gives level 1 of the reversed
    run (velocity sign flipped), so ``n_steps - 1`` further steps reach the
    initial time.
    """
    if data.n_steps != ts.n_steps:
        raise ValueError(f"data cover {data.n_steps} steps, model runs {ts.n_steps}")
    prop = Propagator(grid, speed, ts, params.attenuation)
    k = params.gain(ts.dt)
    nudge = NudgingSpec(k, data, "backward") if k > 0 else None
    state = prop.run(final.reversed(), ts.n_steps - 1, nudge=nudge)
    return state.u_curr


def bfn_run(
    data: ObservationSeries,
    params: BfnParams,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    truth: np.ndarray | None = None,
    keep_all: bool = False,
) -> IterationTrace:
    radius = params.truncation_radius or default_truncation_radius(data)
    f = grid.zeros() if params.initial_guess is None else truncate(params.initial_guess, grid, radius)
    trace = IterationTrace("BFN", keep_all=keep_all)
    trace.append(f, 0.0, truth)
    for it in range(params.n_iters):
        t0 = time.perf_counter()
        try:
            final = forward_pass(f, grid, speed, ts, params.attenuation)
            back = backward_pass(final, data, params, grid, speed, ts)
        except InstabilityError as exc:
            trace.flags.append(f"aborted at iteration {it + 1}: {exc}")
            break
        f = truncate(back, grid, radius)
        trace.append(f, time.perf_counter() - t0, truth)
    return trace
