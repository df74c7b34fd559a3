"""Least-squares reconstruction by conjugate gradients on the normal equations.

The forward map ``W`` sends an initial pressure to its recorded traces. Its
adjoint is the exact transpose of the discrete leapfrog recursion (a
backward-in-time wave solve sourced by the trace residual), so the
dot-product identity holds to round-off.

Inner products: fields ``<f, g> = dx^2 sum(f g)``; traces
``<a, b> = dt dx^2 sum(a b)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._kernels import lap5_undivided
from .bfn import default_truncation_radius, truncate
from .errors import InstabilityError
from .sensing import MaskField, ObservationSeries
from .trace import IterationTrace
from .wave import AttenuationSpec, GridSpec, Propagator, TimeSpec, WaveState


@dataclass
class CgParams:
    alpha: float = 0.0
    n_iters: int = 10
    attenuation: AttenuationSpec = field(default_factory=AttenuationSpec)
    support_radius: float | None = None
    rtol: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")


def field_dot(f: np.ndarray, g: np.ndarray, grid: GridSpec) -> float:
    return grid.dx**2 * float(np.sum(f * g))


def apply_W(
    f: np.ndarray,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    mask: MaskField,
    atten: AttenuationSpec | None = None,
) -> ObservationSeries:
    prop = Propagator(grid, speed, ts, atten or AttenuationSpec())
    series = ObservationSeries.empty(mask, ts.n_steps, ts.dt)
    prop.run(WaveState.at_rest(f), ts.n_steps, record=series)
    return series


def apply_W_adjoint(
    residual: ObservationSeries,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    atten: AttenuationSpec | None = None,
) -> np.ndarray:
    """Adjoint of :func:`apply_W` for the inner products of this module.

    Discrete counterpart of ``-d/dt u*(., 0)`` where ``u*`` solves the wave
    equation backward from rest with the residual as a source on the mask.
    """
    if residual.n_steps != ts.n_steps:
        raise ValueError(f"residual covers {residual.n_steps} steps, model runs {ts.n_steps}")
    prop = Propagator(grid, speed, ts, atten or AttenuationSpec())
    lam0, lam1 = prop.run_transpose(residual.frames, residual.mask.flat_index)
    # the initial state u(-1) = u(0) = f feeds both adjoint levels
    q_lam1 = prop.q * lam1
    lap = np.empty_like(lam1)
    lap5_undivided(q_lam1, lap)
    grad = lam0 - lam1 - prop.gamma * lap
    return ts.dt * grad


def objective(f, data, params: CgParams, grid, speed, ts) -> float:
    r = apply_W(f, grid, speed, ts, data.mask, params.attenuation) - data
    return 0.5 * r.dot(r) + 0.5 * params.alpha * field_dot(f, f, grid)


def grad_J(f, data: ObservationSeries, params: CgParams, grid, speed, ts) -> np.ndarray:
    r = apply_W(f, grid, speed, ts, data.mask, params.attenuation) - data
    return apply_W_adjoint(r, grid, speed, ts, params.attenuation) + params.alpha * f


def cg_solve(
    data: ObservationSeries,
    params: CgParams,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    truth: np.ndarray | None = None,
    keep_all: bool = False,
) -> IterationTrace:
    """CG on ``(P W* W P + alpha) f = P W* data`` starting from zero.

    ``P`` restricts to the disc of ``params.support_radius``. The objective
    value at each iterate is recorded in ``trace.extras["J"]`` and the normal
    equation residual norm in ``trace.extras["residual"]``.
    """
    radius = params.support_radius or default_truncation_radius(data)
    atten = params.attenuation

    def P(f):
        return truncate(f, grid, radius)

    def H(p):
        wp = apply_W(p, grid, speed, ts, data.mask, atten)
        return P(apply_W_adjoint(wp, grid, speed, ts, atten)) + params.alpha * p

    dd = data.dot(data)
    x = grid.zeros()
    trace = IterationTrace("CG", keep_all=keep_all)
    t0 = time.perf_counter()
    b = P(apply_W_adjoint(data, grid, speed, ts, atten))
    r = b.copy()
    p = r.copy()
    rr = field_dot(r, r, grid)
    rr0 = rr
    trace.append(x, time.perf_counter() - t0, truth, J=0.5 * dd, residual=math.sqrt(rr))
    for it in range(params.n_iters):
        t0 = time.perf_counter()
        if rr == 0.0 or (params.rtol and rr <= params.rtol**2 * rr0):
            trace.flags.append(f"converged before iteration {it + 1}")
            break
        try:
            Hp = H(p)
        except InstabilityError as exc:
            trace.flags.append(f"aborted at iteration {it + 1}: {exc}")
            break
        curv = field_dot(p, Hp, grid)
        if not curv > 1e-30 * field_dot(p, p, grid):
            trace.flags.append(f"breakdown at iteration {it + 1}: non-positive curvature {curv:.3e}")
            break
        step = rr / curv
        x = x + step * p
        r = r - step * Hp
        rr_new = field_dot(r, r, grid)
        p = r + (rr_new / rr) * p
        rr = rr_new
        # J(x) = |d|^2/2 - <x, b + r>/2 for the quadratic objective
        J = 0.5 * dd - 0.5 * field_dot(x, b + r, grid)
        trace.append(x, time.perf_counter() - t0, truth, J=J, residual=math.sqrt(rr))
    return trace
