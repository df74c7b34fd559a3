"""Explicit leapfrog solver for the 2D wave equation.

Fields are plain ``(nx, ny)`` float64 arrays indexed ``[i, j]`` with ``i``
along x and ``j`` along y; cell ``(i, j)`` is centred at
``(x0 + (i + 1/2) dx, y0 + (j + 1/2) dx)``. Values outside the array are zero
(Dirichlet ghost cells).

The update implemented by :class:`Propagator` is::

    u[n+1] = 2 u[n] - u[n-1]
             + dt^2 c^2 (Lap u[n] + dx^eps Lap (u[n] - u[n-1]) / dt)
             - k dt phi ((u[n] - u[n-1]) - (d[n] - d[n-1]))

where the last line is the optional nudging feedback towards recorded data
``d`` on the observation mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

import numpy as np

from . import _kernels
from .errors import DataExhaustedError, InstabilityError, InvalidMediumError

if TYPE_CHECKING:
    from .sensing import ObservationSeries


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    dx: float
    x0: float
    y0: float

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs at least 3x3 cells, got {self.nx}x{self.ny}")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")

    @classmethod
    def for_object_window(cls, scale: int, margin: float = math.sqrt(2), pad_cells: int = 4) -> GridSpec:
        """Grid whose central ``scale x scale`` cells tile [-0.5, 0.5]^2.

        The domain is extended by ``margin`` plus ``pad_cells`` cells on every
        side, so that waves leaving the object window do not come back to the
        sensors within a time ``margin`` at unit speed.
        """
        dx = 1.0 / scale
        pad = math.ceil(margin / dx - 1e-9) + pad_cells
        n = scale + 2 * pad
        return cls(n, n, dx, -0.5 - pad * dx, -0.5 - pad * dx)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dx

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def radius(self) -> np.ndarray:
        X, Y = self.mesh()
        return np.hypot(X, Y)

    def extent(self) -> tuple[float, float, float, float]:
        return (self.x0, self.x0 + self.nx * self.dx, self.y0, self.y0 + self.ny * self.dx)

    def nearest_index(self, x, y):
        i = np.floor((np.asarray(x) - self.x0) / self.dx).astype(int)
        j = np.floor((np.asarray(y) - self.y0) / self.dx).astype(int)
        return i, j

    def window(self, half_width: float = 0.5) -> tuple[slice, slice]:
        """Index slices of the cells centred inside ``[-half_width, half_width]^2``."""
        ix = np.flatnonzero(np.abs(self.x) < half_width)
        iy = np.flatnonzero(np.abs(self.y) < half_width)
        return slice(ix[0], ix[-1] + 1), slice(iy[0], iy[-1] + 1)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass(frozen=True)
class TimeSpec:
    dt: float
    n_steps: int

    @property
    def T(self) -> float:
        return self.dt * self.n_steps


@dataclass
class WaveState:
    u_curr: np.ndarray
    u_prev: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        if self.u_curr.shape != self.u_prev.shape:
            raise ValueError("u_curr and u_prev live on different grids")

    @classmethod
    def at_rest(cls, initial: np.ndarray) -> WaveState:
        """State with displacement ``initial`` and zero velocity."""
        u = np.array(initial, dtype=float)
        return cls(u, u.copy(), 0)

    def reversed(self) -> WaveState:
        """Swap the time levels, i.e. flip the sign of the velocity."""
        return WaveState(self.u_prev.copy(), self.u_curr.copy(), 1)

    def copy(self) -> WaveState:
        return WaveState(self.u_curr.copy(), self.u_prev.copy(), self.step_index)


@dataclass(frozen=True)
class AttenuationSpec:
    enabled: bool = False
    exponent: float = 2.0

    def __post_init__(self):
        if self.enabled and not self.exponent > 0:
            raise ValueError("attenuation exponent must be positive")

    def gamma(self, dx: float, dt: float) -> float:
        """Coefficient of the damping term relative to the Laplacian term."""
        return dx**self.exponent / dt if self.enabled else 0.0


@dataclass
class NudgingSpec:
    """Feedback ``-k phi d/dt (u - data)`` on the cells of ``series.mask``.

    With ``direction="backward"`` the solver runs in reversed time and step
    ``m`` is compared with recorded frame ``n_steps - m``.
    """

    gain: float
    series: ObservationSeries
    direction: Literal["forward", "backward"] = "backward"

    def frames_at(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        n = self.series.n_steps
        if self.direction == "forward":
            cur, prev = m, max(m - 1, 0)
        else:
            cur, prev = n - m, min(n - m + 1, n)
        if not 0 <= cur <= n:
            raise DataExhaustedError(f"no recorded frame for step {m} ({self.direction}), series has {n + 1}")
        frames = self.series.frames
        return frames[cur], frames[prev]


def laplacian5(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.empty_like(f, dtype=float)
    _kernels.lap5_undivided(np.ascontiguousarray(f, dtype=float), out)
    return out / grid.dx**2


def cfl_dt(grid: GridSpec, speed: np.ndarray, cfl_factor: float = 0.5, T: float | None = None) -> float:
    """Largest stable step ``cfl_factor * dx / max(c)``, shrunk so that T/dt is an integer."""
    if not 0 < cfl_factor <= 1 / math.sqrt(2):
        raise ValueError(f"cfl_factor must be in (0, 1/sqrt(2)], got {cfl_factor}")
    cmin = float(np.min(speed))
    if not cmin > 0 or not np.all(np.isfinite(speed)):
        raise InvalidMediumError(f"sound speed must be finite and positive (min {cmin})")
    dt = cfl_factor * grid.dx / float(np.max(speed))
    if T is not None:
        dt = T / math.ceil(T / dt - 1e-12)
    return dt


def make_timespec(grid: GridSpec, speed: np.ndarray, T: float, cfl_factor: float = 0.5) -> TimeSpec:
    dt = cfl_dt(grid, speed, cfl_factor, T)
    return TimeSpec(dt, round(T / dt))


@dataclass
class Propagator:
    """Leapfrog stepper for one medium and time grid."""

    grid: GridSpec
    speed: np.ndarray
    ts: TimeSpec
    atten: AttenuationSpec = field(default_factory=AttenuationSpec)

    def __post_init__(self):
        if self.speed.shape != self.grid.shape:
            raise ValueError(f"speed shape {self.speed.shape} does not match grid {self.grid.shape}")
        if not np.all(self.speed > 0):
            raise InvalidMediumError("sound speed must be positive everywhere")
        self.q = np.ascontiguousarray((self.speed * self.ts.dt / self.grid.dx) ** 2)
        self.gamma = self.atten.gamma(self.grid.dx, self.ts.dt)
        # von Neumann bound of the damped scheme (Laplacian symbol up to 8)
        if 8 * float(self.q.max()) * (1 + 2 * self.gamma) > 4 + 1e-12:
            raise ValueError(
                f"time step too large for this medium and damping (max q={self.q.max():.3g}, gamma={self.gamma:.3g})"
            )

    def _advance(self, u, up, out, m, nudge, clamp):
        if not _kernels.leapfrog(u, up, self.q, self.gamma, out):
            raise InstabilityError(m + 1)
        if nudge is not None:
            idx = nudge.series.mask.flat_index
            d_cur, d_prev = nudge.frames_at(m)
            kdt = nudge.gain * self.ts.dt
            du = u.ravel()[idx] - up.ravel()[idx]
            out.ravel()[idx] -= kdt * nudge.series.mask.weights * (du - (d_cur - d_prev))
        if clamp is not None:
            clamp(out, m + 1)

    def step(self, state: WaveState, nudge: NudgingSpec | None = None) -> WaveState:
        u = np.ascontiguousarray(state.u_curr, dtype=float)
        up = np.ascontiguousarray(state.u_prev, dtype=float)
        out = np.empty_like(u)
        self._advance(u, up, out, state.step_index, nudge, None)
        return WaveState(out, u.copy(), state.step_index + 1)

    def run(
        self,
        state: WaveState,
        n: int,
        nudge: NudgingSpec | None = None,
        record: ObservationSeries | None = None,
        clamp=None,
        callback=None,
    ) -> WaveState:
        """Advance ``n`` steps.

        ``record`` stores ``u_curr`` into the series at every visited step
        index (the initial one included). ``clamp(u, m)`` may overwrite the
        new level ``m`` in place. ``callback(u_curr, u_prev, m)`` is called
        after each step with the new state.
        """
        u = np.array(state.u_curr, dtype=float, order="C")
        up = np.array(state.u_prev, dtype=float, order="C")
        out = np.empty_like(u)
        m = state.step_index
        if record is not None:
            record.record_array(u, m)
        for _ in range(n):
            self._advance(u, up, out, m, nudge, clamp)
            up, u, out = u, out, up
            m += 1
            if record is not None:
                record.record_array(u, m)
            if callback is not None:
                callback(u, up, m)
        return WaveState(u, up, m)

    def run_transpose(self, sources: np.ndarray, flat_index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Reverse sweep of the transposed recursion.

        ``sources[n]`` is injected on ``flat_index`` at level ``n`` for
        ``n = N..0``. Returns the adjoint variables at levels 0 and 1.
        """
        n_steps = sources.shape[0] - 1
        shape = self.grid.shape
        lam = np.zeros(shape)  # level n+1
        lamp = np.zeros(shape)  # level n+2
        out = np.zeros(shape)
        out.ravel()[flat_index] += sources[n_steps]
        lam, out = out, lam
        for n in range(n_steps - 1, -1, -1):
            if not _kernels.leapfrog_transpose(lam, lamp, self.q, self.gamma, out):
                raise InstabilityError(n_steps - n)
            out.ravel()[flat_index] += sources[n]
            lamp, lam, out = lam, out, lamp
        # lam holds level 0, lamp level 1
        return lam, lamp


def step(
    state: WaveState,
    grid: GridSpec,
    speed: np.ndarray,
    ts: TimeSpec,
    atten: AttenuationSpec | None = None,
    nudge: NudgingSpec | None = None,
) -> WaveState:
    return Propagator(grid, speed, ts, atten or AttenuationSpec()).step(state, nudge)


def energy(state: WaveState, ts: TimeSpec, grid: GridSpec, speed: np.ndarray | None = None) -> float:
    """Discrete wave energy of a leapfrog state.

    Kinetic part ``1/2 ||(u_curr - u_prev)/dt||^2`` (weighted by ``1/c^2``
    when ``speed`` is given); potential part ``1/2 <grad u_curr, grad u_prev>``
    with face-centred differences. This is the quantity the undamped scheme
    conserves exactly; for a state at rest it reduces to ``1/2 ||grad u||^2``.
    """
    u = np.ascontiguousarray(state.u_curr, dtype=float)
    up = np.ascontiguousarray(state.u_prev, dtype=float)
    vel = (u - up) / ts.dt
    if speed is not None:
        vel = vel / speed
    lap = np.empty_like(u)
    _kernels.lap5_undivided(u, lap)
    kinetic = 0.5 * grid.dx**2 * float(np.sum(vel * vel))
    potential = -0.5 * float(np.sum(up * lap))
    return kinetic + potential
