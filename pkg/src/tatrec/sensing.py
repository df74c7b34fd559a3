"""Sensor ring, observation mask and recorded pressure series."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import GeometryError
from .wave import GridSpec, WaveState

FULL_CIRCLE = (0.0, 2 * math.pi)
UPPER_HALF = (0.0, math.pi)


@dataclass(frozen=True)
class SensorSpec:
    """``count`` sensors evenly spaced on the full circle of ``radius``.

    Only the sensors whose angle lies in ``arc`` and whose index is a multiple
    of ``sigma`` are active.
    """

    radius: float = math.sqrt(2) / 2
    arc: tuple[float, float] = FULL_CIRCLE
    count: int = 800
    sigma: int = 1

    def __post_init__(self):
        if self.sigma < 1:
            raise ValueError("sigma must be >= 1")
        if self.count // self.sigma < 1:
            raise ValueError("no active sensor left after subsampling")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def angles(self) -> np.ndarray:
        k = np.arange(0, self.count, self.sigma)
        theta = 2 * math.pi * k / self.count
        lo, hi = self.arc
        eps = 1e-12
        return theta[(theta >= lo - eps) & (theta <= hi + eps)]

    def positions(self) -> np.ndarray:
        theta = self.angles()
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])


@dataclass(frozen=True, eq=False)
class MaskField:
    """Discrete observation weight: 1 on the sensor cells, rolling off to 0
    ``band_halfwidth + 1/2`` cells away from the nearest active sensor."""

    grid: GridSpec
    values: np.ndarray
    band_halfwidth: int = 2

    @cached_property
    def cells(self) -> np.ndarray:
        """(n_cells, 2) indices of the support, in row-major order."""
        return np.argwhere(self.values > 0)

    @cached_property
    def flat_index(self) -> np.ndarray:
        return np.ravel_multi_index(self.cells.T, self.grid.shape)

    @cached_property
    def weights(self) -> np.ndarray:
        return self.values.ravel()[self.flat_index]

    @property
    def n_cells(self) -> int:
        return len(self.flat_index)


def build_mask(spec: SensorSpec, grid: GridSpec, band_halfwidth: int = 2) -> MaskField:
    pos = spec.positions()
    reach = (band_halfwidth + 0.5) * grid.dx
    x_lo, x_hi, y_lo, y_hi = grid.extent()
    margin = reach + grid.dx
    if (
        pos[:, 0].min() - margin < x_lo
        or pos[:, 0].max() + margin > x_hi
        or pos[:, 1].min() - margin < y_lo
        or pos[:, 1].max() + margin > y_hi
    ):
        raise GeometryError(f"sensor ring of radius {spec.radius} does not fit in the grid")

    r = grid.radius()
    near_ring = np.abs(r - spec.radius) < reach + grid.dx
    cand = np.argwhere(near_ring)
    X, Y = grid.mesh()
    pts = np.column_stack([X[near_ring], Y[near_ring]])
    rho, _ = cKDTree(pos).query(pts)
    rho = rho / grid.dx

    values = np.zeros(grid.shape)
    h = band_halfwidth + 0.5
    inside = rho < h
    if band_halfwidth > 0:
        phi = np.clip((h - rho[inside]) / band_halfwidth, 0.0, 1.0)
    else:
        phi = np.ones(int(inside.sum()))
    values[cand[inside, 0], cand[inside, 1]] = phi

    # the cell holding each sensor gets full weight
    si, sj = grid.nearest_index(pos[:, 0], pos[:, 1])
    values[si, sj] = 1.0
    return MaskField(grid, values, band_halfwidth)


@dataclass(eq=False)
class ObservationSeries:
    mask: MaskField
    frames: np.ndarray
    dt: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[1] != self.mask.n_cells:
            raise ValueError(f"frames of shape {self.frames.shape} do not match {self.mask.n_cells} mask cells")

    @classmethod
    def empty(cls, mask: MaskField, n_steps: int, dt: float) -> ObservationSeries:
        return cls(mask, np.zeros((n_steps + 1, mask.n_cells)), dt)

    @property
    def n_steps(self) -> int:
        return self.frames.shape[0] - 1

    @property
    def cell_index(self) -> np.ndarray:
        return self.mask.cells

    def record_array(self, u: np.ndarray, step_index: int):
        if not 0 <= step_index <= self.n_steps:
            raise IndexError(f"step {step_index} outside recorded range 0..{self.n_steps}")
        self.frames[step_index] = u.ravel()[self.mask.flat_index]

    def copy(self) -> ObservationSeries:
        return replace(self, frames=self.frames.copy(), meta=dict(self.meta))

    def with_frames(self, frames: np.ndarray) -> ObservationSeries:
        return replace(self, frames=frames, meta=dict(self.meta))

    def __sub__(self, other: ObservationSeries) -> ObservationSeries:
        return self.with_frames(self.frames - other.frames)

    def __add__(self, other: ObservationSeries) -> ObservationSeries:
        return self.with_frames(self.frames + other.frames)

    def __mul__(self, a: float) -> ObservationSeries:
        return self.with_frames(self.frames * a)

    __rmul__ = __mul__

    def dot(self, other: ObservationSeries) -> float:
        """Space-time quadrature ``dt dx^2 sum(a b)``."""
        return self.dt * self.mask.grid.dx**2 * float(np.sum(self.frames * other.frames))

    def norm(self) -> float:
        return math.sqrt(self.dot(self))


def record(state: WaveState, series: ObservationSeries, step_index: int | None = None):
    series.record_array(state.u_curr, state.step_index if step_index is None else step_index)


def add_noise(series: ObservationSeries, level: float, seed=None) -> ObservationSeries:
    """Multiplicative white Gaussian noise: ``s -> s (1 + level g)``."""
    if level < 0:
        raise ValueError(f"noise level must be non-negative, got {level}")
    if level == 0:
        return series.copy()
    g = np.random.default_rng(seed).standard_normal(series.frames.shape)
    out = series.with_frames(series.frames * (1.0 + level * g))
    out.meta.update(noise_level=level, noise_seed=seed)
    return out


MAGIC = b"TATOBS1"
_HEADER = struct.Struct("<7sqqdqq")


def save_series(series: ObservationSeries, path):
    """Flat little-endian binary: header, int64 cell list, float64 frames."""
    g = series.mask.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.nx, g.ny, series.dt, series.n_steps, series.mask.n_cells))
        fh.write(np.ascontiguousarray(series.mask.cells, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(series.frames, dtype="<f8").tobytes())


def load_series(path, grid: GridSpec | None = None, mask: MaskField | None = None) -> ObservationSeries:
    """Read a series written by :func:`save_series`.

    The file does not store the mask weights; pass the ``mask`` used for the
    acquisition, or a ``grid`` to get an indicator mask on the stored cells.
    """
    raw = Path(path).read_bytes()
    magic, nx, ny, dt, n_steps, n_cells = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not an observation series file")
    off = _HEADER.size
    cells = np.frombuffer(raw, dtype="<i8", count=2 * n_cells, offset=off).reshape(n_cells, 2)
    off += cells.nbytes
    frames = np.frombuffer(raw, dtype="<f8", count=(n_steps + 1) * n_cells, offset=off)
    frames = frames.reshape(n_steps + 1, n_cells).astype(float)
    if mask is None:
        if grid is None:
            raise ValueError("need the acquisition grid or mask to rebuild the series")
        values = np.zeros(grid.shape)
        values[cells[:, 0], cells[:, 1]] = 1.0
        mask = MaskField(grid, values, 0)
    g = mask.grid
    if (g.nx, g.ny) != (nx, ny) or not np.array_equal(mask.cells, cells):
        raise ValueError(f"{path}: stored cells do not match the given mask")
    return ObservationSeries(mask, frames, dt)
