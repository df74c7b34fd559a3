"""Test objects and sound-speed maps."""

from __future__ import annotations

import math
import os
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import AssetNotFoundError
from .pgm import image_to_field, read_pgm
from .wave import GridSpec

OBJECT_HALF_WIDTH = 0.5
SUPERSAMPLE = 4  # sub-samples per cell axis for the analytic phantoms
SPEED_DISC_RADIUS = math.sqrt(2) / 2


class PhantomKind(str, Enum):
    SQUARES = "squares"
    SHEPP_LOGAN = "shepp_logan"
    SKULL = "skull"


class SpeedKind(str, Enum):
    CONSTANT = "constant"
    NTS = "nts"
    TS1 = "ts1"
    TS2 = "ts2"


# value, semi-axis x, semi-axis y, centre x, centre y, rotation (deg); unit square [-1, 1]^2
SHEPP_LOGAN_ELLIPSES = [
    (1.0, 0.6900, 0.9200, 0.0000, 0.0000, 0),
    (-0.8, 0.6624, 0.8740, 0.0000, -0.0184, 0),
    (-0.2, 0.1100, 0.3100, 0.2200, 0.0000, -18),
    (-0.2, 0.1600, 0.4100, -0.2200, 0.0000, 18),
    (0.1, 0.2100, 0.2500, 0.0000, 0.3500, 0),
    (0.1, 0.0460, 0.0460, 0.0000, 0.1000, 0),
    (0.1, 0.0460, 0.0460, 0.0000, -0.1000, 0),
    (0.1, 0.0460, 0.0230, -0.0800, -0.6050, 0),
    (0.1, 0.0230, 0.0230, 0.0000, -0.6060, 0),
    (0.1, 0.0230, 0.0460, 0.0600, -0.6050, 0),
]

# x_min, x_max, y_min, y_max, value
SQUARES = [
    (-0.35, -0.05, 0.05, 0.35, 1.0),
    (0.05, 0.30, -0.10, 0.30, 0.7),
    (-0.25, 0.20, -0.35, -0.18, 0.4),
]


def assets_dir() -> Path:
    env = os.environ.get("TATREC_ASSETS")
    return Path(env) if env else Path(__file__).parent / "assets"


def _window(grid: GridSpec):
    X, Y = grid.mesh()
    inside = (np.abs(X) < OBJECT_HALF_WIDTH) & (np.abs(Y) < OBJECT_HALF_WIDTH)
    return X, Y, inside


def _cell_average(grid: GridSpec, point_fn, n: int) -> np.ndarray:
    """Average of ``point_fn(X, Y)`` over an ``n x n`` lattice inside each cell.

    ``n = 1`` is plain cell-centre sampling.
    """
    if n < 1:
        raise ValueError(f"supersample must be >= 1, got {n}")
    X, Y, inside = _window(grid)
    offsets = ((np.arange(n) + 0.5) / n - 0.5) * grid.dx
    f = np.zeros(grid.shape)
    for ox in offsets:
        for oy in offsets:
            f += point_fn(X + ox, Y + oy)
    f /= n * n
    f[~inside] = 0.0
    return f


def _ellipses(X, Y) -> np.ndarray:
    # ellipse table lives on [-1, 1]^2, the object window is [-0.5, 0.5]^2
    xs, ys = X / OBJECT_HALF_WIDTH, Y / OBJECT_HALF_WIDTH
    f = np.zeros(X.shape)
    for value, a, b, cx, cy, rot in SHEPP_LOGAN_ELLIPSES:
        th = math.radians(rot)
        xr = (xs - cx) * math.cos(th) + (ys - cy) * math.sin(th)
        yr = -(xs - cx) * math.sin(th) + (ys - cy) * math.cos(th)
        f[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return f


def _rectangles(X, Y) -> np.ndarray:
    f = np.zeros(X.shape)
    for x_lo, x_hi, y_lo, y_hi, value in SQUARES:
        f[(X >= x_lo) & (X < x_hi) & (Y >= y_lo) & (Y < y_hi)] = value
    return f


def shepp_logan(grid: GridSpec, supersample: int = SUPERSAMPLE) -> np.ndarray:
    """Ellipse phantom, cell-averaged, scaled so that its maximum is 1."""
    f = _cell_average(grid, _ellipses, supersample)
    f = np.clip(f, 0.0, None)  # overlapping intensities cancel up to round-off
    return f / f.max()


def squares(grid: GridSpec, supersample: int = SUPERSAMPLE) -> np.ndarray:
    return _cell_average(grid, _rectangles, supersample)


def load_raster(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise AssetNotFoundError(f"raster asset not found: {path}")
    return read_pgm(path)


def raster_phantom(grid: GridSpec, img: np.ndarray) -> np.ndarray:
    """Nearest-neighbour resampling of an image (rows top first) onto the object window."""
    src = image_to_field(img)  # src[i, j], i along x, j along y
    X, Y, inside = _window(grid)
    n_x, n_y = src.shape
    i = np.clip(np.floor((X[inside] + OBJECT_HALF_WIDTH) * n_x).astype(int), 0, n_x - 1)
    j = np.clip(np.floor((Y[inside] + OBJECT_HALF_WIDTH) * n_y).astype(int), 0, n_y - 1)
    f = np.zeros(grid.shape)
    f[inside] = src[i, j]
    return f


def skull(grid: GridSpec, path=None) -> np.ndarray:
    img = load_raster(path or assets_dir() / "skull.pgm")
    return raster_phantom(grid, img)


def make_phantom(kind, grid: GridSpec, asset=None, supersample: int = SUPERSAMPLE) -> np.ndarray:
    """Test object on ``grid``. Analytic phantoms are averaged over
    ``supersample**2`` points per cell; the skull raster is nearest-neighbour."""
    kind = PhantomKind(kind)
    if kind is PhantomKind.SHEPP_LOGAN:
        return shepp_logan(grid, supersample)
    if kind is PhantomKind.SQUARES:
        return squares(grid, supersample)
    return skull(grid, asset)


def speed_formula(kind, x, y, c0: float = 1.0):
    """Sound speed inside the disc, evaluated pointwise."""
    kind = SpeedKind(kind)
    if kind is SpeedKind.CONSTANT:
        return np.full(np.broadcast(x, y).shape, float(c0))
    if kind is SpeedKind.NTS:
        return 1 + 0.2 * np.sin(2 * np.pi * x) + 0.1 * np.cos(2 * np.pi * y)
    if kind is SpeedKind.TS1:
        r2 = x**2 + y**2
        r = np.sqrt(r2)
        return 9 * r2 / (1 + 9 * r2) + np.exp(-90 * r2) - 0.4 * np.exp(-10 * (3 * r - 2) ** 2)
    return 1.25 + np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)


def make_speed(kind, grid: GridSpec, c0: float = 1.0) -> np.ndarray:
    """Speed map: the chosen formula inside the disc of radius sqrt(2)/2, 1 outside.

    The constant map is ``c0`` everywhere. The jump at the disc edge is kept
    sharp.
    """
    kind = SpeedKind(kind)
    if kind is SpeedKind.CONSTANT:
        return np.full(grid.shape, float(c0))
    X, Y = grid.mesh()
    c = np.ones(grid.shape)
    disc = np.hypot(X, Y) < SPEED_DISC_RADIUS
    c[disc] = speed_formula(kind, X[disc], Y[disc])
    return c
