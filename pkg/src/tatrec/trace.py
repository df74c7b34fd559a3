"""Error metrics and per-iteration traces shared by all engines."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import UndefinedMetricError


def rel_mse(est: np.ndarray, truth: np.ndarray) -> float:
    """Relative error in percent, ``100 ||est - truth|| / ||truth||``."""
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch {est.shape} vs {truth.shape}")
    nt = float(np.linalg.norm(truth))
    if nt == 0.0:
        raise UndefinedMetricError("relative error against a zero field")
    return 100.0 * float(np.linalg.norm(est - truth)) / nt


def h1_seminorm(f: np.ndarray) -> float:
    """Discrete H1 seminorm (face differences, zero outside); dimensionless in 2D."""
    f = np.ascontiguousarray(f, dtype=float)
    lap = np.empty_like(f)
    _kernels.lap5_undivided(f, lap)
    return math.sqrt(max(-float(np.sum(f * lap)), 0.0))


def rel_h1(est: np.ndarray, truth: np.ndarray) -> float:
    nt = h1_seminorm(truth)
    if nt == 0.0:
        raise UndefinedMetricError("relative H1 error against a constant field")
    return 100.0 * h1_seminorm(est - truth) / nt


@dataclass
class IterationTrace:
    """Estimates ``f_0 .. f_n`` of an iterative engine, index 0 being the start.

    Unless ``keep_all`` is set only the first, last and best estimates are
    kept in memory; the others are replaced by ``None``.
    """

    method: str
    estimates: list[np.ndarray] = field(default_factory=list)
    rel_errors: list[float] = field(default_factory=list)
    h1_errors: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    extras: dict[str, list[float]] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    keep_all: bool = False

    def append(self, est: np.ndarray, seconds: float, truth: np.ndarray | None = None, **extra):
        self.estimates.append(est.copy())
        if truth is not None:
            self.rel_errors.append(rel_mse(est, truth))
            self.h1_errors.append(rel_h1(est, truth))
        self.seconds.append(seconds)
        for k, v in extra.items():
            self.extras.setdefault(k, []).append(float(v))
        if not self.keep_all:
            keep = {0, len(self.estimates) - 1}
            if self.rel_errors:
                keep.add(self.best()[1])
            for i in range(1, len(self.estimates) - 1):
                if i not in keep:
                    self.estimates[i] = None

    def __len__(self) -> int:
        return len(self.estimates)

    @property
    def final(self) -> np.ndarray:
        return self.estimates[-1]

    def best(self) -> tuple[float, int]:
        if not self.rel_errors:
            raise ValueError("no errors recorded (truth unknown)")
        i = int(np.argmin(self.rel_errors))
        return self.rel_errors[i], i

    @property
    def best_estimate(self) -> np.ndarray:
        return self.estimates[self.best()[1]]

    def ratios(self) -> np.ndarray:
        e = np.asarray(self.rel_errors)
        return e[1:] / e[:-1]

    def to_csv(self, path, include_timing: bool = True):
        cols = ["iteration", "rel_error_pct", "h1_error"] + (["seconds"] if include_timing else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i in range(len(self)):
                row = [
                    i,
                    repr(self.rel_errors[i]) if self.rel_errors else "",
                    repr(self.h1_errors[i]) if self.h1_errors else "",
                ]
                if include_timing:
                    row.append(f"{self.seconds[i]:.6f}")
                w.writerow(row)
