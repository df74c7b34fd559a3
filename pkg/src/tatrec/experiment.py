"""Experiment configs, end-to-end pipelines and run reports."""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .bfn import BfnParams, bfn_run, default_truncation_radius
from .errors import ConfigError, TatrecError
from .media import PhantomKind, SpeedKind, make_phantom, make_speed
from .pgm import emit_pgm
from .sensing import FULL_CIRCLE, UPPER_HALF, ObservationSeries, SensorSpec, add_noise, build_mask, save_series
from .trace import IterationTrace
from .variational import CgParams, apply_W, cg_solve
from .timereversal import neumann_series, time_reversal
from .wave import AttenuationSpec, GridSpec, TimeSpec, make_timespec

METHODS = ("BFN", "CG", "NS", "TR")
ARCS = {"full": FULL_CIRCLE, "upper_half": UPPER_HALF}
DEFAULT_ATTENUATION = {"BFN": 2.0, "CG": 1.7, "NS": 1.7}


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    description: str = ""
    phantom: str = "shepp_logan"
    supersample: int = 4
    speed: str = "constant"
    speed_value: float = 1.0
    sensor_arc: str = "full"
    sensor_count: int = 800
    sensor_radius: float = math.sqrt(2) / 2
    sigma: int = 1
    band_halfwidth: int = 2
    noise_level: float = 0.0
    seed: int = 0
    method: str = "BFN"
    iters: int = 10
    scale: int = 128
    final_time: float = math.sqrt(2)
    cfl_factor: float = 0.5
    pad_cells: int = 4
    k_factor: float = 0.9
    alpha: float = 0.0
    attenuation_exponent: float | None = None
    attenuation: bool | None = None
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, msg):
            raise ConfigError(f"{name}: {msg} (got {getattr(self, name)!r})")

        try:
            PhantomKind(self.phantom)
        except ValueError:
            bad("phantom", f"expected one of {[k.value for k in PhantomKind]}")
        try:
            SpeedKind(self.speed)
        except ValueError:
            bad("speed", f"expected one of {[k.value for k in SpeedKind]}")
        if self.method not in METHODS:
            bad("method", f"expected one of {METHODS}")
        if self.sensor_arc not in ARCS:
            bad("sensor_arc", f"expected one of {sorted(ARCS)}")
        if self.supersample < 1:
            bad("supersample", "must be >= 1")
        if self.sigma < 1:
            bad("sigma", "must be >= 1")
        if self.sensor_count < 1 or self.sensor_count // self.sigma < 1:
            bad("sensor_count", "no active sensor")
        if self.noise_level < 0:
            bad("noise_level", "must be >= 0")
        if self.iters < 0:
            bad("iters", "must be >= 0")
        if self.scale < 8:
            bad("scale", "must be >= 8")
        if not 0 < self.cfl_factor <= 1 / math.sqrt(2):
            bad("cfl_factor", "must be in (0, 1/sqrt(2)]")
        if not 0 <= self.k_factor < 2:
            bad("k_factor", "k dt must be in [0, 2)")
        if self.alpha < 0:
            bad("alpha", "must be >= 0")
        if self.speed_value <= 0:
            bad("speed_value", "must be > 0")
        if not 0.5 * math.sqrt(2) <= self.sensor_radius < 0.5 + self.final_time:
            bad("sensor_radius", "sensors must surround the object window")

    def attenuation_spec(self) -> AttenuationSpec:
        """Per-method damping: on by default only for noisy data, never for TR."""
        enabled = self.attenuation
        if enabled is None:
            enabled = self.noise_level > 0 and self.method in DEFAULT_ATTENUATION
        if not enabled:
            return AttenuationSpec()
        exponent = self.attenuation_exponent or DEFAULT_ATTENUATION.get(self.method, 2.0)
        return AttenuationSpec(True, exponent)

    def acquisition_key(self) -> tuple:
        """Fields that determine the simulated data (shared across methods)."""
        return tuple(
            getattr(self, k)
            for k in (
                "phantom supersample speed speed_value sensor_arc sensor_count sensor_radius sigma band_halfwidth "
                "noise_level seed scale final_time cfl_factor pad_cells"
            ).split()
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_LIST_KEYS = {"methods": "method", "speeds": "speed", "sigmas": "sigma", "seeds": "seed"}


def expand_config(raw: dict, **overrides) -> list[ExperimentConfig]:
    """One config per combination of the list-valued keys ``methods``,
    ``speeds``, ``sigmas`` and ``seeds``. Non-``None`` overrides win."""
    raw = dict(raw)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if "method" in overrides:
        raw.pop("methods", None)
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known - set(_LIST_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    combos = [{}]
    for list_key, key in _LIST_KEYS.items():
        if list_key in raw and key not in overrides:
            values = raw.pop(list_key)
            combos = [dict(c, **{key: v}) for c in combos for v in values]
        else:
            raw.pop(list_key, None)
    out = []
    for c in combos:
        kwargs = {**raw, **c, **overrides}
        suffix = "".join(f"_{k}{c[k]}" if k != "method" else "" for k in c)
        if suffix and "name" in kwargs:
            kwargs["name"] = kwargs["name"] + suffix
        try:
            out.append(ExperimentConfig(**kwargs))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    return out


def load_config(path, **overrides) -> list[ExperimentConfig]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    raw.setdefault("name", path.stem)
    return expand_config(raw, **overrides)


def shipped_configs() -> dict[str, Path]:
    root = resources.files("tatrec") / "configs"
    return {p.name[:-5]: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".json")}


@dataclass
class Setup:
    """Grid, medium and simulated acquisition for one config."""

    grid: GridSpec
    speed: np.ndarray
    ts: TimeSpec
    truth: np.ndarray
    sensors: SensorSpec
    clean: ObservationSeries
    data: ObservationSeries

    @property
    def mask(self):
        return self.data.mask

    @property
    def truncation_radius(self) -> float:
        return default_truncation_radius(self.data)


def build_setup(cfg: ExperimentConfig) -> Setup:
    grid = GridSpec.for_object_window(cfg.scale, margin=cfg.final_time, pad_cells=cfg.pad_cells)
    speed = make_speed(cfg.speed, grid, cfg.speed_value)
    ts = make_timespec(grid, speed, cfg.final_time, cfg.cfl_factor)
    truth = make_phantom(cfg.phantom, grid, supersample=cfg.supersample)
    sensors = SensorSpec(cfg.sensor_radius, ARCS[cfg.sensor_arc], cfg.sensor_count, cfg.sigma)
    mask = build_mask(sensors, grid, cfg.band_halfwidth)
    clean = apply_W(truth, grid, speed, ts, mask)
    data = add_noise(clean, cfg.noise_level, cfg.seed)
    return Setup(grid, speed, ts, truth, sensors, clean, data)


def run_engine(cfg: ExperimentConfig, setup: Setup, keep_all: bool = False) -> IterationTrace:
    g, c, ts = setup.grid, setup.speed, setup.ts
    atten = cfg.attenuation_spec()
    radius = setup.truncation_radius
    if cfg.method == "BFN":
        params = BfnParams(cfg.iters, attenuation=atten, truncation_radius=radius, k_factor=cfg.k_factor)
        return bfn_run(setup.data, params, g, c, ts, truth=setup.truth, keep_all=keep_all)
    if cfg.method == "CG":
        params = CgParams(cfg.alpha, cfg.iters, atten, radius)
        return cg_solve(setup.data, params, g, c, ts, truth=setup.truth, keep_all=keep_all)
    if cfg.method == "NS":
        return neumann_series(setup.data, cfg.iters, g, c, ts, setup.truth, atten, radius, keep_all=keep_all)
    t0 = time.perf_counter()
    f = time_reversal(setup.data, g, c, ts, atten, radius)
    trace = IterationTrace("TR")
    trace.append(f, time.perf_counter() - t0, setup.truth)
    return trace


@dataclass
class RunReport:
    config: dict
    method: str
    errors: list[float] = field(default_factory=list)
    h1_errors: list[float] = field(default_factory=list)
    best_error: float = math.nan
    best_iteration: int = -1
    seconds: list[float] = field(default_factory=list)
    total_seconds: float = 0.0
    artifacts: dict[str, str] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    status: str = "ok"
    trace: IterationTrace | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("trace")
        return d


def run_experiment(cfg: ExperimentConfig, setup: Setup | None = None, write: bool = True) -> RunReport:
    """Simulate the acquisition (unless ``setup`` is given), run the engine,
    and write images, the error CSV and ``report.json`` under ``cfg.out``."""
    t_start = time.perf_counter()
    report = RunReport(cfg.to_dict(), cfg.method)
    try:
        setup = setup or build_setup(cfg)
        trace = run_engine(cfg, setup)
    except TatrecError as exc:
        report.status = f"error: {type(exc).__name__}: {exc}"
        report.total_seconds = time.perf_counter() - t_start
        if write and cfg.out:
            _write_report(report, Path(cfg.out) / cfg.method)
        return report
    report.trace = trace
    report.errors = list(trace.rel_errors)
    report.h1_errors = list(trace.h1_errors)
    report.best_error, report.best_iteration = trace.best()
    report.seconds = list(trace.seconds)
    report.flags = list(trace.flags)
    report.total_seconds = time.perf_counter() - t_start
    if write and cfg.out:
        out = Path(cfg.out) / cfg.method
        out.mkdir(parents=True, exist_ok=True)
        trace.to_csv(out / "errors.csv", include_timing=False)
        win = setup.grid.window()
        report.artifacts = {
            "errors_csv": str(out / "errors.csv"),
            "best_pgm": str(emit_pgm(trace.best_estimate[win], out / "best.pgm")),
            "final_pgm": str(emit_pgm(trace.final[win], out / "final.pgm")),
            "truth_pgm": str(emit_pgm(setup.truth[win], out / "truth.pgm")),
        }
        _write_report(report, out)
    return report


def _write_report(report: RunReport, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2))


def run_configs(configs: list[ExperimentConfig], write: bool = True, save_data: bool = False) -> list[RunReport]:
    """Run configs in order, sharing the acquisition between configs that differ only by method."""
    reports = []
    cache: dict[tuple, Setup] = {}
    for cfg in configs:
        key = cfg.acquisition_key()
        if key not in cache:
            cache.clear()
            try:
                cache[key] = build_setup(cfg)
            except TatrecError:
                reports.append(run_experiment(cfg, write=write))
                continue
            if save_data and cfg.out:
                Path(cfg.out).mkdir(parents=True, exist_ok=True)
                save_series(cache[key].data, Path(cfg.out) / "data.tatobs")
        reports.append(run_experiment(cfg, cache[key], write=write))
    return reports
