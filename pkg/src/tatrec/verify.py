"""Numerical checks shared by the CLI, the acceptance tests and the scripts.

Every suite returns a list of :class:`Check` records holding the measured
value, the bound it is compared with and the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import lap5_undivided
from .experiment import ExperimentConfig, build_setup, run_configs, run_engine
from .media import make_phantom, make_speed
from .sensing import FULL_CIRCLE, UPPER_HALF, ObservationSeries, SensorSpec, build_mask
from .variational import apply_W, apply_W_adjoint, field_dot
from .wave import AttenuationSpec, GridSpec, NudgingSpec, Propagator, WaveState, energy, make_timespec

SPEEDS = ("constant", "nts", "ts1", "ts2")

# reference best errors (percent, at most 10 iterations, 256 cells across the object)
REFERENCE_COMPLETE = {
    "constant": {"BFN": 2.3, "CG": 7.1, "NS": 1.4},
    "nts": {"BFN": 3.2, "CG": 7.5, "NS": 2.3},
    "ts1": {"BFN": 7.1, "CG": 16.5, "NS": 1.6},
    "ts2": {"BFN": 7.0, "CG": 10.7, "NS": 6.6},
}
REFERENCE_HALF = {"BFN": 10.6, "CG": 16.0, "NS": 6.2}
BAND = 2.5


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.detail}]" if self.detail else ""
        return f"{verdict}  {self.name}: {self.value:.6g} (bound {self.bound:.6g}){extra}"


def all_passed(checks: list[Check]) -> bool:
    return all(c.passed for c in checks)


# -- adjoint -----------------------------------------------------------------


def small_grid(n: int = 64, half_width: float = 0.85) -> GridSpec:
    """``n x n`` grid on ``[-half_width, half_width]^2``, wide enough for the sensor ring."""
    return GridSpec(n, n, 2 * half_width / n, -half_width, -half_width)


def dot_test(grid, speed, ts, mask, atten=None, seed: int = 0) -> float:
    """``|<W f, g> - <f, W* g>| / (||W f|| ||g||)`` for random ``f`` and ``g``."""
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(grid.shape)
    g = ObservationSeries(mask, rng.standard_normal((ts.n_steps + 1, mask.n_cells)), ts.dt)
    wf = apply_W(f, grid, speed, ts, mask, atten)
    lhs = wf.dot(g)
    rhs = field_dot(f, apply_W_adjoint(g, grid, speed, ts, atten), grid)
    return abs(lhs - rhs) / (wf.norm() * g.norm())


def adjoint_suite(n: int = 64, tol: float = 1e-6, atten: AttenuationSpec | None = None) -> list[Check]:
    grid = small_grid(n)
    layouts = [(f"full sigma={s}", FULL_CIRCLE, s) for s in (1, 2, 4, 8)] + [("upper half", UPPER_HALF, 1)]
    checks = []
    for sp in SPEEDS:
        speed = make_speed(sp, grid)
        ts = make_timespec(grid, speed, math.sqrt(2))
        for label, arc, sigma in layouts:
            mask = build_mask(SensorSpec(arc=arc, sigma=sigma), grid)
            err = dot_test(grid, speed, ts, mask, atten, seed=len(checks))
            checks.append(Check(f"adjoint {sp} {label}", err, tol, err <= tol))
    return checks


# -- energy ------------------------------------------------------------------


def naive_energy(state: WaveState, dt: float, grid: GridSpec) -> float:
    """``1/2 ||(u_n - u_{n-1})/dt||^2 + 1/2 ||grad u_n||^2`` (not conserved exactly by leapfrog)."""
    u = np.ascontiguousarray(state.u_curr)
    lap = np.empty_like(u)
    lap5_undivided(u, lap)
    vel = (u - state.u_prev) / dt
    return 0.5 * grid.dx**2 * float(np.sum(vel * vel)) - 0.5 * float(np.sum(u * lap))


def energy_conservation(scale: int = 256, tol: float = 0.01) -> Check:
    grid = GridSpec.for_object_window(scale)
    speed = make_speed("constant", grid)
    ts = make_timespec(grid, speed, math.sqrt(2))
    f = make_phantom("shepp_logan", grid)
    start = WaveState.at_rest(f)
    end = Propagator(grid, speed, ts).run(start, ts.n_steps)
    drift = abs(energy(end, ts, grid, speed) / energy(start, ts, grid, speed) - 1)
    naive = abs(naive_energy(end, ts.dt, grid) / naive_energy(start, ts.dt, grid) - 1)
    return Check(f"energy drift, Shepp-Logan, scale {scale}", drift, tol, drift <= tol, f"one-level energy drift {naive:.3e}")


def energy_identity_mismatch(scale: int, gain: float = 5.0, width: float = 0.1) -> float:
    """Relative gap between the energy lost by a nudged run towards zero data
    and ``k int sum phi (du/dt)^2``, for a Gaussian initial pressure."""
    grid = GridSpec.for_object_window(scale)
    speed = make_speed("constant", grid)
    ts = make_timespec(grid, speed, math.sqrt(2))
    mask = build_mask(SensorSpec(), grid)
    zero = ObservationSeries.empty(mask, ts.n_steps, ts.dt)
    X, Y = grid.mesh()
    f = np.exp(-(X**2 + Y**2) / (2 * width**2))
    idx, w = mask.flat_index, mask.weights
    lost = 0.0

    def accumulate(u, up, m):
        nonlocal lost
        vel = (u.ravel()[idx] - up.ravel()[idx]) / ts.dt
        lost += gain * ts.dt * grid.dx**2 * float(np.sum(w * vel * vel))

    start = WaveState.at_rest(f)
    prop = Propagator(grid, speed, ts)
    end = prop.run(start, ts.n_steps, nudge=NudgingSpec(gain, zero, "forward"), callback=accumulate)
    drop = energy(start, ts, grid) - energy(end, ts, grid)
    return abs(drop - lost) / lost


def energy_identity_suite(scales=(64, 128, 256), gain: float = 5.0) -> list[Check]:
    gaps = [energy_identity_mismatch(s, gain) for s in scales]
    checks = [
        Check(f"energy identity gap, scale {s} -> {s2}", g2, g, g2 < g)
        for s, s2, g, g2 in zip(scales, scales[1:], gaps, gaps[1:])
    ]
    return checks


def energy_suite(scale: int = 256) -> list[Check]:
    return [energy_conservation(scale)] + energy_identity_suite()


# -- reconstructions -----------------------------------------------------------


def contraction_suite(scale: int = 128, iters: int = 10, final_bound: float = 8.0) -> list[Check]:
    cfg = ExperimentConfig(method="BFN", iters=iters, scale=scale)
    trace = run_engine(cfg, build_setup(cfg))
    ratios = trace.ratios()
    worst = float(ratios.max())
    return [
        Check(f"BFN error ratio, iterations 1-{iters}", worst, 1.0, worst < 1.0, " ".join(f"{r:.3f}" for r in ratios)),
        Check(f"BFN final error after {iters} iterations (%)", trace.rel_errors[-1], final_bound, trace.rel_errors[-1] <= final_bound),
    ]


def best_errors(configs: list[ExperimentConfig]) -> dict[tuple, float]:
    """Best error (percent) of each config, keyed by ``(method, speed, sigma, seed)``."""
    out = {}
    for cfg, rep in zip(configs, run_configs(configs, write=False)):
        if rep.status != "ok":
            raise RuntimeError(f"{cfg.name} {cfg.method}: {rep.status}")
        out[cfg.method, cfg.speed, cfg.sigma, cfg.seed] = rep.best_error
    return out


def tables_suite(scale: int = 256, speeds=SPEEDS, band: float = BAND) -> list[Check]:
    configs = [ExperimentConfig(speed=sp, method=m, scale=scale) for sp in speeds for m in ("BFN", "CG", "NS")]
    best = best_errors(configs)
    checks = []
    for (m, sp, _, _), err in best.items():
        bound = band * REFERENCE_COMPLETE[sp][m]
        checks.append(Check(f"complete data {sp} {m} best error (%)", err, bound, err <= bound))
    return checks


def long_run_suite(scale: int = 128, factor: float = 0.6) -> list[Check]:
    cfg = ExperimentConfig(method="BFN", iters=100, scale=scale)
    trace = run_engine(cfg, build_setup(cfg))
    e10, e100 = trace.rel_errors[10], trace.rel_errors[100]
    return [Check("BFN error at 100 / at 10 iterations", e100 / e10, factor, e100 <= factor * e10, f"{e10:.3f}% -> {e100:.3f}%")]


def half_circle_suite(scale: int = 256, band: float = BAND) -> list[Check]:
    configs = [ExperimentConfig(sensor_arc="upper_half", method=m, scale=scale) for m in ("BFN", "CG", "NS", "TR")]
    best = {k[0]: v for k, v in best_errors(configs).items()}
    checks = [
        Check(f"upper half {m} best error (%)", best[m], band * ref, best[m] <= band * ref) for m, ref in REFERENCE_HALF.items()
    ]
    ratio = best["TR"] / best["NS"]
    checks.append(Check("upper half TR / NS error", ratio, 2.0, ratio >= 2.0, f"TR {best['TR']:.2f}%"))
    return checks


NOISE_BOUNDS = {"BFN": 30.0, "CG": 35.0, "NS": 30.0}


def noise_suite(scale: int = 128, seeds=(0, 1, 2), level: float = 0.15) -> list[Check]:
    configs = [
        ExperimentConfig(noise_level=level, seed=s, method=m, scale=scale) for s in seeds for m in ("BFN", "CG", "NS")
    ]
    best = best_errors(configs)
    checks = []
    for m, bound in NOISE_BOUNDS.items():
        worst = max(v for k, v in best.items() if k[0] == m)
        checks.append(Check(f"{level:.0%} noise {m} worst best-error over seeds (%)", worst, bound, worst <= bound))
    return checks


def sigma_suite(scale: int = 128, sigmas=(1, 2, 4, 8), slack: float = 2.0, cg_bound: float = 25.0) -> list[Check]:
    configs = [ExperimentConfig(sigma=s, method=m, scale=scale) for m in ("BFN", "CG", "NS") for s in sigmas]
    best = best_errors(configs)
    checks = []
    for m in ("BFN", "CG", "NS"):
        errs = [best[m, "constant", s, 0] for s in sigmas]
        worst_drop = max(a - b for a, b in zip(errs, errs[1:]))
        detail = " ".join(f"s{s}:{e:.2f}" for s, e in zip(sigmas, errs))
        checks.append(Check(f"{m} error non-decreasing in sigma (max drop, points)", worst_drop, slack, worst_drop <= slack, detail))
    e = best["CG", "constant", sigmas[-1], 0]
    checks.append(Check(f"CG best error at sigma={sigmas[-1]} (%)", e, cg_bound, e <= cg_bound))
    return checks


SUITES = {
    "adjoint": adjoint_suite,
    "energy": energy_suite,
    "contraction": contraction_suite,
    "tables": tables_suite,
    "long": long_run_suite,
    "half": half_circle_suite,
    "noise": noise_suite,
    "sigma": sigma_suite,
}
