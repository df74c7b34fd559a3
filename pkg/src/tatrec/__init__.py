"""Thermoacoustic tomography reconstruction on a 2D finite-difference wave solver."""

from .bfn import BfnParams, backward_pass, bfn_run, forward_pass, truncate
from .media import PhantomKind, SpeedKind, make_phantom, make_speed
from .sensing import MaskField, ObservationSeries, SensorSpec, add_noise, build_mask, record
from .timereversal import neumann_series, time_reversal
from .trace import IterationTrace, rel_mse
from .variational import CgParams, apply_W, apply_W_adjoint, cg_solve, grad_J
from .wave import (
    AttenuationSpec,
    GridSpec,
    NudgingSpec,
    Propagator,
    TimeSpec,
    WaveState,
    cfl_dt,
    energy,
    laplacian5,
    make_timespec,
    step,
)

__version__ = "0.1.0"
