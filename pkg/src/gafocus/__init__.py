"""Deterministic GA light-focusing simulator and benchmark harness."""

__version__ = "0.1.0"

from .ga import (
    GaConfig,
    GaEngine,
    Individual,
    MutationSchedule,
    crossover,
    mutate,
    rate_exponential,
    rate_linear_clamped,
    run,
    select_parents,
)
from .medium import (
    DetectorModel,
    Measurement,
    TransmissionMatrix,
    baseline_intensity,
    decorrelate,
    digitize,
    generate_medium,
    measure,
    propagate,
)
from .metrics import (
    IterationRecord,
    RunTrace,
    convergence_efficiency,
    decay_ratio,
    enhancement,
    normalized_convergence,
    optimal_stop,
)
from .rng import RandomSource, Trivium, bernoulli_select, random_mask, seed_to_key_iv, trivium_init
from .timing import HardwareProfile, TimingReport, iteration_time, offspring_time, speedup, total_time

__all__ = [
    "__version__",
    "GaConfig",
    "GaEngine",
    "Individual",
    "MutationSchedule",
    "crossover",
    "mutate",
    "rate_exponential",
    "rate_linear_clamped",
    "run",
    "select_parents",
    "DetectorModel",
    "Measurement",
    "TransmissionMatrix",
    "baseline_intensity",
    "decorrelate",
    "digitize",
    "generate_medium",
    "measure",
    "propagate",
    "IterationRecord",
    "RunTrace",
    "convergence_efficiency",
    "decay_ratio",
    "enhancement",
    "normalized_convergence",
    "optimal_stop",
    "RandomSource",
    "Trivium",
    "bernoulli_select",
    "random_mask",
    "seed_to_key_iv",
    "trivium_init",
    "HardwareProfile",
    "TimingReport",
    "iteration_time",
    "offspring_time",
    "speedup",
    "total_time",
]
