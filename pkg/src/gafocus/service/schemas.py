"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ScheduleParams(BaseModel):
    schedule: str = "exponential"
    r0: float = 0.06
    r_end: float = 0.012
    d: float = 80.0
    kappa_start: int = 2000
    tau: int = 12
    epsilon: int = 32768


class RatesRequest(ScheduleParams):
    k_from: int = Field(default=0, ge=0)
    k_to: int = Field(default=100, ge=0)


class RatesResponse(BaseModel):
    k: list[int]
    rate: list[float]
    rate_numerator: list[int]


class RunRequest(ScheduleParams):
    seed: int = 1
    n_outputs: int = 1
    n_modes: int = 1024
    target_channel: int = 0
    population_size: int = 32
    offspring_per_iteration: int = 16
    replacement: str = "replace-worst"
    mutation_variant: str = "redraw"
    max_iterations: int = 2000
    gain: float | None = None
    gain_fraction: float = 0.005
    noise_sigma_rel: float = 0.0
    noise_sigma_volts: float | None = None
    adc_bits: int = 10
    adc_full_scale: float = 3.3
    samples_per_measurement: int = 13
    baseline_samples: int = 1000
    profile: str = "virtex5"
    n_workers: int = 1
    early_stop: int | None = None
    include_series: bool = False


class SweepRequest(RunRequest):
    d_values: list[float] = Field(default=[80.0, 400.0, 1000.0], min_length=1)


class RepeatRequest(RunRequest):
    n_repeats: int = Field(default=10, ge=1)
    iterations_per_repeat: int = Field(default=500, ge=1)
    decorrelate_alpha: float = Field(default=0.0, ge=0.0, le=1.0)


class TimingRequest(BaseModel):
    profile: str = "virtex5"
    iterations: int = Field(default=2000, ge=0)


class AnalyzeRequest(BaseModel):
    trace_csv: str


class RunSummary(BaseModel):
    final_zeta: float
    max_eta: float
    optimal_stop_k: int
    f_xi_at_kstar: float
    total_measurements: int
    model_time_us_at_kstar: float
    config_seed: int | None = None
    ga_seed: int | None = None


class TraceSeries(BaseModel):
    iteration: list[int]
    zeta: list[float]
    f_xi: list[float]
    eta: list[float]


class RunResponse(BaseModel):
    summary: RunSummary
    series: TraceSeries | None = None


class SweepRunResult(BaseModel):
    d: float
    summary: RunSummary


class SweepResponse(BaseModel):
    sweep_max_zeta: float
    runs: list[SweepRunResult]


class RepeatResponse(BaseModel):
    n_repeats: int
    iterations_per_repeat: int
    mean_final_zeta: float
    std_final_zeta: float
    cv_final_zeta: float
    final_zetas: list[float]
    summaries: list[RunSummary]


class HealthResponse(BaseModel):
    status: str
    version: str


class ProfilesResponse(BaseModel):
    profiles: list[str]
