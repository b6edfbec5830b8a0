"""Analytic latency model of the GA pipeline on hardware targets.

The model is plain arithmetic over a HardwareProfile: one offspring costs
mask generation plus ADC accumulation plus a ranking delay; one iteration
is `population` offspring back to back (mask display overlaps the DDR
write-back, so no separate display term); a run is initialization plus
iterations.  All durations are microseconds.

The built-in virtex5 profile carries two offspring figures on purpose: the
measured 420 us mask-generation override (giving the exact 461 us
offspring and 7.376 ms iteration) and the rounded 500 us nominal figure
(giving the headline 8 ms iteration and the 150x PC speedup).  They are
inconsistent with the 6144 x 80 ns = 491.52 us derived value, and the
model reports each number as stated rather than reconciling them; use
derived() to drop the override.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class HardwareProfile:
    """Latency parameters of one platform; durations in the named units."""

    name: str
    core_clock_ns: float = 5.0
    chunk_bits: int = 128
    chunk_gen_ns: float = 80.0
    mask_pixels: int = 1024 * 768
    offspring_mask_us: float | None = None  # measured override; None = derive from chunks
    adc_accumulate_us: float = 31.0
    ranking_delay_us: float = 10.0
    init_us: float = 43.0
    population: int = 16
    nominal_offspring_us: float | None = None  # rounded headline figure, if the platform has one
    iteration_override_us: float | None = None  # flat per-iteration time (software baselines)

    def __post_init__(self):
        if self.core_clock_ns <= 0 or self.chunk_gen_ns <= 0:
            raise ValueError("clock and chunk generation times must be positive")
        if self.adc_accumulate_us <= 0 or self.ranking_delay_us <= 0:
            raise ValueError("ADC and ranking durations must be positive")
        if self.init_us < 0:
            raise ValueError(f"init_us must be >= 0, got {self.init_us}")
        if self.chunk_bits < 1 or self.mask_pixels < 1:
            raise ValueError("chunk_bits and mask_pixels must be >= 1")
        if self.mask_pixels % self.chunk_bits:
            raise ValueError(
                f"chunk_bits {self.chunk_bits} must divide mask_pixels {self.mask_pixels}"
            )
        if self.population < 1:
            raise ValueError(f"population must be >= 1, got {self.population}")
        for name in ("offspring_mask_us", "nominal_offspring_us", "iteration_override_us"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when set, got {value}")

    @property
    def n_chunks(self) -> int:
        return self.mask_pixels // self.chunk_bits


def derived(p: HardwareProfile) -> HardwareProfile:
    """Same profile with the measured offspring override removed."""
    return dataclasses.replace(p, offspring_mask_us=None)


def mask_generation_time(p: HardwareProfile) -> float:
    """Offspring mask generation in us: override if set, else chunks x chunk time."""
    if p.offspring_mask_us is not None:
        return p.offspring_mask_us
    return p.n_chunks * p.chunk_gen_ns / 1000.0


def offspring_time(p: HardwareProfile) -> float:
    """One offspring in us: mask generation + ADC accumulation + ranking delay."""
    return mask_generation_time(p) + p.adc_accumulate_us + p.ranking_delay_us


def iteration_time(p: HardwareProfile, nominal: bool = False) -> float:
    """One iteration in us: population x offspring time.

    nominal=True substitutes the platform's rounded headline offspring
    figure when it has one.  A flat iteration_override_us wins either way.
    """
    if p.iteration_override_us is not None:
        return p.iteration_override_us
    if nominal and p.nominal_offspring_us is not None:
        return p.population * p.nominal_offspring_us
    return p.population * offspring_time(p)


def total_time(p: HardwareProfile, iterations: int, nominal: bool = False) -> float:
    """Run time in us: init_us + iterations x iteration_time."""
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    return p.init_us + iterations * iteration_time(p, nominal=nominal)


def speedup(baseline, accelerated, nominal: bool = True) -> float:
    """Ratio of per-iteration times: baseline over accelerated.

    Arguments may be HardwareProfiles or plain per-iteration durations in
    any common unit; profiles use their headline (nominal) iteration time
    by default.
    """

    def value(x) -> float:
        if isinstance(x, HardwareProfile):
            return iteration_time(x, nominal=nominal)
        return float(x)

    t_base, t_acc = value(baseline), value(accelerated)
    if t_base <= 0 or t_acc <= 0:
        raise ValueError(f"per-iteration times must be positive, got {t_base} and {t_acc}")
    return t_base / t_acc


@dataclass(frozen=True)
class TimingReport:
    profile: str
    iterations: int
    per_offspring_us: float
    per_iteration_ms: float
    total_s: float
    measurement_rate_hz: float
    nominal_per_iteration_ms: float
    nominal_total_s: float


def report(p: HardwareProfile, iterations: int) -> TimingReport:
    """Exact and nominal timings for a run of the given length."""
    it_us = iteration_time(p)
    nom_us = iteration_time(p, nominal=True)
    return TimingReport(
        profile=p.name,
        iterations=iterations,
        per_offspring_us=offspring_time(p) if p.iteration_override_us is None else it_us / p.population,
        per_iteration_ms=it_us / 1000.0,
        total_s=total_time(p, iterations) / 1e6,
        measurement_rate_hz=p.population / (it_us * 1e-6),
        nominal_per_iteration_ms=nom_us / 1000.0,
        nominal_total_s=total_time(p, iterations, nominal=True) / 1e6,
    )


def builtin_profiles() -> dict[str, HardwareProfile]:
    return {
        "virtex5": HardwareProfile(
            name="virtex5",
            core_clock_ns=5.0,
            chunk_bits=128,
            chunk_gen_ns=80.0,
            offspring_mask_us=420.0,
            nominal_offspring_us=500.0,
        ),
        "ultrascale-plus": HardwareProfile(
            name="ultrascale-plus",
            core_clock_ns=5.0,
            chunk_bits=128,
            chunk_gen_ns=10.0,
        ),
        "pc-matlab": HardwareProfile(
            name="pc-matlab",
            iteration_override_us=1.2e6,
            init_us=0.0,
        ),
    }


def get_profile(name: str) -> HardwareProfile:
    profiles = builtin_profiles()
    if name not in profiles:
        raise KeyError(f"unknown profile {name!r}; available: {', '.join(sorted(profiles))}")
    return profiles[name]


_PROFILE_FIELD_TYPES = {
    "name": str,
    "core_clock_ns": float,
    "chunk_bits": int,
    "chunk_gen_ns": float,
    "mask_pixels": int,
    "offspring_mask_us": float,
    "adc_accumulate_us": float,
    "ranking_delay_us": float,
    "init_us": float,
    "population": int,
    "nominal_offspring_us": float,
    "iteration_override_us": float,
}


def load_profile(path: str) -> HardwareProfile:
    """Read a profile from key=value text; unknown keys are errors.

    Lines are `field=value` with # comments; fields match HardwareProfile.
    A missing name falls back to the file stem.
    """
    values: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _PROFILE_FIELD_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown profile field {key!r}")
            values[key] = _PROFILE_FIELD_TYPES[key](raw)
    if "name" not in values:
        import os

        values["name"] = os.path.splitext(os.path.basename(path))[0]
    return HardwareProfile(**values)


def resolve_profile(name_or_path: str) -> HardwareProfile:
    """Built-in profile by name, else a profile file by path."""
    try:
        return get_profile(name_or_path)
    except KeyError:
        import os

        if os.path.exists(name_or_path):
            return load_profile(name_or_path)
        raise
