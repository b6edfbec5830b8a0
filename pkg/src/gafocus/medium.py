"""Simulated optical bench: scattering medium, forward model, detector.

The medium is a transmission matrix with i.i.d. circular complex Gaussian
entries of unit variance (zero mean, independent real/imag parts with
variance 1/2 each).  A binary amplitude mask switches modes on or off; the
field at an output channel is the sum of matrix entries over the on modes
and the detector sees the squared magnitude.

The detector model mirrors the hardware chain: a transimpedance gain maps
intensity to volts, additive Gaussian noise is applied per ADC sample, the
ADC clamps to [0, full_scale] and floor-quantizes to adc_bits, and a fixed
number of samples per measurement is accumulated into one integer fitness
value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class TransmissionMatrix:
    """Complex medium mapping n_modes inputs to n_outputs channels.

    Immutable and safe to share across threads.  `seed` is the generation
    seed when the matrix came straight from generate_medium, else None
    (decorrelated matrices are not regenerable and cannot be snapshotted).
    """

    entries: np.ndarray
    target_channel: int
    seed: int | None

    def __post_init__(self):
        if self.entries.ndim != 2 or min(self.entries.shape) < 1:
            raise ValueError(f"entries must be a nonempty 2-D matrix, got shape {self.entries.shape}")
        if not 0 <= self.target_channel < self.entries.shape[0]:
            raise ValueError(
                f"target_channel {self.target_channel} out of range for {self.entries.shape[0]} outputs"
            )
        self.entries.setflags(write=False)

    @property
    def n_outputs(self) -> int:
        return self.entries.shape[0]

    @property
    def n_modes(self) -> int:
        return self.entries.shape[1]

    @property
    def target_row(self) -> np.ndarray:
        return self.entries[self.target_channel]


def generate_medium(n_outputs: int, n_modes: int, target_channel: int, seed: int) -> TransmissionMatrix:
    """Draw a fresh medium; identical seeds give identical matrices."""
    if n_outputs < 1 or n_modes < 1:
        raise ValueError(f"medium dimensions must be >= 1, got {n_outputs}x{n_modes}")
    if not 0 <= target_channel < n_outputs:
        raise ValueError(f"target_channel {target_channel} out of range for {n_outputs} outputs")
    rng = np.random.default_rng(seed)
    entries = (
        rng.standard_normal((n_outputs, n_modes)) + 1j * rng.standard_normal((n_outputs, n_modes))
    ) / _SQRT2
    return TransmissionMatrix(entries=entries, target_channel=target_channel, seed=seed)


def _check_mask(tm: TransmissionMatrix, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.shape != (tm.n_modes,):
        raise ValueError(f"mask length {mask.shape} does not match n_modes {tm.n_modes}")
    return mask.astype(np.float64)


def propagate_field(tm: TransmissionMatrix, mask: np.ndarray) -> np.ndarray:
    """Complex field at every output for a binary mask."""
    return tm.entries @ _check_mask(tm, mask)


def propagate(tm: TransmissionMatrix, mask: np.ndarray) -> np.ndarray:
    """Noise-free intensity at every output: |sum of on-mode entries|^2."""
    field_out = propagate_field(tm, mask)
    return np.abs(field_out) ** 2


def target_intensity(tm: TransmissionMatrix, mask: np.ndarray) -> float:
    """Noise-free intensity at the target channel only."""
    return float(np.abs(tm.target_row @ _check_mask(tm, mask)) ** 2)


def decorrelate(tm: TransmissionMatrix, alpha: float, rng: np.random.Generator) -> TransmissionMatrix:
    """Markov blend toward a fresh medium: t' = sqrt(1-alpha^2) t + alpha fresh.

    alpha=0 is the identity (no randomness consumed); alpha=1 is a fully
    fresh medium.  Per-entry variance stays 1 for any alpha.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 0.0:
        return tm
    shape = tm.entries.shape
    fresh = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / _SQRT2
    blended = np.sqrt(1.0 - alpha * alpha) * tm.entries + alpha * fresh
    return TransmissionMatrix(entries=blended, target_channel=tm.target_channel, seed=None)


def baseline_intensity(tm: TransmissionMatrix, rng: np.random.Generator, n_samples: int) -> float:
    """Mean noise-free target intensity over fresh uniform random masks.

    This is the pre-optimization speckle level used as the enhancement
    denominator.  For a fixed matrix the expectation over masks is
    (sum|t_i|^2 + |sum t_i|^2) / 4, which averages to n_modes/2 over media.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    masks = rng.integers(0, 2, size=(n_samples, tm.n_modes)).astype(np.float64)
    fields = masks @ tm.target_row
    return float(np.mean(np.abs(fields) ** 2))


@dataclass(frozen=True)
class DetectorModel:
    """ADC chain parameters; defaults follow the 10-bit 0-3.3V design with
    13 samples accumulated per measurement (31 us window / 2.3 us per
    conversion)."""

    gain: float
    noise_sigma: float = 0.0
    adc_bits: int = 10
    adc_full_scale: float = 3.3
    samples_per_measurement: int = 13

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError(f"gain must be positive, got {self.gain}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.adc_bits < 1:
            raise ValueError(f"adc_bits must be >= 1, got {self.adc_bits}")
        if self.adc_full_scale <= 0:
            raise ValueError(f"adc_full_scale must be positive, got {self.adc_full_scale}")
        if self.samples_per_measurement < 1:
            raise ValueError(f"samples_per_measurement must be >= 1, got {self.samples_per_measurement}")

    @property
    def max_code(self) -> int:
        return (1 << self.adc_bits) - 1

    @property
    def max_digitized(self) -> int:
        return self.samples_per_measurement * self.max_code


@dataclass(frozen=True)
class Measurement:
    raw_intensity: float
    digitized: int
    iteration_index: int = 0


def digitize(det: DetectorModel, intensity: float, noise_volts: np.ndarray) -> int:
    """Accumulated ADC code for one measurement given per-sample noise.

    noise_volts must hold exactly samples_per_measurement values (zeros for
    a noise-free detector).  Each sample is clamp(gain*I + noise, 0, FS)
    floor-quantized onto 0..2^bits-1; the codes are summed.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    noise_volts = np.asarray(noise_volts, dtype=np.float64)
    if noise_volts.shape != (det.samples_per_measurement,):
        raise ValueError(
            f"expected {det.samples_per_measurement} noise samples, got shape {noise_volts.shape}"
        )
    volts = np.clip(det.gain * intensity + noise_volts, 0.0, det.adc_full_scale)
    codes = np.floor(volts / det.adc_full_scale * det.max_code)
    return int(codes.sum())


def measure(det: DetectorModel, intensity: float, rng: np.random.Generator, iteration_index: int = 0) -> Measurement:
    """One detector reading; noise drawn from the caller's generator."""
    if det.noise_sigma > 0:
        noise = rng.normal(0.0, det.noise_sigma, det.samples_per_measurement)
    else:
        noise = np.zeros(det.samples_per_measurement)
    return Measurement(
        raw_intensity=float(intensity),
        digitized=digitize(det, intensity, noise),
        iteration_index=iteration_index,
    )


def save_medium_snapshot(tm: TransmissionMatrix, path: str) -> None:
    """Write the regeneration record (dimensions, target, seed) as key=value text."""
    if tm.seed is None:
        raise ValueError("matrix was not generated from a seed and cannot be snapshotted")
    text = (
        f"n_outputs={tm.n_outputs}\n"
        f"n_modes={tm.n_modes}\n"
        f"target_channel={tm.target_channel}\n"
        f"seed={tm.seed}\n"
    )
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_medium_snapshot(path: str) -> TransmissionMatrix:
    """Regenerate a medium from a snapshot file written by save_medium_snapshot."""
    fields: dict[str, int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            fields[key.strip()] = int(value.strip())
    missing = {"n_outputs", "n_modes", "target_channel", "seed"} - set(fields)
    if missing:
        raise ValueError(f"{path}: missing snapshot fields {sorted(missing)}")
    return generate_medium(fields["n_outputs"], fields["n_modes"], fields["target_channel"], fields["seed"])
