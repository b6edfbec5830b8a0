"""Genetic algorithm engine: schedules, operators, and the iteration loop.

One iteration breeds M offspring masks: two parents are picked by
rank-weighted sampling, combined through a uniform crossover template, and
mutated by re-drawing a rate-controlled subset of modes.  Offspring are
measured and merged back by one of two replacement strategies:

* replace-worst: the M worst parents are dropped and all offspring enter
  (the simulation default, M = P/2);
* elitist-merge: best P of parents plus offspring survive (hardware-parity
  mode, M = P).

The mutation rate follows either the exponential decay

    R(k) = (R0 - R_end) exp(-k / D) + R_end        (k = 0, 1, ...)

or the hardware-friendly linear ramp with a floor

    R(k) = max((kappa_start - (k - 1) tau) / epsilon, R_end)   (k = 1, 2, ...)

Rates are carried as fixed-point numerators over epsilon = 2^15 on the way
into the bit-level samplers, mirroring the hardware comparison scheme.

Determinism contract: all random material for an iteration (parent picks,
crossover templates, mutation selections and replacement coins) is drawn
serially from the single RandomSource in a fixed order before any fitness
is evaluated.  Fitness evaluations may then run on a thread pool over the
immutable medium; results are committed in offspring order, so traces are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .medium import DetectorModel, TransmissionMatrix, digitize
from .metrics import IterationRecord, RunTrace
from .rng import RandomSource, bernoulli_select, random_mask
from . import timing as timing_mod

DEFAULT_EPSILON = 1 << 15

# numpy seed-sequence tag for detector noise derived from the GA seed
NOISE_STREAM_TAG = 0x6E01


def rate_exponential(k: int, R0: float, R_end: float, D: float) -> float:
    """Exponential decay R(k) = (R0 - R_end) exp(-k/D) + R_end, k >= 0."""
    if k < 0:
        raise ValueError(f"iteration index must be >= 0, got {k}")
    return (R0 - R_end) * math.exp(-k / D) + R_end


def rate_linear_clamped(k: int, kappa_start: int, tau: int, epsilon: int, R_end: float) -> float:
    """Linear ramp max((kappa_start - (k-1) tau) / epsilon, R_end), k >= 1.

    The numerator is integer arithmetic; the clamp compares the resulting
    fraction against R_end.
    """
    if k < 1:
        raise ValueError(f"iteration index must be >= 1, got {k}")
    numer = kappa_start - (k - 1) * tau
    rate = numer / epsilon
    return rate if rate > R_end else R_end


@dataclass(frozen=True)
class MutationSchedule:
    """Rate rule: kind 'exponential', 'linear-clamped' or 'constant'.

    rate(k) evaluates the exact real-valued rule at the schedule's own
    index (exponential and constant from k=0, linear from k=1);
    rate_numerator(k) is the fixed-point value the engine feeds to the
    bit samplers.  numerator_for_iteration maps the engine's 1-based
    iteration counter onto the right index.
    """

    kind: str
    R0: float
    R_end: float
    D: float = 1.0
    kappa_start: int = 2000
    tau: int = 12
    epsilon: int = DEFAULT_EPSILON

    def __post_init__(self):
        if self.kind not in ("exponential", "linear-clamped", "constant"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not 0 < self.R_end <= self.R0 <= 1:
            raise ValueError(f"need 0 < R_end <= R0 <= 1, got R0={self.R0}, R_end={self.R_end}")
        if self.kind == "exponential" and self.D <= 0:
            raise ValueError(f"decay factor D must be positive, got {self.D}")
        if self.epsilon < 2 or self.epsilon & (self.epsilon - 1):
            raise ValueError(f"epsilon must be a power of two, got {self.epsilon}")
        if self.kind == "linear-clamped":
            if self.tau < 0 or self.kappa_start < 0:
                raise ValueError("kappa_start and tau must be nonnegative")
            if abs(self.kappa_start / self.epsilon - self.R0) > 1.0 / self.epsilon:
                raise ValueError(
                    f"kappa_start/epsilon = {self.kappa_start / self.epsilon:.6f} "
                    f"disagrees with R0 = {self.R0}"
                )

    @classmethod
    def exponential(cls, R0: float, R_end: float, D: float, epsilon: int = DEFAULT_EPSILON) -> "MutationSchedule":
        return cls(kind="exponential", R0=R0, R_end=R_end, D=D, epsilon=epsilon)

    @classmethod
    def linear(cls, kappa_start: int, tau: int, R_end: float, epsilon: int = DEFAULT_EPSILON) -> "MutationSchedule":
        return cls(
            kind="linear-clamped",
            R0=kappa_start / epsilon,
            R_end=R_end,
            kappa_start=kappa_start,
            tau=tau,
            epsilon=epsilon,
        )

    @classmethod
    def constant(cls, R: float, epsilon: int = DEFAULT_EPSILON) -> "MutationSchedule":
        return cls(kind="constant", R0=R, R_end=R, epsilon=epsilon)

    @property
    def first_index(self) -> int:
        return 1 if self.kind == "linear-clamped" else 0

    def rate(self, k: int) -> float:
        if self.kind == "exponential":
            return rate_exponential(k, self.R0, self.R_end, self.D)
        if self.kind == "linear-clamped":
            return rate_linear_clamped(k, self.kappa_start, self.tau, self.epsilon, self.R_end)
        if k < 0:
            raise ValueError(f"iteration index must be >= 0, got {k}")
        return self.R0

    def rate_numerator(self, k: int) -> int:
        if self.kind == "linear-clamped":
            numer = self.kappa_start - (k - 1) * self.tau
            floor_num = round(self.R_end * self.epsilon)
            return max(numer, floor_num)
        return round(self.rate(k) * self.epsilon)

    def numerator_for_iteration(self, iteration: int) -> int:
        """Fixed-point rate for the engine's 1-based iteration counter."""
        if iteration < 1:
            raise ValueError(f"iteration counter starts at 1, got {iteration}")
        if self.kind == "linear-clamped":
            return self.rate_numerator(iteration)
        return self.rate_numerator(iteration - 1)


@dataclass
class Individual:
    """One candidate mask with its measured fitness.

    fitness is the digitized detector value recorded when the mask was
    first displayed; it is never re-measured while the individual
    survives.  intensity keeps the noise-free diagnostic value.
    """

    mask: np.ndarray
    fitness: int | None = None
    intensity: float | None = None
    age: int = 0


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 32
    offspring_per_iteration: int = 16
    n_modes: int = 1024
    schedule: MutationSchedule = field(default_factory=lambda: MutationSchedule.exponential(0.06, 0.012, 80.0))
    replacement: str = "replace-worst"
    max_iterations: int = 2000
    seed: int = 0
    mutation_variant: str = "redraw"

    def __post_init__(self):
        if not 1 <= self.offspring_per_iteration <= self.population_size:
            raise ValueError(
                f"need 1 <= M <= P, got M={self.offspring_per_iteration}, P={self.population_size}"
            )
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.replacement not in ("replace-worst", "elitist-merge"):
            raise ValueError(f"unknown replacement strategy {self.replacement!r}")
        if self.mutation_variant not in ("redraw", "flip"):
            raise ValueError(f"unknown mutation variant {self.mutation_variant!r}")


def rank(members: list[Individual]) -> list[Individual]:
    """Sort by fitness descending; ties keep earlier list order."""
    return sorted(members, key=lambda ind: ind.fitness, reverse=True)


def select_parents(pop: list[Individual], src: RandomSource) -> tuple[Individual, Individual]:
    """Two distinct members by rank-weighted sampling.

    Rank r (1 = best) carries weight P - r + 1; the second draw excludes
    the first pick and renormalizes the remaining weights.
    """
    p = len(pop)
    if p < 2:
        raise ValueError(f"need at least 2 members to select parents, got {p}")
    total = p * (p + 1) // 2
    u = src.uniform_int(total)
    acc = 0
    first = 0
    for i in range(p):
        acc += p - i
        if u < acc:
            first = i
            break
    u2 = src.uniform_int(total - (p - first))
    acc = 0
    second = 0
    for i in range(p):
        if i == first:
            continue
        acc += p - i
        if u2 < acc:
            second = i
            break
    return pop[first], pop[second]


def crossover(a: np.ndarray, b: np.ndarray, src: RandomSource) -> np.ndarray:
    """Uniform crossover: a fresh fair-coin template picks per-mode donors.

    Offspring mode i comes from a where the template bit is 1, else from b.
    """
    if a.shape != b.shape:
        raise ValueError(f"parent masks differ in shape: {a.shape} vs {b.shape}")
    template = src.next_bits(a.size)
    return np.where(template == 1, a, b).astype(np.uint8)


def mutate(
    m: np.ndarray,
    rate: float,
    src: RandomSource,
    variant: str = "redraw",
    epsilon: int = DEFAULT_EPSILON,
) -> np.ndarray:
    """Mutate by re-drawing a Bernoulli(rate)-selected subset of modes.

    Selection runs in fixed point (rate rounded to a numerator over
    epsilon).  'redraw' replaces each selected mode with a fresh fair
    coin, so a selected bit changes with probability 1/2; 'flip' inverts
    selected bits outright.
    """
    if not 0 <= rate <= 1:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    num = round(rate * epsilon)
    selected = bernoulli_select(src, m.size, num, epsilon)
    out = m.copy()
    if variant == "redraw":
        picked = selected == 1
        coins = src.next_bits(int(picked.sum()))
        out[picked] = coins
    elif variant == "flip":
        out[selected == 1] ^= 1
    else:
        raise ValueError(f"unknown mutation variant {variant!r}")
    return out


class GaEngine:
    """Stateful optimizer over one immutable medium and detector.

    Randomness comes from two places: the Trivium-backed RandomSource
    drives every algorithmic decision, and a numpy generator supplies
    detector noise (pre-drawn per iteration so worker count cannot change
    the draw order).  baseline is the pre-optimization speckle mean used
    for the trace's enhancement column.
    """

    def __init__(
        self,
        cfg: GaConfig,
        medium: TransmissionMatrix,
        detector: DetectorModel,
        baseline: float,
        source: RandomSource | None = None,
        noise_rng: np.random.Generator | None = None,
        profile: "timing_mod.HardwareProfile | None" = None,
        n_workers: int = 1,
    ):
        if cfg.n_modes != medium.n_modes:
            raise ValueError(f"config n_modes {cfg.n_modes} != medium n_modes {medium.n_modes}")
        if baseline <= 0:
            raise ValueError(f"baseline must be positive, got {baseline}")
        if n_workers < 1:
            raise ValueError(f"n_workers must be >= 1, got {n_workers}")
        self.cfg = cfg
        self.medium = medium
        self.detector = detector
        self.baseline = baseline
        self.src = source if source is not None else RandomSource.from_seed(cfg.seed)
        self.noise_rng = (
            noise_rng if noise_rng is not None else np.random.default_rng([cfg.seed, NOISE_STREAM_TAG])
        )
        self.profile = profile
        self.n_workers = n_workers
        self._pool = ThreadPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
        self._row_re = np.ascontiguousarray(medium.target_row.real)
        self._row_im = np.ascontiguousarray(medium.target_row.imag)

        self.k = 0
        self.measurements = 0
        self.records: list[IterationRecord] = []
        self.population = self._init_population()
        self.init_record = IterationRecord(
            k=0,
            best_digitized=self.population[0].fitness,
            best_intensity=self.population[0].intensity,
            mutation_rate_num=0,
            cum_measurements=self.measurements,
            model_time_us=self._model_time(),
        )

    # -- plumbing ---------------------------------------------------------

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def _model_time(self) -> float:
        if self.profile is None:
            return 0.0
        return timing_mod.total_time(self.profile, self.k)

    def _noise_block(self, count: int) -> np.ndarray:
        s = self.detector.samples_per_measurement
        if self.detector.noise_sigma > 0:
            return self.noise_rng.normal(0.0, self.detector.noise_sigma, (count, s))
        return np.zeros((count, s))

    def _intensity(self, mask: np.ndarray) -> float:
        m = mask.astype(np.float64)
        re = self._row_re @ m
        im = self._row_im @ m
        return float(re * re + im * im)

    def _evaluate(self, masks: list[np.ndarray], noise: np.ndarray) -> list[tuple[float, int]]:
        def one(j: int) -> tuple[float, int]:
            intensity = self._intensity(masks[j])
            return intensity, digitize(self.detector, intensity, noise[j])

        if self._pool is not None:
            return list(self._pool.map(one, range(len(masks))))
        return [one(j) for j in range(len(masks))]

    def _init_population(self) -> list[Individual]:
        p = self.cfg.population_size
        masks = [random_mask(self.src, self.cfg.n_modes) for _ in range(p)]
        noise = self._noise_block(p)
        evals = self._evaluate(masks, noise)
        self.measurements += p
        members = [
            Individual(mask=mask, fitness=dig, intensity=intensity)
            for mask, (intensity, dig) in zip(masks, evals)
        ]
        return rank(members)

    # -- the loop ---------------------------------------------------------

    def step(self) -> IterationRecord:
        """Advance one iteration: breed, measure, replace, record."""
        cfg = self.cfg
        self.k += 1
        rate_num = cfg.schedule.numerator_for_iteration(self.k)
        rate = rate_num / cfg.schedule.epsilon

        # All random draws happen serially here, before any evaluation.
        child_masks: list[np.ndarray] = []
        for _ in range(cfg.offspring_per_iteration):
            pa, pb = select_parents(self.population, self.src)
            child = crossover(pa.mask, pb.mask, self.src)
            child = mutate(child, rate, self.src, cfg.mutation_variant, cfg.schedule.epsilon)
            child_masks.append(child)
        noise = self._noise_block(len(child_masks))

        evals = self._evaluate(child_masks, noise)
        self.measurements += len(child_masks)
        offspring = [
            Individual(mask=mask, fitness=dig, intensity=intensity)
            for mask, (intensity, dig) in zip(child_masks, evals)
        ]

        if cfg.replacement == "replace-worst":
            survivors = self.population[: cfg.population_size - cfg.offspring_per_iteration]
            for ind in survivors:
                ind.age += 1
            self.population = rank(survivors + offspring)
        else:  # elitist-merge
            new_ids = {id(ind) for ind in offspring}
            merged = rank(self.population + offspring)[: cfg.population_size]
            for ind in merged:
                if id(ind) not in new_ids:
                    ind.age += 1
            self.population = merged

        best = self.population[0]
        record = IterationRecord(
            k=self.k,
            best_digitized=best.fitness,
            best_intensity=best.intensity,
            mutation_rate_num=rate_num,
            cum_measurements=self.measurements,
            model_time_us=self._model_time(),
        )
        self.records.append(record)
        return record

    def trace(self) -> RunTrace:
        return RunTrace(
            records=list(self.records),
            baseline=self.baseline,
            init_record=self.init_record,
        )


def init_population(
    cfg: GaConfig,
    medium: TransmissionMatrix,
    detector: DetectorModel,
    source: RandomSource | None = None,
    noise_rng: np.random.Generator | None = None,
) -> list[Individual]:
    """Ranked initial population of P random masks (P measurements)."""
    engine = GaEngine(cfg, medium, detector, baseline=1.0, source=source, noise_rng=noise_rng)
    try:
        return engine.population
    finally:
        engine.close()


def run(
    cfg: GaConfig,
    medium: TransmissionMatrix,
    detector: DetectorModel,
    baseline: float,
    source: RandomSource | None = None,
    noise_rng: np.random.Generator | None = None,
    profile: "timing_mod.HardwareProfile | None" = None,
    n_workers: int = 1,
    early_stop: int | None = None,
) -> RunTrace:
    """Full optimization run; returns the per-iteration trace.

    early_stop caps the iteration count below cfg.max_iterations (for
    stopping at a previously calibrated optimal iteration).
    """
    if early_stop is not None and early_stop < 1:
        raise ValueError(f"early_stop must be >= 1, got {early_stop}")
    iterations = cfg.max_iterations if early_stop is None else min(cfg.max_iterations, early_stop)
    engine = GaEngine(
        cfg,
        medium,
        detector,
        baseline,
        source=source,
        noise_rng=noise_rng,
        profile=profile,
        n_workers=n_workers,
    )
    try:
        for _ in range(iterations):
            engine.step()
        return engine.trace()
    finally:
        engine.close()
