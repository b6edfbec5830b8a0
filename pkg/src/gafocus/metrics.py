"""Run evaluation: enhancement, convergence curves, and the stopping rule.

Symbols follow the usual wavefront-shaping conventions.  zeta is the
enhancement (best focal intensity over the pre-optimization speckle mean).
F(xi) is the convergence normalized to a reference enhancement, by default
the run's own global optimum.  The convergence-efficiency

    eta_k = F(xi)_k - k / N_g

trades off convergence against spent iterations; its argmax marks the
cost-effective stopping iteration.  N_g is the iteration of the global
optimum; when no distinguished optimum is known, the last iteration is
used (the recommended fallback, and the default here).

zeta_k is computed from the best-so-far noise-free intensity, so F is
nondecreasing and reaches 1 at the first iteration where the global
optimum is attained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class IterationRecord:
    k: int
    best_digitized: int
    best_intensity: float
    mutation_rate_num: int
    cum_measurements: int
    model_time_us: float


@dataclass
class RunTrace:
    """Per-iteration history of one optimization run.

    records hold iterations k = 1..N in order; init_record (k = 0) captures
    the ranked initial population before any offspring are bred.
    """

    records: list[IterationRecord]
    baseline: float
    n_g: int | None = None
    init_record: IterationRecord | None = None

    def __post_init__(self):
        if self.baseline <= 0:
            raise ValueError(f"baseline must be positive, got {self.baseline}")
        ks = [r.k for r in self.records]
        if ks and (ks[0] != 1 or any(b != a + 1 for a, b in zip(ks, ks[1:]))):
            raise ValueError("record iterations must run 1, 2, ... without gaps")
        if self.n_g is not None and self.records and not 1 <= self.n_g <= ks[-1]:
            raise ValueError(f"n_g {self.n_g} outside recorded iterations 1..{ks[-1]}")

    @property
    def last_k(self) -> int:
        return self.records[-1].k if self.records else 0

    def iterations(self) -> np.ndarray:
        return np.array([r.k for r in self.records], dtype=np.int64)

    def zeta_series(self) -> np.ndarray:
        """Best-so-far enhancement per iteration (noise-free intensity basis)."""
        best = np.maximum.accumulate(np.array([r.best_intensity for r in self.records]))
        return best / self.baseline

    def final_zeta(self) -> float:
        if not self.records:
            raise ValueError("trace has no iteration records")
        return float(self.zeta_series()[-1])


def enhancement(best_intensity: float, baseline: float) -> float:
    """zeta: focal intensity relative to the mean pre-optimization speckle."""
    if baseline <= 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    return best_intensity / baseline


def decay_ratio(schedule, k: int) -> float:
    """Upsilon_k = R_k - R_{k+1}, the per-iteration mutation-rate decrease.

    Evaluates the schedule's exact real-valued rate (not the fixed-point
    numerator), so the linear schedule gives exactly tau/epsilon before
    its clamp.  k uses the schedule's own index convention.
    """
    return schedule.rate(k) - schedule.rate(k + 1)


def _reference(trace: RunTrace, zeta_ref: float | None) -> float:
    if zeta_ref is None:
        zeta_ref = float(trace.zeta_series()[-1])
    if zeta_ref <= 0:
        raise ValueError(f"reference enhancement must be positive, got {zeta_ref}")
    return zeta_ref


def normalized_convergence(trace: RunTrace, zeta_ref: float | None = None) -> np.ndarray:
    """F(xi)_k = zeta_k / zeta_ref over the trace's iterations.

    zeta_ref defaults to the trace's own maximum (self mode, values in
    [0, 1]); pass a cross-run maximum for sweep-wide normalization.
    """
    if not trace.records:
        raise ValueError("trace has no iteration records")
    return trace.zeta_series() / _reference(trace, zeta_ref)


def convergence_efficiency(trace: RunTrace, zeta_ref: float | None = None) -> np.ndarray:
    """eta_k = F(xi)_k - k/N_g for k = 1..N_g.

    N_g is trace.n_g when set, else the last iteration.  Records beyond
    N_g are excluded from the returned series.
    """
    if not trace.records:
        raise ValueError("trace has no iteration records")
    n_g = trace.n_g if trace.n_g is not None else trace.last_k
    f_xi = normalized_convergence(trace, zeta_ref)[:n_g]
    ks = trace.iterations()[:n_g]
    return f_xi - ks / n_g


def optimal_stop(trace: RunTrace, zeta_ref: float | None = None) -> int:
    """Iteration k* maximizing eta; ties resolve to the smallest k."""
    eta = convergence_efficiency(trace, zeta_ref)
    return int(trace.iterations()[int(np.argmax(eta))])
