"""Experiment orchestration: configuration, seeded runs, sweeps, repeats.

Seed policy.  One experiment seed drives everything, with no ambient
entropy: the medium is generated from `seed` itself, run number i (0 for a
plain run, the list position in a sweep, the repeat number in a repetition
study) uses GA seed `seed XOR (i + 1)`, and auxiliary numpy streams
(baseline masks, detector noise, decorrelation) hang off fixed stream tags.
Sweep elements all use run number 0, so every decay value sees the same
medium AND the same GA bit stream; repeats get fresh GA streams on the
same medium.

Detector calibration.  Unless an explicit gain is configured, the gain is
set so the pre-optimization baseline maps to `gain_fraction` of ADC full
scale (default 0.5%), leaving headroom for enhancements beyond 100x
before the ADC saturates.  Noise levels are usually given relative to the
baseline-mapped voltage (`noise_sigma_rel`); `noise_sigma_volts` sets the
absolute value directly.

File outputs.  Traces are CSV with the fixed header

    iteration,best_digitized,best_intensity,enhancement,mutation_rate_num,cum_measurements,model_time_us

one row for the ranked initial population (iteration 0) and one per
iteration; floats are shortest round-trip decimal.  Summaries are sorted
JSON.  All files are written atomically (temp then rename) and contain no
timestamps, so identical inputs give byte-identical outputs.

Sweep comparison columns: `zeta_*` is each run's own best-so-far
enhancement, `f_xi_*` normalizes by the sweep-wide maximum enhancement
(the cross-run global optimum), `eta_*` is each run's self-normalized
convergence efficiency (the per-run stopping-rule curve).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import ga, metrics, svg, timing
from .medium import (
    DetectorModel,
    TransmissionMatrix,
    baseline_intensity,
    decorrelate,
    generate_medium,
)

TRACE_HEADER = "iteration,best_digitized,best_intensity,enhancement,mutation_rate_num,cum_measurements,model_time_us"

BASELINE_STREAM_TAG = 0xBA5E
DECORRELATE_STREAM_TAG = 0xDEC0

_U64 = (1 << 64) - 1


class ConfigError(ValueError):
    """Bad configuration file or option values (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    # medium
    n_outputs: int = 1
    n_modes: int = 1024
    target_channel: int = 0
    seed: int = 1
    # detector
    gain: float | None = None
    gain_fraction: float = 0.005
    noise_sigma_rel: float = 0.0
    noise_sigma_volts: float | None = None
    adc_bits: int = 10
    adc_full_scale: float = 3.3
    samples_per_measurement: int = 13
    # GA
    population_size: int = 32
    offspring_per_iteration: int = 16
    replacement: str = "replace-worst"
    max_iterations: int = 2000
    mutation_variant: str = "redraw"
    # schedule
    schedule: str = "exponential"
    r0: float = 0.06
    r_end: float = 0.012
    d: float = 80.0
    kappa_start: int = 2000
    tau: int = 12
    epsilon: int = 32768
    # harness
    profile: str = "virtex5"
    sweep_d: tuple = (80.0, 400.0, 1000.0)
    n_repeats: int = 10
    iterations_per_repeat: int = 500
    decorrelate_alpha: float = 0.0
    baseline_samples: int = 1000
    n_workers: int = 1
    early_stop: int | None = None
    out_dir: str = "out"
    emit_svg: bool = False


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_float_list(raw: str) -> tuple:
    values = tuple(float(part) for part in raw.split(",") if part.strip())
    if not values:
        raise ValueError("expected a comma-separated list of numbers")
    return values


def _parse_optional_float(raw: str) -> float | None:
    return None if raw.strip().lower() == "none" else float(raw)


def _parse_optional_int(raw: str) -> int | None:
    return None if raw.strip().lower() == "none" else int(raw)


_CONFIG_PARSERS = {
    "n_outputs": int,
    "n_modes": int,
    "target_channel": int,
    "seed": int,
    "gain": _parse_optional_float,
    "gain_fraction": float,
    "noise_sigma_rel": float,
    "noise_sigma_volts": _parse_optional_float,
    "adc_bits": int,
    "adc_full_scale": float,
    "samples_per_measurement": int,
    "population_size": int,
    "offspring_per_iteration": int,
    "replacement": str,
    "max_iterations": int,
    "mutation_variant": str,
    "schedule": str,
    "r0": float,
    "r_end": float,
    "d": float,
    "kappa_start": int,
    "tau": int,
    "epsilon": int,
    "profile": str,
    "sweep_d": _parse_float_list,
    "n_repeats": int,
    "iterations_per_repeat": int,
    "decorrelate_alpha": float,
    "baseline_samples": int,
    "n_workers": int,
    "early_stop": _parse_optional_int,
    "out_dir": str,
    "emit_svg": _parse_bool,
}


def parse_config_file(path: str) -> dict:
    """Flat key=value file with # comments; unknown keys are errors."""
    values: dict = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_PARSERS[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge config-file values and override values (overrides win)."""
    merged: dict = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in _CONFIG_PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(value, str) and _CONFIG_PARSERS[key] is not str:
                try:
                    value = _CONFIG_PARSERS[key](value)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {exc}") from exc
            merged[key] = value
    try:
        config = ExperimentConfig(**merged)
        validate_config(config)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return config


def validate_config(config: ExperimentConfig) -> None:
    if not 0 <= config.seed <= _U64:
        raise ConfigError(f"seed must fit in 64 bits, got {config.seed}")
    if config.schedule not in ("exponential", "linear-clamped", "constant"):
        raise ConfigError(f"unknown schedule {config.schedule!r}")
    if config.gain is not None and config.gain <= 0:
        raise ConfigError(f"gain must be positive, got {config.gain}")
    if not 0 < config.gain_fraction <= 1:
        raise ConfigError(f"gain_fraction must be in (0, 1], got {config.gain_fraction}")
    if config.noise_sigma_rel < 0:
        raise ConfigError(f"noise_sigma_rel must be >= 0, got {config.noise_sigma_rel}")
    if config.noise_sigma_volts is not None and config.noise_sigma_volts < 0:
        raise ConfigError(f"noise_sigma_volts must be >= 0, got {config.noise_sigma_volts}")
    if config.baseline_samples < 1:
        raise ConfigError(f"baseline_samples must be >= 1, got {config.baseline_samples}")
    if config.n_repeats < 1:
        raise ConfigError(f"n_repeats must be >= 1, got {config.n_repeats}")
    if config.iterations_per_repeat < 1:
        raise ConfigError(f"iterations_per_repeat must be >= 1, got {config.iterations_per_repeat}")
    if not 0 <= config.decorrelate_alpha <= 1:
        raise ConfigError(f"decorrelate_alpha must be in [0, 1], got {config.decorrelate_alpha}")
    if config.n_workers < 1:
        raise ConfigError(f"n_workers must be >= 1, got {config.n_workers}")


def make_schedule(config: ExperimentConfig, d_override: float | None = None) -> ga.MutationSchedule:
    if config.schedule == "exponential":
        return ga.MutationSchedule.exponential(
            config.r0, config.r_end, d_override if d_override is not None else config.d, config.epsilon
        )
    if d_override is not None:
        raise ConfigError("decay sweeps require the exponential schedule")
    if config.schedule == "linear-clamped":
        return ga.MutationSchedule.linear(config.kappa_start, config.tau, config.r_end, config.epsilon)
    return ga.MutationSchedule.constant(config.r0, config.epsilon)


def ga_seed(config_seed: int, run_index: int) -> int:
    return (config_seed ^ (run_index + 1)) & _U64


@dataclass(frozen=True)
class Bench:
    """Prepared physical setup shared by every run of one experiment."""

    medium: TransmissionMatrix
    detector: DetectorModel
    baseline: float


def prepare_bench(config: ExperimentConfig, medium: TransmissionMatrix | None = None, baseline_rng_key=None) -> Bench:
    """Generate (or adopt) the medium, measure the baseline, calibrate gain."""
    if medium is None:
        medium = generate_medium(config.n_outputs, config.n_modes, config.target_channel, config.seed)
    if baseline_rng_key is None:
        baseline_rng_key = [config.seed, BASELINE_STREAM_TAG]
    baseline = baseline_intensity(medium, np.random.default_rng(baseline_rng_key), config.baseline_samples)
    gain = config.gain if config.gain is not None else config.gain_fraction * config.adc_full_scale / baseline
    if config.noise_sigma_volts is not None:
        sigma = config.noise_sigma_volts
    else:
        sigma = config.noise_sigma_rel * gain * baseline
    detector = DetectorModel(
        gain=gain,
        noise_sigma=sigma,
        adc_bits=config.adc_bits,
        adc_full_scale=config.adc_full_scale,
        samples_per_measurement=config.samples_per_measurement,
    )
    return Bench(medium=medium, detector=detector, baseline=baseline)


def resolve_profile(config: ExperimentConfig) -> timing.HardwareProfile | None:
    if config.profile.lower() in ("", "none"):
        return None
    try:
        return timing.resolve_profile(config.profile)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read profile {config.profile}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def compute_run(
    config: ExperimentConfig,
    run_index: int = 0,
    bench: Bench | None = None,
    max_iterations: int | None = None,
) -> tuple[metrics.RunTrace, dict]:
    """One seeded GA run; returns the trace and its summary dict."""
    if bench is None:
        bench = prepare_bench(config)
    seed = ga_seed(config.seed, run_index)
    cfg = ga.GaConfig(
        population_size=config.population_size,
        offspring_per_iteration=config.offspring_per_iteration,
        n_modes=config.n_modes,
        schedule=make_schedule(config),
        replacement=config.replacement,
        max_iterations=max_iterations if max_iterations is not None else config.max_iterations,
        seed=seed,
        mutation_variant=config.mutation_variant,
    )
    trace = ga.run(
        cfg,
        bench.medium,
        bench.detector,
        bench.baseline,
        profile=resolve_profile(config),
        n_workers=config.n_workers,
        early_stop=config.early_stop,
    )
    return trace, summarize(trace, config_seed=config.seed, run_seed=seed)


def summarize(trace: metrics.RunTrace, config_seed: int | None = None, run_seed: int | None = None) -> dict:
    """RunSummary fields, all recomputable from the trace."""
    eta = metrics.convergence_efficiency(trace)
    f_xi = metrics.normalized_convergence(trace)
    k_star = metrics.optimal_stop(trace)
    idx = k_star - trace.records[0].k
    return {
        "final_zeta": float(trace.final_zeta()),
        "max_eta": float(eta[idx]),
        "optimal_stop_k": k_star,
        "f_xi_at_kstar": float(f_xi[idx]),
        "total_measurements": trace.records[-1].cum_measurements,
        "model_time_us_at_kstar": trace.records[idx].model_time_us,
        "config_seed": config_seed,
        "ga_seed": run_seed,
    }


# -- file IO ---------------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _num(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_trace_csv(trace: metrics.RunTrace, path: str) -> None:
    lines = [TRACE_HEADER]
    rows = ([] if trace.init_record is None else [trace.init_record]) + trace.records
    for rec in rows:
        enh = rec.best_intensity / trace.baseline
        lines.append(
            f"{rec.k},{rec.best_digitized},{_num(float(rec.best_intensity))},{_num(enh)},"
            f"{rec.mutation_rate_num},{rec.cum_measurements},{_num(float(rec.model_time_us))}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_trace_csv(path: str) -> metrics.RunTrace:
    """Parse a trace file back into a RunTrace for offline analysis."""
    with open(path) as fh:
        return parse_trace_lines(fh.read().splitlines(), origin=path)


def parse_trace_lines(lines: list[str], origin: str = "<trace>") -> metrics.RunTrace:
    """Parse trace CSV lines; errors name the offending row.

    Absolute intensities are normalized away: the returned trace carries
    the enhancement column as its intensity with baseline 1.0, which leaves
    every metric (zeta, F, eta, k*) bit-identical to the run-time values.
    """
    path = origin
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"{path}:1: expected trace header {TRACE_HEADER!r}")
    init_record = None
    records = []
    for rowno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"{path}:{rowno}: expected 7 columns, got {len(parts)}")
        try:
            rec = metrics.IterationRecord(
                k=int(parts[0]),
                best_digitized=int(parts[1]),
                best_intensity=float(parts[3]),  # enhancement column; baseline normalized to 1
                mutation_rate_num=int(parts[4]),
                cum_measurements=int(parts[5]),
                model_time_us=float(parts[6]),
            )
        except ValueError as exc:
            raise ValueError(f"{path}:{rowno}: {exc}") from exc
        if rec.k == 0:
            init_record = rec
        else:
            records.append(rec)
    if not records:
        raise ValueError(f"{path}: no iteration rows")
    return metrics.RunTrace(records=records, baseline=1.0, init_record=init_record)


def write_json(payload: dict, path: str) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_run_svgs(trace: metrics.RunTrace, out_dir: str) -> None:
    ks = [float(k) for k in trace.iterations()]
    zeta = [float(z) for z in trace.zeta_series()]
    eta = [float(e) for e in metrics.convergence_efficiency(trace)]
    svg.line_plot(
        os.path.join(out_dir, "enhancement.svg"),
        [("zeta", ks, zeta)],
        "Enhancement vs iteration",
        "iteration",
        "zeta",
    )
    svg.line_plot(
        os.path.join(out_dir, "eta.svg"),
        [("eta", ks[: len(eta)], eta)],
        "Convergence efficiency vs iteration",
        "iteration",
        "eta",
    )


# -- top-level commands -----------------------------------------------------


def run_experiment(config: ExperimentConfig, out_dir: str | None = None) -> dict:
    """One run; writes trace.csv and summary.json, returns the summary."""
    out_dir = out_dir if out_dir is not None else config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    trace, summary = compute_run(config)
    write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    write_json(summary, os.path.join(out_dir, "summary.json"))
    if config.emit_svg:
        _emit_run_svgs(trace, out_dir)
    return summary


def compute_sweep(config: ExperimentConfig, d_values=None) -> tuple[list[tuple[float, metrics.RunTrace, dict]], float]:
    """One run per decay value on the same medium and GA bit stream."""
    d_values = tuple(d_values) if d_values is not None else tuple(config.sweep_d)
    if not d_values:
        raise ConfigError("sweep needs at least one decay value")
    if config.schedule != "exponential":
        raise ConfigError("decay sweeps require the exponential schedule")
    bench = prepare_bench(config)
    runs = []
    for d_value in d_values:
        run_config = dataclasses.replace(config, d=float(d_value))
        trace, summary = compute_run(run_config, run_index=0, bench=bench)
        runs.append((float(d_value), trace, summary))
    sweep_max = max(trace.final_zeta() for _, trace, _ in runs)
    return runs, sweep_max


def sweep(config: ExperimentConfig, d_values=None, out_dir: str | None = None) -> dict:
    """Decay-factor comparison; writes per-run traces and sweep.csv."""
    out_dir = out_dir if out_dir is not None else config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    runs, sweep_max = compute_sweep(config, d_values)

    tags = [f"run{i}_D{d_value:g}" for i, (d_value, _, _) in enumerate(runs)]
    columns = {}
    summaries = {}
    for tag, (d_value, trace, summary) in zip(tags, runs):
        run_dir = os.path.join(out_dir, tag)
        os.makedirs(run_dir, exist_ok=True)
        write_trace_csv(trace, os.path.join(run_dir, "trace.csv"))
        write_json(summary, os.path.join(run_dir, "summary.json"))
        zeta = trace.zeta_series()
        columns[tag] = (
            zeta,
            metrics.normalized_convergence(trace, zeta_ref=sweep_max),
            metrics.convergence_efficiency(trace),
        )
        summaries[tag] = summary

    n_rows = max(len(cols[0]) for cols in columns.values())
    header = "iteration," + ",".join(f"zeta_{t},f_xi_{t},eta_{t}" for t in tags)
    lines = [header]
    for row in range(n_rows):
        cells = [str(row + 1)]
        for tag in tags:
            zeta, f_xi, eta = columns[tag]
            for arr in (zeta, f_xi, eta):
                cells.append(_num(float(arr[row])) if row < len(arr) else "")
        lines.append(",".join(cells))
    _atomic_write(os.path.join(out_dir, "sweep.csv"), "\n".join(lines) + "\n")

    result = {
        "sweep_max_zeta": float(sweep_max),
        "d_values": [d for d, _, _ in runs],
        "runs": summaries,
    }
    write_json(result, os.path.join(out_dir, "sweep_summary.json"))
    if config.emit_svg:
        ks = [float(k) for k in runs[0][1].iterations()]
        svg.line_plot(
            os.path.join(out_dir, "f_xi.svg"),
            [(tag, ks[: len(columns[tag][1])], [float(v) for v in columns[tag][1]]) for tag in tags],
            "Cross-run normalized convergence",
            "iteration",
            "F(xi)",
        )
        svg.line_plot(
            os.path.join(out_dir, "eta.svg"),
            [(tag, ks[: len(columns[tag][2])], [float(v) for v in columns[tag][2]]) for tag in tags],
            "Convergence efficiency",
            "iteration",
            "eta",
        )
    return result


def compute_repeat(config: ExperimentConfig) -> list[tuple[metrics.RunTrace, dict]]:
    """n_repeats fresh-population runs; medium optionally decorrelates between repeats."""
    bench = prepare_bench(config)
    results = []
    medium = bench.medium
    for i in range(config.n_repeats):
        if i > 0 and config.decorrelate_alpha > 0:
            rng = np.random.default_rng([config.seed, DECORRELATE_STREAM_TAG, i])
            medium = decorrelate(medium, config.decorrelate_alpha, rng)
            bench = prepare_bench(
                config, medium=medium, baseline_rng_key=[config.seed, BASELINE_STREAM_TAG, i]
            )
        trace, summary = compute_run(
            config, run_index=i, bench=bench, max_iterations=config.iterations_per_repeat
        )
        results.append((trace, summary))
    return results


def repeat(config: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Repetition study; writes repeats.csv, per-repeat traces, and CV stats."""
    out_dir = out_dir if out_dir is not None else config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    results = compute_repeat(config)

    lines = ["repeat,ga_seed,final_zeta,max_eta,optimal_stop_k"]
    finals = []
    for i, (trace, summary) in enumerate(results):
        run_dir = os.path.join(out_dir, f"repeat{i}")
        os.makedirs(run_dir, exist_ok=True)
        write_trace_csv(trace, os.path.join(run_dir, "trace.csv"))
        write_json(summary, os.path.join(run_dir, "summary.json"))
        finals.append(summary["final_zeta"])
        lines.append(
            f"{i},{summary['ga_seed']},{_num(summary['final_zeta'])},"
            f"{_num(summary['max_eta'])},{summary['optimal_stop_k']}"
        )
    _atomic_write(os.path.join(out_dir, "repeats.csv"), "\n".join(lines) + "\n")

    finals_arr = np.array(finals)
    mean = float(finals_arr.mean())
    std = float(finals_arr.std(ddof=1)) if len(finals) > 1 else 0.0
    stats = {
        "n_repeats": len(finals),
        "iterations_per_repeat": config.iterations_per_repeat,
        "mean_final_zeta": mean,
        "std_final_zeta": std,
        "cv_final_zeta": std / mean if mean else 0.0,
        "final_zetas": finals,
    }
    write_json(stats, os.path.join(out_dir, "repeat_summary.json"))
    if config.emit_svg:
        xs = [float(i) for i in range(len(finals))]
        svg.line_plot(
            os.path.join(out_dir, "repeats.svg"),
            [("final zeta", xs, finals)],
            "Final enhancement per repeat",
            "repeat",
            "zeta",
        )
    return stats


def analyze(trace_path: str) -> dict:
    """Recompute the run summary from a trace file.

    Numeric fields match the run-time summary exactly (same computation
    path over round-tripped floats).  Seeds are not stored in the CSV;
    they are copied from a summary.json sitting next to the trace when one
    exists.
    """
    trace = read_trace_csv(trace_path)
    summary = summarize(trace)
    sidecar = os.path.join(os.path.dirname(trace_path) or ".", "summary.json")
    if os.path.exists(sidecar):
        try:
            with open(sidecar) as fh:
                stored = json.load(fh)
            summary["config_seed"] = stored.get("config_seed")
            summary["ga_seed"] = stored.get("ga_seed")
        except (OSError, json.JSONDecodeError):
            pass
    return summary


def timing_report(profile_name: str, iterations: int) -> dict:
    """Offspring/iteration/total timings plus speedups vs the PC baseline."""
    try:
        profile = timing.resolve_profile(profile_name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    rep = timing.report(profile, iterations)
    payload = dataclasses.asdict(rep)
    pc = timing.get_profile("pc-matlab")
    if profile.name != pc.name:
        payload["speedup_vs_pc_matlab"] = timing.speedup(pc, profile, nominal=True)
    virtex5 = timing.get_profile("virtex5")
    if profile.iteration_override_us is None and profile.name != virtex5.name:
        payload["chunk_speedup_vs_virtex5"] = timing.speedup(
            virtex5.chunk_gen_ns, profile.chunk_gen_ns
        )
        payload["mask_generation_us"] = timing.mask_generation_time(profile)
        payload["virtex5_derived_mask_generation_us"] = timing.mask_generation_time(
            timing.derived(virtex5)
        )
    return payload
