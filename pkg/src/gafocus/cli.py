"""Command-line interface.

Subcommands: run, sweep, repeat, analyze, timing, serve.  Commands execute
in-process (the HTTP service is a separate opt-in via `serve`), so output
files and exit codes are fully deterministic.

Exit codes: 0 success; 2 configuration error (bad flags, config file,
unknown profile); 3 I/O error; 4 numeric or invariant violation (including
malformed trace files handed to analyze).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .harness import ConfigError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key=value config file")
    p.add_argument("--seed", type=int, metavar="U64", help="experiment seed")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--profile", metavar="NAME", help="hardware profile name or file (or 'none')")
    p.add_argument(
        "--noise-sigma",
        type=float,
        metavar="F",
        dest="noise_sigma",
        help="detector noise sigma relative to the baseline-mapped voltage",
    )
    p.add_argument("--svg", action="store_true", help="also emit SVG plots")
    p.add_argument("--workers", type=int, metavar="N", help="fitness evaluation threads")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="overrides",
        help="override any config key (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gafocus",
        description="Deterministic GA light-focusing simulator and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one seeded optimization run")
    _add_common(p)

    p = sub.add_parser("sweep", help="compare decay factors on one medium")
    _add_common(p)
    p.add_argument("--d", metavar="LIST", help="comma-separated decay factors (default 80,400,1000)")

    p = sub.add_parser("repeat", help="repetition study with fresh populations")
    _add_common(p)
    p.add_argument("--repeats", type=int, metavar="N", help="number of repeats")
    p.add_argument("--iterations", type=int, metavar="N", help="iterations per repeat")

    p = sub.add_parser("analyze", help="recompute a summary from a trace file")
    p.add_argument("trace", help="path to trace.csv")
    p.add_argument("--out", metavar="FILE", help="also write the summary JSON here")

    p = sub.add_parser("timing", help="hardware timing model report")
    p.add_argument("--profile", default="virtex5", metavar="NAME")
    p.add_argument("--iterations", type=int, default=2000, metavar="N")
    p.add_argument("--out", metavar="FILE", help="also write the report JSON here")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _config_from_args(args: argparse.Namespace, extra: dict | None = None) -> harness.ExperimentConfig:
    file_values = harness.parse_config_file(args.config) if args.config else {}
    overrides: dict = {}
    for pair in args.overrides:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.profile is not None:
        overrides["profile"] = args.profile
    if args.noise_sigma is not None:
        overrides["noise_sigma_rel"] = args.noise_sigma
    if args.svg:
        overrides["emit_svg"] = True
    if args.workers is not None:
        overrides["n_workers"] = args.workers
    for key, value in (extra or {}).items():
        if value is not None:
            overrides[key] = value
    return harness.build_config(file_values, overrides)


def _emit(payload: dict, out_path: str | None = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out_path:
        harness.write_json(payload, out_path)


def _format_timing_table(payload: dict) -> str:
    rows = [
        ("profile", payload["profile"]),
        ("iterations", payload["iterations"]),
        ("per offspring [us]", payload["per_offspring_us"]),
        ("per iteration [ms]", payload["per_iteration_ms"]),
        ("per iteration, nominal [ms]", payload["nominal_per_iteration_ms"]),
        ("total [s]", payload["total_s"]),
        ("total, nominal [s]", payload["nominal_total_s"]),
        ("measurement rate [Hz]", payload["measurement_rate_hz"]),
    ]
    if "speedup_vs_pc_matlab" in payload:
        rows.append(("speedup vs pc-matlab", payload["speedup_vs_pc_matlab"]))
    if "chunk_speedup_vs_virtex5" in payload:
        rows.append(("chunk speedup vs virtex5", payload["chunk_speedup_vs_virtex5"]))
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = _config_from_args(args)
            _emit(harness.run_experiment(config))
        elif args.command == "sweep":
            config = _config_from_args(args, extra={"sweep_d": args.d})
            _emit(harness.sweep(config))
        elif args.command == "repeat":
            config = _config_from_args(
                args,
                extra={"n_repeats": args.repeats, "iterations_per_repeat": args.iterations},
            )
            _emit(harness.repeat(config))
        elif args.command == "analyze":
            _emit(harness.analyze(args.trace), args.out)
        elif args.command == "timing":
            payload = harness.timing_report(args.profile, args.iterations)
            print(_format_timing_table(payload))
            if args.out:
                harness.write_json(payload, args.out)
        elif args.command == "serve":
            import uvicorn

            from .service.app import create_app

            uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, KeyError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
