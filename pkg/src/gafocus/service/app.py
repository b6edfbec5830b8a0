"""HTTP service wrapping the simulator.

Endpoints mirror the CLI verbs but stay file-free: runs execute in the
request and return summaries (optionally with the convergence series)
instead of writing trace files.  Long sweeps at paper scale take minutes;
clients wanting artifacts on disk should use the CLI, which shares the
same compute path and seed policy.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, harness, metrics, timing
from ..ga import MutationSchedule
from ..harness import ConfigError
from . import schemas

_SCHEDULE_KEYS = ("schedule", "r0", "r_end", "d", "kappa_start", "tau", "epsilon")


def _make_schedule(params: schemas.ScheduleParams) -> MutationSchedule:
    config = harness.build_config(overrides={key: getattr(params, key) for key in _SCHEDULE_KEYS})
    return harness.make_schedule(config)


def _run_config(req: schemas.RunRequest) -> harness.ExperimentConfig:
    values = req.model_dump(exclude={"include_series", "d_values", "n_repeats",
                                     "iterations_per_repeat", "decorrelate_alpha"})
    values = {key: value for key, value in values.items() if value is not None}
    for optional in ("gain", "noise_sigma_volts", "early_stop"):
        values[optional] = getattr(req, optional)
    return harness.build_config(overrides=values)


def _series(trace: metrics.RunTrace) -> schemas.TraceSeries:
    eta = metrics.convergence_efficiency(trace)
    return schemas.TraceSeries(
        iteration=[int(k) for k in trace.iterations()],
        zeta=[float(z) for z in trace.zeta_series()],
        f_xi=[float(f) for f in metrics.normalized_convergence(trace)],
        eta=[float(e) for e in eta],
    )


def create_app() -> FastAPI:
    app = FastAPI(title="gafocus", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(request, exc: ConfigError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/profiles", response_model=schemas.ProfilesResponse)
    def profiles() -> schemas.ProfilesResponse:
        return schemas.ProfilesResponse(profiles=sorted(timing.builtin_profiles()))

    @app.post("/timing", response_model=dict)
    def timing_endpoint(req: schemas.TimingRequest) -> dict:
        return harness.timing_report(req.profile, req.iterations)

    @app.post("/schedule/rates", response_model=schemas.RatesResponse)
    def schedule_rates(req: schemas.RatesRequest) -> schemas.RatesResponse:
        schedule = _make_schedule(req)
        first = schedule.first_index
        ks = [k for k in range(max(req.k_from, first), req.k_to + 1)]
        return schemas.RatesResponse(
            k=ks,
            rate=[schedule.rate(k) for k in ks],
            rate_numerator=[schedule.rate_numerator(k) for k in ks],
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run_endpoint(req: schemas.RunRequest) -> schemas.RunResponse:
        config = _run_config(req)
        trace, summary = harness.compute_run(config)
        return schemas.RunResponse(
            summary=schemas.RunSummary(**summary),
            series=_series(trace) if req.include_series else None,
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep_endpoint(req: schemas.SweepRequest) -> schemas.SweepResponse:
        config = _run_config(req)
        runs, sweep_max = harness.compute_sweep(config, req.d_values)
        return schemas.SweepResponse(
            sweep_max_zeta=float(sweep_max),
            runs=[
                schemas.SweepRunResult(d=d, summary=schemas.RunSummary(**summary))
                for d, _, summary in runs
            ],
        )

    @app.post("/repeat", response_model=schemas.RepeatResponse)
    def repeat_endpoint(req: schemas.RepeatRequest) -> schemas.RepeatResponse:
        import dataclasses

        import numpy as np

        config = dataclasses.replace(
            _run_config(req),
            n_repeats=req.n_repeats,
            iterations_per_repeat=req.iterations_per_repeat,
            decorrelate_alpha=req.decorrelate_alpha,
        )
        results = harness.compute_repeat(config)
        finals = [summary["final_zeta"] for _, summary in results]
        arr = np.array(finals)
        mean = float(arr.mean())
        std = float(arr.std(ddof=1)) if len(finals) > 1 else 0.0
        return schemas.RepeatResponse(
            n_repeats=len(finals),
            iterations_per_repeat=req.iterations_per_repeat,
            mean_final_zeta=mean,
            std_final_zeta=std,
            cv_final_zeta=std / mean if mean else 0.0,
            final_zetas=finals,
            summaries=[schemas.RunSummary(**summary) for _, summary in results],
        )

    @app.post("/analyze", response_model=schemas.RunSummary)
    def analyze_endpoint(req: schemas.AnalyzeRequest) -> schemas.RunSummary:
        try:
            trace = harness.parse_trace_lines(req.trace_csv.splitlines())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return schemas.RunSummary(**harness.summarize(trace))

    return app
