"""HTTP service exposing simulation, reconstruction and the ambiguity demos.

Reconstruction outcomes (no solution, budget exceeded) are domain results,
not protocol errors: they come back as status fields with HTTP 200 so batch
clients can script sweeps.  Schema violations surface as 422.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__, scenario
from .ambiguity import feasibility_table_demo
from .models import (
    AmbiguityRequest,
    CountRequest,
    CountResponse,
    PipelineReport,
    PipelineRequest,
    ReconstructRequest,
    ReconstructResponse,
    SimulateRequest,
    SimulateResponse,
)
from .reconstruct import BudgetExceededError, NoSolutionError, count_assignments, slam

app = FastAPI(
    title="echoslam",
    description="Room reconstruction and self-localization from unlabeled first-order acoustic echoes",
    version=__version__,
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=SimulateResponse, response_model_exclude_none=True)
def simulate(req: SimulateRequest) -> SimulateResponse:
    return scenario.run_simulate(req.scenario, req.include_waveforms, req.dedup)


@app.post("/reconstruct", response_model=ReconstructResponse, response_model_exclude_none=True)
def reconstruct(req: ReconstructRequest) -> ReconstructResponse:
    detected = None
    if req.waveforms is not None:
        waves = [scenario.waveform_from_model(m) for m in req.waveforms]
        sets = scenario.detect_waveforms(waves, req.acoustics, req.peaks)
        detected = [
            scenario.echo_set_model(m.point_id, e)
            for m, e in zip(req.waveforms, sets)
        ]
    else:
        sets = [scenario.echo_set_from_model(m) for m in req.echoes]
    try:
        sol = slam(
            *sets, d12=req.d12, d23=req.d23, cfg=scenario.slam_config(req.config)
        )
    except NoSolutionError as exc:
        return ReconstructResponse(status="no_solution", detail=str(exc), detected=detected)
    except BudgetExceededError as exc:
        return ReconstructResponse(
            status="budget_exceeded",
            detail=str(exc),
            counts={int(k): int(v) for k, v in exc.counts.items()},
            detected=detected,
        )
    return ReconstructResponse(
        status="ok", solution=scenario.solution_model(sol), detected=detected
    )


@app.post("/pipeline", response_model=PipelineReport, response_model_exclude_none=True)
def pipeline(req: PipelineRequest) -> PipelineReport:
    return scenario.run_pipeline(
        req.scenario, req.config, req.use_waveforms, req.include_timing
    )


@app.post("/ambiguity")
def ambiguity(req: AmbiguityRequest) -> dict:
    return feasibility_table_demo(seed=req.seed)


@app.post("/count", response_model=CountResponse)
def count(req: CountRequest) -> CountResponse:
    try:
        return CountResponse(count=count_assignments(req.n1, req.n2, req.n3, req.k))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
