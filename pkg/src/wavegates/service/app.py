"""FastAPI application wrapping the core package.

Endpoints run synchronously in the serving process; this is a local
experiment runner, not a distributed job system. Domain errors map to
HTTP responses that carry the same exit code the CLI would return.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import analyze
from ..cli import render_file
from ..errors import ConfigError, WavegatesError
from ..scenario import load_scenario, run_scenario, sweep
from .schemas import (
    AnalyzeRequest,
    AnalyzeResponse,
    HealthResponse,
    RenderRequest,
    RenderResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
)

app = FastAPI(
    title="wavegates",
    version=__version__,
    description="Excitation-wave logic on conductive networks.",
)


@app.exception_handler(WavegatesError)
async def domain_error_handler(_request: Request, exc: WavegatesError) -> JSONResponse:
    status = 422 if isinstance(exc, ConfigError) else 500
    return JSONResponse(
        status_code=status, content={"error": str(exc), "exit_code": exc.exit_code}
    )


@app.get("/health", response_model=HealthResponse)
async def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    scenario = load_scenario(req.scenario.to_config(), overrides=req.overrides)
    summary = run_scenario(scenario, req.output_dir)
    return SimulateResponse(output_dir=req.output_dir, summary=summary)


@app.post("/sweep", response_model=SweepResponse)
def run_sweep(req: SweepRequest) -> SweepResponse:
    cfg = req.scenario.to_config()
    for key, value in req.overrides.items():
        parts = key.split(".")
        node = cfg
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    report = sweep(cfg, req.parameter, req.values, req.output_dir)
    return SweepResponse(output_dir=req.output_dir, report=report)


@app.post("/analyze", response_model=AnalyzeResponse)
def run_analysis(req: AnalyzeRequest) -> AnalyzeResponse:
    options = dict(req.options)
    if req.config_path:
        scenario = load_scenario(req.config_path)
        options.setdefault("grid", scenario.grid)
        if scenario.regions:
            options.setdefault("regions", scenario.resolved["structural"]["regions"])
        options.setdefault("tail_start", scenario.activity_opts["tail_start"])
        if scenario.activity_opts["intervals"]:
            options.setdefault("intervals", scenario.activity_opts["intervals"])
    report = analyze(req.artifact_dir, req.mode, options, outdir=req.output_dir)
    return AnalyzeResponse(mode=report["mode"], result=report["result"])


@app.post("/render", response_model=RenderResponse)
def render(req: RenderRequest) -> RenderResponse:
    out = render_file(req.input_path, req.output_path, req.config_path)
    return RenderResponse(written=str(out))
