"""FastAPI service exposing the risk formulas, the Monte Carlo engine and
the verification suite.  Domain errors map to HTTP 422 so thin clients can
translate them to a single exit code."""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .errors import DomainError, InvalidConfig
from .risk import risk_so, risk_spn
from .schemas import (BreakdownOut, EstimateOut, IdentityOut, ProbeOut,
                      SimulateRequest, SweepOut, SweepRequest, SweepRowOut,
                      TheoryRequest, VerifyOut, VerifyRequest)
from .simulate import monte_carlo_risk
from .sweep import CSV_COLUMNS, SweepSpec, run_sweep
from .verify import run_verification


def create_app() -> FastAPI:
    app = FastAPI(title="spikelab", version=__version__)

    @app.exception_handler(DomainError)
    async def _domain_error(_request: Request, exc: DomainError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(InvalidConfig)
    async def _invalid_config(_request: Request, exc: InvalidConfig) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/theory", response_model=BreakdownOut)
    def theory(req: TheoryRequest) -> BreakdownOut:
        cfg = req.config.to_core()
        breakdown = risk_so(cfg) if req.target == "so" else risk_spn(cfg)
        return BreakdownOut(**asdict(breakdown), warnings=cfg.assumption_warnings())

    @app.post("/simulate", response_model=EstimateOut)
    def simulate(req: SimulateRequest) -> EstimateOut:
        cfg = req.config.to_core()
        mu = cfg.mu if req.mu is None else req.mu
        est = monte_carlo_risk(cfg, req.target, mu, req.trials, req.seed,
                               workers=req.workers)
        try:
            theory_cfg = cfg if req.target == "spn" else cfg.with_updates(mu=mu)
            breakdown = (risk_so(theory_cfg) if req.target == "so"
                         else risk_spn(theory_cfg))
            theory_total = breakdown.total
        except DomainError:
            theory_total = None
        return EstimateOut(mean=est.mean, stderr=est.stderr, trials=est.trials,
                           seed_root=est.seed_root, theory_total=theory_total)

    @app.post("/sweep", response_model=SweepOut)
    def sweep(req: SweepRequest) -> SweepOut:
        spec = SweepSpec(variable=req.variable, grid=tuple(req.grid),
                         base=req.config.to_core(), target=req.target,
                         trials=req.trials, seed_root=req.seed,
                         equal_strength=req.equal_strength)
        rows = run_sweep(spec, workers=req.workers)
        return SweepOut(columns=list(CSV_COLUMNS),
                        rows=[SweepRowOut.from_core(r) for r in rows])

    @app.post("/verify", response_model=VerifyOut)
    def verify(req: VerifyRequest) -> VerifyOut:
        report = run_verification(req.level, req.seed, workers=req.workers)
        return VerifyOut(level=report.level, d=report.d, trials=report.trials,
                         seed_root=report.seed_root,
                         probes=[ProbeOut(**asdict(p)) for p in report.probes],
                         identities=[IdentityOut(**asdict(i)) for i in report.identities],
                         passed=report.passed)

    return app


app = create_app()
