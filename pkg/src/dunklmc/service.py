"""HTTP service exposing the solver and validation suites.

Thin layer: every endpoint builds domain objects from its request
model, calls the core package and wraps the arrays into the response
model.  The CLI calls the same ``handle_*`` functions in process, so a
request produces identical numbers locally and over the wire.

Error mapping: malformed payloads are FastAPI 422s; semantic
configuration problems return 400 with ``error_class: config``;
mathematical precondition failures return 400 with
``error_class: precondition``.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__, validate
from .dirichlet import regularity_probe, solve_dirichlet
from .domains import Domain
from .errors import (AccuracyError, ConfigError, DataError, DunklError,
                     PreconditionError)
from .kernels import occupation_time_ball
from .models import (CheckRow, OccupationRequest, OccupationResponse,
                     OccupationRow, ProbeRequest, ProbeResponse, ProbeRow,
                     SimulateRequest, SimulateResponse, SolveRequest,
                     SolveResponse, ValidateRequest, ValidateResponse,
                     config_echo)
from .process import run_paths


def handle_solve(req: SolveRequest) -> SolveResponse:
    sys = req.roots.build()
    domain = req.domain.build(sys.dim)
    cfg = req.sim.build()
    f = req.boundary.build(sys)
    pts = np.asarray(req.points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != sys.dim:
        raise ConfigError("solve points must match the system dimension")
    rep = solve_dirichlet(sys, domain, f, pts, cfg)
    return SolveResponse(
        dim=sys.dim,
        points=[list(map(float, p)) for p in rep.points],
        estimates=[float(v) for v in rep.estimates],
        std_errors=[float(v) for v in rep.std_errors],
        jump_exit_fraction=[float(v) for v in rep.jump_exit_fraction],
        n_paths=rep.n_paths,
        w_invariant_domain=rep.w_invariant_domain,
        uniqueness_guaranteed=rep.uniqueness_guaranteed,
        config_echo=config_echo(req.sim))


def handle_simulate(req: SimulateRequest) -> SimulateResponse:
    sys = req.roots.build()
    cfg = req.sim.build()
    if req.t_end <= 0:
        raise PreconditionError("t_end must be positive")
    x0 = np.asarray(req.x0, dtype=float) if req.x0 is not None \
        else np.zeros(sys.dim)
    if x0.shape != (sys.dim,):
        raise ConfigError("x0 has the wrong dimension")
    res = run_paths(sys, cfg, x0, horizon=req.t_end)
    sq = np.sum(res.positions ** 2, axis=1)
    ref = float(np.sum(x0 ** 2)) + (sys.dim + 2.0 * sys.gamma) * req.t_end
    return SimulateResponse(
        t_end=req.t_end,
        mean_sq_norm=float(np.mean(sq)),
        std_error=float(np.std(sq, ddof=1) / math.sqrt(res.n)) if res.n > 1 else 0.0,
        reference_sq_norm=ref,
        mean_jumps_per_path=float(np.mean(np.sum(res.jump_counts, axis=1))),
        n_paths=res.n,
        config_echo=config_echo(req.sim))


def handle_occupation(req: OccupationRequest) -> OccupationResponse:
    sys = req.roots.build()
    cfg = req.sim.build()
    if sys.lam <= 0:
        raise PreconditionError(
            f"occupation closed form needs lambda > 0 (lambda = {sys.lam:.4g})")
    r = float(req.region_radius)
    escape = float(req.escape_radius) if req.escape_radius else 4.0 * r
    if escape <= r:
        raise ConfigError("escape_radius must exceed region_radius")
    esc_dom = Domain.ball(np.zeros(sys.dim), escape)
    rows = []
    for si, pt in enumerate(req.base_points):
        x = np.asarray(pt, dtype=float)
        if x.shape != (sys.dim,):
            raise ConfigError("base point has the wrong dimension")
        cf = occupation_time_ball(sys, r, x)  # validates |x| <= r
        res = run_paths(sys, cfg, x, domain=esc_dom, stream_id=si,
                        occupation_ball=(np.zeros(sys.dim), r))
        rows.append(OccupationRow(
            r=r, x_norm=float(np.linalg.norm(x)),
            mc_estimate=float(np.mean(res.occupation)),
            closed_form=cf,
            std_error=float(np.std(res.occupation, ddof=1)
                            / math.sqrt(res.n)) if res.n > 1 else 0.0))
    return OccupationResponse(rows=rows, escape_radius=escape,
                              n_paths=cfg.paths, config_echo=config_echo(req.sim))


def handle_probe(req: ProbeRequest) -> ProbeResponse:
    sys = req.roots.build()
    domain = req.domain.build(sys.dim)
    cfg = req.sim.build()
    triples = regularity_probe(sys, domain, np.asarray(req.point, dtype=float),
                               req.t_list, cfg, substeps=req.substeps,
                               require_boundary=req.require_boundary)
    rows = [ProbeRow(t=t, prob_exit_le_t=p, std_error=se)
            for (t, p, se) in triples]
    return ProbeResponse(rows=rows, n_paths=cfg.paths,
                         config_echo=config_echo(req.sim))


def handle_validate(req: ValidateRequest) -> ValidateResponse:
    results = validate.run_suite(req.suite, seed=req.seed)
    failed = [r.check for r in results if not r.passed]
    return ValidateResponse(
        suite=req.suite, seed=req.seed, passed=not failed,
        failed_checks=failed,
        checks=[CheckRow(check=r.check, passed=r.passed, value=r.value,
                         target=r.target, tol=r.tol) for r in results],
        config_echo={"seed": req.seed, "suite": req.suite,
                     "version": __version__})


def _http_error(exc: DunklError) -> HTTPException:
    if isinstance(exc, PreconditionError):
        cls = "precondition"
    elif isinstance(exc, (ConfigError, DataError)):
        cls = "config"
    elif isinstance(exc, AccuracyError):
        cls = "accuracy"
    else:
        cls = "internal"
    return HTTPException(status_code=400,
                         detail={"error_class": cls, "message": str(exc)})


def create_app() -> FastAPI:
    app = FastAPI(title="dunklmc",
                  description="Monte Carlo Dirichlet solver for the Dunkl "
                              "Laplacian", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        try:
            return handle_solve(req)
        except DunklError as exc:
            raise _http_error(exc) from exc

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        try:
            return handle_simulate(req)
        except DunklError as exc:
            raise _http_error(exc) from exc

    @app.post("/occupation", response_model=OccupationResponse)
    def occupation(req: OccupationRequest):
        try:
            return handle_occupation(req)
        except DunklError as exc:
            raise _http_error(exc) from exc

    @app.post("/probe", response_model=ProbeResponse)
    def probe(req: ProbeRequest):
        try:
            return handle_probe(req)
        except DunklError as exc:
            raise _http_error(exc) from exc

    @app.post("/validate", response_model=ValidateResponse)
    def validate_endpoint(req: ValidateRequest):
        try:
            return handle_validate(req)
        except DunklError as exc:
            raise _http_error(exc) from exc

    return app


app = create_app()
