"""FastAPI service exposing the toolkit as stateless JSON endpoints.

Every endpoint is a pure computation: request in, report out, the effective
configuration echoed back.  Domain failures (singular linear part, pole on
the integration ray, ...) map to HTTP 400; malformed inputs map to 422.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .borel import estimate_singular_directions, sum_in_monomial
from .errors import DomainError
from .gevrey import (
    gevrey_certificate,
    gevrey_estimate,
    gevrey_window_rows,
    monomial_decompose,
    monomial_recompose,
)
from .pfaffian import (
    classify_spectra,
    cross_check_other_side,
    formal_solve,
    integrability_residual,
    pullback_system,
    rank_reduce,
)
from .schemas import (
    CertificateModel,
    CheckRequest,
    CheckResponse,
    ClassifyRequest,
    ClassifyResponse,
    ComplexModel,
    DecomposeRequest,
    DecomposeResponse,
    DecompositionModel,
    DiagnosisModel,
    GevreyEstimateModel,
    GevreyRequest,
    GevreyResponse,
    GrowthRowModel,
    InvariantModel,
    LevelsRequest,
    LevelsResponse,
    PairModel,
    PullbackRequest,
    PullbackResponse,
    ReduceRequest,
    ReduceResponse,
    ResidualTermModel,
    SeriesModel,
    SingularRequest,
    SingularResponse,
    SolveRequest,
    SolveResponse,
    SumRequest,
    SumResponse,
    SumRowModel,
    SystemModel,
    TranscriptModel,
    VerdictModel,
)
from .tauberian import levels_compatible, normalize_by_blowups

# ------------------------------------------------------------------ handlers


def handle_decompose(req: DecomposeRequest) -> DecomposeResponse:
    f = req.series.to_series(req.config.exact)
    d = monomial_decompose(f, req.monomial.to_monomial())
    return DecomposeResponse(config=req.config, decomposition=DecompositionModel.of(d))


def handle_gevrey(req: GevreyRequest) -> GevreyResponse:
    f = req.series.to_series(req.config.exact)
    monomial = req.monomial.to_monomial()
    estimate = gevrey_estimate(f, monomial)
    s = req.s if req.s is not None else max(0.0, estimate.s_hat)
    floor = (
        req.config.degree_floor
        if req.config.degree_floor is not None
        else max(1, f.trunc // 3)
    )
    cert = gevrey_certificate(f, monomial, s, floor)
    rows = []
    for n, m, log_norm, g in gevrey_window_rows(f, monomial):
        fitted = (
            math.log(estimate.c_hat)
            + (n + m) * math.log(estimate.a_hat)
            + estimate.s_hat * g
        )
        rows.append(
            GrowthRowModel(n=n, m=m, degree=n + m, log_norm=log_norm, fitted=fitted)
        )
    return GevreyResponse(
        config=req.config,
        monomial=req.monomial,
        estimate=GevreyEstimateModel.of(estimate),
        certificate=CertificateModel(
            s=s,
            refused=cert is None,
            C=None if cert is None else cert[0],
            A=None if cert is None else cert[1],
            degree_floor=floor,
        ),
        growth_rows=rows,
    )


def handle_levels(req: LevelsRequest) -> LevelsResponse:
    candidate = req.candidate.to_level()
    components = [c.to_level() for c in req.components]
    verdict = levels_compatible(candidate, components)
    transcript = None
    all_levels = [candidate] + components
    if len(all_levels) >= 2:
        transcript = TranscriptModel.of(normalize_by_blowups(all_levels))
    return LevelsResponse(
        config=req.config,
        verdict=VerdictModel(
            compatible=verdict.compatible,
            reason=verdict.reason,
            invariants=[
                InvariantModel(kp=str(kp), kq=str(kq)) for kp, kq in verdict.invariants
            ],
        ),
        transcript=transcript,
    )


def handle_sum(req: SumRequest) -> SumResponse:
    if req.series is not None:
        f = req.series.to_series(False)
    else:
        f = monomial_recompose(req.decomposition.to_decomposition(False))
    level = req.level.to_level()
    points = [(pt.x1.to_complex(), pt.x2.to_complex()) for pt in req.points]
    quad = req.config.quadrature
    results = sum_in_monomial(
        f.to_float(),
        level,
        req.direction,
        points,
        pade_degrees=(req.config.pade.L, req.config.pade.M),
        xi_max_factor=quad.xi_max_factor,
        nodes=quad.nodes,
        panels=quad.panels,
        pole_margin=quad.pole_margin,
        residue_tol=quad.residue_tol,
        radius=req.config.radius,
    )
    rows = [
        SumRowModel(
            x1=ComplexModel.of(r.point[0]),
            x2=ComplexModel.of(r.point[1]),
            t=ComplexModel.of(r.t),
            value_re=r.value.real,
            value_im=r.value.imag,
            tail_bound=r.tail_bound,
        )
        for r in results
    ]
    return SumResponse(config=req.config, level=req.level, direction=req.direction, rows=rows)


def handle_singular(req: SingularRequest) -> SingularResponse:
    f = req.series.to_series(False)
    level = req.level.to_level()
    dirs = estimate_singular_directions(
        f,
        level,
        (req.point.x1.to_complex(), req.point.x2.to_complex()),
        pade_degrees=(req.config.pade.L, req.config.pade.M),
        radius=req.config.pole_radius,
        cluster_tol=req.config.cluster_tol,
        residue_tol=req.config.quadrature.residue_tol,
    )
    return SingularResponse(config=req.config, directions=dirs)


def handle_solve(req: SolveRequest) -> SolveResponse:
    sys = req.system.to_system(req.config.exact)
    y = formal_solve(sys, req.side, req.order)
    residual = cross_check_other_side(sys, y, req.side, req.order)
    from .values import value_norm

    if req.config.exact:
        tol = 0.0
    else:
        scale = max((value_norm(v) for v in y.coeffs.values()), default=1.0)
        tol = 1e-9 * max(1.0, scale)
    val = residual.valuation(tol=tol)
    return SolveResponse(
        config=req.config,
        side=req.side,
        order=req.order,
        solution=SeriesModel.of(y),
        residual_max_norm=max(
            (value_norm(v) for v in residual.coeffs.values()), default=0.0
        ),
        residual_valuation=val,
    )


def handle_check(req: CheckRequest) -> CheckResponse:
    sys = req.system.to_system(req.config.exact)
    residual = integrability_residual(sys, req.order)
    max_norm = residual.max_norm()
    return CheckResponse(
        config=req.config,
        order=req.order,
        integrable=max_norm <= 1e-12,
        max_norm=max_norm,
        residual=[
            ResidualTermModel(alpha=list(a), series=SeriesModel.of(s))
            for a, s in sorted(residual.terms.items())
        ],
    )


def handle_classify(req: ClassifyRequest) -> ClassifyResponse:
    a = req.a.to_value(req.config.exact)
    b = req.b.to_value(req.config.exact)
    diag = classify_spectra(req.exponents.as_tuple(), a, b)
    d = diag.details
    return ClassifyResponse(
        config=req.config,
        exponents=req.exponents,
        diagnosis=DiagnosisModel(
            case=diag.case,
            violated=diag.violated,
            eigenvalues_a=[ComplexModel.of(z) for z in d.get("eigenvalues_a", [])] or None,
            eigenvalues_b=[ComplexModel.of(z) for z in d.get("eigenvalues_b", [])] or None,
            pairs=[
                PairModel(
                    mu=ComplexModel.of(p["mu"]),
                    lam=ComplexModel.of(p["lambda"]),
                    satisfied=p["satisfied"],
                    restricted=p["restricted"],
                )
                for p in d.get("pairs", [])
            ]
            or None,
            a_nilpotent=d.get("a_nilpotent"),
            b_nilpotent=d.get("b_nilpotent"),
        ),
    )


def handle_reduce(req: ReduceRequest) -> ReduceResponse:
    a = req.a.to_series(req.config.exact)
    b = req.b.to_series(req.config.exact)
    pair = rank_reduce(a, b, req.exponents.as_tuple())
    max_norm = max(
        (v for v in pair.residual.norms().values()), default=0.0
    )
    return ReduceResponse(
        config=req.config,
        atilde=SeriesModel.of(pair.atilde),
        btilde=SeriesModel.of(pair.btilde),
        residual=SeriesModel.of(pair.residual),
        residual_max_norm=max_norm,
    )


def handle_pullback(req: PullbackRequest) -> PullbackResponse:
    sys = req.system.to_system(req.config.exact)
    out = pullback_system(sys, req.map.to_map())
    return PullbackResponse(config=req.config, system=SystemModel.of(out))


# ----------------------------------------------------------------- FastAPI app

app = FastAPI(
    title="summtool",
    version=__version__,
    description="Monomial summability analyses as a stateless JSON service.",
)


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/")
def root():
    return {
        "name": "summtool",
        "version": __version__,
        "endpoints": [
            "/decompose",
            "/gevrey",
            "/levels",
            "/sum",
            "/singular",
            "/pfaffian/solve",
            "/pfaffian/check",
            "/pfaffian/classify",
            "/pfaffian/reduce",
            "/pfaffian/pullback",
        ],
    }


@app.post("/decompose", response_model=DecomposeResponse, response_model_exclude_none=True)
def decompose(req: DecomposeRequest) -> DecomposeResponse:
    return handle_decompose(req)


@app.post("/gevrey", response_model=GevreyResponse, response_model_exclude_none=True)
def gevrey(req: GevreyRequest) -> GevreyResponse:
    return handle_gevrey(req)


@app.post("/levels", response_model=LevelsResponse, response_model_exclude_none=True)
def levels(req: LevelsRequest) -> LevelsResponse:
    return handle_levels(req)


@app.post("/sum", response_model=SumResponse, response_model_exclude_none=True)
def sum_(req: SumRequest) -> SumResponse:
    return handle_sum(req)


@app.post("/singular", response_model=SingularResponse, response_model_exclude_none=True)
def singular(req: SingularRequest) -> SingularResponse:
    return handle_singular(req)


@app.post("/pfaffian/solve", response_model=SolveResponse, response_model_exclude_none=True)
def pfaffian_solve(req: SolveRequest) -> SolveResponse:
    return handle_solve(req)


@app.post("/pfaffian/check", response_model=CheckResponse, response_model_exclude_none=True)
def pfaffian_check(req: CheckRequest) -> CheckResponse:
    return handle_check(req)


@app.post("/pfaffian/classify", response_model=ClassifyResponse, response_model_exclude_none=True)
def pfaffian_classify(req: ClassifyRequest) -> ClassifyResponse:
    return handle_classify(req)


@app.post("/pfaffian/reduce", response_model=ReduceResponse, response_model_exclude_none=True)
def pfaffian_reduce(req: ReduceRequest) -> ReduceResponse:
    return handle_reduce(req)


@app.post("/pfaffian/pullback", response_model=PullbackResponse, response_model_exclude_none=True)
def pfaffian_pullback(req: PullbackRequest) -> PullbackResponse:
    return handle_pullback(req)
