"""summtool: thin command-line client over the service handlers.

Each subcommand builds the same request model the HTTP endpoint accepts and
either calls the handler in process (default) or posts it to a running
service (``--server``).  Reports are deterministic JSON (floats pinned to 17
significant digits) with the effective configuration embedded; ``--csv``
additionally emits plot data for gevrey and sum reports.

Exit codes: 0 success, 1 domain error (singular linear part, pole on the
ray, ...), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from pydantic import ValidationError

from . import __version__, service
from .errors import DomainError
from .reports import dump_report, emit_plotdata
from .schemas import (
    BlowupModel,
    CheckRequest,
    ClassifyRequest,
    ComplexModel,
    DecomposeRequest,
    DecompositionModel,
    ExponentsModel,
    GevreyRequest,
    LevelModel,
    LevelsRequest,
    MatrixModel,
    MonomialModel,
    PointModel,
    PullbackRequest,
    ReduceRequest,
    RunConfig,
    SeriesModel,
    SingularRequest,
    SolveRequest,
    SumRequest,
    SystemModel,
)

# ------------------------------------------------------------- arg parsing


def _parse_monomial(text: str) -> MonomialModel:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"monomial must be 'p,q', got {text!r}")
    return MonomialModel(p=int(parts[0]), q=int(parts[1]))


def _parse_level(text: str) -> LevelModel:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"level must be 'p,q,k', got {text!r}")
    return LevelModel(p=int(parts[0]), q=int(parts[1]), k=parts[2])


def _parse_exponents(text: str) -> ExponentsModel:
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"exponents must be 'p,q,p_prime,q_prime', got {text!r}")
    return ExponentsModel(p=parts[0], q=parts[1], p_prime=parts[2], q_prime=parts[3])


def _parse_point(text: str) -> PointModel:
    vals = [float(x) for x in text.split(",")]
    if len(vals) == 2:
        vals = [vals[0], 0.0, vals[1], 0.0]
    if len(vals) != 4:
        raise ValueError(f"point must be 'x1,x2' or 're1,im1,re2,im2', got {text!r}")
    return PointModel(
        x1=ComplexModel(re=vals[0], im=vals[1]), x2=ComplexModel(re=vals[2], im=vals[3])
    )


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_series(path: str) -> SeriesModel:
    return SeriesModel.model_validate(_load_json(path))


def _load_matrix(path: str) -> MatrixModel:
    """Constant matrix from a {'rows': ...} file or the (0, 0) term of a series file."""
    raw = _load_json(path)
    if "rows" in raw:
        return MatrixModel.model_validate(raw)
    series = SeriesModel.model_validate(raw).to_series()
    if len(series.shape) != 2:
        raise ValueError(f"{path}: series is not matrix-valued")
    v = series.coefficient(0, 0)
    rows = [
        [ComplexModel.of(v[i, j]) for j in range(series.shape[1])]
        for i in range(series.shape[0])
    ]
    return MatrixModel(rows=rows)


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = RunConfig.model_validate(_load_json(args.config))
    update = cfg.model_dump()
    if getattr(args, "mode", None):
        update["mode"] = args.mode
    if getattr(args, "pade", None):
        l_deg, m_deg = (int(x) for x in args.pade.split(","))
        update["pade"] = {"L": l_deg, "M": m_deg}
    if getattr(args, "nodes", None) is not None:
        update["quadrature"]["nodes"] = args.nodes
    if getattr(args, "panels", None) is not None:
        update["quadrature"]["panels"] = args.panels
    if getattr(args, "xi_max_factor", None) is not None:
        update["quadrature"]["xi_max_factor"] = args.xi_max_factor
    if getattr(args, "degree_floor", None) is not None:
        update["degree_floor"] = args.degree_floor
    if getattr(args, "radius", None) is not None:
        update["radius"] = args.radius
    return RunConfig.model_validate(update)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file (RunConfig schema)")
    parser.add_argument("--output", help="report path (default: stdout)")
    parser.add_argument(
        "--csv",
        help="also write plot-data CSV to this path (gevrey reports: "
        "degree,log_norm,fitted; sum reports: re_x1,im_x1,re_x2,im_x2,"
        "re_value,im_value,tail_bound)",
    )
    parser.add_argument("--server", help="base URL of a running service; post instead of computing locally")
    parser.add_argument("--mode", choices=["float", "rational"], help="numeric mode override")
    parser.add_argument("--pade", help="Pade degrees 'L,M'")
    parser.add_argument("--nodes", type=int, help="Gauss-Legendre nodes per panel")
    parser.add_argument("--panels", type=int, help="quadrature panel count")
    parser.add_argument("--xi-max-factor", dest="xi_max_factor", type=float, help="Laplace truncation at factor*|t|")
    parser.add_argument("--degree-floor", dest="degree_floor", type=int, help="certificate window floor")
    parser.add_argument("--radius", type=float, help="summation sector radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summtool", description=__doc__)
    parser.add_argument("--version", action="version", version=f"summtool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="monomial layer decomposition of a series")
    _add_common(p)
    p.add_argument("--series", required=True, help="series JSON file")
    p.add_argument("--monomial", required=True, help="'p,q'")

    p = sub.add_parser("gevrey", help="Gevrey order estimate and coefficient-bound certificate")
    _add_common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--monomial", required=True)
    p.add_argument("--order", type=float, help="certificate order s (default: fitted s_hat)")

    p = sub.add_parser("levels", help="summability level compatibility and blow-up transcript")
    _add_common(p)
    p.add_argument("--candidate", required=True, help="'p,q,k' with k rational like 1/2")
    p.add_argument("--components", required=True, action="append", help="'p,q,k' (repeatable)")

    p = sub.add_parser("sum", help="Borel-Laplace k-sum at sample points")
    _add_common(p)
    p.add_argument("--series", required=True, help="series or decomposition JSON file")
    p.add_argument("--level", required=True, help="'p,q,k'")
    p.add_argument("--direction", type=float, default=0.0)
    p.add_argument("--point", required=True, action="append", help="'x1,x2' or 're1,im1,re2,im2' (repeatable)")

    p = sub.add_parser("singular", help="singular direction estimate from Borel-plane poles")
    _add_common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--level", required=True)
    p.add_argument("--point", required=True)

    pf = sub.add_parser("pfaffian", help="Pfaffian system analyses")
    pfsub = pf.add_subparsers(dest="subcommand", required=True)

    p = pfsub.add_parser("solve", help="formal solution of one side")
    _add_common(p)
    p.add_argument("--system", required=True, help="system JSON file")
    p.add_argument("--side", type=int, choices=[1, 2], default=1)
    p.add_argument("--order", type=int, required=True)

    p = pfsub.add_parser("check", help="complete-integrability residual")
    _add_common(p)
    p.add_argument("--system", required=True)
    p.add_argument("--order", type=int, required=True)

    p = pfsub.add_parser("classify", help="spectral constraints from the exponents")
    _add_common(p)
    p.add_argument("--exponents", required=True, help="'p,q,p_prime,q_prime'")
    p.add_argument("--A", dest="a", required=True, help="matrix JSON ({'rows': ...} or matrix series)")
    p.add_argument("--B", dest="b", required=True)

    p = pfsub.add_parser("reduce", help="rank reduction for p = p'")
    _add_common(p)
    p.add_argument("--A", dest="a", required=True, help="matrix series JSON")
    p.add_argument("--B", dest="b", required=True)
    p.add_argument("--exponents", required=True)

    p = pfsub.add_parser("pullback", help="pull the system back under a blow-up")
    _add_common(p)
    p.add_argument("--system", required=True)
    p.add_argument("--map", required=True, choices=["pi1", "pi2"])
    p.add_argument("--power", type=int, default=1)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


# ------------------------------------------------------------------ dispatch

_ENDPOINTS = {
    "decompose": ("/decompose", service.handle_decompose),
    "gevrey": ("/gevrey", service.handle_gevrey),
    "levels": ("/levels", service.handle_levels),
    "sum": ("/sum", service.handle_sum),
    "singular": ("/singular", service.handle_singular),
    "pfaffian solve": ("/pfaffian/solve", service.handle_solve),
    "pfaffian check": ("/pfaffian/check", service.handle_check),
    "pfaffian classify": ("/pfaffian/classify", service.handle_classify),
    "pfaffian reduce": ("/pfaffian/reduce", service.handle_reduce),
    "pfaffian pullback": ("/pfaffian/pullback", service.handle_pullback),
}


def _build_request(args, config: RunConfig):
    cmd = args.command
    if cmd == "pfaffian":
        cmd = f"pfaffian {args.subcommand}"
    if cmd == "decompose":
        req = DecomposeRequest(
            series=_load_series(args.series),
            monomial=_parse_monomial(args.monomial),
            config=config,
        )
    elif cmd == "gevrey":
        req = GevreyRequest(
            series=_load_series(args.series),
            monomial=_parse_monomial(args.monomial),
            s=args.order,
            config=config,
        )
    elif cmd == "levels":
        req = LevelsRequest(
            candidate=_parse_level(args.candidate),
            components=[_parse_level(c) for c in args.components],
            config=config,
        )
    elif cmd == "sum":
        raw = _load_json(args.series)
        series = decomposition = None
        if "layers" in raw:
            decomposition = DecompositionModel.model_validate(raw)
        else:
            series = SeriesModel.model_validate(raw)
        req = SumRequest(
            series=series,
            decomposition=decomposition,
            level=_parse_level(args.level),
            direction=args.direction,
            points=[_parse_point(p) for p in args.point],
            config=config,
        )
    elif cmd == "singular":
        req = SingularRequest(
            series=_load_series(args.series),
            level=_parse_level(args.level),
            point=_parse_point(args.point),
            config=config,
        )
    elif cmd == "pfaffian solve":
        req = SolveRequest(
            system=SystemModel.model_validate(_load_json(args.system)),
            side=args.side,
            order=args.order,
            config=config,
        )
    elif cmd == "pfaffian check":
        req = CheckRequest(
            system=SystemModel.model_validate(_load_json(args.system)),
            order=args.order,
            config=config,
        )
    elif cmd == "pfaffian classify":
        req = ClassifyRequest(
            exponents=_parse_exponents(args.exponents),
            a=_load_matrix(args.a),
            b=_load_matrix(args.b),
            config=config,
        )
    elif cmd == "pfaffian reduce":
        req = ReduceRequest(
            a=_load_series(args.a),
            b=_load_series(args.b),
            exponents=_parse_exponents(args.exponents),
            config=config,
        )
    elif cmd == "pfaffian pullback":
        req = PullbackRequest(
            system=SystemModel.model_validate(_load_json(args.system)),
            map=BlowupModel(axis=args.map, power=args.power),
            config=config,
        )
    else:
        raise ValueError(f"unknown command {cmd!r}")
    return cmd, req


def _run_remote(server: str, path: str, req) -> dict:
    import httpx

    url = server.rstrip("/") + path
    resp = httpx.post(url, json=req.model_dump(mode="json"), timeout=300.0)
    if resp.status_code == 200:
        return resp.json()
    detail = resp.json().get("detail", resp.text)
    if resp.status_code == 400:
        raise DomainError(str(detail))
    raise ValueError(f"server rejected request ({resp.status_code}): {detail}")


def run(args) -> int:
    if args.command == "serve":
        import uvicorn

        uvicorn.run(service.app, host=args.host, port=args.port)
        return 0
    config = _build_config(args)
    cmd, req = _build_request(args, config)
    path, handler = _ENDPOINTS[cmd]
    if args.server:
        report = _run_remote(args.server, path, req)
    else:
        report = handler(req).model_dump(mode="json", exclude_none=True)
    text = dump_report(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(emit_plotdata(report))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
