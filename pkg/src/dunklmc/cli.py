"""Command-line front end.

A thin client over the service layer: the config file is parsed into
the same request models the HTTP endpoints accept, then either executed
in process (default) or posted to a running service (``--server``).

Exit codes: 0 success; 1 configuration/parse errors; 2 mathematical
precondition failures; 3 validation-suite failure (failing check named
on stderr).
"""

from __future__ import annotations

import argparse
import sys

from pydantic import ValidationError

from . import __version__, config, reporting
from .errors import CheckFailure, ConfigError, DataError, DunklError, \
    PreconditionError
from .models import ValidateRequest, OutputSpec

_EXIT_OK, _EXIT_CONFIG, _EXIT_PRECONDITION, _EXIT_CHECKS = 0, 1, 2, 3

_TASKS = ("solve", "simulate", "occupation", "probe", "validate")


def _build_parser():
    p = argparse.ArgumentParser(
        prog="dunklmc",
        description="Monte Carlo Dirichlet solver for the Dunkl Laplacian")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat config file (see README)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override sim.seed")
        sp.add_argument("--out", default=None, help="override output.path")
        sp.add_argument("--format", choices=("csv", "json"), default=None,
                        help="override output.format")
        sp.add_argument("--server", default=None,
                        help="base URL of a running service; run remotely")

    for task in _TASKS:
        sp = sub.add_parser(task, help=f"run the {task} task")
        common(sp)
        if task == "validate":
            sp.add_argument("--suite", choices=("quick", "full"), default=None,
                            help="suite to run (config optional)")
        if task == "simulate":
            sp.add_argument("--trace-path", type=int, default=None,
                            help="dump one path's trajectory (path index)")
            sp.add_argument("--trace-out", default=None,
                            help="trajectory CSV destination")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    return p


def _load_request(args):
    if args.command == "validate" and args.config is None:
        req = ValidateRequest(suite=args.suite or "quick",
                              seed=args.seed if args.seed is not None else 0)
        return "validate", req, OutputSpec(format=args.format or "csv",
                                           path=args.out)
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config FILE")
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    kind, req, out = config.parse_config(text)
    if kind != args.command:
        raise ConfigError(
            f"config declares task.kind = {kind}, but the subcommand "
            f"is {args.command}")
    if args.command == "validate" and getattr(args, "suite", None):
        req.suite = args.suite
    if args.seed is not None:
        if hasattr(req, "sim"):
            req.sim.seed = args.seed
        else:
            req.seed = args.seed
    if args.out is not None:
        out.path = args.out
    if args.format is not None:
        out.format = args.format
    return kind, req, out


def _execute(kind, req, server):
    if server:
        return _execute_remote(kind, req, server)
    from . import service
    handler = {"solve": service.handle_solve,
               "simulate": service.handle_simulate,
               "occupation": service.handle_occupation,
               "probe": service.handle_probe,
               "validate": service.handle_validate}[kind]
    return handler(req)


def _execute_remote(kind, req, server):
    import httpx
    from . import models as m
    url = server.rstrip("/") + "/" + kind
    resp = httpx.post(url, json=req.model_dump(), timeout=None)
    if resp.status_code == 422:
        raise ConfigError(f"service rejected the request: {resp.text}")
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", {})
        except Exception:
            detail = {}
        cls = detail.get("error_class", "internal")
        msg = detail.get("message", resp.text)
        if cls == "precondition":
            raise PreconditionError(msg)
        if cls in ("config", "accuracy"):
            raise ConfigError(msg)
        raise DunklError(msg)
    model = {"solve": m.SolveResponse, "simulate": m.SimulateResponse,
             "occupation": m.OccupationResponse, "probe": m.ProbeResponse,
             "validate": m.ValidateResponse}[kind]
    return model.model_validate(resp.json())


def _emit(kind, resp, out: OutputSpec):
    if out.format == "json":
        payload = reporting.to_json(resp)
    else:
        payload = reporting.CSV_EMITTERS[kind](resp)
    if out.path:
        with open(out.path, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _summary(kind, resp, out: OutputSpec) -> str:
    dest = out.path or "stdout"
    if kind == "solve":
        return (f"solve: {len(resp.points)} point(s), n_paths={resp.n_paths}, "
                f"seed={resp.config_echo['seed']} -> {dest}")
    if kind == "simulate":
        return (f"simulate: t_end={resp.t_end}, mean|X|^2={resp.mean_sq_norm:.6g} "
                f"(reference {resp.reference_sq_norm:.6g}) -> {dest}")
    if kind == "occupation":
        return f"occupation: {len(resp.rows)} base point(s) -> {dest}"
    if kind == "probe":
        return f"probe: {len(resp.rows)} horizon(s) -> {dest}"
    if kind == "validate":
        status = "pass" if resp.passed else "FAIL"
        return (f"validate[{resp.suite}]: {len(resp.checks)} checks, "
                f"{status} -> {dest}")
    return kind


def _run_trace(args, req):
    from . import reporting as rep
    from .process import trace_path
    sys_ = req.roots.build()
    cfg = req.sim.build()
    rows = trace_path(sys_, None, req.x0 or [0.0] * sys_.dim, cfg,
                      path_index=args.trace_path, horizon=req.t_end)
    payload = rep.trace_csv(sys_.dim, [(args.trace_path, t, x, r)
                                       for (t, x, r) in rows])
    dest = args.trace_out or "trace.csv"
    with open(dest, "w") as fh:
        fh.write(payload)
    print(f"trace: path {args.trace_path} ({len(rows)} steps) -> {dest}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn
        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return _EXIT_OK
    try:
        kind, req, out = _load_request(args)
        resp = _execute(kind, req, args.server)
        _emit(kind, resp, out)
        if getattr(args, "trace_path", None) is not None:
            _run_trace(args, req)
        print(_summary(kind, resp, out))
        if kind == "validate":
            for row in resp.checks:
                mark = "pass" if row.passed else "FAIL"
                print(f"  [{mark}] {row.check}: value={row.value:.6g} "
                      f"tol={row.tol:.6g}")
            if not resp.passed:
                print(f"validation failed: {', '.join(resp.failed_checks)}",
                      file=sys.stderr)
                return _EXIT_CHECKS
        return _EXIT_OK
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except (ConfigError, DataError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return _EXIT_PRECONDITION
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return _EXIT_CHECKS
    except DunklError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
