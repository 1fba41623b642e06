"""Command-line front end.

A thin client over the service handlers: each subcommand builds the same
request models the HTTP endpoints accept, invokes the handler in process,
and renders the response as text or JSON.

Exit codes: 0 success, 1 usage error, 2 no convergence, 3 spacelike
violation, 4 data/file error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import discrete, models
from .errors import GrwlabError, NoConvergence, SpacelikeViolation
from .service import handlers
from .service import schemas as S

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_SPACELIKE = 3
EXIT_DATA = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _model_ref(token: str) -> S.ModelRef:
    if token in models.CATALOG:
        return S.ModelRef(name=token)
    spec = models.resolve_model(token)  # raises DataFileError when unknown
    return S.ModelRef(definition=S.ModelDefinition(
        dim=spec.dim, warping=spec.warping_src,
        interval=(_end_token(spec.interval[0]), _end_token(spec.interval[1])),
        fiber=spec.fiber_token))


def _end_token(v: float):
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return v


def _floats(text: str, n: int, what: str) -> tuple:
    parts = text.split(",")
    if len(parts) != n:
        raise _UsageError(f"{what} needs {n} comma-separated values")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"bad {what}: {exc}") from None


def _ints(text: str, n: int, what: str) -> tuple:
    parts = text.split(",")
    if len(parts) != n:
        raise _UsageError(f"{what} needs {n} comma-separated values")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"bad {what}: {exc}") from None


def _grid_payload_from_file(path: str) -> S.GridPayload:
    gf, model_name = discrete.read_grid(path)
    return handlers.grid_to_payload(gf, model_name)


def _emit_json(resp) -> None:
    print(json.dumps(resp.model_dump(), sort_keys=True, indent=2))


def build_parser() -> _Parser:
    parser = _Parser(prog="grwlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("models", help="list the builtin model catalog")

    p = sub.add_parser("parse-expr", help="parse, differentiate and evaluate an expression")
    p.add_argument("source")
    p.add_argument("--diff", type=int, default=0, metavar="N")
    p.add_argument("--at", action="append", default=[], metavar="VAR=VALUE")

    p = sub.add_parser("check-model", help="classify a model against the theorem hypotheses")
    p.add_argument("--model", required=True)
    p.add_argument("--window", default=None, metavar="a,b")
    p.add_argument("--samples", type=int, default=10_001)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="run the discrete identity suite")
    p.add_argument("--model", required=True)
    p.add_argument("--graph", required=True,
                   help="builtin:{affine:a1,a2,b|slice:t0|h2log|catenoid} or a grid file")
    p.add_argument("--box", default=None, metavar="a1,b1,a2,b2")
    p.add_argument("--grid", default=None, metavar="n1,n2")
    p.add_argument("--refine", type=int, default=1, metavar="K")
    p.add_argument("--ids", default=None, metavar="I1,I4,...")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("solve", help="solve the maximal-graph equation with Dirichlet data")
    p.add_argument("--model", required=True)
    p.add_argument("--box", required=True, metavar="a1,b1,a2,b2")
    p.add_argument("--grid", required=True, metavar="n1,n2")
    p.add_argument("--bc", required=True, help="boundary expression in x1,x2 or a grid file")
    p.add_argument("--lambda-max", type=float, default=0.9, dest="lambda_max", metavar="L")
    p.add_argument("--tol", type=float, default=1e-8, metavar="T")
    p.add_argument("--max-iter", type=int, default=100, dest="max_iter", metavar="K")
    p.add_argument("--out", default=None, metavar="FILE")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("completeness", help="stochastic-completeness diagnostics for a graph")
    p.add_argument("--model", required=True)
    p.add_argument("--graph", required=True, metavar="FILE")
    p.add_argument("--origin", required=True, metavar="i,j")
    p.add_argument("--rmax", type=float, required=True, metavar="R")
    p.add_argument("--G", default=None, metavar="EXPR")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _cmd_models(args) -> int:
    for name in handlers.handle_models().models:
        print(name)
    return EXIT_OK


def _cmd_parse_expr(args) -> int:
    at = None
    if args.at:
        at = {}
        for item in args.at:
            name, sep, value = item.partition("=")
            if not sep:
                raise _UsageError(f"--at expects VAR=VALUE, got {item!r}")
            try:
                at[name.strip()] = float(value)
            except ValueError:
                raise _UsageError(f"bad value in {item!r}") from None
    resp = handlers.handle_parse_expr(
        S.ParseExprRequest(source=args.source, diff=args.diff, at=at))
    print(resp.expression)
    if resp.value is not None:
        v = resp.value
        print(repr(v if v != 0.0 else 0.0))
    return EXIT_OK


def _cmd_check_model(args) -> int:
    window = _floats(args.window, 2, "--window") if args.window else None
    resp = handlers.handle_check_model(S.CheckModelRequest(
        model=_model_ref(args.model), window=window, samples=args.samples))
    if args.json:
        _emit_json(resp)
        return EXIT_OK
    print(f"model: {resp.model}")
    print(f"NCC holds on sample: {resp.ncc.holds_on_sample} "
          f"(min quantity {resp.ncc.min_quantity:.3e}, {resp.ncc.samples} samples)")
    print(f"slice rigidity applicable: {resp.thm_slice_rigidity.applicable} "
          f"({resp.thm_slice_rigidity.reason})")
    print(f"nonexistence applicable: {resp.thm_nonexistence.applicable} "
          f"({resp.thm_nonexistence.reason})")
    beta = "n/a" if resp.thm_product.beta is None else f"{resp.thm_product.beta:g}"
    print(f"product theorem applicable: {resp.thm_product.applicable} (beta {beta})")
    print(f"height bound, future case: {resp.cor_height_bounds.future_case.applicable}; "
          f"past case: {resp.cor_height_bounds.past_case.applicable}")
    if resp.constant_curvature is not None:
        print(f"constant curvature cbar = {resp.constant_curvature.cbar:g}: "
              f"{resp.constant_curvature.totally_geodesic_prediction}")
    print(f"conclusion: {resp.conclusion}")
    print(f"scan: sup (log f)'' = {resp.scan.sup_log_f_second:.6g}, "
          f"window {resp.scan.window}, {resp.scan.samples} samples ({resp.scan.note})")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.graph.startswith("builtin:"):
        graph = args.graph
    else:
        graph = _grid_payload_from_file(args.graph)
    box = _floats(args.box, 4, "--box") if args.box else None
    grid = _ints(args.grid, 2, "--grid") if args.grid else None
    ids = args.ids.split(",") if args.ids else None
    resp = handlers.handle_verify(S.VerifyRequest(
        model=_model_ref(args.model), graph=graph, box=box, grid=grid,
        refine=args.refine, ids=ids))
    if args.json:
        _emit_json(resp)
        return EXIT_OK
    for r in resp.reports:
        if r.max_residual is None:
            print(f"{r.identity} [{r.grid_spec}] {r.note}")
            continue
        order = "n/a" if r.observed_order is None else f"{r.observed_order:.2f}"
        half = "n/a" if r.residual_half is None else f"{r.residual_half:.3e}"
        extra = f" ({r.note})" if r.note else ""
        print(f"{r.identity} [{r.grid_spec}] max residual {r.max_residual:.3e}, "
              f"half-spacing {half}, order {order}{extra}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    box = _floats(args.box, 4, "--box")
    grid = _ints(args.grid, 2, "--grid")
    if os.path.exists(args.bc):
        bc = _grid_payload_from_file(args.bc)
    else:
        bc = args.bc
    resp = handlers.handle_solve(S.SolveRequest(
        model=_model_ref(args.model), box=box, grid=grid, bc=bc,
        lambda_max=args.lambda_max, tol=args.tol, max_iter=args.max_iter))
    if args.out:
        discrete.write_grid(handlers.grid_from_payload(resp.grid), args.out,
                            model=resp.grid.model)
    if args.json:
        _emit_json(resp.report)
    else:
        r = resp.report
        print(f"converged: {r.converged} after {r.iterations} iterations; "
              f"residual {r.final_residual:.3e}, constraint margin "
              f"{r.constraint_margin:.3e}{'; ' + r.message if r.message else ''}")
    return EXIT_OK if resp.report.converged else EXIT_NO_CONVERGENCE


def _cmd_completeness(args) -> int:
    origin = _ints(args.origin, 2, "--origin")
    resp = handlers.handle_completeness(S.CompletenessRequest(
        model=_model_ref(args.model), graph=_grid_payload_from_file(args.graph),
        origin=origin, rmax=args.rmax, G=args.G))
    if args.json:
        _emit_json(resp)
        return EXIT_OK
    print(f"model: {resp.model}")
    rl = resp.ricci_lower
    print(f"Ricci lower bound: sampled min {rl.sampled_min:.6g}, bounded={rl.bounded_flag} "
          f"[{rl.verdict}]")
    vg = resp.volume_growth
    print(f"volume growth: exponent fit {vg.growth_exponent_fit:.3f} "
          f"[{vg.grigoryan_verdict}]")
    print("  radii:   " + " ".join(f"{r:.3g}" for r in vg.radii))
    print("  volumes: " + " ".join(f"{v:.4g}" for v in vg.volumes))
    if resp.radial_ricci is not None:
        rr = resp.radial_ricci
        print(f"radial Ricci vs G={rr.G_expr}: pointwise ok={rr.pointwise_ok}, "
              f"1/G integral divergent={rr.one_over_G_integral_divergent} [{rr.verdict}]")
    print(f"angle sup (cosh phi): {resp.angle_sup:.6g}; observed lambda "
          f"{resp.lambda_max_observed:.6g}")
    print(f"length distortion constant: {resp.length_distortion_constant:.6g} "
          f"(printed form {resp.length_distortion_constant_printed_form:.6g})")
    print(resp.note)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "models": _cmd_models,
    "parse-expr": _cmd_parse_expr,
    "check-model": _cmd_check_model,
    "verify": _cmd_verify,
    "solve": _cmd_solve,
    "completeness": _cmd_completeness,
    "serve": _cmd_serve,
}


_VALUE_FLAGS = {"--box", "--grid", "--window", "--origin", "--ids", "--at",
                "--bc", "--G", "--out", "--model", "--graph"}


def _join_negative_values(argv: list) -> list:
    """Let flags accept values that begin with a minus (e.g. --box -1,1,...)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok in _VALUE_FLAGS and nxt is not None and nxt.startswith("-")
                and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = _join_negative_values(list(argv))
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except SpacelikeViolation as exc:
        print(f"spacelike violation: {exc}", file=sys.stderr)
        return EXIT_SPACELIKE
    except GrwlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
