"""Request handlers shared by the HTTP routes and the CLI.

Each handler maps a request model to a response model.  Domain errors
propagate as grwlab exceptions; the app and the CLI translate them to
status codes / exit codes at their own boundaries.
"""

from __future__ import annotations

import numpy as np

from .. import analysis, expr, models, solver, verify
from ..discrete import Grid, GridFunction
from ..errors import DataFileError, NoConvergence
from ..graphs import parse_graph_token
from ..models import ModelSpec
from ..solver import SolverConfig
from . import schemas as S


def resolve_model_ref(ref: S.ModelRef) -> ModelSpec:
    if ref.name is not None:
        return models.get_model(ref.name)
    if ref.definition is not None:
        d = ref.definition
        interval = (S.parse_interval_end(d.interval[0]), S.parse_interval_end(d.interval[1]))
        return models.build_model("custom", d.dim, d.warping, interval, d.fiber)
    raise DataFileError("model reference needs a name or an inline definition")


def grid_from_payload(p: S.GridPayload) -> GridFunction:
    a1, b1, a2, b2 = p.box
    n1, n2 = p.counts
    grid = Grid(((a1, b1), (a2, b2)), (n1, n2))
    values = np.asarray(p.values, dtype=float)
    if values.shape != (n2, n1):
        raise DataFileError(f"grid payload: expected {n2} rows of {n1} values, "
                            f"got shape {values.shape}")
    return GridFunction(grid, values.T.copy())


def grid_to_payload(gf: GridFunction, model: str = "") -> S.GridPayload:
    (a1, b1), (a2, b2) = gf.grid.box
    return S.GridPayload(
        box=(a1, b1, a2, b2),
        counts=tuple(gf.grid.counts),
        values=[[float(v) for v in gf.values[:, j]] for j in range(gf.grid.counts[1])],
        model=model,
    )


def handle_models() -> S.ModelsResponse:
    return S.ModelsResponse(models=list(models.CATALOG))


def handle_parse_expr(req: S.ParseExprRequest) -> S.ParseExprResponse:
    node = expr.parse(req.source)
    for _ in range(req.diff):
        node = expr.differentiate(node, "t")
    value = None
    if req.at is not None:
        value = expr.evaluate(node, dict(req.at))
    return S.ParseExprResponse(expression=expr.to_source(node), value=value)


def handle_check_model(req: S.CheckModelRequest) -> S.ModelVerdictResponse:
    model = resolve_model_ref(req.model)
    verdict = analysis.classify(model, scan_window=req.window, samples=req.samples)
    return S.ModelVerdictResponse(**verdict)


def handle_verify(req: S.VerifyRequest) -> S.VerifyResponse:
    model = resolve_model_ref(req.model)
    if isinstance(req.graph, str):
        graph = parse_graph_token(req.graph)
        if req.box is None or req.grid is None:
            raise DataFileError("builtin graphs need --box and --grid")
        a1, b1, a2, b2 = req.box
        grid = Grid(((a1, b1), (a2, b2)), tuple(req.grid))
        reports = verify.run_suite(model, graph, grid, ids=req.ids, refine=req.refine)
    else:
        gf = grid_from_payload(req.graph)
        reports = verify.run_suite(model, gf, ids=req.ids, refine=req.refine)
    return S.VerifyResponse(model=model.name, reports=[
        S.IdentityReportModel(
            identity=r.identity, grid_spec=r.grid_spec,
            max_residual=None if np.isnan(r.max_residual) else r.max_residual,
            residual_half=r.residual_half, observed_order=r.observed_order,
            note=r.note)
        for r in reports
    ])


def handle_solve(req: S.SolveRequest) -> S.SolveResponse:
    model = resolve_model_ref(req.model)
    a1, b1, a2, b2 = req.box
    grid = Grid(((a1, b1), (a2, b2)), tuple(req.grid))
    if isinstance(req.bc, str):
        node = expr.parse(req.bc)
        x1, x2 = grid.coords()
        boundary = GridFunction(grid, expr.eval_many(node, {"x1": x1, "x2": x2}))
    else:
        bc_gf = grid_from_payload(req.bc)
        if bc_gf.grid != grid:
            raise DataFileError("boundary grid does not match the requested grid")
        boundary = bc_gf
    initial = grid_from_payload(req.initial) if req.initial is not None else None
    cfg = SolverConfig(lambda_max=req.lambda_max, tol=req.tol, max_iter=req.max_iter)
    try:
        gf, rep = solver.solve(model, boundary, cfg, initial=initial)
    except NoConvergence as exc:
        rep, gf = exc.report, exc.grid
        return S.SolveResponse(
            report=S.SolveReportModel(iterations=rep.iterations,
                                      final_residual=rep.final_residual,
                                      constraint_margin=rep.constraint_margin,
                                      converged=False, message=str(exc)),
            grid=grid_to_payload(gf, model.name))
    return S.SolveResponse(
        report=S.SolveReportModel(iterations=rep.iterations,
                                  final_residual=rep.final_residual,
                                  constraint_margin=rep.constraint_margin,
                                  converged=rep.converged, message=rep.message),
        grid=grid_to_payload(gf, model.name))


def handle_completeness(req: S.CompletenessRequest) -> S.CompletenessResponse:
    model = resolve_model_ref(req.model)
    gf = grid_from_payload(req.graph)
    report = analysis.completeness_diagnostics(model, gf, tuple(req.origin),
                                               req.rmax, g_source=req.G)
    return S.CompletenessResponse(**report)
