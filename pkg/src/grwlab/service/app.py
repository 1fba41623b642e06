"""FastAPI application exposing the numerical lab over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import GrwlabError, SpacelikeViolation
from . import handlers
from . import schemas as S

app = FastAPI(title="grwlab", version=__version__,
              description="Maximal spacelike graphs in warped-product spacetimes")


@app.exception_handler(GrwlabError)
async def _domain_error(request: Request, exc: GrwlabError):
    status = 409 if isinstance(exc, SpacelikeViolation) else 400
    payload = S.ErrorResponse(error=type(exc).__name__, detail=str(exc))
    return JSONResponse(status_code=status, content=payload.model_dump())


@app.get("/models", response_model=S.ModelsResponse)
def list_models():
    return handlers.handle_models()


@app.post("/parse-expr", response_model=S.ParseExprResponse)
def parse_expr(req: S.ParseExprRequest):
    return handlers.handle_parse_expr(req)


@app.post("/check-model", response_model=S.ModelVerdictResponse)
def check_model(req: S.CheckModelRequest):
    return handlers.handle_check_model(req)


@app.post("/verify", response_model=S.VerifyResponse)
def verify_identities(req: S.VerifyRequest):
    return handlers.handle_verify(req)


@app.post("/solve", response_model=S.SolveResponse)
def solve_graph(req: S.SolveRequest):
    return handlers.handle_solve(req)


@app.post("/completeness", response_model=S.CompletenessResponse)
def completeness(req: S.CompletenessRequest):
    return handlers.handle_completeness(req)
