"""Pydantic request/response models for the grwlab service.

The response models mirror the report structures of the analysis, solver
and verify modules field for field; the CLI serializes exactly these.
"""

from __future__ import annotations

import math
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

# ---------------------------------------------------------------------------
# shared payloads

IntervalEnd = Union[float, str]  # numbers, or the tokens "inf" / "-inf"


def parse_interval_end(v: IntervalEnd) -> float:
    if isinstance(v, str):
        s = v.strip()
        if s == "inf":
            return math.inf
        if s == "-inf":
            return -math.inf
        return float(s)
    return float(v)


class ModelDefinition(BaseModel):
    dim: int = 2
    warping: str
    interval: tuple[IntervalEnd, IntervalEnd]
    fiber: str


class ModelRef(BaseModel):
    """Either a catalog name or an inline definition."""
    name: Optional[str] = None
    definition: Optional[ModelDefinition] = None

    @field_validator("name")
    @classmethod
    def _nonempty(cls, v):
        if v is not None and not v:
            raise ValueError("model name must be nonempty")
        return v


class GridPayload(BaseModel):
    box: tuple[float, float, float, float]  # a1, b1, a2, b2
    counts: tuple[int, int]
    values: list[list[float]]  # counts[1] rows of counts[0] values
    model: str = ""


# ---------------------------------------------------------------------------
# expression endpoint

class ParseExprRequest(BaseModel):
    source: str
    diff: int = Field(default=0, ge=0)
    at: Optional[dict[str, float]] = None


class ParseExprResponse(BaseModel):
    expression: str
    value: Optional[float] = None


class ModelsResponse(BaseModel):
    models: list[str]


# ---------------------------------------------------------------------------
# check-model endpoint

class CheckModelRequest(BaseModel):
    model: ModelRef
    window: Optional[tuple[float, float]] = None
    samples: int = 10_001


class NccField(BaseModel):
    holds_on_sample: bool
    min_quantity: float
    samples: int


class TheoremField(BaseModel):
    applicable: bool
    reason: str


class ProductField(BaseModel):
    applicable: bool
    beta: Optional[float] = None
    reason: str


class HeightCase(BaseModel):
    applicable: bool
    statement: str


class HeightBoundsField(BaseModel):
    future_case: HeightCase
    past_case: HeightCase


class ConstantCurvatureField(BaseModel):
    cbar: float
    totally_geodesic_prediction: str


class ScanInfo(BaseModel):
    sup_log_f_second: float
    sup_ratio: float
    inf_ratio: float
    inf_ratio_squared: float
    samples: int
    window: tuple[float, float]
    note: str


class ModelVerdictResponse(BaseModel):
    model: str
    ncc: NccField
    thm_slice_rigidity: TheoremField
    thm_nonexistence: TheoremField
    thm_product: ProductField
    cor_height_bounds: HeightBoundsField
    constant_curvature: Optional[ConstantCurvatureField] = None
    hypothesis_conflict: bool
    conclusion: str
    scan: ScanInfo


# ---------------------------------------------------------------------------
# verify endpoint

class VerifyRequest(BaseModel):
    model: ModelRef
    graph: Union[str, GridPayload]  # builtin token or inline grid
    box: Optional[tuple[float, float, float, float]] = None
    grid: Optional[tuple[int, int]] = None
    refine: int = 1
    ids: Optional[list[str]] = None


class IdentityReportModel(BaseModel):
    identity: str
    grid_spec: str
    max_residual: Optional[float] = None
    residual_half: Optional[float] = None
    observed_order: Optional[float] = None
    note: str = ""


class VerifyResponse(BaseModel):
    model: str
    reports: list[IdentityReportModel]


# ---------------------------------------------------------------------------
# solve endpoint

class SolveRequest(BaseModel):
    model: ModelRef
    box: tuple[float, float, float, float]
    grid: tuple[int, int]
    bc: Union[str, GridPayload]  # boundary expression in x1, x2, or grid data
    lambda_max: float = 0.9
    tol: float = 1e-8
    max_iter: int = 100
    initial: Optional[GridPayload] = None


class SolveReportModel(BaseModel):
    iterations: int
    final_residual: float
    constraint_margin: float
    converged: bool
    message: str = ""


class SolveResponse(BaseModel):
    report: SolveReportModel
    grid: GridPayload


# ---------------------------------------------------------------------------
# completeness endpoint

class CompletenessRequest(BaseModel):
    model: ModelRef
    graph: GridPayload
    origin: tuple[int, int]
    rmax: float
    G: Optional[str] = None


class RicciLowerField(BaseModel):
    sampled_min: float
    bounded_flag: bool
    verdict: str
    note: str


class VolumeGrowthField(BaseModel):
    radii: list[float]
    volumes: list[float]
    growth_exponent_fit: float
    grigoryan_verdict: str
    note: str


class RadialRicciField(BaseModel):
    G_expr: str
    pointwise_ok: bool
    one_over_G_integral_divergent: bool
    verdict: str
    nodes_checked: int


class CompletenessResponse(BaseModel):
    model: str
    ricci_lower: RicciLowerField
    volume_growth: VolumeGrowthField
    radial_ricci: Optional[RadialRicciField] = None
    angle_sup: float
    lambda_max_observed: float
    length_distortion_constant: float
    length_distortion_constant_printed_form: float
    note: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
