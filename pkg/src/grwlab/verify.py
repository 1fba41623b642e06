"""Identity harness: discrete operators against closed-form right sides.

Each identity compares a discrete Laplace-Beltrami, gradient, or covariant
Hessian of a geometry field with the analytic expression produced by the
pointwise formulas, reporting the max interior residual and, under grid
refinement, the observed convergence order.

I1  Laplacian of the height function
I2  gradient of cosh(phi)
I3  squared norm of the Hessian of the height function   (maximal only)
I4  Laplacian of sinh^2(phi)                              (maximal only)
I5  trace vs divergence form of the mean curvature        (analytic)
I6  sinh^2(phi) = |grad tau|^2                            (analytic)
I7  Simons formula for |A|^2          (maximal, constant-curvature ambient)
I8  graph Ricci vs Gauss-equation form  (maximal, product with 2d fiber)
I9  gradient of gbar(K, N)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis, discrete, fields
from .discrete import Grid, GridFunction
from .errors import NotApplicable
from .graphs import BuiltinGraph
from .models import ModelSpec

IDENTITY_IDS = ("I1", "I2", "I3", "I4", "I5", "I6", "I7", "I8", "I9")

_MAXIMAL_IDS = {"I3", "I4", "I7", "I8"}
_MAXIMAL_TOL = 1e-6
_FLOOR_FACTOR = 100.0 * np.finfo(float).eps


@dataclass
class IdentityReport:
    identity: str
    grid_spec: str
    max_residual: float
    residual_half: float | None
    observed_order: float | None
    note: str = ""


class _Workbench:
    """Shared per-grid assembly: fields, metric, lazily built Christoffels."""

    def __init__(self, model: ModelSpec, grid: Grid, source):
        self.model = model
        self.grid = grid
        self.flds = fields.geometry_fields(model, grid, source)
        self.metric = self.flds.metric_field()
        self._inv = None
        self._gamma = None

    @property
    def inv(self):
        if self._inv is None:
            self._inv, _ = discrete.check_metric_field(self.metric)
        return self._inv

    @property
    def gamma(self):
        if self._gamma is None:
            self._gamma = discrete.christoffel_field(self.grid, self.metric)
        return self._gamma

    def lb(self, values: np.ndarray) -> np.ndarray:
        return discrete.laplace_beltrami(GridFunction(self.grid, values), self.metric).values

    def grad(self, values: np.ndarray) -> np.ndarray:
        return discrete.metric_gradient_field(GridFunction(self.grid, values), self.metric)

    def gu_norm(self, v1, v2) -> np.ndarray:
        return np.sqrt(np.abs(self.flds.gu_quad(v1, v2, v1, v2)))


def _check_maximal(wb: _Workbench, identity: str) -> None:
    worst = np.nanmax(np.abs(wb.flds.h))
    if worst > _MAXIMAL_TOL:
        raise NotApplicable(f"{identity} needs a maximal graph; max |H| = {worst!r}")


def _i1(wb: _Workbench):
    resid = wb.lb(wb.flds.u) - wb.flds.rhs_delta_tau()
    return resid, np.nanmax(np.abs(wb.lb(wb.flds.u)))


def _i2(wb: _Workbench):
    grad = wb.grad(wb.flds.cosh)
    gc1, gc2 = wb.flds.rhs_grad_cosh()
    resid = wb.gu_norm(grad[0] - gc1, grad[1] - gc2)
    return resid, np.nanmax(wb.gu_norm(grad[0], grad[1]))


def _i3(wb: _Workbench):
    _check_maximal(wb, "I3")
    hess = discrete.covariant_hessian_field(
        GridFunction(wb.grid, wb.flds.u), wb.metric, wb.gamma)
    inv = wb.inv
    h2 = np.zeros(wb.grid.counts)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    h2 = h2 + inv[i, k] * inv[j, l] * hess[i, j] * hess[k, l]
    resid = h2 - wb.flds.rhs_hess_tau_norm2(enforce=False)
    return resid, np.nanmax(np.abs(h2))


def _i4(wb: _Workbench):
    _check_maximal(wb, "I4")
    lhs = wb.lb(wb.flds.sinh2)
    resid = lhs - wb.flds.rhs_delta_sinh2(enforce=False)
    return resid, np.nanmax(np.abs(lhs))


def _i5(wb: _Workbench):
    f = wb.flds
    resid = f.h - f.residual() / f.n
    return resid, np.nanmax(np.abs(f.h))


def _i6(wb: _Workbench):
    f = wb.flds
    grad_tau2 = f.gu_quad(f.dt1, f.dt2, f.dt1, f.dt2)
    resid = f.sinh2 - grad_tau2
    return resid, np.nanmax(np.abs(f.sinh2))


def _nabla_a_norm2(wb: _Workbench) -> np.ndarray:
    """|nabla A|^2 by covariant differences of the shape-operator field."""
    f = wb.flds
    gamma = wb.gamma
    inv = wb.inv
    counts = tuple(wb.grid.counts)
    spacing = wb.grid.spacing
    A = np.empty((2, 2) + counts)
    A[0, 0], A[0, 1], A[1, 0], A[1, 1] = f.A11, f.A12, f.A21, f.A22
    dA = np.empty((2, 2, 2) + counts)
    for k in range(2):
        for i in range(2):
            for j in range(2):
                term = discrete.central_diff(A[i, j], k, spacing[k])
                for m in range(2):
                    term = term + gamma[i, k, m] * A[m, j] - gamma[m, k, j] * A[i, m]
                dA[k, i, j] = term
    low = wb.metric
    out = np.zeros(counts)
    for k in range(2):
        for l in range(2):
            for i in range(2):
                for m in range(2):
                    for j in range(2):
                        for nn in range(2):
                            out = out + (inv[k, l] * low[i, m] * inv[j, nn]
                                         * dA[k, i, j] * dA[l, m, nn])
    return out


def _i7(wb: _Workbench):
    _check_maximal(wb, "I7")
    cc = analysis.constant_curvature_check(wb.model)
    if cc is None:
        raise NotApplicable("I7 needs a recognized constant-curvature model")
    f = wb.flds
    lhs = 0.5 * wb.lb(f.a2)
    rhs = _nabla_a_norm2(wb) + (f.n * cc["cbar"] + f.a2) * f.a2
    return lhs - rhs, np.nanmax(np.abs(lhs))


def _i8(wb: _Workbench):
    _check_maximal(wb, "I8")
    f = wb.flds
    if f.n != 2:
        raise NotApplicable("I8 needs a two-dimensional fiber")
    if np.nanmax(np.abs(f.fp)) > 1e-12:
        raise NotApplicable("I8 needs a product model (constant warping)")
    kdisc = discrete.brioschi_curvature(wb.grid, wb.metric)
    v1, v2 = 1.0, 0.7  # any fixed chart direction; the 2d identity is direction-free
    gvv = f.gu_quad(v1, v2, v1, v2)
    av1, av2 = f.apply_a(v1, v2)
    rhs = -f.cosh ** 2 * gvv + f.gu_quad(av1, av2, av1, av2)
    lhs = kdisc * gvv
    return lhs - rhs, np.nanmax(np.abs(rhs))


def _i9(wb: _Workbench):
    grad = wb.grad(wb.flds.k_normal_product())
    k1, k2 = wb.flds.rhs_grad_k_normal()
    resid = wb.gu_norm(grad[0] - k1, grad[1] - k2)
    return resid, np.nanmax(wb.gu_norm(grad[0], grad[1]))


_IDENTITY_FNS = {"I1": _i1, "I2": _i2, "I3": _i3, "I4": _i4, "I5": _i5,
                 "I6": _i6, "I7": _i7, "I8": _i8, "I9": _i9}


def _grid_spec(grid: Grid) -> str:
    (a1, b1), (a2, b2) = grid.box
    n1, n2 = grid.counts
    return f"{n1}x{n2}@[{a1:g},{b1:g}]x[{a2:g},{b2:g}]"


def _residual_of(wb: _Workbench, identity: str):
    resid, scale = _IDENTITY_FNS[identity](wb)
    return fields.interior_max(resid), float(scale)


def run_suite(model: ModelSpec, graph, grid: Grid | None = None,
              ids=None, refine: int = 1) -> list:
    """Run the requested identities; returns IdentityReport list in id order.

    ``graph`` is a BuiltinGraph (exact jets, refinable) or a GridFunction
    (finite-difference jets; refinement skipped since nodal data cannot be
    resampled).
    """
    ids = list(IDENTITY_IDS) if ids is None else sorted(set(ids), key=IDENTITY_IDS.index)
    for i in ids:
        if i not in IDENTITY_IDS:
            raise NotApplicable(f"unknown identity {i!r}")
    if isinstance(graph, GridFunction):
        base_grid = graph.grid
        sources = [(base_grid, graph)]
        refinable = False
    else:
        if grid is None:
            raise ValueError("builtin graphs need an explicit grid")
        base_grid = grid
        sources = [(grid, graph)]
        refinable = True
        g = grid
        for _ in range(max(0, refine)):
            g = g.refined()
            sources.append((g, graph))

    benches = [_Workbench(model, g, src) for g, src in sources]
    reports = []
    for identity in ids:
        try:
            base_res, base_scale = _residual_of(benches[0], identity)
        except NotApplicable as exc:
            reports.append(IdentityReport(identity, _grid_spec(base_grid),
                                          float("nan"), None, None,
                                          note=f"not applicable: {exc}"))
            continue
        res_half = None
        order = None
        note = ""
        if refinable and refine >= 1 and len(benches) > 1:
            res_half, _ = _residual_of(benches[1], identity)
            floor = _FLOOR_FACTOR * max(base_scale, 1.0)
            if base_res > floor and res_half > floor:
                order = discrete.observed_order(base_res, res_half)
            else:
                note = "residuals at machine floor; identity exact to rounding"
        elif not refinable and refine >= 1:
            note = "grid-file graph: refinement unavailable"
        reports.append(IdentityReport(identity, _grid_spec(base_grid),
                                      base_res, res_half, order, note=note))
    return reports
