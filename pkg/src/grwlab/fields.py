"""Vectorized graph geometry over a whole grid.

Mirrors the pointwise formulas of :mod:`grwlab.geometry` with numpy arrays
per node, which is what the solver and the identity harness iterate on.
A consistency test pins this path against the pointwise reference.

Jets come either from exact builtin-graph derivatives or from central
differences of nodal values; in the latter case the outermost node ring
carries NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import discrete, fiber as fiber_mod, warping as warping_mod
from .discrete import Grid, GridFunction
from .errors import NotMaximal, NotSpacelike
from .geometry import MAXIMAL_TOL
from .graphs import BuiltinGraph
from .models import ModelSpec


@dataclass
class GeometryFields:
    model: ModelSpec
    grid: Grid
    u: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    c: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    grad2: np.ndarray
    w2: np.ndarray
    w: np.ndarray
    cosh: np.ndarray
    sinh2: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    h: np.ndarray
    a2: np.ndarray
    dt1: np.ndarray
    dt2: np.ndarray
    nf1: np.ndarray
    nf2: np.ndarray
    ric_nf: np.ndarray
    lap_u: np.ndarray
    hss: np.ndarray

    @property
    def n(self) -> int:
        return self.model.F.n

    def metric_field(self) -> np.ndarray:
        out = np.empty((2, 2) + tuple(self.grid.counts))
        out[0, 0] = self.g11
        out[0, 1] = out[1, 0] = self.g12
        out[1, 1] = self.g22
        return out

    def residual(self) -> np.ndarray:
        """Divergence-form maximal-graph equation residual (equals n H)."""
        f, fp, w, w2 = self.f, self.fp, self.w, self.w2
        div_v = (self.lap_u / (f * w)
                 - (fp * w * self.grad2 + (f / w) * (f * fp * self.grad2 - self.hss))
                 / (f * f * w2))
        return div_v + (fp / w) * (self.n + self.grad2 / (f * f))

    def gu_quad(self, a1, a2, b1, b2) -> np.ndarray:
        return (self.g11 * a1 * b1 + self.g12 * (a1 * b2 + a2 * b1)
                + self.g22 * a2 * b2)

    def apply_a(self, v1, v2) -> tuple:
        return (self.A11 * v1 + self.A12 * v2, self.A21 * v1 + self.A22 * v2)

    def log_f_second(self) -> np.ndarray:
        fpp = self.model.w.f2_many(self.u)
        return fpp / self.f - (self.fp / self.f) ** 2

    def require_maximal(self, tol: float = 1e-6) -> None:
        worst = np.nanmax(np.abs(self.h))
        if worst > tol:
            raise NotMaximal(f"max |H| = {worst!r} exceeds {tol!r}")

    # closed-form right-hand sides, per node -------------------------------

    def rhs_delta_tau(self) -> np.ndarray:
        ratio = self.fp / self.f
        return -ratio * (self.n + self.sinh2) + self.n * self.h * self.cosh

    def rhs_grad_cosh(self) -> tuple:
        ratio = (self.fp / self.f) * self.cosh
        av1, av2 = self.apply_a(self.dt1, self.dt2)
        return av1 + ratio * self.dt1, av2 + ratio * self.dt2

    def rhs_hess_tau_norm2(self, tol: float = MAXIMAL_TOL,
                           enforce: bool = True) -> np.ndarray:
        if enforce:
            self.require_maximal(tol)
        ratio = self.fp / self.f
        av1, av2 = self.apply_a(self.dt1, self.dt2)
        cross = self.gu_quad(av1, av2, self.dt1, self.dt2)
        s2 = self.sinh2
        return (2.0 * ratio * self.cosh * cross + self.cosh ** 2 * self.a2
                + ratio ** 2 * (self.n + 2.0 * s2 + s2 * s2))

    def rhs_delta_sinh2(self, tol: float = MAXIMAL_TOL,
                        enforce: bool = True) -> np.ndarray:
        if enforce:
            self.require_maximal(tol)
        lf2 = self.log_f_second()
        ratio = self.fp / self.f
        s2 = self.sinh2
        hess2 = self.rhs_hess_tau_norm2(tol, enforce=False)
        gc1, gc2 = self.rhs_grad_cosh()
        grad_cosh2 = self.gu_quad(gc1, gc2, gc1, gc2)
        return (2.0 * self.cosh ** 2 * (self.ric_nf - (self.n - 1) * lf2 * s2)
                + 2.0 * hess2
                - 2.0 * lf2 * (1.0 + s2) * s2
                + 2.0 * ratio ** 2 * (self.n + s2) * s2
                + 2.0 * grad_cosh2)

    def k_normal_product(self) -> np.ndarray:
        """gbar(K, N) = -f(u) cosh(phi), the potential of identity I9."""
        return -self.f * self.cosh

    def rhs_grad_k_normal(self) -> tuple:
        """-A K^top, the closed-form gradient of gbar(K, N)."""
        k1, k2 = self.f * self.dt1, self.f * self.dt2
        ak1, ak2 = self.apply_a(k1, k2)
        return -ak1, -ak2


def geometry_fields(model: ModelSpec, grid: Grid, source,
                    require_spacelike: bool = True) -> GeometryFields:
    """Assemble all geometry fields from a GridFunction or a BuiltinGraph."""
    if model.F.n != 2 or grid.dim != 2:
        raise ValueError("grid geometry fields support two-dimensional charts")
    x1, x2 = grid.coords()
    w = model.w

    if isinstance(source, BuiltinGraph):
        u, s1, s2, d11, d12, d22 = source.jets(x1, x2)
    elif isinstance(source, GridFunction):
        u = source.values
        h1, h2 = grid.spacing
        s1 = discrete.central_diff(u, 0, h1)
        s2 = discrete.central_diff(u, 1, h2)
        d11 = discrete.second_diff(u, 0, h1)
        d22 = discrete.second_diff(u, 1, h2)
        d12 = discrete.mixed_diff(u, 0, 1, h1, h2)
    else:
        raise TypeError(f"unsupported graph source {type(source).__name__}")

    c = fiber_mod.factor_many(model.F, [x1, x2])
    sg1, sg2 = fiber_mod.sigma_gradient_many(model.F, [x1, x2])
    sdot = s1 * sg1 + s2 * sg2
    h11 = d11 - 2.0 * s1 * sg1 + sdot
    h12 = d12 - s1 * sg2 - s2 * sg1
    h22 = d22 - 2.0 * s2 * sg2 + sdot

    f = w.f_many(u)
    fp = w.f1_many(u)
    grad2 = (s1 * s1 + s2 * s2) / c
    w2 = f * f - grad2
    valid = np.isfinite(w2)
    if require_spacelike and np.any(w2[valid] <= 0.0):
        bad = np.argwhere(valid & (w2 <= 0.0))[0]
        raise NotSpacelike(f"|Du| >= f(u) at node {tuple(int(b) for b in bad)}")
    with np.errstate(invalid="ignore"):
        wv = np.sqrt(np.where(w2 > 0.0, w2, np.nan))

    cosh = f / wv
    sinh2 = grad2 / w2
    g11 = -s1 * s1 + f * f * c
    g12 = -s1 * s2
    g22 = -s2 * s2 + f * f * c

    S1, S2 = s1 / c, s2 / c
    HS1 = (h11 * s1 + h12 * s2) / c
    HS2 = (h12 * s1 + h22 * s2) / c
    hss = (S1 * HS1 + S2 * HS2)
    lap_u = (h11 + h22) / c

    pref = -(f / wv)
    ratio = fp / f
    A11 = pref * (ratio - ratio * S1 * s1 / w2 + S1 * HS1 / (f * f * w2)
                  + h11 / (c * f * f))
    A12 = pref * (-ratio * S1 * s2 / w2 + S1 * HS2 / (f * f * w2)
                  + h12 / (c * f * f))
    A21 = pref * (-ratio * S2 * s1 / w2 + S2 * HS1 / (f * f * w2)
                  + h12 / (c * f * f))
    A22 = pref * (ratio - ratio * S2 * s2 / w2 + S2 * HS2 / (f * f * w2)
                  + h22 / (c * f * f))
    h_mean = -(A11 + A22) / 2.0
    a2 = A11 * A11 + A12 * A21 + A21 * A12 + A22 * A22

    nf1, nf2 = S1 / (f * wv), S2 / (f * wv)
    k = fiber_mod.space_form_constant(model.F)
    if k is not None:
        ric_nf = k * (model.F.n - 1) * c * (nf1 * nf1 + nf2 * nf2)
    else:
        kq = fiber_mod.gaussian_curvature_many(model.F, [x1, x2])
        ric_nf = kq * c * (nf1 * nf1 + nf2 * nf2)

    return GeometryFields(
        model=model, grid=grid, u=u, s1=s1, s2=s2, h11=h11, h12=h12, h22=h22,
        c=c, f=f, fp=fp, grad2=grad2, w2=w2, w=wv, cosh=cosh, sinh2=sinh2,
        g11=g11, g12=g12, g22=g22, A11=A11, A12=A12, A21=A21, A22=A22,
        h=h_mean, a2=a2, dt1=-S1 / w2, dt2=-S2 / w2, nf1=nf1, nf2=nf2,
        ric_nf=ric_nf, lap_u=lap_u, hss=hss,
    )


def interior_max(values: np.ndarray, band: int = 2) -> float:
    """Max of |values| over the interior, excluding the boundary band."""
    inner = tuple(slice(band, -band) for _ in values.shape)
    clipped = values[inner]
    if np.all(np.isnan(clipped)):
        return float("nan")
    return float(np.nanmax(np.abs(clipped)))
