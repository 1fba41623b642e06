"""Pointwise geometry of a spacelike graph over a fiber chart.

Given the 2-jet of the height function at a chart point, these routines
produce the induced metric, unit normal, shape operator, mean curvature,
hyperbolic angle, and the closed-form right-hand sides of the Laplacian and
gradient identities that the discrete harness checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fiber as fiber_mod
from . import warping as warping_mod
from .errors import NotMaximal, NotSpacelike

MAXIMAL_TOL = 1e-8


@dataclass(frozen=True)
class PointJet:
    x: np.ndarray    # chart point
    u: float         # height
    du: np.ndarray   # partials of u (covector)
    d2u: np.ndarray  # coordinate second partials (symmetric)


def jet(x, u, du, d2u) -> PointJet:
    return PointJet(np.asarray(x, dtype=float), float(u),
                    np.asarray(du, dtype=float), np.asarray(d2u, dtype=float))


@dataclass(frozen=True)
class GeometryAtPoint:
    x: np.ndarray
    u: float
    du: np.ndarray
    g_u: np.ndarray       # induced metric in the chart basis
    w: float              # sqrt(f(u)^2 - |Du|^2)
    cosh_phi: float
    sinh2_phi: float
    n_fiber: np.ndarray   # fiber part of the unit normal
    a_matrix: np.ndarray  # shape operator acting on chart vectors
    h: float              # mean curvature, -(1/n) trace(A)
    h_div: float          # same quantity via the divergence-form expansion
    a_norm2: float        # |A|^2 = trace(A^2)
    dt_top: np.ndarray    # tangential part of d_t, chart components
    k_top: np.ndarray     # f(u) * dt_top
    f_value: float
    f1_value: float

    @property
    def n(self) -> int:
        return self.a_matrix.shape[0]

    def gu_quad(self, a, b) -> float:
        return float(np.asarray(a) @ self.g_u @ np.asarray(b))

    def lift_t_component(self, v) -> float:
        """t-component of the tangent lift of a chart vector."""
        return float(np.dot(self.du, v))

    def require_maximal(self, tol: float = MAXIMAL_TOL) -> None:
        if abs(self.h) > tol:
            raise NotMaximal(f"|H| = {abs(self.h)!r} exceeds {tol!r}")


def induced_metric(w: warping_mod.WarpingFunction, F: fiber_mod.FiberChart,
                   j: PointJet) -> np.ndarray:
    """(g_u)_ij = -du_i du_j + f(u)^2 (g_F)_ij; raises if not spacelike."""
    w.require(j.u)
    c = fiber_mod.conformal_factor(F, j.x)
    f = w.f_at(j.u)
    grad2 = float(np.dot(j.du, j.du)) / c
    if grad2 >= f * f:
        raise NotSpacelike(f"|Du| = {np.sqrt(grad2)!r} >= f(u) = {f!r}")
    return -np.outer(j.du, j.du) + f * f * c * np.eye(F.n)


def geometry_at(w: warping_mod.WarpingFunction, F: fiber_mod.FiberChart,
                j: PointJet) -> GeometryAtPoint:
    """All pointwise geometric quantities of the graph at one chart point."""
    w.require(j.u)
    x = np.asarray(j.x, dtype=float)
    n = F.n
    c = fiber_mod.conformal_factor(F, x)
    gamma = fiber_mod.christoffel_at(F, x)

    s = np.asarray(j.du, dtype=float)
    S = s / c                       # raised gradient Du
    grad2 = float(np.dot(s, s)) / c  # |Du|^2

    f = w.f_at(j.u)
    fp = w.f1_at(j.u)
    w2 = f * f - grad2
    if w2 <= 0.0:
        raise NotSpacelike(f"|Du|^2 = {grad2!r} >= f(u)^2 = {f * f!r}")
    wv = np.sqrt(w2)

    g_u = -np.outer(s, s) + f * f * c * np.eye(n)
    cosh_phi = f / wv
    sinh2_phi = grad2 / w2

    # covariant Hessian of u on the fiber
    hess = np.asarray(j.d2u, dtype=float) - np.einsum("kij,k->ij", gamma, s)
    HS = hess @ S
    HSS = float(S @ HS)
    lap_u = float(np.trace(hess)) / c  # g_F^{ij} Hess_ij for a conformal metric

    a_matrix = -(f / wv) * (
        (fp / f) * np.eye(n)
        - (fp / (f * w2)) * np.outer(S, s)
        + np.outer(S, HS) / (f * f * w2)
        + hess / (c * f * f)
    )
    h = -float(np.trace(a_matrix)) / n
    a_norm2 = float(np.trace(a_matrix @ a_matrix))

    # divergence-form mean curvature, expanded with the same jet data
    div_v = (lap_u / (f * wv)
             - (fp * wv * grad2 + (f / wv) * (f * fp * grad2 - HSS)) / (f * f * w2))
    h_div = div_v / n + (fp / (n * wv)) * (n + grad2 / (f * f))

    dt_top = -S / w2
    return GeometryAtPoint(
        x=x, u=j.u, du=s, g_u=g_u, w=wv, cosh_phi=cosh_phi, sinh2_phi=sinh2_phi,
        n_fiber=S / (f * wv), a_matrix=a_matrix, h=h, h_div=h_div,
        a_norm2=a_norm2, dt_top=dt_top, k_top=f * dt_top,
        f_value=f, f1_value=fp,
    )


# ---------------------------------------------------------------------------
# closed-form right-hand sides

def rhs_delta_tau(g: GeometryAtPoint, w: warping_mod.WarpingFunction) -> float:
    """Laplacian of the height function.

    General form -(f'/f)(n + sinh^2 phi) + n H cosh phi; the extra mean
    curvature term vanishes on maximal graphs.
    """
    ratio = g.f1_value / g.f_value
    return -ratio * (g.n + g.sinh2_phi) + g.n * g.h * g.cosh_phi


def rhs_grad_cosh(g: GeometryAtPoint, w: warping_mod.WarpingFunction) -> np.ndarray:
    """Gradient of cosh phi: (A + (f'/f) cosh phi I) applied to dt_top."""
    ratio = g.f1_value / g.f_value
    return g.a_matrix @ g.dt_top + ratio * g.cosh_phi * g.dt_top


def rhs_hess_tau_norm2(g: GeometryAtPoint, w: warping_mod.WarpingFunction,
                       tol: float = MAXIMAL_TOL) -> float:
    """|Hess tau|^2 on a maximal graph."""
    g.require_maximal(tol)
    ratio = g.f1_value / g.f_value
    s2 = g.sinh2_phi
    cross = g.gu_quad(g.a_matrix @ g.dt_top, g.dt_top)
    return (2.0 * ratio * g.cosh_phi * cross
            + g.cosh_phi ** 2 * g.a_norm2
            + ratio ** 2 * (g.n + 2.0 * s2 + s2 * s2))


def rhs_delta_sinh2(g: GeometryAtPoint, w: warping_mod.WarpingFunction,
                    ric_nf: float, hess2: float, grad_cosh2: float,
                    tol: float = MAXIMAL_TOL) -> float:
    """Laplacian of sinh^2 phi on a maximal graph."""
    g.require_maximal(tol)
    lf2 = warping_mod.log_f_second(w, g.u)
    ratio = g.f1_value / g.f_value
    s2 = g.sinh2_phi
    return (2.0 * g.cosh_phi ** 2 * (ric_nf - (g.n - 1) * lf2 * s2)
            + 2.0 * hess2
            - 2.0 * lf2 * (1.0 + s2) * s2
            + 2.0 * ratio ** 2 * (g.n + s2) * s2
            + 2.0 * grad_cosh2)


def ambient_ricci(w: warping_mod.WarpingFunction, F: fiber_mod.FiberChart,
                  g: GeometryAtPoint, at=None) -> dict:
    """Ambient Ricci components at the point: tt, fiber-normal, mixed."""
    x = g.x if at is None else np.asarray(at, dtype=float)
    f = g.f_value
    fpp = w.f2_at(g.u)
    ratio = g.f1_value / f
    lf2 = fpp / f - ratio ** 2
    ric_nf_fiber = fiber_mod.ricci_quadratic(F, x, g.n_fiber)
    s2 = g.sinh2_phi
    return {
        "ric_tt": -g.n * fpp / f,
        "ric_nfnf": ric_nf_fiber + s2 * (fpp / f + (g.n - 1) * ratio ** 2),
        "ric_dttop_n": -g.cosh_phi * (ric_nf_fiber - (g.n - 1) * lf2 * s2),
    }


def ncc_quantity(w: warping_mod.WarpingFunction, F: fiber_mod.FiberChart,
                 t: float, x, v) -> float:
    """Null convergence condition integrand for a fiber direction v."""
    w.require(t)
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("direction v must be nonzero")
    f = w.f_at(t)
    lf2 = warping_mod.log_f_second(w, t)
    gvv = fiber_mod.conformal_factor(F, x) * float(np.dot(v, v))
    return fiber_mod.ricci_quadratic(F, x, v) - (F.n - 1) * f * f * lf2 * gvv


# ---------------------------------------------------------------------------
# ambient curvature of the warped product

def ambient_curvature_quadruple(w: warping_mod.WarpingFunction,
                                F: fiber_mod.FiberChart, x, u: float,
                                a, b, cc, d) -> float:
    """gbar(Rbar(A,B)C,D) for product-coordinate vectors (t part, fiber part).

    Each argument is a pair (t_component, fiber_vector).  Only two blocks of
    the warped-product curvature are nonzero: the all-fiber block and the
    block pairing d_t across the two slots.
    """
    a0, af = a
    b0, bf = b
    c0, cf = cc
    d0, df = d
    f = w.f_at(u)
    fp = w.f1_at(u)
    fpp = w.f2_at(u)
    cfac = fiber_mod.conformal_factor(F, x)

    def gf(p, q):
        return cfac * float(np.dot(p, q))

    vert = (f * f * fiber_mod.riemann_quadruple(F, x, af, bf, cf, df)
            + f * f * fp * fp * (gf(bf, cf) * gf(af, df) - gf(af, cf) * gf(bf, df)))
    mixed = f * fpp * (a0 * c0 * gf(bf, df) - a0 * d0 * gf(bf, cf)
                       - b0 * c0 * gf(af, df) + b0 * d0 * gf(af, cf))
    return vert + mixed


def _gu_orthonormal_frame(g: GeometryAtPoint) -> list:
    """Gram-Schmidt of the chart basis in the induced metric."""
    frame = []
    for i in range(g.n):
        v = np.zeros(g.n)
        v[i] = 1.0
        for e in frame:
            v = v - g.gu_quad(v, e) * e
        v = v / np.sqrt(g.gu_quad(v, v))
        frame.append(v)
    return frame


def graph_ricci_quadratic(w: warping_mod.WarpingFunction, F: fiber_mod.FiberChart,
                          g: GeometryAtPoint, v, tol: float = MAXIMAL_TOL,
                          allow_nonmaximal: bool = False) -> float:
    """Ricci curvature Ric(v, v) of the graph via the Gauss equation.

    Maximal form: sum_i gbar(Rbar(v,E_i)E_i,v) + |Av|^2.  With the override
    flag the exact non-maximal correction n H g(Av, v) is included.
    """
    if not allow_nonmaximal:
        g.require_maximal(tol)
    v = np.asarray(v, dtype=float)
    frame = _gu_orthonormal_frame(g)

    def lift(vec):
        return (g.lift_t_component(vec), vec)

    vt = lift(v)
    total = 0.0
    for e in frame:
        et = lift(e)
        total += ambient_curvature_quadruple(w, F, g.x, g.u, vt, et, et, vt)
    av = g.a_matrix @ v
    total += g.gu_quad(av, av)
    if allow_nonmaximal:
        total += g.n * g.h * g.gu_quad(av, v)
    return float(total)


def simons_rhs(g: GeometryAtPoint, cbar: float, nabla_a2: float,
               tol: float = MAXIMAL_TOL) -> float:
    """Right side of (1/2) Lap|A|^2 = |nabla A|^2 + (n cbar + |A|^2)|A|^2."""
    g.require_maximal(tol)
    return nabla_a2 + (g.n * cbar + g.a_norm2) * g.a_norm2
