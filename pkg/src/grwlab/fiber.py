"""Riemannian fiber charts.

Every supported chart is conformally flat, g = c(x)·I: Euclidean space,
the stereographic chart of the unit sphere, the hyperbolic half-plane and
ball models, and a user-supplied conformal factor.  Christoffel symbols and
curvature come in closed form for the builtin kinds and from second-order
central differences of the metric for the generic conformal kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import OutOfChart

KINDS = ("euclidean", "sphere-stereographic", "hyperbolic-halfplane",
         "hyperbolic-ball", "conformal")

# sectional curvature of the builtin space forms
_SPACE_FORM_K = {
    "euclidean": 0.0,
    "sphere-stereographic": 1.0,
    "hyperbolic-halfplane": -1.0,
    "hyperbolic-ball": -1.0,
}

_INF = math.inf


@dataclass(frozen=True)
class FiberChart:
    n: int
    kind: str
    box: tuple  # ((a1,b1), ..., (an,bn)); infinite endpoints allowed
    factor: expr.ExpressionAst | None = None  # conformal kind only
    factor_source: str = ""

    def var_names(self):
        return [f"x{i + 1}" for i in range(self.n)]


def make_fiber(kind: str, n: int, box=None) -> FiberChart:
    """Build a chart; ``kind`` may be ``conformal:<expr in x1..xn>``."""
    if n < 2:
        raise ValueError("fiber dimension must be >= 2")
    factor = None
    source = ""
    if kind.startswith("conformal:"):
        source = kind.split(":", 1)[1]
        kind = "conformal"
        factor = expr.parse(source)
        allowed = {f"x{i + 1}" for i in range(n)}
        extra = expr.variables(factor) - allowed
        if extra:
            raise OutOfChart(f"conformal factor uses unknown variables {sorted(extra)}")
    if kind not in KINDS:
        raise ValueError(f"unknown fiber kind {kind!r}")
    if kind == "hyperbolic-halfplane" and n != 2:
        raise ValueError("the half-plane chart is two-dimensional")
    if box is None:
        if kind == "hyperbolic-halfplane":
            box = ((-_INF, _INF), (0.0, _INF))
        elif kind == "hyperbolic-ball":
            box = tuple((-1.0, 1.0) for _ in range(n))
        else:
            box = tuple((-_INF, _INF) for _ in range(n))
    return FiberChart(n=n, kind=kind, box=tuple(tuple(map(float, ab)) for ab in box),
                      factor=factor, factor_source=source)


def _check_point(F: FiberChart, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (F.n,):
        raise OutOfChart(f"point has shape {x.shape}, chart dimension is {F.n}")
    for i, (a, b) in enumerate(F.box):
        if not (a < x[i] < b):
            raise OutOfChart(f"coordinate x{i + 1}={x[i]!r} outside ({a}, {b})")
    if F.kind == "hyperbolic-ball" and np.dot(x, x) >= 1.0:
        raise OutOfChart(f"|x|={np.linalg.norm(x)!r} >= 1 in the ball chart")
    return x


def conformal_factor(F: FiberChart, x) -> float:
    x = _check_point(F, x)
    return _factor_unchecked(F, x)


def _factor_unchecked(F: FiberChart, x) -> float:
    r2 = float(np.dot(x, x))
    if F.kind == "euclidean":
        return 1.0
    if F.kind == "sphere-stereographic":
        return 4.0 / (1.0 + r2) ** 2
    if F.kind == "hyperbolic-halfplane":
        return 1.0 / x[1] ** 2
    if F.kind == "hyperbolic-ball":
        return 4.0 / (1.0 - r2) ** 2
    bindings = {name: x[i] for i, name in enumerate(F.var_names())}
    return expr.evaluate(F.factor, bindings)


def factor_many(F: FiberChart, coords) -> np.ndarray:
    """Vectorized conformal factor over coordinate arrays."""
    coords = [np.asarray(c, dtype=float) for c in coords]
    r2 = sum(c * c for c in coords)
    if F.kind == "euclidean":
        return np.ones_like(r2)
    if F.kind == "sphere-stereographic":
        return 4.0 / (1.0 + r2) ** 2
    if F.kind == "hyperbolic-halfplane":
        return 1.0 / coords[1] ** 2
    if F.kind == "hyperbolic-ball":
        return 4.0 / (1.0 - r2) ** 2
    bindings = {name: coords[i] for i, name in enumerate(F.var_names())}
    return expr.eval_many(F.factor, bindings)


def metric_at(F: FiberChart, x) -> np.ndarray:
    """(g_F)_ij(x): the conformal factor times the identity."""
    return conformal_factor(F, x) * np.eye(F.n)


def fd_step(F: FiberChart) -> float:
    """Default finite-difference step: 1e-4 of the smallest finite box extent."""
    extents = [b - a for a, b in F.box if math.isfinite(b - a)]
    return 1e-4 * (min(extents) if extents else 1.0)


def _sigma(F: FiberChart, x) -> float:
    # sigma = log-scale of the metric; read through the metric as the
    # generic path does, so the finite differences see exactly metric_at
    return 0.5 * math.log(_factor_unchecked(F, x))


def sigma_gradient(F: FiberChart, x, h: float | None = None) -> np.ndarray:
    """Flat gradient of sigma = (1/2)log c; closed-form for builtins."""
    x = _check_point(F, x)
    n = F.n
    r2 = float(np.dot(x, x))
    if F.kind == "euclidean":
        return np.zeros(n)
    if F.kind == "sphere-stereographic":
        return -2.0 * x / (1.0 + r2)
    if F.kind == "hyperbolic-halfplane":
        return np.array([0.0, -1.0 / x[1]])
    if F.kind == "hyperbolic-ball":
        return 2.0 * x / (1.0 - r2)
    h = fd_step(F) if h is None else h
    grad = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        grad[i] = (_sigma(F, x + e) - _sigma(F, x - e)) / (2.0 * h)
    return grad


def _sigma_hessian_fd(F: FiberChart, x, h: float) -> np.ndarray:
    n = F.n
    hess = np.zeros((n, n))
    s0 = _sigma(F, x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        hess[i, i] = (_sigma(F, x + ei) - 2.0 * s0 + _sigma(F, x - ei)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            hess[i, j] = hess[j, i] = (
                _sigma(F, x + ei + ej) - _sigma(F, x + ei - ej)
                - _sigma(F, x - ei + ej) + _sigma(F, x - ei - ej)
            ) / (4.0 * h ** 2)
    return hess


def christoffel_at(F: FiberChart, x, h: float | None = None) -> np.ndarray:
    """Gamma[k, i, j] of the conformal metric.

    For g = e^{2 sigma} I the symbols are
    Gamma^k_ij = delta_ki sigma_j + delta_kj sigma_i - delta_ij sigma_k.
    """
    x = _check_point(F, x)
    n = F.n
    grad = sigma_gradient(F, x, h=h)
    gamma = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            gamma[k, i, k] += grad[i]
            gamma[k, k, i] += grad[i]
            gamma[k, i, i] -= grad[k]
    return gamma


def space_form_constant(F: FiberChart) -> float | None:
    """Sectional curvature for the builtin space forms, None for conformal."""
    return _SPACE_FORM_K.get(F.kind)


def ricci_matrix(F: FiberChart, x, h: float | None = None) -> np.ndarray:
    """Full Ricci tensor (Ric_F)_ij at x."""
    x = _check_point(F, x)
    n = F.n
    k = space_form_constant(F)
    if k is not None:
        return k * (n - 1) * _factor_unchecked(F, x) * np.eye(n)
    h = fd_step(F) if h is None else h
    grad = sigma_gradient(F, x, h=h)
    hess = _sigma_hessian_fd(F, x, h)
    lap = float(np.trace(hess))
    norm2 = float(np.dot(grad, grad))
    return (-(n - 2) * (hess - np.outer(grad, grad))
            - (lap + (n - 2) * norm2) * np.eye(n))


def ricci_quadratic(F: FiberChart, x, v, h: float | None = None) -> float:
    """Ric_F(v, v) at x for a coordinate vector v."""
    v = np.asarray(v, dtype=float)
    k = space_form_constant(F)
    if k is not None:
        c = conformal_factor(F, x)
        return k * (F.n - 1) * c * float(np.dot(v, v))
    ric = ricci_matrix(F, x, h=h)
    return float(v @ ric @ v)


def scalar_curvature(F: FiberChart, x, h: float | None = None) -> float:
    k = space_form_constant(F)
    if k is not None:
        return k * F.n * (F.n - 1)
    c = conformal_factor(F, x)
    return float(np.trace(ricci_matrix(F, x, h=h))) / c


def riemann_quadruple(F: FiberChart, x, u, v, w, z, h: float | None = None) -> float:
    """g_F(R_F(u, v) w, z); sign fixed so the unit sphere gives +1 sections.

    Builtin space forms use the constant-curvature form; the generic
    conformal kind is conformally flat, so the Riemann tensor is rebuilt
    from the Ricci tensor (Weyl part vanishes).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    c = conformal_factor(F, x)

    def gf(a, b):
        return c * float(np.dot(a, b))

    k = space_form_constant(F)
    if k is not None:
        return k * (gf(v, w) * gf(u, z) - gf(u, w) * gf(v, z))
    n = F.n
    if n == 2:
        kq = 0.5 * scalar_curvature(F, x, h=h)
        return kq * (gf(v, w) * gf(u, z) - gf(u, w) * gf(v, z))
    ric = ricci_matrix(F, x, h=h)

    def rc(a, b):
        return float(a @ ric @ b)

    s = scalar_curvature(F, x, h=h)
    kn = (rc(u, z) * gf(v, w) + rc(v, w) * gf(u, z)
          - rc(u, w) * gf(v, z) - rc(v, z) * gf(u, w))
    return kn / (n - 2) - s * (gf(u, z) * gf(v, w) - gf(u, w) * gf(v, z)) / ((n - 1) * (n - 2))


def fiber_gradient(F: FiberChart, du, x):
    """Raise the covector du: returns (Du, |Du|^2) in the chart metric."""
    x = _check_point(F, x)
    du = np.asarray(du, dtype=float)
    c = _factor_unchecked(F, x)
    grad = du / c
    norm2 = float(np.dot(du, du)) / c
    return grad, norm2


def sigma_gradient_many(F: FiberChart, coords, h: float | None = None):
    """Vectorized flat gradient of sigma over coordinate arrays."""
    coords = [np.asarray(cc, dtype=float) for cc in coords]
    r2 = sum(cc * cc for cc in coords)
    if F.kind == "euclidean":
        return [np.zeros_like(r2) for _ in coords]
    if F.kind == "sphere-stereographic":
        return [-2.0 * cc / (1.0 + r2) for cc in coords]
    if F.kind == "hyperbolic-halfplane":
        return [np.zeros_like(r2), -1.0 / coords[1]]
    if F.kind == "hyperbolic-ball":
        return [2.0 * cc / (1.0 - r2) for cc in coords]
    h = fd_step(F) if h is None else h
    grads = []
    for i in range(len(coords)):
        plus = list(coords)
        minus = list(coords)
        plus[i] = coords[i] + h
        minus[i] = coords[i] - h
        sp = 0.5 * np.log(factor_many(F, plus))
        sm = 0.5 * np.log(factor_many(F, minus))
        grads.append((sp - sm) / (2.0 * h))
    return grads


def gaussian_curvature_many(F: FiberChart, coords, h: float | None = None) -> np.ndarray:
    """Vectorized Gaussian curvature for two-dimensional charts."""
    if F.n != 2:
        raise ValueError("gaussian_curvature_many requires a 2d chart")
    k = space_form_constant(F)
    c = factor_many(F, coords)
    if k is not None:
        return k * np.ones_like(c)
    h = fd_step(F) if h is None else h
    lap = np.zeros_like(c)
    s0 = 0.5 * np.log(c)
    for i in range(2):
        plus = list(coords)
        minus = list(coords)
        plus[i] = coords[i] + h
        minus[i] = coords[i] - h
        sp = 0.5 * np.log(factor_many(F, plus))
        sm = 0.5 * np.log(factor_many(F, minus))
        lap = lap + (sp - 2.0 * s0 + sm) / h ** 2
    return -lap / c
