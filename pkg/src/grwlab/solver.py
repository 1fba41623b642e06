"""Damped Newton solver for the maximal-graph equation.

The unknowns are the interior nodal values of the height function with
Dirichlet data on the grid boundary.  The Jacobian is assembled by colored
finite differences of the residual over the 3x3 stencil footprint, and the
gradient constraint |Du| <= lambda f(u) is enforced by backtracking: every
accepted iterate is strictly feasible, because the residual is undefined
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu, spsolve

from . import discrete, fiber as fiber_mod
from .discrete import Grid, GridFunction
from .errors import NoConvergence, NotSpacelike, SpacelikeViolation
from .models import ModelSpec


@dataclass(frozen=True)
class SolverConfig:
    lambda_max: float = 0.9
    tol: float = 1e-8
    max_iter: int = 100
    damping_min: float = 2.0 ** -20

    def __post_init__(self):
        if not 0.0 < self.lambda_max < 1.0:
            raise ValueError("lambda_max must lie in (0, 1)")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


@dataclass
class SolveReport:
    iterations: int
    final_residual: float
    constraint_margin: float
    converged: bool
    message: str = ""


class _Chart:
    """Per-grid static data: coordinates, conformal factor, sigma gradient."""

    def __init__(self, model: ModelSpec, grid: Grid):
        self.model = model
        self.grid = grid
        self.x1, self.x2 = grid.coords()
        self.c = fiber_mod.factor_many(model.F, [self.x1, self.x2])
        self.sg1, self.sg2 = fiber_mod.sigma_gradient_many(model.F, [self.x1, self.x2])
        self.h1, self.h2 = grid.spacing


def _residual_interior(chart: _Chart, u: np.ndarray) -> np.ndarray:
    """E.1 residual at the interior nodes (equals n * mean curvature)."""
    model = chart.model
    h1, h2 = chart.h1, chart.h2
    inner = (slice(1, -1), slice(1, -1))

    s1 = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * h1)
    s2 = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * h2)
    d11 = (u[2:, 1:-1] - 2.0 * u[inner] + u[:-2, 1:-1]) / h1 ** 2
    d22 = (u[1:-1, 2:] - 2.0 * u[inner] + u[1:-1, :-2]) / h2 ** 2
    d12 = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * h1 * h2)

    c = chart.c[inner]
    sg1, sg2 = chart.sg1[inner], chart.sg2[inner]
    sdot = s1 * sg1 + s2 * sg2
    hc11 = d11 - 2.0 * s1 * sg1 + sdot
    hc12 = d12 - s1 * sg2 - s2 * sg1
    hc22 = d22 - 2.0 * s2 * sg2 + sdot

    uin = u[inner]
    f = model.w.f_many(uin)
    fp = model.w.f1_many(uin)
    grad2 = (s1 * s1 + s2 * s2) / c
    w2 = f * f - grad2
    bad = ~(w2 > 0.0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise NotSpacelike(f"|Du| >= f(u) at interior node {(int(i) + 1, int(j) + 1)}")
    w = np.sqrt(w2)

    lap_u = (hc11 + hc22) / c
    hs1 = (hc11 * s1 + hc12 * s2) / c
    hs2 = (hc12 * s1 + hc22 * s2) / c
    hss = (s1 * hs1 + s2 * hs2) / c

    div_v = (lap_u / (f * w)
             - (fp * w * grad2 + (f / w) * (f * fp * grad2 - hss)) / (f * f * w2))
    return div_v + (fp / w) * (model.F.n + grad2 / (f * f))


def _constraint_margin(chart: _Chart, u: np.ndarray, lambda_max: float) -> float:
    """min over interior nodes of lambda f(u) - |Du|; -inf when infeasible."""
    a, b = chart.model.interval
    if np.any(u <= a) or np.any(u >= b):
        return -np.inf
    h1, h2 = chart.h1, chart.h2
    inner = (slice(1, -1), slice(1, -1))
    s1 = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * h1)
    s2 = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * h2)
    grad = np.sqrt((s1 * s1 + s2 * s2) / chart.c[inner])
    f = chart.model.w.f_many(u[inner])
    margin = lambda_max * f - grad
    if not np.all(np.isfinite(margin)):
        return -np.inf
    return float(np.min(margin))


def residual(model: ModelSpec, gf: GridFunction) -> GridFunction:
    """Residual of E.1 on interior nodes; NaN on the boundary ring."""
    chart = _Chart(model, gf.grid)
    out = np.full_like(gf.values, np.nan)
    out[1:-1, 1:-1] = _residual_interior(chart, gf.values)
    return GridFunction(gf.grid, out)


def harmonic_initial_guess(grid: Grid, boundary: np.ndarray, interval) -> np.ndarray:
    """Five-point Laplace interpolation of the boundary data, clipped."""
    n1, n2 = grid.counts
    h1, h2 = grid.spacing
    m1, m2 = n1 - 2, n2 - 2
    idx = -np.ones((n1, n2), dtype=int)
    idx[1:-1, 1:-1] = np.arange(m1 * m2).reshape(m1, m2)
    w1, w2 = 1.0 / h1 ** 2, 1.0 / h2 ** 2
    rows, cols, vals = [], [], []
    rhs = np.zeros(m1 * m2)
    ii, jj = np.meshgrid(np.arange(1, n1 - 1), np.arange(1, n2 - 1), indexing="ij")
    center = idx[1:-1, 1:-1].ravel()
    rows.append(center)
    cols.append(center)
    vals.append(np.full(center.size, -2.0 * (w1 + w2)))
    for di, dj, wgt in ((1, 0, w1), (-1, 0, w1), (0, 1, w2), (0, -1, w2)):
        ni, nj = ii + di, jj + dj
        neighbor = idx[ni, nj].ravel()
        inside = neighbor >= 0
        rows.append(center[inside])
        cols.append(neighbor[inside])
        vals.append(np.full(inside.sum(), wgt))
        edge = ~inside
        np.subtract.at(rhs, center[edge], wgt * boundary[ni.ravel()[edge], nj.ravel()[edge]])
    mat = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                     shape=(m1 * m2, m1 * m2)).tocsr()
    interior = spsolve(mat, rhs)
    u = boundary.copy()
    u[1:-1, 1:-1] = interior.reshape(m1, m2)
    a, b = interval
    if np.isfinite(a) or np.isfinite(b):
        span = min(b - a, 1.0) if np.isfinite(b - a) else 1.0
        u = np.clip(u, a + 1e-6 * span if np.isfinite(a) else -np.inf,
                    b - 1e-6 * span if np.isfinite(b) else np.inf)
    return u


_COLOR_OFFSETS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]


def _jacobian(chart: _Chart, u: np.ndarray, r0: np.ndarray):
    """Sparse Jacobian of the interior residual by 9-color differencing."""
    n1, n2 = chart.grid.counts
    m1, m2 = n1 - 2, n2 - 2
    idx = -np.ones((n1, n2), dtype=int)
    idx[1:-1, 1:-1] = np.arange(m1 * m2).reshape(m1, m2)
    ii, jj = np.meshgrid(np.arange(1, n1 - 1), np.arange(1, n2 - 1), indexing="ij")
    rows, cols, vals = [], [], []
    for ca in range(3):
        for cb in range(3):
            mask = ((ii % 3 == ca) & (jj % 3 == cb))
            if not mask.any():
                continue
            qi, qj = ii[mask], jj[mask]
            eps = 1e-7 * (1.0 + np.abs(u[qi, qj]))
            pert = u.copy()
            pert[qi, qj] += eps
            scale = 1.0
            while True:
                try:
                    r1 = _residual_interior(chart, pert)
                    break
                except NotSpacelike:
                    # constraint nearly active: shrink the probe step
                    scale *= 0.25
                    if scale < 1e-4:
                        raise
                    pert = u.copy()
                    pert[qi, qj] += eps * scale
            diff = (r1 - r0)
            for di, dj in _COLOR_OFFSETS:
                pi, pj = qi + di, qj + dj
                ok = (pi >= 1) & (pi <= n1 - 2) & (pj >= 1) & (pj <= n2 - 2)
                entries = diff[pi[ok] - 1, pj[ok] - 1] / (eps[ok] * scale)
                nz = entries != 0.0
                rows.append(idx[pi[ok], pj[ok]][nz])
                cols.append(idx[qi[ok], qj[ok]][nz])
                vals.append(entries[nz])
    return coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m1 * m2, m1 * m2)).tocsc()


def solve(model: ModelSpec, boundary: GridFunction, cfg: SolverConfig | None = None,
          initial: GridFunction | None = None):
    """Solve E.1 with Dirichlet data; returns (GridFunction, SolveReport).

    Raises SpacelikeViolation when feasibility cannot be established or
    restored, NoConvergence when the iteration or damping budget runs out
    (partial state attached to the exception).
    """
    cfg = cfg or SolverConfig()
    grid = boundary.grid
    chart = _Chart(model, grid)

    if initial is not None:
        u = initial.values.copy()
        u[0, :], u[-1, :] = boundary.values[0, :], boundary.values[-1, :]
        u[:, 0], u[:, -1] = boundary.values[:, 0], boundary.values[:, -1]
    else:
        u = harmonic_initial_guess(grid, boundary.values, model.interval)

    margin = _constraint_margin(chart, u, cfg.lambda_max)
    if not margin > 0.0:
        raise SpacelikeViolation(
            f"initial guess violates |Du| <= {cfg.lambda_max} f(u) (margin {margin!r})")

    r = _residual_interior(chart, u)
    rnorm = float(np.max(np.abs(r)))
    iterations = 0

    def report(converged: bool, message: str = "") -> SolveReport:
        return SolveReport(iterations=iterations, final_residual=rnorm,
                           constraint_margin=margin, converged=converged,
                           message=message)

    while rnorm > cfg.tol:
        if iterations >= cfg.max_iter:
            raise NoConvergence(f"no convergence after {cfg.max_iter} iterations",
                                report=report(False, "max_iter"),
                                grid=GridFunction(grid, u))
        jac = _jacobian(chart, u, r)
        step = splu(jac).solve(-r.ravel())
        step2d = step.reshape(grid.counts[0] - 2, grid.counts[1] - 2)

        alpha = 1.0
        accepted = False
        feasible_seen = False
        while alpha >= cfg.damping_min:
            trial = u.copy()
            trial[1:-1, 1:-1] += alpha * step2d
            m_try = _constraint_margin(chart, trial, cfg.lambda_max)
            if m_try > 0.0:
                feasible_seen = True
                r_try = _residual_interior(chart, trial)
                rn_try = float(np.max(np.abs(r_try)))
                if rn_try < rnorm:
                    u, r, rnorm, margin = trial, r_try, rn_try, m_try
                    accepted = True
                    break
            alpha *= 0.5
        iterations += 1
        if not accepted:
            if not feasible_seen:
                raise SpacelikeViolation(
                    "backtracking cannot restore the gradient constraint")
            raise NoConvergence("damping floor reached without residual decrease",
                                report=report(False, "damping_min"),
                                grid=GridFunction(grid, u))

    return GridFunction(grid, u), report(True, "converged")


def continuation_sweep(model: ModelSpec, boundary_family, cfg: SolverConfig | None = None,
                       steps: int = 11):
    """Warm-started solves along s in [0, 1]; boundary_family(s) -> GridFunction.

    Returns a list of (s, GridFunction, SolveReport); solver errors are
    re-raised with the failing s attached.
    """
    cfg = cfg or SolverConfig()
    svals = np.linspace(0.0, 1.0, steps)
    results = []
    prev = None
    for s in svals:
        boundary = boundary_family(float(s))
        try:
            gf, rep = solve(model, boundary, cfg, initial=prev)
        except NoConvergence as exc:
            raise NoConvergence(f"continuation failed at s={s:g}: {exc}",
                                report=exc.report, grid=exc.grid) from None
        except SpacelikeViolation as exc:
            raise SpacelikeViolation(f"continuation failed at s={s:g}: {exc}") from None
        results.append((float(s), gf, rep))
        prev = gf
    return results
