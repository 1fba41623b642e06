"""Theorem-hypothesis classification and stochastic-completeness diagnostics.

Every checker here is a sampled, advisory verdict: hypotheses are verified
numerically on finite samples, conclusions quote the corresponding rigidity
or nonexistence statement, and no diagnostic ever asserts stochastic
incompleteness.
"""

from __future__ import annotations

import numpy as np

from . import discrete, expr, fiber as fiber_mod, fields, geometry, solver, warping
from .discrete import Grid, GridFunction
from .errors import NotMaximal
from .graphs import BuiltinGraph
from .models import ModelSpec

_EPS = 1e-9

RIGIDITY_LABEL = "bounded-angle stochastically complete maximal => totally geodesic slice"
NONEXISTENCE_LABEL = "nonexistence of bounded-angle stochastically complete maximal hypersurfaces"
PRODUCT_LABEL = "bounded-angle stochastically complete maximal => slice (product case)"
NO_CONCLUSION_LABEL = "no conclusion"
TOTALLY_GEODESIC_LABEL = "bounded |A|^2 stochastically complete maximal => totally geodesic"


def _sample_box(model: ModelSpec, count: int, rng) -> np.ndarray:
    box = model.default_box()
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    return lo + (hi - lo) * rng.random((count, len(box)))


def _sample_directions(n: int, count: int, rng) -> np.ndarray:
    v = rng.uniform(-1.0, 1.0, (count, n))
    small = np.linalg.norm(v, axis=1) < 1e-3
    v[small] = 1.0 / np.sqrt(n)
    return v


def check_ncc(model: ModelSpec, t_samples: int = 10_000, x_samples: int | None = None,
              v_samples: int | None = None, window=None, seed: int = 20_240) -> dict:
    """Sampled minimum of the null-convergence-condition quantity."""
    count = int(t_samples)
    x_count = count if x_samples is None else int(x_samples)
    v_count = count if v_samples is None else int(v_samples)
    count = max(count, x_count, v_count)
    rng = np.random.default_rng(seed)
    lo, hi = warping.sample_window(model.interval, window)
    span = hi - lo
    inset = span * 1e-6 if (lo == model.interval[0] or hi == model.interval[1]) else 0.0
    ts = np.linspace(lo + inset, hi - inset, count)
    xs = _sample_box(model, count, rng)
    vs = _sample_directions(model.dim, count, rng)

    coords = [xs[:, i] for i in range(model.dim)]
    c = fiber_mod.factor_many(model.F, coords)
    v2 = np.sum(vs * vs, axis=1)
    gvv = c * v2
    k = fiber_mod.space_form_constant(model.F)
    if k is not None:
        ric = k * (model.dim - 1) * gvv
    elif model.dim == 2:
        ric = fiber_mod.gaussian_curvature_many(model.F, coords) * gvv
    else:
        ric = np.array([fiber_mod.ricci_quadratic(model.F, xs[i], vs[i])
                        for i in range(count)])
    f = model.w.f_many(ts)
    lf2 = warping.log_f_second_many(model.w, ts)
    q = ric - (model.dim - 1) * f * f * lf2 * gvv
    min_q = float(np.min(q))
    return {
        "holds_on_sample": bool(min_q >= -_EPS),
        "min_quantity": min_q,
        "samples": int(count),
    }


def fiber_ricci_lower(model: ModelSpec, samples: int = 400, seed: int = 7) -> float:
    """Sampled lower bound beta with Ric_F >= beta g_F."""
    k = fiber_mod.space_form_constant(model.F)
    if k is not None:
        return k * (model.dim - 1)
    rng = np.random.default_rng(seed)
    xs = _sample_box(model, samples, rng)
    vs = _sample_directions(model.dim, samples, rng)
    vals = []
    for i in range(samples):
        gvv = fiber_mod.conformal_factor(model.F, xs[i]) * float(vs[i] @ vs[i])
        vals.append(fiber_mod.ricci_quadratic(model.F, xs[i], vs[i]) / gvv)
    return float(np.min(vals))


def constant_curvature_check(model: ModelSpec, samples: int = 512) -> dict | None:
    """Recognize the constant-curvature catalog forms.

    f == 1 over a Euclidean fiber has curvature 0; f == cosh over the unit
    sphere has curvature 1.  Anything else returns None (in particular the
    anti-de Sitter region, whose curvature -1 fails the c >= 0 hypothesis).
    """
    lo, hi = warping.sample_window(model.interval)
    ts = np.linspace(lo + 1e-9, hi - 1e-9, samples)
    fv = model.w.f_many(ts)
    cbar = None
    if model.F.kind == "euclidean" and np.max(np.abs(fv - 1.0)) <= 1e-12:
        cbar = 0.0
    elif (model.F.kind == "sphere-stereographic"
          and np.max(np.abs(fv - np.cosh(ts)) / np.cosh(ts)) <= 1e-12):
        cbar = 1.0
    if cbar is None:
        return None
    return {"cbar": cbar, "totally_geodesic_prediction": TOTALLY_GEODESIC_LABEL}


def classify(model: ModelSpec, scan_window=None, samples: int = 10_001) -> dict:
    """Evaluate the rigidity / nonexistence / product hypotheses by scans."""
    ncc = check_ncc(model, t_samples=max(100, samples // 1), window=scan_window)
    scan_lf2 = warping.scan_extrema(model.w, "(log f)''", samples, scan_window)
    scan_ratio = warping.scan_extrema(model.w, "f'/f", samples, scan_window)
    scan_ratio2 = warping.scan_extrema(model.w, "(f'/f)^2", samples, scan_window)

    sup_lf2 = scan_lf2["sup"]
    rigidity_hyp = ncc["holds_on_sample"] and sup_lf2 < -_EPS
    nonexist_hyp = (ncc["holds_on_sample"] and sup_lf2 <= _EPS
                    and scan_ratio2["inf"] > _EPS)
    conflict = rigidity_hyp and nonexist_hyp

    rigidity = {
        "applicable": bool(rigidity_hyp and not conflict),
        "reason": (f"NCC holds on sample and sup (log f)'' = {sup_lf2:.6g} < 0"
                   if rigidity_hyp else
                   f"hypothesis fails: NCC holds={ncc['holds_on_sample']}, "
                   f"sup (log f)'' = {sup_lf2:.6g}"),
    }
    nonexistence = {
        "applicable": bool(nonexist_hyp and not conflict),
        "reason": (f"NCC holds, (log f)'' <= 0 on sample, inf (f'/f)^2 = "
                   f"{scan_ratio2['inf']:.6g} > 0" if nonexist_hyp else
                   f"hypothesis fails: NCC holds={ncc['holds_on_sample']}, "
                   f"sup (log f)'' = {sup_lf2:.6g}, "
                   f"inf (f'/f)^2 = {scan_ratio2['inf']:.6g}"),
    }
    if conflict:
        note = "conflict: rigidity and nonexistence hypotheses both sampled true"
        rigidity["reason"] = note
        nonexistence["reason"] = note

    is_product = (abs(scan_ratio["sup"]) <= 1e-12 and abs(scan_ratio["inf"]) <= 1e-12)
    beta = None
    product_hyp = False
    if is_product:
        f_const = model.w.f_at(0.5 * sum(scan_lf2["window"]))
        beta = fiber_ricci_lower(model) / (f_const * f_const)
        product_hyp = beta > _EPS
    product = {
        "applicable": bool(product_hyp),
        "beta": beta,
        "reason": (f"product spacetime with Ric_F >= {beta:.6g} g_F > 0" if product_hyp
                   else ("fiber Ricci lower bound not positive" if is_product
                         else "warping is not constant")),
    }

    height = {
        "future_case": {
            "applicable": bool(scan_ratio["sup"] < -_EPS),
            "statement": "no stochastically complete maximal hypersurface bounded away from future infinity",
        },
        "past_case": {
            "applicable": bool(scan_ratio["inf"] > _EPS),
            "statement": "no stochastically complete maximal hypersurface bounded away from past infinity",
        },
    }

    if nonexistence["applicable"]:
        conclusion = NONEXISTENCE_LABEL
    elif rigidity["applicable"]:
        conclusion = RIGIDITY_LABEL
    elif product["applicable"]:
        conclusion = PRODUCT_LABEL
    else:
        conclusion = NO_CONCLUSION_LABEL

    return {
        "model": model.name,
        "ncc": ncc,
        "thm_slice_rigidity": rigidity,
        "thm_nonexistence": nonexistence,
        "thm_product": product,
        "cor_height_bounds": height,
        "constant_curvature": constant_curvature_check(model),
        "hypothesis_conflict": bool(conflict),
        "conclusion": conclusion,
        "scan": {
            "sup_log_f_second": sup_lf2,
            "sup_ratio": scan_ratio["sup"],
            "inf_ratio": scan_ratio["inf"],
            "inf_ratio_squared": scan_ratio2["inf"],
            "samples": scan_lf2["samples"],
            "window": scan_lf2["window"],
            "note": scan_lf2["note"],
        },
    }


def height_sign_check(graph: GridFunction, model: ModelSpec,
                      maximal_tol: float = 1e-6) -> dict:
    """Signs of f'/f at the sampled height extrema of a maximal graph."""
    res = solver.residual(model, graph)
    worst = fields.interior_max(res.values, band=1)
    if not worst <= maximal_tol:
        raise NotMaximal(f"graph residual {worst!r} exceeds {maximal_tol!r}")
    sup_u = float(np.max(graph.values))
    inf_u = float(np.min(graph.values))
    sign_sup = warping.slice_mean_curvature(model.w, sup_u)
    sign_inf = warping.slice_mean_curvature(model.w, inf_u)
    return {
        "sup_u": sup_u,
        "inf_u": inf_u,
        "sign_at_sup": sign_sup,
        "sign_at_inf": sign_inf,
        "consistent": bool(sign_sup >= -_EPS and sign_inf <= _EPS),
        "caveat": "finite grid graph: extrema live on a compact set, consistency probe only",
    }


def _one_over_g_integral_divergent(g_expr, r0: float) -> bool:
    """Heuristic dyadic-block test for divergence of the integral of 1/G."""
    r0 = max(r0, 1.0)
    total = 0.0
    last = np.inf
    for k in range(16):
        a, b = r0 * 4.0 ** k, r0 * 4.0 ** (k + 1)
        rs = np.linspace(a, b, 33)[:-1] + (b - a) / 64.0
        gv = expr.eval_many(g_expr, {"r": rs})
        if not np.all(np.isfinite(gv)) or np.any(gv <= 0.0):
            return False
        last = float(np.sum((b - a) / 32.0 / gv))
        total += last
    return bool(last > 1e-3 * total)


def completeness_diagnostics(model: ModelSpec, graph, origin, r_max: float,
                             g_source: str | None = None, seed: int = 99,
                             node_cap: int = 600) -> dict:
    """Sufficient-condition report: Ricci lower bound, volume growth,
    optional radial-Ricci test, angle bound and length distortion.

    ``graph`` is a GridFunction (finite-difference jets) or a BuiltinGraph
    name resolved on the supplied grid.  The report never concludes
    stochastic incompleteness; failed criteria read 'not satisfied on
    sample' or 'inconclusive'.
    """
    if isinstance(graph, GridFunction):
        grid = graph.grid
        source = graph
    else:
        raise TypeError("graph must be a GridFunction")
    flds = fields.geometry_fields(model, grid, source)
    metric = flds.metric_field()
    rng = np.random.default_rng(seed)

    # (a) sampled Ricci lower bound via the Gauss equation
    n1, n2 = grid.counts
    stride = max(1, int(np.ceil(np.sqrt((n1 - 2) * (n2 - 2) / node_cap))))
    ric_min = np.inf
    for i in range(1, n1 - 1, stride):
        for j in range(1, n2 - 1, stride):
            x, u, du, d2u = discrete.jet_at(source, (i, j))
            gp = geometry.geometry_at(model.w, model.F, geometry.jet(x, u, du, d2u))
            for _ in range(4):
                v = rng.uniform(-1.0, 1.0, 2)
                nv = gp.gu_quad(v, v)
                if nv < 1e-12:
                    continue
                q = geometry.graph_ricci_quadratic(model.w, model.F, gp, v,
                                                   allow_nonmaximal=True) / nv
                ric_min = min(ric_min, q)
    ricci_lower = {
        "sampled_min": float(ric_min),
        "bounded_flag": bool(np.isfinite(ric_min)),
        "verdict": ("criterion-satisfied" if np.isfinite(ric_min) else "inconclusive"),
        "note": "Ricci bounded below on sample (Omori-Yau route), sampled not proven",
    }

    # (b) volume growth at ten radii
    dist = discrete.geodesic_distance(grid, metric, origin)
    radii = np.linspace(r_max / 10.0, r_max, 10)
    volumes = [discrete.ball_volume(grid, metric, dist, float(r)) for r in radii]
    ok = [(r, v) for r, v in zip(radii, volumes) if v > 0.0]
    if len(ok) >= 3:
        lr = np.log([r for r, _ in ok])
        lv = np.log([v for _, v in ok])
        exponent = float(np.polyfit(lr, lv, 1)[0])
        upper = [(r, v) for r, v in ok[len(ok) // 2:]]
        z = [np.log(v) / r ** 2 for r, v in upper]
        zslope = float(np.polyfit([r for r, _ in upper], z, 1)[0]) if len(upper) >= 2 else 0.0
        grig = "criterion-satisfied" if zslope <= 1e-3 else "criterion-not-satisfied-on-sample"
    else:
        exponent = float("nan")
        grig = "inconclusive"
    volume_growth = {
        "radii": [float(r) for r in radii],
        "volumes": [float(v) for v in volumes],
        "growth_exponent_fit": exponent,
        "grigoryan_verdict": grig,
        "note": "finite-range growth-class fit; no extrapolation to infinity",
    }

    # (c) optional radial Ricci test against a user comparison function G(r)
    radial = None
    if g_source is not None:
        g_expr = expr.parse(g_source)
        grad_r = discrete.metric_gradient_field(dist, metric)
        ok_now = True
        n_checked = 0
        for i in range(2, n1 - 2, stride):
            for j in range(2, n2 - 2, stride):
                v = np.array([grad_r[0][i, j], grad_r[1][i, j]])
                if not np.all(np.isfinite(v)) or not np.isfinite(dist.values[i, j]):
                    continue
                x, u, du, d2u = discrete.jet_at(source, (i, j))
                gp = geometry.geometry_at(model.w, model.F, geometry.jet(x, u, du, d2u))
                nv = gp.gu_quad(v, v)
                if nv < 1e-12:
                    continue
                q = geometry.graph_ricci_quadratic(model.w, model.F, gp, v,
                                                   allow_nonmaximal=True) / nv
                gval = expr.evaluate(g_expr, {"r": float(dist.values[i, j])})
                n_checked += 1
                if q < -(model.dim - 1) * gval * gval - 1e-6:
                    ok_now = False
        divergent = _one_over_g_integral_divergent(g_expr, r_max)
        radial = {
            "G_expr": g_source,
            "pointwise_ok": bool(ok_now and n_checked > 0),
            "one_over_G_integral_divergent": bool(divergent),
            "verdict": ("criterion-satisfied" if (ok_now and n_checked > 0 and divergent)
                        else ("criterion-not-satisfied-on-sample" if n_checked > 0
                              else "inconclusive")),
            "nodes_checked": int(n_checked),
        }

    # (d) angle bound and length distortion
    angle_sup = float(np.nanmax(flds.cosh))
    lam = float(np.nanmax(np.sqrt(flds.grad2) / flds.f))
    inf_f = float(np.nanmin(flds.f))
    derived = float(np.sqrt(max(1.0 - lam * lam, 0.0)) * inf_f)
    return {
        "model": model.name,
        "ricci_lower": ricci_lower,
        "volume_growth": volume_growth,
        "radial_ricci": radial,
        "angle_sup": angle_sup,
        "lambda_max_observed": lam,
        "length_distortion_constant": derived,
        "length_distortion_constant_printed_form": float((1.0 - lam * lam) * inf_f ** 2),
        "note": "diagnostics report sufficient conditions only; no incompleteness claim",
    }
