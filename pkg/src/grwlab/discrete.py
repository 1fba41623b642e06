"""Structured-grid discretization.

Finite-difference jets, Laplace-Beltrami and covariant derivatives with
respect to a per-node metric field, geodesic distances, ball volumes, and
the text grid-file format.  All stencils are second-order central; nodes
whose stencil leaves the grid carry NaN, and residual statistics exclude a
two-node boundary band.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .errors import (BoundaryNode, DataFileError, DegenerateMetric,
                     DisconnectedRegion)

GRID_FILE_MAGIC = "# grwlab-grid v1"


@dataclass(frozen=True)
class Grid:
    box: tuple    # ((a1, b1), (a2, b2), ...)
    counts: tuple

    def __post_init__(self):
        if any(c < 5 for c in self.counts):
            raise ValueError("grids need at least 5 nodes per axis")
        if any(not b > a for a, b in self.box):
            raise ValueError("box sides must have positive extent")

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (c - 1) for (a, b), c in zip(self.box, self.counts))

    def axis(self, i: int) -> np.ndarray:
        a, b = self.box[i]
        return np.linspace(a, b, self.counts[i])

    def coords(self) -> list:
        return list(np.meshgrid(*[self.axis(i) for i in range(self.dim)], indexing="ij"))

    def refined(self) -> "Grid":
        """Same box at half spacing (nodes are nested)."""
        return Grid(self.box, tuple(2 * c - 1 for c in self.counts))


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if tuple(self.values.shape) != tuple(self.grid.counts):
            raise ValueError("values shape does not match the grid")

    @staticmethod
    def sample(grid: Grid, fn) -> "GridFunction":
        coords = grid.coords()
        return GridFunction(grid, np.asarray(fn(*coords), dtype=float))


def nan_margin(values: np.ndarray, width: int) -> np.ndarray:
    """Copy with a NaN band of the given width on every side."""
    out = np.full_like(values, np.nan)
    inner = tuple(slice(width, -width) for _ in values.shape)
    out[inner] = values[inner]
    return out


def central_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full_like(values, np.nan)
    plus = [slice(None)] * values.ndim
    minus = [slice(None)] * values.ndim
    mid = [slice(None)] * values.ndim
    plus[axis] = slice(2, None)
    minus[axis] = slice(0, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (values[tuple(plus)] - values[tuple(minus)]) / (2.0 * h)
    return out


def second_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full_like(values, np.nan)
    plus = [slice(None)] * values.ndim
    minus = [slice(None)] * values.ndim
    mid = [slice(None)] * values.ndim
    plus[axis] = slice(2, None)
    minus[axis] = slice(0, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (values[tuple(plus)] - 2.0 * values[tuple(mid)]
                       + values[tuple(minus)]) / h ** 2
    return out


def mixed_diff(values: np.ndarray, ax1: int, ax2: int, h1: float, h2: float) -> np.ndarray:
    return central_diff(central_diff(values, ax1, h1), ax2, h2)


def gradient_fields(gf: GridFunction) -> list:
    h = gf.grid.spacing
    return [central_diff(gf.values, i, h[i]) for i in range(gf.grid.dim)]


def hessian_fields(gf: GridFunction) -> np.ndarray:
    """Coordinate second partials; shape (d, d, *counts)."""
    d = gf.grid.dim
    h = gf.grid.spacing
    out = np.empty((d, d) + tuple(gf.grid.counts))
    for i in range(d):
        out[i, i] = second_diff(gf.values, i, h[i])
        for j in range(i + 1, d):
            out[i, j] = out[j, i] = mixed_diff(gf.values, i, j, h[i], h[j])
    return out


def jet_at(gf: GridFunction, node) -> tuple:
    """(x, u, du, d2u) by central differences at one node."""
    node = tuple(int(k) for k in node)
    grid = gf.grid
    for k, c in zip(node, grid.counts):
        if k < 1 or k > c - 2:
            raise BoundaryNode(f"node {node} has no full stencil")
    d = grid.dim
    h = grid.spacing
    v = gf.values
    x = np.array([grid.axis(i)[node[i]] for i in range(d)])

    def shifted(*offsets):
        return v[tuple(n + o for n, o in zip(node, offsets))]

    du = np.zeros(d)
    d2u = np.zeros((d, d))
    for i in range(d):
        ei = [0] * d
        ei[i] = 1
        up = shifted(*ei)
        ei[i] = -1
        dn = shifted(*ei)
        du[i] = (up - dn) / (2.0 * h[i])
        d2u[i, i] = (up - 2.0 * v[node] + dn) / h[i] ** 2
        for j in range(i + 1, d):
            off = [0] * d

            def corner(si, sj):
                off[i], off[j] = si, sj
                return shifted(*off)

            d2u[i, j] = d2u[j, i] = (
                corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)
            ) / (4.0 * h[i] * h[j])
    return x, float(v[node]), du, d2u


# ---------------------------------------------------------------------------
# metric-field operators

def _metric_inverse_det(metric_field: np.ndarray):
    """Inverse and determinant per node; NaN blocks stay NaN."""
    d = metric_field.shape[0]
    if d == 2:
        g11, g12, g22 = metric_field[0, 0], metric_field[0, 1], metric_field[1, 1]
        det = g11 * g22 - g12 ** 2
        inv = np.empty_like(metric_field)
        inv[0, 0] = g22 / det
        inv[1, 1] = g11 / det
        inv[0, 1] = inv[1, 0] = -g12 / det
        return inv, det
    stacked = np.moveaxis(metric_field, (0, 1), (-2, -1))
    bad = ~np.all(np.isfinite(stacked), axis=(-2, -1))
    safe = np.where(bad[..., None, None], np.eye(d), stacked)
    inv = np.linalg.inv(safe)
    det = np.linalg.det(safe)
    inv[bad] = np.nan
    det[bad] = np.nan
    return np.moveaxis(inv, (-2, -1), (0, 1)), det


def check_metric_field(metric_field: np.ndarray) -> tuple:
    """Validate positive definiteness on finite nodes; returns (inv, det)."""
    inv, det = _metric_inverse_det(metric_field)
    finite = np.isfinite(det)
    if np.any(det[finite] <= 0.0) or np.any(metric_field[0, 0][finite] <= 0.0):
        raise DegenerateMetric("metric field is not positive definite everywhere")
    return inv, det


def laplace_beltrami(gf: GridFunction, metric_field: np.ndarray) -> GridFunction:
    """Divergence-form Laplacian |g|^{-1/2} d_i(|g|^{1/2} g^{ij} d_j h).

    Nested central differences: valid two nodes in from the boundary (and
    two nodes in from any NaN in the metric field).
    """
    grid = gf.grid
    h = grid.spacing
    inv, det = check_metric_field(metric_field)
    sqrtdet = np.sqrt(det)
    grads = gradient_fields(gf)
    div = np.zeros_like(gf.values)
    for i in range(grid.dim):
        flux = sqrtdet * sum(inv[i, j] * grads[j] for j in range(grid.dim))
        div = div + central_diff(flux, i, h[i])
    return GridFunction(grid, div / sqrtdet)


def metric_gradient_field(gf: GridFunction, metric_field: np.ndarray) -> np.ndarray:
    """(grad h)^i = g^{ij} d_j h per node; shape (d, *counts)."""
    inv, _ = check_metric_field(metric_field)
    grads = gradient_fields(gf)
    return np.stack([sum(inv[i, j] * grads[j] for j in range(gf.grid.dim))
                     for i in range(gf.grid.dim)])


def christoffel_field(grid: Grid, metric_field: np.ndarray) -> np.ndarray:
    """Gamma^k_ij per node from central differences of the metric field."""
    d = grid.dim
    h = grid.spacing
    inv, _ = check_metric_field(metric_field)
    dg = np.empty((d, d, d) + tuple(grid.counts))  # dg[l, i, j] = d_l g_ij
    for l in range(d):
        for i in range(d):
            for j in range(i, d):
                dg[l, i, j] = dg[l, j, i] = central_diff(metric_field[i, j], l, h[l])
    gamma = np.zeros((d, d, d) + tuple(grid.counts))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                acc = 0.0
                for l in range(d):
                    acc = acc + inv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                gamma[k, i, j] = 0.5 * acc
    return gamma


def covariant_hessian_field(gf: GridFunction, metric_field: np.ndarray,
                            gamma: np.ndarray | None = None) -> np.ndarray:
    """Hess_ij = d_i d_j h - Gamma^k_ij d_k h; shape (d, d, *counts)."""
    if gamma is None:
        gamma = christoffel_field(gf.grid, metric_field)
    grads = gradient_fields(gf)
    hess = hessian_fields(gf)
    d = gf.grid.dim
    for i in range(d):
        for j in range(d):
            for k in range(d):
                hess[i, j] = hess[i, j] - gamma[k, i, j] * grads[k]
    return hess


def brioschi_curvature(grid: Grid, metric_field: np.ndarray) -> np.ndarray:
    """Gaussian curvature of a 2d metric field by the Brioschi formula."""
    if grid.dim != 2:
        raise ValueError("Brioschi curvature requires a 2d grid")
    h1, h2 = grid.spacing
    E, Fm, G = metric_field[0, 0], metric_field[0, 1], metric_field[1, 1]
    E1, E2 = central_diff(E, 0, h1), central_diff(E, 1, h2)
    G1, G2 = central_diff(G, 0, h1), central_diff(G, 1, h2)
    F1, F2 = central_diff(Fm, 0, h1), central_diff(Fm, 1, h2)
    E22 = second_diff(E, 1, h2)
    G11 = second_diff(G, 0, h1)
    F12 = mixed_diff(Fm, 0, 1, h1, h2)

    def det3(a11, a12, a13, a21, a22, a23, a31, a32, a33):
        return (a11 * (a22 * a33 - a23 * a32)
                - a12 * (a21 * a33 - a23 * a31)
                + a13 * (a21 * a32 - a22 * a31))

    m1 = det3(-0.5 * E22 + F12 - 0.5 * G11, 0.5 * E1, F1 - 0.5 * E2,
              F2 - 0.5 * G1, E, Fm,
              0.5 * G2, Fm, G)
    m2 = det3(np.zeros_like(E), 0.5 * E2, 0.5 * G1,
              0.5 * E2, E, Fm,
              0.5 * G1, Fm, G)
    return (m1 - m2) / (E * G - Fm ** 2) ** 2


# ---------------------------------------------------------------------------
# distances and volumes

def _neighbor_offsets(d: int) -> list:
    grids = np.meshgrid(*[(-1, 0, 1)] * d, indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=1)
    return [tuple(o) for o in offsets if any(o)]


def geodesic_distance(grid: Grid, metric_field: np.ndarray, source) -> GridFunction:
    """Dijkstra over the diagonal-neighbor graph with metric edge lengths.

    Edge length is sqrt of the averaged endpoint quadratic forms; in 2d the
    stencil anisotropy overestimates true distances by at most sec(pi/8).
    """
    counts = tuple(grid.counts)
    n_nodes = int(np.prod(counts))
    spacing = grid.spacing
    valid = np.all(np.isfinite(metric_field), axis=(0, 1))
    rows, cols, weights = [], [], []
    flat = np.arange(n_nodes).reshape(counts)
    for off in _neighbor_offsets(grid.dim):
        src_sl, dst_sl = [], []
        for o in off:
            if o == 1:
                src_sl.append(slice(0, -1))
                dst_sl.append(slice(1, None))
            elif o == -1:
                src_sl.append(slice(1, None))
                dst_sl.append(slice(0, -1))
            else:
                src_sl.append(slice(None))
                dst_sl.append(slice(None))
        src_sl, dst_sl = tuple(src_sl), tuple(dst_sl)
        e = np.array([o * s for o, s in zip(off, spacing)])
        quad = sum(metric_field[i, j] * e[i] * e[j]
                   for i in range(grid.dim) for j in range(grid.dim))
        w2 = 0.5 * (quad[src_sl] + quad[dst_sl])
        ok = valid[src_sl] & valid[dst_sl] & np.isfinite(w2)
        rows.append(flat[src_sl][ok])
        cols.append(flat[dst_sl][ok])
        weights.append(np.sqrt(w2[ok]))
    graph = coo_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_nodes, n_nodes),
    ).tocsr()
    source_index = int(flat[tuple(int(k) for k in source)])
    if not valid.ravel()[source_index]:
        raise DisconnectedRegion("source node has no valid metric")
    dist = _csgraph_dijkstra(graph, directed=False, indices=source_index)
    dist = dist.reshape(counts)
    if np.any(np.isinf(dist[valid])):
        raise DisconnectedRegion("valid region is not connected to the source")
    dist[~valid] = np.nan
    return GridFunction(grid, dist)


def ball_volume(grid: Grid, metric_field: np.ndarray, dist: GridFunction,
                r: float) -> float:
    """Riemannian volume of {dist <= r} by the midpoint rule."""
    _, det = _metric_inverse_det(metric_field)
    cell = float(np.prod(grid.spacing))
    inside = np.isfinite(dist.values) & (dist.values <= r) & np.isfinite(det)
    return float(np.sum(np.sqrt(det[inside])) * cell)


# ---------------------------------------------------------------------------
# grid-file format

def write_grid(gf: GridFunction, path: str, model: str = "") -> None:
    grid = gf.grid
    if grid.dim != 2:
        raise DataFileError("grid files are two-dimensional")
    (a1, b1), (a2, b2) = grid.box
    n1, n2 = grid.counts
    lines = [GRID_FILE_MAGIC,
             f"box={a1!r},{b1!r},{a2!r},{b2!r}",
             f"counts={n1},{n2}",
             f"model={model}"]
    for j in range(n2):
        lines.append(" ".join(repr(float(v)) for v in gf.values[:, j]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid(path: str):
    """Returns (GridFunction, model name)."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataFileError(f"cannot read grid file {path!r}: {exc}") from None
    if not lines or lines[0].strip() != GRID_FILE_MAGIC:
        raise DataFileError(f"{path!r} is not a grwlab grid file")
    header = {}
    row = 1
    while row < len(lines) and "=" in lines[row]:
        key, _, value = lines[row].partition("=")
        header[key.strip()] = value.strip()
        row += 1
    try:
        a1, b1, a2, b2 = (float(v) for v in header["box"].split(","))
        n1, n2 = (int(v) for v in header["counts"].split(","))
    except (KeyError, ValueError) as exc:
        raise DataFileError(f"bad grid header in {path!r}: {exc}") from None
    data = lines[row:row + n2]
    if len(data) < n2:
        raise DataFileError(f"{path!r}: expected {n2} data rows, found {len(data)}")
    values = np.empty((n1, n2))
    for j, line in enumerate(data):
        parts = line.split()
        if len(parts) != n1:
            raise DataFileError(f"{path!r} row {j}: expected {n1} values")
        values[:, j] = [float(p) for p in parts]
    grid = Grid(((a1, b1), (a2, b2)), (n1, n2))
    return GridFunction(grid, values), header.get("model", "")


def observed_order(res_coarse: float, res_fine: float) -> float:
    return float(np.log2(res_coarse / res_fine))
