import math

import numpy as np
import pytest

from grwlab import discrete
from grwlab.discrete import Grid, GridFunction
from grwlab.errors import (BoundaryNode, DataFileError, DegenerateMetric,
                           DisconnectedRegion)


def euclid_metric(counts):
    mf = np.zeros((2, 2) + counts)
    mf[0, 0] = 1.0
    mf[1, 1] = 1.0
    return mf


def halfplane_metric(grid):
    _, x2 = grid.coords()
    mf = np.zeros((2, 2) + tuple(grid.counts))
    mf[0, 0] = 1.0 / x2 ** 2
    mf[1, 1] = 1.0 / x2 ** 2
    return mf


class TestGrid:
    def test_minimum_counts(self):
        with pytest.raises(ValueError):
            Grid(((-1, 1), (-1, 1)), (4, 9))

    def test_spacing_and_axes(self):
        g = Grid(((0.0, 1.0), (0.0, 2.0)), (5, 9))
        assert g.spacing == (0.25, 0.25)
        assert np.allclose(g.axis(0), [0, 0.25, 0.5, 0.75, 1.0])

    def test_refined_keeps_box(self):
        g = Grid(((0.0, 1.0), (0.0, 2.0)), (5, 9))
        r = g.refined()
        assert r.counts == (9, 17) and r.box == g.box

    def test_values_shape_checked(self):
        g = Grid(((0, 1), (0, 1)), (5, 5))
        with pytest.raises(ValueError):
            GridFunction(g, np.zeros((5, 6)))


class TestJets:
    def test_affine_exact(self):
        g = Grid(((0, 1), (0, 1)), (11, 11))
        gf = GridFunction.sample(g, lambda x1, x2: x1)
        _, u, du, d2u = discrete.jet_at(gf, (5, 5))
        assert du[0] == 1.0 and du[1] == 0.0 and np.all(d2u == 0.0)

    def test_quadratic_exact(self):
        g = Grid(((0, 1), (0, 1)), (11, 11))
        gf = GridFunction.sample(g, lambda x1, x2: x1 ** 2)
        _, _, _, d2u = discrete.jet_at(gf, (5, 5))
        assert d2u[0, 0] == pytest.approx(2.0, rel=1e-12)

    def test_sine_truncation_bound(self):
        g = Grid(((-0.5, 0.5), (-0.5, 0.5)), (101, 101))  # h = 0.01
        gf = GridFunction.sample(g, lambda x1, x2: np.sin(x1))
        _, _, du, _ = discrete.jet_at(gf, (50, 50))
        assert abs(du[0] - 1.0) <= 2e-5

    def test_mixed_derivative(self):
        g = Grid(((0, 1), (0, 1)), (21, 21))
        gf = GridFunction.sample(g, lambda x1, x2: x1 * x2)
        _, _, _, d2u = discrete.jet_at(gf, (10, 10))
        assert d2u[0, 1] == pytest.approx(1.0, rel=1e-12)

    def test_boundary_node_error(self):
        g = Grid(((0, 1), (0, 1)), (11, 11))
        gf = GridFunction.sample(g, lambda x1, x2: x1)
        with pytest.raises(BoundaryNode):
            discrete.jet_at(gf, (0, 5))
        with pytest.raises(BoundaryNode):
            discrete.jet_at(gf, (5, 10))


class TestLaplaceBeltrami:
    def test_euclidean_quadratic_exact(self):
        g = Grid(((-1, 1), (-1, 1)), (21, 21))
        gf = GridFunction.sample(g, lambda x1, x2: x1 ** 2 + x2 ** 2)
        lb = discrete.laplace_beltrami(gf, euclid_metric((21, 21)))
        assert np.nanmax(np.abs(lb.values - 4.0)) <= 1e-12

    def test_constant_annihilated(self):
        g = Grid(((0.0, 1.0), (0.5, 1.5)), (15, 15))
        gf = GridFunction(g, np.full((15, 15), 3.7))
        lb = discrete.laplace_beltrami(gf, halfplane_metric(g))
        assert np.nanmax(np.abs(lb.values)) == 0.0

    def test_hyperbolic_log_height(self):
        g = Grid(((-1, 1), (0.5, 2.5)), (101, 101))
        gf = GridFunction.sample(g, lambda x1, x2: np.log(x2))
        lb = discrete.laplace_beltrami(gf, halfplane_metric(g))
        assert np.nanmax(np.abs(lb.values + 1.0)) <= 5e-3

    def test_refinement_order_in_window(self):
        errs = []
        for n in (65, 129):
            g = Grid(((-1, 1), (0.5, 2.5)), (n, n))
            gf = GridFunction.sample(g, lambda x1, x2: np.log(x2) * np.sin(x1))
            lb = discrete.laplace_beltrami(gf, halfplane_metric(g))
            x1, x2 = g.coords()
            # closed form: Lap (log y sin x) on the half-plane
            exact = x2 ** 2 * (-np.log(x2) * np.sin(x1)) + x2 ** 2 * (
                -np.sin(x1) / x2 ** 2)
            errs.append(np.nanmax(np.abs(lb.values - exact)))
        ratio = errs[0] / errs[1]
        assert 2.5 <= ratio <= 6.0

    def test_self_adjointness(self):
        rng = np.random.default_rng(4)
        g = Grid(((-1, 1), (0.5, 2.5)), (41, 41))
        metric = halfplane_metric(g)
        _, det = discrete._metric_inverse_det(metric)
        x1, x2 = g.coords()
        bump = np.exp(-8 * (x1 ** 2 + (x2 - 1.5) ** 2))
        bump[bump < 1e-6] = 0.0
        u = bump * rng.uniform(0.5, 1.0, (41, 41))
        v = bump * rng.uniform(0.5, 1.0, (41, 41))
        lu = discrete.laplace_beltrami(GridFunction(g, u), metric).values
        lv = discrete.laplace_beltrami(GridFunction(g, v), metric).values
        w = np.sqrt(det) * np.prod(g.spacing)
        inner = slice(2, -2)
        a = np.nansum((u * lv * w)[inner, inner])
        b = np.nansum((v * lu * w)[inner, inner])
        assert abs(a - b) <= 1e-3 * max(abs(a), 1.0)

    def test_degenerate_metric_rejected(self):
        g = Grid(((0, 1), (0, 1)), (9, 9))
        mf = euclid_metric((9, 9))
        mf[0, 0, 4, 4] = -1.0
        with pytest.raises(DegenerateMetric):
            discrete.laplace_beltrami(GridFunction(g, np.zeros((9, 9))), mf)


class TestBrioschi:
    def test_halfplane_curvature(self):
        g = Grid(((-1, 1), (0.5, 2.5)), (101, 101))
        K = discrete.brioschi_curvature(g, halfplane_metric(g))
        assert np.nanmax(np.abs(K + 1.0)) <= 5e-3

    def test_flat_curvature(self):
        g = Grid(((0, 1), (0, 1)), (21, 21))
        K = discrete.brioschi_curvature(g, euclid_metric((21, 21)))
        assert np.nanmax(np.abs(K)) <= 1e-12


class TestGeodesicDistance:
    def test_euclidean_diagonal_overestimate(self):
        g = Grid(((0.0, 3.0), (0.0, 4.0)), (61, 81))
        d = discrete.geodesic_distance(g, euclid_metric((61, 81)), (0, 0))
        assert 5.0 - 1e-9 <= d.values[-1, -1] <= 5.45

    def test_axis_path_exact(self):
        g = Grid(((0.0, 3.0), (0.0, 4.0)), (61, 81))
        d = discrete.geodesic_distance(g, euclid_metric((61, 81)), (0, 0))
        assert d.values[0, 40] == pytest.approx(2.0, rel=1e-9)

    def test_halfplane_vertical_geodesic(self):
        g = Grid(((-0.5, 0.5), (1.0, math.e)), (41, 41))
        d = discrete.geodesic_distance(g, halfplane_metric(g), (20, 0))
        assert d.values[20, -1] == pytest.approx(1.0, abs=0.01)

    def test_disconnected_region(self):
        g = Grid(((0, 1), (0, 1)), (11, 11))
        mf = euclid_metric((11, 11))
        mf[:, :, 5, :] = np.nan  # cut the grid in half
        with pytest.raises(DisconnectedRegion):
            discrete.geodesic_distance(g, mf, (0, 0))


class TestBallVolume:
    def test_unit_disk_area(self):
        g = Grid(((-1.5, 1.5), (-1.5, 1.5)), (101, 101))
        mf = euclid_metric((101, 101))
        d = discrete.geodesic_distance(g, mf, (50, 50))
        vol = discrete.ball_volume(g, mf, d, 1.0)
        assert vol == pytest.approx(math.pi, rel=0.05)

    def test_tiny_ball(self):
        g = Grid(((-1, 1), (-1, 1)), (21, 21))
        mf = euclid_metric((21, 21))
        d = discrete.geodesic_distance(g, mf, (10, 10))
        cell = np.prod(g.spacing)
        assert discrete.ball_volume(g, mf, d, 1e-6) <= cell + 1e-12

    def test_quadratic_growth(self):
        g = Grid(((-2.5, 2.5), (-2.5, 2.5)), (101, 101))
        mf = euclid_metric((101, 101))
        d = discrete.geodesic_distance(g, mf, (50, 50))
        v1 = discrete.ball_volume(g, mf, d, 1.0)
        v2 = discrete.ball_volume(g, mf, d, 2.0)
        assert v2 / v1 == pytest.approx(4.0, rel=0.10)


class TestGridFile:
    def test_roundtrip_to_17_digits(self, tmp_path):
        g = Grid(((-1.0, 1.0), (0.5, 2.5)), (7, 5))
        rng = np.random.default_rng(2)
        gf = GridFunction(g, rng.standard_normal((7, 5)) * np.pi)
        path = tmp_path / "x.grid"
        discrete.write_grid(gf, str(path), model="product-hyperbolic")
        back, model = discrete.read_grid(str(path))
        assert model == "product-hyperbolic"
        assert back.grid == g
        assert np.array_equal(back.values, gf.values)

    def test_header_format(self, tmp_path):
        g = Grid(((0.0, 1.0), (0.0, 2.0)), (5, 5))
        path = tmp_path / "y.grid"
        discrete.write_grid(GridFunction(g, np.zeros((5, 5))), str(path), model="m")
        lines = path.read_text().splitlines()
        assert lines[0] == "# grwlab-grid v1"
        assert lines[1] == "box=0.0,1.0,0.0,2.0"
        assert lines[2] == "counts=5,5"
        assert lines[3] == "model=m"
        assert len(lines) == 4 + 5

    def test_missing_file(self):
        with pytest.raises(DataFileError):
            discrete.read_grid("/nonexistent/path.grid")

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.grid"
        p.write_text("nope\n")
        with pytest.raises(DataFileError):
            discrete.read_grid(str(p))

    def test_short_data(self, tmp_path):
        p = tmp_path / "short.grid"
        p.write_text("# grwlab-grid v1\nbox=0,1,0,1\ncounts=5,5\nmodel=\n1 2 3 4 5\n")
        with pytest.raises(DataFileError):
            discrete.read_grid(str(p))
