import math

import numpy as np
import pytest

from grwlab import fiber, geometry, warping
from grwlab.errors import NotMaximal, NotSpacelike

INF = math.inf


@pytest.fixture(scope="module")
def minkowski():
    return warping.make_warping("1", (-INF, INF)), fiber.make_fiber("euclidean", 2)


@pytest.fixture(scope="module")
def desitter():
    return (warping.make_warping("cosh(t)", (-INF, INF)),
            fiber.make_fiber("sphere-stereographic", 2))


@pytest.fixture(scope="module")
def product_h2():
    return (warping.make_warping("1", (-INF, INF)),
            fiber.make_fiber("hyperbolic-halfplane", 2))


def h2log_jet(x):
    x = np.asarray(x, dtype=float)
    r2 = float(x @ x)
    u = math.log(r2) / 3.0
    du = (2.0 / 3.0) * x / r2
    d2u = (2.0 / 3.0) * (np.eye(2) / r2 - 2.0 * np.outer(x, x) / r2 ** 2)
    return geometry.jet(x, u, du, d2u)


def random_spacelike_jet(w, F, rng, lam=None):
    if F.kind == "hyperbolic-halfplane":
        x = np.array([rng.uniform(-1, 1), rng.uniform(0.4, 2.2)])
    else:
        x = rng.uniform(-1.2, 1.2, 2)
    u = rng.uniform(-0.8, 0.8)
    f = w.f_at(u)
    c = fiber.conformal_factor(F, x)
    direction = rng.uniform(-1, 1, 2)
    direction /= np.linalg.norm(direction)
    lam = rng.uniform(0.05, 0.85) if lam is None else lam
    du = direction * lam * f * math.sqrt(c)  # |Du| = lam f exactly
    d2u = rng.uniform(-0.7, 0.7, (2, 2))
    return geometry.jet(x, u, du, 0.5 * (d2u + d2u.T))


class TestInducedMetric:
    def test_affine_minkowski(self, minkowski):
        w, F = minkowski
        j = geometry.jet([0.0, 0.0], 0.0, [0.5, 0.0], np.zeros((2, 2)))
        assert np.allclose(geometry.induced_metric(w, F, j), np.diag([0.75, 1.0]))

    def test_not_spacelike(self, minkowski):
        w, F = minkowski
        j = geometry.jet([0.0, 0.0], 0.0, [1.5, 0.0], np.zeros((2, 2)))
        with pytest.raises(NotSpacelike):
            geometry.induced_metric(w, F, j)

    def test_slice_in_desitter(self, desitter):
        w, F = desitter
        j = geometry.jet([0.0, 0.0], 0.0, [0.0, 0.0], np.zeros((2, 2)))
        assert np.allclose(geometry.induced_metric(w, F, j), 4.0 * np.eye(2))


class TestGeometryAt:
    def test_affine_graph_is_totally_geodesic(self, minkowski):
        w, F = minkowski
        j = geometry.jet([0.3, -0.7], 0.5 * 0.3, [0.5, 0.0], np.zeros((2, 2)))
        g = geometry.geometry_at(w, F, j)
        assert g.cosh_phi == pytest.approx(1.0 / math.sqrt(0.75), rel=1e-14)
        assert abs(g.h) <= 1e-15
        assert np.allclose(g.a_matrix, 0.0, atol=1e-15)

    def test_totally_geodesic_slice(self, desitter):
        w, F = desitter
        j = geometry.jet([0.4, 0.1], 0.0, [0.0, 0.0], np.zeros((2, 2)))
        g = geometry.geometry_at(w, F, j)
        assert g.h == 0.0 and np.all(g.a_matrix == 0.0) and g.cosh_phi == pytest.approx(1.0)

    def test_h2log_point_values(self, product_h2):
        w, F = product_h2
        g = geometry.geometry_at(w, F, h2log_jet([0.0, 1.0]))
        assert g.sinh2_phi == pytest.approx(4.0 / 9.0 / (1 - 4.0 / 9.0), rel=1e-12)
        assert g.cosh_phi == pytest.approx(3.0 / math.sqrt(5.0), rel=1e-14)
        assert abs(g.h) <= 1e-14

    def test_umbilical_slice_sign_convention(self, desitter):
        w, F = desitter
        j = geometry.jet([0.2, -0.3], 1.0, [0.0, 0.0], np.zeros((2, 2)))
        g = geometry.geometry_at(w, F, j)
        assert np.allclose(g.a_matrix, -math.tanh(1.0) * np.eye(2), rtol=1e-14)
        assert g.h == pytest.approx(math.tanh(1.0), rel=1e-14)


class TestJetInvariants:
    def test_trace_divergence_consistency(self):
        rng = np.random.default_rng(42)
        cases = [
            (warping.make_warping("1", (-INF, INF)), fiber.make_fiber("euclidean", 2)),
            (warping.make_warping("cosh(t)", (-INF, INF)),
             fiber.make_fiber("sphere-stereographic", 2)),
            (warping.make_warping("exp(t)", (-INF, INF)),
             fiber.make_fiber("hyperbolic-halfplane", 2)),
        ]
        for _ in range(10_000 // 3):
            for w, F in cases:
                g = geometry.geometry_at(w, F, random_spacelike_jet(w, F, rng))
                scale = max(1.0, abs(g.h))
                assert abs(g.h - g.h_div) <= 1e-9 * scale

    def test_angle_identities(self):
        rng = np.random.default_rng(7)
        w = warping.make_warping("cosh(t)", (-INF, INF))
        F = fiber.make_fiber("sphere-stereographic", 2)
        for _ in range(300):
            g = geometry.geometry_at(w, F, random_spacelike_jet(w, F, rng))
            assert abs(g.cosh_phi ** 2 - 1.0 - g.sinh2_phi) <= 1e-10 * max(1, g.sinh2_phi)
            grad_tau2 = g.gu_quad(g.dt_top, g.dt_top)
            assert abs(g.sinh2_phi - grad_tau2) <= 1e-10 * max(1, g.sinh2_phi)

    def test_normal_normalization(self):
        rng = np.random.default_rng(8)
        w = warping.make_warping("exp(t)", (-INF, INF))
        F = fiber.make_fiber("hyperbolic-halfplane", 2)
        for _ in range(300):
            j = random_spacelike_jet(w, F, rng)
            g = geometry.geometry_at(w, F, j)
            c = fiber.conformal_factor(F, j.x)
            f = w.f_at(j.u)
            norm = -g.cosh_phi ** 2 + f * f * c * float(g.n_fiber @ g.n_fiber)
            assert abs(norm + 1.0) <= 1e-10

    @pytest.mark.parametrize("lam", [0.3, 0.9])
    def test_angle_bound_under_gradient_bound(self, lam):
        rng = np.random.default_rng(13)
        w = warping.make_warping("cosh(t)", (-INF, INF))
        F = fiber.make_fiber("euclidean", 2)
        bound = 1.0 / math.sqrt(1.0 - lam * lam)
        for _ in range(200):
            g = geometry.geometry_at(w, F, random_spacelike_jet(w, F, rng, lam=lam))
            assert g.cosh_phi <= bound + 1e-9


class TestRhsDeltaTau:
    def test_affine_minkowski(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.5, 0.0], np.zeros((2, 2))))
        assert geometry.rhs_delta_tau(g, w) == pytest.approx(0.0, abs=1e-14)

    def test_desitter_slice_cancels(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.1, 0.0], 1.0, [0, 0], np.zeros((2, 2))))
        assert geometry.rhs_delta_tau(g, w) == pytest.approx(0.0, abs=1e-13)

    def test_h2log_vanishes(self, product_h2):
        w, F = product_h2
        g = geometry.geometry_at(w, F, h2log_jet([0.3, 1.2]))
        assert geometry.rhs_delta_tau(g, w) == pytest.approx(0.0, abs=1e-13)


class TestRhsGradCosh:
    def test_slice_zero(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.1, 0.2], 1.0, [0, 0], np.zeros((2, 2))))
        assert np.allclose(geometry.rhs_grad_cosh(g, w), 0.0)

    def test_affine_zero(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.5, 0], np.zeros((2, 2))))
        assert np.allclose(geometry.rhs_grad_cosh(g, w), 0.0, atol=1e-15)

    def test_h2log_equals_a_applied_to_dt(self, product_h2):
        # (0, 1) is a critical point of the angle, so probe a generic point
        w, F = product_h2
        g = geometry.geometry_at(w, F, h2log_jet([0.3, 1.2]))
        expected = g.a_matrix @ g.dt_top
        assert np.allclose(geometry.rhs_grad_cosh(g, w), expected, rtol=1e-13)
        assert np.linalg.norm(expected) > 0


class TestRhsHessAndSinh2:
    def test_affine_zero(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.5, 0], np.zeros((2, 2))))
        assert geometry.rhs_hess_tau_norm2(g, w) == pytest.approx(0.0, abs=1e-14)

    def test_geodesic_slice_zero(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.3, 0], 0.0, [0, 0], np.zeros((2, 2))))
        assert geometry.rhs_hess_tau_norm2(g, w) == 0.0
        assert geometry.rhs_delta_sinh2(g, w, 0.0, 0.0, 0.0) == 0.0

    def test_h2log_reduces_to_cosh2_a2(self, product_h2):
        w, F = product_h2
        g = geometry.geometry_at(w, F, h2log_jet([0.0, 1.0]))
        expected = g.cosh_phi ** 2 * g.a_norm2
        assert geometry.rhs_hess_tau_norm2(g, w) == pytest.approx(expected, rel=1e-13)

    def test_not_maximal_gate(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.1, 0], 1.0, [0, 0], np.zeros((2, 2))))
        with pytest.raises(NotMaximal):
            geometry.rhs_hess_tau_norm2(g, w)
        with pytest.raises(NotMaximal):
            geometry.rhs_delta_sinh2(g, w, 0.0, 0.0, 0.0)


class TestAmbientRicci:
    def test_flat_ambient(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.3, 0], np.zeros((2, 2))))
        r = geometry.ambient_ricci(w, F, g)
        assert r["ric_tt"] == 0.0 and r["ric_nfnf"] == pytest.approx(0.0)
        assert r["ric_dttop_n"] == pytest.approx(0.0)

    def test_steady_state_tt(self):
        w = warping.make_warping("exp(t)", (-INF, INF))
        F = fiber.make_fiber("euclidean", 2)
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.7, [0, 0], np.zeros((2, 2))))
        assert geometry.ambient_ricci(w, F, g)["ric_tt"] == pytest.approx(-2.0)

    def test_desitter_slice_tt(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0, 0], np.zeros((2, 2))))
        assert geometry.ambient_ricci(w, F, g)["ric_tt"] == pytest.approx(-2.0)


class TestNcc:
    def test_steady_state_exact_zero(self):
        w = warping.make_warping("exp(t)", (-INF, INF))
        F = fiber.make_fiber("euclidean", 2)
        assert geometry.ncc_quantity(w, F, 1.3, [0.2, 0.4], [1.0, -0.5]) == 0.0

    def test_ads_region_cancellation(self):
        w = warping.make_warping("cos(t)", (-math.pi / 2, math.pi / 2))
        F = fiber.make_fiber("hyperbolic-halfplane", 2)
        q = geometry.ncc_quantity(w, F, 1.2, [0.3, 1.7], [1.0, -0.4])
        assert abs(q) <= 1e-12

    def test_desitter_cancellation(self):
        w = warping.make_warping("cosh(t)", (-INF, INF))
        F = fiber.make_fiber("sphere-stereographic", 2)
        q = geometry.ncc_quantity(w, F, 2.0, [0.3, -0.1], [1.0, 0.4])
        assert abs(q) <= 1e-12

    def test_zero_direction_rejected(self):
        w = warping.make_warping("1", (-INF, INF))
        F = fiber.make_fiber("euclidean", 2)
        with pytest.raises(ValueError):
            geometry.ncc_quantity(w, F, 0.0, [0.0, 0.0], [0.0, 0.0])


class TestGraphRicci:
    def test_flat_graph_zero(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.4, 0.1], np.zeros((2, 2))))
        for v in ([1.0, 0.0], [0.3, -1.2]):
            assert geometry.graph_ricci_quadratic(w, F, g, v) == pytest.approx(0.0, abs=1e-13)

    def test_desitter_geodesic_slice(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.2, 0.1], 0.0, [0, 0], np.zeros((2, 2))))
        v = np.array([1.0, 0.4])
        q = geometry.graph_ricci_quadratic(w, F, g, v) / g.gu_quad(v, v)
        assert q == pytest.approx(F.n - 1, rel=1e-12)

    def test_h2log_product_reduction(self, product_h2):
        w, F = product_h2
        rng = np.random.default_rng(21)
        for _ in range(20):
            x = np.array([rng.uniform(-1, 1), rng.uniform(0.6, 2.4)])
            g = geometry.geometry_at(w, F, h2log_jet(x))
            v = rng.uniform(-1, 1, 2)
            lhs = geometry.graph_ricci_quadratic(w, F, g, v)
            av = g.a_matrix @ v
            rhs = -g.cosh_phi ** 2 * g.gu_quad(v, v) + g.gu_quad(av, av)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
            assert lhs / g.gu_quad(v, v) >= -g.cosh_phi ** 2 - 1e-10

    def test_nonmaximal_gate_and_override(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.1, 0], 1.0, [0, 0], np.zeros((2, 2))))
        with pytest.raises(NotMaximal):
            geometry.graph_ricci_quadratic(w, F, g, [1.0, 0.0])
        v = np.array([1.0, 0.0])
        q = geometry.graph_ricci_quadratic(w, F, g, v, allow_nonmaximal=True) / g.gu_quad(v, v)
        # the slice at height 1 is a round sphere of radius cosh(1)
        assert q == pytest.approx(1.0 / math.cosh(1.0) ** 2, rel=1e-12)


class TestSimons:
    def test_totally_geodesic_zero(self, minkowski):
        w, F = minkowski
        g = geometry.geometry_at(w, F, geometry.jet([0, 0], 0.0, [0.3, 0], np.zeros((2, 2))))
        assert geometry.simons_rhs(g, 0.0, 0.0) == 0.0

    def test_desitter_slice_zero(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.3, 0], 0.0, [0, 0], np.zeros((2, 2))))
        assert geometry.simons_rhs(g, 1.0, 0.0) == 0.0

    def test_gate(self, desitter):
        w, F = desitter
        g = geometry.geometry_at(w, F, geometry.jet([0.1, 0], 1.0, [0, 0], np.zeros((2, 2))))
        with pytest.raises(NotMaximal):
            geometry.simons_rhs(g, 1.0, 0.0)
