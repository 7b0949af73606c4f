"""Induced geometry, shape tensor, mean curvature, null frames, verdicts."""

import math

import numpy as np
import pytest

from lorentzkit.errors import NotSpacelike, WrongCodimension
from lorentzkit.expr import SymbolTable
from lorentzkit.submanifold import (Embedding, classify_trapped, induced_metric,
                                    mean_curvature, null_frame_and_expansions,
                                    shape_tensor)

from conftest import fd_scalar_jet


def _ef_sphere(bundles, name):
    b = bundles["schwarzschild_ef"]
    return b, b.submanifolds[name], b.hints[name]


class TestInduced:
    def test_torus_sub_is_flat_identity(self, bundles):
        b = bundles["torus_quotient"]
        first, spacelike = induced_metric(b.field, b.submanifolds["S"], [0.2, 0.7])
        assert spacelike
        assert np.allclose(first, np.eye(2), atol=1e-12)

    def test_minkowski_sphere_round_metric(self, bundles):
        b = bundles["minkowski"]
        u = [1.1, 0.4]
        first, spacelike = induced_metric(b.field, b.submanifolds["sphere"], u)
        assert spacelike
        expected = np.diag([1.0, math.sin(1.1) ** 2])   # radius 1
        assert np.allclose(first, expected, atol=1e-12)

    def test_null_embedding_not_spacelike(self, bundles):
        b = bundles["minkowski"]
        ptable = SymbolTable(["ua", "ub"])
        # {t = x2, x1 = 0}: one tangent direction is null
        emb = Embedding(ptable, ["ua", "0", "ua", "ub"], 4,
                        domain=[(-1, 1), (-1, 1)], grid_shape=(4, 4))
        first, spacelike = induced_metric(b.field, emb, [0.3, 0.1])
        assert not spacelike
        assert np.linalg.eigvalsh(first)[0] == pytest.approx(0.0, abs=1e-12)


class TestShape:
    def test_affine_plane_totally_geodesic(self, bundles):
        b = bundles["minkowski"]
        ii = shape_tensor(b.field, b.submanifolds["plane"], [0.2, -0.4])
        assert np.abs(ii).max() < 1e-12

    def test_torus_sub_totally_geodesic(self, bundles):
        b = bundles["torus_quotient"]
        ii = shape_tensor(b.field, b.submanifolds["S"], [0.3, 0.9])
        assert np.abs(ii).max() < 1e-12

    def test_sphere_in_flat_slice(self, bundles):
        """Classical shape of the round sphere: II_ab = -(m_ab / R) d_r."""
        b = bundles["minkowski"]
        emb = b.submanifolds["sphere"]          # R = 1
        u = [0.9, 0.7]
        ii = shape_tensor(b.field, emb, u)
        first, _ = induced_metric(b.field, emb, u)
        x = emb.point(u)
        radial = np.array([0.0, x[1], x[2], x[3]])
        for a in range(2):
            for c in range(2):
                assert np.allclose(ii[a, c], -first[a, c] * radial, atol=1e-10)

    def test_shape_symmetry_and_fd_oracle(self, bundles):
        """II against finite differences of the embedding map."""
        b = bundles["schwarzschild_ef"]
        emb = b.submanifolds["far_sphere"]
        u = np.array([1.0, 0.8])
        ii = shape_tensor(b.field, emb, u)
        assert np.abs(ii - np.transpose(ii, (1, 0, 2))).max() < 1e-9
        # oracle: second differences of x(u) plus the connection term
        from lorentzkit.geometry import curvature_data
        x, jac, _ = emb.first_second(u)
        data = curvature_data(b.field, x)
        hess_fd = np.stack([fd_scalar_jet(lambda q: emb.point(q)[i], u)[2]
                            for i in range(4)])
        acc = np.einsum("iab->abi", hess_fd) + \
            np.einsum("kij,ia,jb->abk", data.gamma, jac, jac)
        first = jac.T @ data.g @ jac
        expect = np.zeros_like(ii)
        for a in range(2):
            for c in range(2):
                v = acc[a, c]
                coeff = np.linalg.solve(first, jac.T @ data.g @ v)
                expect[a, c] = v - jac @ coeff
        assert np.abs(ii - expect).max() < 1e-5 * (1 + np.abs(expect).max())

    def test_not_spacelike_raises(self, bundles):
        b = bundles["minkowski"]
        ptable = SymbolTable(["ua", "ub"])
        emb = Embedding(ptable, ["2*ua", "ua", "ub", "0"], 4,
                        domain=[(-1, 1), (-1, 1)], grid_shape=(4, 4))
        with pytest.raises(NotSpacelike):
            shape_tensor(b.field, emb, [0.1, 0.1])


class TestMeanCurvature:
    def test_torus_sub_extremal(self, bundles):
        b = bundles["torus_quotient"]
        mc = mean_curvature(b.field, b.orientation, b.submanifolds["S"], [0.4, 0.6])
        assert np.abs(mc.h_vec).max() < 1e-12

    def test_sphere_in_flat_slice(self, bundles):
        b = bundles["minkowski"]
        u = [1.2, 0.5]
        mc = mean_curvature(b.field, b.orientation, b.submanifolds["sphere"], u)
        x = mc.point
        expected = -2.0 * np.array([0.0, x[1], x[2], x[3]])  # -(2/R) d_r, R = 1
        assert np.allclose(mc.h_vec, expected, atol=1e-9)
        assert mc.g_hh == pytest.approx(4.0, rel=1e-9)
        assert mc.causal.kind == "spacelike"

    def test_trapped_ef_sphere(self, bundles):
        b, emb, _ = _ef_sphere(bundles, "inner_sphere")
        mc = mean_curvature(b.field, b.orientation, emb, [1.0, 0.3])
        r = 1.5
        assert mc.g_hh == pytest.approx(4 * (1 - 2 / r) / r ** 2, rel=1e-9)
        assert mc.g_hh < 0 and mc.g_hx > 0
        assert mc.causal.kind == "timelike" and mc.causal.orientation == "past"

    def test_orthogonality_diagnostic(self, bundles):
        b, emb, _ = _ef_sphere(bundles, "far_sphere")
        mc = mean_curvature(b.field, b.orientation, emb, [0.7, 1.1])
        assert mc.tangency_defect < 1e-8

    def test_trace_presentations_agree(self, bundles):
        """Gram-solve trace equals the orthonormal-frame sum of II."""
        b, emb, _ = _ef_sphere(bundles, "outer_sphere")
        u = [0.9, 1.4]
        mc = mean_curvature(b.field, b.orientation, emb, u)
        ii = shape_tensor(b.field, emb, u)
        first, _ = induced_metric(b.field, emb, u)
        lam, q = np.linalg.eigh(first)
        frame = q / np.sqrt(lam)               # orthonormal tangent frame coeffs
        h_sum = sum(np.einsum("a,b,abi->i", frame[:, k], frame[:, k], ii)
                    for k in range(2))
        assert np.allclose(mc.h_vec, h_sum, atol=1e-9 * (1 + np.abs(h_sum).max()))

    def test_parametrization_invariance(self, bundles):
        """Linear reparametrization leaves H unchanged."""
        b = bundles["minkowski"]
        ptable = SymbolTable(["ua", "ub"])
        emb1 = Embedding(ptable, ["0", "sin(ua)*cos(ub)", "sin(ua)*sin(ub)",
                                  "cos(ua)"], 4,
                         domain=[(0.3, math.pi - 0.3), (0.0, 2 * math.pi)],
                         periodic=[None, 2 * math.pi], grid_shape=(6, 6))
        # u -> A u with A = [[2, 0], [1, 1]]
        emb2 = Embedding(ptable, ["0", "sin(2*ua)*cos(ua + ub)",
                                  "sin(2*ua)*sin(ua + ub)", "cos(2*ua)"], 4,
                         domain=[(0.2, 1.4), (0.0, 2 * math.pi)],
                         periodic=[None, 2 * math.pi], grid_shape=(6, 6))
        u1 = np.array([0.8, 0.5])
        mc1 = mean_curvature(b.field, b.orientation, emb1, [2 * 0.8, 0.8 + 0.5])
        mc2 = mean_curvature(b.field, b.orientation, emb2, u1)
        assert np.allclose(mc1.point, mc2.point, atol=1e-12)
        assert np.allclose(mc1.h_vec, mc2.h_vec, atol=1e-8)

    def test_continuity_under_uniform_rescaling(self, bundles):
        """|H(g_eps) - H(g)| = O(eps) for g_eps = (1 + eps) g."""
        from lorentzkit.fields import ExprScalarField
        from lorentzkit.metric import ConformalScaledMetric
        b, emb, _ = _ef_sphere(bundles, "outer_sphere")
        u = [1.1, 0.2]
        base = mean_curvature(b.field, b.orientation, emb, u)
        eps = 1e-4
        factor = ExprScalarField(repr(0.5 * math.log1p(eps)), b.field.table,
                                 b.field.params)
        g_eps = ConformalScaledMetric(b.field, factor, 1.0)
        pert = mean_curvature(g_eps, b.orientation, emb, u)
        diff = np.linalg.norm(pert.h_vec - base.h_vec)
        assert diff <= 10.0 * eps * (1 + np.linalg.norm(base.h_vec))


class TestNullData:
    def test_minkowski_sphere_untrapped_signs(self, bundles):
        b = bundles["minkowski"]
        frame, tp, tm = null_frame_and_expansions(
            b.field, b.orientation, b.submanifolds["sphere"], [0.8, 0.2],
            b.hints["sphere"])
        assert tp > 0 > tm
        # flat-space oracle up to the K normalization: theta_pm = pm sqrt(2) / R
        assert tp == pytest.approx(math.sqrt(2.0), rel=1e-9)
        assert tm == pytest.approx(-math.sqrt(2.0), rel=1e-9)

    def test_frame_invariants(self, bundles):
        b, emb, hint = _ef_sphere(bundles, "outer_sphere")
        g = b.field
        u = [0.5, 2.2]
        frame, tp, tm = null_frame_and_expansions(g, b.orientation, emb, u, hint)
        x = emb.point(u)
        mv = g.metric_value(x)
        assert abs(mv.inner(frame.k_plus, frame.k_plus)) < 1e-10
        assert abs(mv.inner(frame.k_minus, frame.k_minus)) < 1e-10
        assert mv.inner(frame.k_plus, frame.k_minus) == pytest.approx(-1.0, abs=1e-10)
        xv = b.orientation.value(x)
        assert mv.inner(frame.k_plus, xv) < 0
        assert mv.inner(frame.k_minus, xv) < 0
        _, jac, _ = emb.first_second(u)
        assert np.abs(jac.T @ mv.g @ frame.k_plus).max() < 1e-8

    def test_mots_at_horizon(self, bundles):
        b, emb, hint = _ef_sphere(bundles, "horizon_sphere")
        _, tp, tm = null_frame_and_expansions(b.field, b.orientation, emb,
                                              [0.9, 1.0], hint)
        assert abs(tp) < 1e-7
        assert tm < 0

    def test_trapped_inside(self, bundles):
        b, emb, hint = _ef_sphere(bundles, "inner_sphere")
        _, tp, tm = null_frame_and_expansions(b.field, b.orientation, emb,
                                              [1.3, 0.4], hint)
        assert tp < 0 and tm < 0

    def test_theta_h_relation(self, bundles):
        """g(H, H) = -2 theta_+ theta_- with the K+.K- = -1 normalization."""
        for name in ("inner_sphere", "horizon_sphere", "outer_sphere"):
            b, emb, hint = _ef_sphere(bundles, name)
            u = [0.6, 1.7]
            _, tp, tm = null_frame_and_expansions(b.field, b.orientation,
                                                  emb, u, hint)
            mc = mean_curvature(b.field, b.orientation, emb, u)
            assert mc.g_hh == pytest.approx(-2 * tp * tm, rel=1e-8, abs=1e-10)

    def test_rescaling_covariance_of_signs(self, bundles):
        """theta signs and verdicts survive K+ -> lam K+, K- -> K-/lam."""
        b, emb, hint = _ef_sphere(bundles, "inner_sphere")
        u = [0.4, 0.9]
        frame, tp, tm = null_frame_and_expansions(b.field, b.orientation,
                                                  emb, u, hint)
        mc = mean_curvature(b.field, b.orientation, emb, u)
        mv = b.field.metric_value(emb.point(u))
        for lam in (0.3, 2.0, 11.0):
            kp, km = lam * frame.k_plus, frame.k_minus / lam
            assert mv.inner(kp, km) == pytest.approx(-1.0, abs=1e-9)
            tps = -mv.inner(mc.h_vec, kp)
            tms = -mv.inner(mc.h_vec, km)
            assert tps == pytest.approx(lam * tp, rel=1e-12)
            assert tms == pytest.approx(tm / lam, rel=1e-12)
            assert np.sign(tps) == np.sign(tp)
            assert np.sign(tms) == np.sign(tm)

    def test_wrong_codimension(self, bundles):
        b = bundles["torus_quotient"]
        with pytest.raises(WrongCodimension):
            null_frame_and_expansions(b.field, b.orientation,
                                      b.submanifolds["Pi"], [0.1, 0.1, 0.1],
                                      np.array([0, 1.0, 0, 0]))

    def test_degenerate_hint_rejected(self, bundles):
        """A hint that cannot separate the two rays must fail loudly."""
        from lorentzkit.errors import OrientationHintDegenerate
        b = bundles["minkowski"]
        with pytest.raises(OrientationHintDegenerate):
            null_frame_and_expansions(b.field, b.orientation,
                                      b.submanifolds["sphere"], [0.8, 0.2],
                                      np.array([1.0, 0.0, 0.0, 0.0]))


class TestClassify:
    def test_torus_sub_extremal(self, bundles):
        b = bundles["torus_quotient"]
        v = classify_trapped(b.field, b.orientation, b.submanifolds["S"],
                             b.hints["S"])
        assert v.class_name == "weakly-future-trapped"
        assert v.subtype == "extremal"
        assert v.closed

    def test_ef_sphere_classes(self, bundles):
        b = bundles["schwarzschild_ef"]
        expect = {"inner_sphere": ("future-trapped", None),
                  "horizon_sphere": ("weakly-future-trapped", "MOTS"),
                  "outer_sphere": ("not-weakly-trapped", None)}
        for name, (cls, sub) in expect.items():
            v = classify_trapped(b.field, b.orientation, b.submanifolds[name],
                                 b.hints[name])
            assert v.class_name == cls
            assert v.subtype == sub

    def test_minkowski_sphere_witness(self, bundles):
        b = bundles["minkowski"]
        v = classify_trapped(b.field, b.orientation, b.submanifolds["sphere"],
                             b.hints["sphere"])
        assert v.class_name == "not-weakly-trapped"
        assert v.witness_index is not None
        assert v.witness_index == (0, 0)        # deterministic first witness

    def test_null_h_sheet(self, bundles):
        b = bundles["null_H_demo"]
        v = classify_trapped(b.field, b.orientation, b.submanifolds["sheet"],
                             b.hints["sheet"])
        assert v.class_name == "weakly-future-trapped"
        assert v.subtype == "null-H"
        assert not v.closed

    def test_not_spacelike_witness(self, bundles):
        b = bundles["minkowski"]
        ptable = SymbolTable(["ua", "ub"])
        emb = Embedding(ptable, ["2*ua", "ua", "ub", "0"], 4,
                        domain=[(-1, 1), (-1, 1)], grid_shape=(4, 4))
        with pytest.raises(NotSpacelike):
            classify_trapped(b.field, b.orientation, emb, None)
