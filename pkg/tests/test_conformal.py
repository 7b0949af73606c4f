"""Closed-form conformal laws against the rescaled-metric wrapper oracle.

The wrapper (rescale + direct geometry) is ground truth; every closed form
must reproduce it. These tests are what pin the sign conventions.
"""

import math

import numpy as np
import pytest

from lorentzkit.conformal import (conformal_mean_curvature, conformal_riemann,
                                  connection_delta, rescale)
from lorentzkit.fields import ExprScalarField
from lorentzkit.geometry import (TangentVector, causal_class, christoffel,
                                 curvature_data, signature)
from lorentzkit.perturb import BumpField
from lorentzkit.submanifold import mean_curvature

from conftest import CATALOG_NAMES, region_points


def _random_bump(bundle, rng):
    box = bundle.default_box
    center = np.array([lo + (hi - lo) * rng.random() for lo, hi in box])
    rho = 0.1 + 0.15 * rng.random()
    bd = bundle.field.boundary_distance(center)
    if np.isfinite(bd):
        rho = min(rho, 0.5 * bd)
    dphi = rng.normal(size=bundle.field.dim)
    v0 = 0.3 * rng.normal()
    return BumpField(bundle.field, center, v0, dphi, rho)


class TestRescale:
    def test_zero_factor_is_identity(self, bundles):
        b = bundles["schwarzschild_ef"]
        f = ExprScalarField("0", b.field.table, b.field.params)
        wrapped = rescale(b.field, f)
        for p in region_points(b, 5, seed=1):
            assert np.allclose(wrapped.value(p), b.field.value(p), atol=0.0)

    def test_wrapper_components_exact(self, bundles):
        b = bundles["flrw_dust"]
        f = ExprScalarField("0.1*x - 0.2*y", b.field.table)
        wrapped = rescale(b.field, f, scale=0.5)
        for p in region_points(b, 20, seed=2):
            fac = math.exp(2 * 0.5 * f.value(p))
            assert np.allclose(wrapped.value(p), fac * b.field.value(p),
                               rtol=1e-12, atol=0.0)

    def test_signature_preserved(self, bundles):
        rng = np.random.default_rng(6)
        for name in ("minkowski", "schwarzschild_ef", "desitter"):
            b = bundles[name]
            bump = _random_bump(b, rng)
            wrapped = rescale(b.field, bump)
            for p in region_points(b, 20, seed=7):
                assert signature(wrapped, p) == 1

    def test_causal_class_invariance(self, bundles):
        b = bundles["schwarzschild_ef"]
        rng = np.random.default_rng(8)
        bump = _random_bump(b, rng)
        wrapped = rescale(b.field, bump)
        for p in region_points(b, 10, seed=9):
            for _ in range(5):
                v = TangentVector(p, rng.normal(size=4))
                a = causal_class(b.field, v, b.orientation)
                c = causal_class(wrapped, v, b.orientation)
                assert a.kind == c.kind and a.orientation == c.orientation


class TestConnectionDelta:
    def test_zero_factor(self, bundles):
        b = bundles["minkowski"]
        f = ExprScalarField("0", b.field.table)
        d = connection_delta(b.field, f, np.zeros(4), [1, 0, 0, 0], [1, 0, 0, 0])
        assert np.abs(d).max() == 0.0

    def test_hand_value_on_minkowski(self, bundles):
        """f = x1, X = Y = d_t at origin: correction is +d_1."""
        b = bundles["minkowski"]
        f = ExprScalarField("x1", b.field.table)
        d = connection_delta(b.field, f, np.zeros(4),
                             [1, 0, 0, 0], [1, 0, 0, 0])
        assert np.allclose(d, [0.0, 1.0, 0.0, 0.0], atol=1e-14)

    @pytest.mark.parametrize("name", CATALOG_NAMES)
    def test_against_wrapper_christoffel(self, bundles, name):
        """Gamma-hat minus Gamma contracted with X, Y equals the closed form."""
        b = bundles[name]
        rng = np.random.default_rng(sum(map(ord, name)))
        bump = _random_bump(b, rng)
        wrapped = rescale(b.field, bump)
        for p in region_points(b, 3, seed=13):
            x = rng.normal(size=b.field.dim)
            y = rng.normal(size=b.field.dim)
            gam0 = christoffel(b.field, p).components
            gam1 = christoffel(wrapped, p).components
            direct = np.einsum("kij,i,j->k", gam1 - gam0, x, y)
            closed = connection_delta(b.field, bump, p, x, y)
            assert np.allclose(direct, closed,
                               atol=1e-8 * (1 + np.abs(direct).max()))


class TestConformalMeanCurvature:
    def test_zero_factor(self, bundles):
        b = bundles["minkowski"]
        f = ExprScalarField("0", b.field.table)
        h_hat, norm_sq = conformal_mean_curvature(
            b.field, b.orientation, b.submanifolds["sphere"], f, [1.0, 0.5])
        mc = mean_curvature(b.field, b.orientation, b.submanifolds["sphere"],
                            [1.0, 0.5])
        assert np.allclose(h_hat, mc.h_vec, atol=1e-12)
        assert norm_sq == pytest.approx(mc.g_hh, rel=1e-12)

    def test_extremal_case_spacelike_gradient(self, bundles):
        """H = 0: the norm reduces to m^2 g((grad f)^perp, (grad f)^perp)."""
        b = bundles["torus_quotient"]
        emb = b.submanifolds["S"]
        u0 = [0.0, 0.0]
        p = emb.point(u0)
        # gradient along x1: normal to S and spacelike
        bump = BumpField(b.field, p, 0.0, np.array([0.0, 1.0, 0, 0]), 0.25)
        h_hat, norm_sq = conformal_mean_curvature(
            b.field, b.orientation, emb, bump, u0)
        m = emb.m
        assert norm_sq == pytest.approx(m * m * 1.0, rel=1e-12)
        assert norm_sq > 0

    @pytest.mark.parametrize("name", ["minkowski", "torus_quotient",
                                      "schwarzschild_ef", "flrw_dust",
                                      "desitter", "null_H_demo"])
    def test_against_wrapper_recomputation(self, bundles, name):
        b = bundles[name]
        sub_name = sorted(b.submanifolds)[0]
        emb = b.submanifolds[sub_name]
        rng = np.random.default_rng(77 + len(name))
        for _ in range(3):
            u = np.array([lo + (hi - lo) * rng.random()
                          for lo, hi in emb.domain])
            center = emb.point(u) + 0.05 * rng.normal(size=b.field.dim)
            bump = BumpField(b.field, center, 0.2 * rng.normal(),
                             rng.normal(size=b.field.dim), 0.2)
            h_hat, norm_sq = conformal_mean_curvature(
                b.field, b.orientation, emb, bump, u)
            direct = mean_curvature(rescale(b.field, bump), b.orientation,
                                    emb, u)
            assert np.allclose(h_hat, direct.h_vec,
                               atol=1e-7 * (1 + np.abs(direct.h_vec).max()))
            assert norm_sq == pytest.approx(direct.g_hh, rel=1e-7, abs=1e-9)


class TestConformalRiemann:
    def test_zero_factor(self, bundles):
        b = bundles["schwarzschild_static"]
        f = ExprScalarField("0", b.field.table, b.field.params)
        p = np.array([0.0, 5.0, math.pi / 2, 0.3])
        r_hat = conformal_riemann(b.field, f, p).components
        assert np.allclose(r_hat, curvature_data(b.field, p).riem, atol=1e-12)

    def test_quadratic_factor_on_minkowski(self, bundles):
        b = bundles["minkowski"]
        f = ExprScalarField("x1^2", b.field.table)
        for n in (1, 3):
            r_cf = conformal_riemann(b.field, f, np.zeros(4), scale=1.0 / n)
            r_wr = curvature_data(rescale(b.field, f, 1.0 / n),
                                  np.zeros(4)).riem
            assert np.abs(r_cf.components - r_wr).max() < 1e-8

    @pytest.mark.parametrize("name", CATALOG_NAMES)
    def test_against_wrapper(self, bundles, name):
        b = bundles[name]
        rng = np.random.default_rng(101 + len(name))
        for p in region_points(b, 3, seed=31):
            bump = _random_bump(b, rng)
            r_cf = conformal_riemann(b.field, bump, p).components
            r_wr = curvature_data(rescale(b.field, bump), p).riem
            scale = 1.0 + np.abs(r_wr).max()
            assert np.abs(r_cf - r_wr).max() <= 1e-7 * scale

    def test_output_has_curvature_symmetries(self, bundles):
        b = bundles["flrw_dust"]
        rng = np.random.default_rng(55)
        bump = _random_bump(b, rng)
        for p in region_points(b, 4, seed=56):
            r = conformal_riemann(b.field, bump, p).components
            scale = np.abs(r).max() + 1e-30
            assert np.abs(r + np.transpose(r, (0, 1, 3, 2))).max() <= 1e-8 * scale
            assert np.abs(r + np.transpose(r, (1, 0, 2, 3))).max() <= 1e-8 * scale
            assert np.abs(r - np.transpose(r, (2, 3, 0, 1))).max() <= 1e-8 * scale
            bianchi = (r + np.transpose(r, (0, 2, 3, 1))
                       + np.transpose(r, (0, 3, 1, 2)))
            assert np.abs(bianchi).max() <= 1e-8 * scale
