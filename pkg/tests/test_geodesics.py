import math

import numpy as np
import pytest

from lorentzkit.geodesics import geodesic, parallel_transport
from lorentzkit.geometry import Tolerances

from conftest import CATALOG_NAMES, region_points


class TestGeodesic:
    def test_minkowski_straight_line(self, bundles):
        f = bundles["minkowski"].field
        p = np.array([0.1, -0.2, 0.3, 0.0])
        v = np.array([1.0, 0.5, -0.25, 0.0])
        sol = geodesic(f, p, v, 3.0)
        for s in (0.0, 1.1, 2.7, 3.0):
            x, xd = sol.evaluate(s)
            assert np.allclose(x, p + s * v, atol=1e-9)
            assert np.allclose(xd, v, atol=1e-9)

    def test_sphere_equator_reaches_antipode(self, sphere_metric):
        """Great-circle oracle: arc pi*a lands on the antipodal point."""
        a = 2.0
        start = np.array([math.pi / 2, 0.3])
        v = np.array([0.0, 1.0 / a])          # unit speed along the equator
        sol = geodesic(sphere_metric, start, v, math.pi * a)
        end, _ = sol.evaluate(sol.t_reached)
        assert end[0] == pytest.approx(math.pi / 2, abs=1e-6)
        assert end[1] == pytest.approx(0.3 + math.pi, abs=1e-6)

    def test_schwarzschild_photon_sphere(self, bundles):
        """Tangential null ray at r = 3M stays on the photon sphere."""
        b = bundles["schwarzschild_static"]
        r0 = 3.0
        p = np.array([0.0, r0, math.pi / 2, 0.0])
        g = b.field.value(p)
        # null: -f tdot^2 + r^2 phidot^2 = 0
        phidot = 1.0
        tdot = math.sqrt(r0 ** 2 * phidot ** 2 / (1 - 2.0 / r0))
        v = np.array([tdot, 0.0, 0.0, phidot])
        assert abs(v @ g @ v) < 1e-12
        span = 2 * math.pi / phidot            # one revolution in phi
        sol = geodesic(b.field, p, v, span)
        radii = [x[1] for _, x, _ in sol.samples(60)]
        assert max(abs(r - r0) for r in radii) < 1e-5

    def test_norm_conservation_budget(self, bundles):
        tols = Tolerances()
        for name in CATALOG_NAMES:
            b = bundles[name]
            p = region_points(b, 1, seed=17)[0]
            v = np.array([1.0] + [0.1] * (b.field.dim - 1))
            sol = geodesic(b.field, p, v, 0.5)
            q0 = float(v @ b.field.value(p) @ v)
            assert sol.norm_drift <= tols.eps_geo * (1 + abs(q0))

    def test_chart_exit(self, bundles):
        """Ingoing null ray in the EF chart leaves through the r floor."""
        f = bundles["schwarzschild_ef"].field
        sol = geodesic(f, np.array([0.0, 1.0, math.pi / 2, 0.0]),
                       np.array([0.0, -1.0, 0.0, 0.0]), 5.0)
        assert sol.chart_exit
        assert sol.t_reached < 5.0
        x, _ = sol.evaluate(sol.t_reached)
        assert x[1] == pytest.approx(1e-3, abs=1e-6)

    def test_unwrapped_and_canonical_points(self, bundles):
        b = bundles["torus_quotient"]
        sol = geodesic(b.field, np.zeros(4), np.array([1.0, 0.7, 0, 0]), 3.0)
        raw = sol.point(3.0)
        canon = sol.point(3.0, canonical=True)
        assert raw[1] == pytest.approx(2.1, abs=1e-9)       # covering chart
        assert canon[1] == pytest.approx(0.1, abs=1e-9)     # wrapped


class TestParallelTransport:
    def test_minkowski_constant(self, bundles):
        f = bundles["minkowski"].field
        sol = geodesic(f, np.zeros(4), np.array([1.0, 0.2, 0, 0]), 2.0)
        tr = parallel_transport(f, sol, np.array([0.3, 1.0, -2.0, 0.5]))
        assert np.allclose(tr.evaluate(2.0).ravel(), [0.3, 1.0, -2.0, 0.5],
                           atol=1e-9)

    @pytest.mark.parametrize("name", ["schwarzschild_ef", "flrw_dust", "desitter"])
    def test_gram_matrix_constant(self, bundles, name):
        """All pairwise inner products of a transported frame stay put."""
        b = bundles[name]
        p = region_points(b, 1, seed=29)[0]
        v = np.array([1.0, 0.05, 0.02, 0.0])
        sol = geodesic(b.field, p, v, 0.8)
        w0 = np.eye(4)[:, 1:3]
        tr = parallel_transport(b.field, sol, w0)
        assert tr.product_drift < 1e-7

    def test_sphere_triangle_holonomy(self, sphere_metric):
        """Transport around three quarter great circles rotates by pi/2.

        The triangle is a rotated octant (three mutually orthogonal
        vertices), tilted so no leg comes near a chart pole.
        """
        a = 2.0
        quarter = math.pi * a / 2.0
        beta = 0.7
        verts = [np.array([math.cos(beta), 0.0, -math.sin(beta)]),
                 np.array([0.0, 1.0, 0.0]),
                 np.array([math.sin(beta), 0.0, math.cos(beta)])]

        def to_chart(unit_vec):
            return np.array([math.acos(unit_vec[2]),
                             math.atan2(unit_vec[1], unit_vec[0])])

        def chart_velocity(chart_pt, ambient_dir):
            th, ph = chart_pt
            j = a * np.array([
                [math.cos(th) * math.cos(ph), -math.sin(th) * math.sin(ph)],
                [math.cos(th) * math.sin(ph), math.sin(th) * math.cos(ph)],
                [-math.sin(th), 0.0]])
            sol, *_ = np.linalg.lstsq(j, ambient_dir, rcond=None)
            return sol

        w = None
        pt = to_chart(verts[0])
        for k in range(3):
            cur, nxt = verts[k], verts[(k + 1) % 3]
            tangent = nxt - float(nxt @ cur) * cur
            tangent /= np.linalg.norm(tangent)
            v = chart_velocity(pt, tangent)     # unit ambient speed
            leg = geodesic(sphere_metric, pt, v, quarter)
            if w is None:
                w = v.copy()                     # transport the leg-1 velocity
            w = parallel_transport(sphere_metric, leg, w).evaluate(
                leg.t_reached).ravel()
            pt, _ = leg.evaluate(leg.t_reached)
        assert np.allclose(pt, to_chart(verts[0]), atol=1e-6)

        # measure the angle of the returned vector against the starting one
        g = sphere_metric.value(pt)
        v0 = chart_velocity(pt, (verts[1] - float(verts[1] @ verts[0]) * verts[0])
                            / np.linalg.norm(verts[1] - float(verts[1] @ verts[0]) * verts[0]))
        cosang = float(w @ g @ v0) / (
            math.sqrt(float(w @ g @ w)) * math.sqrt(float(v0 @ g @ v0)))
        angle = math.acos(np.clip(cosang, -1.0, 1.0))
        assert abs(angle - math.pi / 2) < 1e-5
