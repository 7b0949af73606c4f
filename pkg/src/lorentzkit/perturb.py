"""Compactly supported conformal perturbation families with certificates.

Two constructions are provided, both of the form g_n = e^{2 phi / n} g with a
compactly supported phi built from a C^2 bump:

* trapped_exit_family: at a marked point of a weakly-future-trapped
  submanifold where the strict inequalities fail (mean curvature null
  past-directed, or zero), a bump with prescribed gradient makes
  ghat(Hhat, Hhat) > 0, so the perturbed metric is no longer weakly trapped.

* positivity_exit_family: at a point with a causal v and non-collinear w
  where Riem(w, v, v, w) = 0, a bump-extended function of the normal
  coordinates makes Riem(g_n)(w, v, v, w) < 0, so the perturbed metric
  leaves the weak curvature-positivity class.

Every certificate is computed twice (closed-form transformation law and
direct recomputation on the rescaled metric) and recorded next to the
literature's printed closed form; where the two disagree the measured value
is authoritative and the deviation is logged, never patched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NotApplicable, NotCausal, RadiusError, SupportNotContained
from .expr import SymbolTable, parse
from .fields import ScalarField
from .geometry import (DEFAULT_TOLS, TangentVector, Tolerances, causal_class,
                       curvature_data, h_orthonormal_complement)
from .jets import Jet2
from .metric import ConformalScaledMetric, MetricField
from .normal import NormalChart, orthonormal_frame_from
from .conformal import conformal_mean_curvature, conformal_riemann, rescale
from .submanifold import Embedding, mean_curvature
from .tensors import MetricValue


DEFAULT_RHO = 0.25


# --- C^2 cutoff -----------------------------------------------------------------

def _cutoff_jet(u: Jet2) -> Jet2:
    """chi(u): 1 on [0, 1/4], quintic C^2 ramp on [1/4, 1], 0 beyond.

    The ramp is the unique quintic with value/slope/curvature matching at
    both ends, so all jets are exact and the field is C^2 everywhere.
    """
    if u.value <= 0.25:
        return Jet2.constant(1.0, u.dim)
    if u.value >= 1.0:
        return Jet2.constant(0.0, u.dim)
    z = (u.value - 0.25) / 0.75
    s = z ** 3 * (10.0 - 15.0 * z + 6.0 * z * z)
    ds = 30.0 * z ** 2 * (1.0 - z) ** 2
    d2s = 60.0 * z * (1.0 - 3.0 * z + 2.0 * z * z)
    # chain through z = (u - 1/4) / (3/4)
    c = 1.0 / 0.75
    return u._compose(1.0 - s, -ds * c, -d2s * c * c)


class BumpField(ScalarField):
    """Affine core times a radial C^2 cutoff, exactly zero outside radius rho.

    field(x) = (v0 + dphi . (x - p)) * chi(|x - p|^2 / rho^2)

    The cutoff is identically 1 within rho/2 of the center, so the prescribed
    value and gradient at p are exact. Periodic chart coordinates are wrapped
    to the nearest image, making the bump well defined on quotient charts.
    """

    def __init__(self, chart_field: MetricField, p, value: float,
                 dphi, rho: float | None = None):
        self.dim = chart_field.dim
        self.center = np.asarray(p, dtype=float)
        self.v0 = float(value)
        self.dphi = np.asarray(dphi, dtype=float)
        self.periods = chart_field.periods
        bd = chart_field.boundary_distance(self.center)
        if rho is None:
            # small default amplitude keeps e^{2 phi/n} in its linear regime,
            # so family seminorms decay like 1/n already from n = 1
            rho = min(DEFAULT_RHO, bd / 4.0) if np.isfinite(bd) else DEFAULT_RHO
        if rho <= 0:
            raise RadiusError("bump radius must be positive")
        if np.isfinite(bd) and bd < rho:
            raise RadiusError(
                f"center is {bd:.3g} from the chart boundary, radius {rho:.3g} "
                "does not fit")
        self.rho = float(rho)

    def _delta(self, q) -> np.ndarray:
        d = np.asarray(q, dtype=float) - self.center
        for i, per in enumerate(self.periods):
            if per is not None:
                d[i] = (d[i] + per / 2.0) % per - per / 2.0
        return d

    def jet2(self, q) -> Jet2:
        n = self.dim
        d = self._delta(q)
        r2 = float(d @ d)
        if r2 >= self.rho ** 2:
            return Jet2.constant(0.0, n)
        u = Jet2(r2 / self.rho ** 2, 2.0 * d / self.rho ** 2,
                 2.0 * np.eye(n) / self.rho ** 2)
        chi = _cutoff_jet(u)
        core = Jet2(self.v0 + float(self.dphi @ d), self.dphi.copy(),
                    np.zeros((n, n)))
        return core * chi

    def support_box(self) -> list[tuple[float, float]]:
        return [(float(c - self.rho), float(c + self.rho)) for c in self.center]


class NormalCoordBump(ScalarField):
    """core(x(q)) * chi(|x(q)|^2 / rho^2) for normal coordinates x = chart^-1.

    Exact jets on affine charts and at the chart center; finite-difference
    jets of the Newton inverse elsewhere (slow, diagnostics only).
    """

    def __init__(self, chart: NormalChart, core_text: str, rho: float):
        self.chart = chart
        self.dim = chart.field.dim
        n = self.dim
        self.coord_table = SymbolTable([f"n{k}" for k in range(n)])
        self.core = parse(core_text, self.coord_table)
        self.core_text = core_text
        if rho <= 0:
            raise RadiusError("bump radius must be positive")
        self.rho = float(rho)

    def jet2(self, q) -> Jet2:
        n = self.dim
        q = np.asarray(q, dtype=float)
        x = self.chart.inverse(q)
        r2 = float(x @ x)
        if r2 >= self.rho ** 2:
            return Jet2.constant(0.0, n)
        seeds = self.chart.coord_jets(q)
        core = self.core.eval2(seeds, {}, n)
        u = seeds[0] * seeds[0]
        for k in range(1, n):
            u = u + seeds[k] * seeds[k]
        chi = _cutoff_jet(u * (1.0 / self.rho ** 2))
        return core * chi

    def support_box(self) -> list[tuple[float, float]]:
        # image of the normal-coordinate ball under the (affine) chart map
        spans = self.rho * np.linalg.norm(self.chart.frame, axis=1)
        return [(float(c - s), float(c + s))
                for c, s in zip(self.chart.p, spans)]


def bump(chart_field: MetricField, p, value: float, dphi,
         rho: float | None = None) -> BumpField:
    """Bump with prescribed value and coordinate gradient dphi at p.

    To prescribe a gradient *vector* v (grad_g phi = v), pass dphi = g(p) v.
    """
    return BumpField(chart_field, p, value, dphi, rho)


# --- C^s seminorms -----------------------------------------------------------------


def _seminorm_orders(g1: MetricField, g2: MetricField,
                     box, grid_per_axis: int) -> tuple[float, float, float]:
    n = g1.dim
    axes = [np.linspace(lo, hi, grid_per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
    m0 = m1 = m2 = 0.0
    for p in pts:
        a_g, a_d, a_h = g1.component_jets(p, order=2)
        b_g, b_d, b_h = g2.component_jets(p, order=2)
        m0 = max(m0, float(np.max(np.abs(a_g - b_g))))
        m1 = max(m1, float(np.max(np.abs(a_d - b_d))))
        m2 = max(m2, float(np.max(np.abs(a_h - b_h))))
    return m0, m1, m2


def cs_seminorm(g1: MetricField, g2: MetricField, s: int,
                box, grid_per_axis: int = 7,
                support_box=None) -> float:
    """sup over a grid of K of |d^alpha (g1 - g2)_ij| for |alpha| <= s.

    Derivatives come from jets (s <= 2). When the perturbation support is
    known, pass support_box; a SupportNotContained warning fires if K does
    not cover it (the sup over K then underestimates the sup over M).
    """
    if s not in (0, 1, 2):
        raise ValueError("s must be 0, 1 or 2")
    if support_box is not None:
        for (klo, khi), (slo, shi) in zip(box, support_box):
            if slo < klo or shi > khi:
                warnings.warn("seminorm box does not contain the perturbation "
                              "support", SupportNotContained)
                break
    m0, m1, m2 = _seminorm_orders(g1, g2, box, grid_per_axis)
    return max((m0, m1, m2)[: s + 1])


# --- families ------------------------------------------------------------------------


@dataclass
class Certificate:
    n: int
    value_direct: float          # recomputed on the rescaled metric
    value_closed_form: float     # via the transformation law
    printed_value: float         # the literature's closed form, for comparison
    printed_form: str
    sign_expected: int           # +1 or -1
    agreement: float             # |direct - closed| / (1 + |direct|)

    @property
    def sign_ok(self) -> bool:
        return bool(np.sign(self.value_direct) == self.sign_expected)

    @property
    def deviation(self) -> float:
        return self.value_direct - self.printed_value

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "certificate": self.value_direct,
            "closed_form": self.value_closed_form,
            "printed": self.printed_value,
            "printed_form": self.printed_form,
            "deviation": self.deviation,
            "sign_ok": self.sign_ok,
        }


@dataclass
class PerturbationFamily:
    """g_n = e^{2 phi / n} g with per-n certificates and seminorms."""

    base: MetricField
    phi: ScalarField
    kind: str                    # 'trapped-exit' | 'positivity-exit'
    case: str
    point: np.ndarray
    n_max: int
    certificates: list[Certificate]
    seminorms: list[dict]        # per n: {n, c0, c1, c2}
    detail: dict = dc_field(default_factory=dict)

    def member(self, n: int) -> ConformalScaledMetric:
        return rescale(self.base, self.phi, 1.0 / n)

    def scaling_exponent(self) -> float:
        """Log-log slope of |certificate| against n."""
        ns = np.array([c.n for c in self.certificates], dtype=float)
        vals = np.array([abs(c.value_direct) for c in self.certificates])
        if np.any(vals <= 0):
            return float("nan")
        return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])

    def seminorm_slope(self, order: int = 2) -> float:
        key = f"c{order}"
        ns = np.array([row["n"] for row in self.seminorms], dtype=float)
        vals = np.array([row[key] for row in self.seminorms])
        if len(ns) < 2 or np.any(vals <= 0):
            return float("nan")
        return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "case": self.case,
            "point": [float(v) for v in self.point],
            "n_max": self.n_max,
            "certificates": [c.as_dict() for c in self.certificates],
            "seminorms": self.seminorms,
            "certificate_scaling_exponent": self.scaling_exponent(),
            "seminorm_slope_c2": self.seminorm_slope(2),
            "detail": self.detail,
        }


def _seminorm_rows(base: MetricField, phi: ScalarField, n_max: int,
                   support_box, grid_per_axis: int = 7) -> list[dict]:
    pad = [(lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo))
           for lo, hi in support_box]
    rows = []
    for n in range(1, n_max + 1):
        g_n = rescale(base, phi, 1.0 / n)
        m0, m1, m2 = _seminorm_orders(base, g_n, pad, grid_per_axis)
        rows.append({"n": n, "c0": m0, "c1": max(m0, m1),
                     "c2": max(m0, m1, m2)})
    return rows


def _spacelike_unit_normal(field_: MetricField, emb: Embedding, u0,
                           mv: MetricValue) -> np.ndarray:
    _, jac, _ = emb.first_second(u0)
    normal = h_orthonormal_complement((mv.g @ jac).T)
    b = normal.T @ mv.g @ normal
    lam, q = np.linalg.eigh(0.5 * (b + b.T))
    if lam[-1] <= 0:
        raise NotApplicable("normal space has no spacelike direction")
    v = normal @ q[:, -1]
    return v / np.linalg.norm(v)


def _past_null_normals(field_: MetricField, X, emb: Embedding, u0,
                       mv: MetricValue) -> list[np.ndarray]:
    _, jac, _ = emb.first_second(u0)
    normal = h_orthonormal_complement((mv.g @ jac).T)
    b = normal.T @ mv.g @ normal
    lam, q = np.linalg.eigh(0.5 * (b + b.T))
    if not lam[0] < 0 < lam[-1]:
        raise NotApplicable("normal space is not Lorentzian")
    tdir = normal @ (q[:, 0] / np.sqrt(-lam[0]))
    out = []
    x0 = emb.point(u0)
    xv = X.value(x0) if hasattr(X, "value") else np.asarray(X, dtype=float)
    for k in range(1, normal.shape[1]):
        sdir = normal @ (q[:, k] / np.sqrt(lam[k]))
        for s in (+1.0, -1.0):
            ray = tdir + s * sdir
            if mv.inner(ray, xv) < 0:      # future; flip to past
                ray = -ray
            out.append(ray / np.linalg.norm(ray))
    return out


def trapped_exit_family(field_: MetricField, X, emb: Embedding, u0,
                        n_max: int = 8, rho: float | None = None,
                        tols: Tolerances = DEFAULT_TOLS,
                        seminorm_grid: int = 7) -> PerturbationFamily:
    """Family certifying exit from the weakly-trapped class at Sigma(u0).

    Requires the mean curvature at the marked point to be either zero or
    past-directed null (the boundary cases of weak trappedness); raises
    NotApplicable otherwise. The bump gradient is the case's prescribed
    normal vector v, and each certificate asserts ghat(Hhat, Hhat) > 0.
    """
    u0 = np.asarray(u0, dtype=float)
    mc = mean_curvature(field_, X, emb, u0, tols)
    p = mc.point
    mv = MetricValue.from_matrix(field_.value(p))
    m = emb.m
    hn = float(np.linalg.norm(mc.h_vec))
    tau = tols.tau_trap

    if hn > tau and mc.g_hh < -tau and mc.g_hx > tau:
        raise NotApplicable("strict trapped inequalities already hold at u0")
    if mc.g_hh > tau or mc.g_hx < -tau:
        raise NotApplicable("not weakly trapped at u0")

    if hn <= tau:
        case = "zero-H"
        v = _spacelike_unit_normal(field_, emb, u0, mv)
        printed_form = "m^2/n * exp(-2 phi_n(p)) * g(v,v)"
    else:
        case = "null-H"
        if emb.codim < 2:
            raise NotApplicable("null case needs codimension >= 2")
        hdir = mc.h_vec / hn
        candidates = _past_null_normals(field_, X, emb, u0, mv)
        v = None
        for cand in candidates:
            # reject the ray collinear with H
            if np.linalg.norm(cand - float(cand @ hdir) * hdir) > 1e-6:
                v = cand
                break
        if v is None:
            raise NotApplicable("no past null normal independent of H found")
        printed_form = "-2m/n * exp(2 phi_n(p)) * g(H,v)"

    phi = bump(field_, p, 0.0, mv.g @ v, rho)
    g_hv = mv.inner(mc.h_vec, v)
    g_vv = mv.inner(v, v)

    certificates = []
    for n in range(1, n_max + 1):
        scale = 1.0 / n
        _, closed = conformal_mean_curvature(field_, X, emb, phi, u0,
                                             scale=scale, tols=tols)
        direct = mean_curvature(rescale(field_, phi, scale), X, emb, u0,
                                tols).g_hh
        # phi(p) = 0 by construction, so the exp factors in the printed
        # forms are exactly 1 whichever sign the exponent carries
        if case == "zero-H":
            printed = (m * m / n) * g_vv
        else:
            printed = -(2.0 * m / n) * g_hv
        agreement = abs(direct - closed) / (1.0 + abs(direct))
        certificates.append(Certificate(
            n=n, value_direct=float(direct), value_closed_form=float(closed),
            printed_value=float(printed), printed_form=printed_form,
            sign_expected=+1, agreement=float(agreement)))

    seminorms = _seminorm_rows(field_, phi, n_max, phi.support_box(),
                               seminorm_grid)
    return PerturbationFamily(
        base=field_, phi=phi, kind="trapped-exit", case=case, point=p,
        n_max=n_max, certificates=certificates, seminorms=seminorms,
        detail={
            "v": [float(a) for a in v],
            "g_hh_at_p": mc.g_hh,
            "g_hx_at_p": mc.g_hx,
            "g_hv": g_hv,
            "bump_radius": phi.rho,
            "sigma_dim": m,
        })


def find_degenerate_witness(field_: MetricField, p, tols: Tolerances = DEFAULT_TOLS,
                            seed: int = 0, samples: int = 512):
    """Search a causal (v, w) pair with Riem(w, v, v, w) = 0 at p."""
    data = curvature_data(field_, p)
    mv = MetricValue.from_matrix(data.g)
    lam, q = np.linalg.eigh(mv.g)
    frame = q / np.sqrt(np.abs(lam))
    rng = np.random.default_rng(seed)
    n = field_.dim
    best = None
    for _ in range(samples):
        alpha = rng.random()
        omega = rng.normal(size=n - 1)
        omega /= np.linalg.norm(omega)
        v = frame[:, 0] + alpha * (frame[:, 1:] @ omega)
        w = rng.normal(size=n)
        w -= (w @ v) / (v @ v) * v
        val = abs(data.riem_quad(w / np.linalg.norm(w), v / np.linalg.norm(v)))
        if best is None or val < best[0]:
            best = (val, v, w)
    if best[0] > tols.tau_cond:
        raise NotApplicable(
            f"no degenerate causal pair found (best |Riem| = {best[0]:.3e})")
    return best[1], best[2]


def positivity_exit_family(field_: MetricField, p, v, w,
                           n_max: int = 8, rho: float | None = None,
                           tols: Tolerances = DEFAULT_TOLS,
                           seminorm_grid: int = 7) -> PerturbationFamily:
    """Family certifying exit from weak curvature positivity at p.

    The witness (v, w) must be causal-v, non-collinear-w with
    Riem(w, v, v, w) = 0; the construction aligns a normal chart with v,
    builds the case's function of the normal coordinates (bump-extended),
    and certifies Riem(g_n)(w, v, v, w) < 0 for every n.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    data = curvature_data(field_, p)
    mv = MetricValue.from_matrix(data.g)
    cls = causal_class(field_, TangentVector(p, v), None, tols)
    if cls.kind not in ("timelike", "null"):
        raise NotCausal(f"witness v must be causal, got {cls.kind}")
    q0 = data.riem_quad(w / np.linalg.norm(w), v / np.linalg.norm(v))
    if abs(q0) > tols.tau_cond:
        raise NotApplicable(
            f"Riem(w,v,v,w) = {q0:.3e} at p is not degenerate")

    n = field_.dim
    if cls.kind == "timelike":
        case = "timelike"
        vhat = v / np.sqrt(-mv.inner(v, v))
        w_perp = w + mv.inner(w, vhat) * vhat
        wg = mv.inner(w_perp, w_perp)
        if wg <= tols.tau_zero:
            raise NotApplicable("w is collinear with v")
        w_used = w_perp / np.sqrt(wg)
        frame = orthonormal_frame_from(field_, p, first=vhat, second=w_used)
        v_used = vhat
        core = "exp(n0)"
        printed_form = "-exp(2/n)/n"
    else:
        # split v = e0 + e1 against a unit timelike leg; ell = e0 - e1
        lam, qe = np.linalg.eigh(mv.g)
        t0 = qe[:, 0] / np.sqrt(-lam[0])
        gvt = mv.inner(v, t0)
        if gvt > 0:
            t0 = -t0
            gvt = -gvt
        v_used = v / (-gvt)                 # now g(v_used, t0) = -1
        s = v_used - t0                     # unit spacelike, orthogonal to t0
        ell = t0 - s
        b = -mv.inner(w, v_used) / 2.0
        a = -mv.inner(w, ell) / 2.0
        u_res = w - a * v_used - b * ell
        # drop the v-component (contributes nothing by the symmetries)
        w_used = b * ell + u_res
        if np.linalg.norm(u_res) <= 1e-9 * np.linalg.norm(w):
            if abs(b) <= tols.tau_zero:
                raise NotApplicable("w is collinear with v")
            case = "null-null"
            w_used = ell
            core = "n0^2"
            printed_form = "-8/n"
        else:
            case = "null-spacelike"
            core = "(n0 + n1)^2"
            printed_form = "-4/n * g(w,w)"
        frame = orthonormal_frame_from(field_, p, first=t0, second=s)

    chart = NormalChart(field_, p, frame, tols=tols)
    bd = field_.boundary_distance(p)
    if rho is None:
        rho = min(DEFAULT_RHO, bd / 4.0) if np.isfinite(bd) else DEFAULT_RHO
        rho = min(rho, chart.radius)
    phi = NormalCoordBump(chart, core, rho)

    wg_used = mv.inner(w_used, w_used)
    certificates = []
    for k in range(1, n_max + 1):
        scale = 1.0 / k
        riem_cf = conformal_riemann(field_, phi, p, scale=scale).components
        closed = float(np.einsum("ijkl,i,j,k,l->", riem_cf,
                                 w_used, v_used, v_used, w_used))
        direct = curvature_data(rescale(field_, phi, scale), p).riem_quad(
            w_used, v_used)
        if case == "timelike":
            printed = -np.exp(2.0 / k) / k
        elif case == "null-null":
            printed = -8.0 / k
        else:
            printed = -4.0 * wg_used / k
        agreement = abs(direct - closed) / (1.0 + abs(direct))
        certificates.append(Certificate(
            n=k, value_direct=float(direct), value_closed_form=float(closed),
            printed_value=float(printed), printed_form=printed_form,
            sign_expected=-1, agreement=float(agreement)))

    if chart.affine:
        seminorms = _seminorm_rows(field_, phi, n_max, phi.support_box(),
                                   seminorm_grid)
    else:
        seminorms = []        # off-center jets of curved charts are FD-only
    return PerturbationFamily(
        base=field_, phi=phi, kind="positivity-exit", case=case, point=p,
        n_max=n_max, certificates=certificates, seminorms=seminorms,
        detail={
            "v_used": [float(a) for a in v_used],
            "w_used": [float(a) for a in w_used],
            "g_ww_used": wg_used,
            "core": core,
            "bump_radius": phi.rho,
            "chart_affine": chart.affine,
        })
