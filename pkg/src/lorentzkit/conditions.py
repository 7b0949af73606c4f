"""Region-level checkers for curvature and causality classes.

The classes of interest quantify over every causal direction at every point;
the honest numerical analogue implemented here samples a compact region,
scans the causal shell {v causal, |v|_h = 1} at each sampled point (dense
directions plus projected local descent from the best candidates), and
reports explicit margins. Verdicts are always "certified on samples", never
"proved".

Margins per condition, for an h-unit causal v:

  ricci   Ric(v, v)
  riem    min over h-unit w h-orthogonal to v of Riem(w, v, v, w)
          (collinear parts of w contribute nothing by the symmetries);
          timelike-only mode restricts v to the timelike shell and w to the
          g-orthogonal complement of v
  tidal   min eigenvalue of the screen-space operator of v

Verdicts: holds-strictly (min > tau), holds-weakly (|min| <= tau or min in
the weak band), violated (min < -tau), with a witness for violations.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NotApplicable, OrientationError, ParamError
from .fields import ScalarField, VectorField
from .geodesics import geodesic, parallel_transport
from .geometry import (DEFAULT_TOLS, CurvatureData, Tolerances,
                       curvature_data, g_orthonormalize_spacelike,
                       h_orthonormal_complement)
from .metric import MetricField
from .submanifold import Embedding
from .tensors import MetricValue, invert_metric


@dataclass(frozen=True)
class Region:
    """Where and how densely to sample a condition."""

    box: tuple[tuple[float, float], ...] | None = None
    points: tuple[tuple[float, ...], ...] | None = None
    n_points: int = 40
    n_dirs: int = 16
    seed: int = 0
    refine_iters: int = 20
    restarts: int = 5

    def __post_init__(self):
        if self.box is None and self.points is None:
            raise ParamError("region needs a box or an explicit point list")
        if self.box is not None:
            for lo, hi in self.box:
                if not lo < hi:
                    raise ParamError(f"empty box interval ({lo}, {hi})")
        if self.n_dirs < 8:
            raise ParamError("causal-shell density must be at least 8")

    def sample_points(self) -> np.ndarray:
        if self.points is not None:
            return np.asarray(self.points, dtype=float)
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return lo + (hi - lo) * rng.random((self.n_points, len(self.box)))


@dataclass
class ConditionReport:
    condition: str
    verdict: str                     # 'holds-strictly' | 'holds-weakly' | 'violated'
    margin: float
    samples: int
    witness: dict | None
    tolerances: dict
    extra: dict = dc_field(default_factory=dict)

    @property
    def satisfied_weakly(self) -> bool:
        return self.verdict in ("holds-strictly", "holds-weakly")

    @property
    def satisfied_strictly(self) -> bool:
        return self.verdict == "holds-strictly"

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "margin": self.margin,
            "samples": self.samples,
            "witness": self.witness,
            "tolerances": self.tolerances,
            **self.extra,
        }


# --- causal shell machinery ------------------------------------------------------


def _lorentz_frame_of(data: CurvatureData) -> np.ndarray:
    lam, q = np.linalg.eigh(data.g)
    if int(np.sum(lam < 0)) != 1:
        raise OrientationError(f"metric index is {np.sum(lam < 0)}, need 1")
    return q / np.sqrt(np.abs(lam))


def _shell_vector(frame: np.ndarray, alpha: float, omega: np.ndarray,
                  sign: float) -> np.ndarray:
    v = frame[:, 0] + alpha * (frame[:, 1:] @ omega)
    v = sign * v
    return v / np.linalg.norm(v)


def _direction_params(rng, n: int, n_dirs: int, timelike_only: bool):
    """Deterministic pattern of (alpha, omega, sign) shell parameters."""
    out = []
    for k in range(n_dirs):
        if timelike_only:
            alpha = 0.0 if k == 0 else float(rng.random()) * 0.95
        elif k == 0:
            alpha = 0.0
        elif k % 2 == 1:
            alpha = 1.0                      # null shell
        else:
            alpha = float(np.sqrt(rng.random()))
        omega = rng.normal(size=n - 1)
        omega = omega / np.linalg.norm(omega)
        sign = 1.0 if (k % 4) < 2 else -1.0
        out.append((alpha, omega, sign))
    return out


def _margin_ricci(data: CurvatureData, v: np.ndarray):
    return data.ric_quad(v), None


def _margin_riem(data: CurvatureData, v: np.ndarray):
    basis = h_orthonormal_complement(v[None, :])
    m = basis.T @ data.riem_bilinear(v) @ basis
    lam, vecs = np.linalg.eigh(0.5 * (m + m.T))
    return float(lam[0]), basis @ vecs[:, 0]


def _margin_riem_gperp(data: CurvatureData, v: np.ndarray):
    basis = h_orthonormal_complement((data.g @ v)[None, :])
    m = basis.T @ data.riem_bilinear(v) @ basis
    lam, vecs = np.linalg.eigh(0.5 * (m + m.T))
    return float(lam[0]), basis @ vecs[:, 0]


def _margin_tidal(data: CurvatureData, v: np.ndarray,
                  tols: Tolerances = DEFAULT_TOLS):
    mv = MetricValue(data.g, data.g_inv, 1, 1.0)
    q = data.inner(v, v)
    if q < -tols.tau_c:
        rows = (data.g @ v)[None, :]
    else:
        rows = np.vstack([data.g @ v, v])
    comp = h_orthonormal_complement(rows)
    screen = g_orthonormalize_spacelike(mv, comp)
    m = screen.T @ data.riem_bilinear(v) @ screen
    lam, vecs = np.linalg.eigh(0.5 * (m + m.T))
    return float(lam[0]), screen @ vecs[:, 0]


def _scan_point(data: CurvatureData, margin_fn, rng, n_dirs: int,
                refine_iters: int, restarts: int, timelike_only: bool):
    """Dense shell sampling plus projected descent from the best candidates."""
    frame = _lorentz_frame_of(data)
    n = data.dim
    cands = []
    for alpha, omega, sign in _direction_params(rng, n, n_dirs, timelike_only):
        v = _shell_vector(frame, alpha, omega, sign)
        val, w = margin_fn(data, v)
        cands.append((val, alpha, omega, sign, v, w))
    cands.sort(key=lambda c: c[0])
    best = cands[0]

    amax = 0.95 if timelike_only else 1.0
    for val, alpha, omega, sign, _v, _w in cands[:restarts]:
        step = 0.15
        cur = (val, alpha, omega.copy())
        for _ in range(refine_iters):
            val0, alpha0, omega0 = cur
            # finite-difference gradient on the shell parameters
            ga = (margin_fn(data, _shell_vector(
                frame, min(alpha0 + 1e-4, amax), omega0, sign))[0]
                - margin_fn(data, _shell_vector(
                    frame, max(alpha0 - 1e-4, 0.0), omega0, sign))[0]) / 2e-4
            gw = np.zeros(n - 1)
            for i in range(n - 1):
                do = np.zeros(n - 1)
                do[i] = 1e-4
                op = (omega0 + do) / np.linalg.norm(omega0 + do)
                om = (omega0 - do) / np.linalg.norm(omega0 - do)
                gw[i] = (margin_fn(data, _shell_vector(frame, alpha0, op, sign))[0]
                         - margin_fn(data, _shell_vector(frame, alpha0, om, sign))[0]) / 2e-4
            alpha1 = float(np.clip(alpha0 - step * ga, 0.0, amax))
            omega1 = omega0 - step * gw
            omega1 = omega1 / np.linalg.norm(omega1)
            val1 = margin_fn(data, _shell_vector(frame, alpha1, omega1, sign))[0]
            if val1 < val0:
                cur = (val1, alpha1, omega1)
            else:
                step *= 0.5
        if cur[0] < best[0]:
            v = _shell_vector(frame, cur[1], cur[2], sign)
            val, w = margin_fn(data, v)
            best = (val, cur[1], cur[2], sign, v, w)
    return best


def _verdict(margin: float, tau: float) -> str:
    if margin > tau:
        return "holds-strictly"
    if margin >= -tau:
        return "holds-weakly"
    return "violated"


def _run_condition(field_: MetricField, region: Region, margin_fn,
                   name: str, tols: Tolerances, timelike_only: bool = False,
                   jobs: int = 1, extra: dict | None = None) -> ConditionReport:
    pts = region.sample_points()
    seeds = np.random.SeedSequence(region.seed).spawn(len(pts))

    def work(i):
        data = curvature_data(field_, pts[i])
        rng = np.random.default_rng(seeds[i])
        return _scan_point(data, margin_fn, rng, region.n_dirs,
                           region.refine_iters, region.restarts, timelike_only)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(work, range(len(pts))))
    else:
        results = [work(i) for i in range(len(pts))]

    best_i = min(range(len(pts)), key=lambda i: results[i][0])
    val, _a, _o, _s, v, w = results[best_i]
    witness = None
    if val < tols.tau_cond:
        witness = {"point": [float(x) for x in pts[best_i]],
                   "v": [float(x) for x in v]}
        if w is not None:
            witness["w"] = [float(x) for x in w]
    return ConditionReport(
        condition=name, verdict=_verdict(val, tols.tau_cond),
        margin=float(val), samples=len(pts) * region.n_dirs,
        witness=witness, tolerances=tols.as_dict(),
        extra=extra or {})


def ricci_condition(field_: MetricField, region: Region, strict: bool = False,
                    tols: Tolerances = DEFAULT_TOLS, jobs: int = 1) -> ConditionReport:
    """Minimum of Ric(v, v) over the sampled causal shell (sets SE / E)."""
    return _run_condition(field_, region, _margin_ricci,
                          "ricci-causal" + ("-strict" if strict else ""),
                          tols, jobs=jobs)


def riem_condition(field_: MetricField, region: Region, strict: bool = False,
                   timelike_only: bool = False,
                   tols: Tolerances = DEFAULT_TOLS, jobs: int = 1) -> ConditionReport:
    """Minimum of Riem(w, v, v, w) over the shell (sets P / FP).

    timelike_only restricts v to the timelike shell with w g-orthogonal to v
    (the equivalent characterization of the weak class).
    """
    fn = _margin_riem_gperp if timelike_only else _margin_riem
    name = "riemann-causal" + ("-timelike-only" if timelike_only else "") \
        + ("-strict" if strict else "")
    return _run_condition(field_, region, fn, name, tols,
                          timelike_only=timelike_only, jobs=jobs,
                          extra={"timelike_only": timelike_only})


def tidal_condition(field_: MetricField, region: Region,
                    tols: Tolerances = DEFAULT_TOLS, jobs: int = 1) -> ConditionReport:
    """Minimum tidal-operator eigenvalue over the sampled shell (set O)."""
    def fn(data, v):
        return _margin_tidal(data, v, tols)
    return _run_condition(field_, region, fn, "tidal-psd", tols, jobs=jobs)


# --- inclusion audit --------------------------------------------------------------


def inclusion_audit(field_: MetricField, region: Region,
                    tols: Tolerances = DEFAULT_TOLS, jobs: int = 1) -> dict:
    """Check the theorem-backed implication lattice on shared samples.

    For every sampled (point, v) the margins of all conditions are computed
    on the identical vector and the implications

        P > 0   =>  SE > 0          P > 0    =>  O > -tau
        O >= 0  =>  FP >= -10 tau   FP >= 0  =>  E >= -10 tau

    are asserted with their premises gated so that each line is a pointwise
    theorem for the sampled vector: the O => FP line applies to timelike v
    only, because for null v the screen quotient omits directions with an
    ell-component, where Riem(w, v, v, w) can dip negative even though every
    screen value vanishes. Any reported violation indicates a toolkit bug
    (the inclusions are theorems).
    """
    pts = region.sample_points()
    seeds = np.random.SeedSequence(region.seed).spawn(len(pts))
    tau = tols.tau_cond
    violations = []
    total = 0

    def work(i):
        data = curvature_data(field_, pts[i])
        rng = np.random.default_rng(seeds[i])
        frame = _lorentz_frame_of(data)
        rows = []
        for alpha, omega, sign in _direction_params(rng, data.dim,
                                                    region.n_dirs, False):
            v = _shell_vector(frame, alpha, omega, sign)
            timelike = data.inner(v, v) < -tols.tau_c
            p_m = _margin_riem(data, v)[0]
            se_m = _margin_ricci(data, v)[0]
            o_m = _margin_tidal(data, v, tols)[0]
            rows.append((v, timelike, p_m, se_m, o_m))
        return rows

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            all_rows = list(ex.map(work, range(len(pts))))
    else:
        all_rows = [work(i) for i in range(len(pts))]

    for i, rows in enumerate(all_rows):
        for v, timelike, p_m, se_m, o_m in rows:
            total += 1
            fp_m, e_m = p_m, se_m
            checks = [
                ("P=>SE", p_m > tau, se_m > 0.0),
                ("P=>O", p_m > tau, o_m > -tau),
                ("O=>FP", timelike and o_m >= 0.0, fp_m >= -10 * tau),
                ("FP=>E", fp_m >= 0.0, e_m >= -10 * tau),
            ]
            for label, premise, conclusion in checks:
                if premise and not conclusion:
                    violations.append({
                        "implication": label,
                        "point": [float(x) for x in pts[i]],
                        "v": [float(x) for x in v],
                        "margins": {"P": p_m, "SE": se_m, "O": o_m},
                    })
    return {
        "condition": "inclusion-audit",
        "verdict": "consistent" if not violations else "violations",
        "samples": total,
        "violations": violations,
        "tolerances": tols.as_dict(),
    }


# --- trace condition along normal geodesics ------------------------------------------


def gs_trace(field_: MetricField, emb: Embedding, u0, direction,
             length: float, tols: Tolerances = DEFAULT_TOLS,
             n_samples: int = 200) -> dict:
    """Trace g^{ab} Riem(gamma', E_a, E_b, gamma') along a normal geodesic.

    gamma starts on the submanifold with the given future causal normal
    velocity; E_a are the parallel-transported coordinate tangents, whose
    Gram matrix g_ab stays constant along the curve. Returns the sampled
    minimum and the first parameter where the trace dips below -tau_cond.
    """
    u0 = np.asarray(u0, dtype=float)
    direction = np.asarray(direction, dtype=float)
    x0, jac, _ = emb.first_second(u0)
    g0 = field_.value(x0)
    tangency = np.max(np.abs(jac.T @ g0 @ direction))
    scale = np.linalg.norm(direction) * np.max(np.abs(jac))
    if tangency > 1e-6 * max(scale, 1.0):
        raise NotApplicable(
            f"direction is not g-normal to the submanifold (defect {tangency:.3e})")
    q = float(direction @ g0 @ direction)
    if q > tols.tau_c * float(direction @ direction):
        raise NotApplicable("direction must be causal (timelike or null)")

    sol = geodesic(field_, x0, direction, length, tols)
    transport = parallel_transport(field_, sol, jac, tols)
    gram = jac.T @ g0 @ jac
    gram_inv = np.linalg.inv(0.5 * (gram + gram.T))

    traces = []
    first_negative = None
    for s, x, xdot in sol.samples(n_samples):
        frame = transport.evaluate(s)
        data = curvature_data(field_, x)
        tr = float(np.einsum("ab,ijkl,i,ja,kb,l->", gram_inv, data.riem,
                             xdot, frame, frame, xdot))
        traces.append((s, tr))
        if first_negative is None and tr < -tols.tau_cond:
            first_negative = {"s": s, "trace": tr,
                              "point": [float(c) for c in x]}
    values = np.array([t for _, t in traces])
    i_min = int(np.argmin(values))
    return {
        "condition": "trace-along-normal-geodesic",
        "min_trace": float(values[i_min]),
        "max_abs_trace": float(np.abs(values).max()),
        "argmin_s": float(traces[i_min][0]),
        "first_negative": first_negative,
        "samples": len(traces),
        "chart_exit": sol.chart_exit,
        "length_reached": sol.t_reached,
        "gram_constant_drift": transport.product_drift,
        "tolerances": tols.as_dict(),
    }


# --- causality certificates ------------------------------------------------------------


def temporal_certificate(field_: MetricField, subject: VectorField | ScalarField,
                         mode: str, region: Region,
                         tols: Tolerances = DEFAULT_TOLS) -> dict:
    """Sufficient causal-structure certificates on sampled points.

    mode='orientation': the given vector field is timelike everywhere sampled
    (so it time-orients the metric); failure is definite for this field.
    mode='temporal': the given scalar has timelike gradient everywhere
    sampled, certifying stable causality; failure is only INCONCLUSIVE
    (the criterion is sufficient, not necessary).
    """
    pts = region.sample_points()
    worst = None
    for p in pts:
        g = field_.value(p)
        if mode == "orientation":
            x = subject.value(field_.canonicalize(p))
            q = float(x @ g @ x) / float(x @ x)
        elif mode == "temporal":
            g_inv, _ = invert_metric(g)
            dt = subject.jet2(field_.canonicalize(p)).grad
            nrm = float(dt @ dt)
            if nrm < tols.tau_zero:
                q = 0.0
            else:
                q = float(dt @ g_inv @ dt) / nrm
        else:
            raise ParamError(f"unknown certificate mode {mode!r}")
        if worst is None or q > worst[0]:
            worst = (q, p)
    passed = worst[0] < -tols.tau_c
    if passed:
        verdict = "PASSED"
    else:
        verdict = "FAILED" if mode == "orientation" else "INCONCLUSIVE"
    return {
        "condition": f"certificate-{mode}",
        "verdict": verdict,
        "worst_normalized_square": float(worst[0]),
        "witness": None if passed else {"point": [float(x) for x in worst[1]]},
        "samples": len(pts),
        "note": ("sufficient criterion only; failure does not decide "
                 "the property") if mode == "temporal" else "",
        "tolerances": tols.as_dict(),
    }
