"""Metric-level differential geometry.

Curvature conventions (fixed once, validated by the test suite):

    Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    Rup^i_jkl  = d_k Gamma^i_lj - d_l Gamma^i_kj
                 + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj
    R[i,j,k,l] = -g_im Rup^m_jkl
    Ric[j,k]   = g^{il} R[i,j,k,l]

With these choices Riem(w,v,v,w) := R[ijkl] w^i v^j v^k w^l is the sectional
curvature for orthonormal pairs (round sphere > 0), constant-curvature c
spaces satisfy Riem(w,v,v,w) = c (g(w,w) g(v,v) - g(v,w)^2), and an expanding
vacuum with Hubble rate H has Ric = 3 H^2 g while dust satisfies
Ric(v,v) > 0 on causal vectors. Signature is (-, +, ..., +): index 1, and a
causal v is future-directed iff g(v, X) < 0 for the future timelike X.

The auxiliary Riemannian metric h used for all normalizations is the
Euclidean metric of the chart coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotCausal, OrientationError
from .fields import VectorField
from .metric import MetricField
from .tensors import LOWER, UPPER, MetricValue, TensorValue, invert_metric


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds; user-overridable everywhere they matter."""

    tau_zero: float = 1e-12    # below this (h-norm) a vector counts as zero
    tau_c: float = 1e-9        # causal-type classification band
    eps_geo: float = 1e-8      # geodesic / transport conservation budget
    tau_cond: float = 1e-8     # strict-vs-weak band for condition margins
    tau_trap: float = 1e-9     # trapped-classification margin

    def as_dict(self) -> dict:
        return {
            "tau_zero": self.tau_zero,
            "tau_c": self.tau_c,
            "eps_geo": self.eps_geo,
            "tau_cond": self.tau_cond,
            "tau_trap": self.tau_trap,
        }


DEFAULT_TOLS = Tolerances()


@dataclass(frozen=True)
class TangentVector:
    point: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "components",
                           np.asarray(self.components, dtype=float))
        if self.point.shape != self.components.shape:
            raise ValueError("point / component dimensions differ")


@dataclass(frozen=True)
class CausalClass:
    kind: str          # 'timelike' | 'null' | 'spacelike' | 'zero'
    orientation: str   # 'future' | 'past' | 'none'
    g_vv: float

    def __str__(self):
        if self.orientation == "none":
            return self.kind
        return f"{self.kind}, {self.orientation}-directed"


# --- pointwise curvature ------------------------------------------------------


@dataclass(frozen=True)
class CurvatureData:
    """Everything curvature-related at one point, computed in one pass."""

    point: np.ndarray
    g: np.ndarray          # (n, n)
    g_inv: np.ndarray
    gamma: np.ndarray      # (k, i, j) = Gamma^k_ij
    riem: np.ndarray       # (i, j, k, l), fully covariant, convention above
    ric: np.ndarray        # (j, k)
    index: int

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def inner(self, v, w) -> float:
        return float(np.asarray(v) @ self.g @ np.asarray(w))

    def riem_quad(self, w, v) -> float:
        """Riem(w, v, v, w)."""
        return float(np.einsum("ijkl,i,j,k,l->", self.riem, w, v, v, w))

    def riem_bilinear(self, v) -> np.ndarray:
        """Matrix M[i, l] = Riem(e_i, v, v, e_l); symmetric by the pair symmetry."""
        m = np.einsum("ijkl,j,k->il", self.riem, v, v)
        return 0.5 * (m + m.T)

    def ric_quad(self, v) -> float:
        return float(np.asarray(v) @ self.ric @ np.asarray(v))

    def scalar(self) -> float:
        return float(np.einsum("jk,jk->", self.g_inv, self.ric))

    def kretschmann(self) -> float:
        r_up = np.einsum("ai,bj,ck,dl,ijkl->abcd",
                         self.g_inv, self.g_inv, self.g_inv, self.g_inv,
                         self.riem)
        return float(np.einsum("abcd,abcd->", r_up, self.riem))


def christoffel_from_jets(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    d = dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0))
    return 0.5 * np.einsum("kl,ijl->kij", g_inv, d)


def curvature_data(field_: MetricField, p) -> CurvatureData:
    p = np.asarray(p, dtype=float)
    g, dg, d2g = field_.component_jets(p, order=2)
    g_inv, _ = invert_metric(g)
    gamma = christoffel_from_jets(g_inv, dg)

    # d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
    dginv = -np.einsum("ka,mab,bl->mkl", g_inv, dg, g_inv)
    # D[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij and its derivative
    d_sym = dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0))
    dd_sym = (d2g + np.transpose(d2g, (0, 2, 1, 3))
              - np.transpose(d2g, (0, 2, 3, 1)))
    # dGamma[m, k, i, j] = d_m Gamma^k_ij
    dgamma = 0.5 * (np.einsum("mkl,ijl->mkij", dginv, d_sym)
                    + np.einsum("kl,mijl->mkij", g_inv, dd_sym))

    rup = (np.einsum("kilj->ijkl", dgamma)
           - np.einsum("likj->ijkl", dgamma)
           + np.einsum("ikm,mlj->ijkl", gamma, gamma)
           - np.einsum("ilm,mkj->ijkl", gamma, gamma))
    riem = -np.einsum("im,mjkl->ijkl", g, rup)
    ric = np.einsum("il,ijkl->jk", g_inv, riem)
    ric = 0.5 * (ric + ric.T)
    index = int(np.sum(np.linalg.eigvalsh(g) < 0.0))
    return CurvatureData(point=p, g=g, g_inv=g_inv, gamma=gamma,
                         riem=riem, ric=ric, index=index)


def signature(field_: MetricField, p) -> int:
    """Number of negative eigenvalues of g(p); Lorentzian iff 1."""
    return field_.metric_value(p).index


def christoffel(field_: MetricField, p) -> TensorValue:
    g, dg, _ = field_.component_jets(p, order=1)
    g_inv, _ = invert_metric(g)
    return TensorValue(christoffel_from_jets(g_inv, dg), (UPPER, LOWER, LOWER))


def riemann(field_: MetricField, p) -> TensorValue:
    return TensorValue(curvature_data(field_, p).riem,
                       (LOWER, LOWER, LOWER, LOWER))


def ricci(field_: MetricField, p) -> TensorValue:
    return TensorValue(curvature_data(field_, p).ric, (LOWER, LOWER))


# --- causal classification ----------------------------------------------------


def _orientation_field_value(X, p) -> np.ndarray:
    if isinstance(X, VectorField):
        return X.value(p)
    return np.asarray(X, dtype=float)


def causal_class(field_: MetricField, v: TangentVector,
                 X: VectorField | np.ndarray | None = None,
                 tols: Tolerances = DEFAULT_TOLS) -> CausalClass:
    """Classify v at its base point; orient causal vectors against X."""
    mv = field_.metric_value(v.point)
    h2 = float(v.components @ v.components)
    if np.sqrt(h2) < tols.tau_zero:
        return CausalClass("zero", "none", 0.0)
    q = mv.inner(v.components, v.components)
    band = tols.tau_c * h2
    if q < -band:
        kind = "timelike"
    elif q > band:
        kind = "spacelike"
    else:
        kind = "null"
    orientation = "none"
    if kind in ("timelike", "null") and X is not None:
        xv = _orientation_field_value(X, v.point)
        gxx = mv.inner(xv, xv)
        if gxx >= -tols.tau_c * float(xv @ xv):
            raise OrientationError(
                f"orientation field not timelike at {v.point.tolist()} "
                f"(g(X,X) = {gxx:.3e})")
        orientation = "future" if mv.inner(v.components, xv) < 0.0 else "past"
    return CausalClass(kind, orientation, q)


# --- frames ---------------------------------------------------------------------


def lorentz_frame(mv: MetricValue) -> np.ndarray:
    """Columns f_0 (timelike), f_1..f_{n-1} (spacelike) with g(f_i,f_j) = eta_ij."""
    if mv.index != 1:
        raise OrientationError(f"metric index is {mv.index}, need 1")
    lam, q = np.linalg.eigh(mv.g)
    order = np.argsort(lam)           # the single negative eigenvalue first
    lam, q = lam[order], q[:, order]
    return q / np.sqrt(np.abs(lam))


def h_orthonormal_complement(vectors: np.ndarray) -> np.ndarray:
    """Euclidean-orthonormal basis of the orthogonal complement of given rows."""
    a = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = a.shape[1]
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > 1e-13 * (s[0] if s.size else 1.0)))
    return vt[rank:].T                # columns span the complement


def g_orthonormalize_spacelike(mv: MetricValue, basis: np.ndarray) -> np.ndarray:
    """g-orthonormalize columns spanning a subspace on which g is PD."""
    gram = basis.T @ mv.g @ basis
    lam, q = np.linalg.eigh(gram)
    if lam[0] <= 0:
        raise NotCausal("subspace is not g-positive definite")
    return basis @ (q / np.sqrt(lam))


# --- tidal operators -------------------------------------------------------------


@dataclass(frozen=True)
class TidalOperator:
    """Screen-space matrix of w -> Riem(w, v, v, .) along a causal v."""

    vector: TangentVector
    kind: str                  # 'timelike' | 'null'
    screen: np.ndarray         # columns: the screen basis (g-orthonormal)
    matrix: np.ndarray
    eigenvalues: np.ndarray = field(default=None)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def tidal(field_: MetricField, v: TangentVector,
          tols: Tolerances = DEFAULT_TOLS) -> TidalOperator:
    """Tidal operator of a causal v.

    Timelike v is normalized to a unit vector and the screen is its
    g-orthogonal complement. For null v the screen realizes the quotient
    v^perp / <v> as the subspace of v^perp that is also h-orthogonal to v.
    """
    data = curvature_data(field_, v.point)
    mv = MetricValue.from_matrix(data.g)
    cls = causal_class(field_, v, None, tols)
    if cls.kind in ("spacelike", "zero"):
        raise NotCausal(f"tidal operator needs a causal vector, got {cls.kind}")
    vc = v.components
    if cls.kind == "timelike":
        vhat = vc / np.sqrt(-mv.inner(vc, vc))
        comp = h_orthonormal_complement((mv.g @ vhat)[None, :])
        screen = g_orthonormalize_spacelike(mv, comp)
        vuse = vhat
    else:
        rows = np.vstack([mv.g @ vc, vc])      # g-orthogonal and h-orthogonal
        comp = h_orthonormal_complement(rows)
        screen = g_orthonormalize_spacelike(mv, comp)
        vuse = vc
    m = screen.T @ data.riem_bilinear(vuse) @ screen
    m = 0.5 * (m + m.T)
    return TidalOperator(vector=v, kind=cls.kind, screen=screen, matrix=m,
                         eigenvalues=np.linalg.eigvalsh(m))


def null_partner(mv: MetricValue, v: np.ndarray, screen: np.ndarray) -> np.ndarray:
    """The unique null ell with g(ell, v) = -1, ell g-orthogonal to the screen."""
    n = mv.dim
    rows = np.vstack([(mv.g @ v)[None, :], (mv.g @ screen).T])
    rhs = np.zeros(rows.shape[0])
    rhs[0] = -1.0
    w0, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    # w0 satisfies the linear constraints; remove its null defect along v
    c = mv.inner(w0, w0) / 2.0
    ell = w0 + c * v
    return ell


# --- generic condition ------------------------------------------------------------


@dataclass(frozen=True)
class GenericCheckResult:
    satisfied: bool
    parameter: float | None      # first s* where the threshold is exceeded
    max_ratio: float

    def __str__(self):
        if self.satisfied:
            return f"satisfied at s = {self.parameter:.6g}"
        return "not detected"


def generic_check(field_: MetricField, solution, tau: float = 1e-10) -> GenericCheckResult:
    """Scan a stored geodesic for R(., gamma') gamma' != 0.

    The scan statistic at each sample is the largest h-operator norm of
    w -> R(w, gamma') gamma' over h-unit w, scaled by |gamma'|_h^2. A
    'not detected' answer is a statement about the samples, not a proof.
    """
    best = 0.0
    for s, x, xdot in solution.samples():
        data = curvature_data(field_, x)
        a = -data.g_inv @ data.riem_bilinear(xdot)   # mixed operator on w
        denom = float(xdot @ xdot)
        if denom < 1e-300:
            continue
        ratio = float(np.linalg.norm(a, 2)) / denom
        best = max(best, ratio)
        if ratio > tau:
            return GenericCheckResult(True, float(s), ratio)
    return GenericCheckResult(False, None, best)
