"""Normal coordinate charts built from the exponential map.

A NormalChart maps normal coordinates x to manifold points exp_p(x^i e_i) by
geodesic integration, and back by damped Newton iteration on the forward map.
For metrics with constant components in their chart (flat charts) geodesics
are straight lines, so both maps are exact affine maps; that fast path also
makes composed scalar fields exactly differentiable, which the perturbation
machinery relies on.

At the center the 2-jet of the inverse map is available in closed form
(dPhi = frame^{-1}, Hess Phi^k = A^k_c Gamma^c_ab(p)); away from the center
on curved charts jets fall back to finite differences of Newton inversions,
which is accurate but slow.
"""

from __future__ import annotations

import numpy as np

from .errors import FrameNotOrthonormal, InversionFailure
from .geometry import DEFAULT_TOLS, Tolerances, curvature_data
from .geodesics import geodesic
from .jets import Jet2
from .metric import MetricField

_FRAME_TOL = 1e-9


class NormalChart:
    """Chart map x -> exp_p(x^i e_i) and its inverse around a center point."""

    def __init__(self, field_: MetricField, p, frame: np.ndarray,
                 radius: float | None = None,
                 tols: Tolerances = DEFAULT_TOLS):
        self.field = field_
        self.p = np.asarray(p, dtype=float)
        self.frame = np.asarray(frame, dtype=float)   # columns e_i
        self.tols = tols
        n = field_.dim
        if self.frame.shape != (n, n):
            raise FrameNotOrthonormal(f"frame must be {n}x{n}")
        g = field_.value(self.p)
        index = int(np.sum(np.linalg.eigvalsh(g) < 0.0))
        eta = np.diag([-1.0] * index + [1.0] * (n - index))
        gram = self.frame.T @ g @ self.frame
        err = float(np.max(np.abs(gram - eta)))
        if err > _FRAME_TOL:
            raise FrameNotOrthonormal(
                f"frame Gram matrix deviates from the signature form by {err:.3e}")
        self.frame_inv = np.linalg.inv(self.frame)
        self.affine = bool(getattr(field_, "constant_components", False))
        self._tight = Tolerances(tau_zero=tols.tau_zero, tau_c=tols.tau_c,
                                 eps_geo=1e-11, tau_cond=tols.tau_cond,
                                 tau_trap=tols.tau_trap)
        if radius is None:
            bd = field_.boundary_distance(self.p)
            radius = min(1.0, bd / 2.0) if np.isfinite(bd) else 1.0
        self.radius = float(radius)
        if not self.affine:
            self._shrink_to_invertible()

    # -- forward / inverse ----------------------------------------------------

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.affine:
            return self.p + self.frame @ x
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return self.p.copy()
        sol = geodesic(self.field, self.p, self.frame @ x, 1.0,
                       tols=self._tight)
        if sol.chart_exit:
            raise InversionFailure("exponential map left the chart domain")
        return sol.point(sol.t_reached)

    def inverse(self, q, max_iter: int = 25) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self.affine:
            return self.frame_inv @ (q - self.p)
        x = self.frame_inv @ (q - self.p)      # exact for flat, good seed else
        scale = 1.0 + float(np.linalg.norm(q - self.p))
        res = self.forward(x) - q
        for _ in range(max_iter):
            if np.linalg.norm(res) < 1e-11 * scale:
                return x
            jac = self._forward_jacobian(x)
            try:
                step = np.linalg.solve(jac, res)
            except np.linalg.LinAlgError as exc:
                raise InversionFailure(f"singular Jacobian: {exc}") from exc
            lam = 1.0
            for _ in range(8):                  # damping: insist on progress
                trial = x - lam * step
                trial_res = self.forward(trial) - q
                if np.linalg.norm(trial_res) < np.linalg.norm(res):
                    x, res = trial, trial_res
                    break
                lam *= 0.5
            else:
                raise InversionFailure("damped Newton stalled")
        if np.linalg.norm(res) < 1e-9 * scale:
            return x
        raise InversionFailure(
            f"Newton did not converge (|residual| = {np.linalg.norm(res):.3e})")

    def _forward_jacobian(self, x, h: float = 2e-4) -> np.ndarray:
        n = self.field.dim
        jac = np.zeros((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            jac[:, i] = (self.forward(x + e) - self.forward(x - e)) / (2 * h)
        return jac

    def _shrink_to_invertible(self, max_shrinks: int = 10):
        n = self.field.dim
        dirs = list(np.eye(n)) + list(-np.eye(n))
        for _ in range(max_shrinks):
            try:
                for d in dirs:
                    x = self.radius * d
                    q = self.forward(x)
                    xr = self.inverse(q)
                    if np.linalg.norm(xr - x) > 1e-7 * (1 + self.radius):
                        raise InversionFailure("round trip drifted")
                return
            except InversionFailure:
                self.radius *= 0.7
        raise InversionFailure(
            f"no invertible radius found (down to {self.radius:.3g})")

    # -- jets of the normal coordinate functions --------------------------------

    def center_coord_jets(self) -> list[Jet2]:
        """Exact 2-jets of x^k(.) at the center, in chart coordinates."""
        a = self.frame_inv
        gamma_p = curvature_data(self.field, self.p).gamma
        hess = np.einsum("kc,cab->kab", a, gamma_p)
        return [Jet2(0.0, a[k], hess[k]) for k in range(self.field.dim)]

    def coord_jets(self, q, fd_step: float = 2e-3) -> list[Jet2]:
        """2-jets of the normal coordinates at an arbitrary chart point q.

        Exact on affine charts and at the center; finite differences of the
        Newton inverse otherwise (slow: reserved for diagnostics).
        """
        q = np.asarray(q, dtype=float)
        n = self.field.dim
        if self.affine:
            x = self.frame_inv @ (q - self.p)
            return [Jet2(float(x[k]), self.frame_inv[k], np.zeros((n, n)))
                    for k in range(n)]
        if np.linalg.norm(q - self.p) < 1e-14:
            return self.center_coord_jets()
        h = fd_step
        x0 = self.inverse(q)
        grad = np.zeros((n, n))
        hess = np.zeros((n, n, n))
        plus = np.zeros((n, n))
        minus = np.zeros((n, n))
        for c in range(n):
            e = np.zeros(n)
            e[c] = h
            plus[c] = self.inverse(q + e)
            minus[c] = self.inverse(q - e)
            grad[:, c] = (plus[c] - minus[c]) / (2 * h)
            hess[:, c, c] = (plus[c] - 2 * x0 + minus[c]) / h ** 2
        for c in range(n):
            for d in range(c + 1, n):
                ec, ed = np.zeros(n), np.zeros(n)
                ec[c] = h
                ed[d] = h
                mixed = (self.inverse(q + ec + ed) - self.inverse(q + ec - ed)
                         - self.inverse(q - ec + ed) + self.inverse(q - ec - ed)) \
                    / (4 * h ** 2)
                hess[:, c, d] = mixed
                hess[:, d, c] = mixed
        return [Jet2(float(x0[k]), grad[k], hess[k]) for k in range(n)]

    # -- pullback diagnostics -----------------------------------------------------

    def pullback_metric(self, x, fd_step: float = 2e-4) -> np.ndarray:
        """Components of the metric in normal coordinates at x (FD Jacobian)."""
        x = np.asarray(x, dtype=float)
        n = self.field.dim
        if self.affine:
            jac = self.frame
        else:
            jac = np.zeros((n, n))
            for i in range(n):
                e = np.zeros(n)
                e[i] = fd_step
                jac[:, i] = (self.forward(x + e) - self.forward(x - e)) / (2 * fd_step)
        g = self.field.value(self.forward(x))
        return jac.T @ g @ jac

    def pullback_christoffel_origin(self, fd_step: float = 2e-3) -> np.ndarray:
        """Gamma of the pulled-back metric at x = 0; should vanish."""
        n = self.field.dim
        if self.affine:
            return np.zeros((n, n, n))
        hess_f = np.zeros((n, n, n))     # d2 F^c / dx_i dx_j
        for i in range(n):
            e = np.zeros(n)
            e[i] = fd_step
            hess_f[:, i, i] = (self.forward(e) - 2 * self.p + self.forward(-e)) \
                / fd_step ** 2
        for i in range(n):
            for j in range(i + 1, n):
                ei, ej = np.zeros(n), np.zeros(n)
                ei[i] = fd_step
                ej[j] = fd_step
                mixed = (self.forward(ei + ej) - self.forward(ei - ej)
                         - self.forward(-ei + ej) + self.forward(-ei - ej)) \
                    / (4 * fd_step ** 2)
                hess_f[:, i, j] = mixed
                hess_f[:, j, i] = mixed
        gamma_p = curvature_data(self.field, self.p).gamma
        ee = np.einsum("cab,ai,bj->cij", gamma_p, self.frame, self.frame)
        return np.einsum("kc,cij->kij", self.frame_inv, hess_f + ee)


def orthonormal_frame_from(field_: MetricField, p,
                           first: np.ndarray | None = None,
                           second: np.ndarray | None = None) -> np.ndarray:
    """Build a g-orthonormal frame at p, optionally aligning leading legs.

    `first` must be timelike; it becomes e_0 after unit normalization.
    `second`, if given, is projected orthogonal to `first` and becomes e_1.
    Remaining legs come from Gram-Schmidt over the coordinate axes.
    """
    g = field_.value(np.asarray(p, dtype=float))
    n = field_.dim
    seeds = []
    if first is not None:
        seeds.append(np.asarray(first, dtype=float))
    if second is not None:
        seeds.append(np.asarray(second, dtype=float))
    seeds.extend(np.eye(n))
    frame = []
    for s in seeds:
        u = s.copy()
        for k, f in enumerate(frame):
            sign = -1.0 if k == 0 else 1.0
            u = u - sign * float(u @ g @ f) * f
        q = float(u @ g @ u)
        if not frame:
            if q >= 0:
                raise FrameNotOrthonormal("leading frame vector must be timelike")
            frame.append(u / np.sqrt(-q))
            continue
        if q < 1e-12:
            continue                      # dependent seed, skip
        frame.append(u / np.sqrt(q))
        if len(frame) == n:
            break
    if len(frame) != n:
        raise FrameNotOrthonormal("could not complete an orthonormal frame")
    return np.column_stack(frame)
