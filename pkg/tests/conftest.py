import numpy as np
import pytest

from lorentzkit import catalog
from lorentzkit.expr import SymbolTable
from lorentzkit.metric import ExprMetricField

CATALOG_NAMES = ("minkowski", "torus_quotient", "schwarzschild_ef",
                 "schwarzschild_static", "flrw_dust", "desitter",
                 "null_H_demo")


@pytest.fixture(scope="session")
def bundles():
    return {name: catalog.load(name) for name in CATALOG_NAMES}


@pytest.fixture(scope="session")
def sphere_metric():
    """Round 2-sphere of radius a = 2 (Riemannian test metric)."""
    table = SymbolTable(["th", "ph"], ["a"])
    return ExprMetricField(
        table,
        {(0, 0): "a^2", (1, 0): "0", (1, 1): "a^2*sin(th)^2"},
        params={"a": 2.0},
        domain=[(1e-3, np.pi - 1e-3), (-np.inf, np.inf)])


def region_points(bundle, count, seed=0):
    """Deterministic sample points inside a bundle's default box."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bundle.default_box])
    hi = np.array([b[1] for b in bundle.default_box])
    return lo + (hi - lo) * rng.random((count, len(lo)))


def fd_metric_first(field, p, h=1e-4):
    """Central-difference d_k g_ij, the independent oracle for christoffel."""
    p = np.asarray(p, dtype=float)
    n = field.dim
    dg = np.zeros((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (field.value(p + e) - field.value(p - e)) / (2 * h)
    return dg


def fd_scalar_jet(fn, p, h=1e-4):
    """Value/gradient/Hessian of a scalar callable by central differences."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    f0 = fn(p)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp, fm = fn(p + e), fn(p - e)
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / h ** 2
    for i in range(n):
        for j in range(i + 1, n):
            ei, ej = np.zeros(n), np.zeros(n)
            ei[i] = h
            ej[j] = h
            hess[i, j] = hess[j, i] = (
                fn(p + ei + ej) - fn(p + ei - ej)
                - fn(p - ei + ej) + fn(p - ei - ej)) / (4 * h ** 2)
    return f0, grad, hess
