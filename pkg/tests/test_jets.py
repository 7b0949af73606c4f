import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzkit.errors import DomainError
from lorentzkit.jets import Jet2

finite = st.floats(-3.0, 3.0, allow_nan=False)


def jet_of(f, x, y):
    """Jet of f(x, y) seeded on two variables."""
    return f(Jet2.variable(x, 0, 2), Jet2.variable(y, 1, 2))


class TestArithmetic:
    @settings(max_examples=60, deadline=None)
    @given(finite, finite)
    def test_product_rule(self, x, y):
        j = jet_of(lambda a, b: a * b, x, y)
        assert j.value == pytest.approx(x * y)
        assert np.allclose(j.grad, [y, x])
        assert np.allclose(j.hess, [[0, 1], [1, 0]])

    @settings(max_examples=60, deadline=None)
    @given(finite, finite.filter(lambda v: abs(v) > 0.1))
    def test_quotient_rule(self, x, y):
        j = jet_of(lambda a, b: a / b, x, y)
        assert j.value == pytest.approx(x / y)
        assert np.allclose(j.grad, [1 / y, -x / y ** 2], atol=1e-12)
        assert j.hess[1, 1] == pytest.approx(2 * x / y ** 3, rel=1e-12)

    def test_integer_power_is_exact(self):
        j = Jet2.variable(3.0, 0, 1) ** 5
        assert j.value == 243.0
        assert j.grad[0] == 5 * 81.0
        assert j.hess[0, 0] == 20 * 27.0

    def test_negative_power(self):
        j = Jet2.variable(2.0, 0, 1) ** (-2)
        assert j.value == pytest.approx(0.25)
        assert j.grad[0] == pytest.approx(-2 / 8)

    def test_real_power_requires_positive_base(self):
        with pytest.raises(DomainError):
            Jet2.variable(-1.0, 0, 1) ** 0.5


class TestFunctions:
    @pytest.mark.parametrize("name,f,fp,fpp", [
        ("exp", math.exp, math.exp, math.exp),
        ("sin", math.sin, math.cos, lambda u: -math.sin(u)),
        ("cos", math.cos, lambda u: -math.sin(u), lambda u: -math.cos(u)),
        ("sinh", math.sinh, math.cosh, math.sinh),
        ("cosh", math.cosh, math.sinh, math.cosh),
        ("tanh", math.tanh, lambda u: 1 - math.tanh(u) ** 2,
         lambda u: -2 * math.tanh(u) * (1 - math.tanh(u) ** 2)),
    ])
    def test_univariate_derivatives(self, name, f, fp, fpp):
        u = 0.63
        j = getattr(Jet2.variable(u, 0, 1), name)()
        assert j.value == pytest.approx(f(u), rel=1e-14)
        assert j.grad[0] == pytest.approx(fp(u), rel=1e-12)
        assert j.hess[0, 0] == pytest.approx(fpp(u), rel=1e-12)

    def test_sqrt_log_chain(self):
        u = 1.7
        j = Jet2.variable(u, 0, 1).sqrt().log()   # log(sqrt(u)) = log(u)/2
        assert j.value == pytest.approx(math.log(u) / 2)
        assert j.grad[0] == pytest.approx(1 / (2 * u))
        assert j.hess[0, 0] == pytest.approx(-1 / (2 * u ** 2))

    def test_domain_guards(self):
        with pytest.raises(DomainError):
            Jet2.variable(0.0, 0, 1).log()
        with pytest.raises(DomainError):
            Jet2.variable(-1.0, 0, 1).sqrt()
        with pytest.raises(DomainError):
            Jet2.constant(1.0, 1) / Jet2.constant(0.0, 1)

    def test_hessian_symmetry(self):
        a = Jet2.variable(0.4, 0, 3)
        b = Jet2.variable(-0.7, 1, 3)
        c = Jet2.variable(1.3, 2, 3)
        j = ((a * b).exp() + c.sin() * a).symmetrized()
        assert np.allclose(j.hess, j.hess.T)
