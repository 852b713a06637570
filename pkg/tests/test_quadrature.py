import numpy as np
import pytest

from hestonfx.errors import InvalidParameters, QuadratureNotConverged
from hestonfx.quadrature import QuadratureConfig, adaptive_lobatto, integrate_half_line


def test_polynomial_is_exact():
    val, n = adaptive_lobatto(lambda x: np.atleast_2d(x**5 - 3 * x**2), 0.0, 2.0)
    assert val[0] == pytest.approx(2.0**6 / 6 - 8.0, rel=1e-14)
    assert n == 13 + 6 * 5  # initial rule plus one accepted pass over its six subintervals


def test_oscillatory_integral():
    val, _ = adaptive_lobatto(lambda x: np.atleast_2d(np.cos(40 * x)), 0.0, 1.0)
    assert val[0] == pytest.approx(np.sin(40.0) / 40.0, rel=1e-10)


def test_vector_valued_integrand():
    f = lambda x: np.vstack([np.exp(x), np.sin(x)])
    val, _ = adaptive_lobatto(f, 0.0, 1.0)
    np.testing.assert_allclose(val, [np.e - 1.0, 1.0 - np.cos(1.0)], rtol=1e-12)


@pytest.mark.parametrize("rule", ["lobatto", "laguerre", "legendre"])
def test_half_line_rules(rule):
    cfg = QuadratureConfig(rule=rule)
    val = integrate_half_line(lambda x: np.atleast_2d(np.exp(-x) / (1.0 + 0.0 * x)), cfg)
    assert val[0] == pytest.approx(1.0, rel=1e-8)


def test_half_line_mapping_handles_slow_decay():
    val = integrate_half_line(lambda x: np.atleast_2d(1.0 / (1.0 + x * x)), QuadratureConfig(), scale=0.5)
    assert val[0] == pytest.approx(np.pi / 2, rel=1e-10)


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureNotConverged):
        adaptive_lobatto(lambda x: np.atleast_2d(np.sin(1.0 / (x + 1e-9))), 0.0, 1.0, max_evals=200)


def test_config_validation():
    with pytest.raises(InvalidParameters):
        QuadratureConfig(rel_tol=-1.0)
    with pytest.raises(InvalidParameters):
        QuadratureConfig(rule="simpson")
