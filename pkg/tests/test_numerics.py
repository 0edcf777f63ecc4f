import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefan_confluence import numerics


def test_sech_integrals():
    sech2 = lambda z: 1.0 / np.cosh(z) ** 2
    assert abs(numerics.integrate_line(sech2) - 2.0) < 1e-10
    assert abs(numerics.integrate_line(lambda z: sech2(z) ** 2) - 4.0 / 3.0) < 1e-10


@pytest.mark.parametrize("t", [0.1, 1.0])
def test_abel_constant(t):
    assert abs(numerics.integrate_abel(lambda a: 1.0, t) - 2.0 * np.sqrt(t)) < 1e-9


def test_abel_linear():
    # int_0^t a / sqrt(t - a) da = (4/3) t^{3/2}
    assert abs(numerics.integrate_abel(lambda a: a, 0.7) - 4.0 / 3.0 * 0.7 ** 1.5) < 1e-10


def test_abel_rejects_negative_time():
    with pytest.raises(ValueError):
        numerics.integrate_abel(lambda a: 1.0, -0.1)


def test_line_rejects_slow_decay():
    with pytest.raises(numerics.QuadratureError):
        numerics.integrate_line(lambda z: 1.0 / (1.0 + z * z))


def test_interval_endpoint_singularity():
    assert abs(numerics.integrate_interval(lambda x: x ** -0.5, 0.0, 1.0) - 2.0) < 1e-9


def test_bracket_error():
    with pytest.raises(numerics.BracketError):
        numerics.solve_bracketed(lambda x: x * x + 1.0, -1.0, 1.0)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        numerics.QuadratureSpec(abs_tol=0.0)


@given(st.floats(-3.0, 3.0), st.floats(0.1, 5.0))
@settings(max_examples=30, deadline=None)
def test_loglog_slope_recovers_power(p, c):
    pts = [(e, c * e ** p) for e in (0.1, 0.05, 0.025, 0.0125)]
    slope, intercept, rms = numerics.fit_loglog_slope(pts)
    assert abs(slope - p) < 1e-10
    assert abs(intercept - np.log(c)) < 1e-9
    assert rms < 1e-10


@given(st.floats(-2.0, 2.0), st.floats(0.01, 3.0))
@settings(max_examples=30, deadline=None)
def test_bracketed_root(root, width):
    x = numerics.solve_bracketed(lambda x: np.tanh(x - root), root - width, root + 2 * width)
    assert abs(x - root) < 1e-10


def test_gauss_legendre_exact_for_polynomials():
    x, w = numerics.gauss_legendre_breaks([0.0, 1.0, 3.0], 0.5, 8)
    assert abs(np.dot(w, x ** 7) - 3.0 ** 8 / 8.0) < 1e-9
