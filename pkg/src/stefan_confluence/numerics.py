"""Quadrature, root finding and convergence-rate fitting.

Thin contracts over ``scipy.integrate.quad`` and ``scipy.optimize.brentq``
plus a vectorised composite Gauss-Legendre rule used for table building.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions or the tail check failed."""

    def __init__(self, message, value=float("nan"), error=float("nan")):
        super().__init__(message)
        self.value = value
        self.error = error


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    line_truncation_half_width: float = 40.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.line_truncation_half_width <= 0:
            raise ValueError("line_truncation_half_width must be positive")


DEFAULT_SPEC = QuadratureSpec()


def integrate_interval(f, a, b, spec=None, points=None):
    """Adaptive integral of ``f`` over ``[a, b]``.

    Integrable endpoint singularities are handled by QUADPACK's
    extrapolation (e.g. ``t**-0.5`` on ``(0, 1]``).  Raises
    :class:`QuadratureError` when the error estimate exceeds
    ``max(abs_tol, rel_tol*|I|)``.
    """
    spec = spec or DEFAULT_SPEC
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    pts = None
    if points is not None:
        pts = [p for p in points if a < p < b] or None
    value, err, info = integrate.quad(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, points=pts, full_output=1,
    )[:3]
    if err > max(spec.abs_tol, spec.rel_tol * abs(value)) * 10.0:
        raise QuadratureError(
            f"quadrature did not converge on [{a}, {b}]: value={value!r}, "
            f"error estimate={err!r}", value, err)
    return float(value)


def integrate_line(f, spec=None, center=0.0, breakpoints=(), return_tail=False):
    """Integral over the real line of an exponentially decaying ``f``.

    The line is truncated to ``center +- H`` with ``H`` the spec half-width,
    split into panels of width at most 5 (plus any ``breakpoints``).  The
    integrand magnitude at both truncation points must be below ``abs_tol``.
    With ``return_tail`` the pair ``(value, tail_bound)`` is returned, where
    the tail bound assumes decay at least like ``exp(-|z|)``.
    """
    spec = spec or DEFAULT_SPEC
    half = spec.line_truncation_half_width
    lo, hi = center - half, center + half
    f_lo, f_hi = abs(f(lo)), abs(f(hi))
    for name, mag in (("lower", f_lo), ("upper", f_hi)):
        if not np.isfinite(mag) or mag > spec.abs_tol:
            raise QuadratureError(
                f"integrand not decayed at {name} truncation point "
                f"(|f|={mag:.3e} > abs_tol={spec.abs_tol:.1e})")
    edges = set(np.linspace(lo, hi, int(np.ceil(2 * half / 5.0)) + 1).tolist())
    edges.update(p for p in breakpoints if lo < p < hi)
    edges = sorted(edges)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate_interval(f, a, b, spec)
    if return_tail:
        return total, f_lo + f_hi
    return total


def integrate_abel(g, t, spec=None):
    """``int_0^t g(a) / sqrt(t - a) da`` via the substitution ``a = t - s**2``.

    The transformed integrand ``2 g(t - s**2)`` is smooth whenever ``g`` is.
    """
    if t < 0:
        raise ValueError(f"integrate_abel needs t >= 0, got {t}")
    if t == 0:
        return 0.0
    return integrate_interval(lambda s: 2.0 * g(t - s * s), 0.0, float(np.sqrt(t)), spec)


def solve_bracketed(h, lo, hi, tol=1e-12):
    """Root of ``h`` in ``[lo, hi]`` by Brent's method (bisection + secant/IQI)."""
    h_lo, h_hi = h(lo), h(hi)
    if h_lo == 0:
        return float(lo)
    if h_hi == 0:
        return float(hi)
    if np.sign(h_lo) == np.sign(h_hi):
        raise BracketError(f"bracket invalid: h(lo)={h_lo!r}, h(hi)={h_hi!r}")
    return float(optimize.brentq(h, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                 maxiter=500))


def fit_loglog_slope(points):
    """Least-squares line through ``(log eps, log value)``.

    Returns ``(slope, intercept, rms_residual)``; the intercept is in log space.
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points for a slope fit")
    eps = np.array([p[0] for p in pts], dtype=float)
    val = np.array([p[1] for p in pts], dtype=float)
    if np.any(eps <= 0):
        raise ValueError("all eps must be positive")
    if np.any(~(val > 0)):
        raise ValueError("all values must be positive; take magnitudes first")
    x, y = np.log(eps), np.log(val)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


_GL_CACHE = {}


def gauss_legendre_nodes(a, b, n_panels, order=16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    x, w = _GL_CACHE[order]
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gauss_legendre_breaks(breaks, max_width, order=8):
    """Composite Gauss-Legendre rule on consecutive ``breaks``.

    Every interval between sorted breakpoints is split into panels no wider
    than ``max_width``.  Useful when integrands have kinks at known points.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(np.ceil((b - a) / max_width)))
        x, w = gauss_legendre_nodes(a, b, n, order)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)
