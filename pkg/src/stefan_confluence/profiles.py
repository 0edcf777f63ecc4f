"""Closed-form profiles: the tanh kink, the two-kink profile, the double
well, the smooth switch, the cutoff and a mollified Heaviside step.

The two-kink profile is written through logistic factors

    p = expit(-2 z),  q = expit(2 z + 2 eta),  Omega = 1 - 2 p q,

which is algebraically identical to the tanh form and keeps every partial
derivative free of cancellation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit


@dataclass(frozen=True)
class ProfileParams:
    switch_steepness: float = 1.0
    cutoff_inner: tuple = (1.4, 2.6)
    cutoff_outer: tuple = (1.1, 2.9)
    domain: tuple = (1.0, 3.0)

    def __post_init__(self):
        (a_o, b_o), (a_i, b_i), (r1, r2) = self.cutoff_outer, self.cutoff_inner, self.domain
        if not self.switch_steepness > 0:
            raise ValueError("switch_steepness must be positive")
        if not (r1 < a_o < a_i < b_i < b_o < r2):
            raise ValueError(
                "need R1 < outer_lo < inner_lo < inner_hi < outer_hi < R2, got "
                f"domain={self.domain}, outer={self.cutoff_outer}, inner={self.cutoff_inner}")


DEFAULT_PARAMS = ProfileParams()


def omega0(z):
    """The kink tanh z."""
    return np.tanh(z)


def omega0_dot(z):
    """Derivative sech^2 z, evaluated as 4 expit(2z) expit(-2z) (no overflow)."""
    return 4.0 * expit(2.0 * np.asarray(z, dtype=float)) * expit(-2.0 * np.asarray(z, dtype=float))


def _pq(z, eta):
    z = np.asarray(z, dtype=float)
    return expit(-2.0 * z), expit(2.0 * z + 2.0 * eta)


def omega_profile(z, eta):
    """Two-kink profile and its partials ``(Omega, Omega_z, Omega_eta)``."""
    p, q = _pq(z, eta)
    pq = p * q
    return 1.0 - 2.0 * pq, 4.0 * pq * (q - p), -4.0 * pq * (1.0 - q)


def double_well(u):
    """F(u) = u^4/4 - u^2/2 + 1/4 = (u^2 - 1)^2 / 4."""
    u = np.asarray(u, dtype=float)
    return 0.25 * (u * u - 1.0) ** 2


def double_well_prime(u):
    u = np.asarray(u, dtype=float)
    return u ** 3 - u


def profile_integrands(z, eta):
    """Integrands of the interaction integrals at ``(z, eta)``.

    Returns a dict with keys ``B_Omega, Bz_Omega, C_Omega, C_hat, D_hat``.
    For ``eta < 0`` the products are formed from log-expit factors so that
    nothing underflows before the caller rescales (see
    :func:`scaled_profile_integrands`).
    """
    vals, log_scale = scaled_profile_integrands(z, eta)
    return {k: v * np.exp(log_scale[k]) for k, v in vals.items()}


def scaled_profile_integrands(z, eta):
    """Integrands divided by their leading ``eta -> -inf`` scale.

    Returns ``(values, log_scale)``: the true integrand of key ``k`` equals
    ``values[k] * exp(log_scale[k])``.  For ``eta >= 0`` all scales are 0.
    """
    z = np.asarray(z, dtype=float)
    p, q = _pq(z, eta)
    shift = min(float(eta), 0.0)
    m = np.exp(log_expit(-2.0 * z) + log_expit(2.0 * z + 2.0 * eta) - 2.0 * shift)
    one_p, one_q = 1.0 - p, 1.0 - q
    pq = p * q
    vals = {
        "B_Omega": 16.0 * m * m * (q - p) * one_p,
        "Bz_Omega": 16.0 * m * m * one_p * (z * one_p + (z + eta) * one_q),
        "C_Omega": 4.0 * m * one_p,
        "C_hat": 8.0 * m * m * (q - p) ** 2,
        "D_hat": 2.0 * m * m * (1.0 - pq) ** 2,
    }
    log_scale = {k: 4.0 * shift for k in vals}
    log_scale["C_Omega"] = 2.0 * shift
    return vals, log_scale


def switch_B(tau, steepness=1.0):
    """Smooth switch B(tau) = (1 + tanh(k tau)) / 2."""
    return expit(2.0 * steepness * np.asarray(tau, dtype=float))


def switch_B_prime(tau, steepness=1.0):
    b = switch_B(tau, steepness)
    return 2.0 * steepness * b * (1.0 - b)


def switch_B_second(tau, steepness=1.0):
    b = switch_B(tau, steepness)
    return 4.0 * steepness ** 2 * b * (1.0 - b) * (1.0 - 2.0 * b)


def switch_antiderivative(tau, steepness=1.0):
    """A(tau) = integral of B from -inf to tau = log(1 + exp(2 k tau)) / (2k).

    A(tau) - tau -> 0 as tau -> +inf and A decays like exp(2 k tau) / (2k)
    as tau -> -inf.
    """
    return np.logaddexp(0.0, 2.0 * steepness * np.asarray(tau, dtype=float)) / (2.0 * steepness)


def _smooth_step(x):
    """C-infinity step, 0 for x <= 0, 1 for x >= 1, with its derivative."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, x, 1.0)
    b = np.where(x < 1, 1.0 - x, 1.0)
    fa = np.where(x > 0, np.exp(-1.0 / a), 0.0)
    fb = np.where(x < 1, np.exp(-1.0 / b), 0.0)
    dfa = np.where(x > 0, fa / (a * a), 0.0)
    dfb = np.where(x < 1, -fb / (b * b), 0.0)
    den = fa + fb
    s = fa / den
    ds = (dfa * den - fa * (dfa + dfb)) / (den * den)
    return s, ds


def cutoff_e(r, params=DEFAULT_PARAMS, derivative=False):
    """Smooth cutoff: 1 on ``cutoff_inner``, 0 outside ``cutoff_outer``."""
    (a_o, b_o), (a_i, b_i) = params.cutoff_outer, params.cutoff_inner
    r = np.asarray(r, dtype=float)
    wl, wr = a_i - a_o, b_o - b_i
    sl, dsl = _smooth_step((r - a_o) / wl)
    sr, dsr = _smooth_step((b_o - r) / wr)
    e = sl * sr
    if not derivative:
        return e
    return e, dsl / wl * sr - sl * dsr / wr


def mollified_heaviside(x, x0, eps):
    """Smooth step (1 + tanh((x - x0)/eps)) / 2."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return expit(2.0 * (np.asarray(x, dtype=float) - x0) / eps)


def poly_bump(s):
    """Polynomial bump (1 - s^2)^4 on |s| < 1 and its derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    w = np.where(inside, 1.0 - s * s, 0.0)
    return w ** 4, np.where(inside, -8.0 * s * w ** 3, 0.0)


POLY_BUMP_INTEGRAL = 256.0 / 315.0
