"""Global smooth approximation: order function, temperature model, the
heat-potential correction and the assembled temperature.

Fronts r_i(t, eps) come from :func:`interaction.front_positions`; the
continued sharp-interface data (fronts, one-sided gradients) come from a
``FrontTrajectory``-like object providing ``r0, r0_t, r0_tt, gammas,
domain, kappa, t_star, boundary_values, sigma_bar``.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.special import erf, expit

from . import numerics
from .interaction import front_positions
from .profiles import DEFAULT_PARAMS, cutoff_e, switch_B


class AnsatzError(RuntimeError):
    pass


# ----------------------------------------------------------- order function

def order_function(r, t, eps, fronts, sol, derivatives=True):
    """u = 1 - 2 P Q with P = expit(-2a), Q = expit(-2b),
    a = beta (r1 - r) / eps, b = beta (r - r2) / eps.

    This equals (1 + w(a) + w(b) - w(a) w(b)) / 2 for w = tanh.  Returns
    ``(u, u_r, u_t)`` (or ``u`` alone).
    """
    r = np.asarray(r, dtype=float)
    fp = front_positions(t, eps, fronts, sol)
    st = sol.eval(fp.tau)
    beta, beta_tau = float(st["beta"][0]), float(st["beta_tau"][0])
    r1, r2 = float(fp.r1[0]), float(fp.r2[0])
    a = beta * (r1 - r) / eps
    b = beta * (r - r2) / eps
    p, q = expit(-2.0 * a), expit(-2.0 * b)
    u = 1.0 - 2.0 * p * q
    if not derivatives:
        return u
    v1, v2 = fronts.r0_t(t)
    beta_t = beta_tau * float(v2[0] - v1[0]) / eps
    a_t = (beta_t * (r1 - r) + beta * float(fp.r1t[0])) / eps
    b_t = (beta_t * (r - r2) - beta * float(fp.r2t[0])) / eps
    u_r = 4.0 * beta / eps * p * q * (p - q)
    u_t = 4.0 * p * q * ((1.0 - p) * a_t + (1.0 - q) * b_t)
    return u, u_r, u_t


# -------------------------------------------------------- temperature model

def model_coefficients(r1, r2, r1t, r2t, gam, kappa, psi=None):
    """Linear-in-r coefficients of the temperature model.

    Returns a dict with the midpoint ``r_mid``, ``psi``, ``k1, k2`` and the
    (value at r_mid, slope) pairs ``I, gm, gh`` of I, gamma^- and gamma-hat.
    The gauge gamma-hat_1 = gamma_1^-, gamma-hat_2 = gamma_2^+ is used.
    """
    k1c, k2c = kappa
    psi = r2 - r1 if psi is None else psi
    k1 = k1c * r1 * r1t + k2c
    k2 = k1c * r2 * r2t + k2c
    g1m, g1p, g2m, g2p = gam["g1m"], gam["g1p"], gam["g2m"], gam["g2p"]
    return {"r_mid": 0.5 * (r1 + r2), "psi": psi, "k1": k1, "k2": k2,
            "I": (0.5 * (k1 - k2), -(k1 + k2) / psi),
            "gm": (0.5 * (g1p + g2m), -(g1p - g2m) / psi),
            "gh": (0.5 * (g1m + g2p), -(g1m - g2p) / psi)}


def model_temperature(r, r1, r2, r1t, r2t, gam, kappa, b=1.0, derivative=False, psi=None):
    """Temperature model T for fronts r1 < r2.

    ``b = 1`` is the piecewise form; ``0 <= b <= 1`` the blended form

        T = I + g1m (r1 - r)(1 - H1) + g2p (r - r2) H2
            + (Q / psi) [b gamma^- (H1 - H2) + (1 - b) gamma-hat (H2 - H1)],

    with Q = (r1 - r)(r - r2) and H_i = H(r - r_i).  With ``derivative`` the
    pair ``(T, T_r)`` is returned.  ``psi`` overrides r2 - r1 when the gap is
    known more accurately than the difference of the two positions.
    """
    r = np.asarray(r, dtype=float)
    c = model_coefficients(r1, r2, r1t, r2t, gam, kappa, psi)
    y = r - c["r_mid"]
    psi = c["psi"]
    lin = lambda pair: pair[0] + pair[1] * y
    h1 = (r >= r1).astype(float)
    h2 = (r >= r2).astype(float)
    mid = h1 - h2
    Q = (r1 - r) * (r - r2)
    weight = b * lin(c["gm"]) - (1.0 - b) * lin(c["gh"])
    T = (lin(c["I"]) + gam["g1m"] * (r1 - r) * (1.0 - h1) + gam["g2p"] * (r - r2) * h2
         + Q / psi * weight * mid)
    if not derivative:
        return T
    Q_r = r1 + r2 - 2.0 * r
    w_r = b * c["gm"][1] - (1.0 - b) * c["gh"][1]
    T_r = (c["I"][1] - gam["g1m"] * (1.0 - h1) + gam["g2p"] * h2
           + (Q_r * weight + Q * w_r) / psi * mid)
    return T, T_r


def _front_state(t, eps, fronts, sol):
    fp = front_positions(t, eps, fronts, sol)
    gam = {k: float(v[0]) for k, v in fronts.gammas(t).items()}
    return (float(fp.r1[0]), float(fp.r2[0]), float(fp.r1t[0]), float(fp.r2t[0]),
            float(fp.tau[0]), gam, float(fp.psi[0]))


def temperature_model(r, t, eps, fronts, sol, form="blended", derivative=False):
    """T(r, t) at the regularised fronts, blended with B(tau) or piecewise."""
    if form not in ("blended", "piecewise"):
        raise ValueError(f"unknown form: {form}")
    r1, r2, r1t, r2t, tau, gam, psi = _front_state(t, eps, fronts, sol)
    b = 1.0 if form == "piecewise" else float(switch_B(tau, sol.steepness))
    return model_temperature(r, r1, r2, r1t, r2t, gam, fronts.kappa, b, derivative, psi)


def model_I(r, t, eps, fronts, sol):
    """The linear part I(r, t) of the temperature model."""
    r1, r2, r1t, r2t, _, gam, psi = _front_state(t, eps, fronts, sol)
    c = model_coefficients(r1, r2, r1t, r2t, gam, fronts.kappa, psi)
    return c["I"][0] + c["I"][1] * (np.asarray(r, dtype=float) - c["r_mid"])


# ------------------------------------------------------ heat-potential path

@dataclass(frozen=True)
class KernelSource:
    """Bridge source data sampled on a dense time grid.

    The source of the first correction is ``B (2 g0 + 6 g1 (xi - r_mid)) /
    psi`` on ``[r1, r2]``, i.e. minus the second r-derivative of
    ``gamma^- Q / psi`` times B; ``g1 psi`` and ``log psi`` are stored since
    both stay smooth as psi -> 0.
    """
    t: np.ndarray
    splines: dict

    def __call__(self, t):
        out = {k: s(t) for k, s in self.splines.items()}
        out["psi"] = np.exp(out.pop("log_psi"))
        return out


def kernel_source(fronts, sol, eps, n_t=4001, t_end=None):
    t_end = fronts.t1 if t_end is None else t_end
    ts = np.linspace(0.0, t_end, n_t)
    fp = front_positions(ts, eps, fronts, sol)
    gam = fronts.gammas(ts)
    psi = fp.psi
    b = switch_B(fp.tau, sol.steepness)
    data = {"r1": fp.r1, "r2": fp.r2, "log_psi": np.log(psi), "B": b,
            "g0": 0.5 * (gam["g1p"] + gam["g2m"]), "g1psi": -(gam["g1p"] - gam["g2m"]),
            "gsum": gam["g1p"] + gam["g2m"]}
    return KernelSource(ts, {k: CubicSpline(ts, v) for k, v in data.items()})


_GL8 = np.polynomial.legendre.leggauss(8)


def _inner_heat(r, s, r1, r2, a0, a1):
    """int_{r1}^{r2} (a0 + a1 (xi - m)) exp(-(r - xi)^2 / (4 s)) d xi / sqrt(4 pi s),
    m the midpoint."""
    width = r2 - r1
    m = 0.5 * (r1 + r2)
    if width < 0.05 * np.sqrt(s):
        x, w = _GL8
        xi = m + 0.5 * width * x
        g = np.exp(-(r - xi) ** 2 / (4.0 * s)) / np.sqrt(4.0 * np.pi * s)
        return 0.5 * width * float(np.dot(w, (a0 + a1 * (xi - m)) * g))
    rs = 2.0 * np.sqrt(s)
    lo, hi = (r1 - r) / rs, (r2 - r) / rs
    e0 = 0.5 * (erf(hi) - erf(lo))
    e1 = -np.sqrt(s / np.pi) * (np.exp(-hi * hi) - np.exp(-lo * lo))
    return (a0 + a1 * (r - m)) * e0 + a1 * e1


def correction_qhat_kernel(r, t, source, kernel="heat", spec=None):
    """First heat-potential correction at (r, t) by Abel-type quadrature.

    ``kernel="heat"`` uses the heat fundamental solution and the full bridge
    source; ``kernel="printed"`` evaluates the alternative closed expression
    with prefactor 1/(2 sqrt(2 pi)) and Gaussian exp(-(r - xi)^2 / s), driven
    by the constant part of the source only.
    """
    if t == 0:
        return 0.0
    spec = spec or numerics.QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=400)
    if kernel == "heat":
        def g(alpha):
            c = source(alpha)
            psi = float(c["psi"])
            s = t - alpha
            if s <= 0:
                # limit of inner / sqrt(s) * sqrt(s) is 0 off the support
                return 0.0
            a0 = 2.0 * float(c["g0"]) / psi
            a1 = 6.0 * float(c["g1psi"]) / psi ** 2
            return float(c["B"]) * _inner_heat(r, s, float(c["r1"]), float(c["r2"]),
                                               a0, a1) * np.sqrt(s)
        return numerics.integrate_abel(g, t, spec)
    if kernel == "printed":
        def g(alpha):
            c = source(alpha)
            s = t - alpha
            if s <= 0:
                return 0.0
            r1, r2, psi = float(c["r1"]), float(c["r2"]), float(c["psi"])
            lo, hi = (r1 - r) / np.sqrt(s), (r2 - r) / np.sqrt(s)
            inner = 0.5 * np.sqrt(np.pi * s) * (erf(hi) - erf(lo)) / psi
            return -float(c["gsum"]) * float(c["B"]) * inner / (2.0 * np.sqrt(2.0 * np.pi))
        return numerics.integrate_abel(g, t, spec)
    raise ValueError(f"unknown kernel: {kernel}")


def holder_quotients(f, r_points, levels, mu=0.45):
    """sup_r |f(r + d) - f(r)| / d^mu for dyadic gaps d = 2^-k, k in ``levels``."""
    base = {float(x): f(float(x)) for x in r_points}
    out = []
    for k in levels:
        d = 2.0 ** (-k)
        vals = [abs(f(float(x) + d) - base[float(x)]) / d ** mu for x in r_points]
        out.append(max(vals))
    return np.array(out)


# --------------------------------------------------------- correction solve

@dataclass(frozen=True)
class CorrectionField:
    """Nodal global temperature on a uniform r grid at every time level."""
    r: np.ndarray
    t: np.ndarray
    sigma: np.ndarray
    eps: float
    sources: np.ndarray

    def at(self, n):
        return self.sigma[n]

    def value(self, r, n):
        return np.interp(r, self.r, self.sigma[n])

    def gradient(self, n):
        """Cellwise constant r-derivative (length N)."""
        return np.diff(self.sigma[n]) / np.diff(self.r)

    def time_derivative(self, n):
        """Fourth-order finite difference in t (one-sided near the ends)."""
        s, dt, m = self.sigma, self.t[1] - self.t[0], self.t.size
        if m < 5:
            raise AnsatzError("need at least 5 time levels for the 4th-order stencil")
        if 2 <= n <= m - 3:
            return (s[n - 2] - 8 * s[n - 1] + 8 * s[n + 1] - s[n + 2]) / (12 * dt)
        if n < 2:
            k = n
            st = s[0:5]
            coef = ([-25, 48, -36, 16, -3], [-3, -10, 18, -6, 1])[k]
            return sum(c * x for c, x in zip(coef, st)) / (12 * dt)
        k = m - 1 - n
        st = s[m - 5:m]
        coef = ([3, -16, 36, -48, 25], [-1, 6, -18, 10, 3])[k]
        return sum(c * x for c, x in zip(coef, st)) / (12 * dt)


def _hat_weights(x, r):
    """Cell index j and the two hat-function values at the point x."""
    h = r[1] - r[0]
    j = int(np.clip(np.floor((x - r[0]) / h), 0, r.size - 2))
    w = (x - r[j]) / h
    return j, 1.0 - w, w


def solve_correction(fronts, sol, eps, h=None, dt=None, sharp=False, t_end=None):
    """Heat solve for the global temperature with switched latent-heat sources.

    Solves ``s_t - s_rr = -sum_i c_i B(tau) delta(r - r_i(t, eps))`` with
    c_1 = r10^3 r10', c_2 = -r20^3 r20', Dirichlet data from the scenario
    and initial data sigma_bar(r, 0).  Linear finite elements in r (exact
    point-source weights), BDF2 in t with a backward-Euler first step.
    With ``sharp=True`` the sources sit at the continued fronts with
    B = H(t* - t) (the classical limit).  The correction q = sigma - e T
    follows by subtraction.
    """
    R1, R2 = fronts.domain
    h = eps / 8.0 if h is None else h
    n = int(np.ceil((R2 - R1) / h))
    r = np.linspace(R1, R2, n + 1)
    h = r[1] - r[0]
    dt = h if dt is None else dt
    t_end = fronts.t1 if t_end is None else t_end
    m = int(np.ceil(t_end / dt))
    t = np.linspace(0.0, t_end, m + 1)
    dt = t[1] - t[0]
    if sharp:
        p1, p2 = fronts.r0(t)
        on = (t < fronts.t_star).astype(float)
        amp = on
        pos = np.vstack([p1, p2])
    else:
        fp = front_positions(t, eps, fronts, sol)
        amp = switch_B(fp.tau, sol.steepness)
        pos = np.vstack([fp.r1, fp.r2])
    # [s_r] at r_i equals c_i B, with (c_1, c_2) the two flux sums
    strength = np.vstack(fronts.flux_sums(t)) * amp
    mass = np.zeros((3, n + 1))
    mass[0, 1:] = h / 6.0
    mass[1, :] = 4.0 * h / 6.0
    mass[1, 0] = mass[1, -1] = 2.0 * h / 6.0
    mass[2, :-1] = h / 6.0
    stiff = np.zeros((3, n + 1))
    stiff[0, 1:] = -1.0 / h
    stiff[1, :] = 2.0 / h
    stiff[1, 0] = stiff[1, -1] = 1.0 / h
    stiff[2, :-1] = -1.0 / h

    def mat_vec(band, x):
        y = band[1] * x
        y[:-1] += band[0, 1:] * x[1:]
        y[1:] += band[2, :-1] * x[:-1]
        return y

    sig = np.empty((m + 1, n + 1))
    if fronts.sigma_bar is None:
        raise AnsatzError("scenario provides no initial temperature")
    sig[0] = fronts.sigma_bar(r, 0.0)
    bl, br = fronts.boundary_values(0.0)
    sig[0, 0], sig[0, -1] = bl, br
    for k in range(1, m + 1):
        if k == 1:
            alpha, hist = 1.0 / dt, sig[0] / dt
        else:
            alpha, hist = 1.5 / dt, (2.0 * sig[k - 1] - 0.5 * sig[k - 2]) / dt
        ab = alpha * mass + stiff
        rhs = mat_vec(mass, hist)
        for i in range(2):
            j, w0, w1 = _hat_weights(pos[i, k], r)
            rhs[j] -= strength[i, k] * w0
            rhs[j + 1] -= strength[i, k] * w1
        bl, br = fronts.boundary_values(t[k])
        # Dirichlet rows and columns
        rhs[1] -= ab[2, 0] * bl
        rhs[n - 1] -= ab[0, n] * br
        ab[0, 1] = ab[2, 0] = ab[2, n - 1] = ab[0, n] = 0.0
        ab[1, 0] = ab[1, n] = 1.0
        rhs[0], rhs[n] = bl, br
        sig[k] = solve_banded((1, 1), ab, rhs)
        if not np.all(np.isfinite(sig[k])):
            raise AnsatzError(f"non-finite temperature at t={t[k]}")
    return CorrectionField(r, t, sig, eps, strength)


def assemble_temperature(field, n, fronts, sol, params=DEFAULT_PARAMS, form="blended"):
    """Components at time level n: dict with r, eT, q (= sigma - eT), sigma, theta."""
    r = field.r
    e = cutoff_e(r, params)
    T = temperature_model(r, field.t[n], field.eps, fronts, sol, form)
    sig = field.sigma[n]
    return {"r": r, "eT": e * T, "q": sig - e * T, "sigma": sig, "theta": sig / r}


def snapshot_csv(path, field, n, fronts, sol, params=DEFAULT_PARAMS):
    comp = assemble_temperature(field, n, fronts, sol, params)
    u = order_function(field.r, field.t[n], field.eps, fronts, sol, derivatives=False)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("r", "u", "T", "q", "sigma", "theta"))
        for i in range(field.r.size):
            w.writerow([f"{x:.16e}" for x in (field.r[i], u[i], comp["eT"][i], comp["q"][i],
                                              comp["sigma"][i], comp["theta"][i])])


# -------------------------------------------------------- temperature jump

def temperature_jump(fronts, sol, eps=1e-7, tau_plateau=(15.0, 20.0), params=DEFAULT_PARAMS,
                     plateau_tol=1e-5):
    """Closed-form jump -(r*/4)(v1^2 + v2^2) and the measured plateau difference.

    The measured value is the difference of (e I)/r at the front midpoint
    (where I = (k1 - k2)/2) between the tau -> -inf and tau -> +inf
    plateaus, sampled at the two ``tau_plateau`` magnitudes on either side
    of contact.  A small ``eps`` keeps the O(eps tau) drift of the
    regularised fronts below ``plateau_tol``.
    """
    v1, v2 = fronts.v_minus
    r_star = fronts.r_star
    formula = -0.25 * r_star * (v1 ** 2 + v2 ** 2)
    rate = abs(v2 - v1)

    def value(t):
        r1, r2, r1t, r2t, _, gam, psi = _front_state(t, eps, fronts, sol)
        c = model_coefficients(r1, r2, r1t, r2t, gam, fronts.kappa, psi)
        return float(cutoff_e(c["r_mid"], params)) * c["I"][0] / c["r_mid"]

    def plateau(sign):
        vals = [value(fronts.t_star - sign * tp * eps / rate) for tp in tau_plateau]
        if abs(vals[1] - vals[0]) > plateau_tol * max(1.0, abs(vals[1])):
            raise AnsatzError("plateaus not converged; widen the tau range")
        return vals[1]

    before, after = plateau(+1.0), plateau(-1.0)
    return {"formula_value": float(formula), "measured_value": float(after - before),
            "plateau_before": before, "plateau_after": after}
