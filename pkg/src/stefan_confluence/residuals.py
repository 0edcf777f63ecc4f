"""Weak residuals of the phase-field system for the assembled fields,
delta-coefficient traces, epsilon sweeps and the mollified-Heaviside
example suite.

Residual integrals use Gauss-Legendre rules on the cells of the field
grid, so piecewise-linear temperatures are integrated exactly.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import numerics
from .ansatz import order_function, solve_correction
from .interaction import front_positions
from .profiles import POLY_BUMP_INTEGRAL, double_well, omega0_dot, poly_bump, switch_B


class ResidualError(RuntimeError):
    pass


# ------------------------------------------------------------ test functions

@dataclass(frozen=True)
class TestFunction:
    center: float
    half_width: float
    scale: float = 1.0

    def __call__(self, r):
        v, _ = poly_bump((np.asarray(r, dtype=float) - self.center) / self.half_width)
        return self.scale * v

    def derivative(self, r):
        _, d = poly_bump((np.asarray(r, dtype=float) - self.center) / self.half_width)
        return self.scale * d / self.half_width

    @property
    def support(self):
        return self.center - self.half_width, self.center + self.half_width

    def integral(self):
        return self.scale * self.half_width * POLY_BUMP_INTEGRAL


def test_function_set(domain=(1.0, 3.0), n=9, widths=(0.25, 0.4, 0.6), seed=0, margin=0.05):
    """``n`` bumps with centres spread over the domain and seeded jitter."""
    if n < 8:
        raise ValueError("need at least 8 test functions")
    rng = np.random.default_rng(seed)
    R1, R2 = domain
    out = []
    for k in range(n):
        w = widths[k % len(widths)]
        lo, hi = R1 + w + margin, R2 - w - margin
        c = lo + (hi - lo) * (k + 0.5) / n + rng.uniform(-0.25, 0.25) * (hi - lo) / n
        out.append(TestFunction(float(np.clip(c, lo, hi)), float(w)))
    return out


# ------------------------------------------------------------------ fields

@dataclass(frozen=True)
class FieldValues:
    eps: float
    breaks: np.ndarray
    evaluate: object  # x -> dict(u, u_r, u_t, sigma, sigma_r, sigma_t)


def ansatz_fields(field, n, fronts, sol):
    """Fields at time level ``n`` of a correction solve: u from the order
    function, sigma piecewise linear in r with a 4th-order time derivative."""
    t = field.t[n]
    eps = field.eps
    sig, sig_t = field.sigma[n], field.time_derivative(n)
    grad = field.gradient(n)
    r = field.r

    def evaluate(x):
        u, u_r, u_t = order_function(x, t, eps, fronts, sol)
        j = np.clip(np.searchsorted(r, x, side="right") - 1, 0, r.size - 2)
        return {"u": u, "u_r": u_r, "u_t": u_t, "sigma": np.interp(x, r, sig),
                "sigma_r": grad[j], "sigma_t": np.interp(x, r, sig_t)}
    return FieldValues(eps, r, evaluate)


def _rule(fields, test, order=4):
    a, b = test.support
    br = fields.breaks
    inner = br[(br > a) & (br < b)]
    cell = float(np.min(np.diff(br))) if br.size > 1 else (b - a)
    return numerics.gauss_legendre_breaks(np.concatenate([[a, b], inner]), cell, order)


def weak_residual_heat(fields, zeta):
    """int (r u_t + sigma_t) r^2 zeta + int sigma_r (r^2 zeta)_r, with terms."""
    x, w = _rule(fields, zeta)
    f = fields.evaluate(x)
    z, dz = zeta(x), zeta.derivative(x)
    d_r2z = 2.0 * x * z + x * x * dz
    terms = {"r_u_t": float(np.dot(w, x * f["u_t"] * x * x * z)),
             "sigma_t": float(np.dot(w, f["sigma_t"] * x * x * z)),
             "sigma_r": float(np.dot(w, f["sigma_r"] * d_r2z))}
    terms["total"] = sum(terms.values())
    return terms


def weak_residual_ac(fields, xi, signs="printed"):
    """The five terms T1..T5 of the Allen-Cahn weak form and their sum.

    ``signs="printed"``: T1 = eps int u_r u_t xi, T2 = +2 eps int r u_r^2 xi,
    T3 = -(eps/2) int u_r^2 (r^2 xi)_r, T4 = -(1/eps) int F(u) (r^2 xi)_r,
    T5 = int u (r sigma xi)_r.  ``signs="derived"`` gives the identity
    obtained by testing the radial equation with r^2 u_r xi: T1 carries
    r^2 and T2, T3 change sign, so a kink at equipartition gives zero.
    """
    if signs not in ("printed", "derived"):
        raise ValueError(f"unknown signs: {signs}")
    x, w = _rule(fields, xi)
    f = fields.evaluate(x)
    eps = fields.eps
    z, dz = xi(x), xi.derivative(x)
    d_r2z = 2.0 * x * z + x * x * dz
    d_rsz = f["sigma"] * z + x * f["sigma_r"] * z + x * f["sigma"] * dz
    flip = 1.0 if signs == "printed" else -1.0
    t1_weight = z if signs == "printed" else x * x * z
    terms = {"T1": eps * float(np.dot(w, f["u_r"] * f["u_t"] * t1_weight)),
             "T2": flip * 2.0 * eps * float(np.dot(w, x * f["u_r"] ** 2 * z)),
             "T3": -flip * 0.5 * eps * float(np.dot(w, f["u_r"] ** 2 * d_r2z)),
             "T4": -float(np.dot(w, double_well(f["u"]) * d_r2z)) / eps,
             "T5": float(np.dot(w, f["u"] * d_rsz))}
    terms["total"] = sum(terms.values())
    return terms


# ------------------------------------------------------ delta coefficients

def _inner_times(fronts, eps, tau):
    """Times with psi0(t) = eps tau near contact (linearised about t*)."""
    v1, v2 = fronts.v_minus
    return fronts.t_star + eps * np.asarray(tau, dtype=float) / (v2 - v1)


def delta_coefficient_check(fronts, sol, tau, eps=1e-6, q_diff=None):
    """Traces J_1, J_2 and the velocity-sum expression over ``tau``.

    J_i = B (gamma_i^+ + gamma_i^-) - A_i with
    A_i = (r_i^3 / 2)[(-1)^(i+1) r_it (2 - B_dot0) + beta_tau psi0' Bz_dot0 / beta^2].
    ``Vsum`` is the full velocity-sum expression; ``Vsum_kinematic`` keeps
    only (r1t + r2t)(B_Omega + C_Omega) - 2 beta_tau psi0' Bz_Omega / beta^2.
    ``q_diff(t)`` supplies q/r at r1 minus q/r at r2; without it that term
    is left out and reported as omitted.
    """
    tau = np.asarray(tau, dtype=float)
    t = _inner_times(fronts, eps, tau)
    fp = front_positions(t, eps, fronts, sol)
    st = sol.eval(fp.tau)
    table = sol.table
    eta, beta, beta_tau = st["eta"], st["beta"], st["beta_tau"]
    v10, v20 = fronts.r0_t(t)
    dpsi0 = v20 - v10
    b = switch_B(fp.tau, sol.steepness)
    g = fronts.gammas(t)
    bdot, bzdot = table("B_dot0", eta), table("Bz_dot0", eta)
    common = beta_tau * dpsi0 * bzdot / beta ** 2
    a1 = 0.5 * fp.r1 ** 3 * (fp.r1t * (2.0 - bdot) + common)
    a2 = 0.5 * fp.r2 ** 3 * (-fp.r2t * (2.0 - bdot) + common)
    j1 = b * (g["g1p"] + g["g1m"]) - a1
    j2 = b * (g["g2p"] + g["g2m"]) - a2
    b_om, c_om = table("B_Omega", eta), table("C_Omega", eta)
    c_hat, bz_om = table("C_hat", eta), table("Bz_Omega", eta)
    kin = (fp.r1t + fp.r2t) * (b_om + c_om) - 2.0 * beta_tau * dpsi0 * bz_om / beta ** 2
    rest = (1.0 / fp.r1 + 1.0 / fp.r2) * (fronts.kappa[1] * c_om - c_hat)
    q_term = q_diff(t) * c_om if q_diff is not None else np.zeros_like(t)
    return {"tau": tau, "t": t, "eta": eta, "J1": j1, "J2": j2, "Vsum": kin + q_term + rest,
            "Vsum_kinematic": kin, "q_term_included": q_diff is not None,
            "J1_limit": -fronts.r0(t)[0] ** 3 * v10, "J2_limit": fronts.r0(t)[1] ** 3 * v20}


# ------------------------------------------------------------------ sweeps

def residual_maxima(fields_at, levels, tests):
    """Max |heat| and |ac| residual over time levels and tests, with the
    per-term breakdown at the maximising cell.  ``ac_derived`` uses the
    derived sign convention of :func:`weak_residual_ac`."""
    best = {"heat": (-1.0, None), "ac": (-1.0, None), "ac_derived": (-1.0, None)}
    cells = {}
    for n in levels:
        fields = fields_at(n)
        for k, z in enumerate(tests):
            res = {"heat": weak_residual_heat(fields, z), "ac": weak_residual_ac(fields, z),
                   "ac_derived": weak_residual_ac(fields, z, signs="derived")}
            cells[(int(n), k)] = res
            for key, terms in res.items():
                if abs(terms["total"]) > best[key][0]:
                    best[key] = (abs(terms["total"]), (int(n), k, terms))
    return best, cells


def _dominant(terms):
    keys = [k for k in terms if k != "total"]
    return max(keys, key=lambda k: abs(terms[k]))


def residual_cell(fronts, sol, eps, tests, time_fractions=(0.2, 0.4, 0.6, 0.8), field=None):
    """Residual maxima for one eps (solving the correction unless ``field`` is given)."""
    field = solve_correction(fronts, sol, eps) if field is None else field
    levels = sorted({int(np.argmin(np.abs(field.t - f * field.t[-1])))
                     for f in time_fractions})
    best, cells = residual_maxima(lambda n: ansatz_fields(field, n, fronts, sol), levels,
                                  tests)
    out = {"status": "ok", "times": [float(field.t[n]) for n in levels]}
    for key in ("heat", "ac", "ac_derived"):
        n, k, terms = best[key][1]
        out[f"{key}_max"] = best[key][0]
        out[f"{key}_terms"] = terms
        out[f"{key}_dominant"] = _dominant(terms)
        out[f"{key}_argmax"] = {"t": float(field.t[n]), "test": k}
    return out


def fit_report(eps_list, per_eps):
    """Slopes and monotonicity flags from per-eps cells (failed cells skipped)."""
    ok = sorted(e for e in eps_list if per_eps[e]["status"] == "ok")
    report = {"eps": list(eps_list), "per_eps": per_eps,
              "failed": [e for e in eps_list if per_eps[e]["status"] != "ok"]}
    for key in ("heat", "ac", "ac_derived"):
        vals = [per_eps[e][f"{key}_max"] for e in ok]
        pts = [(e, v) for e, v in zip(ok, vals) if v > 0]
        report[f"{key}_slope"] = numerics.fit_loglog_slope(pts)[0] if len(pts) >= 3 else None
        report[f"{key}_monotone"] = bool(len(ok) == len(eps_list) and
                                         all(np.diff(np.array(vals)) > 0))
    return report


def _check_eps_list(eps_list):
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("need at least 3 eps values")
    ratios = np.array(eps_list[1:]) / np.array(eps_list[:-1])
    if not np.allclose(ratios, ratios[0], rtol=0.05):
        raise ValueError("eps values must be (approximately) geometric")
    return eps_list


def sweep_and_fit(fronts, sol, eps_list, tests, time_fractions=(0.2, 0.4, 0.6, 0.8)):
    """Residual maxima per eps and log-log slopes (report dict).

    ``heat_monotone`` / ``ac_monotone`` state that the maxima decrease
    strictly with eps.  A failing eps is recorded and skipped.
    """
    eps_list = _check_eps_list(eps_list)
    per_eps = {}
    for eps in eps_list:
        try:
            per_eps[eps] = residual_cell(fronts, sol, eps, tests, time_fractions)
        except Exception as err:  # recorded, not fatal
            per_eps[eps] = {"status": "failed", "error": f"{type(err).__name__}: {err}"}
    return fit_report(eps_list, per_eps)


def planted_slope(eps_list, amplitude=2.0, domain=(1.0, 3.0)):
    """Slope fitted to heat residuals of synthetic fields.

    u is constant and sigma = amplitude eps r^2, so the heat residual is
    -2 amplitude eps int r^2 zeta, exactly proportional to eps.
    """
    zeta = TestFunction(0.5 * (domain[0] + domain[1]), 0.4)
    breaks = np.linspace(domain[0], domain[1], 201)
    pts = []
    for eps in eps_list:
        def evaluate(x, eps=eps):
            one = np.ones_like(x)
            zero = np.zeros_like(x)
            return {"u": one, "u_r": zero, "u_t": zero, "sigma": amplitude * eps * x ** 2,
                    "sigma_r": amplitude * eps * 2 * x, "sigma_t": zero}
        val = weak_residual_heat(FieldValues(eps, breaks, evaluate), zeta)["total"]
        pts.append((eps, abs(val)))
    return numerics.fit_loglog_slope(pts)[0], pts


# ------------------------------------------------------------ example suite

_ZETA = TestFunction(0.2, 1.0)
_X0 = 0.0


def _rule_near(points, eps, lo=-0.8, hi=1.2):
    """Gauss-Legendre rule on the support of the suite's test function."""
    pts = [p for p in points if lo < p < hi]
    return numerics.gauss_legendre_breaks([lo, hi] + pts, max(eps, 1e-9) / 4.0, 8)


def _step1(z):
    return expit(2.0 * z)


def _step2(z):
    return expit(z)


def _kernel_asym(z):
    """sech^2(z)(1 + tanh z)/2: unit mass, nonzero first moment."""
    return 0.5 * omega0_dot(z) * (1.0 + np.tanh(z))


def switch_coefficient(rho, w1=_step1, w2=_step2, dw1=None):
    """B_1(rho) = int w1'(z) w2(z + rho) dz for smooth steps w1, w2."""
    if dw1 is None:
        dw1 = lambda z: 2.0 * _step1(z) * (1.0 - _step1(z))
    return numerics.integrate_line(lambda z: float(dw1(z) * w2(z + rho)))


def example1(eps):
    x, w = _rule_near([_X0], eps)
    return float(np.dot(w, _kernel_asym((x - _X0) / eps) / eps * _ZETA(x))) - float(_ZETA(_X0))


def example2a(eps):
    x, w = _rule_near([_X0], eps)
    return float(np.dot(w, (_step1((x - _X0) / eps) - (x >= _X0)) * _ZETA(x)))


def example2b(eps, rho=0.7):
    x1, x2 = _X0 + rho * eps, _X0
    b1 = switch_coefficient(rho)
    x, w = _rule_near([x1, x2], eps)
    prod = _step1((x - x1) / eps) * _step2((x - x2) / eps)
    lin = b1 * (x >= x1) + (1.0 - b1) * (x >= x2)
    return float(np.dot(w, (prod - lin) * _ZETA(x)))


def example3(eps, rho=0.7):
    x1, x2 = _X0 + rho * eps, _X0
    b = switch_coefficient(rho)
    x, w = _rule_near([x1, x2], eps)
    prod = (x >= x1) * (x >= x2)
    lin = b * (x >= x1) + (1.0 - b) * (x >= x2)
    return float(np.dot(w, (prod - lin) * _ZETA(x)))


def example4(eps):
    """<(d/dx) f_eps, zeta> for f_eps = step((x - x0)/eps) - H(x - x0), computed
    directly and by moving the derivative onto zeta; returns (direct, moved)."""
    x, w = _rule_near([_X0], eps)
    s = _step1((x - _X0) / eps)
    direct = float(np.dot(w, 2.0 * s * (1.0 - s) / eps * _ZETA(x))) - float(_ZETA(_X0))
    moved = -float(np.dot(w, (s - (x >= _X0)) * _ZETA.derivative(x)))
    return direct, moved


def lemma2_pair(eps, rho=0.7, strength=3.0):
    """<S delta(x - x1) - S delta(x - x2), zeta> with x1 - x2 = rho eps."""
    return strength * float(_ZETA(_X0 + rho * eps) - _ZETA(_X0))


def example_suite(eps_list=(0.04, 0.02, 0.01, 0.005)):
    """Measured orders of all examples by eps-halving."""
    cases = {"example1": example1, "example2a": example2a, "example2b": example2b,
             "example3": example3, "example4": lambda e: example4(e)[0],
             "lemma2_pair": lemma2_pair}
    out = {}
    for name, fn in cases.items():
        pts = [(e, abs(fn(e))) for e in eps_list]
        slope, _, rms = numerics.fit_loglog_slope(pts)
        out[name] = {"order": slope, "rms": rms, "values": [p[1] for p in pts]}
    gap = max(abs(example4(e)[0] - example4(e)[1]) for e in eps_list)
    out["example4"]["moved_vs_direct"] = gap
    return out
