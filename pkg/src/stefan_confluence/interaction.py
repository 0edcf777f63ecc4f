"""Closure system for the interaction phase on a tau grid.

The eta equation ``eta (1 + tanh eta) = 2 beta(eta) A(tau)`` is solved
node by node; beta, rho = eta / beta and the two phase-shift functions
follow.  The phase difference is stored as ``tau d(tau)`` and the phase
sum as ``tau s(tau, t)``: both are regular at tau = 0, whereas ``d`` and
``s`` themselves carry a 1/tau factor.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import solve_bracketed
from .profiles import switch_antiderivative, switch_B, switch_B_prime


class InteractionError(RuntimeError):
    pass


def _g(eta):
    return eta * (1.0 + np.tanh(eta))


def _g_prime(eta):
    return 1.0 + np.tanh(eta) + eta / np.cosh(np.minimum(eta, 350.0)) ** 2


def _invert_g(target, hi, iters=200):
    """Vectorised bisection for g(eta) = target on [0, hi] (g is increasing)."""
    lo = np.zeros_like(target)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = _g(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def _beta_max(table):
    grid = np.append(table.eta_grid[table.eta_grid >= 0], 0.0)
    return float(np.max(table("beta", grid))) * (1.0 + 1e-6)


def solve_eta(tau, table, steepness=1.0, damping=0.7, max_sweeps=100, tol=1e-13):
    """eta(tau) from eta (1 + tanh eta) = 2 beta(eta) A(tau), vectorised.

    A damped fixed point on beta wraps an exact inversion of the monotone
    left-hand side; a final bracketed bisection on the full equation
    polishes every node.  Since g(eta) >= eta, the root lies in
    ``[0, 2 beta_max A]``, which gives relative accuracy even where
    A(tau) ~ exp(2 tau) is tiny.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    a = switch_antiderivative(tau, steepness)
    bmax = _beta_max(table)
    hi = 2.0 * bmax * a * (1.0 + 1e-12) + 1e-300
    beta = np.full_like(tau, table("beta", 0.0))
    eta = np.zeros_like(tau)
    for sweep in range(max_sweeps):
        eta = _invert_g(2.0 * beta * a, hi)
        new_beta = table("beta", eta)
        change = np.max(np.abs(new_beta - beta))
        beta = (1.0 - damping) * beta + damping * new_beta
        if change < tol:
            break
    else:
        raise InteractionError(f"beta fixed point did not contract after {max_sweeps} sweeps; "
                               f"last change {change:.3e}")
    lo = np.zeros_like(tau)
    h = lambda x: _g(x) - 2.0 * table("beta", x) * a
    # bracketed polish of the full equation (h increasing in eta for eta >= 0)
    lo = np.maximum(lo, eta * (1.0 - 1e-6))
    up = np.minimum(hi, eta * (1.0 + 1e-6) + 1e-300)
    bad = (h(lo) > 0) | (h(up) < 0)
    lo, up = np.where(bad, 0.0, lo), np.where(bad, hi, up)
    for _ in range(200):
        mid = 0.5 * (lo + up)
        neg = h(mid) < 0
        lo, up = np.where(neg, mid, lo), np.where(neg, up, mid)
        if np.all(up - lo <= 4e-16 * np.maximum(up, 1e-300)):
            break
    return 0.5 * (lo + up)


def solve_eta_node(tau, table, steepness=1.0):
    """Scalar eta(tau) by Brent's method on the full equation (reference path)."""
    a = float(switch_antiderivative(tau, steepness))
    hi = 2.0 * _beta_max(table) * a * (1.0 + 1e-12) + 1e-300
    h = lambda x: float(_g(x) - 2.0 * table("beta", x) * a)
    return solve_bracketed(h, 0.0, hi, tol=max(1e-300, 1e-15 * hi))


def eta_residual(eta, tau, table, steepness=1.0):
    """|eta (1 + tanh eta) - 2 beta(eta) A(tau)| pointwise."""
    return np.abs(_g(eta) - 2.0 * table("beta", eta) * switch_antiderivative(tau, steepness))


def interaction_state(tau, table, steepness=1.0):
    """eta, beta, rho and their tau-derivatives, plus the phase-sum kernel k.

    ``k = (beta_tau / beta^2) Bz_Omega / (B_Omega + C_Omega)``.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    eta = solve_eta(tau, table, steepness)
    a = switch_antiderivative(tau, steepness)
    b = switch_B(tau, steepness)
    beta = table("beta", eta)
    beta_eta = table("beta", eta, 1)
    eta_tau = 2.0 * beta * b / (_g_prime(eta) - 2.0 * beta_eta * a)
    beta_tau = beta_eta * eta_tau
    rho = eta / beta
    rho_tau = eta_tau / beta - eta * beta_tau / beta ** 2
    denom = table("B_Omega", eta) + table("C_Omega", eta)
    if np.any(np.abs(denom) < 1e-12):
        raise InteractionError("B_Omega + C_Omega below floor; table is inconsistent")
    k = beta_tau / beta ** 2 * table("Bz_Omega", eta) / denom
    return {"tau": tau, "eta": eta, "eta_tau": eta_tau, "beta": beta, "beta_tau": beta_tau,
            "rho": rho, "rho_tau": rho_tau, "k": k, "A": a, "B": b}


def tau_grid(tau_min=-200.0, tau_max=200.0, n_nodes=40000):
    """Uniform grid with an even node count, so tau = 0 is never a node."""
    if n_nodes % 2:
        n_nodes += 1
    return np.linspace(tau_min, tau_max, n_nodes)


@dataclass(frozen=True)
class InteractionSolution:
    tau_grid: np.ndarray
    state: dict
    L: float
    table: object = field(repr=False)
    tau_s2_spline: CubicSpline = field(repr=False)
    steepness: float = 1.0

    @property
    def tau_min(self):
        return float(self.tau_grid[0])

    @property
    def tau_max(self):
        return float(self.tau_grid[-1])

    def check_range(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < self.tau_min) or np.any(tau > self.tau_max):
            raise InteractionError(
                f"tau outside solved grid [{self.tau_min}, {self.tau_max}] "
                f"(requested {np.min(tau):.3g}..{np.max(tau):.3g}); extend the grid")

    def tau_d(self, tau):
        """tau d(tau) = rho - tau - L."""
        st = self.eval(tau)
        return st["rho"] - st["tau"] - self.L

    def d(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau == 0):
            raise InteractionError("d has a pole at tau = 0 since rho(0) != 0; use tau_d")
        return self.tau_d(tau) / tau

    def tau_s2(self, tau, nu=0):
        """tau S2(tau) = 2 int_0^tau k, or its tau-derivative (nu=1, equals 2k)."""
        self.check_range(tau)
        return self.tau_s2_spline(np.asarray(tau, dtype=float), nu)

    def switch_W(self, tau, nu=0):
        """Switch multiplying the velocity-sum term: W = 1 - B."""
        if nu == 0:
            return 1.0 - switch_B(tau, self.steepness)
        return -switch_B_prime(tau, self.steepness)

    def tau_s(self, tau, c):
        """tau s(tau, t) for the velocity coefficient c = -(r10t + r20t)/psi0'."""
        tau = np.asarray(tau, dtype=float)
        return c * tau * self.switch_W(tau) + self.tau_s2(tau)

    def eval(self, tau):
        self.check_range(tau)
        return interaction_state(tau, self.table, self.steepness)


def solve_interaction(table, tau_min=-200.0, tau_max=200.0, n_nodes=40000, steepness=1.0,
                      drift_tol=1e-8):
    """Full interaction solution on a uniform tau grid."""
    grid = tau_grid(tau_min, tau_max, n_nodes)
    st = interaction_state(grid, table, steepness)
    lim = st["rho"] - grid
    i90 = int(np.searchsorted(grid, 0.9 * tau_max))
    L = float(lim[-1])
    if abs(lim[i90] - L) > drift_tol:
        raise InteractionError(f"rho - tau still drifting at tau_max ({lim[i90]:.3e} vs "
                               f"{L:.3e}); increase tau_max")
    spline_k = CubicSpline(grid, 2.0 * st["k"])
    anti = spline_k.antiderivative()
    tau_s2 = anti(grid) - anti(0.0)
    s2 = CubicSpline(grid, tau_s2)
    return InteractionSolution(grid, st, L, table, s2, steepness)


def phase_difference(sol, tau):
    """d(tau) on nodes away from tau = 0."""
    return sol.d(tau)


@dataclass(frozen=True)
class FrontPair:
    r1: np.ndarray
    r2: np.ndarray
    r1t: np.ndarray
    r2t: np.ndarray
    tau: np.ndarray
    psi: np.ndarray


def front_positions(t, eps, fronts, sol):
    """Regularised fronts r_i(t, eps) and their analytic velocities.

    ``fronts`` supplies ``r0(t)``, ``r0_t(t)`` and ``r0_tt(t)`` as pairs of
    arrays for the continued fronts.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r10, r20 = fronts.r0(t)
    v10, v20 = fronts.r0_t(t)
    a10, a20 = fronts.r0_tt(t)
    psi0 = r20 - r10
    dpsi0, ddpsi0 = v20 - v10, a20 - a10
    if np.any(dpsi0 == 0):
        raise InteractionError("psi0' vanishes; continued fronts must keep approaching")
    tau = psi0 / eps
    sol.check_range(tau)
    st = sol.eval(tau)
    c = -(v10 + v20) / dpsi0
    dc = -((a10 + a20) * dpsi0 - (v10 + v20) * ddpsi0) / dpsi0 ** 2
    w, dw = sol.switch_W(tau), sol.switch_W(tau, 1)
    tau_s = c * tau * w + sol.tau_s2(tau)
    tau_d = st["rho"] - tau - sol.L
    d_tau_s = c * (w + tau * dw) + sol.tau_s2(tau, 1)
    d_tau_d = st["rho_tau"] - 1.0
    r1 = r10 + 0.5 * eps * (tau_s - tau_d)
    r2 = r20 + 0.5 * eps * (tau_s + tau_d)
    extra = 0.5 * eps * tau * dc * w
    r1t = v10 + 0.5 * dpsi0 * (d_tau_s - d_tau_d) + extra
    r2t = v20 + 0.5 * dpsi0 * (d_tau_s + d_tau_d) + extra
    # psi = r2 - r1 = eps (rho - L), formed without cancellation
    return FrontPair(r1, r2, r1t, r2t, tau, eps * (st["rho"] - sol.L))


def velocity_sum_at_contact(fronts, sol, eps, t_grid=None):
    """r1t + r2t at the post-contact grid time where eta is closest to 0.

    eta reaches 0 only as tau -> -inf, so the node with the smallest eta
    among the admissible grid times (tau inside the solved grid) is used.
    Returns ``(value, t_used, eta_used)``.
    """
    if t_grid is None:
        t_grid = fronts.t_grid
    t_grid = np.asarray(t_grid, dtype=float)
    r10, r20 = fronts.r0(t_grid)
    tau = (r20 - r10) / eps
    ok = (tau >= sol.tau_min) & (tau <= sol.tau_max) & (t_grid > fronts.t_star)
    if not np.any(ok):
        raise InteractionError("no admissible post-contact grid time inside the tau grid")
    cand = t_grid[ok]
    eta = solve_eta(tau[ok], sol.table, sol.steepness)
    i = int(np.argmin(eta))
    fp = front_positions(cand[i], eps, fronts, sol)
    return float(fp.r1t[0] + fp.r2t[0]), float(cand[i]), float(eta[i])


def export_csv(sol, path, c=0.0, stride=1):
    """Columns tau, eta, beta, rho, s, d, W, S2 (s and d are undefined at tau=0)."""
    st = sol.state
    grid = sol.tau_grid
    tau_s2 = sol.tau_s2(grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("tau", "eta", "beta", "rho", "s", "d", "W", "S2"))
        for i in range(0, grid.size, stride):
            tau = grid[i]
            d = (st["rho"][i] - tau - sol.L) / tau
            s2 = tau_s2[i] / tau
            w = float(sol.switch_W(tau))
            writer.writerow([f"{v:.16e}" for v in (tau, st["eta"][i], st["beta"][i],
                                                    st["rho"][i], c * w + s2, d, w, s2)])


def summary(sol, velocity_sum=None):
    """JSON-ready summary: d(-inf) estimate, L, asymptotic eta/tau ratios."""
    st = sol.state
    grid = sol.tau_grid
    d_minus = float((st["rho"][0] - grid[0] - sol.L) / grid[0])
    ratio = float(st["eta"][-1] / grid[-1])
    out = {"L": sol.L, "d_minus_inf": d_minus, "tau_min": sol.tau_min, "tau_max": sol.tau_max,
           "eta_over_tau_at_tau_max": ratio, "beta_at_tau_max": float(st["beta"][-1]),
           "eta_over_tau_expected_value": 1.0}
    if velocity_sum is not None:
        out["velocity_sum_at_contact"] = velocity_sum
    return json.loads(json.dumps(out))
