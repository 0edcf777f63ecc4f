"""Finite-difference solver for the radially symmetric phase-field system

    u_t = (1/r^2)(r^2 u_r)_r + (u - u^3)/eps^2 + sigma/(eps r),
    sigma_t - sigma_rr = -r u_t,

with homogeneous Neumann data for u and Dirichlet data for sigma.

Nodes r_i = R1 + i h.  The u-equation uses a conservative finite-volume
Laplacian with masses w_i r_i^2 (w_i = h, halved at the ends); the
reaction is treated semi-implicitly with a stabilising shift S/eps^2,
which makes the discrete energy nonincreasing for S >= 2 when
sigma = 0.  The sigma-equation is backward Euler and uses the updated u.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .profiles import double_well


class PhaseFieldError(RuntimeError):
    pass


@dataclass(frozen=True)
class PDEState:
    r: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    t: float
    eps: float
    boundary: tuple = (0.0, 0.0)
    stabilization: float = 2.0
    steps: int = 0

    @property
    def h(self):
        return float(self.r[1] - self.r[0])

    def __post_init__(self):
        if self.h > self.eps / 8.0 * (1 + 1e-9):
            raise PhaseFieldError(f"grid spacing {self.h:.3g} exceeds eps/8 = {self.eps / 8:.3g}")


def radial_grid(domain, eps, cells_per_eps=8):
    R1, R2 = domain
    n = int(np.ceil((R2 - R1) * cells_per_eps / eps))
    return np.linspace(R1, R2, n + 1)


def _masses(r):
    h = r[1] - r[0]
    w = np.full(r.size, h)
    w[0] = w[-1] = 0.5 * h
    return w * r * r


def _face_r2(r):
    mid = 0.5 * (r[1:] + r[:-1])
    return mid * mid


def _bvals(boundary, t):
    return tuple(float(b(t)) if callable(b) else float(b) for b in boundary)


def stability_bound(state):
    """Step size below which the explicit reaction part stays accurate.

    The scheme is energy stable for any dt when sigma = 0; the reported
    bound eps^2 / 2 is the reaction time scale used to choose dt.
    """
    return 0.5 * state.eps ** 2


def step_phasefield(state, dt, forcing=None, couple=True):
    """One IMEX step; ``forcing(r, t) -> (f_u, f_sigma)`` adds manufactured terms.

    With ``couple=False`` sigma is held fixed and drops out of the u-equation
    (decoupled Allen-Cahn).
    """
    r, u, sig, eps = state.r, state.u, state.sigma, state.eps
    h = state.h
    t_new = state.t + dt
    m = _masses(r)
    a = _face_r2(r) / h
    s = state.stabilization / eps ** 2
    n = r.size
    # u: (m/dt + m s) u' - div = m (u/dt + s u + f(u)/eps^2 + sigma/(eps r))
    ab = np.zeros((3, n))
    ab[1] = m / dt + m * s
    ab[1, :-1] += a
    ab[1, 1:] += a
    ab[0, 1:] = -a
    ab[2, :-1] = -a
    reaction = (u - u ** 3) / eps ** 2
    if couple:
        reaction = reaction + sig / (eps * r)
    rhs = m * (u / dt + s * u + reaction)
    fu = fs = 0.0
    if forcing is not None:
        fu, fs = forcing(r, t_new)
        rhs = rhs + m * fu
    u_new = solve_banded((1, 1), ab, rhs, check_finite=False)
    if couple:
        bl, br = _bvals(state.boundary, t_new)
        k = 1.0 / h ** 2
        ab = np.zeros((3, n))
        ab[1] = 1.0 / dt + 2.0 * k
        ab[0, 1:] = -k
        ab[2, :-1] = -k
        rhs = sig / dt - r * (u_new - u) / dt + fs
        rhs[1] += k * bl
        rhs[-2] += k * br
        ab[1, 0] = ab[1, -1] = 1.0
        ab[0, 1] = ab[2, -2] = 0.0
        ab[2, 0] = ab[0, -1] = 0.0
        rhs[0], rhs[-1] = bl, br
        sig_new = solve_banded((1, 1), ab, rhs, check_finite=False)
    else:
        sig_new = sig
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(sig_new))):
        raise PhaseFieldError(f"non-finite values at step {state.steps + 1}, t={t_new:.6g}, "
                              f"dt={dt:.3g}")
    if np.max(np.abs(u_new)) > 10.0:
        raise PhaseFieldError(f"blow-up detected at step {state.steps + 1}, t={t_new:.6g}: "
                              f"max|u|={np.max(np.abs(u_new)):.3g}")
    return replace(state, u=u_new, sigma=sig_new, t=t_new, steps=state.steps + 1)


def energy(state):
    """E_h = sum (eps/2) r_{i+1/2}^2 (du)^2 / h + sum w_i r_i^2 F(u_i) / eps."""
    du = np.diff(state.u)
    grad = 0.5 * state.eps * np.sum(_face_r2(state.r) * du * du) / state.h
    return float(grad + np.sum(_masses(state.r) * double_well(state.u)) / state.eps)


def conservation_defect(before, after):
    """Discrete balance for the sigma-equation over one step.

    Returns d/dt sum_interior h (sigma + r u) minus the discrete boundary
    fluxes (sigma_N - sigma_{N-1})/h - (sigma_1 - sigma_0)/h at the new level.
    """
    h, r = after.h, after.r
    dt = after.t - before.t
    total = lambda s: h * np.sum(s.sigma[1:-1] + r[1:-1] * s.u[1:-1])
    s = after.sigma
    flux = (s[-1] - s[-2]) / h - (s[1] - s[0]) / h
    return float((total(after) - total(before)) / dt - flux)


def run_phasefield(state, t_end, dt, forcing=None, couple=True, record_every=1,
                   callback=None):
    """March to ``t_end``; returns the list of recorded states (first included)."""
    hist = [state]
    st = state
    n = int(np.ceil((t_end - state.t) / dt - 1e-9))
    step = (t_end - state.t) / n if n else dt
    for k in range(n):
        st = step_phasefield(st, step, forcing, couple)
        if callback is not None:
            callback(st)
        if (k + 1) % record_every == 0 or k == n - 1:
            hist.append(st)
    return hist


# ---------------------------------------------------------- manufactured

def manufactured_solution(domain=(1.0, 3.0), eps=0.1):
    """Smooth exact pair and the matching forcing.

    u = 0.5 cos(pi x) e^-t, sigma = sin(pi x) e^-t with x = (r - R1)/(R2 - R1);
    u satisfies the Neumann and sigma the zero Dirichlet conditions.
    """
    R1, R2 = domain
    k = np.pi / (R2 - R1)

    def exact(r, t):
        x = k * (r - R1)
        return 0.5 * np.cos(x) * np.exp(-t), np.sin(x) * np.exp(-t)

    def forcing(r, t):
        x = k * (r - R1)
        e = np.exp(-t)
        u = 0.5 * np.cos(x) * e
        u_t = -u
        u_r = -0.5 * k * np.sin(x) * e
        u_rr = -k * k * u
        lap = u_rr + 2.0 * u_r / r
        sig = np.sin(x) * e
        sig_t = -sig
        sig_rr = -k * k * sig
        fu = u_t - lap - (u - u ** 3) / eps ** 2 - sig / (eps * r)
        fs = sig_t - sig_rr + r * u_t
        return fu, fs

    return exact, forcing


def mms_errors(n_list=(160, 320, 640), eps=0.1, t_end=0.1, domain=(1.0, 3.0), dt_scale=0.5):
    """Max-norm errors of u and sigma at ``t_end`` with dt = dt_scale h^2."""
    exact, forcing = manufactured_solution(domain, eps)
    out = []
    for n in n_list:
        r = np.linspace(domain[0], domain[1], n + 1)
        h = r[1] - r[0]
        u0, s0 = exact(r, 0.0)
        st = PDEState(r, u0, s0, 0.0, eps)
        dt = dt_scale * h * h
        hist = run_phasefield(st, t_end, dt, forcing, record_every=10 ** 9)
        ue, se = exact(r, hist[-1].t)
        out.append((h, float(np.max(np.abs(hist[-1].u - ue))),
                    float(np.max(np.abs(hist[-1].sigma - se)))))
    return out


def kink_width(r, u):
    """Width 2 / max|u_r| of the steepest transition; tanh(beta x / eps) gives 2 eps / beta."""
    du = np.abs(np.gradient(u, r))
    return float(2.0 / np.max(du))


# -------------------------------------------------------------- comparison

@dataclass(frozen=True)
class NormsRecord:
    u_sup_l2: float
    sigma_l2: float
    window: tuple
    n_times: int

    def as_dict(self):
        return {"u_sup_l2": self.u_sup_l2, "sigma_l2": self.sigma_l2,
                "window": list(self.window), "n_times": self.n_times}


def compare_fields(pde, ans, window=None):
    """sup-in-time L2 distance of u and space-time L2 distance of sigma.

    ``pde`` and ``ans`` are sequences of ``(t, r, u, sigma)`` on a common
    time grid and a common r grid; ``window = (t_lo, t_hi)`` restricts t.
    """
    if len(pde) != len(ans):
        raise PhaseFieldError("histories have different lengths")
    ts = np.array([p[0] for p in pde])
    if not np.allclose(ts, [a[0] for a in ans], rtol=0, atol=1e-12):
        raise PhaseFieldError("time grids differ")
    r = pde[0][1]
    for a in ans:
        if a[1].shape != r.shape or not np.allclose(a[1], r, rtol=0, atol=1e-12):
            raise PhaseFieldError("grid mismatch between PDE and ansatz snapshots")
    lo, hi = window if window is not None else (ts[0], ts[-1])
    sel = [i for i, t in enumerate(ts) if lo - 1e-12 <= t <= hi + 1e-12]
    u_l2 = [np.sqrt(np.trapezoid((pde[i][2] - ans[i][2]) ** 2, r)) for i in sel]
    s_l2 = np.array([np.trapezoid((pde[i][3] - ans[i][3]) ** 2, r) for i in sel])
    st = float(np.sqrt(np.trapezoid(s_l2, ts[sel]))) if len(sel) > 1 else 0.0
    return NormsRecord(float(max(u_l2)) if u_l2 else 0.0, st, (float(lo), float(hi)), len(sel))


def snapshot_csv(path, state):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("r", "u", "sigma"))
        for x, u, s in zip(state.r, state.u, state.sigma):
            w.writerow([f"{x:.16e}", f"{u:.16e}", f"{s:.16e}"])
