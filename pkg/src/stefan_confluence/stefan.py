"""Sharp-interface Stefan problem with kinetic undercooling, contact
detection, and the continuations used past the contact time.

The scaled temperature sigma = r theta obeys sigma_t = sigma_rr in three
moving subdomains [R1, r1], [r1, r2], [r2, R2].  At the fronts

    sigma = (-1)^(i+1) (kappa1 r_i r_i' + kappa2)        (Gibbs-Thomson)
    [sigma_r] = (-1)^(i+1) r_i^3 r_i'                     (latent heat)

Each subdomain is mapped to xi in [0, 1]; the mapped equation
``sigma_t|xi = sigma_xixi / L^2 + (a' + xi L') sigma_xi / L`` is advanced
with BDF2, and the two front velocities are found by Newton iteration on
the flux-jump residual.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.linalg import solve_banded

from .ansatz import model_temperature
from .convolutions import kinetic_coefficients
from .profiles import DEFAULT_PARAMS, cutoff_e


class StefanError(RuntimeError):
    pass


class NoContactError(StefanError):
    pass


# ---------------------------------------------------------------- motions

@dataclass(frozen=True)
class LinearMotion:
    """Fronts r_i = r_star + v_i (t - t_star)."""
    r_star: float
    t_star: float
    v: tuple

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        v = np.asarray(self.v, dtype=float)[:, None]
        r = self.r_star + v * (t - self.t_star)[None, :]
        return r, np.broadcast_to(v, r.shape).copy(), np.zeros_like(r)


@dataclass(frozen=True)
class ContinuedMotion:
    """Pre-contact Hermite interpolant, quadratic bridge to t*, and a
    C2 linear-plus-mollifier continuation beyond t*."""
    t_samples: np.ndarray
    r_samples: np.ndarray
    v_samples: np.ndarray
    bridge: tuple
    t_star: float
    delta: tuple

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        r = np.empty((2, t.size))
        v = np.empty_like(r)
        a = np.empty_like(r)
        t_last = self.t_samples[-1]
        for i in range(2):
            sp = CubicHermiteSpline(self.t_samples, self.r_samples[i], self.v_samples[i])
            p = np.poly1d(self.bridge[i])
            dp, ddp = p.deriv(), p.deriv(2)
            pre = t <= t_last
            mid = (t > t_last) & (t <= self.t_star)
            post = t > self.t_star
            r[i, pre], v[i, pre], a[i, pre] = sp(t[pre]), sp(t[pre], 1), sp(t[pre], 2)
            r[i, mid], v[i, mid], a[i, mid] = p(t[mid]), dp(t[mid]), ddp(t[mid])
            rs, vs, acc = p(self.t_star), dp(self.t_star), ddp(self.t_star)
            s = t[post] - self.t_star
            d = self.delta[i]
            m = np.exp(-(s / d) ** 2)
            dm = -2.0 * s / d ** 2 * m
            ddm = (-2.0 / d ** 2 + 4.0 * s ** 2 / d ** 4) * m
            r[i, post] = rs + vs * s + 0.5 * acc * s ** 2 * m
            v[i, post] = vs + acc * s * m + 0.5 * acc * s ** 2 * dm
            a[i, post] = acc * m + 2.0 * acc * s * dm + 0.5 * acc * s ** 2 * ddm
        return r, v, a


# ------------------------------------------------------------ trajectory

@dataclass(frozen=True)
class FrontTrajectory:
    """Fronts, continued fronts and continued one-sided gradients on [0, t1].

    ``split(t)`` returns the fractions lambda_i = gamma_i^- / S_i with the
    flux sums S_1 = r10^3 r10', S_2 = -r20^3 r20'; the gradients are then
    gamma_i^- = lambda_i S_i and gamma_i^+ = (1 - lambda_i) S_i, so the
    flux-sum identities hold exactly on [0, t1].
    """
    kind: str
    t_grid: np.ndarray
    t_star: float
    r_star: float
    v_minus: tuple
    motion: object
    split: object
    domain: tuple = (1.0, 3.0)
    kappa: tuple = field(default_factory=kinetic_coefficients)
    boundary: tuple = (0.0, 0.0)
    sigma_bar: object = None
    notes: tuple = ()

    @property
    def t1(self):
        return float(self.t_grid[-1])

    def r0(self, t):
        r, _, _ = self.motion(t)
        return r[0], r[1]

    def r0_t(self, t):
        _, v, _ = self.motion(t)
        return v[0], v[1]

    def r0_tt(self, t):
        _, _, a = self.motion(t)
        return a[0], a[1]

    def psi0(self, t):
        r1, r2 = self.r0(t)
        return r2 - r1

    def r_hat(self, t):
        """Pre-contact fronts (NaN for t >= t*)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        r1, r2 = self.r0(t)
        pre = t < self.t_star
        return np.where(pre, r1, np.nan), np.where(pre, r2, np.nan)

    def flux_sums(self, t):
        r, v, _ = self.motion(t)
        return r[0] ** 3 * v[0], -r[1] ** 3 * v[1]

    def gammas(self, t):
        s1, s2 = self.flux_sums(t)
        lam1, lam2 = self.split(t)
        return {"g1m": lam1 * s1, "g1p": (1.0 - lam1) * s1,
                "g2m": lam2 * s2, "g2p": (1.0 - lam2) * s2}

    def boundary_values(self, t):
        out = []
        for b in self.boundary:
            out.append(float(b(t)) if callable(b) else float(b))
        return tuple(out)

    def to_csv(self, path):
        t = self.t_grid
        r1h, r2h = self.r_hat(t)
        r1, r2 = self.r0(t)
        v1, v2 = self.r0_t(t)
        g = self.gammas(t)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t", "r1hat", "r2hat", "r10", "r20", "v1", "v2",
                        "gamma1m", "gamma1p", "gamma2m", "gamma2p"))
            for i in range(t.size):
                w.writerow([f"{x:.16e}" for x in (t[i], r1h[i], r2h[i], r1[i], r2[i], v1[i],
                                                  v2[i], g["g1m"][i], g["g1p"][i],
                                                  g["g2m"][i], g["g2p"][i])])


def _const_split(lam):
    return lambda t: (np.full(np.size(t), lam[0]), np.full(np.size(t), lam[1]))


def manufactured_sigma_bar(traj, params=DEFAULT_PARAMS):
    """sigma_bar = e(r) * T_pw built from the prescribed fronts (t < t*)."""
    def sigma_bar(r, t):
        r1, r2 = traj.r0(t)
        v1, v2 = traj.r0_t(t)
        g = traj.gammas(t)
        g = {k: float(v[0]) for k, v in g.items()}
        T = model_temperature(r, float(r1[0]), float(r2[0]), float(v1[0]), float(v2[0]), g,
                              traj.kappa)
        return cutoff_e(r, params) * T
    return sigma_bar


def manufactured_scenario(kind="symmetric-linear", speed=1.0, r_star=2.0, t_star=0.5, t1=1.0,
                          speeds=(0.6, -1.0), n_t=401, domain=(1.0, 3.0), params=DEFAULT_PARAMS):
    """Prescribed fronts with sigma_bar = e * T_pw and split lambda = 1/2.

    ``symmetric-linear``: r_{1,2} = r_star -+ speed (t_star - t).
    ``asymmetric-smooth``: straight fronts with unequal speeds ``speeds``.
    """
    if kind == "symmetric-linear":
        v = (speed, -speed)
    elif kind == "asymmetric-smooth":
        v = tuple(float(x) for x in speeds)
    else:
        raise ValueError(f"unknown manufactured kind: {kind}")
    if not (v[0] > 0 > v[1]):
        raise ValueError("fronts must approach: need v1 > 0 > v2")
    t_grid = np.linspace(0.0, t1, n_t)
    traj = FrontTrajectory(kind, t_grid, t_star, r_star, v, LinearMotion(r_star, t_star, v),
                           _const_split((0.5, 0.5)), domain)
    r1, r2 = traj.r0(t_grid)
    lo, hi = params.cutoff_inner
    if np.min(np.minimum(r1, r2)) < lo or np.max(np.maximum(r1, r2)) > hi:
        raise ValueError("fronts leave the region where the cutoff equals 1")
    return replace(traj, sigma_bar=manufactured_sigma_bar(traj, params))


def manufactured_defect(traj, r, t, dt=1e-5, dr=1e-4):
    """(d/dt - d2/dr2) sigma_bar by central differences (r away from fronts)."""
    sb = traj.sigma_bar
    r = np.asarray(r, dtype=float)
    st = (sb(r, t + dt) - sb(r, t - dt)) / (2.0 * dt)
    srr = (sb(r + dr, t) - 2.0 * sb(r, t) + sb(r - dr, t)) / dr ** 2
    return st - srr


# -------------------------------------------------------- sharp solver

@dataclass(frozen=True)
class SharpInterfaceState:
    t: float
    r: np.ndarray
    v: np.ndarray
    sigma: tuple
    prev: object = None
    kappa: tuple = field(default_factory=kinetic_coefficients)
    domain: tuple = (1.0, 3.0)
    boundary: tuple = (0.0, 0.0)
    flux_residual: float = 0.0
    newton_iterations: int = 0

    @property
    def n(self):
        return self.sigma[0].size - 1

    def nodes(self):
        """Physical node positions of the three subdomains."""
        xi = np.linspace(0.0, 1.0, self.n + 1)
        (R1, R2), (r1, r2) = self.domain, self.r
        return (R1 + xi * (r1 - R1), r1 + xi * (r2 - r1), r2 + xi * (R2 - r2))

    def one_sided_gradients(self):
        """(s1m, s1p, s2m, s2p): sigma_r at r1-0, r1+0, r2-0, r2+0."""
        return _gradients(self.sigma, self.domain, self.r)


def _bvals(boundary, t):
    return tuple(float(b(t)) if callable(b) else float(b) for b in boundary)


def _gradients(sigma, domain, r):
    (R1, R2), (r1, r2) = domain, r
    lengths = (r1 - R1, r2 - r1, R2 - r2)
    h = 1.0 / (sigma[0].size - 1)
    out = []
    for j, (end) in ((0, "right"), (1, "left"), (1, "right"), (2, "left")):
        s, L = sigma[j], lengths[j]
        if end == "right":
            g = (3.0 * s[-1] - 4.0 * s[-2] + s[-3]) / (2.0 * h * L)
        else:
            g = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h * L)
        out.append(g)
    return tuple(out)


def _solve_subdomain(rhs_old, alpha, left, right, L, a_dot, L_dot):
    n = rhs_old.size - 1
    h = 1.0 / n
    xi = np.linspace(0.0, 1.0, n + 1)[1:-1]
    c = (a_dot + xi * L_dot) / L
    diff = 1.0 / (L * L * h * h)
    lower = -diff + c / (2.0 * h)
    upper = -diff - c / (2.0 * h)
    diag = np.full(n - 1, alpha + 2.0 * diff)
    rhs = rhs_old[1:-1].copy()
    rhs[0] -= lower[0] * left
    rhs[-1] -= upper[-1] * right
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    out = np.empty(n + 1)
    out[0], out[-1] = left, right
    out[1:-1] = solve_banded((1, 1), ab, rhs)
    return out


def _trial(state, dt, v, bdf2):
    """Advance sigma for trial velocities v; return (sigma, r_new, residual)."""
    k1, k2 = state.kappa
    (R1, R2) = state.domain
    if bdf2:
        r_new = (4.0 * state.r - state.prev.r + 2.0 * dt * v) / 3.0
        alpha = 1.5 / dt
        rhs_old = [(4.0 * s - sp) / (2.0 * dt) for s, sp in zip(state.sigma, state.prev.sigma)]
    else:
        r_new = state.r + dt * v
        alpha = 1.0 / dt
        rhs_old = [s / dt for s in state.sigma]
    r1, r2 = r_new
    if not (R1 < r1 < r2 < R2):
        raise StefanError(f"fronts left the admissible ordering: r={r_new}")
    t_new = state.t + dt
    bl, br = _bvals(state.boundary, t_new)
    gt1 = k1 * r1 * v[0] + k2
    gt2 = -(k1 * r2 * v[1] + k2)
    lengths = (r1 - R1, r2 - r1, R2 - r2)
    a_dots = (0.0, v[0], v[1])
    l_dots = (v[0], v[1] - v[0], -v[1])
    ends = ((bl, gt1), (gt1, gt2), (gt2, br))
    sigma = tuple(_solve_subdomain(rhs_old[j], alpha, ends[j][0], ends[j][1], lengths[j],
                                   a_dots[j], l_dots[j]) for j in range(3))
    s1m, s1p, s2m, s2p = _gradients(sigma, state.domain, r_new)
    res = np.array([(s1p - s1m) - r1 ** 3 * v[0], (s2p - s2m) + r2 ** 3 * v[1]])
    return sigma, r_new, res


def _newton(state, dt, bdf2, tol=1e-10, max_iter=30):
    v = np.array(state.v, dtype=float)
    for it in range(max_iter):
        sigma, r_new, res = _trial(state, dt, v, bdf2)
        if np.max(np.abs(res)) <= tol:
            return v, sigma, r_new, res, it
        jac = np.empty((2, 2))
        for k in range(2):
            dv = np.zeros(2)
            dv[k] = 1e-7 * max(1.0, abs(v[k]))
            _, _, res_k = _trial(state, dt, v + dv, bdf2)
            jac[:, k] = (res_k - res) / dv[k]
        step = np.linalg.solve(jac, -res)
        if not np.all(np.isfinite(step)):
            break
        v = v + step
    raise StefanError(f"Newton did not converge: residual {np.max(np.abs(res)):.3e}")


def step_sharp_interface(state, dt, max_halvings=8):
    """One implicit step (BDF2 once a previous level exists, else BE).

    On Newton failure the step is retried with dt halved (as BE substeps),
    up to ``max_halvings`` times.
    """
    last_err = None
    for level in range(max_halvings + 1):
        n_sub = 2 ** level
        h = dt / n_sub
        st = state
        try:
            for k in range(n_sub):
                bdf2 = st.prev is not None and level == 0
                v, sigma, r_new, res, it = _newton(st, h, bdf2)
                st = replace(st, t=st.t + h, r=r_new, v=v, sigma=sigma,
                             prev=replace(st, prev=None), flux_residual=float(np.max(np.abs(res))),
                             newton_iterations=it)
            return st
        except StefanError as err:
            last_err = err
    raise StefanError(f"step failed after {max_halvings} halvings at t={state.t}: {last_err}")


def initial_state(r, v, n=64, domain=(1.0, 3.0), kappa=None, boundary=None, t0=0.0):
    """Piecewise-linear initial data consistent with both front conditions.

    The front values follow Gibbs-Thomson for the velocities ``v`` and the
    outer slopes are chosen so that the flux jumps equal r^3 v; boundary
    values are held at their initial values unless ``boundary`` is given.
    """
    kappa = kappa or kinetic_coefficients()
    k1, k2 = kappa
    (R1, R2), (r1, r2), (v1, v2) = domain, r, v
    g1 = k1 * r1 * v1 + k2
    g2 = -(k1 * r2 * v2 + k2)
    s_mid = (g2 - g1) / (r2 - r1)
    s_left = s_mid - r1 ** 3 * v1
    s_right = s_mid - r2 ** 3 * v2
    bl = g1 - s_left * (r1 - R1)
    br = g2 + s_right * (R2 - r2)
    xi = np.linspace(0.0, 1.0, n + 1)
    sigma = (bl + xi * (g1 - bl), g1 + xi * (g2 - g1), g2 + xi * (br - g2))
    return SharpInterfaceState(t0, np.array(r, float), np.array(v, float), sigma, None,
                               tuple(kappa), tuple(domain),
                               boundary if boundary is not None else (bl, br))


def stationary_state(r, n=64, domain=(1.0, 3.0), kappa=None):
    """Straight line through kappa2 at r1 and -kappa2 at r2 (an exact equilibrium)."""
    kappa = kappa or kinetic_coefficients()
    k2 = kappa[1]
    (R1, R2), (r1, r2) = domain, r
    slope = -2.0 * k2 / (r2 - r1)
    line = lambda x: k2 + slope * (x - r1)
    st = SharpInterfaceState(0.0, np.array(r, float), np.zeros(2), (np.zeros(1),) * 3, None,
                             tuple(kappa), tuple(domain), (line(R1), line(R2)))
    nodes = replace(st, sigma=(np.zeros(n + 1),) * 3).nodes()
    return replace(st, sigma=tuple(line(x) for x in nodes))


@dataclass(frozen=True)
class SharpHistory:
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    states: list
    contact: bool
    flux_residuals: np.ndarray


def run_sharp_interface(state, t_end, dt, contact_cells=3.0, store_every=1):
    """March until ``t_end`` or until the gap drops below ``contact_cells * h``.

    ``h`` is the nominal spacing (R2 - R1) / (3 n).
    """
    h = (state.domain[1] - state.domain[0]) / (3 * state.n)
    ts, rs, vs, states, res = [state.t], [state.r.copy()], [state.v.copy()], [state], [0.0]
    st = state
    contact = False
    k = 0
    while st.t < t_end - 1e-12:
        step = min(dt, t_end - st.t)
        if step < dt * (1 - 1e-9):
            st = replace(st, prev=None)
        st = step_sharp_interface(st, step)
        k += 1
        ts.append(st.t)
        rs.append(st.r.copy())
        vs.append(st.v.copy())
        res.append(st.flux_residual)
        if k % store_every == 0:
            states.append(st)
        if st.r[1] - st.r[0] <= contact_cells * h:
            contact = True
            if states[-1] is not st:
                states.append(st)
            break
    return SharpHistory(np.array(ts), np.array(rs).T, np.array(vs).T, states, contact,
                        np.array(res))


def integral_identity_defect(history):
    """d/dt int sigma dr - boundary fluxes - (r2^3 r2' - r1^3 r1') at interior steps."""
    out = []
    sts = history.states
    for a, b, c in zip(sts[:-2], sts[1:-1], sts[2:]):
        dt = c.t - a.t
        ints = [sum(np.trapezoid(s, x) for s, x in zip(st.sigma, st.nodes())) for st in (a, c)]
        dI = (ints[1] - ints[0]) / dt
        x3 = b.nodes()[2]
        x1 = b.nodes()[0]
        h3, h1 = x3[1] - x3[0], x1[1] - x1[0]
        s3, s1 = b.sigma[2], b.sigma[0]
        flux_r = (3 * s3[-1] - 4 * s3[-2] + s3[-3]) / (2 * h3)
        flux_l = (-3 * s1[0] + 4 * s1[1] - s1[2]) / (2 * h1)
        src = b.r[1] ** 3 * b.v[1] - b.r[0] ** 3 * b.v[0]
        out.append(dI - (flux_r - flux_l) - src)
    return np.array(out)


# ------------------------------------------------------ contact + continuation

def detect_contact(t, r1, r2, threshold=0.0, n_fit=4):
    """Contact time and radius from sampled fronts.

    Finds the first sample with gap <= threshold (a sign change of the gap
    counts as well), fits quadratics to the last ``n_fit`` samples up to it
    and returns the root of the fitted gap.  Result dict has keys
    ``t_star, r_star, v_minus, a_minus, coeffs, index``.
    """
    t, r1, r2 = (np.asarray(x, dtype=float) for x in (t, r1, r2))
    gap = r2 - r1
    hits = np.nonzero(gap <= threshold)[0]
    if hits.size == 0:
        raise NoContactError("no contact in horizon")
    idx = int(hits[0])
    lo = max(0, idx - n_fit + 1)
    sel = slice(lo, idx + 1)
    if idx - lo + 1 < 3:
        raise NoContactError("too few samples before contact to extrapolate")
    tc = t[sel]
    c1 = np.polyfit(tc, r1[sel], 2)
    c2 = np.polyfit(tc, r2[sel], 2)
    roots = np.roots(np.polysub(c2, c1))
    roots = roots[np.isreal(roots)].real
    roots = roots[roots >= tc[0] - 1e-12]
    if roots.size == 0:
        raise NoContactError("gap extrapolation has no root")
    ts = float(np.min(roots))
    p1, p2 = np.poly1d(c1), np.poly1d(c2)
    return {"t_star": ts, "r_star": float(p1(ts)),
            "v_minus": (float(p1.deriv()(ts)), float(p2.deriv()(ts))),
            "a_minus": (float(p1.deriv(2)(ts)), float(p2.deriv(2)(ts))),
            "coeffs": (c1, c2), "index": idx}


def continue_fronts(t, r, v, contact, t1):
    """C2 continuation of sampled pre-contact fronts to [0, t1].

    Returns ``(motion, notes)``; a zero one-sided velocity falls back to a
    constant extension, which is reported in ``notes``.
    """
    if not contact["t_star"] < t1:
        raise StefanError("need t_star < t1")
    idx = contact["index"]
    keep = t < contact["t_star"]
    keep[idx:] = False
    keep[:idx] &= True
    ts, rs, vs = t[keep], r[:, keep], v[:, keep]
    notes = []
    deltas = []
    bridge = []
    for i in range(2):
        vi, ai = contact["v_minus"][i], contact["a_minus"][i]
        c = np.array(contact["coeffs"][i], dtype=float)
        if vi == 0:
            notes.append(f"front {i + 1}: zero contact velocity, constant extension")
            c = np.array([0.0, 0.0, np.poly1d(c)(contact["t_star"])])
            ai = 0.0
        deltas.append(min(0.25, 0.5 * abs(vi) / (abs(ai) + 1e-300)) if ai else 0.25)
        bridge.append(c)
    motion = ContinuedMotion(ts, rs, vs, tuple(bridge), contact["t_star"], tuple(deltas))
    return motion, tuple(notes)


def extract_and_continue_gammas(history, motion, t_star, kappa=None, noise_ratio=0.5):
    """Split fractions lambda_i(t) from one-sided gradients of sigma_bar - I.

    Returns a callable ``t -> (lambda_1, lambda_2)``, frozen after the last
    pre-contact sample.
    """
    kappa = kappa or kinetic_coefficients()
    k1, k2 = kappa
    ts, lams = [], []
    for st in history.states[1:]:
        if st.t >= t_star:
            break
        r1, r2 = st.r
        v1, v2 = st.v
        kk1, kk2 = k1 * r1 * v1 + k2, k1 * r2 * v2 + k2
        i_r = -(kk1 + kk2) / (r2 - r1)
        s1m, s1p, s2m, s2p = st.one_sided_gradients()
        g1m, g2m = i_r - s1m, i_r - s2m
        s1, s2 = r1 ** 3 * v1, -r2 ** 3 * v2
        lam1 = g1m / s1 if s1 != 0 else 0.5
        lam2 = g2m / s2 if s2 != 0 else 0.5
        ts.append(st.t)
        lams.append((lam1, lam2))
    if len(ts) < 4:
        raise StefanError("too few pre-contact samples to extract gradients")
    ts = np.array(ts)
    lams = np.array(lams).T
    for lam in lams:
        d2 = np.abs(np.diff(lam, 2))
        if d2.size and np.max(d2) > noise_ratio * max(np.max(np.abs(lam)), 1e-12):
            raise StefanError("gradient extraction too noisy; refine the grid")
    splines = [CubicSpline(ts, lam) for lam in lams]

    def split(t):
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), ts[0], ts[-1])
        return splines[0](t), splines[1](t)
    return split


def solved_sigma_bar(history, t_star):
    """Piecewise-linear interpolant of the solver temperature (t < t*)."""
    states = [s for s in history.states if s.t < t_star]
    times = np.array([s.t for s in states])

    def sigma_bar(r, t):
        i = int(np.clip(np.searchsorted(times, t), 0, len(states) - 1))
        st = states[i]
        xs = np.concatenate(st.nodes())
        ss = np.concatenate(st.sigma)
        order = np.argsort(xs, kind="stable")
        return np.interp(r, xs[order], ss[order])
    return sigma_bar


def solved_scenario(r=(1.5, 2.5), v=(0.5, -1.5), n=64, dt=2e-3, t1=1.0, domain=(1.0, 3.0),
                    n_t=401):
    """Run the sharp-interface solver to contact and build the trajectory."""
    state = initial_state(r, v, n, domain)
    hist = run_sharp_interface(state, t1, dt)
    if not hist.contact:
        raise NoContactError("no contact in horizon")
    h = (domain[1] - domain[0]) / (3 * n)
    contact = detect_contact(hist.t, hist.r[0], hist.r[1], threshold=3.0 * h)
    if contact["t_star"] >= t1:
        raise NoContactError("no contact in horizon")
    motion, notes = continue_fronts(hist.t, hist.r, hist.v, contact, t1)
    split = extract_and_continue_gammas(hist, motion, contact["t_star"], state.kappa)
    t_grid = np.linspace(0.0, t1, n_t)
    return FrontTrajectory("solved", t_grid, contact["t_star"], contact["r_star"],
                           contact["v_minus"], motion, split, tuple(domain), state.kappa,
                           state.boundary, solved_sigma_bar(hist, contact["t_star"]), notes)


def one_sided_gammas(sigma_bar, t, r, v, kappa=None, h=1e-3):
    """gamma_i^{+-} at time t from a sigma_bar(r, t) callable by one-sided
    3-point differences at the fronts ``r`` moving with velocities ``v``."""
    kappa = kappa or kinetic_coefficients()
    k1, k2 = kappa
    (r1, r2), (v1, v2) = r, v
    i_r = -((k1 * r1 * v1 + k2) + (k1 * r2 * v2 + k2)) / (r2 - r1)

    def left(x):
        s = sigma_bar(np.array([x - 2 * h, x - h, x]), t)
        return (s[0] - 4 * s[1] + 3 * s[2]) / (2 * h)

    def right(x):
        s = sigma_bar(np.array([x, x + h, x + 2 * h]), t)
        return (-3 * s[0] + 4 * s[1] - s[2]) / (2 * h)

    return {"g1m": i_r - left(r1), "g1p": right(r1) - i_r,
            "g2m": i_r - left(r2), "g2p": right(r2) - i_r}
