"""Acceptance criteria 1-13.  Each test prints one PASS/FAIL line and fails
when its criterion is not met; tolerances are the stated ones."""

import time

import numpy as np
import pytest

from stefan_confluence import (ansatz, cli, convolutions as cv, interaction, numerics,
                               phasefield as pf, profiles, residuals as rs, stefan)


@pytest.fixture
def verdict(capsys):
    def report(n, checks, elapsed, limit):
        checks = dict(checks)
        checks[f"runtime {elapsed:.1f}s < {limit}s"] = elapsed < limit
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        with capsys.disabled():
            line = f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}"
            print("\n" + line + ("" if ok else "  (failed: " + "; ".join(failed) + ")"))
        assert ok, failed
    return report


def test_criterion_01_quadrature_oracles(verdict):
    t0 = time.perf_counter()
    s2 = numerics.integrate_line(lambda z: 1.0 / np.cosh(z) ** 2)
    s4 = numerics.integrate_line(lambda z: 1.0 / np.cosh(z) ** 4)
    checks = {"int sech^2 = 2": abs(s2 - 2.0) <= 1e-10,
              "int sech^4 = 4/3": abs(s4 - 4.0 / 3.0) <= 1e-10}
    for t in (0.1, 1.0):
        val = numerics.integrate_abel(lambda a: 1.0, t)
        checks[f"Abel t={t}"] = abs(val - 2.0 * np.sqrt(t)) <= 1e-9
    verdict(1, checks, time.perf_counter() - t0, 1.0)


def test_criterion_02_profile_identity(verdict):
    t0 = time.perf_counter()
    z = np.linspace(-10.0, 10.0, 4001)
    om = profiles.omega_profile(z, 0.0)[0]
    checks = {"Omega(z,0)": np.max(np.abs(om - 0.5 * (1 + np.tanh(z) ** 2))) <= 1e-12}
    h = 1e-5
    zz = np.linspace(-6, 6, 61)
    worst = 0.0
    for eta in (-3.0, -0.5, 0.0, 0.7, 4.0):
        _, oz, oe = profiles.omega_profile(zz, eta)
        f = lambda z, e: profiles.omega_profile(z, e)[0]
        worst = max(worst, np.max(np.abs(oz - (f(zz + h, eta) - f(zz - h, eta)) / (2 * h))),
                    np.max(np.abs(oe - (f(zz, eta + h) - f(zz, eta - h)) / (2 * h))))
    checks["partials vs FD"] = worst <= 1e-8
    verdict(2, checks, time.perf_counter() - t0, 1.0)


def test_criterion_03_convolution_identities(verdict):
    t0 = time.perf_counter()
    checks = {}
    for eta in (-4.0, -1.0, 0.0, 1.0, 4.0, 8.0):
        v = cv.interaction_integrals(eta, scaled=True)
        checks[f"B_Omega = C_hat at {eta}"] = abs(v["B_Omega"] - v["C_hat"]) <= \
            1e-7 * abs(v["C_hat"])
        checks[f"C_Omega >= 0 at {eta}"] = v["C_Omega"] >= 0
    bz0 = cv.interaction_integrals(0.0)["Bz_Omega"]
    checks[f"Bz_Omega(0) = 0 (computed {bz0:.12g})"] = abs(bz0) <= 1e-10
    checks["B_dot0(0) = 0"] = abs(cv.kink_convolutions(0.0)["B_dot0"]) <= 1e-10
    checks["B_tilde(0) = 2"] = abs(cv.btilde(0.0) - 2.0) <= 1e-8
    etas = np.linspace(0.25, 8.0, 12)
    rel = max(abs(cv.btilde(e) - float(cv.btilde_coth_form(e))) / float(cv.btilde_coth_form(e))
              for e in etas)
    checks["B_tilde = 2 eta coth eta"] = rel <= 1e-6
    disc = cv.discrepancy_block()
    checks["tanh form flagged"] = not disc["btilde_closed_form"]["consistent"]
    checks["C+ = 4/3"] = abs(cv.c_plus() - 4.0 / 3.0) <= 1e-10
    verdict(3, checks, time.perf_counter() - t0, 30.0)


def test_criterion_04_interaction_solver(verdict):
    t0 = time.perf_counter()
    table = cv.build_table()
    sol = interaction.solve_interaction(table)
    res = interaction.eta_residual(sol.state["eta"], sol.tau_grid, table)
    eta8 = float(interaction.solve_eta(-8.0, table)[0])
    checks = {"ETA1 residual <= 1e-9": np.max(res) <= 1e-9,
              "eta(-8) < 1e-3": eta8 < 1e-3,
              "eta monotone": bool(np.all(np.diff(sol.state["eta"]) > 0))}
    for sign in (1.0, -1.0):
        b6, b8 = cv.beta_of_eta(6.0 * sign), cv.beta_of_eta(8.0 * sign)
        checks[f"beta({6 * sign:+.0f}) vs beta({8 * sign:+.0f}): {b6:.6g} vs {b8:.6g}"] = \
            abs(b6 - b8) <= 1e-3
    verdict(4, checks, time.perf_counter() - t0, 30.0)


def test_criterion_05_phase_shifts(verdict, sol, sym_fronts):
    t0 = time.perf_counter()
    d100 = float(sol.d(-100.0)[0])
    td = float(sol.tau_d(0.9 * sol.tau_max)[0])
    eps = 0.05
    t = np.linspace(0.2, 0.8, 61)
    fp = interaction.front_positions(t, eps, sym_fronts, sol)
    rho = sol.eval(fp.tau)["rho"]
    checks = {f"d(-100) = -1 +- 0.02 ({d100:.6f})": abs(d100 + 1.0) <= 0.02,
              "|tau d| <= 0.02 at 0.9 tau_max": abs(td) <= 0.02,
              "psi/eps = rho": np.max(np.abs(fp.psi / eps - rho)) <= 1e-8}
    verdict(5, checks, time.perf_counter() - t0, 10.0)


def test_criterion_06_velocity_sum(verdict, sol, sym_fronts, asym_fronts):
    t0 = time.perf_counter()
    vs, _, eta_s = interaction.velocity_sum_at_contact(sym_fronts, sol, 0.035)
    va, _, eta_a = interaction.velocity_sum_at_contact(asym_fronts, sol, 0.035)
    vmax = max(abs(v) for v in asym_fronts.v_minus)
    checks = {f"symmetric |r1t + r2t| = {abs(vs):.2e}": abs(vs) <= 1e-10,
              f"asymmetric |r1t + r2t| = {abs(va):.2e}": abs(va) <= 1e-3 * vmax}
    verdict(6, checks, time.perf_counter() - t0, 10.0)


def test_criterion_07_sharp_interface(verdict):
    t0 = time.perf_counter()
    st = stefan.stationary_state((1.6, 2.4), n=32)
    hist = stefan.run_sharp_interface(st, 1.0, 0.01)
    drift = np.max(np.abs(hist.r[:, -1] - hist.r[:, 0])) / 1.0
    ends = []
    flux = 0.0
    for n, dt in ((16, 4e-3), (32, 2e-3), (64, 1e-3)):
        s0 = stefan.initial_state((1.5, 2.5), (0.5, -1.5), n=n)
        h = stefan.run_sharp_interface(s0, 0.3, dt)
        ends.append(h.r[:, -1])
        flux = max(flux, float(np.max(h.flux_residuals)))
    d1 = np.max(np.abs(ends[0] - ends[1]))
    d2 = np.max(np.abs(ends[1] - ends[2]))
    order = np.log2(d1 / d2)
    checks = {f"stationary drift {drift:.1e}": drift <= 1e-8,
              f"self-convergence order {order:.2f} >= 1": order >= 1.0,
              f"flux residual {flux:.1e} <= 1e-8": flux <= 1e-8}
    verdict(7, checks, time.perf_counter() - t0, 120.0)


def test_criterion_08_qhat_holder(verdict, sol, sym_fronts):
    t0 = time.perf_counter()
    src = ansatz.kernel_source(sym_fronts, sol, 0.05)
    f = lambda r: float(ansatz.correction_qhat_kernel(r, 0.45, src))
    q = ansatz.holder_quotients(f, np.linspace(1.3, 2.7, 15), range(3, 11), mu=0.45)
    ratio = max(q[-1], q[-2]) / min(q[-1], q[-2])
    checks = {"finite": bool(np.all(np.isfinite(q))),
              f"finest-level ratio {ratio:.3f} < 2": ratio < 2.0}
    verdict(8, checks, time.perf_counter() - t0, 60.0)


def test_criterion_09_phase_field(verdict):
    t0 = time.perf_counter()
    eps = 0.05
    r = pf.radial_grid((1.0, 3.0), eps)
    eq = 0.0
    for val in (1.0, -1.0):
        st = pf.PDEState(r, np.full(r.size, val), np.zeros(r.size), 0.0, eps)
        for _ in range(10):
            new = pf.step_phasefield(st, 1e-3)
            eq = max(eq, float(np.max(np.abs(new.u - st.u))), float(np.max(np.abs(new.sigma))))
            st = new
    errs = pf.mms_errors()
    orders = [np.log(a[1] / b[1]) / np.log(a[0] / b[0]) for a, b in zip(errs[:-1], errs[1:])]
    st = pf.PDEState(r, np.tanh((r - 2.0) / (0.8 * eps)) * np.tanh((r - 1.6) / eps),
                     np.zeros(r.size), 0.0, eps)
    energies = [pf.energy(st)]
    for _ in range(400):
        st = pf.step_phasefield(st, 0.5 * eps ** 2, couple=False)
        energies.append(pf.energy(st))
    checks = {f"equilibrium {eq:.1e} <= 1e-12": eq <= 1e-12,
              f"MMS orders {np.round(orders, 3).tolist()}": all(abs(o - 2) <= 0.2
                                                               for o in orders),
              "energy nonincreasing": bool(np.all(np.diff(energies) <= 0.0))}
    verdict(9, checks, time.perf_counter() - t0, 180.0)


def test_criterion_10_weak_residuals(verdict, sol, sym_fronts):
    t0 = time.perf_counter()
    eps_list = [0.1, 0.07, 0.05, 0.035]
    tests = rs.test_function_set((1.0, 3.0), seed=0)
    rep = rs.sweep_and_fit(sym_fronts, sol, eps_list, tests)
    planted, _ = rs.planted_slope(eps_list)
    heat = [rep["per_eps"][e]["heat_max"] for e in eps_list]
    ac = [rep["per_eps"][e]["ac_max"] for e in eps_list]
    part_a = {f"heat maxima decrease {np.round(heat, 3).tolist()}": rep["heat_monotone"],
              f"AC maxima decrease {np.round(ac, 3).tolist()}": rep["ac_monotone"],
              f"planted slope {planted:.4f}": abs(planted - 1.0) <= 0.01}
    part_b = rep["heat_slope"] >= 0.8 and rep["ac_slope"] >= 0.35
    attributed = all(rep["per_eps"][e].get("heat_dominant") and
                     rep["per_eps"][e].get("ac_dominant") for e in eps_list)
    disc = cv.discrepancy_block(sol.table)
    flagged = not disc["beta_limit"]["consistent"]
    checks = dict(part_a)
    checks[f"slopes heat {rep['heat_slope']:.3f} / AC {rep['ac_slope']:.3f}, "
           f"or attribution + flag"] = part_b or (attributed and flagged)
    verdict(10, checks, time.perf_counter() - t0, 480.0)


def test_criterion_11_temperature_jump(verdict, sol, sym_fronts, asym_fronts):
    t0 = time.perf_counter()
    j = ansatz.temperature_jump(sym_fronts, sol)
    ja = ansatz.temperature_jump(asym_fronts, sol)
    rel = abs(j["measured_value"] - j["formula_value"]) / abs(j["formula_value"])
    checks = {f"measured {j['measured_value']:.4f} vs closed form {j['formula_value']:.4f} "
              f"within 5%": rel <= 0.05,
              "sign negative (symmetric)": j["measured_value"] < 0,
              "sign negative (asymmetric)": ja["measured_value"] < 0}
    verdict(11, checks, time.perf_counter() - t0, 60.0)


def test_criterion_12_example_suite(verdict):
    t0 = time.perf_counter()
    out = rs.example_suite()
    checks = {f"{name} order {rec['order']:.3f}": rec["order"] >= 0.9
              for name, rec in out.items()}
    verdict(12, checks, time.perf_counter() - t0, 30.0)


def test_criterion_13_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "s.ini"
    cfg.write_text("[scenario]\nkind = manufactured-symmetric\neps = 0.1 0.08 0.064\nseed = 7\n"
                   "[grid]\ntable_points = 200\ntau_nodes = 8000\n")
    codes, blobs = [], []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes.append(cli.main(["all", "--config", str(cfg), "--out", str(out), "--jobs", "2"]))
        blobs.append((out / "report.json").read_bytes())
    checks = {f"exit codes {codes}": codes == [0, 0],
              "byte-identical report.json": blobs[0] == blobs[1]}
    verdict(13, checks, time.perf_counter() - t0, 900.0)
