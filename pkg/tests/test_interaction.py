import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefan_confluence import interaction
from stefan_confluence.profiles import switch_antiderivative


def test_eta_residual_on_grid(sol):
    res = interaction.eta_residual(sol.state["eta"], sol.tau_grid, sol.table)
    assert np.max(res) <= 1e-9


def test_eta_small_tail(sol):
    # eta ~ 2 beta(0) A(tau) as tau -> -inf
    eta = float(interaction.solve_eta(-8.0, sol.table)[0])
    ref = 2.0 * np.sqrt(45.0 / 56.0) * float(switch_antiderivative(-8.0))
    assert abs(eta - ref) < 1e-6 * ref
    assert eta < 1e-3


def test_eta_monotone_nonnegative(sol):
    eta = sol.state["eta"]
    assert np.all(eta >= 0) and np.all(np.diff(eta) > 0)


@given(st.floats(-30.0, 30.0))
@settings(max_examples=40, deadline=None)
def test_vectorised_matches_scalar(table, tau):
    a = float(interaction.solve_eta(tau, table)[0])
    b = interaction.solve_eta_node(tau, table)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_phase_shift_limits(sol):
    assert abs(float(sol.d(-100.0)[0]) + 1.0) < 0.02
    assert abs(float(sol.tau_d(0.9 * sol.tau_max)[0])) <= 0.02
    assert abs(sol.L) < 1e-12


def test_d_pole(sol):
    with pytest.raises(interaction.InteractionError):
        sol.d(0.0)


def test_range_check(sol):
    with pytest.raises(interaction.InteractionError):
        sol.eval(500.0)


def test_psi_identity(sol, sym_fronts):
    eps = 0.05
    t = np.linspace(0.3, 0.45, 7)
    fp = interaction.front_positions(t, eps, sym_fronts, sol)
    rho = sol.eval(fp.tau)["rho"]
    assert np.max(np.abs((fp.r2 - fp.r1) / eps - rho)) < 1e-8
    assert np.max(np.abs(fp.psi / eps - rho)) < 1e-12


def test_fronts_ordered_and_velocities(sol, asym_fronts):
    eps = 0.05
    t = np.linspace(0.0, 1.0, 401)
    fp = interaction.front_positions(t, eps, asym_fronts, sol)
    assert np.all(fp.psi > 0)
    h = 1e-6
    up = interaction.front_positions(t[1:-1] + h, eps, asym_fronts, sol)
    dn = interaction.front_positions(t[1:-1] - h, eps, asym_fronts, sol)
    assert np.max(np.abs((up.r1 - dn.r1) / (2 * h) - fp.r1t[1:-1])) < 1e-5
    assert np.max(np.abs((up.r2 - dn.r2) / (2 * h) - fp.r2t[1:-1])) < 1e-5


def test_velocity_sum_symmetric(sol, sym_fronts):
    val, _, _ = interaction.velocity_sum_at_contact(sym_fronts, sol, 0.035)
    assert abs(val) <= 1e-10


def test_velocity_sum_asymmetric(sol, asym_fronts):
    val, _, eta = interaction.velocity_sum_at_contact(asym_fronts, sol, 0.035)
    assert abs(val) <= 1e-3 * 1.0
    assert eta < 1e-10


def test_export_and_summary(sol, tmp_path):
    p = tmp_path / "i.csv"
    interaction.export_csv(sol, p, stride=1000)
    lines = p.read_text().splitlines()
    assert lines[0] == "tau,eta,beta,rho,s,d,W,S2"
    s = interaction.summary(sol)
    assert abs(s["d_minus_inf"] + 1.0) < 0.02
    assert abs(s["beta_at_tau_max"] - 0.5) < 1e-4


def test_requires_approaching_fronts(sol):
    class Still:
        def r0(self, t):
            return np.full_like(t, 1.5), np.full_like(t, 2.5)

        def r0_t(self, t):
            return np.zeros_like(t), np.zeros_like(t)

        r0_tt = r0_t
    with pytest.raises(interaction.InteractionError):
        interaction.front_positions(0.1, 0.05, Still(), sol)
