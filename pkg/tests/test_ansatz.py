import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefan_confluence import ansatz
from stefan_confluence.convolutions import kinetic_coefficients


def test_order_function_phases(sol, sym_fronts):
    r = np.array([1.1, 2.0, 2.9])
    u = ansatz.order_function(r, 0.1, 0.05, sym_fronts, sol, derivatives=False)
    # beta = 1/2 away from contact: tails decay like exp(-r_dist / eps)
    assert np.allclose(u, [1.0, -1.0, 1.0], atol=2e-3)
    assert np.all(np.abs(ansatz.order_function(np.linspace(1, 3, 401), 0.6, 0.05, sym_fronts,
                                               sol, derivatives=False)) <= 1.0)


def test_order_function_derivatives(sol, asym_fronts):
    r = np.linspace(1.3, 2.7, 57)
    eps, t, h = 0.05, 0.47, 1e-6
    u, u_r, u_t = ansatz.order_function(r, t, eps, asym_fronts, sol)
    up = ansatz.order_function(r, t + h, eps, asym_fronts, sol, derivatives=False)
    dn = ansatz.order_function(r, t - h, eps, asym_fronts, sol, derivatives=False)
    assert np.max(np.abs((up - dn) / (2 * h) - u_t)) < 1e-5 * max(1.0, np.max(np.abs(u_t)))
    ur = ansatz.order_function(r + h, t, eps, asym_fronts, sol, derivatives=False)
    ul = ansatz.order_function(r - h, t, eps, asym_fronts, sol, derivatives=False)
    assert np.max(np.abs((ur - ul) / (2 * h) - u_r)) < 1e-5 * np.max(np.abs(u_r))


@given(st.floats(1.2, 1.9), st.floats(0.1, 0.9), st.floats(0.2, 2.0), st.floats(-2.0, -0.2),
       st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_model_front_conditions(r1, gap, v1, v2, lam1, lam2):
    r2 = r1 + gap
    kappa = kinetic_coefficients()
    s1, s2 = r1 ** 3 * v1, -r2 ** 3 * v2
    gam = {"g1m": lam1 * s1, "g1p": (1 - lam1) * s1, "g2m": lam2 * s2, "g2p": (1 - lam2) * s2}
    T = lambda x: ansatz.model_temperature(np.array([x]), r1, r2, v1, v2, gam, kappa,
                                           derivative=True)
    k1, k2 = kappa
    (t_a,), _ = T(r1)
    (t_b,), _ = T(r2)
    assert abs(t_a - (k1 * r1 * v1 + k2)) < 1e-9 * max(1, abs(t_a))
    assert abs(t_b + (k1 * r2 * v2 + k2)) < 1e-9 * max(1, abs(t_b))
    d = 1e-9
    jump1 = T(r1 + d)[1][0] - T(r1 - d)[1][0]
    jump2 = T(r2 + d)[1][0] - T(r2 - d)[1][0]
    assert abs(jump1 - s1) < 1e-6 * max(1, abs(s1))
    assert abs(jump2 - s2) < 1e-6 * max(1, abs(s2))


def test_temperature_form_validation(sol, sym_fronts):
    with pytest.raises(ValueError):
        ansatz.temperature_model(np.array([2.0]), 0.1, 0.05, sym_fronts, sol, form="x")


def test_correction_against_sharp(sol, sym_fronts):
    errs = []
    for eps in (0.1, 0.05):
        f = ansatz.solve_correction(sym_fronts, sol, eps)
        g = ansatz.solve_correction(sym_fronts, sol, eps, sharp=True)
        pre = f.t < 0.45
        errs.append(np.max(np.abs(f.sigma[pre] - g.sigma[pre])))
    assert errs[1] < 0.6 * errs[0]


def test_correction_dirichlet_and_initial(sol, sym_fronts):
    f = ansatz.solve_correction(sym_fronts, sol, 0.1)
    bl, br = sym_fronts.boundary_values(0.0)
    assert np.allclose(f.sigma[:, 0], bl) and np.allclose(f.sigma[:, -1], br)
    assert np.allclose(f.sigma[0], sym_fronts.sigma_bar(f.r, 0.0), atol=1e-12)
    sig_t = f.time_derivative(10)
    assert sig_t.shape == f.r.shape


def test_temperature_jump_sign(sol, sym_fronts, asym_fronts):
    for fr in (sym_fronts, asym_fronts):
        j = ansatz.temperature_jump(fr, sol)
        assert j["measured_value"] < 0 and j["formula_value"] < 0


def test_kernel_correction_heat_potential(sol, sym_fronts):
    src = ansatz.kernel_source(sym_fronts, sol, 0.05)
    assert ansatz.correction_qhat_kernel(2.0, 0.0, src) == 0.0
    far = ansatz.correction_qhat_kernel(1.0, 0.01, src)
    near = ansatz.correction_qhat_kernel(1.6, 0.3, src)
    assert np.isfinite(near) and abs(far) < 1e-5
    printed = ansatz.correction_qhat_kernel(2.0, 0.3, src, kernel="printed")
    assert np.isfinite(printed)
    with pytest.raises(ValueError):
        ansatz.correction_qhat_kernel(2.0, 0.3, src, kernel="other")


def test_holder_quotients_linear():
    q = ansatz.holder_quotients(lambda x: 3.0 * x, [0.0, 1.0], [1, 2, 3], mu=1.0)
    assert np.allclose(q, 3.0)


def test_snapshot_csv(sol, sym_fronts, tmp_path):
    f = ansatz.solve_correction(sym_fronts, sol, 0.1)
    p = tmp_path / "a.csv"
    ansatz.snapshot_csv(p, f, 5, sym_fronts, sol)
    lines = p.read_text().splitlines()
    assert lines[0] == "r,u,T,q,sigma,theta" and len(lines) == f.r.size + 1
