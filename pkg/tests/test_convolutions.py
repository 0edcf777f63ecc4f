import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stefan_confluence import convolutions as cv

# Reference values from independent 30-digit quadrature (mpmath) of the
# defining integrals.
MP_VALUES = {
    1.0: {"C_hat": 0.570733298510062, "D_hat": 0.2821175412111875,
          "C_Omega": 1.58897362453302, "Bz_Omega": 0.34418941163182,
          "B_Omega": 0.570733298510062, "B_dot0": -1.177947249066, "Bz_dot0": -0.72406166096631},
    -1.0: {"C_hat": 0.0104533449972864, "D_hat": 0.01360555410380745,
           "C_Omega": 0.411026375466979, "B_dot0": 1.177947249066,
           "Bz_Omega": 0.024370619851639, "B_Omega": 0.0104533449972864,
           "Bz_dot0": -0.72406166096631},
}


def test_values_at_zero():
    v = cv.interaction_integrals(0.0)
    assert abs(v["B_Omega"] - 2.0 / 15.0) < 1e-10
    assert abs(v["C_hat"] - 2.0 / 15.0) < 1e-10
    assert abs(v["D_hat"] - 3.0 / 28.0) < 1e-10
    assert abs(v["C_Omega"] - 1.0) < 1e-10
    assert abs(v["Bz_Omega"] - 1.0 / 6.0) < 1e-10
    k = cv.kink_convolutions(0.0)
    assert abs(k["B_dot0"]) < 1e-10
    assert abs(k["Bz_dot0"] + 1.0) < 1e-10
    assert abs(cv.beta_of_eta(0.0) - np.sqrt(45.0 / 56.0)) < 1e-10


@pytest.mark.parametrize("eta", [1.0, -1.0])
def test_against_independent_quadrature(eta):
    v = cv.interaction_integrals(eta)
    v.update(cv.kink_convolutions(eta))
    for key, ref in MP_VALUES[eta].items():
        assert abs(v[key] - ref) < 1e-9 * max(1.0, abs(ref)), key


@pytest.mark.parametrize("eta", [-4.0, -1.0, 0.0, 1.0, 4.0, 8.0])
def test_b_equals_c_hat(eta):
    v = cv.interaction_integrals(eta, scaled=True)
    assert abs(v["B_Omega"] - v["C_hat"]) <= 1e-7 * abs(v["C_hat"])
    assert v["C_Omega"] >= 0.0


@given(st.floats(0.25, 8.0))
@settings(max_examples=15, deadline=None)
def test_btilde_coth(eta):
    ref = float(cv.btilde_coth_form(eta))
    assert abs(cv.btilde(eta) - ref) < 1e-6 * ref


def test_btilde_zero_and_c_plus():
    assert abs(cv.btilde(0.0) - 2.0) < 1e-8
    assert abs(cv.c_plus() - 4.0 / 3.0) < 1e-10


def test_limits():
    big = cv.interaction_integrals(30.0)
    assert abs(big["C_Omega"] - 2.0) < 1e-8
    assert abs(big["B_Omega"] - 4.0 / 3.0) < 1e-8
    assert abs(cv.beta_of_eta(30.0) - 0.5) < 1e-8


def test_table_matches_direct(table):
    for eta in (-5.3, -0.41, 0.0, 0.77, 3.3, 17.0):
        row = cv.direct_row(eta)
        for key, val in row.items():
            assert abs(table(key, eta) - val) < 1e-6 * max(1.0, abs(val)), (key, eta)


def test_table_csv_roundtrip(table, tmp_path):
    p = tmp_path / "t.csv"
    table.to_csv(p)
    back = cv.InteractionTable.from_csv(p)
    for k in cv.TABLE_COLUMNS:
        assert np.array_equal(back.columns[k], table.columns[k])


def test_table_outside_grid(table):
    assert table("B_tilde", 60.0) == pytest.approx(float(cv.btilde_coth_form(60.0)))
    assert table("beta", 60.0, 1) == 0.0


def test_build_table_validation():
    with pytest.raises(ValueError):
        cv.build_table(eta_min=1.0)
    with pytest.raises(ValueError):
        cv.build_table(n_points=10)


def test_discrepancy_block(table):
    d = cv.discrepancy_block(table)
    assert set(d) == {"btilde_closed_form", "beta_limit", "C_Omega_limit"}
    assert abs(d["btilde_closed_form"]["computed_value"] - 2.0 / np.tanh(1.0)) < 1e-6
    assert not d["btilde_closed_form"]["consistent"]
    assert abs(d["beta_limit"]["computed_value"] - 0.5) < 1e-4
    assert abs(d["C_Omega_limit"]["computed_value"] - 2.0) < 1e-4
