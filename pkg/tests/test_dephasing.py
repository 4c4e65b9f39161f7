"""Interaction-induced dephasing: blockade radius, level-shift variances,
the photon-number law, and the motional grating lifetime."""
import math

import pytest

from transduce.constants import CONST, TWO_PI
from transduce.dephasing import (blockade_radius, budget_rows, dde_variance,
                                 default_interactions, dephasing_budget,
                                 gamma51_of_photon_number,
                                 level_shift_variance, motional_coherence,
                                 spin_wave_wavelength)


def test_blockade_radius_of_the_bundled_coefficients():
    par = default_interactions()
    assert par.R_B == pytest.approx(4.099985e-6, abs=1e-10)
    assert par.R_B == pytest.approx(4.1e-6, abs=0.2e-6)


def test_blockade_radius_scales_as_the_sixth_root():
    par = default_interactions()
    doubled = blockade_radius(64.0 * par.C6_33, par.gamma_pump)
    assert doubled == pytest.approx(2.0 * par.R_B, rel=1e-12)
    with pytest.raises(ValueError):
        blockade_radius(0.0, par.gamma_pump)
    with pytest.raises(ValueError):
        blockade_radius(par.C6_33, -1.0)


def test_level_shift_variance_is_linear_in_population_and_density():
    par = default_interactions()
    base = level_shift_variance(par.C6_33, 0.07, 2.4e16, par.R_B)
    assert level_shift_variance(par.C6_33, 0.14, 2.4e16, par.R_B) \
        == pytest.approx(2.0 * base, rel=1e-12)
    assert level_shift_variance(par.C6_33, 0.07, 4.8e16, par.R_B) \
        == pytest.approx(2.0 * base, rel=1e-12)
    with pytest.raises(ValueError):
        level_shift_variance(par.C6_33, 0.07, 2.4e16, 0.0)
    with pytest.raises(ValueError):
        level_shift_variance(par.C6_33, -0.07, 2.4e16, par.R_B)


def test_the_photon_number_law_is_an_exact_square_root():
    g0 = TWO_PI * 10.8e3
    assert gamma51_of_photon_number(4.0, g0) == 2.0 * g0
    assert gamma51_of_photon_number(1.0, g0) == g0
    assert gamma51_of_photon_number(0.0, g0) == 0.0
    with pytest.raises(ValueError):
        gamma51_of_photon_number(-0.5, g0)


def test_exchange_variance_outer_limit_term():
    par = default_interactions()
    approx_var = dde_variance(par.C3, 3.8e-7, 0.865, 2.4e16, par.R_B, par.w)
    exact_var = dde_variance(par.C3, 3.8e-7, 0.865, 2.4e16, par.R_B, par.w,
                             exact=True)
    assert exact_var / approx_var == pytest.approx(
        1.0 - (par.R_B / par.w) ** 3, rel=1e-12)
    assert dde_variance(par.C3, 7.6e-7, 0.865, 2.4e16, par.R_B, par.w) \
        == pytest.approx(2.0 * approx_var, rel=1e-12)
    with pytest.raises(ValueError, match="inside the beam"):
        dde_variance(par.C3, 3.8e-7, 0.865, 2.4e16, 2e-4, par.w)
    with pytest.raises(ValueError):
        dde_variance(par.C3, -1.0, 0.865, 2.4e16, par.R_B, par.w)


def test_motional_lifetime_at_the_working_temperature():
    u, tau = motional_coherence(150e-6, 1.3e-6)
    assert u == pytest.approx(math.sqrt(CONST.kB * 150e-6 / CONST.m_Rb87),
                              rel=1e-12)
    assert tau == pytest.approx(1.727164e-6, rel=1e-5)
    assert abs(tau / 1.7e-6 - 1.0) <= 0.03
    with pytest.raises(ValueError):
        motional_coherence(0.0, 1.3e-6)


def test_grating_period_for_the_two_beam_geometries():
    k_P = TWO_PI / 780.24e-9
    k_A = TWO_PI / 479.7e-9
    assert spin_wave_wavelength(k_P, k_A) == pytest.approx(1.2453621e-6,
                                                           rel=1e-6)
    assert spin_wave_wavelength(k_P, k_A, "counterpropagating") \
        == pytest.approx(2.9706266e-7, rel=1e-6)
    assert spin_wave_wavelength(k_P, k_P) == math.inf
    with pytest.raises(ValueError, match="geometry"):
        spin_wave_wavelength(k_P, k_A, "diagonal")


def test_budget_of_the_bundled_scenario(bundled):
    b = dephasing_budget(bundled)
    assert b["R_B"] == pytest.approx(4.099985e-6, abs=1e-10)
    assert b["gamma0"] == pytest.approx(TWO_PI * 12781.717, rel=1e-6)
    # the single-photon rate lands within a factor of two of the slow
    # coherence decay used by the propagation model
    assert 0.5 <= b["gamma0"] / (TWO_PI * 10.8e3) <= 2.0
    assert b["lambda_sw"] == pytest.approx(1.2453621e-6, rel=1e-6)
    assert b["tau_sw"] == pytest.approx(1.6545726e-6, rel=1e-6)
    assert b["N_bar"] == pytest.approx(0.1)
    assert b["gamma51"] == pytest.approx(math.sqrt(0.1) * b["gamma0"],
                                         rel=1e-12)
    assert b["var_45"] == 0.0


def test_budget_photon_number_and_population_overrides(bundled):
    b1 = dephasing_budget(bundled, N_bar=1.0)
    b4 = dephasing_budget(bundled, N_bar=4.0)
    assert b1["gamma51"] == pytest.approx(b1["gamma0"], rel=1e-12)
    assert b4["gamma51"] == pytest.approx(2.0 * b1["gamma51"], rel=1e-12)
    assert b4["var_55"] == pytest.approx(4.0 * b1["var_55"], rel=1e-12)
    base = dephasing_budget(bundled)
    bumped = dephasing_budget(bundled, rho33=0.14)
    assert bumped["var_33"] / base["var_33"] \
        == pytest.approx(0.14 / 0.070935, rel=1e-3)
    assert bumped["gamma0"] / base["gamma0"] \
        == pytest.approx(math.sqrt(0.14 / 0.070935), rel=1e-3)


def test_budget_cross_coherence_populates_the_exchange_term(bundled):
    mag = 3.8e-7
    b = dephasing_budget(bundled, P41_P51_mag=mag)
    b2 = dephasing_budget(bundled, P41_P51_mag=2.0 * mag)
    assert b["var_45"] > 0.0
    assert b2["var_45"] == pytest.approx(2.0 * b["var_45"], rel=1e-12)


def test_budget_rows_cover_every_entry(bundled):
    b = dephasing_budget(bundled)
    rows = budget_rows(b)
    assert len(rows) == len(b)
    assert {name for name, _, _ in rows} == set(b)
    units = dict((name, unit) for name, _, unit in rows)
    assert units["tau_sw"] == "s" and units["R_B"] == "m"
