"""Frequency-domain kernel, the closed-form efficiency chain, and the
numerical inverse transform they are checked against."""
import math

import numpy as np
import pytest

from conftest import make_config
from transduce.spectral import (broadening_and_delay, detuning_response,
                                efficiency_from_parts, gaussian_closed_form,
                                gaussian_validity, line_center_transmission,
                                mw_kernel, od_scaling,
                                optical_delay_estimate,
                                photon_number_efficiency,
                                propagate_gaussian_analytic,
                                transmission_efficiency)

TWO_PI = 2.0 * math.pi


def test_line_center_transmission_of_the_bundled_scenario(bundled):
    assert line_center_transmission(bundled) == pytest.approx(0.93439362,
                                                              abs=1e-6)


def test_group_delays_and_broadening_coefficients(bundled):
    zeta_M, t_dM, alpha_M, alpha_L, t_dL = broadening_and_delay(bundled)
    assert t_dM == pytest.approx(500e-9, rel=1e-6)
    assert t_dL == pytest.approx(123e-9, rel=1e-12)
    assert alpha_M == pytest.approx(61.613084879662104, rel=1e-10)
    assert alpha_L == pytest.approx(0.4364879789673845, rel=1e-10)
    assert zeta_M == pytest.approx(1.0030214, abs=1e-6)


def test_efficiency_chain_on_the_bundled_scenario(bundled):
    br = transmission_efficiency(bundled)
    assert br.eta == pytest.approx(0.9172471383211485, rel=1e-10)
    assert br.t_d == pytest.approx(623e-9, rel=1e-6)
    total = transmission_efficiency(bundled, gamma51=TWO_PI * 12.8e3)
    assert total.eta == pytest.approx(0.9029970128460206, rel=1e-10)
    # the chain from pre-computed coefficients reproduces the config route
    direct = efficiency_from_parts(bundled.levels.gamma51, br.t_d,
                                   bundled.ensemble.d_M,
                                   bundled.ensemble.d_L,
                                   br.alpha_M, br.alpha_L)
    assert direct == pytest.approx(br.eta, rel=1e-14)


def test_efficiency_ordering_and_row_export(bundled):
    br = transmission_efficiency(bundled)
    assert br.eta <= br.eta0  # dephasing can only cost efficiency
    assert br.eta_M < 1.0 and br.eta_L < 1.0
    names = [n for n, _ in br.rows()]
    assert "alpha_M" in names and "eta" in names


def test_photon_number_efficiency_limits():
    eta0, g0, t_d = 0.88, TWO_PI * 12.8e3, 623e-9
    assert photon_number_efficiency(0.0, eta0, g0, t_d) == eta0
    curve = photon_number_efficiency(np.array([0.3, 3.0, 30.0]),
                                     eta0, g0, t_d)
    assert np.all(np.diff(curve) < 0)
    with pytest.raises(ValueError):
        photon_number_efficiency(-1.0, eta0, g0, t_d)


def test_od_scaling_is_clipped_and_exact_in_the_deep_regime():
    assert od_scaling(8.0796e9, 80796.0) == pytest.approx(1.0 - 1e-5,
                                                          rel=1e-9)
    assert od_scaling(1e3, 80796.0) == 0.0
    assert float(od_scaling(2 * 80796.0, 80796.0)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        od_scaling(0.0, 80796.0)


def test_detuning_response_peaks_at_line_center_with_symmetric_dips(bundled):
    OmW = bundled.fields["w"].rabi
    delta = np.linspace(-TWO_PI * 5e6, TWO_PI * 5e6, 40001)
    resp = detuning_response(delta, bundled)
    # between the absorption dips the response is maximal at line center
    # (far outside the dips the medium is simply transparent again)
    mask = np.abs(delta) < 0.98 * OmW / 2
    k0 = np.flatnonzero(mask)[np.argmax(resp[mask])]
    assert abs(delta[k0]) <= TWO_PI * 20e3
    br = transmission_efficiency(bundled)
    assert resp[k0] == pytest.approx(
        line_center_transmission(bundled) * br.eta_L, rel=1e-9)
    assert np.allclose(resp, resp[::-1], rtol=1e-9, atol=1e-12)
    # absorption dips sit at half the control splitting
    left = resp[delta < -TWO_PI * 0.2e6]
    dip = delta[delta < -TWO_PI * 0.2e6][np.argmin(left)]
    assert abs(dip) == pytest.approx(OmW / 2, rel=0.05)


def test_central_transparency_window_width(bundled):
    OmW = bundled.fields["w"].rabi
    delta = np.linspace(-TWO_PI * 5e6, TWO_PI * 5e6, 400001)
    resp = detuning_response(delta, bundled)
    mask = np.abs(delta) < 0.98 * OmW / 2
    inner, d_in = resp[mask], delta[mask]
    above = inner >= inner.max() / 2
    fwhm = (d_in[above][-1] - d_in[above][0]) / TWO_PI
    assert fwhm == pytest.approx(1.4975e6, abs=2e3)


def test_kernel_has_a_genuine_pole_with_decay_rates_off():
    cfg = make_config(g51=0.0, g41=0.0)
    with pytest.raises(ZeroDivisionError):
        mw_kernel(cfg.fields["w"].rabi / 2.0, cfg)


def test_expansion_validity_flag_tracks_the_control_strength(bundled):
    assert gaussian_validity(bundled)
    assert not gaussian_validity(make_config(OmW0=TWO_PI * 5e3))


def test_optical_delay_estimate_is_the_symmetric_formula(bundled):
    est = optical_delay_estimate(bundled)
    assert est == pytest.approx(0.865 * 122.0 * TWO_PI * 1e6
                                / (TWO_PI * 9e6) ** 2, rel=1e-12)


def test_closed_form_energy_matches_the_channel_efficiency(bundled):
    ts = np.linspace(0.05e-6, 3.05e-6, 6001)
    closed = gaussian_closed_form(ts, bundled)
    br = transmission_efficiency(bundled)
    pulse_energy = bundled.pulse.T_p * math.sqrt(math.pi / (4 * math.log(2)))
    assert np.trapezoid(closed ** 2, ts) / pulse_energy == pytest.approx(
        br.eta_M, rel=1e-4)


def test_full_kernel_waveform_at_the_storage_preset(bundled):
    """The numerically inverted kernel output: delayed well past the
    slow-light estimate and substantially reshaped by the narrow window."""
    ts = np.linspace(0.05e-6, 3.05e-6, 6001)
    _, out, valid = propagate_gaussian_analytic(ts, bundled)
    assert valid
    pk = np.argmax(np.abs(out))
    assert ts[pk] - bundled.pulse.t0 == pytest.approx(960.5e-9, abs=2e-9)
    assert np.abs(out[pk]) == pytest.approx(0.552, abs=5e-3)
    pulse_energy = bundled.pulse.T_p * math.sqrt(math.pi / (4 * math.log(2)))
    eta_fd = np.trapezoid(np.abs(out) ** 2, ts) / pulse_energy
    assert eta_fd == pytest.approx(0.6573, abs=3e-3)


def test_kernel_quadrature_is_stable_under_grid_doubling(bundled):
    ts = np.linspace(0.05e-6, 3.05e-6, 3001)
    _, out1, _ = propagate_gaussian_analytic(ts, bundled, n_omega=4096)
    _, out2, _ = propagate_gaussian_analytic(ts, bundled, n_omega=8192)
    e1 = np.trapezoid(np.abs(out1) ** 2, ts)
    e2 = np.trapezoid(np.abs(out2) ** 2, ts)
    assert abs(e1 / e2 - 1.0) < 1e-3


@pytest.mark.xfail(strict=True,
                   reason="the truncated expansion collapses at the storage "
                          "preset: the pulse bandwidth fills the transparency "
                          "window, so the closed form misses the reshaping "
                          "the full kernel predicts")
def test_closed_form_tracks_the_full_kernel_at_the_storage_preset(bundled):
    ts = np.linspace(0.05e-6, 3.05e-6, 6001)
    closed, out, _ = propagate_gaussian_analytic(ts, bundled)
    l2 = math.sqrt(np.trapezoid((np.abs(out) - closed) ** 2, ts)
                   / np.trapezoid(closed ** 2, ts))
    assert l2 <= 0.02


def test_closed_form_does_track_the_kernel_in_the_broadband_window():
    # widening the transparency window (stronger control) restores the
    # expansion's accuracy on the same medium
    OmW = TWO_PI * 25e6
    rho33 = 100e-9 * OmW ** 2 / (TWO_PI * 1e3 * 0.75e6)
    cfg = make_config(OmW0=OmW, rho11=0.47, rho33=rho33, window=2.6e-6)
    ts = np.linspace(0.05e-6, 2.55e-6, 5001)
    closed, out, valid = propagate_gaussian_analytic(ts, cfg)
    assert valid
    l2 = math.sqrt(np.trapezoid((np.abs(out) - closed) ** 2, ts)
                   / np.trapezoid(closed ** 2, ts))
    assert l2 <= 0.02
