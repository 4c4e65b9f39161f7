"""Scenario file parsing, unit handling and validation diagnostics."""
import math

import numpy as np
import pytest

from transduce.config import (ConfigError, EnsembleParams, FieldParams,
                              SolverGrid, StorageSchedule,
                              bundled_config_path, derive_cross_sections,
                              dump_config, key_to_si, load_config)

TWO_PI = 2.0 * math.pi
C_LIGHT = 2.99792458e8


def test_bundled_scenario_loads_and_carries_the_headline_numbers(bundled):
    cfg = bundled
    assert cfg.fields["w"].rabi == pytest.approx(TWO_PI * 1.8e6, rel=1e-12)
    assert cfg.fields["r"].rabi == pytest.approx(TWO_PI * 9.0e6, rel=1e-12)
    assert cfg.fields["p"].rabi == pytest.approx(TWO_PI * 2.1e6, rel=1e-12)
    assert cfg.fields["a"].rabi == pytest.approx(TWO_PI * 7.6e6, rel=1e-12)
    assert cfg.fields["m"].frequency == pytest.approx(TWO_PI * 37.5e9,
                                                      rel=1e-12)
    assert cfg.ensemble.d_M == 7.5e5
    assert cfg.ensemble.d_L == 122.0
    assert cfg.ensemble.rho11 == 0.865
    assert cfg.ensemble.n_at == pytest.approx(2.4e16, rel=1e-12)
    assert cfg.ensemble.L == pytest.approx(20e-3, rel=1e-12)
    assert cfg.grid.Nt == 2600
    assert cfg.storage.backward is True
    assert cfg.levels.gamma51 == pytest.approx(TWO_PI * 10.8e3, rel=1e-12)


def test_wavelength_is_derived_from_carrier_frequency(bundled):
    m = bundled.fields["m"]
    assert m.wavelength == pytest.approx(TWO_PI * C_LIGHT / m.frequency,
                                         rel=1e-12)
    # and the plain cyclic-frequency wavelength c/nu comes out at ~8 mm
    assert m.wavelength == pytest.approx(C_LIGHT / 37.5e9, rel=1e-9)


def test_unit_suffixes_scale_into_angular_si():
    key, val = key_to_si("rabi_w_mhz", "1.8")
    assert key == "rabi_w" and val == pytest.approx(TWO_PI * 1.8e6)
    key, val = key_to_si("wavelength_p_nm", "780.24")
    assert key == "wavelength_p" and val == pytest.approx(780.24e-9)
    key, val = key_to_si("density_percc", "2.4e10")
    assert val == pytest.approx(2.4e16)
    # no recognized suffix: dimensionless passthrough
    key, val = key_to_si("od_global", "141")
    assert key == "od_global" and val == 141.0


def test_dump_and_reload_round_trips_the_scenario(bundled, tmp_path):
    text = dump_config(bundled)
    p = tmp_path / "roundtrip.cfg"
    p.write_text(text)
    cfg = load_config(str(p))
    assert cfg.fields["w"].rabi == pytest.approx(bundled.fields["w"].rabi,
                                                 rel=1e-10)
    assert cfg.levels.Gamma4 == pytest.approx(bundled.levels.Gamma4, rel=1e-10)
    assert cfg.levels.gamma51 == pytest.approx(bundled.levels.gamma51,
                                               rel=1e-10)
    assert cfg.ensemble.rho13 == pytest.approx(bundled.ensemble.rho13,
                                               rel=1e-10)
    assert cfg.ensemble.d_M == bundled.ensemble.d_M
    assert cfg.pulse.T_p == pytest.approx(bundled.pulse.T_p, rel=1e-10)
    assert cfg.grid.Nt == bundled.grid.Nt
    assert cfg.storage.write_off == pytest.approx(bundled.storage.write_off,
                                                  rel=1e-10)
    assert cfg.storage.backward == bundled.storage.backward


def test_missing_file_and_missing_section_raise_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "nope.cfg"))
    p = tmp_path / "partial.cfg"
    p.write_text("[fields]\nrabi_w_mhz = 1.8\n")
    with pytest.raises(ConfigError, match="missing sections"):
        load_config(str(p))


def test_garbled_file_reports_a_line_number(tmp_path):
    p = tmp_path / "broken.cfg"
    p.write_text("rabi_w_mhz = 1.8\n[fields]\n")
    with pytest.raises(ConfigError, match="parse failure") as ei:
        load_config(str(p))
    assert ei.value.line == 1


def test_negative_rabi_is_rejected_with_the_field_name(tmp_path, bundled):
    text = dump_config(bundled).replace("rabi_w_mhz = 1.8", "rabi_w_mhz = -1.8")
    p = tmp_path / "neg.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError, match="rabi_w"):
        load_config(str(p))


def test_inconsistent_wavelength_frequency_pair_is_rejected():
    f = FieldParams("m", wavelength=1e-3, frequency=TWO_PI * 37.5e9)
    with pytest.raises(ConfigError, match="wavelength"):
        f.validate()


def test_overlapping_write_and_read_controls_are_rejected():
    st = StorageSchedule(write_off=800e-9, read_on=805e-9, hold=0.0)
    with pytest.raises(ConfigError, match="read_on"):
        st.validate()


def test_population_bookkeeping_rejects_an_oversized_coherence():
    ens = EnsembleParams(n_at=2.4e16, L=20e-3, r_med=66e-6, w_A=13e-3,
                         d0=141.0, T_atoms=150e-6, rho11=0.5,
                         rho13=-0.6, d_M=7.5e5, d_L=122.0)
    # |rho13|^2/rho11 = 0.72, so rho11 + rho33 = 1.22 > 1
    with pytest.raises(ConfigError, match="exceeds 1"):
        ens.validate()


def test_pure_state_population_follows_from_the_coherence():
    ens = EnsembleParams(n_at=2.4e16, L=20e-3, r_med=66e-6, w_A=13e-3,
                         d0=141.0, T_atoms=150e-6, rho11=0.865,
                         rho13=-math.sqrt(0.865 * 0.013571681),
                         d_M=7.5e5, d_L=122.0)
    assert ens.rho33_eff == pytest.approx(0.013571681, rel=1e-12)
    assert ens.n3 == pytest.approx(ens.rho33_eff * ens.n_at, rel=1e-12)


def test_undersized_grids_are_rejected():
    with pytest.raises(ConfigError, match="nz"):
        SolverGrid(Nz=32, dt=1e-9, window=2.6e-6).validate()
    with pytest.raises(ConfigError, match="1024"):
        SolverGrid(Nz=192, dt=1e-9, window=500e-9).validate()


def test_cross_section_scales_linearly_with_density_and_dipole_squared():
    sigma1, d1 = derive_cross_sections(1e-29, 780e-9, TWO_PI * 6e6,
                                       2.4e16, 20e-3)
    sigma2, d2 = derive_cross_sections(2e-29, 780e-9, TWO_PI * 6e6,
                                       4.8e16, 20e-3)
    assert sigma2 == pytest.approx(4.0 * sigma1, rel=1e-12)
    assert d2 == pytest.approx(8.0 * d1, rel=1e-12)
    assert sigma1 > 0
    with pytest.raises(ConfigError):
        derive_cross_sections(1e-29, 780e-9, 0.0, 2.4e16, 20e-3)


def test_bundled_path_points_inside_the_package():
    path = bundled_config_path()
    assert path.endswith(".cfg")
    cfg = load_config(path)
    assert cfg.source_path == path
