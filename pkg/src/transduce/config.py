"""Configuration loading and the master scenario types.

A scenario lives in an INI-style text file with sections [fields], [levels],
[ensemble], [pulse], [grid], [storage].  Every dimensional key carries an
explicit unit suffix (``_mhz``, ``_khz``, ``_ghz``, ``_nm``, ``_um``, ``_mm``,
``_ns``, ``_us`` ...).  Frequencies are given as omega/2pi; internally
everything is angular rad/s, lengths are meters, times are seconds.
"""
import configparser
import io
import os

import numpy as np

from .constants import CONST, TWO_PI


class ConfigError(ValueError):
    """Raised for parse failures and invariant violations.

    Carries the offending field name in .field when one is known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = ""
        if field is not None:
            loc = f" (field: {field})"
        if line is not None:
            loc += f" (line {line})"
        super().__init__(message + loc)


# unit suffix -> multiplier into SI / angular SI
_UNIT_SCALE = {
    "ghz": TWO_PI * 1e9,
    "mhz": TWO_PI * 1e6,
    "khz": TWO_PI * 1e3,
    "hz": TWO_PI,
    "nm": 1e-9,
    "um": 1e-6,
    "mm": 1e-3,
    "m": 1.0,
    "ns": 1e-9,
    "us": 1e-6,
    "s": 1.0,
    "mv": 1e-3,
    "v": 1.0,
    "uk": 1e-6,
    "k": 1.0,
    "percc": 1e6,   # cm^-3 -> m^-3
    "ea0": CONST.e_a0,
}


def key_to_si(key, raw):
    """Convert a unit-suffixed config value to internal units.

    Returns (bare_key, si_value).  Keys without a recognized suffix pass
    through unchanged (dimensionless).
    """
    parts = key.rsplit("_", 1)
    if len(parts) == 2 and parts[1] in _UNIT_SCALE:
        return parts[0], float(raw) * _UNIT_SCALE[parts[1]]
    return key, float(raw)


def si_to_key(bare_key, suffix, si_value):
    """Inverse of key_to_si for writing configs back out."""
    return f"{bare_key}_{suffix}", si_value / _UNIT_SCALE[suffix]


class FieldParams:
    """One driving field: peak Rabi frequency, carrier, dipole, geometry."""

    def __init__(self, name, rabi=0.0, wavelength=None, frequency=None,
                 polarization=None, dipole=None, radius=None):
        self.name = name
        self.rabi = rabi                  # rad/s
        self.polarization = polarization
        self.dipole = dipole              # C m
        self.radius = radius              # m
        if wavelength is None and frequency is not None:
            wavelength = TWO_PI * CONST.c / frequency
        if frequency is None and wavelength is not None:
            frequency = TWO_PI * CONST.c / wavelength
        self.wavelength = wavelength      # m
        self.frequency = frequency        # rad/s (angular carrier)

    def validate(self):
        if self.rabi < 0:
            raise ConfigError("Rabi frequency must be non-negative",
                              field=f"rabi_{self.name}")
        if self.wavelength is not None and self.frequency is not None:
            resid = abs(self.wavelength * self.frequency / (TWO_PI * CONST.c) - 1.0)
            if resid > 1e-6:
                raise ConfigError(
                    f"wavelength*frequency != c (relative error {resid:.2e})",
                    field=f"field_{self.name}")


class LevelScheme:
    def __init__(self, Gamma2, Gamma4, Gamma6, gamma3, gamma51,
                 gamma41=None, gamma61=None,
                 tie_41=True, tie_61=True):
        self.Gamma2 = Gamma2
        self.Gamma4 = Gamma4
        self.Gamma6 = Gamma6
        self.gamma3 = gamma3
        self.gamma51 = gamma51
        self.tie_41 = tie_41
        self.tie_61 = tie_61
        self.gamma41 = Gamma4 if tie_41 else gamma41
        self.gamma61 = Gamma6 / 2.0 if tie_61 else gamma61

    def validate(self):
        for nm in ("Gamma2", "Gamma4", "Gamma6", "gamma3", "gamma51",
                   "gamma41", "gamma61"):
            v = getattr(self, nm)
            if v is None or v < 0:
                raise ConfigError("decay rate must be >= 0", field=nm)
        if self.tie_41 and self.gamma41 != self.Gamma4:
            raise ConfigError("tied gamma41 must equal Gamma4", field="gamma41")
        if self.tie_61 and self.gamma61 != self.Gamma6 / 2.0:
            raise ConfigError("tied gamma61 must equal Gamma6/2", field="gamma61")


class EnsembleParams:
    """Medium geometry, populations and the partial absorption depths."""

    def __init__(self, n_at, L, r_med, w_A, d0, T_atoms,
                 rho11, rho13, d_M, d_L):
        self.n_at = n_at
        self.L = L
        self.r_med = r_med
        self.w_A = w_A
        self.d0 = d0
        self.T_atoms = T_atoms
        self.rho11 = rho11
        self.rho13 = rho13
        self.d_M = d_M
        self.d_L = d_L
        # effective population of the upper trapping level consistent with
        # the stored coherence (pure-state relation)
        self.rho33_eff = abs(rho13) ** 2 / rho11 if rho11 > 0 else 0.0
        self.n1 = rho11 * n_at
        self.n3 = self.rho33_eff * n_at

    def validate(self):
        if self.d_M < 0 or self.d_L < 0:
            raise ConfigError("absorption depths must be >= 0", field="d_M/d_L")
        if not (0.0 <= self.rho11 <= 1.0):
            raise ConfigError("rho11 out of [0,1]", field="rho11")
        if self.rho11 + self.rho33_eff > 1.0 + 1e-9:
            raise ConfigError("rho11 + rho33 exceeds 1", field="rho13")
        if self.L <= 0:
            raise ConfigError("medium length must be positive", field="length")


class PulseSpec:
    def __init__(self, rabi_peak, T_p, t0, N_bar):
        self.rabi_peak = rabi_peak    # rad/s
        self.T_p = T_p                # s, intensity FWHM
        self.t0 = t0                  # s, center
        self.N_bar = N_bar

    def validate(self):
        if self.T_p <= 0:
            raise ConfigError("pulse FWHM must be positive", field="fwhm")
        if self.N_bar < 0:
            raise ConfigError("photon number must be >= 0", field="photon_number")


class SolverGrid:
    """Space-time discretization for the propagation solver."""

    def __init__(self, Nz, dt, window):
        self.Nz = int(Nz)
        self.dt = dt
        self.window = window
        self.Nt = int(round(window / dt))

    @property
    def dz(self):
        # spatial step is defined against the configured medium at run time;
        # stored here as a fraction placeholder (solver divides by Nz-1)
        return 1.0 / (self.Nz - 1)

    def validate(self):
        if self.Nz < 64:
            raise ConfigError("Nz must be >= 64", field="nz")
        if self.Nt < 1024:
            raise ConfigError("time grid must have >= 1024 samples",
                              field="dt/window")
        if self.dt <= 0:
            raise ConfigError("dt must be positive", field="dt")


class StorageSchedule:
    """Timing of the storage episode: write turn-off, hold, read turn-on."""

    def __init__(self, write_off, read_on, hold, backward=True,
                 t_dL_meas=123e-9, T_pL_meas=620e-9, ramp=10e-9):
        self.write_off = write_off
        self.read_on = read_on
        self.hold = hold
        self.backward = backward
        self.t_dL_meas = t_dL_meas
        self.T_pL_meas = T_pL_meas
        self.ramp = ramp

    def validate(self):
        if self.read_on < self.write_off + self.ramp:
            raise ConfigError(
                "write and read controls must never be on simultaneously: "
                "read_on must be >= write_off + ramp", field="read_on")
        if self.hold < 0:
            raise ConfigError("hold time must be >= 0", field="hold")


class TransducerConfig:
    """Full physical scenario. Immutable by convention after validate()."""

    def __init__(self, fields, levels, ensemble, pulse, grid, storage,
                 source_path=None):
        self.fields = fields          # dict name -> FieldParams
        self.levels = levels
        self.ensemble = ensemble
        self.pulse = pulse
        self.grid = grid
        self.storage = storage
        self.source_path = source_path

    def validate(self):
        CONST.check()
        for f in self.fields.values():
            f.validate()
        self.levels.validate()
        self.ensemble.validate()
        self.pulse.validate()
        self.grid.validate()
        self.storage.validate()
        return self


_REQUIRED_SECTIONS = ("fields", "levels", "ensemble", "pulse", "grid", "storage")


def _get(cp, section, key, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key)
    return default


def _get_si(cp, section, bare, suffixes, default=None, required=False):
    """Fetch bare key under any of the allowed unit suffixes."""
    for sfx in suffixes:
        key = f"{bare}_{sfx}"
        if cp.has_option(section, key):
            _, val = key_to_si(key, cp.get(section, key))
            return val
    if required and default is None:
        raise ConfigError(f"missing required key {bare} in [{section}]",
                          field=bare)
    return default


def load_config(path):
    """Parse and validate a scenario file.

    Raises ConfigError with a field/line diagnostic on any problem; never
    returns a partially-built config.
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"parse failure: {exc.message.splitlines()[0]}",
                          line=line) from exc
    missing = [s for s in _REQUIRED_SECTIONS if not cp.has_section(s)]
    if missing:
        raise ConfigError(f"missing sections: {', '.join(missing)}")

    freq_all = ("ghz", "mhz", "khz", "hz")
    fields = {}
    for name in ("p", "a", "w", "r", "m", "l"):
        rabi = _get_si(cp, "fields", f"rabi_{name}", freq_all, default=0.0)
        if rabi < 0:
            raise ConfigError("Rabi frequency must be non-negative",
                              field=f"rabi_{name}")
        wl = _get_si(cp, "fields", f"wavelength_{name}", ("nm", "um", "mm", "m"))
        fr = _get_si(cp, "fields", f"freq_{name}", freq_all)
        pol = _get(cp, "fields", f"pol_{name}")
        dip = _get_si(cp, "fields", f"dipole_{name}", ("ea0",))
        rad = _get_si(cp, "fields", f"radius_{name}", ("um", "mm", "m"))
        fields[name] = FieldParams(name, rabi=rabi, wavelength=wl, frequency=fr,
                                   polarization=pol, dipole=dip, radius=rad)

    levels = LevelScheme(
        Gamma2=_get_si(cp, "levels", "gamma2_total", freq_all, required=True),
        Gamma4=_get_si(cp, "levels", "gamma4_total", freq_all, required=True),
        Gamma6=_get_si(cp, "levels", "gamma6_total", freq_all, required=True),
        gamma3=_get_si(cp, "levels", "dephasing3", freq_all, default=0.0),
        gamma51=_get_si(cp, "levels", "gamma51", freq_all, default=0.0),
        gamma41=_get_si(cp, "levels", "gamma41", freq_all),
        gamma61=_get_si(cp, "levels", "gamma61", freq_all),
        tie_41=cp.getboolean("levels", "gamma41_equals_gamma4", fallback=True),
        tie_61=cp.getboolean("levels", "gamma61_equals_half_gamma6", fallback=True),
    )

    ens = EnsembleParams(
        n_at=_get_si(cp, "ensemble", "density", ("percc",), required=True),
        L=_get_si(cp, "ensemble", "length", ("mm", "um", "m"), required=True),
        r_med=_get_si(cp, "ensemble", "radius", ("um", "mm", "m"), required=True),
        w_A=_get_si(cp, "ensemble", "density_halfwidth", ("mm", "um", "m"),
                    default=None),
        d0=float(_get(cp, "ensemble", "od_global", 141.0)),
        T_atoms=_get_si(cp, "ensemble", "temperature", ("uk", "k"), default=150e-6),
        rho11=float(_get(cp, "ensemble", "rho11", 0.865)),
        rho13=float(_get(cp, "ensemble", "rho13", -0.108349)),
        d_M=float(_get(cp, "ensemble", "od_mw", 0.0)),
        d_L=float(_get(cp, "ensemble", "od_optical", 0.0)),
    )
    if ens.w_A is None:
        ens.w_A = 2.0 * ens.L / 3.0

    pulse = PulseSpec(
        rabi_peak=_get_si(cp, "pulse", "peak_rabi", freq_all, default=1.0),
        T_p=_get_si(cp, "pulse", "fwhm", ("ns", "us", "s"), required=True),
        t0=_get_si(cp, "pulse", "center", ("ns", "us", "s"), required=True),
        N_bar=float(_get(cp, "pulse", "photon_number", 0.0)),
    )

    grid = SolverGrid(
        Nz=int(_get(cp, "grid", "nz", 192)),
        dt=_get_si(cp, "grid", "dt", ("ns", "us", "s"), required=True),
        window=_get_si(cp, "grid", "window", ("ns", "us", "s"), required=True),
    )

    storage = StorageSchedule(
        write_off=_get_si(cp, "storage", "write_off", ("ns", "us", "s"),
                          required=True),
        read_on=_get_si(cp, "storage", "read_on", ("ns", "us", "s"),
                        required=True),
        hold=_get_si(cp, "storage", "hold", ("ns", "us", "s"), default=0.0),
        backward=_get(cp, "storage", "retrieval", "backward") == "backward",
        t_dL_meas=_get_si(cp, "storage", "measured_delay_l", ("ns", "us", "s"),
                          default=123e-9),
        T_pL_meas=_get_si(cp, "storage", "measured_fwhm_l", ("ns", "us", "s"),
                          default=620e-9),
    )

    cfg = TransducerConfig(fields, levels, ens, pulse, grid, storage,
                           source_path=path)
    return cfg.validate()


def dump_config(cfg):
    """Serialize a config back to the file format (for round-trip checks)."""
    cp = configparser.ConfigParser()
    cp.add_section("fields")
    for name, f in cfg.fields.items():
        if f.rabi:
            k, v = si_to_key(f"rabi_{name}", "mhz", f.rabi)
            cp.set("fields", k, repr(v))
        if f.wavelength is not None:
            k, v = si_to_key(f"wavelength_{name}", "nm", f.wavelength)
            cp.set("fields", k, repr(v))
        if f.dipole is not None:
            k, v = si_to_key(f"dipole_{name}", "ea0", f.dipole)
            cp.set("fields", k, repr(v))
        if f.radius is not None:
            k, v = si_to_key(f"radius_{name}", "um", f.radius)
            cp.set("fields", k, repr(v))
        if f.polarization:
            cp.set("fields", f"pol_{name}", f.polarization)
    cp.add_section("levels")
    for bare, val in (("gamma2_total", cfg.levels.Gamma2),
                      ("gamma4_total", cfg.levels.Gamma4),
                      ("gamma6_total", cfg.levels.Gamma6),
                      ("dephasing3", cfg.levels.gamma3),
                      ("gamma51", cfg.levels.gamma51)):
        k, v = si_to_key(bare, "mhz", val)
        cp.set("levels", k, repr(v))
    cp.add_section("ensemble")
    k, v = si_to_key("density", "percc", cfg.ensemble.n_at)
    cp.set("ensemble", k, repr(v))
    k, v = si_to_key("length", "mm", cfg.ensemble.L)
    cp.set("ensemble", k, repr(v))
    k, v = si_to_key("radius", "um", cfg.ensemble.r_med)
    cp.set("ensemble", k, repr(v))
    k, v = si_to_key("density_halfwidth", "mm", cfg.ensemble.w_A)
    cp.set("ensemble", k, repr(v))
    cp.set("ensemble", "od_global", repr(cfg.ensemble.d0))
    k, v = si_to_key("temperature", "uk", cfg.ensemble.T_atoms)
    cp.set("ensemble", k, repr(v))
    cp.set("ensemble", "rho11", repr(cfg.ensemble.rho11))
    cp.set("ensemble", "rho13", repr(cfg.ensemble.rho13))
    cp.set("ensemble", "od_mw", repr(cfg.ensemble.d_M))
    cp.set("ensemble", "od_optical", repr(cfg.ensemble.d_L))
    cp.add_section("pulse")
    k, v = si_to_key("peak_rabi", "khz", cfg.pulse.rabi_peak)
    cp.set("pulse", k, repr(v))
    k, v = si_to_key("fwhm", "ns", cfg.pulse.T_p)
    cp.set("pulse", k, repr(v))
    k, v = si_to_key("center", "ns", cfg.pulse.t0)
    cp.set("pulse", k, repr(v))
    cp.set("pulse", "photon_number", repr(cfg.pulse.N_bar))
    cp.add_section("grid")
    cp.set("grid", "nz", repr(cfg.grid.Nz))
    k, v = si_to_key("dt", "ns", cfg.grid.dt)
    cp.set("grid", k, repr(v))
    k, v = si_to_key("window", "ns", cfg.grid.window)
    cp.set("grid", k, repr(v))
    cp.add_section("storage")
    for bare, val in (("write_off", cfg.storage.write_off),
                      ("read_on", cfg.storage.read_on),
                      ("hold", cfg.storage.hold),
                      ("measured_delay_l", cfg.storage.t_dL_meas),
                      ("measured_fwhm_l", cfg.storage.T_pL_meas)):
        k, v = si_to_key(bare, "ns", val)
        cp.set("storage", k, repr(v))
    cp.set("storage", "retrieval",
           "backward" if cfg.storage.backward else "forward")
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def derive_cross_sections(mu, wavelength, Gamma, n_dens, L):
    """Absorption cross-section and depth for one transition.

    sigma = 4 pi |mu|^2 / (lambda eps0 hbar Gamma), d = n sigma L.
    Returns (sigma, d).
    """
    if Gamma <= 0:
        raise ConfigError("zero decay rate in cross-section",
                          field="Gamma")
    sigma = 4.0 * np.pi * abs(mu) ** 2 / (wavelength * CONST.eps0 *
                                          CONST.hbar * Gamma)
    return sigma, n_dens * sigma * L


def bundled_config_path(name="storage_retrieval.cfg"):
    """Absolute path of a config shipped inside the package."""
    return os.path.join(os.path.dirname(__file__), "data", name)
