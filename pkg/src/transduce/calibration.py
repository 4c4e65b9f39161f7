"""Instrument calibration chain.

Everything that turns raw lab observables into the quantities the engine
consumes: mixer drive voltage -> microwave Rabi frequency, absorption
spectra -> global optical depth, beam geometry + density profile -> mode
cross section and partial optical depths, and detector count rates ->
absolute conversion efficiency.
"""
import math
import warnings

import numpy as np
from scipy.integrate import quad

from .constants import (CONST, TWO_PI, DETECTION_CHAIN, MIXER_CENTER_V,
                        MIXER_PEAK_RABI, MIXER_WIDTH_V)
from .fitting import Model, fit_nlls


# ----------------------------------------------------------------------
# mixer
# ----------------------------------------------------------------------

class MixerCalibration:
    """Gaussian amplitude response of the single-sideband mixer.

    The up-converted Rabi frequency follows
        Omega(U) = Omega_max * exp(-((U - U0) / w)**2)
    over the calibrated drive-voltage range.  `lo_scale` rescales the
    whole curve linearly with the local-oscillator amplitude.

    Attributes:
        omega_max: peak Rabi frequency in rad/s at lo_scale = 1.
        center_v: drive voltage U0 of maximum response, in volts.
        width_v: Gaussian width w in volts.
        v_range: (low, high) voltage interval the fit was taken on.
    """

    def __init__(self, omega_max=MIXER_PEAK_RABI, center_v=MIXER_CENTER_V,
                 width_v=MIXER_WIDTH_V, v_range=(0.0, 0.4)):
        if omega_max <= 0 or width_v <= 0:
            raise ValueError("mixer calibration needs positive peak and width")
        if v_range[1] <= v_range[0]:
            raise ValueError("empty calibration voltage range")
        self.omega_max = float(omega_max)
        self.center_v = float(center_v)
        self.width_v = float(width_v)
        self.v_range = (float(v_range[0]), float(v_range[1]))

    def response(self, voltage, lo_scale=1.0):
        u = np.asarray(voltage, dtype=float)
        amp = self.omega_max * lo_scale * np.exp(
            -(((u - self.center_v) / self.width_v) ** 2))
        return amp if amp.ndim else float(amp)

    def floor(self):
        """Residual drive at zero voltage relative to the peak."""
        return math.exp(-((self.center_v / self.width_v) ** 2))


def default_mixer_calibration():
    return MixerCalibration()


def mixer_output(voltage, cal=None, lo_scale=1.0):
    """Microwave Rabi frequency for a given mixer drive voltage.

    Values outside the calibrated voltage range are extrapolated from the
    Gaussian model and flagged with a warning, since the fit has no data
    there.
    """
    if cal is None:
        cal = default_mixer_calibration()
    u = np.asarray(voltage, dtype=float)
    lo, hi = cal.v_range
    if np.any(u < lo) or np.any(u > hi):
        warnings.warn("drive voltage outside the calibrated range "
                      f"[{lo:g}, {hi:g}] V; extrapolating the Gaussian model")
    return cal.response(voltage, lo_scale=lo_scale)


def triangular_drive(t, period=1e-6, v_peak=0.2):
    """Symmetric triangular voltage sweep 0 -> v_peak -> 0 over one period."""
    t = np.asarray(t, dtype=float)
    half = period / 2.0
    up = v_peak * t / half
    down = v_peak * (period - t) / half
    v = np.where(t <= half, up, down)
    return np.clip(v, 0.0, v_peak)


# ----------------------------------------------------------------------
# ensemble geometry and mode cross section
# ----------------------------------------------------------------------

class GeometryCalibration:
    """Beam and density geometry reduced to the numbers the engine needs.

    Holds the diverging probe-beam radius r(z), the mean-normalized axial
    density profile, the absolute density scale fixed by the measured
    optical depth, the photon-collection cross section S_M, and the
    detection-chain efficiency kappa.
    """

    def __init__(self, L, w_front, rayleigh, w_axial, n_mean, profile_peak,
                 S_M, beta_bar, kappa, center=None):
        self.L = L
        self.w_front = w_front
        self.rayleigh = rayleigh
        self.w_axial = w_axial
        self.n_mean = n_mean
        self.profile_peak = profile_peak
        self.S_M = S_M
        self.beta_bar = beta_bar
        self.kappa = kappa
        self.center = L / 2.0 if center is None else center
        self.validate()

    def validate(self):
        if self.S_M <= 0:
            raise ValueError("cross section must be positive")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("detection efficiency must lie in (0, 1]")
        if self.w_front <= 0 or self.rayleigh <= 0:
            raise ValueError("beam geometry must be positive")

    def radius(self, z):
        """Probe beam radius at position z; never below the front waist."""
        z = np.asarray(z, dtype=float)
        r = self.w_front * np.sqrt(1.0 + (z / self.rayleigh) ** 2)
        return r if r.ndim else float(r)

    def profile(self, z):
        """Mean-normalized axial density shape (averages to one over [0, L])."""
        z = np.asarray(z, dtype=float)
        p = np.exp(-2.0 * ((z - self.center) / self.w_axial) ** 2)
        p = p / self._profile_mean
        return p if p.ndim else float(p)

    def density(self, z):
        """Absolute atom density in 1/m^3 at position z."""
        return self.n_mean * self.profile(z)

    @property
    def n_peak(self):
        return self.n_mean / self.profile_peak

    @property
    def mean_radius(self):
        return math.sqrt(self.S_M / math.pi)


def detection_efficiency(stages=None):
    """Total photon-detection efficiency as a product of chain stages."""
    if stages is None:
        stages = DETECTION_CHAIN
    kappa = 1.0
    for s in stages:
        if not 0.0 < s <= 1.0:
            raise ValueError(f"chain stage {s!r} outside (0, 1]")
        kappa *= s
    return kappa


def density_and_cross_section(d_L, Gamma2, mu12, omega_P, L=20e-3,
                              w_front=54e-6, w_back=79e-6, w_axial=None,
                              kappa=None, center=None):
    """Build the geometry calibration from beam waists and the optical OD.

    The beam radius grows hyperbolically from `w_front` at the cell
    entrance to `w_back` at the exit; the axial density is a Gaussian of
    1/e^2 half-width `w_axial` (default 2L/3) centered at `center`
    (default mid-cell) and normalized so its average over the cell is one.
    The absolute density scale comes from the retrieval-channel optical
    depth:

        n_mean = d_L * Gamma2 / (beta_bar * L),
        beta_bar = 2 * omega_P * |mu12|^2 / (hbar * eps0 * c).

    The photon-collection cross section weights the beam area with the
    squared density profile,

        S_M = (1/L) * int pi r(z)^2 profile(z)^2 dz,

    which reduces to pi r^2 for a collimated beam in a uniform medium.
    """
    if w_back < w_front:
        raise ValueError("beam must not contract along the cell")
    if d_L <= 0 or Gamma2 <= 0 or L <= 0:
        raise ValueError("optical depth, linewidth and length must be positive")
    if w_axial is None:
        w_axial = 2.0 * L / 3.0
    if kappa is None:
        kappa = detection_efficiency()
    if center is None:
        center = L / 2.0

    if w_back == w_front:
        rayleigh = math.inf
    else:
        rayleigh = L / math.sqrt((w_back / w_front) ** 2 - 1.0)

    def r_of_z(z):
        return w_front * np.sqrt(1.0 + (z / rayleigh) ** 2)

    shape = lambda z: np.exp(-2.0 * ((z - center) / w_axial) ** 2)
    shape_mean = quad(shape, 0.0, L)[0] / L
    S_M = quad(lambda z: np.pi * r_of_z(z) ** 2 * (shape(z) / shape_mean) ** 2,
               0.0, L)[0] / L

    beta_bar = 2.0 * omega_P * mu12 ** 2 / (CONST.hbar * CONST.eps0 * CONST.c)
    n_mean = d_L * Gamma2 / (beta_bar * L)

    geom = GeometryCalibration(L=L, w_front=w_front, rayleigh=rayleigh,
                               w_axial=w_axial, n_mean=n_mean,
                               profile_peak=shape_mean, S_M=S_M,
                               beta_bar=beta_bar, kappa=kappa, center=center)
    geom._profile_mean = shape_mean

    # the column density must reproduce n_mean * L by construction
    col = quad(lambda z: geom.density(z), 0.0, L)[0]
    if abs(col - n_mean * L) > 1e-6 * abs(n_mean * L):
        raise RuntimeError("density normalization drifted beyond 1e-6")
    return geom


# ----------------------------------------------------------------------
# photon-number bookkeeping
# ----------------------------------------------------------------------

def microwave_intensity(rabi, mu34):
    """Free-space intensity of a microwave field with Rabi frequency `rabi`.

    I = eps0 * c * E^2 / 2 with the field amplitude E = hbar * Omega / mu34.
    """
    om = np.asarray(rabi, dtype=float)
    I = 0.5 * CONST.eps0 * CONST.c * (CONST.hbar * om / mu34) ** 2
    return I if I.ndim else float(I)


def input_photon_number(rabi_t, ts, mu34, omega_M, S_M):
    """Mean photon number of an input microwave pulse.

    Integrates the intensity carried by the Rabi-frequency waveform over
    time and the collection cross section, then divides by the photon
    energy:  N = S_M * int I(t) dt / (hbar * omega_M).
    """
    if S_M <= 0:
        raise ValueError("cross section must be positive")
    energy_flux = np.trapezoid(microwave_intensity(rabi_t, mu34), ts)
    return S_M * energy_flux / (CONST.hbar * omega_M)


def rabi_peak_for_photon_number(N_bar, T_p, mu34, omega_M, S_M):
    """Invert `input_photon_number` for a Gaussian pulse of FWHM T_p."""
    if N_bar < 0:
        raise ValueError("photon number cannot be negative")
    pulse_integral = T_p * math.sqrt(math.pi / (4.0 * math.log(2.0)))
    I_peak = N_bar * CONST.hbar * omega_M / (S_M * pulse_integral)
    return mu34 / CONST.hbar * math.sqrt(2.0 * I_peak / (CONST.eps0 * CONST.c))


# ----------------------------------------------------------------------
# optical depths
# ----------------------------------------------------------------------

def _global_od_model(Gamma2):
    half2 = (Gamma2 / 2.0) ** 2

    def value(x, p):
        lz = half2 / (x ** 2 + half2)
        return np.exp(-p[0] * lz)

    def jacobian(x, p):
        lz = half2 / (x ** 2 + half2)
        return (-lz * np.exp(-p[0] * lz))[:, None]

    def init(x, y):
        y = np.clip(np.asarray(y, float), 1e-300, 1.0)
        usable = (y > 0.02) & (y < 0.98)
        idx = np.flatnonzero(usable)
        if idx.size == 0:
            idx = np.arange(len(y))
        k = idx[np.argmin(np.abs(y[idx] - math.exp(-1.0)))]
        lz = half2 / (x[k] ** 2 + half2)
        return np.array([max(-math.log(y[k]) / lz, 1e-3)])

    return Model("global_od", ("d0",), value, jacobian, init)


def fit_global_od(detuning, transmission, Gamma2, sigma=None):
    """Fit the resonant optical depth d0 from a transmission spectrum.

    One-parameter fit of T(delta) = exp(-d0 * (G/2)^2 / (delta^2 + (G/2)^2))
    with the linewidth held fixed.  The scan must reach at least three
    linewidths off resonance on each side; a spectrum that is opaque across
    the whole scan carries almost no information about d0 and is flagged.
    """
    detuning = np.asarray(detuning, dtype=float)
    transmission = np.asarray(transmission, dtype=float)
    if detuning.min() > -3.0 * Gamma2 or detuning.max() < 3.0 * Gamma2:
        raise ValueError("scan must extend at least 3 linewidths both ways")
    informative = np.count_nonzero((transmission > 0.02) &
                                   (transmission < 0.98))
    if informative < max(3, transmission.size // 20):
        warnings.warn("transmission spectrum is saturated; the optical-depth "
                      "fit is ill-conditioned")
    model = _global_od_model(Gamma2)
    return fit_nlls(model, detuning, transmission, sigma_y=sigma)


def partial_od(d0, rho11, rho33, mu12, mu34, lambda_P, lambda_M,
               Gamma2, Gamma4):
    """Split the measured global OD into the two channel optical depths.

    The retrieval channel sees the ground-state population directly,
    d_L = rho11 * d0.  The microwave channel rescales by dipole moment,
    wavelength and linewidth,

        d_M = (mu34/mu12)^2 * (lambda_P/lambda_M) * (Gamma2/Gamma4)
              * rho33 * d0.

    Returns (d_M, d_L).
    """
    if not 0.0 <= rho11 <= 1.0 or not 0.0 <= rho33 <= 1.0:
        raise ValueError("populations must lie in [0, 1]")
    if min(d0, Gamma2, Gamma4, lambda_P, lambda_M) <= 0:
        raise ValueError("optical depth, linewidths and wavelengths must be "
                         "positive")
    d_L = rho11 * d0
    d_M = ((mu34 / mu12) ** 2 * (lambda_P / lambda_M) * (Gamma2 / Gamma4)
           * rho33 * d0)
    return d_M, d_L


# ----------------------------------------------------------------------
# absolute efficiency from count rates
# ----------------------------------------------------------------------

def ase_from_counts(counts_light, counts_dark, rabi_t, ts, mu34, omega_M,
                    S_M, kappa=None):
    """Absolute conversion efficiency from photon-counting data.

    eta = hbar * omega_M * (C_light - C_dark)
          / (kappa * S_M * int I_M(t) dt)

    where the denominator is the input microwave pulse energy collected by
    the mode cross section and kappa the detection-chain efficiency.
    """
    if kappa is None:
        kappa = detection_efficiency()
    if not 0.0 < kappa <= 1.0:
        raise ValueError("detection efficiency must lie in (0, 1]")
    if counts_light < counts_dark:
        raise ValueError("signal counts below dark counts")
    pulse_energy = S_M * np.trapezoid(microwave_intensity(rabi_t, mu34), ts)
    if pulse_energy <= 0.0:
        raise ValueError("input pulse carries no energy")
    return (CONST.hbar * omega_M * (counts_light - counts_dark)
            / (kappa * pulse_energy))


def intensity_efficiency_equivalence(N_L, omega_L, S_I, rabi_t, ts, mu34,
                                     omega_M, S_M):
    """Cross-check the photon-number efficiency against the intensity route.

    The photon route divides retrieved by input photon numbers.  The
    intensity route converts the retrieved photons back to pulse energy,
    refers it to the intensity cross section S_I, and compares energy
    fluxes.  When S_I equals the photon-collection cross section S_M the
    two answers agree identically; otherwise the mismatch is flagged.

    Returns (eta_intensity, eta_photon, equivalent).
    """
    flux_in = np.trapezoid(microwave_intensity(rabi_t, mu34), ts)
    if flux_in <= 0.0:
        raise ValueError("input pulse carries no energy")
    N_in = S_M * flux_in / (CONST.hbar * omega_M)
    eta_photon = N_L / N_in
    # energy per unit area out over energy per unit area in, frequency-scaled
    flux_out = N_L * CONST.hbar * omega_L / S_I
    eta_intensity = (flux_out / flux_in) * (omega_M / omega_L)
    equivalent = S_I == S_M
    return eta_intensity, eta_photon, equivalent


# ----------------------------------------------------------------------
# report
# ----------------------------------------------------------------------

def photon_number_table(rabi_peaks, T_p, mu34, omega_M, S_M):
    """Mean photon number for each Gaussian-pulse peak Rabi frequency."""
    rows = []
    pulse_integral = T_p * math.sqrt(math.pi / (4.0 * math.log(2.0)))
    for om in rabi_peaks:
        I_peak = microwave_intensity(om, mu34)
        rows.append((om, S_M * I_peak * pulse_integral
                     / (CONST.hbar * omega_M)))
    return rows


def calibration_report_rows(d0, d_M, d_L, S_M, kappa, photon_rows=None):
    """Flat (quantity, value, unit) rows for the calibration summary."""
    rows = [
        ("global_od", d0, ""),
        ("mw_od", d_M, ""),
        ("optical_od", d_L, ""),
        ("cross_section", S_M, "m^2"),
        ("mean_radius", math.sqrt(S_M / math.pi), "m"),
        ("detection_efficiency", kappa, ""),
    ]
    if photon_rows:
        for om, nbar in photon_rows:
            rows.append((f"photon_number_at_{om / TWO_PI:.6g}_hz", nbar, ""))
    return rows
