"""Blackbody microwave noise budget for a needle-shaped converter.

The chain: Bose-Einstein occupation of the ambient field -> photon flux
through the needle surface within the storage bandwidth -> photons captured
per interaction window -> fraction converted to optical output given the
angle-dependent path length through the needle -> noise-equivalent
temperature where converted thermal counts drop to the stray-count floor.

Only rays close to the needle axis traverse enough optical depth to convert
well; a ray entering at polar angle theta sees a chord of length
l(theta) = 2 r / sin(theta) (capped by the needle length), so the conversion
integral is heavily weighted toward grazing incidence.
"""
import math
import warnings

import numpy as np
from scipy import integrate

from .constants import (CONST, THERMAL_BANDWIDTH, THERMAL_NU, THERMAL_T,
                        THERMAL_TAU_INT, STRAY_COUNT)
from .spectral import od_scaling


class ThermalScenario:
    """Geometry, band, and environment for the noise budget."""

    def __init__(self, nu=THERMAL_NU, T_env=THERMAL_T, B=THERMAL_BANDWIDTH,
                 tau_int=THERMAL_TAU_INT, r_med=66e-6, L=20e-3, eta_max=0.93):
        self.nu = nu
        self.T_env = T_env
        self.B = B
        self.tau_int = tau_int
        self.r_med = r_med
        self.L = L
        self.eta_max = eta_max
        self.validate()

    def validate(self):
        if self.nu <= 0 or self.B < 0 or self.tau_int < 0:
            raise ValueError("frequency must be positive, band and window "
                             "nonnegative")
        if not 0 < 2 * self.r_med < self.L:
            raise ValueError("needle geometry requires 0 < 2 r_med < L")
        if not 0 <= self.eta_max <= 1:
            raise ValueError("eta_max is an efficiency, must sit in [0, 1]")

    @property
    def area(self):
        return 2 * math.pi * self.r_med ** 2 + 2 * math.pi * self.r_med * self.L

    @property
    def theta_min(self):
        return math.asin(2 * self.r_med / self.L)


def mean_occupation(nu, T):
    """Mean photon number of a mode at nu in a bath at T:
    1/(exp(h nu/kB T) - 1).  T = 0 returns the limit 0 with a warning."""
    if nu <= 0:
        raise ValueError("frequency must be positive")
    if T < 0:
        raise ValueError("temperature must be nonnegative")
    if T == 0:
        warnings.warn("zero-temperature bath: occupation pinned to 0",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    return 1.0 / math.expm1(CONST.h * nu / (CONST.kB * T))


def thermal_flux(scenario):
    """Narrowband photon flux onto the needle surface:
    Phi = (2 nu^2 nbar / c^2) * pi * A * B."""
    nb = mean_occupation(scenario.nu, scenario.T_env)
    return (2.0 * scenario.nu ** 2 / CONST.c ** 2) * nb * math.pi \
        * scenario.area * scenario.B


def stored_thermal_photons(Phi, tau_int):
    """Photons of one polarization captured during the interaction window:
    N = Phi * tau / 2."""
    return Phi * tau_int / 2.0


def solid_angle_weight(theta):
    """Probability density of incidence polar angle for isotropic
    irradiation: sin(theta)/2, normalized over [0, pi]."""
    return math.sin(theta) / 2.0


def conversion_efficiency_profile(scenario, d_M=0.75e6):
    """Conversion efficiency as a function of traversed path length.

    Built on the optical-depth scaling law: a chord of length l carries
    optical depth d_M*l/L, and the loss budget (1 - eta_max)*d_M calibrated
    at the full length scales down with it.  Reduces to
    eta(l) = max(0, 1 - (1 - eta_max) L/l), independent of d_M itself.
    """
    L = scenario.L
    beta_eff = (1.0 - scenario.eta_max) * d_M

    def eta(l):
        return od_scaling(d_M * l / L, beta_eff)

    return eta


def converted_noise_count(scenario, eta_of_length=None, N_stored=None):
    """Thermal photons converted to optical output per pulse.

    Integrates the chord-efficiency over incidence angle,

        n_th = int_{theta_min}^{pi - theta_min} eta(2r/sin th) N sin(th)/2 dth
               + 2 eta_max N (1 - cos theta_min) / (4 pi),

    with the second term the paraxial cap patch where rays run the full
    needle length at peak efficiency.  The quadrature splits at the angle
    where the efficiency profile reaches zero (found by bisection, assuming
    the profile falls monotonically away from grazing incidence) so the
    adaptive rule never stalls on the dead zone.
    """
    if eta_of_length is None:
        eta_of_length = conversion_efficiency_profile(scenario)
    if N_stored is None:
        N_stored = stored_thermal_photons(thermal_flux(scenario),
                                          scenario.tau_int)
    r, th_min = scenario.r_med, scenario.theta_min

    def eta_theta(th):
        return eta_of_length(2.0 * r / math.sin(th))

    def f(th):
        return eta_theta(th) * solid_angle_weight(th) * N_stored

    # locate the efficiency cutoff angle in [theta_min, pi/2]
    if eta_theta(math.pi / 2) > 0.0:
        th0 = math.pi / 2
    else:
        lo, hi = th_min, math.pi / 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if eta_theta(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        th0 = lo

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val1, err1 = integrate.quad(f, th_min, th0, limit=200)
        val2, err2 = integrate.quad(f, math.pi - th0, math.pi - th_min,
                                    limit=200)
    bad = [w for w in caught if issubclass(w.category,
                                           integrate.IntegrationWarning)]
    if bad:
        raise RuntimeError(
            "angular quadrature did not converge (200 subdivisions, "
            f"errors {err1:.2e}/{err2:.2e}): {bad[0].message}")
    bulk = val1 + val2
    if bulk > 0 and (err1 + err2) > 1e-4 * bulk:
        raise RuntimeError(
            f"angular quadrature above tolerance: {err1 + err2:.2e} "
            f"absolute on a bulk term of {bulk:.6e}")
    cap = 2.0 * scenario.eta_max * N_stored * (1.0 - math.cos(th_min)) \
        / (4.0 * math.pi)
    return bulk + cap


def noise_count_vs_temperature(scenario, T_grid, eta_of_length=None):
    """n_th over a temperature grid.

    The conversion integral is linear in the captured photon number, which
    itself scales with the Bose occupation, so one reference evaluation at
    T_env is rescaled across the grid.
    """
    base = converted_noise_count(scenario, eta_of_length=eta_of_length)
    nb_ref = mean_occupation(scenario.nu, scenario.T_env)
    out = []
    for T in T_grid:
        out.append((T, base * mean_occupation(scenario.nu, T) / nb_ref))
    return out


def noise_equivalent_temperature(n_th_ref, n_st, scenario, tol=1e-9):
    """Temperature at which converted thermal counts fall to the stray
    floor: solves n_th(T) = n_st by bisection on the Bose factor.

    n_th_ref is the converted count at scenario.T_env.  Returns
    (T_NE, flagged); flagged is set when the floor exceeds the reference
    count, putting the crossing above the ambient temperature.
    """
    if n_st <= 0:
        raise ValueError("stray count must be positive to define a crossing")
    nb_ref = mean_occupation(scenario.nu, scenario.T_env)

    def n_th_at(T):
        return n_th_ref * mean_occupation(scenario.nu, T) / nb_ref

    if n_st == n_th_ref:
        return scenario.T_env, True
    if n_st > n_th_ref:
        lo, hi = scenario.T_env, 1e6
        flagged = True
    else:
        lo, hi = 1e-3, scenario.T_env
        flagged = False
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        if n_th_at(mid) < n_st:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi), flagged


class NoiseBudget:
    """Assembled budget for one scenario; all counts per pulse."""

    def __init__(self, scenario, n_st=STRAY_COUNT, eta_of_length=None):
        self.scenario = scenario
        self.n_occ = mean_occupation(scenario.nu, scenario.T_env)
        self.Phi = thermal_flux(scenario)
        self.N_stored = stored_thermal_photons(self.Phi, scenario.tau_int)
        self.n_th = converted_noise_count(scenario,
                                          eta_of_length=eta_of_length)
        self.n_st = n_st
        self.T_NE, self.T_NE_flagged = noise_equivalent_temperature(
            self.n_th, n_st, scenario)
        if self.n_th > self.N_stored:
            raise ValueError("converted count exceeds captured photons; "
                             "efficiency profile is unphysical")

    def rows(self):
        return [("n_occ", self.n_occ, "1"),
                ("Phi", self.Phi, "Hz"),
                ("N_stored", self.N_stored, "1"),
                ("n_th", self.n_th, "1"),
                ("n_st", self.n_st, "1"),
                ("T_NE", self.T_NE, "K"),
                ("T_NE_flagged", float(self.T_NE_flagged), "bool")]
