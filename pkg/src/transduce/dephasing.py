"""Mean-field dephasing budget of the collective Rydberg coherence.

Three mechanisms are quantified: van der Waals level-shift dispersion across
the ensemble (with a short-range cutoff at the blockade radius), exchange
coupling between the two channel coherences, and motional washing-out of the
stored spin-wave grating.  Everything here is closed-form; the pair
coefficients are inputs, not computed from atomic structure.

Unit convention: all pair coefficients are carried in angular units
(rad/s * m^n).  Quoted tabletop values in GHz um^n are cyclic frequencies and
must be multiplied by 2*pi on the way in -- `default_interactions()` does
this and records the convention flag, since ratio-type quantities (like the
blockade radius) cannot tell the difference but variances can.
"""
import math

import numpy as np

from .constants import (CONST, TWO_PI, C3_45_HZ_M3, C6_33_HZ_M6,
                        C6_35_HZ_M6, PUMP_LINEWIDTH)
from .cpt import cpt_zero_order


class InteractionParams:
    """Pair-interaction coefficients and the geometry they act in.

    C6_33, C6_55, C6_35: rad/s m^6; C3: rad/s m^3; gamma_pump: rad/s;
    w: coupling-beam 1/e^2 radius (m).  `angular_convention` records how the
    coefficients were obtained from their quoted cyclic values.
    """

    def __init__(self, C6_33, C6_55, C6_35, C3, gamma_pump, w,
                 angular_convention="times-2pi"):
        self.C6_33 = C6_33
        self.C6_55 = C6_55
        self.C6_35 = C6_35
        self.C3 = C3
        self.gamma_pump = gamma_pump
        self.w = w
        self.angular_convention = angular_convention

    @property
    def R_B(self):
        return blockade_radius(self.C6_33, self.gamma_pump)


def default_interactions(w=128e-6):
    """Bundled coefficient set.

    The pumping-level C6 is fixed by inverting the measured blockade radius
    against the pumping linewidth; the cross coefficient and the exchange
    coefficient are the quoted angle-averaged values.  The retrieval-level
    pair coefficient is not measured independently; it is set to the same
    order as the pumping one, which is inconsequential because the retrieval
    level holds only the few stored excitations.
    """
    return InteractionParams(C6_33=TWO_PI * C6_33_HZ_M6,
                             C6_55=TWO_PI * C6_33_HZ_M6,
                             C6_35=TWO_PI * C6_35_HZ_M6,
                             C3=TWO_PI * C3_45_HZ_M3,
                             gamma_pump=PUMP_LINEWIDTH, w=w)


def blockade_radius(C6_33, gamma_pump):
    """Distance inside which a pair shift exceeds the pumping linewidth:
    R_B = (2 C6 / gamma_pump)^(1/6)."""
    if C6_33 <= 0 or gamma_pump <= 0:
        raise ValueError("blockade radius needs positive C6 and linewidth")
    return (2.0 * C6_33 / gamma_pump) ** (1.0 / 6.0)


def level_shift_variance(C6, rho_pop, n_at, R_B):
    """Variance of the collective level shift from pair interactions with
    population fraction rho_pop, cut off below the blockade radius:

        var = 4 pi C6^2 rho n_at / (9 R_B^9)     [(rad/s)^2]
    """
    if R_B <= 0:
        raise ValueError("level-shift variance diverges at R_B <= 0")
    if rho_pop < 0 or n_at < 0:
        raise ValueError("populations and densities must be nonnegative")
    return 4.0 * math.pi * C6 ** 2 * rho_pop * n_at / (9.0 * R_B ** 9)


def gamma51_of_photon_number(N_bar, gamma0):
    """Collective coherence decay at mean stored photon number N_bar:
    exactly sqrt(N_bar) * gamma0."""
    if N_bar < 0:
        raise ValueError("photon number must be nonnegative")
    return math.sqrt(N_bar) * gamma0


def dde_variance(C3, P41_P51_mag, rho11, n_at, R_B, w, exact=False):
    """Variance of the exchange shift coupling the two channel coherences.

        var = 4 pi C3^2 |P41 P51*| n_at / (3 rho11 R_B^3)

    The radial integral runs from the blockade radius out to the coupling
    beam; the closed form drops the outer-limit term (suppressed by
    (R_B/w)^3), `exact=True` keeps it.
    """
    if R_B >= w:
        raise ValueError("blockade radius must sit inside the beam "
                         f"(R_B = {R_B:.2e} m >= w = {w:.2e} m)")
    if P41_P51_mag < 0 or rho11 <= 0 or n_at < 0:
        raise ValueError("bad magnitudes in exchange-variance input")
    core = 4.0 * math.pi * C3 ** 2 * P41_P51_mag * n_at / (3.0 * rho11)
    if exact:
        return core * (1.0 / R_B ** 3 - 1.0 / w ** 3)
    return core / R_B ** 3


def motional_coherence(T, lambda_sw, mass=CONST.m_Rb87):
    """One-dimensional thermal speed and the time for it to wash out a
    spin-wave grating of period lambda_sw: returns (u, tau_sw)."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    u = math.sqrt(CONST.kB * T / mass)
    tau_sw = lambda_sw / (TWO_PI * u)
    return u, tau_sw


def spin_wave_wavelength(k_P, k_A, geometry="copropagating"):
    """Grating period imprinted by the two optical wavevectors.

    'copropagating' uses the magnitude of the signed difference,
    'counterpropagating' the sum.  A vanishing mismatch means a flat
    (infinite-period) grating and is returned as math.inf.
    """
    if geometry == "copropagating":
        dk = abs(k_P - k_A)
    elif geometry == "counterpropagating":
        dk = abs(k_P) + abs(k_A)
    else:
        raise ValueError(f"unknown beam geometry: {geometry!r}")
    if dk == 0.0:
        return math.inf
    return TWO_PI / dk


def dephasing_budget(cfg, N_bar=None, P41_P51_mag=0.0, interactions=None,
                     rho33=None):
    """Assemble the full budget for a transducer configuration.

    Returns a dict with the four level-shift variances, the single- and
    N-photon coherence decay rates, and the motional entries.  The pumping
    Rydberg population driving the shift variances is the zero-order
    trapped-state value from the probe/auxiliary Rabi frequencies (override
    with `rho33`); the retrieval-level population is the N_bar stored
    excitations spread over the ensemble volume.
    """
    par = interactions if interactions is not None else default_interactions()
    ens = cfg.ensemble
    if N_bar is None:
        N_bar = cfg.pulse.N_bar
    R_B = par.R_B
    n_atoms = ens.n_at * math.pi * ens.r_med ** 2 * ens.L
    rho55 = N_bar / n_atoms if n_atoms > 0 else 0.0
    if rho33 is None:
        rho33 = cpt_zero_order(cfg.fields["p"].rabi,
                               cfg.fields["a"].rabi).rho33
    var_33 = level_shift_variance(par.C6_33, rho33, ens.n_at, R_B)
    var_35 = level_shift_variance(par.C6_35, rho33, ens.n_at, R_B)
    var_55 = level_shift_variance(par.C6_55, rho55, ens.n_at, R_B)
    var_45 = dde_variance(par.C3, P41_P51_mag, ens.rho11, ens.n_at, R_B, par.w)
    gamma0 = math.sqrt(var_35)
    k_P = TWO_PI / cfg.fields["p"].wavelength
    k_A = TWO_PI / cfg.fields["a"].wavelength
    lam_sw = spin_wave_wavelength(k_P, k_A)
    u, tau_sw = motional_coherence(ens.T_atoms, lam_sw)
    return {
        "R_B": R_B,
        "var_33": var_33,
        "var_35": var_35,
        "var_55": var_55,
        "var_45": var_45,
        "gamma0": gamma0,
        "gamma51": gamma51_of_photon_number(N_bar, gamma0),
        "N_bar": N_bar,
        "lambda_sw": lam_sw,
        "u": u,
        "tau_sw": tau_sw,
    }


def budget_rows(budget):
    """Flatten a budget dict into (name, value, unit) CSV rows."""
    units = {"R_B": "m", "var_33": "rad2_per_s2", "var_35": "rad2_per_s2",
             "var_55": "rad2_per_s2", "var_45": "rad2_per_s2",
             "gamma0": "rad_per_s", "gamma51": "rad_per_s", "N_bar": "1",
             "lambda_sw": "m", "u": "m_per_s", "tau_sw": "s"}
    return [(k, budget[k], units[k]) for k in units]
