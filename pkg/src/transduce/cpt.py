"""Zero-order trapped state of the driven three-level triad and the
six-wave dark state.

Phases: Rabi frequencies may be complex; the formulas are applied with the
conjugation pattern written out below, so real inputs reduce to the usual
real expressions.
"""
import numpy as np


class CptState:
    """Populations and coherence of the trapped superposition."""

    def __init__(self, rho11, rho33, rho13):
        self.rho11 = rho11
        self.rho33 = rho33
        self.rho13 = rho13

    def check(self, tol=1e-12):
        assert abs(self.rho11 + self.rho33 - 1.0) <= tol
        assert abs(abs(self.rho13) ** 2 - self.rho11 * self.rho33) <= tol
        assert -tol <= self.rho11 <= 1.0 + tol
        return True


class DarkStateAmplitudes:
    def __init__(self, c1, c3, c5):
        self.c1 = c1
        self.c3 = c3
        self.c5 = c5

    def norm(self):
        return abs(self.c1) ** 2 + abs(self.c3) ** 2 + abs(self.c5) ** 2


def cpt_zero_order(omega_P, omega_A):
    """Trapped-state density-matrix elements for pump/auxiliary driving.

    rho11 = |A|^2/(|P|^2+|A|^2), rho33 = |P|^2/(...), rho13 = -P A/(...).

    Raises ValueError if both drives vanish (state undefined).
    """
    p2 = abs(omega_P) ** 2
    a2 = abs(omega_A) ** 2
    s = p2 + a2
    if s == 0:
        raise ValueError("undefined trapped state: both drive fields are zero")
    return CptState(rho11=a2 / s, rho33=p2 / s,
                    rho13=-omega_P * omega_A / s)


def dark_state(omega_W, omega_A, omega_P, omega_M):
    """Normalized six-wave dark-state amplitudes on levels 1, 3, 5.

    (c1, c3, c5) proportional to (W* A*, -W* P, M* P).
    """
    c1 = np.conj(omega_W) * np.conj(omega_A)
    c3 = -np.conj(omega_W) * omega_P
    c5 = np.conj(omega_M) * omega_P
    n = np.sqrt(abs(c1) ** 2 + abs(c3) ** 2 + abs(c5) ** 2)
    if n == 0:
        raise ValueError("undefined dark state: all product amplitudes zero")
    return DarkStateAmplitudes(c1 / n, c3 / n, c5 / n)
