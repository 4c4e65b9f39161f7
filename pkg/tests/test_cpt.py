import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transduce.cpt import CptState, cpt_zero_order, dark_state

TWO_PI = 2.0 * math.pi


def test_trapped_state_at_the_working_drive_ratio():
    state = cpt_zero_order(TWO_PI * 2.1e6, TWO_PI * 7.6e6)
    assert state.rho33 == pytest.approx(2.1 ** 2 / (2.1 ** 2 + 7.6 ** 2),
                                        rel=1e-12)
    assert state.rho11 == pytest.approx(7.6 ** 2 / (2.1 ** 2 + 7.6 ** 2),
                                        rel=1e-12)
    assert state.rho33 == pytest.approx(0.070935, abs=5e-7)
    assert state.check()


def test_trapped_state_purity_identity_to_machine_precision():
    state = cpt_zero_order(TWO_PI * 2.1e6, TWO_PI * 7.6e6)
    assert abs(abs(state.rho13) ** 2 - state.rho11 * state.rho33) <= 1e-12
    assert state.rho13 < 0  # real positive drives pull the coherence negative


def test_trapped_state_unpopulated_limits():
    assert cpt_zero_order(0.0, TWO_PI * 7.6e6).rho33 == 0.0
    assert cpt_zero_order(TWO_PI * 2.1e6, 0.0).rho11 == 0.0
    with pytest.raises(ValueError, match="both drive fields"):
        cpt_zero_order(0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(1e2, 1e9), a=st.floats(1e2, 1e9),
       phase=st.floats(0.0, TWO_PI))
def test_trapped_state_invariants_hold_over_the_drive_plane(p, a, phase):
    state = cpt_zero_order(p * complex(math.cos(phase), math.sin(phase)), a)
    assert abs(state.rho11 + state.rho33 - 1.0) <= 1e-12
    assert abs(abs(state.rho13) ** 2 - state.rho11 * state.rho33) <= 1e-12
    assert 0.0 <= state.rho11 <= 1.0


def test_state_check_rejects_an_impure_matrix():
    bad = CptState(rho11=0.8, rho33=0.2, rho13=0.1)
    with pytest.raises(AssertionError):
        bad.check()


def test_dark_state_is_normalized_and_decoupled_from_the_pump_transition():
    d = dark_state(omega_W=TWO_PI * 1.8e6, omega_A=TWO_PI * 7.6e6,
                   omega_P=TWO_PI * 2.1e6, omega_M=TWO_PI * 34.1e3)
    assert d.norm() == pytest.approx(1.0, abs=1e-12)
    # the pump-transition matrix element P*c1 + A*c3 vanishes identically
    resid = TWO_PI * 2.1e6 * d.c1 + TWO_PI * 7.6e6 * d.c3
    assert abs(resid) <= 1e-6 * TWO_PI * 2.1e6


def test_dark_state_with_complex_drives_keeps_the_decoupling():
    W = TWO_PI * 1.8e6 * complex(0.6, 0.8)
    A = TWO_PI * 7.6e6 * complex(0.0, 1.0)
    P = TWO_PI * 2.1e6 * complex(-0.8, 0.6)
    M = TWO_PI * 34.1e3
    d = dark_state(W, A, P, M)
    assert d.norm() == pytest.approx(1.0, abs=1e-12)
    # the auxiliary leg couples through the conjugate amplitude
    assert abs(P * d.c1 + np.conj(A) * d.c3) <= 1e-6 * abs(P)


def test_dark_state_needs_at_least_one_nonzero_product():
    with pytest.raises(ValueError, match="dark state"):
        dark_state(0.0, 0.0, 0.0, TWO_PI * 34.1e3)
