import math

import pytest

from transduce.config import (EnsembleParams, FieldParams, LevelScheme,
                              PulseSpec, SolverGrid, StorageSchedule,
                              TransducerConfig, bundled_config_path,
                              load_config)

TWO_PI = 2.0 * math.pi


def make_config(d_M=0.75e6, d_L=122.0, rho11=0.865, rho33=0.013571681,
                G4=TWO_PI * 1e3, G6=TWO_PI * 1e6, g51=TWO_PI * 10.8e3,
                OmW0=TWO_PI * 1.8e6, OmR0=TWO_PI * 9e6, T_p=300e-9,
                L=20e-3, Nz=192, dt=1e-9, t0=0.55e-6, hold=50e-9,
                t_off=None, backward=True, window=2.6e-6,
                g41=None, g61=None, rabi_peak=1.0, N_bar=0.0):
    """Programmatic scenario builder for the propagation tests.

    Defaults reproduce the bundled storage scenario.  t_off=None places the
    write turn-off half a group delay after the pulse center; a huge t_off
    keeps the write control on through the whole window (pure transit).
    The stored coherence is the pure-state value -sqrt(rho11*rho33).
    """
    fields = {
        "p": FieldParams("p", rabi=TWO_PI * 2.1e6, wavelength=780.24e-9),
        "a": FieldParams("a", rabi=TWO_PI * 7.6e6, wavelength=479.7e-9),
        "w": FieldParams("w", rabi=OmW0, frequency=TWO_PI * 22.1e9),
        "r": FieldParams("r", rabi=OmR0, wavelength=479.7e-9),
        "m": FieldParams("m", frequency=TWO_PI * 37.5e9),
    }
    levels = LevelScheme(Gamma2=TWO_PI * 6e6, Gamma4=G4, Gamma6=G6,
                         gamma3=TWO_PI * 0.5e6, gamma51=g51,
                         gamma41=g41, gamma61=g61,
                         tie_41=g41 is None, tie_61=g61 is None)
    if t_off is None:
        t_dM = rho33 * d_M * G4 / OmW0 ** 2
        t_off = t0 + 0.5 * t_dM
    ensemble = EnsembleParams(n_at=2.4e16, L=L, r_med=66e-6,
                              w_A=2.0 * L / 3.0, d0=141.0, T_atoms=150e-6,
                              rho11=rho11, rho13=-math.sqrt(rho11 * rho33),
                              d_M=d_M, d_L=d_L)
    pulse = PulseSpec(rabi_peak=rabi_peak, T_p=T_p, t0=t0, N_bar=N_bar)
    grid = SolverGrid(Nz=Nz, dt=dt, window=window)
    storage = StorageSchedule(write_off=t_off, read_on=t_off + 10e-9 + hold,
                              hold=hold, backward=backward)
    return TransducerConfig(fields, levels, ensemble, pulse, grid,
                            storage).validate()


@pytest.fixture(scope="session")
def bundled():
    return load_config(bundled_config_path())
