"""Time-domain propagation of the storage-and-retrieval episode.

First-order (weak-probe) coherence dynamics coupled to two slaved field
equations, integrated in the co-moving frame.  The three coherences at each
position form a linear system

    d/dt [P_mw, P_spin, P_opt] = A(t) P + b(fields)

whose homogeneous part A -- control-field coupling plus decay -- is advanced
exactly over each step through its eigendecomposition, while the field
sources enter through the phi1/phi2 integrating factors (exponential time
differencing, second order).  The fields themselves are slaved to the
coherences by cumulative trapezoid integration along z.  A couple of
fixed-point corrector sweeps keep the explicit field-coherence coupling
accurate when the collective emission rate per step gets large.

Retrieval reverses the stored spin wave in z (backward readout) or keeps it
in place (forward), zeroes the fast coherences -- their residue is not phase
matched for the new direction -- and integrates onward with the read control
ramping up.
"""
import numpy as np


def phi1(lam):
    """(e^z - 1)/z with a series fallback near zero."""
    lam = np.asarray(lam, dtype=complex)
    out = np.empty_like(lam)
    small = np.abs(lam) < 1e-5
    out[~small] = (np.exp(lam[~small]) - 1.0) / lam[~small]
    ls = lam[small]
    out[small] = 1.0 + ls / 2 + ls ** 2 / 6 + ls ** 3 / 24
    return out


def phi2(lam):
    """(e^z - 1 - z)/z^2 with a series fallback near zero."""
    lam = np.asarray(lam, dtype=complex)
    out = np.empty_like(lam)
    small = np.abs(lam) < 1e-4
    out[~small] = (np.exp(lam[~small]) - 1.0 - lam[~small]) / lam[~small] ** 2
    ls = lam[small]
    out[small] = 0.5 + ls / 6 + ls ** 2 / 24 + ls ** 3 / 120
    return out


class Stepper:
    """Exact one-step propagator for the 3x3 coherence system at fixed
    control amplitudes (decay rates g41/g51/g61, controls OmW/OmR)."""

    def __init__(self, OmW, OmR, g41, g51, g61, dt):
        A = np.array([[-g41, 0.5j * OmW, 0.0],
                      [0.5j * np.conj(OmW), -g51, 0.5j * np.conj(OmR)],
                      [0.0, 0.5j * OmR, -g61]], dtype=complex)
        lam, V = np.linalg.eig(A)
        Vi = np.linalg.inv(V)
        z = lam * dt
        self.E = (V * np.exp(z)) @ Vi
        self.F1 = (V * (dt * phi1(z))) @ Vi
        self.F2 = (V * (dt * phi2(z))) @ Vi


def cumtrapz0(y, dx):
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum((y[1:] + y[:-1]) * (dx / 2), out=out[1:])
    return out


def ramp(t, t_on, t_off, tau=10e-9):
    """Linear switching window: rises on [t_on - tau, t_on], falls on
    [t_off, t_off + tau]."""
    up = np.clip((t - (t_on - tau)) / tau, 0.0, 1.0)
    dn = np.clip(((t_off + tau) - t) / tau, 0.0, 1.0)
    return up * dn


class SpinWaveField:
    """State and recorded waveforms of one propagation run.

    P columns are (microwave coherence, spin-wave coherence, optical
    coherence) on the z grid.  The monitor keeps the running maximum of
    |P|: above 1 the linearized equations are meaningless and the run
    aborts; above 0.1 the `weak_excitation` flag drops, signalling that the
    first-order treatment is getting strained.  It also tracks the largest
    |P_mw * conj(P_spin)| seen, which the cross-channel dephasing estimate
    feeds on.
    """

    def __init__(self, z, ts):
        self.z = z
        self.ts = ts
        self.P = np.zeros((len(z), 3), dtype=complex)
        self.out_M = np.zeros(len(ts), dtype=complex)
        self.out_L = np.zeros(len(ts), dtype=complex)
        self.in_M = np.zeros(len(ts), dtype=complex)
        self.max_abs_P = 0.0
        self.max_cross_product = 0.0
        self.weak_excitation = True
        self._k_resume = 0

    def monitor(self):
        if not self.P.size:
            return
        m = np.abs(self.P).max()
        if m > self.max_abs_P:
            self.max_abs_P = m
        pp = np.abs(self.P[:, 0] * np.conj(self.P[:, 1])).max()
        if pp > self.max_cross_product:
            self.max_cross_product = pp
        if self.max_abs_P > 0.1:
            self.weak_excitation = False
        if self.max_abs_P > 1.0 + 1e-9:
            raise FloatingPointError(
                f"coherence amplitude {self.max_abs_P:.3f} exceeds 1; the "
                "linearized model has left its domain")

    @property
    def P51(self):
        return self.P[:, 1]


class _Medium:
    """Field slaving and source terms for the coupled system."""

    def __init__(self, cfg):
        ens, lv = cfg.ensemble, cfg.levels
        self.rho11 = ens.rho11
        self.rho13 = ens.rho13
        self.L = ens.L
        Nz = cfg.grid.Nz
        self.z = np.linspace(0.0, ens.L, Nz)
        self.dz = ens.L / (Nz - 1)
        self.kap_M = ens.rho13 * ens.d_M * lv.Gamma4 / (2 * ens.rho11 * ens.L)
        self.kap_L = ens.d_L * lv.Gamma6 / (2 * ens.L)

    def fields(self, P, in_M, in_L=0.0):
        Om_M = in_M + 1j * self.kap_M * cumtrapz0(P[:, 0], self.dz)
        Om_L = in_L + 1j * self.kap_L * cumtrapz0(P[:, 2], self.dz)
        return Om_M, Om_L

    def source(self, Om_M, Om_L):
        b = np.zeros((len(self.z), 3), dtype=complex)
        b[:, 0] = 0.5j * self.rho13 * Om_M
        b[:, 2] = 0.5j * self.rho11 * Om_L
        return b

    def advance(self, field, stepper, in_M, n_corr):
        Om_M0, Om_L0 = self.fields(field.P, in_M)
        b0 = self.source(Om_M0, Om_L0)
        base = field.P @ stepper.E.T + b0 @ stepper.F1.T
        field.P = base
        for _ in range(n_corr):
            Om_M1, Om_L1 = self.fields(field.P, in_M)
            b1 = self.source(Om_M1, Om_L1)
            field.P = base + (b1 - b0) @ stepper.F2.T
        return self.fields(field.P, in_M)


def _controls(cfg, reading):
    OmW0 = cfg.fields["w"].rabi
    OmR0 = cfg.fields["r"].rabi
    st = cfg.storage

    def at(t):
        w = OmW0 * float(ramp(t, 0.0, st.write_off, st.ramp))
        r = (OmR0 * float(ramp(t, st.read_on + st.ramp, np.inf, st.ramp))
             if reading else 0.0)
        return w, r

    return at


def _run_window(field, med, cfg, k_stop, reading, n_corr):
    lv, grid = cfg.levels, cfg.grid
    controls = _controls(cfg, reading)
    cache = {}
    ts = field.ts
    k = field._k_resume
    while k < k_stop:
        OmW, OmR = controls(ts[k] + grid.dt / 2)
        key = (OmW, OmR)
        if key not in cache:
            cache[key] = Stepper(OmW, OmR, lv.gamma41, lv.gamma51,
                                 lv.gamma61, grid.dt)
        Om_M, Om_L = med.advance(field, cache[key], field.in_M[k + 1], n_corr)
        field.out_M[k + 1] = Om_M[-1]
        field.out_L[k + 1] = Om_L[-1]
        k += 1
        field.monitor()
    field._k_resume = k


def input_pulse_amplitude(cfg):
    """Peak coherence-rate amplitude of the input pulse: the single-photon
    peak scaled by sqrt(mean photon number), or 1 (normalized run) when the
    pulse carries no physical scale.  Efficiencies are scale invariant."""
    pl = cfg.pulse
    if pl.rabi_peak > 0:
        return pl.rabi_peak * np.sqrt(pl.N_bar) if pl.N_bar > 0 else pl.rabi_peak
    return 1.0


def simulate_storage(cfg, until=None, n_corr=2):
    """Write phase: drive the input pulse in, switch the write control off.

    Integrates from t = 0 to `until` (default: the end of the write ramp)
    and returns (SpinWaveField, stored spin wave).  The input is gated off
    once the write control has closed.  With an empty microwave channel
    (d_M = 0) the medium is exactly transparent: the input reappears at the
    output unchanged and the stored wave is identically zero.
    """
    grid, pl, st = cfg.grid, cfg.pulse, cfg.storage
    med = _Medium(cfg)
    ts = np.arange(grid.Nt + 1) * grid.dt
    field = SpinWaveField(med.z, ts)
    amp = input_pulse_amplitude(cfg)
    in_M = amp * np.exp(-2.0 * np.log(2) * ((ts - pl.t0) / pl.T_p) ** 2)
    in_M[ts > st.write_off + st.ramp] = 0.0
    field.in_M = in_M

    if cfg.ensemble.d_M == 0.0:
        field.out_M = in_M.copy()
        field._k_resume = grid.Nt
        return field, field.P51.copy()

    t_stop = st.write_off + st.ramp if until is None else until
    k_stop = min(grid.Nt, int(round(t_stop / grid.dt)))
    _run_window(field, med, cfg, k_stop, reading=False, n_corr=n_corr)
    return field, field.P51.copy()


def simulate_retrieval(spin_wave, cfg, direction="backward", field=None,
                       n_corr=2):
    """Read phase from a stored spin wave.

    direction 'backward' reverses the spatial profile before reading;
    'forward' reads in place.  Either way the fast coherences are zeroed --
    their residue is not phase matched for the retrieved mode.  When
    `field` is given, the run continues on that grid and clock from where
    storage stopped; otherwise a fresh clock starting at the read time is
    allocated.  No hold decay is applied here: the caller hands over the
    spin wave as it stands at the read time.  Returns Omega_L(t) on the
    run's time grid.  d_L = 0 short-circuits to an identically zero output.
    """
    if direction not in ("backward", "forward"):
        raise ValueError(f"unknown retrieval direction: {direction!r}")
    grid, st = cfg.grid, cfg.storage
    med = _Medium(cfg)
    if field is None:
        ts = np.arange(grid.Nt + 1) * grid.dt + st.read_on
        field = SpinWaveField(med.z, ts)
    field.P[:, 1] = spin_wave[::-1].copy() if direction == "backward" \
        else np.asarray(spin_wave, dtype=complex).copy()
    field.P[:, 0] = 0.0
    field.P[:, 2] = 0.0

    if cfg.ensemble.d_L == 0.0:
        return field.out_L

    _run_window(field, med, cfg, grid.Nt, reading=True, n_corr=n_corr)
    return field.out_L


def simulate_full_transduction(cfg, n_corr=2):
    """Storage, hold, and retrieval on one continuous clock.

    Returns (SpinWaveField, eta_sim) with eta_sim the photon-number ratio
    of the retrieved optical output to the microwave input, each channel
    weighted by its own flux normalization 1/(d Gamma).
    """
    ens, lv, st = cfg.ensemble, cfg.levels, cfg.storage
    field, _ = simulate_storage(cfg, until=st.read_on, n_corr=n_corr)
    if ens.d_M == 0.0 or ens.d_L == 0.0:
        return field, 0.0
    spin = field.P51.copy()
    direction = "backward" if st.backward else "forward"
    out_L = simulate_retrieval(spin, cfg, direction=direction, field=field,
                               n_corr=n_corr)
    n_in = np.trapezoid(np.abs(field.in_M) ** 2, field.ts) / (ens.d_M * lv.Gamma4)
    n_out = np.trapezoid(np.abs(out_L) ** 2, field.ts) / (ens.d_L * lv.Gamma6)
    return field, n_out / n_in


def stored_fraction(field, cfg):
    """Spin-wave excitation held in the medium over the input photon flux,
    evaluated at the field's current clock position."""
    ens, lv = cfg.ensemble, cfg.levels
    w_M = ens.rho11 * ens.L / (ens.d_M * lv.Gamma4)
    n_in = w_M * np.trapezoid(np.abs(field.in_M) ** 2, field.ts)
    return np.trapezoid(np.abs(field.P51) ** 2, field.z) / n_in


def conservation_defect(cfg, n_corr=2):
    """Excitation-flux bookkeeping over a write-phase run.

    Field channels carry weight rho11 L / (d Gamma), coherences weight one;
    with all decay rates zero the balance (in - out - stored)/in should
    vanish to discretization accuracy.
    """
    ens, lv = cfg.ensemble, cfg.levels
    field, _ = simulate_storage(cfg, until=cfg.grid.Nt * cfg.grid.dt,
                                n_corr=n_corr)
    w_M = ens.rho11 * ens.L / (ens.d_M * lv.Gamma4)
    w_L = ens.rho11 * ens.L / (ens.d_L * lv.Gamma6) if ens.d_L > 0 else 0.0
    q_in = np.trapezoid(np.abs(field.in_M) ** 2, field.ts) * w_M
    q_out = np.trapezoid(np.abs(field.out_M) ** 2, field.ts) * w_M \
        + np.trapezoid(np.abs(field.out_L) ** 2, field.ts) * w_L
    q_med = np.trapezoid((np.abs(field.P) ** 2).sum(axis=1), field.z)
    return (q_in - q_out - q_med) / q_in


def waveform_rows(field):
    """CSV rows (t_ns, |in_M|^2, |out_M|^2, |out_L|^2), all three intensity
    traces normalized to the input peak."""
    peak = np.abs(field.in_M).max() ** 2
    if peak == 0:
        peak = 1.0
    return [(t * 1e9, abs(a) ** 2 / peak, abs(b) ** 2 / peak, abs(c) ** 2 / peak)
            for t, a, b, c in zip(field.ts, field.in_M, field.out_M,
                                  field.out_L)]
