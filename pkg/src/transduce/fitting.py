"""Weighted nonlinear least squares plus the catalog of fit models used
throughout the analysis, each carrying its analytic Jacobian and a
deterministic initialization heuristic.

The minimizer is a damped Gauss-Newton (Levenberg-Marquardt) iteration on
the weighted residuals: the damping factor starts at 1e-3, divides by ten on
every accepted step and multiplies by ten on every rejected one.  The
residual norm therefore never increases across accepted iterations, and the
convergence flag is tied to the gradient norm alone.
"""
import numpy as np


class Model:
    """A parametric curve with value, analytic Jacobian, and an
    initialization heuristic."""

    def __init__(self, name, param_names, value, jacobian, init):
        self.name = name
        self.param_names = tuple(param_names)
        self.value = value
        self.jacobian = jacobian
        self.init = init

    @property
    def n_params(self):
        return len(self.param_names)


class FitResult:
    def __init__(self, model, params, covariance, residual_norm, converged,
                 iterations):
        self.model = model
        self.params = dict(zip(model.param_names, params))
        self.param_vector = np.asarray(params, dtype=float)
        self.covariance = covariance
        self.residual_norm = residual_norm
        self.converged = converged
        self.iterations = iterations

    @property
    def sigmas(self):
        d = np.sqrt(np.maximum(np.diag(self.covariance), 0.0))
        return dict(zip(self.model.param_names, d))

    def __call__(self, x):
        return self.model.value(np.asarray(x, float), self.param_vector)


def fit_nlls(model, x, y, sigma_y=None, init=None, max_iter=200, gtol=1e-10):
    """Fit `model` to (x, y) with optional per-point uncertainties.

    Deterministic: the same data and starting point always walk the same
    path.  Needs at least one more point than parameters.  Returns a
    FitResult whose `converged` flag means the weighted gradient dropped
    below tolerance, not merely that iterations ran out.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if sigma_y is None:
        w = np.ones_like(y)
    else:
        sigma_y = np.asarray(sigma_y, dtype=float)
        if np.any(sigma_y <= 0):
            raise ValueError("uncertainties must be positive")
        w = 1.0 / sigma_y
    m = model.n_params
    if len(x) < m + 1:
        raise ValueError(f"{model.name} has {m} parameters; need at least "
                         f"{m + 1} points, got {len(x)}")
    p = np.asarray(model.init(x, y) if init is None else init, dtype=float)
    if len(p) != m:
        raise ValueError("starting point has wrong length")

    def residual(pv):
        return (y - model.value(x, pv)) * w

    r = residual(p)
    ssr = float(r @ r)
    lam = 1e-3
    grad_scale = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = model.jacobian(x, p) * w[:, None]
        g = J.T @ r
        gnorm = np.abs(g).max()
        if grad_scale is None:
            grad_scale = max(1.0, gnorm)
        if gnorm <= gtol * grad_scale:
            converged = True
            break
        H = J.T @ J
        accepted = False
        for _ in range(50):
            A = H + lam * np.diag(np.maximum(np.diag(H), 1e-300))
            try:
                step = np.linalg.solve(A, g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_try = p + step
            r_try = residual(p_try)
            ssr_try = float(r_try @ r_try)
            if ssr_try <= ssr:
                p, r, ssr = p_try, r_try, ssr_try
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                break
            lam *= 10.0
            if lam > 1e15:
                break
        if not accepted:
            # damping saturated: either at a minimum (gradient check next
            # pass) or genuinely stuck
            J = model.jacobian(x, p) * w[:, None]
            g = J.T @ r
            converged = np.abs(g).max() <= gtol * grad_scale
            break
    J = model.jacobian(x, p) * w[:, None]
    H = J.T @ J
    dof = max(len(x) - m, 1)
    try:
        cov = np.linalg.inv(H) * (ssr / dof)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(H) * (ssr / dof)
    return FitResult(model, p, cov, ssr, converged, it)


# ----------------------------------------------------------------- models --

def _gaussian_decay():
    def value(x, p):
        A, tc = p
        return A * np.exp(-(x / tc) ** 2)

    def jac(x, p):
        A, tc = p
        e = np.exp(-(x / tc) ** 2)
        return np.stack([e, A * e * 2 * x ** 2 / tc ** 3], axis=1)

    def init(x, y):
        A = float(y.max())
        target = A / np.e
        below = np.nonzero(y < target)[0]
        tc = float(x[below[0]]) if len(below) else float(x.max())
        return np.array([A, max(tc, 1e-12)])

    return Model("gaussian_decay", ("A", "tau_coh"), value, jac, init)


def _exponential_decay():
    def value(x, p):
        A, td = p
        return A * np.exp(-x / td)

    def jac(x, p):
        A, td = p
        e = np.exp(-x / td)
        return np.stack([e, A * e * x / td ** 2], axis=1)

    def init(x, y):
        A = float(y.max())
        ypos = np.maximum(y, 1e-12 * A)
        slope = (np.log(ypos[0]) - np.log(ypos[-1])) / (x[-1] - x[0])
        td = 1.0 / slope if slope > 0 else float(x[-1] - x[0])
        return np.array([A, max(td, 1e-12)])

    return Model("exponential_decay", ("A", "tau_D"), value, jac, init)


def _lorentzian():
    def value(x, p):
        A, x0, wf = p
        h2 = (wf / 2) ** 2
        return A * h2 / ((x - x0) ** 2 + h2)

    def jac(x, p):
        A, x0, wf = p
        h2 = (wf / 2) ** 2
        den = (x - x0) ** 2 + h2
        dA = h2 / den
        dx0 = A * h2 * 2 * (x - x0) / den ** 2
        dw = A * (wf / 2) * (x - x0) ** 2 / den ** 2
        return np.stack([dA, dx0, dw], axis=1)

    def init(x, y):
        A = float(y.max())
        x0 = float(x[np.argmax(y)])
        above = x[y > A / 2]
        wf = float(above.max() - above.min()) if len(above) > 1 \
            else float((x.max() - x.min()) / 4)
        return np.array([A, x0, max(wf, 1e-12)])

    return Model("lorentzian", ("A", "x0", "fwhm"), value, jac, init)


def _od_scaling():
    def value(x, p):
        (beta,) = p
        return 1.0 - beta / x

    def jac(x, p):
        return (-1.0 / x)[:, None]

    def init(x, y):
        return np.array([float(np.median(x * (1.0 - y)))])

    return Model("od_scaling", ("beta",), value, jac, init)


def _photon_number_law(t_d):
    def value(x, p):
        eta0, g0 = p
        return eta0 * np.exp(-2.0 * np.sqrt(x) * g0 * t_d)

    def jac(x, p):
        eta0, g0 = p
        e = np.exp(-2.0 * np.sqrt(x) * g0 * t_d)
        return np.stack([e, -eta0 * e * 2.0 * np.sqrt(x) * t_d], axis=1)

    def init(x, y):
        eta0 = float(y.max())
        i = int(np.argmax(x))
        ratio = max(y[i] / eta0, 1e-12)
        g0 = -np.log(ratio) / (2.0 * np.sqrt(x[i]) * t_d)
        return np.array([eta0, max(g0, 1.0)])

    return Model("photon_number_law", ("eta0", "gamma0"), value, jac, init)


def _mixer_response():
    def value(x, p):
        Om, U0, wv = p
        return Om * np.exp(-(((x - U0) / wv) ** 2))

    def jac(x, p):
        Om, U0, wv = p
        e = np.exp(-(((x - U0) / wv) ** 2))
        dU0 = Om * e * 2 * (x - U0) / wv ** 2
        dw = Om * e * 2 * (x - U0) ** 2 / wv ** 3
        return np.stack([e, dU0, dw], axis=1)

    def init(x, y):
        Om = float(y.max())
        U0 = float(x[np.argmax(y)])
        above = x[y > Om / 2]
        half = float(above.max() - above.min()) / 2 if len(above) > 1 \
            else float((x.max() - x.min()) / 4)
        return np.array([Om, U0, max(half / np.sqrt(np.log(2)), 1e-12)])

    return Model("mixer_response", ("Omega_max", "U0", "width"), value, jac,
                 init)


def _two_level_transmission():
    def value(x, p):
        d0, G2 = p
        h2 = (G2 / 2) ** 2
        return np.exp(-d0 * h2 / (x ** 2 + h2))

    def jac(x, p):
        d0, G2 = p
        h2 = (G2 / 2) ** 2
        den = x ** 2 + h2
        T = np.exp(-d0 * h2 / den)
        dd0 = -T * h2 / den
        # d/dG2 of h2/den = (G2/2) x^2 / den^2
        dG2 = -T * d0 * (G2 / 2) * x ** 2 / den ** 2
        return np.stack([dd0, dG2], axis=1)

    def init(x, y):
        i0 = int(np.argmin(np.abs(x)))
        d0 = -np.log(max(float(y[i0]), 1e-300))
        # half of the log-depth marks |x| = G2/2
        target = np.exp(-d0 / 2)
        off = np.nonzero(y > target)[0]
        G2 = 2 * float(np.min(np.abs(x[off]))) if len(off) \
            else float(x.max() - x.min()) / 4
        return np.array([max(d0, 1e-6), max(G2, 1e-12)])

    return Model("two_level_transmission", ("d0", "Gamma2"), value, jac, init)


def model_catalog(t_d=623e-9):
    """All named fit models; the photon-number law carries the fixed
    delay-product t_d it was measured at."""
    models = [_gaussian_decay(), _exponential_decay(), _lorentzian(),
              _od_scaling(), _photon_number_law(t_d), _mixer_response(),
              _two_level_transmission()]
    return {m.name: m for m in models}


def no_cloning_threshold(decay, level=0.5, tol=1e-4):
    """Longest hold time at which a fitted efficiency decay still clears
    `level`: solves decay(tau) = level by bisection to relative tol.

    The decay must start above the level and fall below it eventually;
    otherwise there is no threshold to report.
    """
    f0 = float(decay(0.0))
    if f0 <= level:
        raise ValueError(f"decay starts at {f0:.4f}, already at or below "
                         f"the {level} threshold")
    hi = 1e-9
    for _ in range(200):
        if float(decay(hi)) < level:
            break
        hi *= 2.0
    else:
        raise ValueError("decay never crosses the threshold")
    lo = 0.0
    while (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if float(decay(mid)) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_report_rows(results):
    """CSV rows (model, parameter, estimate, sigma, residual_norm,
    converged) for a list of FitResults."""
    rows = []
    for res in results:
        sig = res.sigmas
        for name in res.model.param_names:
            rows.append((res.model.name, name, res.params[name], sig[name],
                         res.residual_norm, int(res.converged)))
    return rows
