"""Jacobi field dynamics along the geodesic flow.

The separation J between neighboring geodesics obeys the geodesic deviation
(Jacobi-Levi-Civita) equation

    D^2 J^k / D tau^2 + R^k_nml theta'^n J^m theta'^l = 0,

linear in J, with coefficients built from the base geodesic.  Expanding the
covariant derivative in coordinates gives

    J''^mu = -( B^mu_a J'^a + C^mu_a J^a ),
    B^mu_a = 2 Gamma^mu_ab theta'^b,
    C^mu_a = Gamma^mu_ab theta''^b + dGamma^mu_ab/dtheta^n theta'^n theta'^b
           + Gamma^mu_rb Gamma^r_as theta'^s theta'^b + R^mu_nal theta'^n theta'^l,

assembled here from the analytic symbols, their analytic derivatives and the
analytic curvature; no large-tau simplification enters the dynamics.  Along
the closed-form geodesics the coefficients settle exponentially fast to
constants, and the components relax to

    3D:  J^1 -> const + decaying,   J^2 ~ (c1 + c2 tau) e^(-L tau),
         J^3 = (c1 + c2 tau) e^(-lam_f tau)   (exactly critically damped),
    2D:  J^1 -> const + decaying,   J^2 ~ (c1 + c2 tau) e^(-L tau),

with L = sigma0 * lambda the sigma-decay rate of the model.  The metric norm
of J (the intensity) then grows like e^(L tau) because the constant J^1 mode
is measured against the shrinking sigma scale: the growth exponent equals L,
and the constrained model's exponent is smaller by the factor 1/sqrt(2),
the same softening as the entropy slope.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from . import rk
from .fitting import LineFit, fit_basis, fit_line
from .geodesics import GeodesicSpec2D, GeodesicSpec3D, closed_form, _acceleration
from .models import (_christoffel_array_2d, _christoffel_array_3d,
                     _christoffel_derivative_array_2d,
                     _christoffel_derivative_array_3d, _riemann_array_2d,
                     _riemann_array_3d)

J_OVERFLOW = 1e300
EXPONENT_WINDOW = (20.0, 50.0)  # in units of rate * tau


def default_initial(dimension: int):
    """J(0) = (1, ..., 1)/sqrt(n), J'(0) = 0: excites the constant mode."""
    return np.full(dimension, 1.0 / math.sqrt(dimension)), np.zeros(dimension)


def jlc_coefficients(theta: np.ndarray, theta_dot: np.ndarray):
    """The matrices (B, C) of J'' = -(B J' + C J) at one geodesic state.

    Total in sigma != 0 (see the note on trial stages in
    :func:`infogeo.geodesics._acceleration`); integration aborts on the
    positivity floor are handled by the caller.
    """
    theta = np.asarray(theta, dtype=float)
    td = np.asarray(theta_dot, dtype=float)
    if theta.shape[-1] == 3:
        gam = _christoffel_array_3d(theta[1], theta[2])
        dgam = _christoffel_derivative_array_3d(theta[1], theta[2])
        riem = _riemann_array_3d(theta[1])
    else:
        gam = _christoffel_array_2d(theta[1])
        dgam = _christoffel_derivative_array_2d(theta[1])
        riem = _riemann_array_2d(theta[1])
    acc = _acceleration(theta, td)
    B = 2.0 * np.einsum("mab,b->ma", gam, td)
    C = (np.einsum("mab,b->ma", gam, acc)
         + np.einsum("nmab,n,b->ma", dgam, td, td)
         + np.einsum("mrb,ras,s,b->ma", gam, gam, td, td)
         + np.einsum("mnal,n,l->ma", riem, td, td))
    return B, C


def jlc_acceleration(theta, theta_dot, J, J_dot) -> np.ndarray:
    """d^2 J / d tau^2 from the full (non-asymptotic) equation."""
    B, C = jlc_coefficients(theta, theta_dot)
    return -(B @ np.asarray(J_dot, dtype=float) + C @ np.asarray(J, dtype=float))


def intensity(theta: np.ndarray, J: np.ndarray) -> float:
    """Metric norm sqrt(g_lm J^l J^m); weights are the diagonal metric."""
    theta = np.asarray(theta, dtype=float)
    J = np.asarray(J, dtype=float)
    if theta.shape[-1] == 3:
        _, sx, sy = theta
        return math.sqrt(J[0] ** 2 / sx**2 + 2.0 * J[1] ** 2 / sx**2
                         + 2.0 * J[2] ** 2 / sy**2)
    _, s = theta
    return math.sqrt((J[0] ** 2 + 4.0 * J[1] ** 2) / s**2)


@dataclass(frozen=True)
class JacobiTrajectory:
    """Co-integrated geodesic + Jacobi samples."""

    taus: np.ndarray
    states: np.ndarray        # geodesic theta(tau), (n_samples, dim)
    velocities: np.ndarray
    J: np.ndarray             # (n_samples, dim)
    J_dot: np.ndarray
    rate: float               # sigma0 * lambda of the underlying model
    tolerance: float
    n_steps: int
    complete: bool = True
    abort_reason: Optional[str] = None

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def intensities(self) -> np.ndarray:
        return np.array([intensity(th, j) for th, j in zip(self.states, self.J)])

    def window_mask(self, window: tuple) -> np.ndarray:
        lo, hi = window[0] / self.rate, window[1] / self.rate
        return (self.taus >= lo - 1e-12) & (self.taus <= hi + 1e-12)


_LOG_FLOOR = math.log(1e-300)
# curvature coefficients carry 1/sigma^2, so the JLC system needs sigma
# comfortably above sqrt(double minimum), tighter than the geodesic floor
_JLC_LOG_FLOOR = math.log(1e-150)


def _scaled_geodesic_state(theta0: np.ndarray, vel0: np.ndarray) -> np.ndarray:
    # (mu, log sigma..., scaled velocities): sigma decays exponentially on
    # useful horizons, so raw coordinates lose all relative accuracy once
    # sigma drops below the absolute tolerance; logs and the ratios
    # u = mu'/sigma_x, v = sigma_x'/sigma_x, w = sigma_y'/sigma_y stay O(1).
    dim = theta0.shape[-1]
    logs = np.log(theta0[1:])
    ratios = np.empty(dim)
    ratios[0] = vel0[0] / theta0[1]
    ratios[1] = vel0[1] / theta0[1]
    if dim == 3:
        ratios[2] = vel0[2] / theta0[2]
    return np.concatenate([[theta0[0]], logs, ratios])


def _unscale(dim: int, geo: np.ndarray):
    if dim == 3:
        mu, lx, ly, u, v, w = geo
        sx, sy = math.exp(lx), math.exp(ly)
        theta = np.array([mu, sx, sy])
        td = np.array([u * sx, v * sx, w * sy])
    else:
        mu, lx, u, v = geo
        sx = math.exp(lx)
        theta = np.array([mu, sx])
        td = np.array([u * sx, v * sx])
    return theta, td


def _component_scales(theta: np.ndarray) -> np.ndarray:
    # per-component normalization of J: the sigma scale its metric weight
    # carries (1/sx^2, 2/sx^2, 2/sy^2 resp. 1/s^2, 4/s^2)
    if theta.shape[-1] == 3:
        return np.array([theta[1], theta[1], theta[2]])
    return np.array([theta[1], theta[1]])


def _scale_rates(dim: int, geo: np.ndarray) -> np.ndarray:
    # d/dtau of log component scales
    if dim == 3:
        return np.array([geo[4], geo[4], geo[5]])
    return np.array([geo[3], geo[3]])


def integrate_jlc(spec, initial_J=None, initial_J_dot=None,
                  tau_max: Optional[float] = None, tol: float = 1e-10,
                  sample_taus=None, raise_on_abort: bool = False) -> JacobiTrajectory:
    """Co-integrate geodesic and Jacobi field as one first-order system.

    The augmented state has dimension 2n + 2n: the geodesic factor
    (parameterized by mu, log sigma and the velocity/sigma ratios) plus the
    metric-normalized Jacobi components K = J / sigma-scale and their
    rates.  Both parameterizations keep every quantity relative-accurate
    however far sigma has decayed; reported values are mapped back to
    (theta, theta', J, J').  Geodesic initial data come from the exact
    closed form at tau = 0; Jacobi initial data default to
    :func:`default_initial`.  Stops early (flagged, or raising when
    ``raise_on_abort``) on the sigma positivity floor or a normalized
    component exceeding 1e300.
    """
    dim = 3 if isinstance(spec, GeodesicSpec3D) else 2
    if not 1e-13 <= tol <= 1e-6:
        raise DomainError("tol must lie in [1e-13, 1e-6]")
    if tau_max is None:
        tau_max = EXPONENT_WINDOW[1] / spec.rate
    J0, Jd0 = default_initial(dim)
    if initial_J is not None:
        J0 = np.asarray(initial_J, dtype=float)
    if initial_J_dot is not None:
        Jd0 = np.asarray(initial_J_dot, dtype=float)
    if J0.shape != (dim,) or Jd0.shape != (dim,):
        raise DomainError(f"Jacobi initial data must have shape ({dim},)")
    if not (np.all(np.isfinite(J0)) and np.all(np.isfinite(Jd0))):
        raise DomainError("Jacobi initial data must be finite")

    theta0, vel0 = closed_form(spec, 0.0)
    scales0 = _component_scales(theta0)
    rates0 = _scale_rates(dim, _scaled_geodesic_state(theta0, vel0))
    K0 = J0 / scales0
    Kd0 = (Jd0 - rates0 * J0) / scales0
    y0 = np.concatenate([_scaled_geodesic_state(theta0, vel0), K0, Kd0])
    n_geo = 2 * dim

    def rhs(t, y):
        theta, td = _unscale(dim, y[:n_geo])
        K, Kd = y[n_geo:n_geo + dim], y[n_geo + dim:]
        if dim == 3:
            u, v, w = y[3], y[4], y[5]
            geo_dot = np.array([td[0], v, w, u * v, -0.5 * u * u, 0.0])
            r = np.array([v, v, w])
            r_dot = np.array([-0.5 * u * u, -0.5 * u * u, 0.0])
        else:
            u, v = y[2], y[3]
            geo_dot = np.array([td[0], v, u * v, -0.25 * u * u])
            r = np.array([v, v])
            r_dot = np.array([-0.25 * u * u, -0.25 * u * u])
        B, C = jlc_coefficients(theta, td)
        # J = S K with S = diag(sigma scales), r = S'/S: the transformed
        # system M1 = B + 2R, M0 = C + R' + R^2 + B R has O(1) entries at
        # any horizon (B and C are block diagonal, so no sigma_x/sigma_y
        # scale ratios appear).
        M1 = B.copy()
        M1[np.diag_indices(dim)] += 2.0 * r
        M0 = C + B * r[None, :]
        M0[np.diag_indices(dim)] += r_dot + r * r
        return np.concatenate([geo_dot, Kd, -(M1 @ Kd + M0 @ K)])

    def floor(y):
        if np.any(y[1:dim] <= _JLC_LOG_FLOOR):
            return ("sigma coordinate fell below 1e-150; curvature "
                    "coefficients (1/sigma^2) would overflow")
        K = y[n_geo:n_geo + dim]
        if np.any(np.abs(K) > J_OVERFLOW):
            return f"normalized Jacobi component exceeded {J_OVERFLOW:g}"
        scales = np.exp(y[1:dim])[np.array([0, 0, 1] if dim == 3 else [0, 0])]
        if np.any(np.abs(K) * scales > J_OVERFLOW):
            return f"Jacobi component exceeded {J_OVERFLOW:g}"
        return None

    sol = rk.integrate(rhs, (0.0, tau_max), y0, rtol=tol, atol=tol,
                       floor=floor, raise_on_abort=raise_on_abort)
    if sample_taus is not None and sol.complete:
        taus = np.asarray(sample_taus, dtype=float)
        ys = sol(taus)
    else:
        taus, ys = sol.t, sol.y
    n = len(taus)
    states = np.empty((n, dim))
    velocities = np.empty((n, dim))
    J = np.empty((n, dim))
    J_dot = np.empty((n, dim))
    for i in range(n):
        states[i], velocities[i] = _unscale(dim, ys[i, :n_geo])
        scales = _component_scales(states[i])
        rates = _scale_rates(dim, ys[i, :n_geo])
        J[i] = scales * ys[i, n_geo:n_geo + dim]
        J_dot[i] = scales * (ys[i, n_geo + dim:] + rates * ys[i, n_geo:n_geo + dim])
    return JacobiTrajectory(taus=taus, states=states, velocities=velocities,
                            J=J, J_dot=J_dot,
                            rate=spec.rate, tolerance=tol, n_steps=sol.n_steps,
                            complete=sol.complete, abort_reason=sol.abort_reason)


# ---------------------------------------------------------------------------
# asymptotic structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiConstants:
    """Integration constants of the asymptotic component forms.

    ``C[k]`` holds the two constants of component k+1.  ``lambda_decay``
    is L = sigma0 * lambda; for the 3D model ``lambda_f`` drives the third
    component.  A coupled pair built from one 3D spec always satisfies
    L_3d > L_2d > 0 (their ratio is sqrt(2)).
    """

    lambda_decay: float
    C: np.ndarray               # (dim, 2)
    lambda_f: Optional[float] = None

    @property
    def dimension(self) -> int:
        return self.C.shape[0]


def component_bases(constants: JacobiConstants):
    """Basis functions {f1, f2} of each component's asymptotic solution."""
    L = constants.lambda_decay
    bases = [
        (lambda t: np.ones_like(t), lambda t: np.exp(-2.0 * L * t)),
        (lambda t: np.exp(-L * t), lambda t: t * np.exp(-L * t)),
    ]
    if constants.dimension == 3:
        lf = constants.lambda_f
        bases.append((lambda t: np.exp(-lf * t), lambda t: t * np.exp(-lf * t)))
    return bases


def asymptotic_solutions(constants: JacobiConstants, tau) -> np.ndarray:
    """Evaluate the asymptotic component forms:

    J^1 = C11 + C12 e^(-2L tau)
    J^2 = (C21 + C22 tau) e^(-L tau)
    J^3 = (C31 + C32 tau) e^(-lam_f tau)        (3D only)
    """
    tau = np.asarray(tau, dtype=float)
    cols = []
    for k, (f1, f2) in enumerate(component_bases(constants)):
        c1, c2 = constants.C[k]
        cols.append(c1 * f1(tau) + c2 * f2(tau))
    return np.stack(cols, axis=-1)


def asymptotic_residual(constants: JacobiConstants, tau_grid) -> float:
    """Substitute the asymptotic forms into the constant-coefficient limit ODEs

        J''^1 + 2L J'^1 = 0,   J''^2 + 2L J'^2 + L^2 J^2 = 0,
        J''^3 + 2 lam_f J'^3 + lam_f^2 J^3 = 0,

    with exact derivatives of the forms, and return the max numeric residual
    (pure rounding for any constants).
    """
    L = constants.lambda_decay
    rates = [L] + ([constants.lambda_f] if constants.dimension == 3 else [])
    worst = 0.0
    for tau in np.asarray(tau_grid, dtype=float):
        c1, c2 = constants.C[0]
        e = math.exp(-2.0 * L * tau)
        d1 = -2.0 * L * c2 * e
        d2 = 4.0 * L * L * c2 * e
        worst = max(worst, abs(d2 + 2.0 * L * d1))
        for k, lam in enumerate(rates, start=1):
            c1, c2 = constants.C[k]
            e = math.exp(-lam * tau)
            val = (c1 + c2 * tau) * e
            d1 = (c2 - lam * (c1 + c2 * tau)) * e
            d2 = (lam * lam * (c1 + c2 * tau) - 2.0 * lam * c2) * e
            worst = max(worst, abs(d2 + 2.0 * lam * d1 + lam * lam * val))
    return worst


def critically_damped(lam: float, c1: float, c2: float, tau):
    """(c1 + c2 tau) e^(-lam tau): the double-root solution of
    J'' + 2 lam J' + lam^2 J = 0."""
    tau = np.asarray(tau, dtype=float)
    return (c1 + c2 * tau) * np.exp(-lam * tau)


def extract_constants(traj: JacobiTrajectory, window: tuple = (8.0, 25.0),
                      lambda_f: Optional[float] = None) -> tuple:
    """Fit each component's tail to its asymptotic basis.

    Returns ``(JacobiConstants, residuals)`` where residuals[k] is the max
    misfit of component k relative to its own scale on the window.  The
    window (in rate * tau units) should start late enough that the
    exponentially decaying coefficient corrections are below the target
    accuracy, but not so late that the decaying bases underflow.
    """
    mask = traj.window_mask(window)
    if mask.sum() < 4:
        raise DomainError("extraction window contains too few samples")
    taus = traj.taus[mask]
    L = traj.rate
    constants = JacobiConstants(lambda_decay=L,
                                C=np.zeros((traj.dimension, 2)),
                                lambda_f=lambda_f)
    C = np.zeros((traj.dimension, 2))
    residuals = []
    for k, basis in enumerate(component_bases(constants)):
        coeffs, resid = fit_basis(taus, traj.J[mask, k], basis)
        C[k] = coeffs
        residuals.append(resid)
    return (JacobiConstants(lambda_decay=L, C=C, lambda_f=lambda_f),
            residuals)


# ---------------------------------------------------------------------------
# growth exponents and the softening gap
# ---------------------------------------------------------------------------

def exponent_fit(traj: JacobiTrajectory, window: tuple = EXPONENT_WINDOW) -> LineFit:
    """Least-squares slope of log intensity on the window (rate * tau units).

    The window must start past the crossover where the constant J^1 mode
    dominates; before it the secular tau-terms of the decaying components
    are still visible.
    """
    mask = traj.window_mask(window)
    if mask.sum() < 4:
        raise DomainError("exponent window contains too few samples")
    inten = traj.intensities()[mask]
    if np.any(inten <= 0.0):
        raise DomainError("intensity must be positive on the fit window")
    return fit_line(traj.taus[mask], np.log(inten))


@dataclass(frozen=True)
class JacobiSoftening:
    trajectory_3d: JacobiTrajectory
    trajectory_2d: JacobiTrajectory
    fit_3d: LineFit
    fit_2d: LineFit
    exponent_3d: float
    exponent_2d: float
    gap: float                 # exponent_3d - exponent_2d > 0
    expected_gap: float        # sigma0 * lambda_plus' * (1 - 1/sqrt(2))


def softening_gap(spec3d: GeodesicSpec3D, initial_J=None, initial_J_dot=None,
                  window: tuple = EXPONENT_WINDOW, tol: float = 1e-10) -> JacobiSoftening:
    """Fitted intensity-growth exponents of the coupled pair and their gap."""
    spec2d = GeodesicSpec2D.from_3d(spec3d)
    runs = []
    for spec in (spec3d, spec2d):
        tau_max = window[1] / spec.rate
        n = 3 if isinstance(spec, GeodesicSpec3D) else 2
        samples = np.linspace(0.0, tau_max, 401)
        traj = integrate_jlc(spec, initial_J, initial_J_dot,
                             tau_max=tau_max, tol=tol, sample_taus=samples)
        runs.append((traj, exponent_fit(traj, window)))
    (t3, f3), (t2, f2) = runs
    expected = spec3d.rate * (1.0 - 1.0 / math.sqrt(2.0))
    return JacobiSoftening(trajectory_3d=t3, trajectory_2d=t2,
                           fit_3d=f3, fit_2d=f2,
                           exponent_3d=f3.slope, exponent_2d=f2.slope,
                           gap=f3.slope - f2.slope, expected_gap=expected)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def jacobi_to_csv(traj: JacobiTrajectory) -> str:
    """Columns: tau, J components, intensity, log intensity."""
    names = ",".join(f"J{k + 1}" for k in range(traj.dimension))
    buf = io.StringIO()
    buf.write("# infogeo jacobi csv schema=1\n")
    buf.write(f"tau,{names},intensity,log_intensity\n")
    inten = traj.intensities()
    with np.errstate(divide="ignore"):
        log_inten = np.log(inten)
    for i, tau in enumerate(traj.taus):
        row = [tau, *traj.J[i], inten[i], log_inten[i]]
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def softening_summary(result: JacobiSoftening) -> dict:
    return {
        "exponent_3d": result.exponent_3d,
        "exponent_2d": result.exponent_2d,
        "gap": result.gap,
        "expected_gap": result.expected_gap,
        "r_squared_3d": result.fit_3d.r_squared,
        "r_squared_2d": result.fit_2d.r_squared,
        "fit_window_3d": list(result.fit_3d.window),
        "fit_window_2d": list(result.fit_2d.window),
    }
