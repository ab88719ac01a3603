"""The two Gaussian statistical models and their closed-form geometry.

Model A ("3D"): uncorrelated bivariate Gaussians over a microspace (x, y)
with macro-coordinates theta = (mu_x, sigma_x, sigma_y).  Its Fisher-Rao
metric is diag(1/sigma_x^2, 2/sigma_x^2, 2/sigma_y^2) and the manifold has
constant scalar curvature -1.

Model B ("2D"): the same family restricted by the product constraint
sigma_x * sigma_y = Sigma^2 (a minimum-uncertainty-like relation), leaving
macro-coordinates theta = (mu_x, sigma) with sigma = sigma_x.  The metric
becomes (1/sigma^2) diag(1, 4), independent of Sigma^2, and the scalar
curvature is -1/2.  The constrained manifold is therefore less negatively
curved than the unconstrained one.

The dimensionality labels count macro-variables; the microspace is always
two dimensional.  Everything here is a pure function of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .tensors import ChristoffelSymbols, MetricTensor, RicciTensor, RiemannTensor

_TWO_PI = 2.0 * math.pi


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def _require_positive(name, value):
    _require_finite(name, value)
    if value <= 0.0:
        raise DomainError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class MicroSample:
    """A point (x, y) of the microspace.

    For the constrained model x plays the role of a position and y of its
    conjugate momentum.
    """

    x: float
    y: float

    def __post_init__(self):
        _require_finite("x", self.x)
        _require_finite("y", self.y)


@dataclass(frozen=True)
class ParameterPoint3D:
    """Macro-coordinates (mu_x, sigma_x, sigma_y); scales strictly positive."""

    mu_x: float
    sigma_x: float
    sigma_y: float

    def __post_init__(self):
        _require_finite("mu_x", self.mu_x)
        _require_positive("sigma_x", self.sigma_x)
        _require_positive("sigma_y", self.sigma_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_x, self.sigma_x, self.sigma_y])

    @staticmethod
    def from_array(theta) -> "ParameterPoint3D":
        mu, sx, sy = (float(v) for v in theta)
        return ParameterPoint3D(mu, sx, sy)


@dataclass(frozen=True)
class ParameterPoint2D:
    """Macro-coordinates (mu_x, sigma); sigma strictly positive."""

    mu_x: float
    sigma: float

    def __post_init__(self):
        _require_finite("mu_x", self.mu_x)
        _require_positive("sigma", self.sigma)

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_x, self.sigma])

    @staticmethod
    def from_array(theta) -> "ParameterPoint2D":
        mu, s = (float(v) for v in theta)
        return ParameterPoint2D(mu, s)


@dataclass(frozen=True)
class Model2DConfig:
    """The constraint constant Sigma^2 of sigma_x * sigma_y = Sigma^2."""

    capital_sigma_sq: float = 1.0

    def __post_init__(self):
        _require_positive("capital_sigma_sq", self.capital_sigma_sq)

    def sigma_y(self, sigma: float) -> float:
        """The sigma_y value the constraint assigns to a given sigma."""
        return self.capital_sigma_sq / sigma


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def pdf_3d(theta: ParameterPoint3D, sample: MicroSample) -> float:
    """Density (1 / (2 pi sx sy)) exp(-(x-mu)^2 / (2 sx^2) - y^2 / (2 sy^2))."""
    dx = sample.x - theta.mu_x
    expo = -0.5 * (dx / theta.sigma_x) ** 2 - 0.5 * (sample.y / theta.sigma_y) ** 2
    return math.exp(expo) / (_TWO_PI * theta.sigma_x * theta.sigma_y)


def pdf_2d(theta: ParameterPoint2D, cfg: Model2DConfig, sample: MicroSample) -> float:
    """Density of the constrained family.

    Equals ``pdf_3d`` evaluated at (mu_x, sigma, Sigma^2 / sigma): the
    normalization 1 / (2 pi Sigma^2) absorbs the constraint.
    """
    s2 = cfg.capital_sigma_sq
    dx = sample.x - theta.mu_x
    expo = (-0.5 * (dx / theta.sigma) ** 2
            - 0.5 * (theta.sigma * sample.y) ** 2 / s2**2)
    return math.exp(expo) / (_TWO_PI * s2)


# ---------------------------------------------------------------------------
# metric, connection, curvature (closed forms)
# ---------------------------------------------------------------------------

def metric_3d(theta: ParameterPoint3D) -> MetricTensor:
    """diag(1/sx^2, 2/sx^2, 2/sy^2)."""
    sx, sy = theta.sigma_x, theta.sigma_y
    return MetricTensor(np.diag([1.0 / sx**2, 2.0 / sx**2, 2.0 / sy**2]))


def metric_2d(theta: ParameterPoint2D) -> MetricTensor:
    """(1/sigma^2) diag(1, 4), independent of the constraint constant."""
    s = theta.sigma
    return MetricTensor(np.diag([1.0 / s**2, 4.0 / s**2]))


def _christoffel_array_3d(sx: float, sy: float) -> np.ndarray:
    g = np.zeros((3, 3, 3))
    g[0, 0, 1] = g[0, 1, 0] = -1.0 / sx
    g[1, 0, 0] = 0.5 / sx
    g[1, 1, 1] = -1.0 / sx
    g[2, 2, 2] = -1.0 / sy
    return g


def _christoffel_array_2d(s: float) -> np.ndarray:
    g = np.zeros((2, 2, 2))
    g[0, 0, 1] = g[0, 1, 0] = -1.0 / s
    g[1, 0, 0] = 0.25 / s
    g[1, 1, 1] = -1.0 / s
    return g


def christoffel_3d(theta: ParameterPoint3D) -> ChristoffelSymbols:
    """Non-vanishing symbols:

    Gamma^1_12 = Gamma^1_21 = -1/sx,  Gamma^2_11 = 1/(2 sx),
    Gamma^2_22 = -1/sx,               Gamma^3_33 = -1/sy.
    """
    return ChristoffelSymbols(_christoffel_array_3d(theta.sigma_x, theta.sigma_y))


def christoffel_2d(theta: ParameterPoint2D) -> ChristoffelSymbols:
    """Gamma^1_12 = Gamma^1_21 = -1/s,  Gamma^2_11 = 1/(4 s),  Gamma^2_22 = -1/s."""
    return ChristoffelSymbols(_christoffel_array_2d(theta.sigma))


def _christoffel_derivative_array_3d(sx: float, sy: float) -> np.ndarray:
    d = np.zeros((3, 3, 3, 3))
    d[1, 0, 0, 1] = d[1, 0, 1, 0] = 1.0 / sx**2
    d[1, 1, 0, 0] = -0.5 / sx**2
    d[1, 1, 1, 1] = 1.0 / sx**2
    d[2, 2, 2, 2] = 1.0 / sy**2
    return d


def _christoffel_derivative_array_2d(s: float) -> np.ndarray:
    d = np.zeros((2, 2, 2, 2))
    d[1, 0, 0, 1] = d[1, 0, 1, 0] = 1.0 / s**2
    d[1, 1, 0, 0] = -0.25 / s**2
    d[1, 1, 1, 1] = 1.0 / s**2
    return d


def christoffel_derivative_3d(theta: ParameterPoint3D) -> np.ndarray:
    """Analytic d Gamma^k_ij / d theta^n, indexed [n, k, i, j]."""
    return _christoffel_derivative_array_3d(theta.sigma_x, theta.sigma_y)


def christoffel_derivative_2d(theta: ParameterPoint2D) -> np.ndarray:
    return _christoffel_derivative_array_2d(theta.sigma)


def _riemann_array_3d(sx: float) -> np.ndarray:
    r = np.zeros((3, 3, 3, 3))
    r[0, 1, 0, 1] = -1.0 / sx**2
    r[0, 1, 1, 0] = +1.0 / sx**2
    r[1, 0, 1, 0] = -0.5 / sx**2
    r[1, 0, 0, 1] = +0.5 / sx**2
    return r


def _riemann_array_2d(s: float) -> np.ndarray:
    r = np.zeros((2, 2, 2, 2))
    r[0, 1, 0, 1] = -1.0 / s**2
    r[0, 1, 1, 0] = +1.0 / s**2
    r[1, 0, 1, 0] = -0.25 / s**2
    r[1, 0, 0, 1] = +0.25 / s**2
    return r


def riemann_3d(theta: ParameterPoint3D) -> RiemannTensor:
    """Mixed components, first index raised.

    The only independent non-vanishing component is R^1_212 = -1/sx^2.
    Lowering with the diagonal metric and using the pair symmetry of
    R_amnr yields R^2_121 = -1/(2 sx^2); the remaining entries follow
    from antisymmetry in the last two indices.  The sigma_y direction is
    flat (the manifold is a product with a 1D factor).
    """
    return RiemannTensor(_riemann_array_3d(theta.sigma_x))


def riemann_2d(theta: ParameterPoint2D) -> RiemannTensor:
    """R^1_212 = -1/s^2 and R^2_121 = -1/(4 s^2), plus antisymmetric partners."""
    return RiemannTensor(_riemann_array_2d(theta.sigma))


def ricci_3d(theta: ParameterPoint3D) -> RicciTensor:
    sx = theta.sigma_x
    return RicciTensor(np.diag([-0.5 / sx**2, -1.0 / sx**2, 0.0]))


def ricci_2d(theta: ParameterPoint2D) -> RicciTensor:
    s = theta.sigma
    return RicciTensor(np.diag([-0.25 / s**2, -1.0 / s**2]))


SCALAR_CURVATURE_3D = -1.0
SCALAR_CURVATURE_2D = -0.5


@dataclass(frozen=True)
class ModelGeometry:
    """All closed-form geometric quantities of one model at one point."""

    metric: MetricTensor
    christoffel: ChristoffelSymbols
    riemann: RiemannTensor
    ricci: RicciTensor
    scalar: float


def curvature_3d(theta: ParameterPoint3D) -> ModelGeometry:
    return ModelGeometry(metric_3d(theta), christoffel_3d(theta),
                         riemann_3d(theta), ricci_3d(theta), SCALAR_CURVATURE_3D)


def curvature_2d(theta: ParameterPoint2D) -> ModelGeometry:
    return ModelGeometry(metric_2d(theta), christoffel_2d(theta),
                         riemann_2d(theta), ricci_2d(theta), SCALAR_CURVATURE_2D)
