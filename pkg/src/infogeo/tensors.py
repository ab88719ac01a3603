"""Small dense tensor containers for 2- and 3-dimensional manifolds.

Index conventions:

* ``MetricTensor.components[l, m]``      is g_lm (covariant, symmetric).
* ``ChristoffelSymbols.components[k, i, j]`` is Gamma^k_ij (upper index first,
  symmetric in i, j).
* ``RiemannTensor.components[a, m, n, r]`` is R^a_mnr with the first index
  raised, antisymmetric in the last two indices.  Lowering the first index
  with the metric gives R_amnr.
* ``RicciTensor.components[i, j]``       is R_ij = R^k_ikj.

Zero components are stored explicitly so property checks can scan whole
tensors.  All containers are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError


def _as_locked(array, shape) -> np.ndarray:
    out = np.asarray(array, dtype=float)
    if out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    out = out.copy()
    out.flags.writeable = False
    return out


def leading_minors_positive(matrix: np.ndarray, tol: float = 0.0) -> bool:
    """Sylvester criterion: every leading principal minor is positive."""
    for k in range(1, matrix.shape[0] + 1):
        if np.linalg.det(matrix[:k, :k]) <= tol:
            return False
    return True


def invert_symmetric(matrix: np.ndarray) -> np.ndarray:
    """Closed-form inverse for 2x2 / 3x3 symmetric matrices.

    Falls back to ``np.linalg.inv`` for larger sizes.  Raises
    :class:`DomainError` on a (numerically) singular input.
    """
    n = matrix.shape[0]
    det = np.linalg.det(matrix)
    if abs(det) < 1e-300:
        raise DomainError("singular metric, cannot invert")
    if n == 2:
        a, b = matrix[0, 0], matrix[0, 1]
        c = matrix[1, 1]
        return np.array([[c, -b], [-b, a]]) / det
    if n == 3:
        cof = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                minor = np.delete(np.delete(matrix, i, axis=0), j, axis=1)
                cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
        return cof.T / det
    return np.linalg.inv(matrix)


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric positive definite metric at a point."""

    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 2 or comps.shape[0] != comps.shape[1]:
            raise ValueError("metric components must be a square matrix")
        object.__setattr__(self, "components", _as_locked(comps, comps.shape))
        if not np.allclose(comps, comps.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(comps).max())):
            raise DomainError(f"metric is not symmetric:\n{comps}")
        if not leading_minors_positive(comps):
            raise DomainError(f"metric is not positive definite:\n{comps}")

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        """g^lm with g^lm g_mk = delta^l_k."""
        inv = invert_symmetric(self.components)
        inv.flags.writeable = False
        return inv

    @cached_property
    def determinant(self) -> float:
        return float(np.linalg.det(self.components))

    def norm_squared(self, vector: np.ndarray) -> float:
        """g_lm v^l v^m."""
        v = np.asarray(vector, dtype=float)
        return float(v @ self.components @ v)


@dataclass(frozen=True)
class ChristoffelSymbols:
    components: np.ndarray  # [k, i, j]

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        n = comps.shape[0]
        object.__setattr__(self, "components", _as_locked(comps, (n, n, n)))

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    def symmetry_defect(self) -> float:
        """max |Gamma^k_ij - Gamma^k_ji| (zero for a Levi-Civita connection)."""
        c = self.components
        return float(np.abs(c - np.swapaxes(c, 1, 2)).max())


@dataclass(frozen=True)
class RiemannTensor:
    components: np.ndarray  # [a, m, n, r], first index raised

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        n = comps.shape[0]
        object.__setattr__(self, "components", _as_locked(comps, (n, n, n, n)))

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    def antisymmetry_defect(self) -> float:
        """max |R^a_mnr + R^a_mrn|."""
        c = self.components
        return float(np.abs(c + np.swapaxes(c, 2, 3)).max())

    def first_bianchi_defect(self) -> float:
        """max over indices of |R^a_[mnr]| cyclic sum."""
        c = self.components
        cyc = c + np.transpose(c, (0, 2, 3, 1)) + np.transpose(c, (0, 3, 1, 2))
        return float(np.abs(cyc).max())

    def lowered(self, metric: MetricTensor) -> np.ndarray:
        """R_amnr = g_ab R^b_mnr."""
        return np.einsum("ab,bmnr->amnr", metric.components, self.components)

    def ricci(self) -> "RicciTensor":
        """R_mr = R^k_mkr."""
        return RicciTensor(np.einsum("kmkr->mr", self.components))


@dataclass(frozen=True)
class RicciTensor:
    components: np.ndarray  # [i, j]

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        n = comps.shape[0]
        object.__setattr__(self, "components", _as_locked(comps, (n, n)))

    @property
    def dimension(self) -> int:
        return self.components.shape[0]

    def scalar(self, metric: MetricTensor) -> float:
        """R = g^ij R_ij."""
        return float(np.einsum("ij,ij->", metric.inverse, self.components))
