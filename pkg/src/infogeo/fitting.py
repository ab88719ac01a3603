"""Least-squares helpers for tail-slope and basis-coefficient extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple


def fit_line(x, y) -> LineFit:
    """Ordinary least squares y ~ slope * x + intercept, with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points for a line fit")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite values in the fit window")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LineFit(float(slope), float(intercept), r2,
                   (float(x.min()), float(x.max())))


def fit_basis(x, y, basis_functions):
    """Coefficients c minimizing ||y - sum_j c_j f_j(x)|| plus the relative
    residual max |misfit| / max |y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.column_stack([f(x) for f in basis_functions])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    misfit = y - design @ coeffs
    scale = float(np.abs(y).max()) or 1.0
    return coeffs, float(np.abs(misfit).max()) / scale
