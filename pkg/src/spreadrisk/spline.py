"""Natural cubic spline used for temporal disaggregation to monthly frequency."""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .errors import InsufficientDataError, ValidationError


class NaturalCubicSpline:
    """Interpolating cubic spline with zero second derivative at both end knots.

    Outside the knot range the spline is continued linearly (the natural
    extension, since curvature vanishes at the ends).
    """

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValidationError("knot abscissae and values must be 1-d and of equal length")
        if len(x) < 3:
            raise InsufficientDataError(f"natural cubic spline needs at least 3 knots, got {len(x)}")
        if not (np.diff(x) > 0).all():
            raise ValidationError("knot abscissae must be strictly increasing")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValidationError("knots must be finite")
        self.x = x
        self.y = y
        self.m = self._second_derivatives(x, y)

    @staticmethod
    def _second_derivatives(x, y):
        n = len(x)
        h = np.diff(x)
        slope = np.diff(y) / h
        rhs = 6.0 * np.diff(slope)
        # tridiagonal system for interior curvatures M_1..M_{n-2}
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = h[1:-1]
        ab[1, :] = 2.0 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]
        m = np.zeros(n)
        m[1:-1] = solve_banded((1, 1), ab, rhs)
        return m

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x, y, m = self.x, self.y, self.m
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, len(x) - 2)
        h = x[i + 1] - x[i]
        a = (x[i + 1] - t) / h
        b = (t - x[i]) / h
        inside = a * y[i] + b * y[i + 1] + ((a**3 - a) * m[i] + (b**3 - b) * m[i + 1]) * h * h / 6.0
        left = t < x[0]
        right = t > x[-1]
        if left.any() or right.any():
            d0 = self.derivative(x[0])
            d1 = self.derivative(x[-1])
            inside = np.where(left, y[0] + d0 * (t - x[0]), inside)
            inside = np.where(right, y[-1] + d1 * (t - x[-1]), inside)
        return inside

    def derivative(self, t, order=1):
        t = np.asarray(t, dtype=float)
        x, y, m = self.x, self.y, self.m
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, len(x) - 2)
        h = x[i + 1] - x[i]
        a = (x[i + 1] - t) / h
        b = (t - x[i]) / h
        if order == 1:
            return (y[i + 1] - y[i]) / h + ((1 - 3 * a**2) * m[i] + (3 * b**2 - 1) * m[i + 1]) * h / 6.0
        if order == 2:
            return a * m[i] + b * m[i + 1]
        raise ValueError("order must be 1 or 2")
