"""Closed-form test solution of the Poisson problem and its derivatives.

The field is u(x, y) = 1 + sin(4Rx) + cos(3Rx) + sin(2Ry) with a
dilation factor R; R = 1 is the base problem.  Restricted to the unit
circle it doubles as the Dirichlet data.  All derivatives have closed
forms because the field is additively separable, so mixed partials
vanish identically.
"""

from dataclasses import dataclass

import numpy as np


def _sin_cycle(order: int, arg):
    # d^k/dt^k sin(t) cycles through sin, cos, -sin, -cos.
    k = order % 4
    if k == 0:
        return np.sin(arg)
    if k == 1:
        return np.cos(arg)
    if k == 2:
        return -np.sin(arg)
    return -np.cos(arg)


def _cos_cycle(order: int, arg):
    k = order % 4
    if k == 0:
        return np.cos(arg)
    if k == 1:
        return -np.sin(arg)
    if k == 2:
        return -np.cos(arg)
    return np.sin(arg)


def exact_u(x, y, R: float = 1.0):
    """1 + sin(4Rx) + cos(3Rx) + sin(2Ry)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return 1.0 + np.sin(4.0 * R * x) + np.cos(3.0 * R * x) + np.sin(2.0 * R * y)


def exact_deriv(a: int, b: int, x, y, R: float = 1.0):
    """Partial derivative d^(a+b) u / dx^a dy^b of the dilated field.

    Mixed derivatives (a >= 1 and b >= 1) are identically zero.
    """
    if a < 0 or b < 0:
        raise ValueError("derivative orders must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if a == 0 and b == 0:
        return exact_u(x, y, R)
    if a >= 1 and b >= 1:
        return np.zeros(np.broadcast(x, y).shape)
    if b == 0:
        return (4.0 * R) ** a * _sin_cycle(a, 4.0 * R * x) + (3.0 * R) ** a * _cos_cycle(
            a, 3.0 * R * x
        )
    return (2.0 * R) ** b * _sin_cycle(b, 2.0 * R * y) + np.zeros(np.broadcast(x, y).shape)


def rhs_f(x, y, R: float = 1.0):
    """Laplacian of the exact field; the Poisson source term."""
    return exact_deriv(2, 0, x, y, R) + exact_deriv(0, 2, x, y, R)


@dataclass
class ManufacturedProblem:
    """Dilated test problem; R = 1 recovers the base field."""

    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"dilation must be positive, got {self.R}")

    def u(self, x, y):
        return exact_u(x, y, self.R)

    def deriv(self, a, b, x, y):
        return exact_deriv(a, b, x, y, self.R)

    def f(self, x, y):
        return rhs_f(x, y, self.R)
