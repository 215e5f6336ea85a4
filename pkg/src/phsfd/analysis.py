"""Error fields, their norms, and the truncation-error decomposition.

Two error vectors are studied.  The operator error compares the discrete
Laplacian applied to the exact field against the exact source:

    e_op(i) = sum_j w_ij u(x_j) - f(x_i)   (interior; boundary entries 0)

The solution error compares exact and numerical solutions with the
orientation that makes the assembled matrix map one onto the other,

    e_sol(i) = u(x_i) - u_num(x_i),  so that  A e_sol = e_op

up to solver tolerance (boundary entries are exactly zero thanks to the
identity rows).  The operator error also equals the tail of the Taylor
expansion of u over the stencil: for every exponent pair beyond the
reproduced degree, the term

    deriv_u(a,b)(x_i) / (a! b!) * sum_j w_ij (x_j-x_i)^a (y_j-y_i)^b

contributes at order h^(a+b-2), since the weights scale as h^-2.
Grouping terms by total degree and feeding each group back through the
global solve shows which orders survive inversion unchanged.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import manufactured
from .errors import SlopeFitError
from .geometry import NodeSet, StencilSet
from .linsys import SparseSystem, bicgstab
from .rbf import WeightSet


@dataclass
class ErrorField:
    """Per-node signed errors; kind is 'operator' or 'solution'."""

    values: np.ndarray
    kind: str


@dataclass
class TruncationTerm:
    """One Taylor term of the operator error, for exponents beyond degree m."""

    exponents: tuple[int, int]
    values: np.ndarray  # full length, zero at boundary nodes

    @property
    def degree(self) -> int:
        return self.exponents[0] + self.exponents[1]

    @property
    def h_power(self) -> int:
        return self.degree - 2


@dataclass
class TermGroup:
    """Sum of all truncation terms sharing a total degree."""

    degree: int
    values: np.ndarray

    @property
    def h_power(self) -> int:
        return self.degree - 2


def operator_error(
    nodes: NodeSet, stencils: StencilSet, weights: WeightSet, R: float = 1.0
) -> ErrorField:
    """Discrete-minus-exact Laplacian of the exact field at interior nodes."""
    values = np.zeros(nodes.n_nodes)
    if len(stencils):
        u_all = manufactured.exact_u(nodes.xy[:, 0], nodes.xy[:, 1], R)
        centers = stencils.centers
        discrete = (weights.weights * u_all[stencils.members]).sum(axis=1)
        values[centers] = discrete - manufactured.rhs_f(
            nodes.xy[centers, 0], nodes.xy[centers, 1], R
        )
    return ErrorField(values=values, kind="operator")


def solution_error(solution: np.ndarray, nodes: NodeSet, R: float = 1.0) -> ErrorField:
    """Exact-minus-numerical solution; boundary entries forced to exact zero."""
    values = manufactured.exact_u(nodes.xy[:, 0], nodes.xy[:, 1], R) - np.asarray(solution)
    values[nodes.boundary_indices] = 0.0
    return ErrorField(values=values, kind="solution")


def error_norms(e: ErrorField) -> tuple[float, float]:
    """(mean l1, l-infinity) over all N entries of the field."""
    v = e.values
    return float(np.abs(v).sum() / v.shape[0]), float(np.abs(v).max())


def truncation_terms(
    nodes: NodeSet,
    stencils: StencilSet,
    weights: WeightSet,
    R: float,
    m: int,
    d_max: int,
) -> list[TruncationTerm]:
    """All Taylor terms of the operator error with m < a+b <= d_max."""
    if d_max <= m:
        raise ValueError(f"d_max must exceed the augmentation degree, got {d_max} <= {m}")
    centers = stencils.centers
    dx = nodes.xy[stencils.members, 0] - nodes.xy[centers, 0][:, None]
    dy = nodes.xy[stencils.members, 1] - nodes.xy[centers, 1][:, None]
    # Cumulative powers up to d_max; dx_pow[a] is dx**a.
    dx_pow = [np.ones_like(dx)]
    dy_pow = [np.ones_like(dy)]
    for _ in range(d_max):
        dx_pow.append(dx_pow[-1] * dx)
        dy_pow.append(dy_pow[-1] * dy)

    cx = nodes.xy[centers, 0]
    cy = nodes.xy[centers, 1]
    terms = []
    for degree in range(m + 1, d_max + 1):
        for a in range(degree, -1, -1):
            b = degree - a
            moments = (weights.weights * dx_pow[a] * dy_pow[b]).sum(axis=1)
            coeff = manufactured.exact_deriv(a, b, cx, cy, R) / (
                math.factorial(a) * math.factorial(b)
            )
            values = np.zeros(nodes.n_nodes)
            values[centers] = coeff * moments
            terms.append(TruncationTerm(exponents=(a, b), values=values))
    return terms


def group_terms_by_degree(terms: list[TruncationTerm]) -> list[TermGroup]:
    """Sum terms sharing a total degree, ordered by increasing degree."""
    by_degree: dict[int, np.ndarray] = {}
    for t in terms:
        if t.degree in by_degree:
            by_degree[t.degree] = by_degree[t.degree] + t.values
        else:
            by_degree[t.degree] = t.values.copy()
    return [TermGroup(degree=d, values=by_degree[d]) for d in sorted(by_degree)]


def invert_term(
    system: SparseSystem, term, tol: float = 1.0e-10, max_iter: int | None = None
) -> np.ndarray:
    """Push one error contribution through the global solve.

    Solves A z = t where t carries the term's interior values and zeros
    at boundary rows; accepts any object with a full-length ``values``
    array (a single term, a degree group, or an operator ErrorField).
    """
    t = np.array(term.values, dtype=np.float64, copy=True)
    t[system.row_is_boundary] = 0.0
    result = bicgstab(system, t, tol=tol, max_iter=max_iter)
    if not result.converged:
        from .errors import ConvergenceError

        raise ConvergenceError(
            f"BiCGSTAB stalled at relative residual {result.residual:.3e} "
            f"while inverting an error term"
        )
    return result.x


def fit_slope(scales, errs) -> float:
    """Least-squares slope of log(err) against log(scale)."""
    scales = np.asarray(scales, dtype=np.float64)
    errs = np.asarray(errs, dtype=np.float64)
    if scales.shape[0] < 2 or errs.shape[0] != scales.shape[0]:
        raise SlopeFitError(f"need at least 2 matching points, got {scales.shape[0]}")
    if not (np.all(scales > 0) and np.all(errs > 0)):
        raise SlopeFitError("scales and errors must all be positive")
    return float(np.polyfit(np.log(scales), np.log(errs), 1)[0])
