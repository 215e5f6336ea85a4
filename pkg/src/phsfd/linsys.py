"""Global sparse system: assembly, BiCGSTAB, and the full solve pipeline.

Interior rows carry the local Laplacian weights at the stencil-member
columns; boundary rows are identity rows enforcing the Dirichlet data.
The matrix is stored in CSR with rows in node order and strictly
increasing column indices per row.
"""

from dataclasses import dataclass

import numpy as np

from . import manufactured
from .backends import core
from .errors import AssemblyError, ConvergenceError
from .geometry import NodeSet, StencilSet, discretize_disc, build_stencils
from .rbf import WeightSet, laplace_weights_all, stencil_size


@dataclass
class SparseSystem:
    """CSR matrix plus right-hand side and per-row kind flags."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    rhs: np.ndarray
    row_is_boundary: np.ndarray

    @property
    def n(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def nnz(self) -> int:
        return self.indices.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.n:
            raise ValueError(f"matrix is {self.n}x{self.n}, vector has length {x.shape[0]}")
        return core.csr_matvec(self.indptr, self.indices, self.data, x)

    def toarray(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for i in range(self.n):
            dense[i, self.indices[self.indptr[i] : self.indptr[i + 1]]] = self.data[
                self.indptr[i] : self.indptr[i + 1]
            ]
        return dense


@dataclass
class SolverResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


def assemble(nodes: NodeSet, stencils: StencilSet, weights: WeightSet) -> SparseSystem:
    """Build the global matrix; the right-hand side is left zeroed."""
    interior = nodes.interior_indices
    if len(stencils) != interior.size or len(weights) != interior.size:
        raise AssemblyError(
            f"{interior.size} interior nodes but {len(stencils)} stencils "
            f"and {len(weights)} weight rows"
        )
    if not np.array_equal(stencils.centers, interior) or not np.array_equal(
        weights.centers, interior
    ):
        raise AssemblyError("stencil/weight centers are not the interior nodes in order")
    if len(stencils) and weights.weights.shape[1] != stencils.n:
        raise AssemblyError(
            f"weight rows have {weights.weights.shape[1]} entries, stencils have {stencils.n}"
        )

    n_total = nodes.n_nodes
    n_stencil = stencils.n if len(stencils) else 0
    counts = np.ones(n_total, dtype=np.int64)
    counts[interior] = n_stencil
    indptr = np.zeros(n_total + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])

    indices = np.empty(indptr[-1], dtype=np.int64)
    data = np.empty(indptr[-1])
    boundary = nodes.boundary_indices
    indices[indptr[boundary]] = boundary
    data[indptr[boundary]] = 1.0

    if len(stencils):
        order = np.argsort(stencils.members, axis=1)
        cols = np.take_along_axis(stencils.members, order, axis=1)
        vals = np.take_along_axis(weights.weights, order, axis=1)
        spans = indptr[interior][:, None] + np.arange(n_stencil)[None, :]
        indices[spans] = cols
        data[spans] = vals

    return SparseSystem(
        indptr=indptr,
        indices=indices,
        data=data,
        rhs=np.zeros(n_total),
        row_is_boundary=nodes.is_boundary.copy(),
    )


def build_rhs(nodes: NodeSet, f, g) -> np.ndarray:
    """Source values at interior nodes, Dirichlet values at boundary nodes."""
    rhs = np.empty(nodes.n_nodes)
    interior = nodes.interior_indices
    boundary = nodes.boundary_indices
    rhs[interior] = f(nodes.xy[interior, 0], nodes.xy[interior, 1])
    rhs[boundary] = g(nodes.xy[boundary, 0], nodes.xy[boundary, 1])
    return rhs


def bicgstab(
    system: SparseSystem,
    b: np.ndarray,
    tol: float = 1.0e-10,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> SolverResult:
    """Unpreconditioned BiCGSTAB with relative-residual stopping."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != system.n:
        raise ValueError(f"matrix is {system.n}x{system.n}, rhs has length {b.shape[0]}")
    if max_iter is None:
        max_iter = 10 * system.n
    if x0 is None:
        x0 = np.zeros_like(b)
    x, iterations, residual, converged = core.bicgstab(
        system.indptr, system.indices, system.data, b, x0, float(tol), int(max_iter)
    )
    return SolverResult(x=x, iterations=iterations, residual=residual, converged=converged)


@dataclass
class PoissonSolution:
    """Everything produced by one pipeline run."""

    nodes: NodeSet
    stencils: StencilSet
    weights: WeightSet
    result: SolverResult
    system: SparseSystem


def solve_poisson(
    h: float, m: int, seed: int = 0, R: float = 1.0, tol: float = 1.0e-10
) -> PoissonSolution:
    """Full pipeline on the dilated test problem.

    Discretise, build stencils of size (m+1)(m+2), compute weights,
    assemble, and solve with BiCGSTAB (zero initial guess, at most 10*N
    iterations).  Raises ConvergenceError if the solver stalls.
    """
    if not 2 <= m <= 6:
        raise ValueError(f"augmentation degree must be in [2, 6], got {m}")
    if not R > 0:
        raise ValueError(f"dilation must be positive, got {R}")
    nodes = discretize_disc(h, seed)
    stencils = build_stencils(nodes, stencil_size(m))
    weights = laplace_weights_all(nodes, stencils, m)
    system = assemble(nodes, stencils, weights)
    system.rhs = build_rhs(
        nodes,
        lambda x, y: manufactured.rhs_f(x, y, R),
        lambda x, y: manufactured.exact_u(x, y, R),
    )
    result = bicgstab(system, system.rhs, tol=tol, max_iter=10 * nodes.n_nodes)
    if not result.converged:
        raise ConvergenceError(
            f"BiCGSTAB stalled at relative residual {result.residual:.3e} "
            f"after {result.iterations} iterations (h={h}, m={m}, seed={seed}, R={R})"
        )
    return PoissonSolution(
        nodes=nodes, stencils=stencils, weights=weights, result=result, system=system
    )
