"""Meshless Poisson solver on the unit disc with cubic polyharmonic splines.

Pipeline: scatter nodes with target spacing h, build nearest-neighbour
stencils, solve an augmented kernel system per stencil for Laplacian
weights, assemble a sparse global system with Dirichlet identity rows,
and solve it with BiCGSTAB.  The analysis layer measures operator and
solution error convergence and decomposes the truncation error into
Taylor terms to track how each order behaves through the global solve.
"""

from .analysis import (
    ErrorField,
    TermGroup,
    TruncationTerm,
    error_norms,
    fit_slope,
    group_terms_by_degree,
    invert_term,
    operator_error,
    solution_error,
    truncation_terms,
)
from .backends import active_backend
from .errors import (
    AssemblyError,
    ConfigError,
    ConvergenceError,
    DegenerateStencilError,
    InsufficientNodesError,
    InvalidSpacingError,
    PhsfdError,
    SlopeFitError,
)
from .geometry import (
    NodeSet,
    StencilSet,
    build_stencils,
    discretize_boundary,
    discretize_disc,
    fill_interior,
)
from .linsys import (
    PoissonSolution,
    SolverResult,
    SparseSystem,
    assemble,
    bicgstab,
    build_rhs,
    solve_poisson,
)
from .manufactured import ManufacturedProblem, exact_deriv, exact_u, rhs_f
from .rbf import (
    LaplaceWeights,
    MonomialBasis,
    WeightSet,
    laplace_weights,
    laplace_weights_all,
    monomial_basis,
    monomial_laplacian_at_origin,
    phs_eval,
    phs_laplacian,
    stencil_size,
)

__version__ = "0.1.0"

__all__ = [
    "ErrorField",
    "TermGroup",
    "TruncationTerm",
    "error_norms",
    "fit_slope",
    "group_terms_by_degree",
    "invert_term",
    "operator_error",
    "solution_error",
    "truncation_terms",
    "active_backend",
    "AssemblyError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateStencilError",
    "InsufficientNodesError",
    "InvalidSpacingError",
    "PhsfdError",
    "SlopeFitError",
    "NodeSet",
    "StencilSet",
    "build_stencils",
    "discretize_boundary",
    "discretize_disc",
    "fill_interior",
    "PoissonSolution",
    "SolverResult",
    "SparseSystem",
    "assemble",
    "bicgstab",
    "build_rhs",
    "solve_poisson",
    "ManufacturedProblem",
    "exact_deriv",
    "exact_u",
    "rhs_f",
    "LaplaceWeights",
    "MonomialBasis",
    "WeightSet",
    "laplace_weights",
    "laplace_weights_all",
    "monomial_basis",
    "monomial_laplacian_at_origin",
    "phs_eval",
    "phs_laplacian",
    "stencil_size",
    "__version__",
]
