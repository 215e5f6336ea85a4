"""Cubic radial kernel, monomial bases, and local Laplacian weights.

The weights realise the Laplacian at a stencil center as a linear
combination of function values on the stencil: the augmented kernel
system [[Phi, P], [P^T, 0]] is solved per stencil after shifting points
to the center and scaling by the stencil radius, which keeps the dense
solve well conditioned at small spacings.
"""

from dataclasses import dataclass

import numpy as np

from .backends import core
from .errors import DegenerateStencilError
from .geometry import NodeSet, StencilSet

# Kernel exponent of the radial basic function r**KERNEL_EXPONENT.  Kept
# as a named constant: only odd exponents >= 3 keep phs_laplacian valid.
KERNEL_EXPONENT = 3


def phs_eval(r):
    """Radial kernel r**3 for r >= 0."""
    return np.asarray(r, dtype=np.float64) ** 3


def phs_laplacian(r):
    """2D Laplacian of the radial cubic: phi'' + phi'/r = 9r.

    The r = 0 limit is 0 and is returned without any division.
    """
    return 9.0 * np.asarray(r, dtype=np.float64)


@dataclass
class MonomialBasis:
    """All 2D monomials x**a * y**b with a + b <= m.

    Exponent pairs are graded: ordered by total degree, then by
    descending x-exponent within a degree.
    """

    m: int
    exponents: np.ndarray

    @property
    def size(self) -> int:
        return self.exponents.shape[0]


def monomial_basis(m: int) -> MonomialBasis:
    """Graded exponent list of size (m+1)(m+2)/2."""
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    pairs = [(d - b, b) for d in range(m + 1) for b in range(d + 1)]
    return MonomialBasis(m=m, exponents=np.array(pairs, dtype=np.int64).reshape(-1, 2))


def monomial_laplacian_at_origin(a: int, b: int) -> float:
    """Laplacian of x**a * y**b evaluated at the origin: 2 for x^2 and y^2, else 0."""
    if a < 0 or b < 0:
        raise ValueError("exponents must be nonnegative")
    return 2.0 if (a, b) in ((2, 0), (0, 2)) else 0.0


def stencil_size(m: int) -> int:
    """Stencil size paired with augmentation degree m."""
    return (m + 1) * (m + 2)


@dataclass
class LaplaceWeights:
    """Weights of one stencil's Laplacian functional.

    ``multipliers`` are the polynomial-block components of the scaled
    local solve, kept for diagnostics; they are not part of the operator.
    """

    center: int
    weights: np.ndarray
    scale: float
    multipliers: np.ndarray


@dataclass
class WeightSet:
    """Laplacian weights for every interior node, row-aligned with a StencilSet."""

    centers: np.ndarray
    weights: np.ndarray
    scales: np.ndarray

    def __len__(self) -> int:
        return self.centers.shape[0]


def laplace_weights(stencil_points: np.ndarray, m: int, center: int = 0) -> LaplaceWeights:
    """Weights for a single stencil given as an (n, 2) point array.

    ``stencil_points[0]`` must be the center and n must equal
    (m+1)(m+2); points must be pairwise distinct.
    """
    pts = np.ascontiguousarray(stencil_points, dtype=np.float64)
    n = stencil_size(m)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("stencil_points must be an (n, 2) array")
    if pts.shape[0] != n:
        raise ValueError(f"degree {m} pairs with stencil size {n}, got {pts.shape[0]} points")
    basis = monomial_basis(m)
    members = np.arange(n, dtype=np.int64)[None, :]
    try:
        w, scales, mults = core.weight_systems(pts, members, basis.exponents)
    except DegenerateStencilError as exc:
        # the batch call only knows positions; restore the caller's node id
        raise DegenerateStencilError(center, exc.rcond) from None
    return LaplaceWeights(center=center, weights=w[0], scale=float(scales[0]), multipliers=mults[0])


def laplace_weights_all(nodes: NodeSet, stencils: StencilSet, m: int) -> WeightSet:
    """Weights for every interior stencil via the active backend."""
    if stencils.n != stencil_size(m):
        raise ValueError(
            f"stencil size {stencils.n} does not match degree {m} (expects {stencil_size(m)})"
        )
    basis = monomial_basis(m)
    w, scales, _ = core.weight_systems(nodes.xy, stencils.members, basis.exponents)
    return WeightSet(centers=stencils.centers.copy(), weights=w, scales=scales)
