"""Scattered-node discretisation of the closed unit disc.

Boundary nodes are placed uniformly on the circle first and never move.
The interior is then filled by an advancing front: each front node spawns
candidates on the circle of radius h around it, and a candidate survives
if it stays inside the disc and keeps its distance from every node placed
so far.  Candidate angles come from a counter-based generator keyed by
the seed, so a (h, seed) pair reproduces the node set bit for bit.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InsufficientNodesError, InvalidSpacingError

# Acceptance rules of the interior fill: a candidate must keep
# |p| < 1 - BOUNDARY_BAND*h (no crowding against the Dirichlet ring) and
# stay at least (1 - FILL_EPS)*h away from every accepted node.
FILL_EPS = 0.01
BOUNDARY_BAND = 0.5
CANDIDATES_PER_NODE = 15


@dataclass
class NodeSet:
    """Scattered discretisation of the disc.

    Attributes
    ----------
    xy : (N, 2) float array of node positions.
    is_boundary : (N,) bool array, True for nodes on the unit circle.
    h : target internodal distance used by the fill.
    seed : integer seed the interior fill was keyed with.
    """

    xy: np.ndarray
    is_boundary: np.ndarray
    h: float
    seed: int

    @property
    def n_nodes(self) -> int:
        return self.xy.shape[0]

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary)

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(~self.is_boundary))


@dataclass
class StencilSet:
    """Nearest-neighbour stencils, one row per interior node.

    ``members[i]`` lists the ``n`` node indices closest to interior node
    ``centers[i]``, ordered by increasing distance with ties broken by
    lower node index; ``members[i, 0] == centers[i]`` always.
    """

    centers: np.ndarray
    members: np.ndarray

    @property
    def n(self) -> int:
        return self.members.shape[1]

    def __len__(self) -> int:
        return self.centers.shape[0]


def discretize_boundary(h: float) -> np.ndarray:
    """Return round(2*pi/h) points uniformly spaced on the unit circle.

    The first point sits at angle 0; arc spacing is 2*pi/K which is as
    close to h as the rounding allows.
    """
    if not (0.0 < h < 2.0) or not math.isfinite(h):
        raise InvalidSpacingError(f"spacing must satisfy 0 < h < 2, got {h}")
    k = int(round(2.0 * math.pi / h))
    angles = 2.0 * math.pi * np.arange(k) / k
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _candidate_angles(seed: int, node_index: int, count: int) -> np.ndarray:
    # Philox keyed by the seed with the spawning node's index as counter:
    # draws are independent of traversal details and platform.
    bitgen = np.random.Philox(key=seed % (1 << 64), counter=[0, 0, 0, node_index])
    return np.random.Generator(bitgen).random(count) * (2.0 * math.pi)


def fill_interior(boundary: np.ndarray, h: float, seed: int) -> NodeSet:
    """Advancing-front fill of the disc interior.

    Starts the front at the boundary nodes, spawns CANDIDATES_PER_NODE
    randomized candidates per dequeued node on its radius-h circle and
    accepts those respecting the separation and boundary-band rules.
    Terminates when the front is exhausted; an empty interior is legal
    for h close to 2.
    """
    if not (0.0 < h < 2.0) or not math.isfinite(h):
        raise InvalidSpacingError(f"spacing must satisfy 0 < h < 2, got {h}")
    if boundary.ndim != 2 or boundary.shape[0] == 0 or boundary.shape[1] != 2:
        raise ValueError("boundary must be a nonempty (K, 2) array")

    r_max = 1.0 - BOUNDARY_BAND * h
    min_sep = (1.0 - FILL_EPS) * h
    min_sep2 = min_sep * min_sep

    xs = [float(p[0]) for p in boundary]
    ys = [float(p[1]) for p in boundary]
    n_boundary = len(xs)

    # Uniform grid hash with cell size h: any node closer than min_sep < h
    # to a candidate lives in the 3x3 cell block around it.
    inv_cell = 1.0 / h
    grid: dict[tuple[int, int], list[int]] = {}
    for i in range(n_boundary):
        grid.setdefault((int(math.floor(xs[i] * inv_cell)), int(math.floor(ys[i] * inv_cell))), []).append(i)

    front = deque(range(n_boundary))
    while front:
        i = front.popleft()
        px, py = xs[i], ys[i]
        for theta in _candidate_angles(seed, i, CANDIDATES_PER_NODE):
            cx = px + h * math.cos(theta)
            cy = py + h * math.sin(theta)
            if math.sqrt(cx * cx + cy * cy) >= r_max:
                continue
            ci = int(math.floor(cx * inv_cell))
            cj = int(math.floor(cy * inv_cell))
            ok = True
            for gi in (ci - 1, ci, ci + 1):
                for gj in (cj - 1, cj, cj + 1):
                    for k in grid.get((gi, gj), ()):
                        dx = xs[k] - cx
                        dy = ys[k] - cy
                        if dx * dx + dy * dy < min_sep2:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                idx = len(xs)
                xs.append(cx)
                ys.append(cy)
                grid.setdefault((ci, cj), []).append(idx)
                front.append(idx)

    xy = np.column_stack([np.asarray(xs), np.asarray(ys)])
    is_boundary = np.zeros(len(xs), dtype=bool)
    is_boundary[:n_boundary] = True
    return NodeSet(xy=xy, is_boundary=is_boundary, h=h, seed=seed)


def discretize_disc(h: float, seed: int) -> NodeSet:
    """Boundary ring plus advancing-front interior in one call."""
    return fill_interior(discretize_boundary(h), h, seed)


def _knn_brute_force(xy: np.ndarray, center: int, n: int) -> np.ndarray:
    d = np.sqrt((xy[:, 0] - xy[center, 0]) ** 2 + (xy[:, 1] - xy[center, 1]) ** 2)
    order = np.lexsort((np.arange(xy.shape[0]), d))
    return order[:n]


def build_stencils(nodes: NodeSet, n: int) -> StencilSet:
    """k-nearest-neighbour stencils for every interior node.

    Neighbours are found through a kd-tree and re-ranked by exact
    (distance, index) order so that ties resolve to the lower node index,
    matching a brute-force scan.  Boundary nodes get no stencil but do
    appear as members.
    """
    total = nodes.n_nodes
    if n < 1:
        raise ValueError(f"stencil size must be >= 1, got {n}")
    if n > total:
        raise InsufficientNodesError(f"stencil size {n} exceeds node count {total}")

    centers = nodes.interior_indices
    if centers.size == 0:
        return StencilSet(centers=centers.astype(np.int64), members=np.empty((0, n), dtype=np.int64))

    # Query extra neighbours so that reranking by our own distances
    # cannot be starved at the cut boundary by kd-tree tie ordering.
    k_query = min(total, n + 16)
    tree = cKDTree(nodes.xy)
    _, knn = tree.query(nodes.xy[centers], k=k_query)
    knn = knn.reshape(centers.size, k_query)

    members = np.empty((centers.size, n), dtype=np.int64)
    xy = nodes.xy
    for row, c in enumerate(centers):
        cand = knn[row]
        d = np.sqrt((xy[cand, 0] - xy[c, 0]) ** 2 + (xy[cand, 1] - xy[c, 1]) ** 2)
        order = np.lexsort((cand, d))
        if k_query < total and d[order[n - 1]] == d[order[-1]]:
            # Tie chain may extend past the queried set; fall back to a
            # full scan for this node.
            members[row] = _knn_brute_force(xy, int(c), n)
        else:
            members[row] = cand[order[:n]]
    return StencilSet(centers=centers.astype(np.int64), members=members)
