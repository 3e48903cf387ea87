"""Log-domain evaluation of nodal polynomials.

All magnitudes of pi_n(z) = prod_j (z - z_j) are handled as
log|pi_n(z)| = sum_j log|z - z_j|. A coincidence with a node gives
-inf, which numpy orders below every real, so it always loses an argmax.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from errors import InvalidSequenceError

METHODS = ("grid-leja", "mesh-pseudo-leja", "mh", "rm", "rejection-random-leja")
# provenance of sequences read back from a points file
EXTERNAL = "external"

MIN_CHUNK = 2048


@dataclass
class NodeSequence:
    """Ordered interpolation nodes z_0, ..., z_{n-1} with their provenance"""

    nodes: np.ndarray
    method: str
    seed: Optional[int] = None
    domain_id: str = ""

    def __post_init__(self):
        self.nodes = np.array(self.nodes, dtype=complex).reshape(-1)
        if self.method not in METHODS and self.method != EXTERNAL:
            raise ValueError(f"unknown method {self.method!r}")

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, index):
        return self.nodes[index]

    def prefix(self, n: int) -> "NodeSequence":
        if not 0 <= n <= len(self):
            raise ValueError(f"prefix length {n} outside [0, {len(self)}]")
        return NodeSequence(self.nodes[:n], self.method, self.seed, self.domain_id)

    def min_separation(self) -> float:
        if len(self) < 2:
            return math.inf
        i, j = np.triu_indices(len(self), k=1)
        return float(np.abs(self.nodes[i] - self.nodes[j]).min())

    def validate(self, domain=None) -> None:
        """Raise if nodes coincide or, given a domain, fall outside it"""
        if self.min_separation() <= 0.0:
            raise InvalidSequenceError("node sequence contains coincident nodes")
        if domain is not None and len(self) and not domain.contains_many(self.nodes).all():
            raise InvalidSequenceError(f"node sequence leaves {domain.domain_id}")


NodesLike = Union[NodeSequence, np.ndarray, Iterable[complex]]


def node_array(nodes: NodesLike) -> np.ndarray:
    if isinstance(nodes, NodeSequence):
        return nodes.nodes
    if not isinstance(nodes, np.ndarray):
        nodes = list(nodes)
    return np.asarray(nodes, dtype=complex).reshape(-1)


class LogProductAccumulator:
    """Running log|pi_n| over a fixed set of points, one node at a time.

    Terms are added with Neumaier's compensated summation, in node index
    order; adding the same nodes in the same order always reproduces the
    same bits, which keeps incremental and one-shot evaluations identical.
    """

    def __init__(self, points, nodes: NodesLike = ()):
        self.points = np.atleast_1d(np.asarray(points, dtype=complex))
        self._sum = np.zeros(self.points.shape)
        self._comp = np.zeros(self.points.shape)
        self._hit = np.zeros(self.points.shape, dtype=bool)
        self.count = 0
        for z in node_array(nodes):
            self.add(z)

    def add(self, node: complex) -> None:
        with np.errstate(divide="ignore"):
            term = np.log(np.abs(self.points - node))
        hit = np.isneginf(term)
        if hit.any():
            self._hit |= hit
            term[hit] = 0.0
        total = self._sum + term
        self._comp += np.where(
            np.abs(self._sum) >= np.abs(term),
            (self._sum - total) + term,
            (term - total) + self._sum,
        )
        self._sum = total
        self.count += 1

    def values(self) -> np.ndarray:
        out = self._sum + self._comp
        out[self._hit] = -np.inf
        return out


def log_abs_pi_many(nodes: NodesLike, points, threads: int = 1) -> np.ndarray:
    """log|pi_n| at every point; chunks may be evaluated on ``threads`` threads"""
    nodes = node_array(nodes)
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    if threads <= 1 or points.size < 2 * MIN_CHUNK:
        return LogProductAccumulator(points, nodes).values()
    chunks = np.array_split(points, min(threads, points.size // MIN_CHUNK))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda chunk: LogProductAccumulator(chunk, nodes).values(), chunks))
    return np.concatenate(parts)


def log_abs_pi(nodes: NodesLike, z) -> float:
    """sum_{j<n} log|z - z_j|; 0.0 for the empty prefix, -inf on a node"""
    return float(log_abs_pi_many(nodes, [complex(z)])[0])


def first_argmax(values: np.ndarray) -> int:
    """Index of the maximum, smallest index on ties"""
    return int(np.argmax(values))


def sup_norm_estimate(nodes: NodesLike, grid, threads: int = 1) -> Tuple[float, complex]:
    """Grid maximum of log|pi_n| and the first grid point attaining it"""
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    values = log_abs_pi_many(nodes, grid, threads)
    idx = first_argmax(values)
    return float(values[idx]), complex(grid[idx])


def pairwise_log_product(nodes: NodesLike) -> float:
    """sum_{i<j} log|z_i - z_j| for n >= 2 distinct nodes"""
    nodes = node_array(nodes)
    if len(nodes) < 2:
        raise ValueError("pairwise log product needs at least two nodes")
    i, j = np.triu_indices(len(nodes), k=1)
    dist = np.abs(nodes[i] - nodes[j])
    if not np.all(dist > 0):
        raise InvalidSequenceError("coincident nodes in pairwise product")
    return math.fsum(np.log(dist))
