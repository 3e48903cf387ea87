"""Newton-form interpolation at node sequences and Lebesgue constant estimates"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from domains import CompactDomain, IntervalUnion, Segment
from errors import ConfigError, InvalidSequenceError
from polyeval import EXTERNAL, LogProductAccumulator, NodeSequence, NodesLike, node_array

logger = logging.getLogger(__name__)

NEAR_NODE = 1e-8
DEFAULT_LEBESGUE_GRID = 50_000
# grid rows per block, scaled so a block holds about this many entries
BLOCK_ENTRIES = 2_000_000


class NewtonInterpolant:
    """Newton divided differences grown one node at a time"""

    def __init__(self):
        self.nodes: List[complex] = []
        self.coefficients: List[complex] = []
        self._row: List[complex] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def append(self, z: complex, value: complex) -> complex:
        """Add a node and its value; returns the new coefficient"""
        z = complex(z)
        row = [complex(value)]
        for j in range(1, len(self.nodes) + 1):
            gap = z - self.nodes[-j]
            if gap == 0:
                raise InvalidSequenceError(f"node {z} repeats an earlier node")
            row.append((row[j - 1] - self._row[j - 1]) / gap)
        self._row = row
        self.nodes.append(z)
        self.coefficients.append(row[-1])
        return row[-1]

    def evaluate(self, points) -> np.ndarray:
        """Nested (Horner) evaluation of the Newton form"""
        points = np.asarray(points, dtype=complex)
        if not self.coefficients:
            return np.zeros(points.shape, dtype=complex)
        result = np.full(points.shape, self.coefficients[-1], dtype=complex)
        for c, z in zip(reversed(self.coefficients[:-1]), reversed(self.nodes[:-1])):
            result = c + (points - z) * result
        return result


@dataclass
class InterpolationResult:
    newton_coefficients: List[complex]
    nodes: NodeSequence
    error_trace: List[Tuple[int, float]] = field(default_factory=list)

    def evaluate(self, points) -> np.ndarray:
        interpolant = NewtonInterpolant()
        interpolant.nodes = list(self.nodes.nodes)
        interpolant.coefficients = list(self.newton_coefficients)
        return interpolant.evaluate(points)


@dataclass
class LebesgueEstimate:
    n: int
    value: float
    argmax_point: complex


def _as_sequence(nodes: NodesLike) -> NodeSequence:
    if isinstance(nodes, NodeSequence):
        return nodes
    return NodeSequence(node_array(nodes), EXTERNAL)


def newton_interpolate(nodes: NodesLike, f_values: Sequence[complex]) -> InterpolationResult:
    sequence = _as_sequence(nodes)
    if len(f_values) != len(sequence):
        raise ValueError(f"{len(f_values)} values for {len(sequence)} nodes")
    interpolant = NewtonInterpolant()
    for z, value in zip(sequence.nodes, f_values):
        interpolant.append(z, value)
    return InterpolationResult(interpolant.coefficients, sequence)


def error_trace(
    domain: CompactDomain, nodes: NodesLike, f: Callable, eval_grid_size: int = 10_000
) -> List[Tuple[int, float]]:
    """Grid sup of |L_n(f) - f| for every prefix length n = 1..len(nodes)"""
    nodes = node_array(nodes)
    grid = domain.eval_grid(eval_grid_size)
    target = np.asarray(f(grid), dtype=complex)
    node_values = np.asarray(f(nodes), dtype=complex)
    interpolant = NewtonInterpolant()
    approx = np.zeros(grid.shape, dtype=complex)
    omega = np.ones(grid.shape, dtype=complex)
    trace = []
    for n, (z, value) in enumerate(zip(nodes, node_values), start=1):
        approx = approx + interpolant.append(z, value) * omega
        omega = omega * (grid - z)
        trace.append((n, float(np.max(np.abs(approx - target)))))
    return trace


def _barycentric_log_weights(nodes: np.ndarray) -> np.ndarray:
    """w_i = sum_{j != i} log|z_i - z_j|"""
    weights = np.empty(len(nodes))
    for i, z in enumerate(nodes):
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(np.delete(nodes, i) - z))
        if np.isneginf(logs).any():
            raise InvalidSequenceError("coincident nodes in Lebesgue estimate")
        weights[i] = math.fsum(logs)
    return weights


def _lebesgue_block(grid: np.ndarray, log_pi: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    dist = np.abs(grid[:, None] - nodes[None, :])
    near = dist.min(axis=1) < NEAR_NODE
    out = np.empty(grid.shape)
    far = ~near
    if far.any():
        exponents = log_pi[far, None] - np.log(dist[far]) - weights[None, :]
        out[far] = np.exp(logsumexp(exponents, axis=1))
    for row in np.flatnonzero(near):
        # direct Lagrange sum: drop the i-th factor instead of dividing it out
        with np.errstate(divide="ignore"):
            logs = np.log(dist[row])
        table = np.tile(logs, (len(nodes), 1))
        np.fill_diagonal(table, 0.0)
        out[row] = np.exp(logsumexp(table.sum(axis=1) - weights))
    return out


def lebesgue_function(
    nodes: NodesLike, grid, weights: Optional[np.ndarray] = None, log_pi: Optional[np.ndarray] = None, threads: int = 1
) -> np.ndarray:
    """lambda_n(z) = sum_i |l_i(z)| at every grid point, in log-barycentric form"""
    nodes = node_array(nodes)
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    if len(nodes) == 0:
        raise ValueError("Lebesgue function needs at least one node")
    if weights is None:
        weights = _barycentric_log_weights(nodes)
    if log_pi is None:
        log_pi = LogProductAccumulator(grid, nodes).values()
    rows = max(1, BLOCK_ENTRIES // len(nodes))
    blocks = [slice(start, start + rows) for start in range(0, len(grid), rows)]

    def run(block):
        return _lebesgue_block(grid[block], log_pi[block], nodes, weights)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.concatenate(list(pool.map(run, blocks)))
    return np.concatenate([run(block) for block in blocks])


def _estimate(n: int, values: np.ndarray, grid: np.ndarray) -> LebesgueEstimate:
    idx = int(np.argmax(values))
    return LebesgueEstimate(n, float(values[idx]), complex(grid[idx]))


def lebesgue_estimate(
    domain: CompactDomain, nodes: NodesLike, grid=None, threads: int = 1
) -> LebesgueEstimate:
    """Grid maximum of lambda_n: a lower bound for the Lebesgue constant"""
    nodes = node_array(nodes)
    grid = domain.eval_grid(DEFAULT_LEBESGUE_GRID) if grid is None else np.asarray(grid, dtype=complex)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    return _estimate(len(nodes), lebesgue_function(nodes, grid, threads=threads), grid)


def lebesgue_series(
    domain: CompactDomain,
    nodes: NodesLike,
    grid=None,
    n_range: Optional[Iterable[int]] = None,
    threads: int = 1,
) -> List[LebesgueEstimate]:
    """One estimate per prefix length in ``n_range``, sharing the running products"""
    nodes = node_array(nodes)
    grid = domain.eval_grid(DEFAULT_LEBESGUE_GRID) if grid is None else np.asarray(grid, dtype=complex)
    wanted = sorted(set(n_range)) if n_range is not None else list(range(1, len(nodes) + 1))
    if wanted and (wanted[0] < 1 or wanted[-1] > len(nodes)):
        raise ValueError(f"n_range must lie within [1, {len(nodes)}]")
    acc = LogProductAccumulator(grid)
    weights = np.zeros(0)
    estimates = []
    targets = set(wanted)
    for n in range(1, (wanted[-1] if wanted else 0) + 1):
        z = nodes[n - 1]
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(nodes[: n - 1] - z))
        if np.isneginf(logs).any():
            raise InvalidSequenceError(f"node {n - 1} repeats an earlier node")
        weights = np.append(weights + logs, math.fsum(logs))
        acc.add(z)
        if n in targets:
            values = lebesgue_function(nodes[:n], grid, weights, acc.values(), threads)
            estimates.append(_estimate(n, values, grid))
            logger.debug("Lebesgue estimate n=%d: %.6g", n, estimates[-1].value)
    return estimates


def _runge_complex(z):
    return 1.0 / (np.asarray(z, dtype=complex) ** 2 + 0.1**2)


TEST_FUNCTIONS: Dict[str, Tuple[Callable, Tuple[complex, ...], bool]] = {
    # name: (function, poles, real sets only)
    "runge_complex": (_runge_complex, (0.1j, -0.1j), False),
    "exp": (lambda z: np.exp(np.asarray(z, dtype=complex)), (), False),
    "abs": (lambda z: np.abs(np.asarray(z, dtype=complex)).astype(complex), (), True),
    "one": (lambda z: np.ones(np.shape(z), dtype=complex), (), False),
}


def _on_real_axis(domain: CompactDomain) -> bool:
    if isinstance(domain, IntervalUnion):
        return True
    return isinstance(domain, Segment) and domain.start.imag == 0.0 and domain.end.imag == 0.0


def resolve_function(name: str, domain: CompactDomain) -> Callable:
    """Built-in test function by name, refused when a pole lies on K"""
    if name not in TEST_FUNCTIONS:
        raise ConfigError(f"unknown test function {name!r}; choose from {sorted(TEST_FUNCTIONS)}")
    f, poles, real_only = TEST_FUNCTIONS[name]
    if real_only and not _on_real_axis(domain):
        raise ConfigError(f"{name} is only enabled on real sets")
    for pole in poles:
        if domain.contains(pole):
            raise ConfigError(f"{name} has a pole at {pole} on {domain.domain_id}")
    return f
