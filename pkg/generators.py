"""Node-sequence generators.

Five methods share one driver, ``generate``: deterministic grid-Leja,
boundary-mesh pseudo-Leja, Metropolis-Hastings (MH) points, randomized
mesh (RM) points, and rejection-sampled approximate random Leja points.
Step n only reads the substreams addressed by n, so every sequence is
hierarchical: generating n + 1 nodes reproduces the first n bit for bit.
"""

from __future__ import annotations

import logging
import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from domains import CompactDomain, Polygon, sample_uniform
from errors import BoundFailureError, DegenerateDrawError, InvalidSequenceError
from polyeval import (
    LogProductAccumulator,
    NodeSequence,
    NodesLike,
    first_argmax,
    log_abs_pi_many,
    node_array,
    sup_norm_estimate,
)
from random_stream import RandomStream
from settings import GeneratorConfig

logger = logging.getLogger(__name__)

ProgressSink = Callable[[int, int, float], None]

LOG_TWO = math.log(2.0)
REJECTION_BATCH = 1024


def step_count(n: int, alpha: float) -> int:
    """N_n = max(1, floor(n**alpha)), snapping to the nearest integer first when within rounding"""
    if n < 1:
        raise ValueError(f"step index must be >= 1, got {n}")
    value = float(n) ** alpha
    nearest = round(value)
    if math.isclose(value, nearest, rel_tol=1e-12, abs_tol=0.0):
        value = nearest
    return max(1, math.floor(value))


def mesh_size(n: int, r_markov: float, multiplier: float = 4.0) -> int:
    """Boundary-mesh size ceil(c * n**r_m) for the pseudo-Leja step n"""
    return max(1, math.ceil(multiplier * float(max(n, 1)) ** r_markov))


def mh_accepts(log_u: float, log_candidate: float, log_state: float) -> bool:
    """Accept iff log U <= log|pi_n(X)| - log|pi_n(Z)|; 0/0 rejects and x/0 accepts"""
    if log_candidate == -math.inf:
        return False
    if log_state == -math.inf:
        return True
    return log_u <= log_candidate - log_state


def _mh_chain(
    existing: np.ndarray, domain: CompactDomain, steps: int, stream: RandomStream
) -> Tuple[complex, float, int]:
    n = len(existing)
    candidates = domain.sample(stream.substream(n, 0, "candidates").rng, steps + 1)
    with np.errstate(divide="ignore"):
        log_u = np.log(stream.substream(n, 0, "accept").uniform(steps)).tolist()
    # each candidate is evaluated once; the state's value is carried along
    values = log_abs_pi_many(existing, candidates).tolist()
    state, state_value, accepted = 0, values[0], 0
    for k in range(1, steps + 1):
        if mh_accepts(log_u[k - 1], values[k], state_value):
            state, state_value = k, values[k]
            accepted += 1
    return complex(candidates[state]), state_value, accepted


def next_mh_point(existing: NodesLike, domain: CompactDomain, steps: int, stream: RandomStream) -> complex:
    """Final state of an independent MH chain of ``steps`` moves targeting |pi_n|"""
    existing = node_array(existing)
    if len(existing) < 1:
        raise ValueError("MH step needs at least one existing node")
    if steps < 1:
        raise ValueError("N_n must be >= 1")
    return _mh_chain(existing, domain, steps, stream)[0]


def _rm_select(
    existing: np.ndarray, domain: CompactDomain, steps: int, stream: RandomStream, threads: int = 1
) -> Tuple[complex, float]:
    n = len(existing)
    for purpose in ("candidates", "retry"):
        candidates = domain.sample(stream.substream(n, 0, purpose).rng, steps)
        values = log_abs_pi_many(existing, candidates, threads)
        idx = first_argmax(values)
        if values[idx] > -math.inf:
            return complex(candidates[idx]), float(values[idx])
        logger.warning("all %d RM candidates hit existing nodes at step %d (%s)", steps, n, purpose)
    raise DegenerateDrawError(f"RM step {n}: every candidate coincides with an existing node")


def next_rm_point(
    existing: NodesLike, domain: CompactDomain, steps: int, stream: RandomStream, threads: int = 1
) -> complex:
    """Argmax of |pi_n| over ``steps`` uniform candidates, smallest draw index on ties"""
    existing = node_array(existing)
    if steps < 1:
        raise ValueError("N_n must be >= 1")
    return _rm_select(existing, domain, steps, stream, threads)[0]


def _rejection_draw(
    existing: np.ndarray, domain: CompactDomain, bound_grid, stream: RandomStream, max_attempts: int
) -> Tuple[complex, float, int]:
    n = len(existing)
    bound = LOG_TWO + sup_norm_estimate(existing, bound_grid)[0]
    rng = stream.substream(n, 0, "rejection").rng
    attempts = 0
    while attempts < max_attempts:
        size = min(REJECTION_BATCH, max_attempts - attempts)
        candidates = domain.sample(rng, size)
        with np.errstate(divide="ignore"):
            log_u = np.log(rng.random(size))
        values = log_abs_pi_many(existing, candidates)
        accept = np.isfinite(values) & (log_u <= values - bound)
        hits = np.flatnonzero(accept)
        if hits.size:
            idx = int(hits[0])
            return complex(candidates[idx]), float(values[idx]), attempts + idx + 1
        attempts += size
    raise BoundFailureError(
        f"no acceptance after {max_attempts} draws at step {n}; the grid bound 2*max|pi_n| is likely too small"
    )


def next_rejection_point(
    existing: NodesLike,
    domain: CompactDomain,
    bound_grid,
    stream: RandomStream,
    max_attempts: int = 10**6,
) -> complex:
    """Approximate random Leja draw by rejection against 2 * grid max of |pi_n|"""
    bound_grid = np.atleast_1d(np.asarray(bound_grid, dtype=complex))
    if bound_grid.size == 0:
        raise ValueError("bound grid must be nonempty")
    return _rejection_draw(node_array(existing), domain, bound_grid, stream, max_attempts)[0]


def next_grid_leja_point(existing: NodesLike, grid) -> complex:
    """Grid argmax of |pi_n|, smallest grid index on ties"""
    grid = np.atleast_1d(np.asarray(grid, dtype=complex))
    values = log_abs_pi_many(existing, grid)
    idx = first_argmax(values)
    if values[idx] == -math.inf:
        raise DegenerateDrawError("every grid point coincides with an existing node")
    return complex(grid[idx])


def next_mesh_pseudo_leja_point(existing: NodesLike, boundary_mesh) -> complex:
    """Argmax of |pi_n| over a boundary mesh, smallest index on ties"""
    mesh = np.atleast_1d(np.asarray(boundary_mesh, dtype=complex))
    values = log_abs_pi_many(existing, mesh)
    idx = first_argmax(values)
    if values[idx] == -math.inf:
        raise InvalidSequenceError("every mesh point coincides with an existing node")
    return complex(mesh[idx])


class _GridLejaStepper:
    """Keeps log|pi_n| on the generation grid up to date, one node per step"""

    def __init__(self, grid: np.ndarray):
        self.grid = grid
        self.acc = LogProductAccumulator(grid)

    def select(self) -> Tuple[complex, float]:
        values = self.acc.values()
        idx = first_argmax(values)
        if values[idx] == -math.inf:
            raise DegenerateDrawError("generation grid exhausted: every point is already a node")
        return complex(self.grid[idx]), float(values[idx])

    def add(self, z: complex) -> None:
        self.acc.add(z)


def _mesh_exponent(domain: CompactDomain, config: GeneratorConfig) -> float:
    # Chebyshev edge meshes on polygons need only O(n) points
    if config.mesh_kind == "edge-chebyshev" and isinstance(domain, Polygon):
        return 1.0
    return domain.exponents.r_markov


def _initial_node(domain: CompactDomain, config: GeneratorConfig, root: RandomStream, grid) -> complex:
    if config.method == "grid-leja":
        if config.random_start:
            u = sample_uniform(domain, root.substream(0, 0, "start"))
            return complex(grid[int(np.argmin(np.abs(grid - u)))])
        return complex(grid[0])
    if config.method == "mesh-pseudo-leja":
        mesh = domain.boundary_mesh(mesh_size(1, _mesh_exponent(domain, config), config.mesh_multiplier), config.mesh_kind)
        return complex(mesh[0])
    return sample_uniform(domain, root.substream(0, 0, "init"))


def generate(
    domain: CompactDomain, config: GeneratorConfig, progress_sink: Optional[ProgressSink] = None
) -> NodeSequence:
    """Generate ``config.n_target`` nodes on ``domain`` with ``config.method``"""
    root = RandomStream(config.seed)
    alpha = config.effective_alpha(domain.exponents)
    grid = None
    if config.method in ("grid-leja", "rejection-random-leja"):
        grid = domain.eval_grid(config.grid_size)
    started = time.perf_counter()
    logger.info(
        "generating %d %s nodes on %s (seed=%d, alpha=%.4g)",
        config.n_target, config.method, domain.domain_id, config.seed, alpha,
    )

    nodes: List[complex] = [_initial_node(domain, config, root, grid)]
    stepper = None
    if config.method == "grid-leja":
        stepper = _GridLejaStepper(grid)
        stepper.add(nodes[0])
    if progress_sink:
        progress_sink(0, 1, time.perf_counter() - started)

    for n in range(1, config.n_target):
        existing = np.asarray(nodes, dtype=complex)
        if config.method == "mh":
            steps = step_count(n, alpha)
            z, value, accepted = _mh_chain(existing, domain, steps, root)
            logger.debug("MH step %d: %d of %d moves accepted", n, accepted, steps)
        elif config.method == "rm":
            steps = step_count(n, alpha)
            z, value = _rm_select(existing, domain, steps, root, config.threads)
        elif config.method == "rejection-random-leja":
            z, value, steps = _rejection_draw(existing, domain, grid, root, config.max_attempts)
        elif config.method == "grid-leja":
            steps = len(grid)
            z, value = stepper.select()
            stepper.add(z)
        else:
            steps = mesh_size(n, _mesh_exponent(domain, config), config.mesh_multiplier)
            mesh = domain.boundary_mesh(steps, config.mesh_kind)
            steps = len(mesh)
            z = next_mesh_pseudo_leja_point(existing, mesh)
            value = 0.0
        if value == -math.inf:
            raise DegenerateDrawError(f"step {n} selected a point coinciding with an existing node")
        nodes.append(z)
        if progress_sink:
            progress_sink(n, steps, time.perf_counter() - started)

    return NodeSequence(np.asarray(nodes), config.method, config.seed, domain.domain_id)
