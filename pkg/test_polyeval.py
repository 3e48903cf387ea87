import itertools
import math

import numpy as np
import pytest

from errors import InvalidSequenceError
from generators import next_grid_leja_point
from polyeval import (
    LogProductAccumulator,
    NodeSequence,
    log_abs_pi,
    log_abs_pi_many,
    pairwise_log_product,
    sup_norm_estimate,
)
from random_stream import RandomStream


def grid_leja_nodes(grid, count):
    nodes = []
    for _ in range(count):
        nodes.append(next_grid_leja_point(nodes, grid))
    return np.array(nodes)


def test_log_abs_pi_examples():
    assert log_abs_pi([], 5 + 2j) == 0.0
    assert log_abs_pi([0], 2) == pytest.approx(math.log(2), rel=1e-15)
    assert log_abs_pi([1, -1], 0) == 0.0
    assert log_abs_pi([0.5, 1], 0.5) == -math.inf


def test_log_abs_pi_matches_direct_product():
    nodes = grid_leja_nodes(np.linspace(-1, 1, 10_001), 5)
    direct = np.prod(np.abs(0.3 - nodes))
    assert math.exp(log_abs_pi(nodes, 0.3)) == pytest.approx(direct, rel=1e-12)


def test_log_products_match_direct_products_up_to_thirty_nodes():
    rng = RandomStream(4).rng
    nodes = rng.random(30) * 2 - 1 + 1j * (rng.random(30) - 0.5)
    points = rng.random(50) * 2 - 1
    for n in (1, 10, 30):
        direct = np.array([np.prod(np.abs(z - nodes[:n])) for z in points])
        np.testing.assert_allclose(np.exp(log_abs_pi_many(nodes[:n], points)), direct, rtol=1e-10)


def test_log_abs_pi_ignores_node_order():
    rng = RandomStream(17).rng
    nodes = rng.random(60) * 2 - 1 + 1j * (rng.random(60) - 0.5)
    points = [0.3 + 0.1j, -0.95, 0.7j]
    for seed in range(5):
        shuffled = RandomStream(seed).rng.permutation(nodes)
        for z in points:
            assert log_abs_pi(shuffled, z) == pytest.approx(log_abs_pi(nodes, z), rel=1e-12, abs=1e-12)


def test_sup_norm_examples():
    assert sup_norm_estimate([], [3, 4]) == (0.0, 3 + 0j)
    assert sup_norm_estimate([0], [-1, 0.5, 1]) == (0.0, -1 + 0j)


def test_sup_norm_matches_exhaustive_scan():
    grid = np.linspace(-1, 1, 10_000)
    nodes = grid_leja_nodes(grid, 10)
    values = [sum(math.log(abs(g - z)) if g != z else -math.inf for z in nodes) for g in grid]
    best = max(range(len(grid)), key=lambda i: (values[i], -i))
    value, point = sup_norm_estimate(nodes, grid)
    assert point == grid[best]
    assert value == pytest.approx(values[best], rel=1e-12)


def test_threaded_evaluation_is_identical():
    grid = np.exp(2j * np.pi * np.arange(20_000) / 20_000) * 0.9
    nodes = RandomStream(9).rng.random(40) - 0.5
    np.testing.assert_array_equal(log_abs_pi_many(nodes, grid, threads=1), log_abs_pi_many(nodes, grid, threads=4))


def test_accumulator_is_order_stable():
    grid = np.linspace(-1, 1, 101)
    nodes = [0.31, -0.77, 0.05, 0.92]
    acc = LogProductAccumulator(grid)
    for z in nodes:
        acc.add(z)
    np.testing.assert_array_equal(acc.values(), LogProductAccumulator(grid, nodes).values())


def test_pairwise_log_product_examples():
    assert pairwise_log_product([1, -1]) == pytest.approx(math.log(2))
    assert pairwise_log_product([0, 1, -1]) == pytest.approx(math.log(2))
    with pytest.raises(InvalidSequenceError):
        pairwise_log_product([0, 1, 0])


def test_pairwise_log_product_matches_double_loop():
    rng = RandomStream(21).rng
    nodes = rng.random(20) + 1j * rng.random(20)
    brute = math.fsum(math.log(abs(a - b)) for a, b in itertools.combinations(nodes, 2))
    assert pairwise_log_product(nodes) == pytest.approx(brute, rel=1e-12)


def test_pairwise_product_telescopes():
    nodes = grid_leja_nodes(np.linspace(-1, 1, 2_001), 12)
    telescoped = math.fsum(log_abs_pi(nodes[:k], nodes[k]) for k in range(1, len(nodes)))
    assert pairwise_log_product(nodes) == pytest.approx(telescoped, abs=1e-9)


def test_node_sequence_validation():
    sequence = NodeSequence([0, 0.5, -0.5], "grid-leja")
    assert len(sequence) == 3
    assert sequence.prefix(2).nodes.tolist() == [0, 0.5]
    assert sequence.min_separation() == 0.5
    with pytest.raises(InvalidSequenceError):
        NodeSequence([0, 1, 0], "mh").validate()
    with pytest.raises(ValueError):
        NodeSequence([0], "unknown")
