import math

import numpy as np
import pytest
from scipy import stats

from domains import (
    Circle,
    CompactDomain,
    Disk,
    ExponentProfile,
    IntervalUnion,
    Polygon,
    Segment,
    contains,
    diameter,
    eval_grid,
    sample_uniform,
)
from errors import ConfigError, DegenerateDomainError
from random_stream import RandomStream

UNIT_SQUARE = [0, 1, 1 + 1j, 1j]


def test_contains_examples():
    assert contains(Disk(), 0)
    assert not contains(Segment(-1, 1), 2 + 0j)
    assert contains(Polygon(UNIT_SQUARE), 0.5 + 0.5j)
    assert contains(Circle(), 1j)
    assert not contains(Circle(), 0)


def test_contains_rejects_non_finite_points():
    with pytest.raises(ValueError):
        contains(Disk(), complex(math.nan, 0))


def test_polygon_boundary_counts_as_inside():
    square = Polygon(UNIT_SQUARE)
    assert square.contains(0.5)
    assert square.contains(1 + 1j)
    assert not square.contains(1.5 + 0.5j)


def test_segment_sample_stays_on_segment():
    segment = Segment(-1, 1)
    for k in range(20):
        z = sample_uniform(segment, RandomStream(3).substream(k, 0, "sample"))
        assert z.imag == 0.0
        assert -1.0 <= z.real <= 1.0


def test_disk_sample_moments():
    points = Disk().sample(RandomStream(11).rng, 100_000)
    assert abs(points.mean()) < 0.02
    assert abs(np.mean(np.abs(points) <= 0.5) - 0.25) < 0.01


def test_l_shaped_polygon_samples_inside():
    l_shape = Polygon([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j])
    points = l_shape.sample(RandomStream(5).rng, 2000)
    assert points.shape == (2000,)
    assert l_shape.contains_many(points).all()
    # the missing quadrant [1, 2] x [1, 2] is never hit
    assert not np.any((points.real > 1 + 1e-9) & (points.imag > 1 + 1e-9))


def test_interval_union_samples_proportional_to_length():
    union = IntervalUnion([(2, 3), (-1, 1)])
    points = union.sample(RandomStream(2).rng, 30_000)
    assert union.contains_many(points).all()
    assert abs(np.mean(points.real > 1.5) - 1 / 3) < 0.02


def test_eval_grid_examples():
    np.testing.assert_allclose(eval_grid(Segment(-1, 1), 5), [-1, -0.5, 0, 0.5, 1])
    circle_grid = eval_grid(Circle(), 4)
    assert len(circle_grid) == 4
    assert circle_grid[0] == 1 + 0j

    disk_grid = eval_grid(Disk(), 10_000)
    assert 5_000 <= len(disk_grid) <= 20_000
    assert Disk().contains_many(disk_grid).all()


def test_polygon_grid_is_inside_and_covers_vertices():
    square = Polygon(UNIT_SQUARE)
    grid = square.eval_grid(2_000)
    assert square.contains_many(grid).all()
    for vertex in UNIT_SQUARE:
        assert np.min(np.abs(grid - vertex)) == 0.0


def test_diameter_examples():
    assert diameter(Segment(-1, 1)) == 2
    assert diameter(Disk()) == 2
    assert diameter(Polygon(UNIT_SQUARE)) == pytest.approx(math.sqrt(2))
    assert diameter(IntervalUnion([(-1, 0), (2, 3)])) == 4


@pytest.mark.parametrize(
    "vertices",
    [
        [0, 1, 1 + 1j, 1j, 0.5 - 1j],  # edges cross
        [0, 1, 2],  # collinear: zero area
        [0, 1],
        [0, 0, 1 + 1j, 1j],  # zero-length edge
    ],
)
def test_degenerate_polygons_are_rejected(vertices):
    with pytest.raises(DegenerateDomainError):
        Polygon(vertices)


def test_bow_tie_is_rejected():
    with pytest.raises(DegenerateDomainError):
        Polygon([0, 1 + 1j, 1, 1j])


def test_interval_union_must_be_disjoint():
    with pytest.raises(DegenerateDomainError):
        IntervalUnion([(0, 2), (1, 3)])


def test_circle_radius_must_be_positive():
    with pytest.raises(DegenerateDomainError):
        Circle(0, 0.0)


def test_boundary_meshes():
    mesh = Circle().boundary_mesh(4)
    np.testing.assert_allclose(mesh, [1, 1j, -1, -1j], atol=1e-15)

    square = Polygon(UNIT_SQUARE)
    equispaced = square.boundary_mesh(8)
    np.testing.assert_allclose(equispaced, [0, 0.5, 1, 1 + 0.5j, 1 + 1j, 0.5 + 1j, 1j, 0.5j], atol=1e-15)
    chebyshev = square.boundary_mesh(16, "edge-chebyshev")
    assert square.contains_many(chebyshev).all()
    for vertex in UNIT_SQUARE:
        assert np.min(np.abs(chebyshev - vertex)) < 1e-15

    with pytest.raises(ConfigError):
        IntervalUnion([(0, 1), (2, 3)]).boundary_mesh(10)


def test_domain_interface_is_documented():
    for name in ("contains_many", "sample", "eval_grid", "boundary_mesh", "contains", "diameter", "domain_id"):
        assert getattr(CompactDomain, name).__doc__


def test_exponent_profiles():
    assert Segment(-1, 1).exponents == ExponentProfile(2.0, 2.0, 1.0)
    assert Disk().exponents == ExponentProfile(2.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        ExponentProfile(0.0, 1.0, 1.0)


def test_polygon_area_bounds_and_boundary_distance():
    square = Polygon(UNIT_SQUARE)
    assert square.area == pytest.approx(1.0)
    assert square.perimeter == pytest.approx(4.0)
    assert square.bounds == (0.0, 0.0, 1.0, 1.0)
    np.testing.assert_allclose(square.boundary_distance([0.5 + 0.5j, 2 + 0.5j, 0.5, 1 + 1j]), [0.5, 1.0, 0.0, 0.0])

    l_shape = Polygon([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j])
    assert l_shape.area == pytest.approx(3.0)
    assert l_shape.boundary_distance(1.5 + 1.5j) == pytest.approx(0.5)


THIN = {
    "square": [0, 1, 1 + 1j, 1j],
    "wide": [0, 1, 1 + 0.1j, 0.1j],
    "sliver": [0, 1, 1 + 0.01j, 0.01j],
    "tall": [0, 0.01, 0.01 + 1j, 1j],
    "l-shape": [0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j],
}


@pytest.mark.parametrize("name", sorted(THIN))
@pytest.mark.parametrize("target", [16, 100, 10_000])
def test_polygon_grid_size_tracks_target(name, target):
    polygon = Polygon(THIN[name])
    grid = polygon.eval_grid(target)
    assert target / 2 <= len(grid) <= 2 * target
    assert polygon.contains_many(grid).all()


@pytest.mark.parametrize("target", [2, 3, 16, 100, 10_000])
def test_disk_grid_size_tracks_target(target):
    grid = Disk(1 + 1j, 0.5).eval_grid(target)
    assert target / 2 <= len(grid) <= 2 * target
    assert Disk(1 + 1j, 0.5).contains_many(grid).all()


def test_uniform_on_circle_arcs():
    angles = Circle().angle(Circle().sample(RandomStream(21).rng, 100_000))
    counts = np.bincount(np.minimum((angles / (2 * np.pi) * 8).astype(int), 7), minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_uniform_on_segment_pieces():
    points = Segment(-1, 1).sample(RandomStream(22).rng, 100_000)
    counts = np.bincount(np.minimum(((points.real + 1) / 2 * 8).astype(int), 7), minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_uniform_on_square_boxes():
    points = Polygon(UNIT_SQUARE).sample(RandomStream(23).rng, 100_000)
    col = np.minimum((points.real * 4).astype(int), 3)
    row = np.minimum((points.imag * 4).astype(int), 3)
    counts = np.bincount(4 * row + col, minlength=16)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_uniform_on_disk_rings():
    # rings of equal area, split into quarter sectors
    disk = Disk()
    points = disk.sample(RandomStream(24).rng, 100_000)
    ring = np.minimum((np.abs(points) ** 2 * 4).astype(int), 3)
    sector = np.minimum((disk.angle(points) / (np.pi / 2)).astype(int), 3)
    counts = np.bincount(4 * ring + sector, minlength=16)
    assert stats.chisquare(counts).pvalue > 1e-3


ALL_KINDS = [
    Segment(-1, 1j),
    Circle(0.5, 2.0),
    Disk(-1j, 0.3),
    Polygon([0, 2, 2 + 1j, 1 + 1j, 1 + 2j, 2j]),
    IntervalUnion([(-1, -0.5), (0.25, 1)]),
]


@pytest.mark.parametrize("domain", ALL_KINDS, ids=lambda d: d.kind)
def test_sample_uniform_stays_in_domain(domain):
    stream = RandomStream(31).substream(0, 0, "sample")
    points = np.array([sample_uniform(domain, stream) for _ in range(10_000)])
    assert domain.contains_many(points).all()


@pytest.mark.parametrize("domain", ALL_KINDS, ids=lambda d: d.kind)
def test_sample_uniform_replays_from_the_same_stream(domain):
    first = RandomStream(8).substream(4, 2, "sample")
    second = RandomStream(8).substream(4, 2, "sample")
    a = [sample_uniform(domain, first) for _ in range(50)]
    b = [sample_uniform(domain, second) for _ in range(50)]
    assert np.array_equal(np.array(a), np.array(b))
