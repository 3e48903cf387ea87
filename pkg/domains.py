"""Compact subsets of the complex plane with their natural measures.

Segments, circles and interval unions carry arclength, disks and polygons
carry area. Every domain knows how to test membership, draw uniform
points, lay out a deterministic evaluation grid, and build a boundary mesh
for the deterministic pseudo-Leja construction.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import shapely
from shapely import geometry

from errors import ConfigError, DegenerateDomainError
from random_stream import RandomStream

TOLERANCE = 1e-12
GRAZE_SHIFT = 1e-12
MAX_REJECTIONS = 10**6
REJECTION_BATCH = 4096


@dataclass(frozen=True)
class ExponentProfile:
    """Nikolskii, Markov and covering exponents (r_l, r_m, r_c) of a domain"""

    r_nikolskii: float
    r_markov: float
    r_covering: float

    def __post_init__(self):
        for name in ("r_nikolskii", "r_markov", "r_covering"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value}")

    def as_dict(self) -> Dict[str, float]:
        return {
            "r_nikolskii": self.r_nikolskii,
            "r_markov": self.r_markov,
            "r_covering": self.r_covering,
        }


DEFAULT_EXPONENTS: Dict[str, ExponentProfile] = {
    "segment": ExponentProfile(2.0, 2.0, 1.0),
    "interval-union": ExponentProfile(2.0, 2.0, 1.0),
    "circle": ExponentProfile(1.0, 1.0, 1.0),
    "disk": ExponentProfile(2.0, 1.0, 2.0),
    "polygon": ExponentProfile(2.0, 2.0, 2.0),
}


def as_point(z) -> complex:
    """Coerce to a finite Python complex; NaN or infinite components are rejected"""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite point {z!r}")
    return z


def _as_points(points) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(points, dtype=complex))
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite point in input")
    return arr


def _segment_distance(points: np.ndarray, a: complex, b: complex) -> np.ndarray:
    d = b - a
    length2 = abs(d) ** 2
    if length2 == 0.0:
        return np.abs(points - a)
    t = np.clip(((points - a) * np.conj(d)).real / length2, 0.0, 1.0)
    return np.abs(points - (a + t * d))


def _chebyshev_lobatto(count: int) -> np.ndarray:
    """``count`` Chebyshev-Lobatto parameters on [0, 1), right endpoint excluded"""
    if count == 1:
        return np.zeros(1)
    j = np.arange(count)
    return 0.5 * (1.0 - np.cos(np.pi * j / count))


class CompactDomain(ABC):
    """A compact set K in the complex plane with its natural measure"""

    kind: str = ""

    def __init__(self, exponents: ExponentProfile | None = None):
        self.exponents = exponents or DEFAULT_EXPONENTS[self.kind]

    @abstractmethod
    def contains_many(self, points) -> np.ndarray:
        """Vectorised membership test"""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` i.i.d. points distributed as the normalised measure on K"""

    @abstractmethod
    def eval_grid(self, target_count: int) -> np.ndarray:
        """Deterministic quasi-uniform grid with roughly ``target_count`` points"""

    @property
    @abstractmethod
    def diameter(self) -> float:
        """Largest distance between two points of K"""

    @property
    @abstractmethod
    def domain_id(self) -> str:
        """Short human-readable name used in logs and metadata"""

    def boundary_mesh(self, count: int, mesh_kind: str = "equispaced") -> np.ndarray:
        """About ``count`` points on the boundary for mesh pseudo-Leja"""
        raise ConfigError(f"{self.kind} has no parameterised boundary; mesh pseudo-Leja is unsupported")

    def contains(self, z) -> bool:
        """Membership of a single point"""
        return bool(self.contains_many(as_point(z))[0])

    def __repr__(self) -> str:
        return self.domain_id


class Segment(CompactDomain):
    kind = "segment"

    def __init__(self, start, end, exponents: ExponentProfile | None = None):
        super().__init__(exponents)
        self.start = as_point(start)
        self.end = as_point(end)
        if self.start == self.end:
            raise DegenerateDomainError("segment endpoints coincide")

    def contains_many(self, points) -> np.ndarray:
        return _segment_distance(_as_points(points), self.start, self.end) <= TOLERANCE

    def sample(self, rng, size):
        t = rng.random(size)
        return self.start + t * (self.end - self.start)

    def eval_grid(self, target_count):
        _check_target(target_count)
        return np.linspace(self.start, self.end, target_count)

    def boundary_mesh(self, count, mesh_kind="equispaced"):
        return np.linspace(self.start, self.end, max(count, 2))

    def parameter(self, points) -> np.ndarray:
        """Affine coordinate in [-1, 1] along the segment"""
        d = self.end - self.start
        t = ((_as_points(points) - self.start) * np.conj(d)).real / abs(d) ** 2
        return 2.0 * t - 1.0

    @property
    def diameter(self):
        return abs(self.end - self.start)

    @property
    def domain_id(self):
        return f"segment[{self.start}, {self.end}]"


class Circle(CompactDomain):
    kind = "circle"

    def __init__(self, center=0.0, radius: float = 1.0, exponents: ExponentProfile | None = None):
        super().__init__(exponents)
        self.center = as_point(center)
        self.radius = float(radius)
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise DegenerateDomainError(f"radius must be positive, got {radius}")

    def contains_many(self, points):
        return np.abs(np.abs(_as_points(points) - self.center) - self.radius) <= TOLERANCE

    def _arc(self, theta: np.ndarray) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * theta)

    def sample(self, rng, size):
        return self._arc(2.0 * np.pi * rng.random(size))

    def eval_grid(self, target_count):
        _check_target(target_count)
        return self._arc(2.0 * np.pi * np.arange(target_count) / target_count)

    def boundary_mesh(self, count, mesh_kind="equispaced"):
        count = max(count, 1)
        return self._arc(2.0 * np.pi * np.arange(count) / count)

    def angle(self, points) -> np.ndarray:
        """Polar angle about the center, in [0, 2*pi)"""
        return np.mod(np.angle(_as_points(points) - self.center), 2.0 * np.pi)

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def domain_id(self):
        return f"{self.kind}(center={self.center}, radius={self.radius})"


class Disk(Circle):
    kind = "disk"

    def contains_many(self, points):
        return np.abs(_as_points(points) - self.center) <= self.radius + TOLERANCE

    def sample(self, rng, size):
        r = self.radius * np.sqrt(rng.random(size))
        theta = 2.0 * np.pi * rng.random(size)
        return self.center + r * np.exp(1j * theta)

    def eval_grid(self, target_count):
        """Rim points plus interior cell centres, about ``target_count`` in all"""
        _check_target(target_count)
        spacing = self.radius * math.sqrt(math.pi / target_count)
        rim_count = min(math.ceil(2.0 * math.pi * self.radius / spacing), max(target_count // 2, 1))
        r = self.radius
        box = (self.center.real - r, self.center.imag - r, self.center.real + r, self.center.imag + r)
        cells, hx, hy = _cell_centres(box, math.pi * r * r, target_count - rim_count)
        interior = cells[np.abs(cells - self.center) < r - 0.25 * min(hx, hy)]
        rim = self._arc(2.0 * np.pi * np.arange(rim_count) / rim_count)
        return np.concatenate([rim, interior])


class Polygon(CompactDomain):
    kind = "polygon"

    def __init__(self, vertices: Sequence, exponents: ExponentProfile | None = None):
        super().__init__(exponents)
        self.vertices = _as_points(vertices)
        if len(self.vertices) < 3:
            raise DegenerateDomainError(f"polygon needs at least 3 vertices, got {len(self.vertices)}")
        self._edges_start = self.vertices
        self._edges_end = np.roll(self.vertices, -1)
        self.edge_lengths = np.abs(self._edges_end - self._edges_start)
        zero = np.flatnonzero(self.edge_lengths == 0.0)
        if zero.size:
            raise DegenerateDomainError(f"polygon edge {int(zero[0])} has zero length")
        self.shape = geometry.Polygon(np.column_stack([self.vertices.real, self.vertices.imag]))
        if self.shape.area <= 0.0:
            raise DegenerateDomainError("polygon has zero area")
        if not (self.shape.exterior.is_simple and self.shape.is_valid):
            raise DegenerateDomainError("polygon edges intersect")
        self.area = float(self.shape.area)
        self.perimeter = float(self.shape.exterior.length)
        self.bounds = tuple(float(b) for b in self.shape.bounds)

    def boundary_distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the polygon's edges"""
        pts = _as_points(points)
        flat = pts.ravel()
        dist = shapely.distance(self.shape.exterior, shapely.points(flat.real, flat.imag))
        return np.asarray(dist, dtype=float).reshape(pts.shape)

    def _winding(self, pts: np.ndarray) -> np.ndarray:
        x = pts.real
        y = pts.imag.copy()
        # rays grazing a vertex are nudged off it
        grazing = np.isin(y, self.vertices.imag)
        y[grazing] += GRAZE_SHIFT
        wn = np.zeros(pts.shape, dtype=int)
        for a, b in zip(self._edges_start, self._edges_end):
            is_left = (b.real - a.real) * (y - a.imag) - (x - a.real) * (b.imag - a.imag)
            upward = (a.imag <= y) & (b.imag > y) & (is_left > 0)
            downward = (a.imag > y) & (b.imag <= y) & (is_left < 0)
            wn += upward.astype(int) - downward.astype(int)
        return wn

    def contains_many(self, points):
        pts = _as_points(points)
        return (self._winding(pts) != 0) | (self.boundary_distance(pts) <= TOLERANCE)

    def sample(self, rng, size):
        xmin, ymin, xmax, ymax = self.bounds
        out: List[np.ndarray] = []
        have = 0
        misses = 0
        while have < size:
            box = (xmin + (xmax - xmin) * rng.random(REJECTION_BATCH)) + 1j * (
                ymin + (ymax - ymin) * rng.random(REJECTION_BATCH)
            )
            inside = self.contains_many(box)
            hits = np.flatnonzero(inside)
            if hits.size == 0:
                misses += REJECTION_BATCH
            elif misses + int(hits[0]) > MAX_REJECTIONS:
                misses += int(hits[0])
            else:
                misses = REJECTION_BATCH - 1 - int(hits[-1])
            if misses > MAX_REJECTIONS:
                raise DegenerateDomainError("polygon rejection sampling exceeded 10^6 draws; zero area?")
            accepted = box[inside][: size - have]
            out.append(accepted)
            have += accepted.size
        return np.concatenate(out) if out else np.empty(0, dtype=complex)

    def _perimeter_points(self, count: int) -> np.ndarray:
        pieces = []
        for a, b, length in zip(self._edges_start, self._edges_end, self.edge_lengths):
            k = max(1, int(round(count * length / self.perimeter)))
            pieces.append(a + (b - a) * np.arange(k) / k)
        return np.concatenate(pieces)

    def eval_grid(self, target_count):
        """Vertices and perimeter points plus interior cell centres, about ``target_count`` in all"""
        _check_target(target_count)
        m = len(self.vertices)
        spacing = math.sqrt(self.area / target_count)
        rim = min(max(math.ceil(self.perimeter / spacing), m), max(target_count // 2, m))
        interior, hx, hy = _cell_centres(self.bounds, self.area, target_count - rim)
        keep = self.contains_many(interior) & (self.boundary_distance(interior) > 0.25 * min(hx, hy))
        return np.concatenate([self._perimeter_points(rim), interior[keep]])

    def boundary_mesh(self, count, mesh_kind="equispaced"):
        count = max(count, len(self.vertices))
        if mesh_kind == "edge-chebyshev":
            share = np.maximum(2, np.ceil(count * self.edge_lengths / self.perimeter)).astype(int)
            return np.concatenate(
                [a + (b - a) * _chebyshev_lobatto(p) for a, b, p in zip(self._edges_start, self._edges_end, share)]
            )
        s = self.perimeter * np.arange(count) / count
        cumulative = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])
        edge = np.clip(np.searchsorted(cumulative, s, side="right") - 1, 0, len(self.vertices) - 1)
        t = (s - cumulative[edge]) / self.edge_lengths[edge]
        return self._edges_start[edge] + t * (self._edges_end[edge] - self._edges_start[edge])

    @property
    def diameter(self):
        """Largest vertex-to-vertex distance"""
        diffs = self.vertices[:, None] - self.vertices[None, :]
        return float(np.abs(diffs).max())

    @property
    def domain_id(self):
        return f"polygon[{len(self.vertices)} vertices]"


class IntervalUnion(CompactDomain):
    kind = "interval-union"

    def __init__(self, intervals: Sequence[Tuple[float, float]], exponents: ExponentProfile | None = None):
        super().__init__(exponents)
        parts = sorted((float(a), float(b)) for a, b in intervals)
        if not parts:
            raise DegenerateDomainError("interval union needs at least one interval")
        for a, b in parts:
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise DegenerateDomainError(f"invalid interval [{a}, {b}]")
        for (_, b0), (a1, _) in zip(parts, parts[1:]):
            if a1 <= b0:
                raise DegenerateDomainError("intervals must be pairwise disjoint")
        self.intervals = parts
        self.lengths = np.array([b - a for a, b in parts])

    def contains_many(self, points):
        pts = _as_points(points)
        on_axis = np.abs(pts.imag) <= TOLERANCE
        inside = np.zeros(pts.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (pts.real >= a - TOLERANCE) & (pts.real <= b + TOLERANCE)
        return on_axis & inside

    def sample(self, rng, size):
        # component chosen with probability proportional to its length
        cumulative = np.cumsum(self.lengths) / self.lengths.sum()
        component = np.minimum(np.searchsorted(cumulative, rng.random(size), side="right"), len(self.intervals) - 1)
        t = rng.random(size)
        lows = np.array([a for a, _ in self.intervals])
        return (lows[component] + t * self.lengths[component]).astype(complex)

    def eval_grid(self, target_count):
        _check_target(target_count)
        share = np.maximum(2, np.round(target_count * self.lengths / self.lengths.sum())).astype(int)
        return np.concatenate([np.linspace(a, b, k) for (a, b), k in zip(self.intervals, share)]).astype(complex)

    @property
    def diameter(self):
        return self.intervals[-1][1] - self.intervals[0][0]

    @property
    def domain_id(self):
        return "interval-union" + "".join(f"[{a}, {b}]" for a, b in self.intervals)


def _check_target(target_count: int):
    if target_count < 2:
        raise ValueError(f"grid target count must be at least 2, got {target_count}")


def _cell_centres(bounds: Tuple[float, float, float, float], area: float, count: int):
    """Centres of a tensor grid over ``bounds`` with about ``count`` of them inside a set of ``area``"""
    xmin, ymin, xmax, ymax = bounds
    width, height = xmax - xmin, ymax - ymin
    cells = max(count, 1) * width * height / area
    h = math.sqrt(width * height / cells)
    ny = max(1, round(height / h))
    nx = max(1, round(cells / ny))
    ny = max(1, round(cells / nx))
    hx, hy = width / nx, height / ny
    xx, yy = np.meshgrid(xmin + hx * (np.arange(nx) + 0.5), ymin + hy * (np.arange(ny) + 0.5))
    return (xx + 1j * yy).ravel(), hx, hy


def contains(domain: CompactDomain, z) -> bool:
    return domain.contains(z)


def sample_uniform(domain: CompactDomain, stream: RandomStream) -> complex:
    """One point distributed as the normalised natural measure of ``domain``"""
    return complex(domain.sample(stream.rng, 1)[0])


def eval_grid(domain: CompactDomain, target_count: int) -> np.ndarray:
    return domain.eval_grid(target_count)


def diameter(domain: CompactDomain) -> float:
    return domain.diameter
