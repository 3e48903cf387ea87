"""Configuration models for generators and experiment runs.

Run configurations are JSON documents validated by pydantic; the only
environment knobs are optional defaults read through python-dotenv.
"""

from __future__ import annotations

import os
from typing import List, Literal, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, model_validator

from domains import (
    DEFAULT_EXPONENTS,
    Circle,
    CompactDomain,
    Disk,
    ExponentProfile,
    IntervalUnion,
    Polygon,
    Segment,
)

load_dotenv()

DEFAULT_OUTPUT_DIR = os.getenv("LEJA_OUTPUT_DIR", "results")


def default_threads() -> int:
    """LEJA_THREADS, else the CPU count"""
    return int(os.getenv("LEJA_THREADS", str(os.cpu_count() or 1)))


Method = Literal["grid-leja", "mesh-pseudo-leja", "mh", "rm", "rejection-random-leja"]
MeshKind = Literal["equispaced", "edge-chebyshev"]
ComplexLike = Union[float, Tuple[float, float]]


def to_complex(value: ComplexLike) -> complex:
    if isinstance(value, (tuple, list)):
        return complex(value[0], value[1])
    return complex(value)


class ExponentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    r_nikolskii: float = Field(gt=0)
    r_markov: float = Field(gt=0)
    r_covering: float = Field(gt=0)


class DomainSpec(BaseModel):
    """JSON description of a compact set; fields depend on ``kind``"""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["segment", "circle", "disk", "polygon", "interval-union"]
    start: Optional[ComplexLike] = None
    end: Optional[ComplexLike] = None
    center: ComplexLike = 0.0
    radius: float = Field(1.0, gt=0)
    vertices: Optional[List[ComplexLike]] = None
    intervals: Optional[List[Tuple[float, float]]] = None
    exponents: Optional[ExponentModel] = None

    @model_validator(mode="after")
    def _check_geometry(self):
        required = {"segment": ("start", "end"), "polygon": ("vertices",), "interval-union": ("intervals",)}
        for name in required.get(self.kind, ()):
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} domain requires '{name}'")
        return self

    def profile(self) -> ExponentProfile:
        if self.exponents is None:
            return DEFAULT_EXPONENTS[self.kind]
        return ExponentProfile(**self.exponents.model_dump())

    def build(self) -> CompactDomain:
        profile = self.profile()
        if self.kind == "segment":
            return Segment(to_complex(self.start), to_complex(self.end), profile)
        if self.kind == "circle":
            return Circle(to_complex(self.center), self.radius, profile)
        if self.kind == "disk":
            return Disk(to_complex(self.center), self.radius, profile)
        if self.kind == "polygon":
            return Polygon([to_complex(v) for v in self.vertices], profile)
        return IntervalUnion(self.intervals, profile)


class GeneratorConfig(BaseModel):
    """Parameters of one node-sequence generation"""

    model_config = ConfigDict(extra="forbid")

    method: Method
    n_target: int = Field(ge=1)
    epsilon: float = Field(0.01, gt=0)
    seed: int = 0
    grid_size: int = Field(100_000, ge=16)
    alpha_override: Optional[float] = Field(None, gt=0)
    mesh_multiplier: float = Field(4.0, gt=0)
    mesh_kind: MeshKind = "equispaced"
    random_start: bool = False
    max_attempts: int = Field(10**6, ge=1)
    threads: int = Field(default_factory=default_threads, ge=1)

    def effective_alpha(self, exponents: ExponentProfile) -> float:
        """alpha_override, else r_l + eps for MH and r_m * r_c + eps otherwise"""
        if self.alpha_override is not None:
            return self.alpha_override
        if self.method == "mh":
            return exponents.r_nikolskii + self.epsilon
        return exponents.r_markov * exponents.r_covering + self.epsilon


class GridSizes(BaseModel):
    model_config = ConfigDict(extra="forbid")

    generation_grid: int = Field(100_000, ge=16)
    eval_grid: int = Field(10_000, ge=16)
    lebesgue_grid: int = Field(50_000, ge=16)


class RunConfig(BaseModel):
    """Everything needed to reproduce one CLI run"""

    model_config = ConfigDict(extra="forbid")

    domain: DomainSpec
    method: Method = "mh"
    n_target: int = Field(200, ge=1)
    epsilon: float = Field(0.01, gt=0)
    alpha_override: Optional[float] = Field(None, gt=0)
    seed: int = 0
    seeds: Optional[List[int]] = None
    grids: GridSizes = Field(default_factory=GridSizes)
    function: str = "runge_complex"
    output_dir: str = DEFAULT_OUTPUT_DIR
    ensemble: int = Field(1, ge=1)
    threads: int = Field(default_factory=default_threads, ge=1)
    mesh_multiplier: float = Field(4.0, gt=0)
    mesh_kind: MeshKind = "equispaced"
    random_start: bool = False
    max_attempts: int = Field(10**6, ge=1)
    n_range: Tuple[int, int] = (10, 200)
    histogram_bins: int = Field(50, ge=1)

    @model_validator(mode="after")
    def _check_range(self):
        lo, hi = self.n_range
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid n_range {self.n_range}")
        if self.seeds is not None and not self.seeds:
            raise ValueError("seeds list must not be empty")
        if self.seeds is not None and len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds list contains duplicates")
        return self

    def seed_list(self) -> List[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [self.seed + i for i in range(self.ensemble)]

    def generator_config(self, seed: Optional[int] = None) -> GeneratorConfig:
        return GeneratorConfig(
            method=self.method,
            n_target=self.n_target,
            epsilon=self.epsilon,
            seed=self.seed if seed is None else seed,
            grid_size=self.grids.generation_grid,
            alpha_override=self.alpha_override,
            mesh_multiplier=self.mesh_multiplier,
            mesh_kind=self.mesh_kind,
            random_start=self.random_start,
            max_attempts=self.max_attempts,
            threads=self.threads,
        )
