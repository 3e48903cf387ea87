"""Quality diagnostics for node sequences.

Capacity estimators, equilibrium-measure comparison, separation and
pseudo-Leja ratios, and the log-log / geometric fits used to summarize
Lebesgue constants and interpolation errors across runs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from scipy.integrate import quad

from domains import Circle, CompactDomain, Segment
from errors import InvalidSequenceError, ReferenceUnavailableError
from interp import DEFAULT_LEBESGUE_GRID, error_trace, lebesgue_series
from polyeval import LogProductAccumulator, NodeSequence, NodesLike, node_array, pairwise_log_product, sup_norm_estimate

logger = logging.getLogger(__name__)

Series = List[Tuple[int, float]]
HistogramRow = Tuple[float, float, float]

DEFAULT_CUTOFF_RATIO = 1e-13


@dataclass(frozen=True)
class ReferenceDensity:
    """Closed-form equilibrium density of a domain, in a projected coordinate.

    ``project`` maps nodes to the real coordinate the density lives on
    (segment parameter in [-1, 1], or polar angle in [0, 2*pi)).
    """

    kind: str
    support: Tuple[float, float]
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    project: Callable[[np.ndarray], np.ndarray]
    # singular weight exponents at the support ends, for scipy's 'alg' quadrature
    endpoint_weight: Optional[Tuple[float, float]] = None

    def total_mass(self) -> float:
        lo, hi = self.support
        if self.endpoint_weight is None:
            return quad(lambda x: float(self.pdf(np.asarray(x))), lo, hi)[0]
        # pdf = smooth part * (x - lo)^a * (hi - x)^b with smooth part 1/pi here
        return quad(lambda x: 1.0 / math.pi, lo, hi, weight="alg", wvar=self.endpoint_weight)[0]


def _arcsine_pdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(x) < 1.0, 1.0 / (np.pi * np.sqrt(1.0 - x**2)), 0.0)


def _arcsine_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return 0.5 + np.arcsin(x) / np.pi


def _uniform_angle_pdf(theta):
    theta = np.asarray(theta, dtype=float)
    return np.where((theta >= 0.0) & (theta <= 2.0 * np.pi), 1.0 / (2.0 * np.pi), 0.0)


def _uniform_angle_cdf(theta):
    return np.clip(np.asarray(theta, dtype=float) / (2.0 * np.pi), 0.0, 1.0)


def reference_density(domain: CompactDomain) -> ReferenceDensity:
    """Equilibrium density for segments (arcsine) and circles/disks (uniform angle)"""
    if isinstance(domain, Segment):
        return ReferenceDensity(
            "segment", (-1.0, 1.0), _arcsine_pdf, _arcsine_cdf, domain.parameter, endpoint_weight=(-0.5, -0.5)
        )
    if isinstance(domain, Circle):
        # the disk's equilibrium measure sits on its rim, so both project to the angle
        return ReferenceDensity(domain.kind, (0.0, 2.0 * np.pi), _uniform_angle_pdf, _uniform_angle_cdf, domain.angle)
    raise ReferenceUnavailableError(f"no closed-form equilibrium measure for {domain.kind}")


def node_histogram(values, bins: int, support: Optional[Tuple[float, float]] = None) -> List[HistogramRow]:
    """Normalized histogram rows (bin_left, bin_right, density)"""
    values = np.asarray(values, dtype=float)
    density, edges = np.histogram(values, bins=bins, range=support, density=True)
    return [(float(edges[i]), float(edges[i + 1]), float(density[i])) for i in range(len(density))]


def empirical_measure_test(nodes: NodesLike, reference: ReferenceDensity, bins: int = 50) -> Tuple[float, List[HistogramRow]]:
    """KS distance between projected nodes and the reference CDF, plus a histogram"""
    projected = reference.project(node_array(nodes))
    ks = stats.kstest(projected, reference.cdf)
    return float(ks.statistic), node_histogram(projected, bins, reference.support)


def histogram_only(nodes: NodesLike, domain: CompactDomain, bins: int = 50) -> List[HistogramRow]:
    """Histogram of the real parts, for domains without a reference density"""
    return node_histogram(node_array(nodes).real, bins)


def capacity_supnorm(nodes: NodesLike, grid) -> float:
    """exp(max log|pi_n| / n) over the grid"""
    nodes = node_array(nodes)
    if len(nodes) < 1:
        raise ValueError("capacity_supnorm needs at least one node")
    return math.exp(sup_norm_estimate(nodes, grid)[0] / len(nodes))


def capacity_transfinite(nodes: NodesLike) -> float:
    """Discrete transfinite diameter (prod_{i<j} |z_i - z_j|)^(2 / (n (n - 1)))"""
    nodes = node_array(nodes)
    n = len(nodes)
    if n < 2:
        raise ValueError("capacity_transfinite needs at least two nodes")
    return math.exp(2.0 * pairwise_log_product(nodes) / (n * (n - 1)))


def separation_series(nodes: NodesLike) -> Series:
    """(n, min_{j<n} |z_n - z_j|) for n = 1..len(nodes) - 1"""
    nodes = node_array(nodes)
    if len(nodes) < 2:
        raise ValueError("separation_series needs at least two nodes")
    return [(n, float(np.abs(nodes[:n] - nodes[n]).min())) for n in range(1, len(nodes))]


def lower_envelope(series: Series) -> Series:
    values = np.minimum.accumulate([v for _, v in series])
    return [(n, float(v)) for (n, _), v in zip(series, values)]


def _running_log_sup(nodes: np.ndarray, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Grid max of log|pi_k| for k = 0..N, and log|pi_k(z_k)| for k = 0..N-1.

    Grid and nodes share one accumulator so each node's own value is
    computed by the same arithmetic as the grid values.
    """
    acc = LogProductAccumulator(np.concatenate([grid, nodes]))
    size = len(grid)
    sups = np.empty(len(nodes) + 1)
    at_node = np.empty(len(nodes))
    for k, z in enumerate(nodes):
        values = acc.values()
        sups[k] = values[:size].max()
        at_node[k] = values[size + k]
        acc.add(z)
    sups[len(nodes)] = acc.values()[:size].max()
    return sups, at_node


def pseudo_leja_ratio_series(nodes: NodesLike, domain: CompactDomain, grid=None) -> Series:
    """(n, |pi_n(z_n)| / max_grid |pi_n|) for n = 1..len(nodes) - 1"""
    nodes = node_array(nodes)
    if len(nodes) < 2:
        raise ValueError("pseudo_leja_ratio_series needs at least two nodes")
    grid = domain.eval_grid(DEFAULT_LEBESGUE_GRID) if grid is None else np.atleast_1d(np.asarray(grid, dtype=complex))
    sups, at_node = _running_log_sup(nodes, grid)
    return [(n, math.exp(at_node[n] - sups[n])) for n in range(1, len(nodes))]


def loglog_slope(series: Sequence[Tuple[int, float]], n_min: int, n_max: int) -> Tuple[float, float, float]:
    """Least squares of ln(value) on ln(n) over n_min <= n <= n_max: (slope, intercept, r^2)"""
    points = [(n, v) for n, v in series if n_min <= n <= n_max]
    if len(points) < 3:
        raise ValueError(f"need at least 3 points in [{n_min}, {n_max}], got {len(points)}")
    ns = np.array([n for n, _ in points], dtype=float)
    values = np.array([v for _, v in points], dtype=float)
    if not np.all(values > 0) or not np.all(ns > 0):
        raise ValueError("log-log fit needs positive n and values")
    fit = stats.linregress(np.log(ns), np.log(values))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def geometric_rate(series: Sequence[Tuple[int, float]], cutoff_ratio: float = DEFAULT_CUTOFF_RATIO) -> float:
    """rho from ln e_n = a + n ln rho, fitted above the cutoff_ratio * max e_n plateau"""
    errors = np.array([e for _, e in series], dtype=float)
    if errors.size == 0:
        raise ValueError("empty error series")
    keep = (errors > cutoff_ratio * errors.max()) & (errors > 0)
    if keep.sum() < 3:
        raise ValueError(f"need at least 3 errors above the cutoff, got {int(keep.sum())}")
    ns = np.array([n for n, _ in series], dtype=float)[keep]
    fit = stats.linregress(ns, np.log(errors[keep]))
    return math.exp(fit.slope)


def _try_fit(fit: Callable[[], Any]) -> Optional[float]:
    try:
        result = fit()
    except ValueError as exc:
        logger.debug("fit skipped: %s", exc)
        return None
    return float(result[0] if isinstance(result, tuple) else result)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class QualityReport:
    """Per-n quality records for one node sequence.

    Records are indexed by node count n (prefix z_0..z_{n-1}); separation
    and pseudo-Leja ratio describe the newest node z_{n-1} and are NaN
    for n = 1, as is the transfinite capacity.
    """

    n: List[int]
    lebesgue: List[float]
    min_separation: List[float]
    capacity_supnorm: List[float]
    capacity_transfinite: List[float]
    pseudo_leja_ratio: List[float]
    fitted: Dict[str, Optional[float]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    ks_distance: Optional[float] = None
    histogram: List[HistogramRow] = field(default_factory=list)

    RECORD_FIELDS = ("lebesgue", "min_separation", "capacity_supnorm", "capacity_transfinite", "pseudo_leja_ratio")

    def lebesgue_series(self) -> Series:
        return list(zip(self.n, self.lebesgue))

    def value_at(self, metric: str, n: int) -> float:
        return getattr(self, metric)[self.n.index(n)]

    def to_dict(self) -> Dict[str, Any]:
        records = {"n": list(self.n)}
        for name in self.RECORD_FIELDS:
            records[name] = [_clean(float(v)) for v in getattr(self, name)]
        return {
            "metadata": self.metadata,
            "fitted": {k: _clean(v) for k, v in self.fitted.items()},
            "ks_distance": _clean(self.ks_distance),
            "records": records,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QualityReport":
        records = data["records"]
        columns = {
            name: [math.nan if v is None else float(v) for v in records[name]] for name in cls.RECORD_FIELDS
        }
        return cls(
            n=[int(n) for n in records["n"]],
            fitted=dict(data.get("fitted", {})),
            metadata=dict(data.get("metadata", {})),
            ks_distance=data.get("ks_distance"),
            **columns,
        )


def build_quality_report(
    domain: CompactDomain,
    nodes: NodeSequence,
    lebesgue_grid: int = DEFAULT_LEBESGUE_GRID,
    n_range: Tuple[int, int] = (10, 200),
    f: Optional[Callable] = None,
    eval_grid_size: int = 10_000,
    bins: int = 50,
    threads: int = 1,
    metadata: Optional[Dict[str, Any]] = None,
) -> QualityReport:
    """Every per-n diagnostic for ``nodes``, plus the fitted exponents"""
    sequence = nodes
    nodes = node_array(sequence)
    count = len(nodes)
    if count < 1:
        raise InvalidSequenceError("cannot report on an empty node sequence")
    grid = domain.eval_grid(lebesgue_grid)

    lebesgue = [estimate.value for estimate in lebesgue_series(domain, nodes, grid, threads=threads)]
    sups, at_node = _running_log_sup(nodes, grid)
    ns = list(range(1, count + 1))
    cap_sup = [math.exp(sups[n] / n) for n in ns]
    ratio = [math.nan] + [math.exp(at_node[n - 1] - sups[n - 1]) for n in ns[1:]]

    separation = [math.nan]
    cap_transfinite = [math.nan]
    pair_logs: List[float] = []
    for n in ns[1:]:
        z = nodes[n - 1]
        dist = np.abs(nodes[: n - 1] - z)
        if not np.all(dist > 0):
            raise InvalidSequenceError(f"node {n - 1} repeats an earlier node")
        separation.append(float(dist.min()))
        pair_logs.extend(np.log(dist).tolist())
        cap_transfinite.append(math.exp(2.0 * math.fsum(pair_logs) / (n * (n - 1))))

    lo, hi = max(n_range[0], 1), min(n_range[1], count)
    fitted: Dict[str, Optional[float]] = {
        "lebesgue_slope": _try_fit(lambda: loglog_slope(list(zip(ns, lebesgue)), lo, hi)),
        "separation_slope": _try_fit(
            lambda: loglog_slope(lower_envelope(list(zip(ns[1:], separation[1:]))), max(lo, 2), hi)
        ),
        "geometric_rate": None,
    }
    if f is not None:
        fitted["geometric_rate"] = _try_fit(lambda: geometric_rate(error_trace(domain, nodes, f, eval_grid_size)))

    ks_distance = None
    try:
        ks_distance, histogram = empirical_measure_test(nodes, reference_density(domain), bins)
    except ReferenceUnavailableError:
        histogram = histogram_only(nodes, domain, bins)

    info = {
        "seed": getattr(sequence, "seed", None),
        "method": getattr(sequence, "method", None),
        "domain": domain.domain_id,
        "grid_sizes": {"lebesgue_grid": lebesgue_grid, "eval_grid": eval_grid_size},
        "n_range": [lo, hi],
    }
    info.update(metadata or {})
    logger.info(
        "report for %d nodes: lebesgue slope %s, ks %s", count, fitted["lebesgue_slope"], ks_distance
    )
    return QualityReport(
        n=ns,
        lebesgue=lebesgue,
        min_separation=separation,
        capacity_supnorm=cap_sup,
        capacity_transfinite=cap_transfinite,
        pseudo_leja_ratio=ratio,
        fitted=fitted,
        metadata=info,
        ks_distance=ks_distance,
        histogram=histogram,
    )


def lebesgue_frame(reports: Sequence[QualityReport]) -> pd.DataFrame:
    """Lebesgue estimates with one column per report, indexed by n"""
    if not reports:
        raise ValueError("no reports")
    ns = list(reports[0].n)
    for report in reports[1:]:
        if list(report.n) != ns:
            raise ValueError("reports cover mismatched n ranges")
    return pd.DataFrame({i: report.lebesgue for i, report in enumerate(reports)}, index=pd.Index(ns, name="n"))


def ensemble_stats(reports: Sequence[QualityReport], n_range: Tuple[int, int]) -> Dict[str, Any]:
    """Per-n sample mean and sd of the Lebesgue estimates and their log-log slopes"""
    if len(reports) < 2:
        raise ValueError("ensemble statistics need at least two reports")
    frame = lebesgue_frame(reports)
    lo, hi = n_range
    if lo < frame.index.min() or hi > frame.index.max():
        raise ValueError(f"n_range {tuple(n_range)} outside the reported range")
    mean = frame.mean(axis=1)
    sd = frame.std(axis=1, ddof=1)
    mean_series = list(zip(mean.index.tolist(), mean.tolist()))
    sd_series = list(zip(sd.index.tolist(), sd.tolist()))
    mean_slope = loglog_slope(mean_series, lo, hi)[0]
    # a vanishing spread has no log-log slope
    sd_slope = _try_fit(lambda: loglog_slope(sd_series, lo, hi))
    return {
        "mean_lebesgue_slope": mean_slope,
        "sd_lebesgue_slope": math.nan if sd_slope is None else sd_slope,
        "per_n_mean": mean_series,
        "per_n_sd": sd_series,
    }


def best_seed(reports: Sequence[QualityReport], n_range: Tuple[int, int]) -> Optional[int]:
    """Seed whose Lebesgue estimate is smallest at the top of ``n_range``"""
    if not reports:
        return None
    top = min(n_range[1], min(max(report.n) for report in reports))
    best = min(reports, key=lambda report: report.value_at("lebesgue", top))
    return best.metadata.get("seed")
