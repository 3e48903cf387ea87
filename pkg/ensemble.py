import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from diagnostics import QualityReport, build_quality_report
from errors import LejaError
from generators import generate
from interp import resolve_function
from polyeval import NodeSequence
from run_tracker import RunTracker
from settings import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
    seed: int
    report: Optional[QualityReport] = None
    sequence: Optional[NodeSequence] = None
    timing: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_seed(config_data: Dict[str, Any], seed: int) -> SeedOutcome:
    """Generate and diagnose one seed; library failures are captured, not raised"""
    config = RunConfig.model_validate(config_data)
    try:
        domain = config.domain.build()
        tracker = RunTracker(config.n_target)
        sequence = generate(domain, config.generator_config(seed), progress_sink=tracker)
        try:
            f = resolve_function(config.function, domain)
        except LejaError as exc:
            logger.warning("seed %d: no geometric rate (%s)", seed, exc)
            f = None
        report = build_quality_report(
            domain,
            sequence,
            lebesgue_grid=config.grids.lebesgue_grid,
            n_range=config.n_range,
            f=f,
            eval_grid_size=config.grids.eval_grid,
            bins=config.histogram_bins,
            threads=config.threads,
            metadata={"alpha": config.generator_config(seed).effective_alpha(domain.exponents)},
        )
        return SeedOutcome(seed, report, sequence, tracker.get_stats())
    except (LejaError, ValueError) as exc:
        logger.error("seed %d failed: %s", seed, exc)
        return SeedOutcome(seed, error=f"{type(exc).__name__}: {exc}")


class EnsembleRunner:
    """Runs one generation + report per seed on a process pool"""

    def __init__(self, config: RunConfig, workers: Optional[int] = None):
        self.config = config
        self.seeds = config.seed_list()
        self.workers = workers or min(len(self.seeds), os.cpu_count() or 1)

    def run(self) -> List[SeedOutcome]:
        """Outcomes in seed-list order, whatever order the workers finish in"""
        data = self.config.model_dump()
        if self.workers <= 1 or len(self.seeds) == 1:
            outcomes = [run_seed(data, seed) for seed in self.seeds]
        else:
            logger.info("running %d seeds on %d workers", len(self.seeds), self.workers)
            by_seed: Dict[int, SeedOutcome] = {}
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = {pool.submit(run_seed, data, seed): seed for seed in self.seeds}
                for future in as_completed(futures):
                    outcome = future.result()
                    by_seed[outcome.seed] = outcome
                    logger.info("seed %d done (%s)", outcome.seed, "ok" if outcome.ok else "failed")
            outcomes = [by_seed[seed] for seed in self.seeds]
        failed = sum(not o.ok for o in outcomes)
        if failed:
            logger.warning("%d of %d seeds failed", failed, len(outcomes))
        return outcomes
