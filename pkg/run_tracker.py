import logging
from typing import Any, Dict, List

logger = logging.getLogger(__name__)

CHECKPOINT_EVERY = 100


class RunTracker:
    """Progress sink for ``generators.generate``.

    Records the step-count schedule N_n and wall-clock seconds at every
    ``checkpoint_every`` nodes, for meta.json timing reports.
    """

    def __init__(self, n_target: int, checkpoint_every: int = CHECKPOINT_EVERY):
        self.n_target = n_target
        self.checkpoint_every = checkpoint_every
        self.schedule: List[int] = []
        self.checkpoints: List[Dict[str, float]] = []
        self.elapsed = 0.0

    def __call__(self, n: int, steps: int, elapsed: float) -> None:
        """Record node n (0-based) drawn with ``steps`` candidates or moves"""
        self.schedule.append(int(steps))
        self.elapsed = elapsed
        count = n + 1
        if count % self.checkpoint_every == 0 or count == self.n_target:
            self.checkpoints.append({"n": count, "seconds": round(elapsed, 3)})
            logger.info("node %d/%d (N_n=%d) after %.1fs", count, self.n_target, steps, elapsed)

    def get_stats(self) -> Dict[str, Any]:
        """Schedule, checkpoints and totals for meta.json"""
        return {
            "nodes": len(self.schedule),
            "schedule": list(self.schedule),
            "checkpoints": list(self.checkpoints),
            "total_steps": sum(self.schedule),
            "seconds": round(self.elapsed, 3),
        }
