import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from polyeval import EXTERNAL, NodeSequence

logger = logging.getLogger(__name__)

# round-trips every float64 exactly
FLOAT_FORMAT = "%.17g"


class ResultStore:
    """Writes run artifacts under one output directory"""

    def __init__(self, storage_dir: str = "results"):
        self.storage_dir = Path(storage_dir)
        self.storage_dir.mkdir(parents=True, exist_ok=True)

    def path(self, filename: str) -> Path:
        return self.storage_dir / filename

    def save_points(self, sequence: NodeSequence, filename: str = "points.csv") -> Path:
        """Save nodes as CSV rows index,re,im"""
        filepath = self.path(filename)
        frame = pd.DataFrame(
            {"index": np.arange(len(sequence)), "re": sequence.nodes.real, "im": sequence.nodes.imag}
        )
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info("saved %d nodes to %s", len(sequence), filepath)
        return filepath

    def save_series(
        self, series: Sequence[Tuple[int, float]], filename: str, value_name: str = "value"
    ) -> Path:
        """Save an (n, value) series as CSV"""
        filepath = self.path(filename)
        frame = pd.DataFrame(list(series), columns=["n", value_name])
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return filepath

    def save_histogram(self, rows: Sequence[Tuple[float, float, float]], filename: str = "histogram.csv") -> Path:
        """Save histogram rows bin_left,bin_right,density as CSV"""
        filepath = self.path(filename)
        frame = pd.DataFrame(list(rows), columns=["bin_left", "bin_right", "density"])
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return filepath

    def save_json(self, payload: Dict[str, Any], filename: str) -> Path:
        """Save a JSON document; NaN and infinity are refused"""
        filepath = self.path(filename)
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, ensure_ascii=False, allow_nan=False)
            f.write("\n")
        return filepath

    def save_meta(self, meta: Dict[str, Any], filename: str = "meta.json") -> Path:
        """Save run metadata; ``written_at`` is the only field that varies between identical runs"""
        return self.save_json({"written_at": datetime.now().isoformat(), **meta}, filename)


def load_points(filepath, method: str = EXTERNAL, seed: Optional[int] = None, domain_id: str = "") -> NodeSequence:
    """Read a points CSV (index,re,im) back into a NodeSequence, ordered by index"""
    frame = pd.read_csv(filepath)
    missing = {"re", "im"} - set(frame.columns)
    if missing:
        raise ValueError(f"{filepath}: missing columns {sorted(missing)}")
    if "index" in frame.columns:
        frame = frame.sort_values("index", kind="stable")
    nodes = frame["re"].to_numpy(dtype=float) + 1j * frame["im"].to_numpy(dtype=float)
    if not np.all(np.isfinite(nodes)):
        raise ValueError(f"{filepath}: non-finite coordinates")
    return NodeSequence(nodes, method, seed, domain_id)

