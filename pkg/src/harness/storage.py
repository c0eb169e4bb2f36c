"""
Line-delimited JSON result store.
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import numpy as np

from utils.errors import ConfigError

logger = logging.getLogger(__name__)

FLOAT_DIGITS = 12


def normalize(value: Any) -> Any:
    """
    Convert a record into plain JSON types with fixed float precision.

    Floats keep ``FLOAT_DIGITS`` significant digits; NaN and infinities become
    strings so the output stays valid JSON.
    """
    if isinstance(value, Enum):
        return normalize(value.value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{FLOAT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [normalize(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "to_record"):
        return normalize(value.to_record())
    return str(value)


def dumps(record: Dict) -> str:
    """Serialize one record with sorted keys."""
    return json.dumps(normalize(record), sort_keys=True, ensure_ascii=False)


class ResultStore:
    """Append-only JSONL file of experiment records."""

    def __init__(self, path: Union[str, Path]):
        """
        Initialize the store.

        Args:
            path: JSONL file; parent directories are created on first write
        """
        self.path = Path(path)

    def insert_many(self, records: Iterable[Dict]) -> int:
        """
        Append records to the store.

        Args:
            records: Records to append

        Returns:
            Number of records written
        """
        lines = [dumps(record) for record in records]
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as handle:
                for line in lines:
                    handle.write(line + "\n")
        except OSError as exc:
            raise ConfigError(f"Cannot write results to {self.path}: {exc}") from exc
        logger.debug("Wrote %d records to %s", len(lines), self.path)
        return len(lines)

    def insert_one(self, record: Dict) -> None:
        self.insert_many([record])

    def clear(self) -> None:
        """Delete every record."""
        if self.path.exists():
            self.path.unlink()

    def count(self) -> int:
        if not self.path.exists():
            return 0
        with open(self.path, "r", encoding="utf-8") as handle:
            return sum(1 for line in handle if line.strip())

    def read_all(self) -> List[Dict]:
        if not self.path.exists():
            return []
        with open(self.path, "r", encoding="utf-8") as handle:
            return [json.loads(line) for line in handle if line.strip()]
