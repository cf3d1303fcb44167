"""
Report serialization for Blochop
Canonical JSON, config hashing, atomic file writes and CSV export
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from .settings import VERSION

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["term", "level", "eps", "nested_sup", "band_sup", "argmax_re", "argmax_im"]


def to_plain(value: Any) -> Any:
    """Numpy scalars, complex numbers and non-finite floats as JSON-safe values"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [to_plain(float(value.real)), to_plain(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def canonical_json(payload: Any) -> str:
    return json.dumps(to_plain(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config: Dict[str, Any]) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def build_report(command: str, config: Dict[str, Any], seed: int, results: Dict[str, Any],
                 wall_clock: Optional[float] = None) -> Dict[str, Any]:
    report = {
        "command": command,
        "version": VERSION,
        "config_hash": config_hash(config),
        "seed": seed,
        "results": results,
    }
    if wall_clock is not None:
        report["wall_clock_s"] = wall_clock
    return report


def write_atomic(path: str, text: str) -> None:
    """Write to a temp file next to the target, then rename over it"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".blochop-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"Wrote {path}")


def csv_text(rows: Iterable[List[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(["" if v is None else v for v in to_plain(row)])
    return buffer.getvalue()


def emit(report: Dict[str, Any], out: Optional[str] = None) -> str:
    """Serialize the report; write it to out when given, return the text either way"""
    text = canonical_json(report)
    if out:
        write_atomic(out, text)
    return text
