"""
codedcomp Export

Plot-ready result files. CSV files open with `#` comment lines carrying the
schema version and the echoed run configuration, so every file records how
it was produced. Output never includes timestamps; identical runs write
identical bytes.
"""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

SCHEMA_VERSION = "1.0"
FLOAT_FORMAT = "%.10g"

PathLike = Union[str, Path]


def _plain(value: Any) -> Any:
    """JSON-safe copy of numpy scalars, arrays, enums and non-finite floats."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Path):
        return str(value)
    return value


def _cell(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple, dict, np.ndarray)):
        return json.dumps(_plain(value), sort_keys=True)
    return value


def header_lines(config: Mapping[str, Any], extra: Optional[Mapping[str, Any]] = None) -> List[str]:
    lines = [f"# schema_version: {json.dumps(SCHEMA_VERSION)}", f"# config: {json.dumps(_plain(dict(config)), sort_keys=True)}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}")
    return lines


def records_to_frame(records: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    frame = pd.DataFrame([{key: _cell(v) for key, v in r.items()} for r in records])
    if columns is not None:
        frame = frame.reindex(columns=list(columns))
    return frame


def render_csv(
    records: Sequence[Mapping[str, Any]],
    config: Mapping[str, Any],
    columns: Optional[Sequence[str]] = None,
    extra_header: Optional[Mapping[str, Any]] = None,
) -> str:
    """CSV text with the comment header."""
    frame = records_to_frame(records, columns)
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return "\n".join(header_lines(config, extra_header)) + "\n" + body


def render_json(payload: Mapping[str, Any], config: Mapping[str, Any]) -> str:
    document = {"schema_version": SCHEMA_VERSION, "config": _plain(dict(config)), **_plain(dict(payload))}
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
    logger.info(f"wrote {path}")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    """Load a result CSV, skipping the comment header."""
    return pd.read_csv(path, comment="#")


def read_header(path: PathLike) -> Dict[str, Any]:
    """Parse the `# key: json` header lines of a result CSV."""
    header: Dict[str, Any] = {}
    with open(path, "r") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            try:
                header[key] = json.loads(value)
            except json.JSONDecodeError:
                header[key] = value
    return header


def append_jsonl(path: PathLike, records: Iterable[Mapping[str, Any]]) -> int:
    """Append one JSON object per line; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    try:
        with open(path, "a") as f:
            for record in records:
                f.write(json.dumps(_plain(dict(record)), sort_keys=True) + "\n")
                count += 1
    except Exception as e:
        logger.error(f"Error writing records to {path}: {e}")
        raise
    return count
