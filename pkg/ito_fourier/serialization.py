"""
Output documents.

JSON artifacts are {"header": ..., "body": ...}; everything that varies
between identical runs (timestamp, version) lives in the header. CSV
artifacts carry the same header as '#'-prefixed lines above the rows.
Floats are written in their shortest round-trip form.
"""
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, TextIO, Union
import csv
import io
import json
import sys

import numpy as np

from .coefficients import CoefficientTable
from .exceptions import ContractError

PathLike = Union[str, Path]


def make_json_safe(obj: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and mappings to plain JSON types."""
    if isinstance(obj, dict):
        return {str(key): make_json_safe(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [make_json_safe(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return make_json_safe(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_json(header: Dict, body: Any) -> str:
    payload = make_json_safe({'header': header, 'body': body})
    return json.dumps(payload, indent=2) + "\n"


def dumps_csv(header: Dict, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    for key, value in header.items():
        buffer.write(f"# {key}: {json.dumps(make_json_safe(value))}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def write_text(text: str, path: Optional[PathLike] = None, stream: Optional[TextIO] = None) -> None:
    """Write to path, or to stream (stdout by default) when no path is given."""
    if path is None:
        (stream or sys.stdout).write(text)
        return
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        f.write(text)


def body_of(text: str) -> str:
    """The part of a JSON or CSV document that must be identical across reruns."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.dumps(json.loads(text)['body'], indent=2)
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def save_table(table: CoefficientTable, path: PathLike, header: Optional[Dict] = None) -> None:
    write_text(dumps_json(header or {}, table.to_dict()), path)


def load_table(path: PathLike) -> CoefficientTable:
    """Read a table written by save_table (or a bare table document)."""
    with Path(path).open(encoding="utf-8") as f:
        data = json.load(f)
    if 'body' in data:
        data = data['body']
    if 'entries' not in data:
        raise ContractError(f"{path} does not hold a coefficient table")
    return CoefficientTable.from_dict(data)
