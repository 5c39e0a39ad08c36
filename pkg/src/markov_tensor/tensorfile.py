"""Tensor and trace file formats.

Tensor files are JSON documents holding the slices P(:, :, k) row by row, so a
file can be checked by eye against printed tables. Floats are written with
``repr`` (shortest round-trip form), so reading a written file reproduces the
entries exactly.

Trace files are CSV with a block of ``# key: value`` header lines.
"""

from __future__ import annotations
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from markov_tensor.engine.types import TransitionTensor
from markov_tensor.engine.tensor_core import validate
from markov_tensor.engine.solvers import IterationTrace
from markov_tensor.engine.errors import TensorFileError

FORMAT_NAME = "markov-transition-tensor"
FORMAT_VERSION = 1
DEFAULT_FILE_TOLERANCE = 1e-9
LAYOUT = "slices[k][i][j] = p_ijk"

TRACE_COLUMNS = ("k", "residual_l1", "fixed_point_residual_l1", "error_l1", "observed_ratio", "bound")
MARKOV_EXTRA_COLUMNS = ("step_bound", "z_error_l1", "z_bound")

PathLike = Union[str, Path]


@dataclass
class TensorFile:
    """Parsed contents of a tensor file; ``slices[k][i][j]`` is p_ijk."""
    n: int
    slices: List[List[List[float]]]
    tolerance: float = DEFAULT_FILE_TOLERANCE
    name: Optional[str] = None
    source: Optional[str] = None

    def entries(self) -> np.ndarray:
        return np.stack([np.asarray(s, dtype=float) for s in self.slices], axis=2)


def tensor_to_file(P: TransitionTensor, name: Optional[str] = None, source: Optional[str] = None,
                   tolerance: Optional[float] = None) -> TensorFile:
    slices = [[[float(v) for v in row] for row in s] for s in P.slices_by_last_index()]
    if tolerance is None:
        tolerance = max(P.validation_tolerance, DEFAULT_FILE_TOLERANCE)
    return TensorFile(P.n, slices, tolerance, name, source)


def to_tensor(tf: TensorFile, tol: Optional[float] = None) -> TransitionTensor:
    """Validate the file contents; tol overrides the tolerance the file declares."""
    return validate(tf.entries(), tf.tolerance if tol is None else tol)


def format_tensor_file(tf: TensorFile) -> str:
    """
    Serialize to JSON with one matrix row per line.

    Args:
        tf: tensor file contents

    Returns:
        JSON text ending in a newline
    """
    header: Dict[str, Any] = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if tf.name is not None:
        header["name"] = tf.name
    if tf.source is not None:
        header["source"] = tf.source
    header.update({"n": tf.n, "tolerance": tf.tolerance, "layout": LAYOUT})

    lines = ["{"]
    for key, value in header.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(value)},")
    lines.append('  "slices": [')
    for k, s in enumerate(tf.slices):
        rows = ",\n     ".join(json.dumps([float(v) for v in row]) for row in s)
        comma = "," if k < len(tf.slices) - 1 else ""
        lines.append(f"    [{rows}]{comma}")
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_tensor_file(path: PathLike, tf: TensorFile) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_tensor_file(tf), encoding="utf-8")
    return path


def _number(value: Any, path: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TensorFileError(path, f"{where} is not a number: {value!r}")
    return float(value)


def parse_tensor_file(text: str, path: str = "<string>") -> TensorFile:
    """
    Parse tensor file text.

    Raises:
        TensorFileError: malformed JSON, missing keys or inconsistent shapes
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TensorFileError(path, f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise TensorFileError(path, "top level must be an object")
    if doc.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise TensorFileError(path, f"unknown format {doc.get('format')!r}")
    for key in ("n", "slices"):
        if key not in doc:
            raise TensorFileError(path, f"missing key {key!r}")

    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise TensorFileError(path, f"'n' must be a positive integer, got {n!r}")
    tol = _number(doc.get("tolerance", DEFAULT_FILE_TOLERANCE), path, "'tolerance'")
    if tol < 0:
        raise TensorFileError(path, f"'tolerance' must be nonnegative, got {tol!r}")

    raw = doc["slices"]
    if not isinstance(raw, list) or len(raw) != n:
        raise TensorFileError(path, f"'slices' must hold {n} matrices")
    slices = []
    for k, s in enumerate(raw):
        if not isinstance(s, list) or len(s) != n:
            raise TensorFileError(path, f"slices[{k}] must hold {n} rows")
        rows = []
        for i, row in enumerate(s):
            if not isinstance(row, list) or len(row) != n:
                raise TensorFileError(path, f"slices[{k}][{i}] must hold {n} entries")
            rows.append([_number(v, path, f"slices[{k}][{i}][{j}]") for j, v in enumerate(row)])
        slices.append(rows)

    name = doc.get("name")
    source = doc.get("source")
    return TensorFile(n, slices, tol, None if name is None else str(name),
                      None if source is None else str(source))


def read_tensor_file(path: PathLike) -> TensorFile:
    """Read a tensor file; FileNotFoundError propagates unchanged."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise TensorFileError(str(path), "not UTF-8 text") from exc
    return parse_tensor_file(text, str(path))


# --- traces ---

@dataclass
class TraceFile:
    """Header metadata plus one row per iteration; empty cells read back as None."""
    header: Dict[str, str] = field(default_factory=dict)
    columns: List[str] = field(default_factory=list)
    rows: List[List[Optional[float]]] = field(default_factory=list)

    def column(self, name: str) -> List[Optional[float]]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _cell(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trace_table(trace: IterationTrace) -> TraceFile:
    """Tabulate an iteration trace with the standard columns."""
    columns = list(TRACE_COLUMNS)
    markov = trace.method.value == "markov"
    if markov:
        columns += MARKOV_EXTRA_COLUMNS
    rows = []
    for step in trace.steps:
        row = [step.k, step.residual, step.fixed_point_residual, step.error,
               step.observed_ratio, step.bound]
        if markov:
            row += [step.step_bound, step.z_error, step.z_bound]
        rows.append(row)
    header = {
        "method": trace.method.value,
        "converged": str(trace.converged).lower(),
        "iterations": str(trace.iterations_used),
        "delta": repr(trace.delta),
        "bounds_available": str(trace.bounds_available).lower(),
    }
    if trace.bound_applies_to:
        header["bound_applies_to"] = trace.bound_applies_to
    if trace.anchor is not None:
        header["bound_anchor"] = str(trace.anchor)
    if trace.note:
        header["note"] = trace.note
    return TraceFile(header, columns, rows)


def format_table(table: TraceFile) -> str:
    buf = io.StringIO()
    for key, value in table.header.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_table(path: PathLike, table: TraceFile) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_table(table), encoding="utf-8")
    return path


def write_trace(path: PathLike, trace: IterationTrace, **header: Any) -> Path:
    """Write a trace; extra keyword arguments go into the header block."""
    table = trace_table(trace)
    table.header.update({k: str(v) for k, v in header.items() if v is not None})
    return write_table(path, table)


def _parse_cell(text: str, path: str, line: int) -> Optional[float]:
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise TensorFileError(path, f"line {line}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise TensorFileError(path, f"line {line}: non-finite value {text!r}")
    return value


def parse_trace(text: str, path: str = "<string>") -> TraceFile:
    """
    Parse trace CSV text.

    Raises:
        TensorFileError: missing column row, ragged rows, non-numeric cells or
            k not strictly increasing
    """
    header: Dict[str, str] = {}
    body: List[str] = []
    first_body_line = 1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#") and not body:
            key, sep, value = line[1:].partition(":")
            if not sep:
                raise TensorFileError(path, f"line {lineno}: header line without ':'")
            header[key.strip()] = value.strip()
            first_body_line = lineno + 1
        elif line.strip():
            body.append(line)
    if not body:
        raise TensorFileError(path, "no column row")

    reader = csv.reader(body)
    columns = next(reader)
    if not columns or columns[0] != "k":
        raise TensorFileError(path, "first column must be 'k'")
    rows: List[List[Optional[float]]] = []
    for offset, cells in enumerate(reader, start=1):
        line = first_body_line + offset
        if len(cells) != len(columns):
            raise TensorFileError(path, f"line {line}: expected {len(columns)} cells, got {len(cells)}")
        row = [_parse_cell(c, path, line) for c in cells]
        if row[0] is None:
            raise TensorFileError(path, f"line {line}: empty k")
        if rows and row[0] <= rows[-1][0]:
            raise TensorFileError(path, f"line {line}: k = {row[0]:g} is not increasing")
        rows.append(row)
    return TraceFile(header, columns, rows)


def read_trace(path: PathLike) -> TraceFile:
    path = Path(path)
    return parse_trace(path.read_text(encoding="utf-8"), str(path))


def wide_table(columns: Sequence[str], series: Sequence[Sequence[Optional[float]]],
               header: Optional[Dict[str, Any]] = None) -> TraceFile:
    """
    Lay out series of different lengths side by side, k = 1.. down the rows.

    Shorter series leave trailing cells empty.
    """
    length = max((len(s) for s in series), default=0)
    rows = []
    for k in range(length):
        rows.append([k + 1] + [s[k] if k < len(s) else None for s in series])
    return TraceFile({k: str(v) for k, v in (header or {}).items()}, ["k", *columns], rows)
