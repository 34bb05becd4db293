"""
File formats for run records, sweep manifests, frontier tables and reports.

Run records are CSV with a fixed leading header (unknown columns appended
and preserved) or JSON lines. Floats are written with ``repr`` so every
double round-trips exactly.
"""

import csv
import io
import json
import logging
import math
import re
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Annotated, Any, Dict, Iterator, List, Optional, Sequence, Union

from pydantic import BaseModel, Field, TypeAdapter, ValidationError

from . import presets
from .config import CostSettings
from .cost_model import training_compute
from .exceptions import ConfigurationError, InputValidationError, RecordFormatError
from .models import DIMENSIONS, RunRecord, Shape
from .scaler import FrontierTable
from .sweeps import GridSweepSpec, StarSweepSpec, SweepSpec

logger = logging.getLogger(__name__)

RECORD_COLUMNS = (
    "width",
    "depth",
    "mlp_dim",
    "dimension_under_test",
    "examples_seen",
    "compute_gflops",
    "metric_name",
    "metric_value",
    "tag",
)
FRONTIER_COLUMNS = ("compute_gflops", "width", "depth", "mlp_dim", "params", "examples")
SIDECAR_SUFFIX = ".cost.json"

PathOrStream = Union[str, Path, IO[str]]

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([KkMmBbGgTtPp]?)\s*$")
_SUFFIXES = {"": 1.0, "K": 1e3, "M": 1e6, "B": 1e9, "G": 1e9, "T": 1e12, "P": 1e15}

_SWEEP_ADAPTER: TypeAdapter = TypeAdapter(
    Annotated[Union[StarSweepSpec, GridSweepSpec], Field(discriminator="kind")]
)


# ============================================================================
# Quantities
# ============================================================================

def parse_quantity(text: str) -> float:
    """
    Parse a number with optional scientific notation and magnitude suffix.

    ``9T`` is 9e12, ``600M`` and ``600e6`` are 6e8. Suffixes: K, M, B/G, T, P.
    """
    match = _QUANTITY.match(str(text))
    if not match:
        raise InputValidationError(f"cannot parse quantity {text!r}", invariant="number[K|M|B|G|T|P]")
    number, suffix = match.groups()
    return float(number) * _SUFFIXES[suffix.upper()]


def parse_count(text: str) -> int:
    value = parse_quantity(text)
    if value != int(value) or value < 0:
        raise InputValidationError(f"{text!r} is not a non-negative integer count", invariant="integral count")
    return int(value)


def parse_quantity_list(text: str) -> List[float]:
    return [parse_quantity(part) for part in text.split(",") if part.strip()]


def format_float(value: float) -> str:
    return repr(float(value))


# ============================================================================
# Streams
# ============================================================================

@contextmanager
def _open_text(target: PathOrStream, mode: str) -> Iterator[IO[str]]:
    if isinstance(target, (str, Path)):
        if str(target) == "-":
            yield sys.stdout if "w" in mode else sys.stdin
            return
        with open(target, mode, encoding="utf-8", newline="") as handle:
            yield handle
    else:
        yield target


def _source_name(target: PathOrStream) -> Optional[str]:
    if isinstance(target, (str, Path)):
        return str(target)
    return getattr(target, "name", None)


def _is_jsonl(target: PathOrStream, fmt: Optional[str]) -> bool:
    if fmt is not None:
        if fmt not in ("csv", "jsonl"):
            raise InputValidationError(f"unknown record format {fmt!r}", invariant="format in {csv, jsonl}")
        return fmt == "jsonl"
    name = _source_name(target) or ""
    return name.endswith(".jsonl")


# ============================================================================
# Run records
# ============================================================================

def load_cost_context(path: Union[str, Path]) -> Optional[CostSettings]:
    """Cost settings from the ``<stem>.cost.json`` sidecar next to ``path``, if present."""
    path = Path(path)
    sidecar = path.with_name(path.stem + SIDECAR_SUFFIX)
    if not sidecar.exists():
        return None
    try:
        return CostSettings.model_validate_json(sidecar.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigurationError(f"Invalid cost sidecar: {e}", config_path=str(sidecar)) from e


def _cell(row: Dict[str, Any], name: str) -> Optional[str]:
    value = row.get(name)
    if value is None:
        return None
    text = str(value).strip()
    return text or None


def _integer(row: Dict[str, Any], name: str) -> Optional[int]:
    text = _cell(row, name)
    if text is None:
        return None
    value = float(text)
    if not math.isfinite(value) or value != int(value):
        raise ValueError(f"{name} must be an integer, got {text!r}")
    return int(value)


def _row_to_record(row: Dict[str, Any], cost: Optional[CostSettings]) -> RunRecord:
    for name in ("width", "depth", "mlp_dim", "metric_name", "metric_value"):
        if _cell(row, name) is None:
            raise ValueError(f"missing required column {name}")
    shape = Shape(**{name: _integer(row, name) for name in DIMENSIONS})

    metric_value = float(_cell(row, "metric_value"))
    if not (metric_value > 0 and math.isfinite(metric_value)):
        raise ValueError(f"metric_value must be finite and > 0, got {metric_value!r}")

    examples = _integer(row, "examples_seen")
    compute_text = _cell(row, "compute_gflops")
    if compute_text is not None:
        compute = float(compute_text)
    elif examples is not None and cost is not None:
        compute = training_compute(cost.config_for(shape), examples, cost.flops_multiplier)
    else:
        raise ValueError(
            "compute_gflops is missing and cannot be derived without examples_seen and a cost context"
        )
    if not (compute > 0 and math.isfinite(compute)):
        raise ValueError(f"compute_gflops must be finite and > 0, got {compute!r}")

    extra = {str(key): value for key, value in row.items() if key not in RECORD_COLUMNS}
    return RunRecord(
        shape=shape,
        compute=compute,
        metric_name=_cell(row, "metric_name"),
        metric_value=metric_value,
        dimension_under_test=_cell(row, "dimension_under_test"),
        examples_seen=examples,
        tag=_cell(row, "tag"),
        extra=extra,
    )


_ROW_INVARIANTS = {
    "metric_value": "metric_value > 0",
    "compute_gflops": "compute_gflops > 0",
    "width": "width >= 1",
    "depth": "depth >= 1",
    "mlp_dim": "mlp_dim >= 1",
    "examples_seen": "examples_seen >= 0",
    "dimension_under_test": "dimension_under_test in (width, depth, mlp_dim)",
}


def _invariant_of(error: Exception) -> Optional[str]:
    text = str(error)
    for name, invariant in _ROW_INVARIANTS.items():
        if name in text:
            return invariant
    return None


def parse_records(
    source: PathOrStream,
    cost: Optional[CostSettings] = None,
    fmt: Optional[str] = None,
    default_cost: Optional[CostSettings] = None,
) -> List[RunRecord]:
    """
    Read run records from CSV or JSON lines.

    Missing ``compute_gflops`` is derived from ``examples_seen`` using
    ``cost``, else the file's cost sidecar, else ``default_cost``.

    Raises:
        RecordFormatError: On the first invalid row, naming file and line.
    """
    name = _source_name(source)
    if cost is None and isinstance(source, (str, Path)) and str(source) != "-":
        cost = load_cost_context(source)
    if cost is None:
        cost = default_cost
    jsonl = _is_jsonl(source, fmt)

    records: List[RunRecord] = []
    with _open_text(source, "r") as handle:
        if jsonl:
            rows = ((number, line) for number, line in enumerate(handle, start=1) if line.strip())
            for number, line in rows:
                try:
                    row = json.loads(line)
                    if not isinstance(row, dict):
                        raise ValueError("each line must be a JSON object")
                    records.append(_row_to_record(row, cost))
                except (ValueError, ValidationError) as e:
                    raise RecordFormatError(str(e), path=name, line=number, invariant=_invariant_of(e)) from e
        else:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                return records
            for row in reader:
                try:
                    if None in row:
                        raise ValueError("row has more cells than the header")
                    records.append(_row_to_record(row, cost))
                except (ValueError, ValidationError) as e:
                    raise RecordFormatError(
                        str(e), path=name, line=reader.line_num, invariant=_invariant_of(e)
                    ) from e
    logger.debug("Parsed %d records from %s", len(records), name or "<stream>")
    return records


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return format_float(value)
    return json.dumps(value)


def _record_row(record: RunRecord) -> Dict[str, str]:
    row = {
        "width": str(record.shape.width),
        "depth": str(record.shape.depth),
        "mlp_dim": str(record.shape.mlp_dim),
        "dimension_under_test": record.dimension_under_test or "",
        "examples_seen": "" if record.examples_seen is None else str(record.examples_seen),
        "compute_gflops": format_float(record.compute),
        "metric_name": record.metric_name,
        "metric_value": format_float(record.metric_value),
        "tag": record.tag or "",
    }
    row.update({key: _csv_cell(value) for key, value in record.extra.items()})
    return row


def _extra_columns(records: Sequence[RunRecord]) -> List[str]:
    columns: List[str] = []
    for record in records:
        for key in record.extra:
            if key not in columns:
                columns.append(key)
    return columns


def emit_records(
    records: Sequence[RunRecord], target: PathOrStream, fmt: Optional[str] = None
) -> None:
    """Write run records as CSV (default) or JSON lines."""
    jsonl = _is_jsonl(target, fmt)
    with _open_text(target, "w") as handle:
        if jsonl:
            for record in records:
                row: Dict[str, Any] = {
                    "width": record.shape.width,
                    "depth": record.shape.depth,
                    "mlp_dim": record.shape.mlp_dim,
                    "dimension_under_test": record.dimension_under_test,
                    "examples_seen": record.examples_seen,
                    "compute_gflops": record.compute,
                    "metric_name": record.metric_name,
                    "metric_value": record.metric_value,
                    "tag": record.tag,
                }
                row.update(record.extra)
                handle.write(json.dumps(row) + "\n")
        else:
            writer = csv.DictWriter(
                handle, fieldnames=list(RECORD_COLUMNS) + _extra_columns(records),
                restval="", lineterminator="\n",
            )
            writer.writeheader()
            for record in records:
                writer.writerow(_record_row(record))


def records_to_text(records: Sequence[RunRecord], fmt: str = "csv") -> str:
    buffer = io.StringIO()
    emit_records(records, buffer, fmt=fmt)
    return buffer.getvalue()


# ============================================================================
# Sweep manifests
# ============================================================================

def manifest_dict(spec: SweepSpec) -> Dict[str, Any]:
    """Run manifest: the design plus one entry per training run."""
    return {
        "design": spec.model_dump(mode="json"),
        "total_runs": spec.total_runs,
        "estimated_compute_gflops": spec.estimated_compute,
        "runs": [
            {
                "shape": run.shape.as_dict(),
                "dimension_under_test": run.dimension_under_test,
                "examples": run.examples,
            }
            for run in spec.runs()
        ],
        "notes": [presets.TUNING_NOTE],
    }


def write_manifest(spec: SweepSpec, target: PathOrStream) -> None:
    write_json(manifest_dict(spec), target)


def load_design(source: PathOrStream) -> SweepSpec:
    """
    Read a sweep design from a manifest or a bare design document.

    Raises:
        InputValidationError: If the document is not a valid design.
    """
    with _open_text(source, "r") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise InputValidationError(f"{_source_name(source)}: invalid JSON: {e}", invariant="valid JSON") from e
    if isinstance(data, dict) and "design" in data:
        data = data["design"]
    try:
        return _SWEEP_ADAPTER.validate_python(data)
    except ValidationError as e:
        raise InputValidationError(
            f"{_source_name(source)}: invalid sweep design: {e}", invariant="valid sweep design"
        ) from e


# ============================================================================
# Reports and tables
# ============================================================================

def write_json(payload: Union[BaseModel, Dict[str, Any], List[Any]], target: PathOrStream) -> None:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    with _open_text(target, "w") as handle:
        handle.write(json.dumps(payload, indent=2) + "\n")


def emit_frontier(table: FrontierTable, target: PathOrStream, fmt: str = "csv") -> None:
    """Write a frontier table as CSV (one row per compute value) or JSON."""
    if fmt == "json":
        write_json(table, target)
        return
    with _open_text(target, "w") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FRONTIER_COLUMNS)
        for row in table.rows:
            writer.writerow(
                [format_float(row.compute_gflops), row.width, row.depth, row.mlp_dim, row.params, row.examples]
            )


def read_text(source: PathOrStream) -> str:
    with _open_text(source, "r") as handle:
        return handle.read()


def write_text(text: str, target: PathOrStream) -> None:
    with _open_text(target, "w") as handle:
        handle.write(text)


__all__ = [
    "RECORD_COLUMNS",
    "FRONTIER_COLUMNS",
    "emit_frontier",
    "emit_records",
    "format_float",
    "load_cost_context",
    "load_design",
    "manifest_dict",
    "parse_count",
    "parse_quantity",
    "parse_quantity_list",
    "parse_records",
    "read_text",
    "records_to_text",
    "write_json",
    "write_manifest",
    "write_text",
]
