"""
Artifact Writers

Renders experiment rows as CSV or JSON with a provenance header. Nothing
host- or time-dependent is written, so identical configs give identical
bytes.
"""
import csv
import io
import json
import math
from typing import Iterable, List, Optional

import numpy as np

from trotterlab.common.errors import NumericalError


def _cell(value) -> str:
    """Formats one CSV cell; floats use the shortest round-trip decimal"""
    if value is None:
        return ""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"), default=_plain)
    return str(value)


def _plain(value):
    """json default for numpy scalars and complex numbers"""
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not serializable")


def _columns(rows: List[dict]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def render_csv(provenance: dict, rows: Iterable[dict]) -> str:
    """Provenance comment lines, a header row and RFC 4180 records with CRLF endings"""
    rows = list(rows)
    buffer = io.StringIO(newline="")
    for key in ("version", "command", "seed", "config_sha256"):
        buffer.write(f"# {key}: {provenance[key]}\r\n")
    writer = csv.writer(buffer, lineterminator="\r\n")
    columns = _columns(rows)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(provenance: dict, rows: Iterable[dict], extra: Optional[dict] = None) -> str:
    """{"provenance": ..., "rows": [...]} plus command specific keys, sorted and indented"""
    document = dict(extra or {})
    document["provenance"] = provenance
    document["rows"] = list(rows)
    try:
        text = json.dumps(document, sort_keys=True, indent=2, default=_plain, allow_nan=False)
    except ValueError as error:
        raise NumericalError(f"Artifact holds a non-finite value: {error}") from error
    return text + "\n"


def render(fmt: str, provenance: dict, rows: Iterable[dict], extra: Optional[dict] = None) -> str:
    """Renders rows in the requested format"""
    rows = list(rows)
    for row in rows:
        for key, value in row.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise NumericalError(f"Column {key} holds the non-finite value {value!r}")
    if fmt == "json":
        return render_json(provenance, rows, extra)
    return render_csv(provenance, rows)


def write_artifact(text: str, out: Optional[str], stream) -> None:
    """Writes to the --out path, or to stream when no path is given"""
    if out is None:
        stream.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
