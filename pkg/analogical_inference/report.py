"""Structured (json) and tabular (csv) report documents.

Exact rationals are written as ``{"num", "den", "decimal"}``. Run-dependent
values (the generation timestamp and wall times) live outside the report
body, so identical runs produce identical bodies.
"""
import dataclasses
import json
import logging
import math
import sys
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .errors import OutputError, UsageError

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")
VOLATILE_FIELDS = ("wall_time",)


def to_plain(value: Any) -> Any:
    """Converts report objects into json-compatible values; non-finite floats become None."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return to_plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if value is None or isinstance(value, (bool, str, int, float)):
        return value
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator, "decimal": float(value)}
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if hasattr(value, "to_dict"):
        return to_plain(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        doc = {f.name: to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
        for name in dir(type(value)):
            if not name.startswith("_") and isinstance(getattr(type(value), name), property):
                doc[name] = to_plain(getattr(value, name))
        return doc
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    raise UsageError(f"cannot serialize a {type(value).__name__} into a report")


def _split_volatile(body: Any, timing: Dict[str, Any], prefix: str = "") -> Any:
    if isinstance(body, dict):
        kept = {}
        for key, value in body.items():
            if key in VOLATILE_FIELDS:
                timing[prefix + key] = value
            else:
                kept[key] = value
        return kept
    if isinstance(body, list):
        return [_split_volatile(v, timing, f"{prefix}{i}.") for i, v in enumerate(body)]
    return body


def _is_empty(report: Any) -> bool:
    return report is None or (isinstance(report, (list, tuple, dict)) and len(report) == 0)


def to_document(report: Any, command: Optional[str] = None) -> Dict[str, Any]:
    if _is_empty(report):
        raise UsageError("refusing to write an empty report")
    timing: Dict[str, Any] = {}
    body = _split_volatile(to_plain(report), timing)
    return {
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "timing": timing,
        "report": body,
    }


def _flatten(doc: Any, prefix: str = "") -> Dict[str, Any]:
    row: Dict[str, Any] = {}
    if isinstance(doc, dict) and set(doc) == {"num", "den", "decimal"}:
        row[prefix.rstrip(".")] = doc["decimal"]
        row[prefix + "num"] = doc["num"]
        row[prefix + "den"] = doc["den"]
    elif isinstance(doc, dict):
        for key, value in doc.items():
            row.update(_flatten(value, f"{prefix}{key}."))
    elif isinstance(doc, list):
        row[prefix.rstrip(".")] = json.dumps(doc)
    else:
        row[prefix.rstrip(".")] = doc
    return row


def table_rows(report: Any) -> List[Dict[str, Any]]:
    """Flat rows for plotting: one per list item, or the ``rows`` of a dict report."""
    if _is_empty(report):
        raise UsageError("refusing to write an empty report")
    body = _split_volatile(to_plain(report), {})
    if isinstance(body, dict) and isinstance(body.get("rows"), list):
        body = body["rows"]
    items = body if isinstance(body, list) else [body]
    return [_flatten(item) for item in items]


def write_report(report: Any, path: Optional[str] = None, fmt: str = "json", command: Optional[str] = None):
    """Writes a report as a json document or a csv table; ``path=None`` writes to stdout.

    Raises:
        UsageError: empty report or unknown format.
        OutputError: the file cannot be written.
    """
    if fmt not in FORMATS:
        raise UsageError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    if fmt == "json":
        text = json.dumps(to_document(report, command), indent=2, sort_keys=True, allow_nan=False) + "\n"
    else:
        text = pd.DataFrame(table_rows(report)).to_csv(index=False)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        raise OutputError(f"cannot write report to {path}: {err}")
    logger.info(f"wrote {fmt} report to {path}")
