"""Reading and writing labeled datasets as delimiter-separated text with a header row."""
import logging
import math
import re
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from .core import FiniteMeasure
from .errors import DomainError, InputError, OutputError
from .regression import LabeledDataset

logger = logging.getLogger(__name__)

DELIMITERS = (",", "\t", ";")


def detect_delimiter(header: str) -> str:
    """Picks the most frequent of comma, tab and semicolon in the header line."""
    best = max(DELIMITERS, key=header.count)
    return best if header.count(best) else ","


def _read_table(path, delimiter: Optional[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    if not header.strip():
        raise InputError("missing header row", line=1)
    sep = delimiter or detect_delimiter(header)
    # header read as a data row: the tokenizer then rejects rows with more fields than it
    try:
        raw = pd.read_csv(path, sep=sep, header=None, dtype=str, keep_default_na=False, engine="c")
    except (pd.errors.ParserError, UnicodeDecodeError, ValueError) as err:
        found = re.search(r"line (\d+)", str(err))
        raise InputError(f"{path}: {err}", line=int(found.group(1)) if found else None)
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = [str(c).strip() for c in raw.iloc[0].tolist()]
    if len(frame) == 0:
        raise InputError(f"{path}: no data rows")
    logger.debug(f"read {len(frame)} rows x {len(frame.columns)} columns from {path} (sep={sep!r})")
    return frame


def _column_values(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = np.empty(len(frame))
    for i, cell in enumerate(frame[column].tolist()):
        row, line = i + 1, i + 2
        if cell is None or (isinstance(cell, float) and math.isnan(cell)) or str(cell).strip() == "":
            raise DomainError(f"row {row} (line {line}), column {column!r}: missing value")
        try:
            value = float(str(cell).strip())
        except ValueError:
            raise InputError(f"not a number: {cell!r}", line=line, column=column)
        if math.isnan(value) or value < 0:
            raise DomainError(f"row {row} (line {line}), column {column!r}: value {value} is not a nonnegative number")
        values[i] = value
    return values


def _coordinate_columns(frame: pd.DataFrame, exclude) -> List[str]:
    columns = [c for c in frame.columns if c not in exclude]
    if not columns:
        raise InputError("no coordinate columns", line=1)
    return columns


def load_dataset(path, label_column: str = "y", weight_column: Optional[str] = "weight",
                 delimiter: Optional[str] = None) -> LabeledDataset:
    """Loads a labeled dataset.

    Every column other than the label and weight columns is a coordinate,
    in header order. Without a weight column the measure is uniform.

    Raises:
        InputError: unreadable file, missing columns or non-numeric cells.
        DomainError: negative, NaN or missing values, or weights not summing to 1.
    """
    frame = _read_table(path, delimiter)
    if label_column not in frame.columns:
        raise InputError(f"label column {label_column!r} not found in {list(frame.columns)}", line=1)
    columns = _coordinate_columns(frame, {label_column, weight_column})
    points = np.column_stack([_column_values(frame, c) for c in columns])
    labels = _column_values(frame, label_column)
    measure = None
    if weight_column is not None and weight_column in frame.columns:
        measure = FiniteMeasure(points, _column_values(frame, weight_column))
    return LabeledDataset(points, labels, measure, tuple(columns), label_column)


def load_points(path, label_column: str = "y", weight_column: Optional[str] = "weight",
                delimiter: Optional[str] = None) -> Tuple[np.ndarray, List[str]]:
    """Loads query points, ignoring label and weight columns if present."""
    frame = _read_table(path, delimiter)
    columns = _coordinate_columns(frame, {label_column, weight_column})
    return np.column_stack([_column_values(frame, c) for c in columns]), columns


def write_dataset(dataset: LabeledDataset, path, delimiter: str = ",", weight_column: Optional[str] = None):
    """Writes a dataset so that :func:`load_dataset` reads it back bit-exactly."""
    frame = pd.DataFrame({c: dataset.points[:, j] for j, c in enumerate(dataset.columns)})
    frame[dataset.label_name] = dataset.labels
    if weight_column is not None:
        frame[weight_column] = dataset.measure.weights
    try:
        frame.to_csv(path, sep=delimiter, index=False, float_format="%.17g")
    except OSError as err:
        raise OutputError(f"cannot write {path}: {err}")
