"""
CSV ingestion and emission for the CLI.

Formats (UTF-8, comma separated, decimal point, no missing values):
  training     z1,...,zd,c,delta
  query        z1,...,zd            (other columns are ignored)
  predictions  z1,...,zd,prediction

Every file is written through write_frame_atomic: a temp file in the
target directory, then os.replace. Floats go out in numpy's shortest
round-trip representation, so reading a written value gives it back
exactly.
"""

import os
import re
import tempfile

import numpy as np
import pandas as pd

from csd_errors import DataError

_Z_COLUMN = re.compile(r'^z(\d+)$')
_DECIMAL = re.compile(r'[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?', re.ASCII)


def read_frame(path):
    """Every cell as a string; structural CSV errors become DataError."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError as e:
        raise DataError(f"no such file: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path} is empty (no header)") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"malformed CSV {path}: {e}") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def covariate_columns(frame, path='input'):
    """z1..zd in order; gaps or a missing z1 are errors."""
    indexed = sorted((int(m.group(1)), col) for col in frame.columns
                     if (m := _Z_COLUMN.match(col)))
    if not indexed:
        raise DataError(f"{path}: missing covariate columns z1..zd")
    expected = list(range(1, len(indexed) + 1))
    if [i for i, _ in indexed] != expected:
        raise DataError(f"{path}: covariate columns must be z1..z{len(indexed)} without gaps")
    return [col for _, col in indexed]


def parse_numeric(frame, column, path='input'):
    """Column as float64; the first bad cell is reported with its file line number."""
    values = np.empty(len(frame), dtype=float)
    for i, text in enumerate(frame[column].tolist()):
        cell = str(text).strip()
        if not _DECIMAL.fullmatch(cell):
            raise DataError(f"{path} line {i + 2}: column {column!r} value {text!r} is not a number")
        value = float(cell)
        if not np.isfinite(value):
            raise DataError(f"{path} line {i + 2}: column {column!r} value {text!r} is not finite")
        values[i] = value
    return values


def require_columns(frame, columns, path='input'):
    for col in columns:
        if col not in frame.columns:
            raise DataError(f"{path}: missing required column {col!r}")


def read_training_csv(path):
    """(Z, c, delta, z_columns) from a z1..zd,c,delta file."""
    frame = read_frame(path)
    zcols = covariate_columns(frame, path)
    require_columns(frame, ['c', 'delta'], path)
    Z = np.column_stack([parse_numeric(frame, col, path) for col in zcols]) if len(frame) else np.empty((0, len(zcols)))
    c = parse_numeric(frame, 'c', path)
    delta = parse_numeric(frame, 'delta', path)
    bad = np.flatnonzero(~np.isin(delta, (0.0, 1.0)))
    if bad.size:
        raise DataError(f"{path} line {bad[0] + 2}: delta must be 0 or 1, got {delta[bad[0]]!r}")
    if len(frame) == 0:
        raise DataError(f"{path}: no data rows")
    return Z, c, delta.astype(np.int8), zcols


def read_query_csv(path):
    """(Z, z_columns); a header-only file gives a (0, d) matrix."""
    frame = read_frame(path)
    zcols = covariate_columns(frame, path)
    if len(frame) == 0:
        return np.empty((0, len(zcols))), zcols
    return np.column_stack([parse_numeric(frame, col, path) for col in zcols]), zcols


def predictions_frame(Z, predictions, zcols):
    frame = pd.DataFrame(np.asarray(Z, dtype=float).reshape(-1, len(zcols)), columns=zcols)
    frame['prediction'] = np.asarray(predictions, dtype=float)
    return frame


def write_frame_atomic(frame, path):
    """Single-writer replace: write a sibling temp file, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix='.csd-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', newline='', encoding='utf-8') as fh:
            frame.to_csv(fh, index=False, lineterminator='\n')
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
