"""
CSV Ingestion and Output

Delimited numeric text with a missing-value token. A cell is missing when it is empty
or equals the token; every other cell must parse as a finite number. Values are
written with repr() so a write/read round trip reproduces them exactly.
"""

import math
import re
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd

from kmmeans.data_model import MaskedDataset
from kmmeans.errors import EmptyFile, ParseError, RaggedRows

_RAGGED = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


class CsvTable(NamedTuple):
    dataset: MaskedDataset
    columns: List[str]


def _parse_cell(cell, missing_token: str, row: int, col: int) -> Optional[float]:
    if not isinstance(cell, str):
        return None
    token = cell.strip()
    if token == "" or token == missing_token:
        return None
    try:
        value = float(token)
    except ValueError:
        raise ParseError(row, col, token)
    if not math.isfinite(value):
        raise ParseError(row, col, token)
    return value


def read_csv(
    path: Union[str, Path],
    missing_token: str = "NA",
    has_header: bool = True,
    delimiter: str = ",",
) -> CsvTable:
    """
    Read a numeric CSV into a MaskedDataset

    Row and column numbers in errors are 1-based data positions (header excluded).
    """
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=0 if has_header else None,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError:
        raise EmptyFile(str(path))
    except pd.errors.ParserError as e:
        match = _RAGGED.search(str(e))
        if match:
            expected, line, found = (int(g) for g in match.groups())
            raise RaggedRows(line - (1 if has_header else 0), expected, found)
        raise ParseError(-1, -1, str(e))

    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise EmptyFile(str(path))

    if has_header:
        columns = [str(c).strip() for c in frame.columns]
    else:
        columns = [f"x{j + 1}" for j in range(frame.shape[1])]

    n, p = frame.shape
    values = np.zeros((n, p), dtype=np.float64)
    mask = np.zeros((n, p), dtype=bool)
    for i, row in enumerate(frame.itertuples(index=False, name=None)):
        for j, cell in enumerate(row):
            value = _parse_cell(cell, missing_token, i + 1, j + 1)
            if value is not None:
                values[i, j] = value
                mask[i, j] = True
    return CsvTable(MaskedDataset(values, mask, columns), columns)


def format_matrix(values: np.ndarray, mask: np.ndarray, missing_token: str = "NA") -> List[List[str]]:
    return [
        [repr(float(v)) if m else missing_token for v, m in zip(row, row_mask)]
        for row, row_mask in zip(values, mask)
    ]


def write_matrix(
    path: Union[str, Path],
    values: np.ndarray,
    mask: np.ndarray,
    columns: Sequence[str],
    missing_token: str = "NA",
    has_header: bool = True,
    delimiter: str = ",",
) -> None:
    frame = pd.DataFrame(format_matrix(values, mask, missing_token), columns=list(columns))
    frame.to_csv(path, index=False, header=has_header, sep=delimiter, lineterminator="\n")


def write_csv(
    path: Union[str, Path],
    ds: MaskedDataset,
    columns: Optional[Sequence[str]] = None,
    missing_token: str = "NA",
    has_header: bool = True,
    delimiter: str = ",",
) -> None:
    """Write a MaskedDataset; unobserved cells become the missing token."""
    columns = list(columns or ds.column_names or [f"x{j + 1}" for j in range(ds.p)])
    write_matrix(path, ds.filled, ds.mask, columns, missing_token, has_header, delimiter)


def write_assignments(path: Union[str, Path], labels: np.ndarray) -> None:
    """row_id and cluster, both 1-based."""
    frame = pd.DataFrame({"row_id": np.arange(1, labels.size + 1), "cluster": labels + 1})
    frame.to_csv(path, index=False, lineterminator="\n")


def read_labels(path: Union[str, Path]) -> np.ndarray:
    """Label column of a CSV: 'cluster' or 'label' when present, else the last column."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise EmptyFile(str(path))
    if frame.shape[0] == 0:
        raise EmptyFile(str(path))
    for name in ("cluster", "label"):
        if name in frame.columns:
            return frame[name].str.strip().to_numpy()
    return frame.iloc[:, -1].str.strip().to_numpy()
