"""Two-way contingency tables: CSV ingestion, cleaning and flattening.

CSV layout: one table row per line, comma separated, whitespace ignored.
With ``header=True`` the first line holds column labels; with
``index=True`` the first field of every line is a row label (the header's
first field is then the corner label and is discarded).  Left at ``None``,
a header is assumed when the first line has a blank corner or a
non-numeric field after the first, and row labels when the first field of
the first data line is non-numeric.  Blank lines and lines starting with
``#`` are skipped.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Union

import numpy as np

from .corrections import CountVector

BUILTIN_TABLES = ("rivers", "sclerosis")


class TableFormatError(ValueError):
    """Malformed table input."""


class DegenerateTableError(ValueError):
    """Fewer than two rows or columns remain, so independence is untestable."""


@dataclass(frozen=True)
class ContingencyTable:
    cells: np.ndarray
    row_labels: tuple[str, ...] = field(default=())
    col_labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        cells = np.array(self.cells)
        if cells.ndim != 2:
            raise TableFormatError(f"table must be two-dimensional, got shape {cells.shape}")
        if cells.dtype.kind not in "iu":
            raise TableFormatError(f"cells must be integers, got dtype {cells.dtype}")
        cells = cells.astype(np.int64)
        if np.any(cells < 0):
            raise TableFormatError("cells must be nonnegative")
        if cells.sum() < 1:
            raise TableFormatError("table is empty (total count 0)")
        cells.flags.writeable = False
        I, J = cells.shape
        rows = tuple(self.row_labels) or tuple(f"r{i + 1}" for i in range(I))
        cols = tuple(self.col_labels) or tuple(f"c{j + 1}" for j in range(J))
        if len(rows) != I or len(cols) != J:
            raise TableFormatError(
                f"{len(rows)} row labels and {len(cols)} column labels for a {I}x{J} table"
            )
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    @property
    def n(self) -> int:
        return int(self.cells.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            np.array_equal(self.cells, other.cells)
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    __hash__ = None  # type: ignore[assignment]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_cell(text: str, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        try:
            as_float = float(text)
        except ValueError:
            raise TableFormatError(f"line {lineno}: {text!r} is not a number") from None
        if not as_float.is_integer():
            raise TableFormatError(f"line {lineno}: {text!r} is not an integer count") from None
        value = int(as_float)
    if value < 0:
        raise TableFormatError(f"line {lineno}: negative count {value}")
    return value


def parse_table(
    source: Union[str, IO[str]],
    fmt: str = "csv",
    *,
    header: bool | None = None,
    index: bool | None = None,
) -> ContingencyTable:
    """Parse a CSV table from a string or text stream."""
    if fmt != "csv":
        raise TableFormatError(f"unsupported table format {fmt!r}")
    stream = io.StringIO(source) if isinstance(source, str) else source
    lines = [
        (lineno, [f.strip() for f in row])
        for lineno, row in enumerate(csv.reader(stream), start=1)
        if row and any(f.strip() for f in row) and not row[0].lstrip().startswith("#")
    ]
    if not lines:
        raise TableFormatError("empty input")

    if header is None:
        first = lines[0][1]
        header = first[0] == "" or not all(_is_number(f) for f in first[1:])
    if index is None:
        data = lines[1:] if header else lines
        index = bool(data) and not _is_number(data[0][1][0])

    col_labels: tuple[str, ...] = ()
    if header:
        _, head = lines.pop(0)
        col_labels = tuple(head[1:] if index else head)
        if not lines:
            raise TableFormatError("header but no data rows")

    row_labels = []
    rows = []
    for lineno, fields in lines:
        if index:
            row_labels.append(fields[0])
            fields = fields[1:]
        rows.append([_parse_cell(f, lineno) for f in fields])
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise TableFormatError(f"ragged rows: widths {sorted(widths)}")
    if 0 in widths:
        raise TableFormatError("rows have no cells")
    return ContingencyTable(np.array(rows, dtype=np.int64), tuple(row_labels), col_labels)


def to_csv(table: ContingencyTable) -> str:
    """Serialise with header and row labels, readable by ``parse_table(header=True, index=True)``."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["", *table.col_labels])
    for label, row in zip(table.row_labels, table.cells):
        writer.writerow([label, *(int(v) for v in row)])
    return out.getvalue()


def remove_empty_margins(table: ContingencyTable) -> tuple[ContingencyTable, list[str]]:
    """Drop empty rows and columns until none remain.

    Returns the cleaned table and a log of removals such as ``"column H9/H9"``.
    """
    cells = table.cells
    rows = list(table.row_labels)
    cols = list(table.col_labels)
    log: list[str] = []
    while True:
        empty_rows = np.flatnonzero(cells.sum(axis=1) == 0)
        empty_cols = np.flatnonzero(cells.sum(axis=0) == 0)
        if empty_rows.size == 0 and empty_cols.size == 0:
            break
        log.extend(f"row {rows[i]}" for i in empty_rows)
        log.extend(f"column {cols[j]}" for j in empty_cols)
        keep_r = np.setdiff1d(np.arange(cells.shape[0]), empty_rows)
        keep_c = np.setdiff1d(np.arange(cells.shape[1]), empty_cols)
        cells = cells[np.ix_(keep_r, keep_c)]
        rows = [rows[i] for i in keep_r]
        cols = [cols[j] for j in keep_c]
    if cells.shape[0] < 2 or cells.shape[1] < 2:
        raise DegenerateTableError(
            f"only {cells.shape[0]}x{cells.shape[1]} remains after removing empty margins"
        )
    return ContingencyTable(cells, tuple(rows), tuple(cols)), log


def flatten(table: ContingencyTable) -> CountVector:
    """Row-major count vector of length ``I * J``."""
    return CountVector(table.cells.ravel())


def load_builtin(name: str) -> ContingencyTable:
    """One of the bundled example tables: ``"rivers"`` or ``"sclerosis"``."""
    if name not in BUILTIN_TABLES:
        raise KeyError(f"unknown builtin table {name!r}; choose from {BUILTIN_TABLES}")
    text = resources.files("sparsegof.data").joinpath(f"{name}.csv").read_text()
    return parse_table(text, header=True, index=True)
