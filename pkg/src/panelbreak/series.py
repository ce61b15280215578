"""Dated multi-series tables: CSV ingestion and preprocessing."""

from __future__ import annotations

import csv
import fnmatch
import logging
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from panelbreak.errors import InvalidInput, ParseError
from panelbreak.panel import PanelData

__all__ = [
    "SeriesTable",
    "NA_MARKERS",
    "read_csv",
    "monthly_last",
    "first_difference",
    "drop_missing",
    "select_columns",
]

log = logging.getLogger(__name__)

NA_MARKERS = ("", "NA", "N/A", "NaN", "nan", "null", ".", "#N/A")


@dataclass(frozen=True)
class SeriesTable:
    """Named series sharing a date index; missing cells are NaN.

    ``dates`` is ``None`` for undated tables, otherwise strictly increasing.
    """

    columns: tuple[str, ...]
    values: NDArray[np.float64]
    dates: tuple[date, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != len(self.columns):
            raise InvalidInput(f"values shape {v.shape} does not match {len(self.columns)} columns")
        if self.dates is not None:
            if len(self.dates) != v.shape[0]:
                raise InvalidInput("dates and values differ in length")
            if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
                raise InvalidInput("dates must be strictly increasing")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def labels(self) -> list[str]:
        if self.dates is None:
            return [str(i + 1) for i in range(len(self))]
        return [d.isoformat() for d in self.dates]

    def rows(self, start: int, stop: int) -> "SeriesTable":
        dates = None if self.dates is None else self.dates[start:stop]
        return SeriesTable(self.columns, self.values[start:stop], dates)

    def to_panel(self) -> PanelData:
        if self.has_missing:
            raise InvalidInput("table has missing values; drop or fill them first")
        return PanelData(self.values, None if self.dates is None else list(self.dates))


def _parse_date(text: str, line: int) -> date:
    s = text.strip()
    try:
        if len(s) == 7:  # YYYY-MM
            s += "-01"
        elif len(s) > 10 and s[10] in "T ":
            s = s[:10]
        return date.fromisoformat(s)
    except ValueError:
        raise ParseError(f"unparseable date {text!r}", line) from None


def read_csv(
    path: str | Path,
    delimiter: str = ",",
    date_column: int | str | None = 0,
    na_markers: Sequence[str] = NA_MARKERS,
    skip_rows: int = 0,
) -> SeriesTable:
    """Read a header-first CSV file into a :class:`SeriesTable`.

    Parameters
    ----------
    path : str or Path
        UTF-8 file; LF and CRLF line endings are both accepted.
    delimiter : str
        Field separator. Decimal separator is always ``.``.
    date_column : int, str or None
        Position or header name of the ISO-8601 date column, or ``None`` for
        an undated table where every column is numeric.
    na_markers : sequence of str
        Cell contents (after stripping) treated as missing.
    skip_rows : int
        Lines to skip before the header, e.g. notes preceding the data.

    Raises
    ------
    ParseError
        Ragged rows, non-numeric cells, unparseable, duplicate or decreasing
        dates. The message carries the offending line number.
    """
    na = {m.strip() for m in na_markers}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for _ in range(skip_rows):
            next(reader, None)
        header = next(reader, None)
        if not header or all(not h.strip() for h in header):
            raise ParseError("missing header row", reader.line_num or 1)
        header = [h.strip() for h in header]
        if date_column is None:
            dcol = None
        elif isinstance(date_column, str):
            if date_column not in header:
                raise ParseError(f"date column {date_column!r} not in header", reader.line_num)
            dcol = header.index(date_column)
        else:
            dcol = int(date_column)
            if not 0 <= dcol < len(header):
                raise ParseError(f"date column index {dcol} out of range", reader.line_num)
        names = [h for j, h in enumerate(header) if j != dcol]
        dates: list[date] = []
        rows: list[list[float]] = []
        for rec in reader:
            line = reader.line_num
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(rec)}", line)
            row = []
            for j, cell in enumerate(rec):
                if j == dcol:
                    d = _parse_date(cell, line)
                    if dates and d == dates[-1]:
                        raise ParseError(f"duplicate date {d.isoformat()}", line)
                    if dates and d < dates[-1]:
                        raise ParseError(f"date {d.isoformat()} precedes {dates[-1].isoformat()}", line)
                    dates.append(d)
                    continue
                c = cell.strip()
                if c in na:
                    row.append(math.nan)
                    continue
                try:
                    val = float(c)
                except ValueError:
                    raise ParseError(f"non-numeric value {cell!r} in column {header[j]!r}", line) from None
                if not math.isfinite(val):
                    val = math.nan
                row.append(val)
            rows.append(row)
    values = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return SeriesTable(tuple(names), values, tuple(dates) if dcol is not None else None)


def select_columns(t: SeriesTable, patterns: Sequence[str]) -> SeriesTable:
    """Keep the columns matching any of the shell-style ``patterns``, in file order."""
    keep = [j for j, c in enumerate(t.columns) if any(fnmatch.fnmatchcase(c, p) for p in patterns)]
    if not keep:
        raise InvalidInput(f"no columns match {list(patterns)}")
    return SeriesTable(tuple(t.columns[j] for j in keep), t.values[:, keep], t.dates)


def monthly_last(t: SeriesTable) -> SeriesTable:
    """Keep the last available row of every calendar month."""
    if t.dates is None:
        raise InvalidInput("monthly subsampling needs a date column")
    keep = [i for i in range(len(t))
            if i == len(t) - 1 or (t.dates[i].year, t.dates[i].month) != (t.dates[i + 1].year, t.dates[i + 1].month)]
    return SeriesTable(t.columns, t.values[keep], tuple(t.dates[i] for i in keep))


def drop_missing(t: SeriesTable) -> tuple[SeriesTable, int]:
    """Drop rows with any missing cell; returns the table and the number dropped."""
    bad = np.isnan(t.values).any(axis=1)
    n_bad = int(bad.sum())
    if n_bad:
        log.warning("dropping %d row(s) with missing values", n_bad)
        keep = np.flatnonzero(~bad)
        dates = None if t.dates is None else tuple(t.dates[i] for i in keep)
        t = SeriesTable(t.columns, t.values[keep], dates)
    return t, n_bad


def first_difference(t: SeriesTable) -> SeriesTable:
    """Row ``t`` of the result is ``X[t+1] - X[t]``, labelled with the later date."""
    if len(t) < 2:
        raise InvalidInput("differencing needs at least 2 rows")
    if t.has_missing:
        raise InvalidInput("cannot difference a table with missing values")
    dates = None if t.dates is None else t.dates[1:]
    return SeriesTable(t.columns, np.diff(t.values, axis=0), dates)
