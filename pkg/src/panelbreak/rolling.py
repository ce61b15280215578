"""Rolling-window break tests over a dated table."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Literal

import numpy as np

from panelbreak.breaktest import run_test
from panelbreak.errors import InvalidInput, PanelBreakError
from panelbreak.lrv import KernelKind
from panelbreak.series import SeriesTable, drop_missing, first_difference, monthly_last

__all__ = [
    "RollingResult",
    "rolling_test",
    "yield_curve_pipeline",
    "emit_results",
    "read_results",
]


@dataclass(frozen=True)
class RollingResult:
    """Test outcome for the window ending at ``window_end``.

    A failed window has NaN ``statistic`` and ``p_value`` and a message in
    ``error``.
    """

    window_end: str
    statistic: float
    p_value: float
    window_len: int
    error: str = ""


_COLUMNS = tuple(f.name for f in fields(RollingResult))


def _one_window(values: np.ndarray, label: str, epsilon: float, kernel: str, k: int,
                diff: bool) -> RollingResult:
    n_rows = values.shape[0]
    try:
        x = np.diff(values, axis=0) if diff else values
        res = run_test(x, epsilon=epsilon, kernel=kernel, k=k, keep_intermediates=False)
        return RollingResult(label, res.statistic, res.p_value, n_rows)
    except PanelBreakError as exc:
        return RollingResult(label, math.nan, math.nan, n_rows, f"{type(exc).__name__}: {exc}")


def rolling_test(
    t: SeriesTable,
    window: int = 120,
    epsilon: float = 0.05,
    kernel: KernelKind = "parzen",
    k: int = 1,
    *,
    diff_within: bool = False,
    workers: int = 1,
) -> list[RollingResult]:
    """Run :func:`~panelbreak.breaktest.run_test` on every block of ``window`` consecutive rows.

    Blocks advance one row at a time, so there are ``len(t) - window + 1``
    results, labelled by the last row of each block. ``diff_within`` first
    differences each block separately instead of expecting a pre-differenced
    table. A failing window is recorded and the run continues.
    """
    if t.has_missing:
        raise InvalidInput("table has missing values; drop them before rolling")
    if not 1 <= window <= len(t):
        raise InvalidInput(f"window must lie in [1, {len(t)}], got {window}")
    labels = t.labels()
    jobs = [(t.values[end - window:end], labels[end - 1]) for end in range(window, len(t) + 1)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_one_window, v, lab, epsilon, kernel, k, diff_within) for v, lab in jobs]
            return [f.result() for f in futures]
    return [_one_window(v, lab, epsilon, kernel, k, diff_within) for v, lab in jobs]


def yield_curve_pipeline(
    t: SeriesTable,
    window: int = 120,
    epsilon: float = 0.05,
    kernel: KernelKind = "parzen",
    *,
    monthly: bool = True,
    diff: bool = True,
    diff_within: bool = False,
    workers: int = 1,
) -> list[RollingResult]:
    """Month-end subsampling, first differencing, then rolling tests.

    Rows still containing missing values after subsampling are dropped (with
    a logged warning) before differencing.
    """
    if monthly:
        t = monthly_last(t)
    t, _ = drop_missing(t)
    if diff and not diff_within:
        t = first_difference(t)
    return rolling_test(t, window, epsilon, kernel, diff_within=diff and diff_within, workers=workers)


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def emit_results(results: Iterable[RollingResult], format: Literal["csv", "json"] = "csv") -> str:
    """Serialize with columns ``window_end, statistic, p_value, window_len, error``."""
    results = list(results)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_COLUMNS)
        for r in results:
            w.writerow([_fmt(getattr(r, c)) for c in _COLUMNS])
        return buf.getvalue()
    if format == "json":
        return json.dumps([asdict(r) for r in results], indent=1) + "\n"
    raise InvalidInput(f"unknown format {format!r}")


def read_results(text: str, format: Literal["csv", "json"] = "csv") -> list[RollingResult]:
    if format == "json":
        return [RollingResult(**d) for d in json.loads(text)]
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(RollingResult(row["window_end"], float(row["statistic"]), float(row["p_value"]),
                                 int(row["window_len"]), row.get("error", "")))
    return out
