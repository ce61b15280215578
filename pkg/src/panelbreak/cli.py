"""Command-line interface: ``panelbreak {test,roll,mc,sim}``.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from panelbreak.breaktest import kolmogorov_isf, run_test
from panelbreak.errors import InvalidInput, NumericalFailure, ParseError
from panelbreak.montecarlo import BREAK_GRID, McConfig, emit_table, run_experiment
from panelbreak.rolling import emit_results, yield_curve_pipeline
from panelbreak.series import (
    SeriesTable,
    drop_missing,
    first_difference,
    monthly_last,
    read_csv,
    select_columns,
)
from panelbreak.simulate import DgpSpec, dgp_from_config, generate

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("panelbreak")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _grid_values(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        return list(np.round(np.arange(lo, hi + step / 2, step), 10))
    return _floats(text)


def _parse_grid(items: list[str]) -> dict[str, list[float]]:
    grid = {}
    for item in items:
        for part in item.split(";"):
            if not part.strip():
                continue
            if "=" not in part:
                raise InvalidInput(f"bad --grid entry {part!r}; expected key=v1,v2 or key=lo:hi:step")
            key, values = part.split("=", 1)
            grid[key.strip()] = _grid_values(values)
    return grid


def _add_input_opts(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, type=Path, help="CSV file with a header row")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--skip-rows", type=int, default=0, help="lines to skip before the header")
    p.add_argument("--columns", help="comma-separated column names or shell patterns to keep")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--kernel", choices=("parzen", "bartlett"), default="parzen")
    p.add_argument("--k", type=int, default=1, help="number of leading eigenvalues to test")
    p.add_argument("--monthly-last", action="store_true", help="keep the last row of each month")
    p.add_argument("--diff", action="store_true", help="first-difference every series")
    p.add_argument("--out", type=Path, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--seed", type=int, default=0, help="accepted for interface symmetry; tests are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="panelbreak", description="Eigenvalue-based structural break tests for panel data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="test a single panel")
    _add_input_opts(p)
    p.add_argument("--window", type=int, help="use only the last WINDOW rows")
    p.add_argument("--levels", default="0.10,0.05,0.01", help="levels for critical-value decisions")

    p = sub.add_parser("roll", help="rolling-window tests over a dated panel")
    _add_input_opts(p)
    p.add_argument("--window", type=int, default=120)
    p.add_argument("--diff-within", action="store_true",
                   help="difference inside each window instead of before windowing")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(format="csv")

    p = sub.add_parser("mc", help="Monte Carlo size / power experiment")
    p.add_argument("--dgp", choices=("IID", "AR1", "MB", "LB"), default="IID", type=str.upper)
    p.add_argument("--N", type=int, default=10, dest="n_len")
    p.add_argument("--T", type=int, default=200, dest="t_len")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--grid", action="append", default=[],
                   help="sweep, e.g. 'N=10,20,50;T=50,100,200' or 'delta=0:4:0.5'")
    p.add_argument("--epsilon", default="0.05,0.10", help="comma-separated trimming fractions")
    p.add_argument("--levels", default=None, help="comma-separated nominal levels")
    p.add_argument("--kernel", choices=("parzen", "bartlett"), default="parzen")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint", type=Path, help="JSON-lines file for resumable runs")
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="csv")

    p = sub.add_parser("sim", help="write one simulated panel as CSV")
    p.add_argument("--config", type=Path, help="key = value DGP description")
    p.add_argument("--dgp", choices=("IID", "AR1", "MB", "LB"), type=str.upper)
    p.add_argument("--N", type=int, dest="n_len")
    p.add_argument("--T", type=int, dest="t_len")
    p.add_argument("--rho", type=float, dest="ar_coeff")
    p.add_argument("--delta", type=float)
    p.add_argument("--big-delta", type=float, dest="big_delta")
    p.add_argument("--theta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path)
    return parser


def _write(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _load(args, dated: bool) -> SeriesTable:
    date_col = 0 if dated else _sniff_date_column(args.input, args.delimiter, args.skip_rows)
    t = read_csv(args.input, delimiter=args.delimiter, date_column=date_col, skip_rows=args.skip_rows)
    if args.columns:
        t = select_columns(t, [c.strip() for c in args.columns.split(",")])
    return t


def _sniff_date_column(path: Path, delimiter: str, skip_rows: int) -> int | None:
    import csv
    from datetime import date

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for _ in range(skip_rows + 1):
            next(reader, None)
        first = next(reader, None)
    if not first:
        return None
    try:
        date.fromisoformat(first[0].strip()[:10])
        return 0
    except ValueError:
        return None


def _cmd_test(args) -> int:
    t = _load(args, dated=args.monthly_last)
    if args.monthly_last:
        t = monthly_last(t)
    t, dropped = drop_missing(t)
    if args.diff:
        t = first_difference(t)
    if args.window:
        t = t.rows(max(0, len(t) - args.window), len(t))
    res = run_test(t.to_panel(), epsilon=args.epsilon, kernel=args.kernel, k=args.k)
    levels = _floats(args.levels)
    summary = {
        "statistic": res.statistic,
        "p_value": res.p_value,
        "epsilon": res.epsilon,
        "kernel": args.kernel,
        "bandwidth": res.bandwidth,
        "break_index": res.break_index,
        "break_label": t.labels()[res.break_index - 1],
        "t_len": len(t),
        "n_len": len(t.columns),
        "rows_dropped": dropped,
        "k_tracked": res.k_tracked,
        "statistics": res.statistics.tolist(),
        "p_values": res.p_values.tolist(),
        "critical_values": {f"{a:g}": kolmogorov_isf(a) for a in levels},
        "reject": {f"{a:g}": bool(res.statistic > kolmogorov_isf(a)) for a in levels},
    }
    if args.format == "json":
        text = json.dumps(summary, indent=1) + "\n"
    else:
        keys = [k for k, v in summary.items() if not isinstance(v, (list, dict))]
        text = ",".join(keys) + "\n" + ",".join(
            repr(summary[k]) if isinstance(summary[k], float) else str(summary[k]) for k in keys) + "\n"
    _write(text, args.out)
    return EXIT_OK


def _cmd_roll(args) -> int:
    t = _load(args, dated=True)
    results = yield_curve_pipeline(t, window=args.window, epsilon=args.epsilon, kernel=args.kernel,
                                   monthly=args.monthly_last, diff=args.diff,
                                   diff_within=args.diff_within, workers=args.workers)
    failed = [r for r in results if r.error]
    for r in failed:
        log.warning("window ending %s failed: %s", r.window_end, r.error)
    _write(emit_results(results, args.format), args.out)
    return EXIT_OK


def _cmd_mc(args) -> int:
    kind = args.dgp
    sweep = _parse_grid(args.grid)
    if kind in ("MB", "LB") and not ({"delta", "big_delta", "Delta"} & set(sweep)):
        sweep["delta" if kind == "MB" else "big_delta"] = list(BREAK_GRID)
    if args.levels is None:
        levels = (0.05,) if kind in ("MB", "LB") else (0.10, 0.05, 0.01)
    else:
        levels = tuple(_floats(args.levels))
    cfg = McConfig(
        dgp=DgpSpec(kind, args.t_len, args.n_len),
        reps=args.reps,
        levels=levels,
        epsilons=tuple(_floats(args.epsilon)),
        sweep=sweep,
        workers=args.workers,
        master_seed=args.seed,
        kernel=args.kernel,
    )
    _write(emit_table(run_experiment(cfg, args.checkpoint), args.format), args.out)
    return EXIT_OK


def _cmd_sim(args) -> int:
    spec = dgp_from_config(args.config.read_text()) if args.config else DgpSpec()
    overrides = {k: getattr(args, k) for k in
                 ("ar_coeff", "delta", "big_delta", "theta", "seed", "n_len", "t_len")
                 if getattr(args, k) is not None}
    if args.dgp:
        overrides["kind"] = args.dgp
    spec = DgpSpec(**{**spec.__dict__, **overrides})
    x = generate(spec).values
    lines = [",".join(f"x{i + 1}" for i in range(x.shape[1]))]
    lines += [",".join(repr(float(v)) for v in row) for row in x]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {"test": _cmd_test, "roll": _cmd_roll, "mc": _cmd_mc, "sim": _cmd_sim}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"panelbreak: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailure as exc:
        print(f"panelbreak: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInput, OSError) as exc:
        print(f"panelbreak: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
