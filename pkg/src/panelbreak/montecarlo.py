"""Monte Carlo size and power experiments.

A cell is one point of the parameter grid (``N``, ``T`` and optionally a
break size). Each replication of a cell draws its own seed from
``(master_seed, cell id, replication index)``, so results do not depend on
the number of workers or the order in which cells run. The same panels are
reused for every trimming fraction and nominal level of a cell.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from panelbreak.breaktest import kolmogorov_isf, sup_statistics
from panelbreak.errors import InvalidInput, PanelBreakError
from panelbreak.simulate import DgpSpec, generate

__all__ = [
    "McConfig",
    "McResult",
    "McError",
    "replication_seed",
    "run_experiment",
    "run_size_table",
    "run_power_curve",
    "emit_table",
    "read_table",
    "SWEEP_ALIASES",
    "BREAK_GRID",
]

log = logging.getLogger(__name__)

BREAK_GRID = tuple(np.round(np.arange(0.0, 4.01, 0.5), 10))

SWEEP_ALIASES = {
    "N": "n_len",
    "n": "n_len",
    "n_len": "n_len",
    "T": "t_len",
    "t": "t_len",
    "t_len": "t_len",
    "delta": "delta",
    "big_delta": "big_delta",
    "Delta": "big_delta",
    "rho": "ar_coeff",
    "ar_coeff": "ar_coeff",
    "theta": "theta",
}
_INT_PARAMS = {"n_len", "t_len"}


class McError(PanelBreakError):
    """A replication failed; the whole cell is abandoned."""


@dataclass(frozen=True)
class McConfig:
    """A Monte Carlo experiment.

    ``sweep`` maps :class:`DgpSpec` field names (``n_len``, ``t_len``,
    ``delta``, ``big_delta``, ...) to the values to grid over; the Cartesian
    product of all entries defines the cells.
    """

    dgp: DgpSpec
    reps: int = 1000
    levels: tuple[float, ...] = (0.10, 0.05, 0.01)
    epsilons: tuple[float, ...] = (0.05, 0.10)
    sweep: dict[str, tuple] = field(default_factory=dict)
    workers: int = 1
    master_seed: int = 0
    kernel: str = "parzen"

    def __post_init__(self):
        if self.reps < 1:
            raise InvalidInput("reps must be >= 1")
        if not all(0 < a < 1 for a in self.levels):
            raise InvalidInput("levels must lie in (0, 1)")
        if not all(0 <= e < 1 for e in self.epsilons):
            raise InvalidInput("epsilons must lie in [0, 1)")
        sweep = {}
        for key, values in self.sweep.items():
            name = SWEEP_ALIASES.get(key, key)
            if name not in {f.name for f in fields(DgpSpec)} or name in ("kind", "seed"):
                raise InvalidInput(f"cannot sweep over {key!r}")
            cast = int if name in _INT_PARAMS else float
            sweep[name] = tuple(cast(v) for v in values)
        object.__setattr__(self, "sweep", sweep)
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))

    def cells(self) -> list[DgpSpec]:
        names = list(self.sweep)
        combos = itertools.product(*(self.sweep[k] for k in names)) if names else [()]
        return [self.dgp.with_(**dict(zip(names, combo))) for combo in combos]


@dataclass(frozen=True)
class McResult:
    kind: str
    n_len: int
    t_len: int
    epsilon: float
    level: float
    sweep_param: str
    sweep_value: float
    rejections: int
    reps: int
    rejection_rate: float
    mc_stderr: float


COLUMNS = tuple(f.name for f in fields(McResult))


def _cell_id(spec: DgpSpec) -> str:
    d = asdict(spec)
    d.pop("seed")
    return json.dumps(d, sort_keys=True)


def replication_seed(master_seed: int, cell: DgpSpec | str, rep: int) -> int:
    """64-bit seed for replication ``rep`` of ``cell``."""
    cid = cell if isinstance(cell, str) else _cell_id(cell)
    digest = hashlib.blake2b(cid.encode(), digest_size=8).digest()
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & ((1 << 64) - 1),
        spawn_key=(int.from_bytes(digest, "little"), int(rep)),
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _run_chunk(spec: DgpSpec, master_seed: int, reps: Sequence[int],
               epsilons: tuple[float, ...], kernel: str) -> np.ndarray:
    cid = _cell_id(spec)
    out = np.empty((len(reps), len(epsilons)))
    for j, r in enumerate(reps):
        rep_spec = spec.with_(seed=replication_seed(master_seed, cid, r))
        try:
            out[j] = sup_statistics(generate(rep_spec), epsilons, kernel)
        except PanelBreakError as exc:
            raise McError(f"cell {cid} replication {r}: {exc}") from exc
    return out


def _cell_stats(cfg: McConfig, spec: DgpSpec, pool: ProcessPoolExecutor | None) -> np.ndarray:
    reps = list(range(cfg.reps))
    if pool is None:
        return _run_chunk(spec, cfg.master_seed, reps, cfg.epsilons, cfg.kernel)
    n_chunks = min(len(reps), 4 * cfg.workers)
    chunks = [c.tolist() for c in np.array_split(reps, n_chunks)]
    futures = [pool.submit(_run_chunk, spec, cfg.master_seed, c, cfg.epsilons, cfg.kernel)
               for c in chunks]
    return np.concatenate([f.result() for f in futures], axis=0)


def _summarize(cfg: McConfig, spec: DgpSpec, stats: np.ndarray) -> list[McResult]:
    sweep_param = next((k for k in cfg.sweep if k not in ("n_len", "t_len")), "")
    sweep_value = float(getattr(spec, sweep_param)) if sweep_param else math.nan
    out = []
    for e_idx, eps in enumerate(cfg.epsilons):
        for level in cfg.levels:
            crit = kolmogorov_isf(level)
            hits = int(np.count_nonzero(stats[:, e_idx] > crit))
            rate = hits / cfg.reps
            out.append(McResult(
                kind=spec.kind, n_len=spec.n_len, t_len=spec.t_len, epsilon=eps,
                level=level, sweep_param=sweep_param, sweep_value=sweep_value,
                rejections=hits, reps=cfg.reps, rejection_rate=rate,
                mc_stderr=math.sqrt(rate * (1.0 - rate) / cfg.reps),
            ))
    return out


def _load_checkpoint(path: Path) -> dict[str, list[McResult]]:
    done = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                done[rec["cell"]] = [McResult(**r) for r in rec["results"]]
    return done


def run_experiment(cfg: McConfig, checkpoint: str | Path | None = None) -> list[McResult]:
    """Run every cell of ``cfg`` and return one result per (cell, epsilon, level).

    With ``checkpoint``, each finished cell is appended to that JSON-lines
    file and cells already recorded there are not recomputed.
    """
    ckpt = Path(checkpoint) if checkpoint is not None else None
    done = _load_checkpoint(ckpt) if ckpt else {}
    results: list[McResult] = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for spec in cfg.cells():
            key = json.dumps({"cell": _cell_id(spec), "seed": cfg.master_seed, "reps": cfg.reps,
                              "eps": cfg.epsilons, "levels": cfg.levels, "kernel": cfg.kernel},
                             sort_keys=True)
            if key in done:
                results.extend(done[key])
                continue
            log.info("cell %s: %d replications", _cell_id(spec), cfg.reps)
            cell = _summarize(cfg, spec, _cell_stats(cfg, spec, pool))
            results.extend(cell)
            if ckpt:
                with ckpt.open("a") as fh:
                    fh.write(json.dumps({"cell": key, "results": [asdict(r) for r in cell]}) + "\n")
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def run_size_table(cfg: McConfig, checkpoint: str | Path | None = None) -> list[McResult]:
    if cfg.dgp.kind not in ("IID", "AR1"):
        raise InvalidInput(f"size experiments need a null DGP (IID or AR1), got {cfg.dgp.kind}")
    return run_experiment(cfg, checkpoint)


def run_power_curve(cfg: McConfig, checkpoint: str | Path | None = None) -> list[McResult]:
    """Empirical power over a break-size grid (0 to 4 by 0.5 unless swept explicitly)."""
    if cfg.dgp.kind not in ("MB", "LB"):
        raise InvalidInput(f"power experiments need MB or LB, got {cfg.dgp.kind}")
    param = "delta" if cfg.dgp.kind == "MB" else "big_delta"
    if param not in cfg.sweep:
        sweep = dict(cfg.sweep)
        sweep[param] = BREAK_GRID
        cfg = McConfig(**{**asdict_shallow(cfg), "sweep": sweep})
    return run_experiment(cfg, checkpoint)


def asdict_shallow(cfg: McConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def _fmt_pct(rate: float) -> str:
    s = f"{100.0 * rate:.1f}"
    return s[1:] if s.startswith("0.") else s


def _markdown(results: Sequence[McResult]) -> str:
    # rows: (N, T[, sweep value]); columns: (DGP, epsilon, level), as in the size table
    def row_key(r):
        # NaN (no sweep) never compares equal, so key it as None
        return r.n_len, r.t_len, None if math.isnan(r.sweep_value) else r.sweep_value

    col_keys = list(dict.fromkeys((r.kind, r.epsilon, r.level) for r in results))
    row_keys = list(dict.fromkeys(row_key(r) for r in results))
    sweep_param = next((r.sweep_param for r in results if r.sweep_param), "")
    lookup = {(row_key(r), (r.kind, r.epsilon, r.level)): r for r in results}
    head = ["N", "T"] + ([sweep_param] if sweep_param else [])
    dgp_row = [""] * len(head) + [k for k, _, _ in col_keys]
    eps_row = [""] * len(head) + [f"eps={e:g}" for _, e, _ in col_keys]
    lvl_row = head + [f"{100 * a:g}%" for _, _, a in col_keys]
    lines = ["| " + " | ".join(dgp_row) + " |",
             "|" + "---|" * len(dgp_row),
             "| " + " | ".join(eps_row) + " |",
             "| " + " | ".join(lvl_row) + " |"]
    prev_n = None
    for rk in row_keys:
        n, t, sv = rk
        cells = [str(n) if n != prev_n else "", str(t)] + ([f"{sv:g}"] if sweep_param else [])
        prev_n = n
        for ck in col_keys:
            r = lookup.get((rk, ck))
            cells.append(_fmt_pct(r.rejection_rate) if r else "")
        lines.append("| " + " | ".join(cells) + " |")
    if not results:
        lines = ["| N | T |", "|---|---|"]
    return "\n".join(lines) + "\n"


def emit_table(results: Iterable[McResult], format: Literal["csv", "json", "markdown"] = "csv") -> str:
    """Serialize results; csv and json use the fixed column order of :class:`McResult`."""
    results = list(results)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in results:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(r, c) for c in COLUMNS)])
        return buf.getvalue()
    if format == "json":
        return json.dumps([{c: getattr(r, c) for c in COLUMNS} for r in results], indent=1) + "\n"
    if format == "markdown":
        return _markdown(results)
    raise InvalidInput(f"unknown format {format!r}")


def read_table(text: str, format: Literal["csv", "json"] = "csv") -> list[McResult]:
    if format == "json":
        return [McResult(**d) for d in json.loads(text)]
    if format != "csv":
        raise InvalidInput(f"cannot read format {format!r}")
    types = {f.name: f.type for f in fields(McResult)}
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        kw = {}
        for k, v in row.items():
            t = types[k]
            kw[k] = int(v) if t == "int" else float(v) if t == "float" else v
        out.append(McResult(**kw))
    return out
