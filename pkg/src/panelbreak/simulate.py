"""Data-generating processes for size and power experiments.

Every random quantity is read from its own counter-based stream keyed by
``(seed, stream id)``, and the ``j``-th value of a stream depends only on
``j``. Cross-section ``i`` therefore sees the same loading, scale and error
path whatever ``N`` is, and the common factor never depends on ``N``.
Normals come from the inverse normal CDF applied to 53-bit uniforms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.signal import lfilter
from scipy.special import ndtri

from panelbreak.errors import InvalidInput
from panelbreak.panel import PanelData

__all__ = [
    "DgpKind",
    "DgpSpec",
    "SimDraw",
    "uniform_stream",
    "normal_stream",
    "simulate",
    "gen_null",
    "gen_mean_break",
    "gen_loading_break",
    "generate",
    "dgp_to_config",
    "dgp_from_config",
]

DgpKind = Literal["IID", "AR1", "MB", "LB"]
_KINDS = ("IID", "AR1", "MB", "LB")

_MASK64 = (1 << 64) - 1

# stream ids; idiosyncratic error of cross-section i uses _ERR_BASE + i
_FACTOR = 0
_LOADING = 1
_SCALE = 2
_MEAN_SHIFT = 3
_LOADING_SHIFT = 4
_ERR_BASE = 1 << 16


def uniform_stream(seed: int, stream: int, n: int) -> NDArray[np.float64]:
    """First ``n`` uniforms in ``(0, 1)`` of substream ``stream`` under ``seed``."""
    key = ((int(stream) & _MASK64) << 64) | (int(seed) & _MASK64)
    raw = np.random.Philox(key=key).random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normal_stream(seed: int, stream: int, n: int) -> NDArray[np.float64]:
    return ndtri(uniform_stream(seed, stream, n))


@dataclass(frozen=True)
class DgpSpec:
    """Declarative description of one simulated panel.

    ``unit_variance`` rescales the AR(1) paths to unit stationary variance;
    by default the innovations have unit variance instead.
    """

    kind: DgpKind = "IID"
    t_len: int = 200
    n_len: int = 10
    ar_coeff: float = 0.5
    delta: float = 0.0
    big_delta: float = 0.0
    theta: float = 0.5
    seed: int = 0
    unit_variance: bool = False

    def __post_init__(self):
        kind = str(self.kind).upper().replace("-", "")
        if kind not in _KINDS:
            raise InvalidInput(f"unknown DGP kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.t_len < 2 or self.n_len < 1:
            raise InvalidInput("need T >= 2 and N >= 1")
        if not abs(self.ar_coeff) < 1:
            raise InvalidInput("|ar_coeff| must be < 1")
        if self.delta < 0 or self.big_delta < 0:
            raise InvalidInput("break sizes must be non-negative")
        if not 0 < self.theta < 1:
            raise InvalidInput("theta must lie in (0, 1)")

    @property
    def break_row(self) -> int:
        """1-based first post-break row, ``floor(T * theta)`` (at least 1)."""
        return max(1, int(math.floor(self.t_len * self.theta)))

    def with_(self, **changes) -> "DgpSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class SimDraw:
    panel: PanelData
    factor: NDArray[np.float64]
    errors: NDArray[np.float64]
    loadings: NDArray[np.float64]
    scales: NDArray[np.float64]
    mean_shifts: NDArray[np.float64]
    loading_shifts: NDArray[np.float64]


def _ar1(z: NDArray[np.float64], rho: float, unit_variance: bool) -> NDArray[np.float64]:
    # z[0] seeds the stationary initial state, z[1:] are the innovations
    y0 = z[:1] / math.sqrt(1.0 - rho * rho)
    rest = lfilter([1.0], [1.0, -rho], z[1:], axis=0, zi=rho * y0)[0]
    y = np.concatenate([y0, rest], axis=0)
    if unit_variance:
        y *= math.sqrt(1.0 - rho * rho)
    return y


def simulate(spec: DgpSpec) -> SimDraw:
    """Draw one panel together with the latent components that built it."""
    t_len, n, seed = spec.t_len, spec.n_len, spec.seed
    loadings = normal_stream(seed, _LOADING, n)
    scales = 0.8 + 0.4 * uniform_stream(seed, _SCALE, n)
    z = np.empty((t_len, n + 1))
    z[:, 0] = normal_stream(seed, _FACTOR, t_len)
    for i in range(n):
        z[:, i + 1] = normal_stream(seed, _ERR_BASE + i, t_len)
    if spec.kind != "IID":
        z = _ar1(z, spec.ar_coeff, spec.unit_variance)
    factor = z[:, 0]
    errors = z[:, 1:] * scales

    mean_shifts = np.zeros(n)
    loading_shifts = np.zeros(n)
    post = np.arange(1, t_len + 1) >= spec.break_row
    if spec.kind == "LB":
        loading_shifts = spec.big_delta * normal_stream(seed, _LOADING_SHIFT, n)
        load = loadings + np.outer(post, loading_shifts)
        x = load * factor[:, None] + errors
    else:
        x = factor[:, None] * loadings + errors
    if spec.kind == "MB":
        mean_shifts = spec.delta * (2.0 * uniform_stream(seed, _MEAN_SHIFT, n) - 1.0)
        x = x + np.outer(post, mean_shifts)
    return SimDraw(PanelData(x), factor, errors, loadings, scales, mean_shifts, loading_shifts)


def gen_null(spec: DgpSpec) -> PanelData:
    if spec.kind not in ("IID", "AR1"):
        raise InvalidInput(f"gen_null expects IID or AR1, got {spec.kind}")
    return simulate(spec).panel


def gen_mean_break(spec: DgpSpec) -> PanelData:
    if spec.kind != "MB":
        raise InvalidInput(f"gen_mean_break expects MB, got {spec.kind}")
    return simulate(spec).panel


def gen_loading_break(spec: DgpSpec) -> PanelData:
    if spec.kind != "LB":
        raise InvalidInput(f"gen_loading_break expects LB, got {spec.kind}")
    return simulate(spec).panel


def generate(spec: DgpSpec) -> PanelData:
    return simulate(spec).panel


def dgp_to_config(spec: DgpSpec) -> str:
    """Serialize as ``key = value`` lines in field order."""
    lines = []
    for k, v in asdict(spec).items():
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def dgp_from_config(text: str) -> DgpSpec:
    """Parse the format written by :func:`dgp_to_config`.

    Blank lines and ``#`` comments are ignored; unknown keys are an error.
    """
    types = {f.name: f.type for f in fields(DgpSpec)}
    kwargs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise InvalidInput(f"line {lineno}: unknown key {key!r}")
        t = types[key]
        try:
            if t == "int":
                kwargs[key] = int(value)
            elif t == "float":
                kwargs[key] = float(value)
            elif t == "bool":
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(value)
                kwargs[key] = value.lower() in ("true", "1")
            else:
                kwargs[key] = value
        except ValueError:
            raise InvalidInput(f"line {lineno}: bad value {value!r} for {key}") from None
    return DgpSpec(**kwargs)
