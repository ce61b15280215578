"""Long-run variance of the squared-projection series.

The series is ``xi_t = (e' (X_t - m_t))**2`` where ``e`` is a leading
eigenvector of the full-sample covariance and ``m_t`` is the mean of the
segment containing ``t`` after splitting the sample at the least-squares
mean-break estimate. Its long-run variance is estimated by a kernel-weighted
sum of sample autocovariances with an AR(1) plug-in bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from panelbreak.errors import InvalidInput
from panelbreak.linalg import sym_eigen_topk
from panelbreak.panel import PanelData, as_panel, partial_cov

__all__ = [
    "KernelKind",
    "KernelSpec",
    "LrvEstimate",
    "bai_breakpoint",
    "segment_demean",
    "xi_series",
    "kernel_weight",
    "andrews_bandwidth",
    "plugin_bandwidth",
    "autocovariances",
    "long_run_variance",
    "lrv_estimate",
    "RHO_CLAMP",
]

KernelKind = Literal["parzen", "bartlett"]

RHO_CLAMP = 0.999

# Andrews (1991) plug-in constants for the AR(1) approximating model
_PARZEN_CONST = 2.6614
_BARTLETT_CONST = 1.1447


def _kind(kind: str) -> str:
    k = str(kind).lower()
    if k not in ("parzen", "bartlett"):
        raise InvalidInput(f"unknown kernel {kind!r}; expected 'parzen' or 'bartlett'")
    return k


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = "parzen"
    bandwidth: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind(self.kind))
        if not self.bandwidth >= 1.0:
            raise InvalidInput(f"bandwidth must be >= 1, got {self.bandwidth}")


@dataclass(frozen=True)
class LrvEstimate:
    """Floored long-run variance estimate and the pieces that produced it."""

    value: float
    raw_value: float
    bandwidth: float
    break_index: int
    xi_series: NDArray[np.float64]
    kernel: str = "parzen"
    eigen_index: int = 1
    rho: float = 0.0
    rho_clamped: bool = False


def bai_breakpoint(p: PanelData | ArrayLike) -> int:
    """Least-squares estimate of a common break in the panel means.

    Minimizes the pooled residual sum of squares of a one-break mean model
    over ``k = 1 .. T-1``, where ``k`` is the last pre-break row. Ties (and a
    flat criterion) resolve to the smallest ``k``.
    """
    p = as_panel(p)
    x = p.values
    t_len = x.shape[0]
    if t_len < 2:
        raise InvalidInput("break estimation needs T >= 2")
    # SSR(k) = SS_total - T |S_k|^2 / (k (T-k)), S_k = partial sum of centered rows
    d = x - x.mean(axis=0)
    s = np.cumsum(d, axis=0)[:-1]
    k = np.arange(1, t_len, dtype=float)
    gain = t_len * np.einsum("ij,ij->i", s, s) / (k * (t_len - k))
    best = gain.max()
    tol = 1e-12 * best + 1e-20 * float(np.einsum("ij,ij->", x, x))
    return int(np.flatnonzero(gain >= best - tol)[0]) + 1


def segment_demean(p: PanelData | ArrayLike, t_star: int) -> PanelData:
    p = as_panel(p)
    x = p.values
    if not 1 <= t_star <= p.t_len - 1:
        raise InvalidInput(f"t_star must lie in [1, {p.t_len - 1}], got {t_star}")
    out = np.empty_like(x)
    out[:t_star] = x[:t_star] - x[:t_star].mean(axis=0)
    out[t_star:] = x[t_star:] - x[t_star:].mean(axis=0)
    return p.with_values(out)


def xi_series(p: PanelData | ArrayLike, e_hat: ArrayLike, t_star: int) -> NDArray[np.float64]:
    """Squared projections of the segment-demeaned rows onto ``e_hat``."""
    p = as_panel(p)
    e = np.asarray(e_hat, dtype=float).ravel()
    if e.shape[0] != p.n_len:
        raise InvalidInput(f"e_hat has length {e.shape[0]}, panel has N={p.n_len}")
    if abs(np.linalg.norm(e) - 1.0) > 1e-8:
        raise InvalidInput("e_hat must have unit norm")
    proj = segment_demean(p, t_star).values @ e
    return proj * proj


def kernel_weight(spec: KernelSpec, s: ArrayLike) -> float | NDArray[np.float64]:
    """Kernel weight ``J(s/h)`` at integer lag(s) ``s``."""
    x = np.abs(np.asarray(s, dtype=float)) / spec.bandwidth
    if spec.kind == "bartlett":
        w = np.maximum(0.0, 1.0 - x)
    else:
        w = np.where(
            x <= 0.5,
            1.0 - 6.0 * x**2 + 6.0 * x**3,
            np.where(x <= 1.0, 2.0 * (1.0 - x) ** 3, 0.0),
        )
    return float(w) if w.ndim == 0 else w


def _lag1_autocorr(xi: NDArray[np.float64]) -> float:
    c = xi - xi.mean()
    denom = float(c @ c)
    if denom <= 0.0:
        return 0.0
    return float(c[:-1] @ c[1:]) / denom


def plugin_bandwidth(rho: float, t_len: int, kind: KernelKind = "parzen") -> float:
    """Andrews AR(1) plug-in bandwidth for a given autocorrelation, before clamping to [1, T-1]."""
    if _kind(kind) == "parzen":
        alpha = 4.0 * rho**2 / (1.0 - rho) ** 4
        return _PARZEN_CONST * (alpha * t_len) ** 0.2
    alpha = 4.0 * rho**2 / ((1.0 - rho) ** 2 * (1.0 + rho) ** 2)
    return _BARTLETT_CONST * (alpha * t_len) ** (1.0 / 3.0)


def _andrews(xi: NDArray[np.float64], kind: str) -> tuple[float, float, bool]:
    t_len = xi.shape[0]
    rho = _lag1_autocorr(xi)
    clamped = abs(rho) >= RHO_CLAMP
    if clamped:
        rho = math.copysign(RHO_CLAMP, rho)
    h = min(max(plugin_bandwidth(rho, t_len, kind), 1.0), float(t_len - 1))
    return h, rho, clamped


def andrews_bandwidth(xi: ArrayLike, kind: KernelKind = "parzen") -> float:
    """AR(1) plug-in bandwidth of Andrews (1991), floored at 1 and capped at ``T-1``.

    The lag-1 autocorrelation is clamped to ``+-0.999`` so near-unit-root or
    alternating series still give a finite bandwidth.
    """
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape[0] < 4:
        raise InvalidInput("bandwidth selection needs at least 4 observations")
    return _andrews(xi, _kind(kind))[0]


def autocovariances(xi: ArrayLike, max_lag: int) -> NDArray[np.float64]:
    """Sample autocovariances for lags ``0..max_lag``, lag ``s`` divided by ``T - s``."""
    xi = np.asarray(xi, dtype=float).ravel()
    t_len = xi.shape[0]
    max_lag = min(int(max_lag), t_len - 1)
    c = xi - xi.mean()
    return np.array([c[: t_len - s] @ c[s:] / (t_len - s) for s in range(max_lag + 1)])


def long_run_variance(xi: ArrayLike, kind: KernelKind = "parzen",
                      bandwidth: float | None = None) -> tuple[float, float, float, bool]:
    """Kernel HAC estimate of the long-run variance of a scalar series.

    Returns ``(raw_value, bandwidth, rho, rho_clamped)``; ``raw_value`` is not
    floored and may be negative for the Bartlett kernel in tiny samples.
    """
    xi = np.asarray(xi, dtype=float).ravel()
    kind = _kind(kind)
    if bandwidth is None:
        if xi.shape[0] < 4:
            raise InvalidInput("bandwidth selection needs at least 4 observations")
        h, rho, clamped = _andrews(xi, kind)
    else:
        h, rho, clamped = float(bandwidth), _lag1_autocorr(xi), False
    spec = KernelSpec(kind, h)
    max_lag = min(xi.shape[0] - 1, math.ceil(h))
    r = autocovariances(xi, max_lag)
    w = kernel_weight(spec, np.arange(1, r.shape[0]))
    raw = float(r[0] + 2.0 * np.dot(w, r[1:]))
    return raw, h, rho, clamped


def _floor(raw: float, xi: NDArray[np.float64]) -> float:
    m = float(xi.mean())
    return max(raw, 1e-10 * m * m, 1e-12)


def lrv_estimate(p: PanelData | ArrayLike, eigen_index: int = 1, kernel: KernelKind = "parzen",
                 bandwidth: float | None = None) -> LrvEstimate:
    """Long-run variance norming the ``eigen_index``-th eigenvalue process.

    Parameters
    ----------
    p : PanelData or array_like
        ``T x N`` panel with ``T >= 8``.
    eigen_index : int
        1-based index of the eigenvalue whose process is being normed.
    kernel : {"parzen", "bartlett"}
        Lag window.
    bandwidth : float, optional
        Fixed bandwidth; the AR(1) plug-in rule is used when omitted.
    """
    p = as_panel(p)
    t_len, n = p.values.shape
    if t_len < 8:
        raise InvalidInput("long-run variance estimation needs T >= 8")
    if not 1 <= eigen_index <= min(n, t_len):
        raise InvalidInput(f"eigen_index must lie in [1, {min(n, t_len)}], got {eigen_index}")
    e_hat = sym_eigen_topk(partial_cov(p, t_len), eigen_index).vectors[eigen_index - 1]
    t_star = bai_breakpoint(p)
    xi = xi_series(p, e_hat, t_star)
    raw, h, rho, clamped = long_run_variance(xi, kernel, bandwidth)
    return LrvEstimate(
        value=_floor(raw, xi),
        raw_value=raw,
        bandwidth=h,
        break_index=t_star,
        xi_series=xi,
        kernel=_kind(kernel),
        eigen_index=eigen_index,
        rho=rho,
        rho_clamped=clamped,
    )
