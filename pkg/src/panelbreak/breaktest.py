"""Bridge process, trimming, and the sup-norm test with Kolmogorov p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from panelbreak.errors import InvalidInput, NumericalFailure, PanelBreakError
from panelbreak.lrv import KernelKind, LrvEstimate, lrv_estimate
from panelbreak.panel import EigenProcess, PanelData, as_panel, eigen_process

__all__ = [
    "BridgePath",
    "BreakTestResult",
    "bridge_path",
    "trim_bridge",
    "sup_stat",
    "kolmogorov_sf",
    "kolmogorov_cdf",
    "kolmogorov_isf",
    "run_test",
    "sup_statistics",
]

# below this the theta-function form of the Kolmogorov law converges faster
_SMALL_X = 0.2


@dataclass(frozen=True)
class BridgePath:
    grid: NDArray[np.float64]
    values: NDArray[np.float64]
    trimmed: bool = False
    epsilon: float = 0.0


@dataclass(frozen=True)
class BreakTestResult:
    """Outcome of :func:`run_test`.

    ``statistic``, ``p_value``, ``bandwidth``, ``break_index`` and ``path``
    refer to the largest eigenvalue. With ``k_tracked > 1`` the arrays
    ``statistics`` and ``p_values`` hold one entry per tracked eigenvalue,
    each normed by its own long-run variance and not corrected for
    multiplicity.
    """

    statistic: float
    p_value: float
    epsilon: float
    bandwidth: float
    break_index: int
    k_tracked: int
    path: BridgePath
    statistics: NDArray[np.float64] = field(repr=False)
    p_values: NDArray[np.float64] = field(repr=False)
    process: EigenProcess | None = field(default=None, repr=False)
    lrv: tuple[LrvEstimate, ...] = field(default=(), repr=False)

    def reject(self, level: float = 0.05) -> bool:
        return self.statistic > kolmogorov_isf(level)


def bridge_path(ep: EigenProcess, lrv: LrvEstimate, i: int = 1) -> BridgePath:
    """Scaled, centered eigenvalue process ``sqrt(T/v) * u * (lam(u) - lam(1))``."""
    if not lrv.value > 0:
        raise InvalidInput("long-run variance must be positive")
    if not 1 <= i <= ep.k:
        raise InvalidInput(f"eigenvalue index {i} not tracked (k={ep.k})")
    lam = ep.hat_lambda[i - 1]
    t_len = ep.t_len
    values = math.sqrt(t_len) / math.sqrt(lrv.value) * ep.grid * (lam - lam[-1])
    values[-1] = 0.0
    return BridgePath(grid=ep.grid.copy(), values=values)


def _trim_count(epsilon: float, t_len: int) -> int:
    # number of grid points t/T <= epsilon, robust to 0.05 * 200 = 10.000000000000002
    return int(math.floor(epsilon * t_len + 1e-9))


def trim_bridge(b: BridgePath, epsilon: float) -> BridgePath:
    """Zero the bridge on ``[0, epsilon]`` and re-anchor it at ``epsilon``.

    The anchor value is read at the largest grid point not exceeding
    ``epsilon``; when no grid point qualifies the path is returned unchanged.
    """
    if not 0.0 <= epsilon < 1.0:
        raise InvalidInput(f"epsilon must lie in [0, 1), got {epsilon}")
    grid = b.grid
    values = b.values.copy()
    m = _trim_count(epsilon, grid.shape[0])
    if m >= 1:
        anchor = values[m - 1]
        values[m:] -= (1.0 - grid[m:]) / (1.0 - epsilon) * anchor
        values[:m] = 0.0
        values[-1] = 0.0
    return BridgePath(grid=grid.copy(), values=values, trimmed=True, epsilon=float(epsilon))


def sup_stat(b: BridgePath | ArrayLike) -> float:
    v = b.values if isinstance(b, BridgePath) else np.asarray(b, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def kolmogorov_sf(x: float) -> float:
    """``P(sup |W0| > x)`` for a standard Brownian bridge ``W0``.

    Uses ``2 * sum (-1)**(k+1) exp(-2 k^2 x^2)``, stopping once a term falls
    below 1e-16. For ``x < 0.2`` the equivalent theta-function series for the
    CDF is summed instead, since the alternating series needs ``O(1/x)`` terms.
    """
    x = float(x)
    if math.isnan(x):
        return math.nan
    if x <= 0.0:
        return 1.0
    if x < _SMALL_X:
        return 1.0 - kolmogorov_cdf(x)
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        if term < 1e-16:
            break
        total += term if k % 2 else -term
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def kolmogorov_cdf(x: float) -> float:
    x = float(x)
    if x <= 0.0:
        return 0.0
    if x >= _SMALL_X:
        return 1.0 - kolmogorov_sf(x)
    c = math.pi**2 / (8.0 * x * x)
    total = 0.0
    k = 1
    while True:
        term = math.exp(-((2 * k - 1) ** 2) * c)
        if term < 1e-300 or (total > 0 and term < 1e-17 * total):
            break
        total += term
        k += 1
    return math.sqrt(2.0 * math.pi) / x * total


def kolmogorov_isf(alpha: float, tol: float = 1e-10) -> float:
    """Critical value ``x`` with ``kolmogorov_sf(x) = alpha``, by bisection."""
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")
    lo, hi = 0.0, 1.0
    while kolmogorov_sf(hi) > alpha:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kolmogorov_sf(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PanelBreakError as exc:
        raise type(exc)(f"{name}: {exc}") from exc
    except (np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        raise NumericalFailure(f"{name}: {exc}") from exc


def run_test(
    p: PanelData | ArrayLike,
    epsilon: float = 0.05,
    kernel: KernelKind = "parzen",
    k: int = 1,
    *,
    bandwidth: float | None = None,
    method: Literal["lapack", "jacobi"] = "lapack",
    keep_intermediates: bool = True,
) -> BreakTestResult:
    """Test a panel for a structural break via its largest eigenvalue(s).

    Parameters
    ----------
    p : PanelData or array_like
        ``T x N`` panel, ``T >= 16``.
    epsilon : float
        Trimming fraction for the bridge; 0 disables trimming.
    kernel : {"parzen", "bartlett"}
        Lag window of the long-run variance estimator.
    k : int
        Number of leading eigenvalues to test individually.
    bandwidth : float, optional
        Fixed HAC bandwidth instead of the plug-in rule.
    method : {"lapack", "jacobi"}
        Eigensolver for the partial covariances.
    keep_intermediates : bool
        Attach the eigenvalue process and variance estimates to the result.

    Returns
    -------
    BreakTestResult
    """
    p = as_panel(p)
    if p.t_len < 16:
        raise InvalidInput(f"run_test needs T >= 16, got T={p.t_len}")
    if not 0.0 <= epsilon < 1.0:
        raise InvalidInput(f"epsilon must lie in [0, 1), got {epsilon}")
    ep = _stage("eigen_process", eigen_process, p, k, method=method)
    stats = np.empty(k)
    pvals = np.empty(k)
    lrvs = []
    first_path = None
    for i in range(1, k + 1):
        lrv = _stage("lrv_estimate", lrv_estimate, p, i, kernel, bandwidth)
        path = _stage("bridge", bridge_path, ep, lrv, i)
        path = _stage("trim", trim_bridge, path, epsilon)
        stats[i - 1] = sup_stat(path)
        pvals[i - 1] = kolmogorov_sf(stats[i - 1])
        lrvs.append(lrv)
        if i == 1:
            first_path = path
    return BreakTestResult(
        statistic=float(stats[0]),
        p_value=float(pvals[0]),
        epsilon=float(epsilon),
        bandwidth=lrvs[0].bandwidth,
        break_index=lrvs[0].break_index,
        k_tracked=k,
        path=first_path,
        statistics=stats,
        p_values=pvals,
        process=ep if keep_intermediates else None,
        lrv=tuple(lrvs) if keep_intermediates else (),
    )


def sup_statistics(
    p: PanelData | ArrayLike,
    epsilons: ArrayLike = (0.05,),
    kernel: KernelKind = "parzen",
    *,
    bandwidth: float | None = None,
    method: Literal["lapack", "jacobi"] = "lapack",
) -> NDArray[np.float64]:
    """Largest-eigenvalue sup statistics of one panel for several trimming fractions.

    Equivalent to ``[run_test(p, e).statistic for e in epsilons]`` but builds
    the eigenvalue process and long-run variance only once.
    """
    p = as_panel(p)
    if p.t_len < 16:
        raise InvalidInput(f"sup_statistics needs T >= 16, got T={p.t_len}")
    ep = _stage("eigen_process", eigen_process, p, 1, method=method)
    lrv = _stage("lrv_estimate", lrv_estimate, p, 1, kernel, bandwidth)
    path = bridge_path(ep, lrv, 1)
    return np.array([sup_stat(trim_bridge(path, float(e))) for e in np.atleast_1d(epsilons)])
