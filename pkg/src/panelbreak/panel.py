"""Panel containers and the partial-sample covariance / eigenvalue processes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from panelbreak.errors import InvalidInput, NumericalFailure
from panelbreak.linalg import SymMatrix, batched_eigvalsh_topk, sym_eigen_topk

__all__ = [
    "PanelData",
    "EigenProcess",
    "as_panel",
    "grand_mean",
    "partial_cov",
    "partial_cov_stack",
    "eigen_process",
]

# cap on doubles materialized per block of stacked covariances
_BLOCK_ELEMS = 1 << 21


@dataclass(frozen=True)
class PanelData:
    """A ``T x N`` panel: row ``t`` is the cross-section observed at time ``t``."""

    values: NDArray[np.float64]
    labels: Sequence | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidInput(f"panel must be a non-empty 2-D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("panel contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            labels = list(self.labels)
            if len(labels) != v.shape[0]:
                raise InvalidInput(f"{len(labels)} labels for {v.shape[0]} rows")
            if any(b <= a for a, b in zip(labels, labels[1:])):
                raise InvalidInput("labels must be strictly increasing")
            object.__setattr__(self, "labels", tuple(labels))

    @property
    def t_len(self) -> int:
        return self.values.shape[0]

    @property
    def n_len(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: ArrayLike) -> "PanelData":
        return PanelData(values, self.labels)


def as_panel(p: PanelData | ArrayLike) -> PanelData:
    return p if isinstance(p, PanelData) else PanelData(p)


@dataclass(frozen=True)
class EigenProcess:
    """Leading eigenvalues of the partial covariances on the grid ``t/T``.

    ``hat_lambda[i, t-1]`` is the ``(i+1)``-th largest eigenvalue of the
    covariance of the first ``t`` rows (grand-mean demeaned, divided by ``t``);
    ``tilde_lambda`` rescales it by ``t/T``.
    """

    k: int
    grid: NDArray[np.float64]
    hat_lambda: NDArray[np.float64]
    tilde_lambda: NDArray[np.float64] = field(repr=False)

    @property
    def t_len(self) -> int:
        return self.grid.shape[0]


def grand_mean(p: PanelData | ArrayLike) -> NDArray[np.float64]:
    return as_panel(p).values.mean(axis=0)


def partial_cov(p: PanelData | ArrayLike, t_cut: int, demean: Literal["grand"] = "grand") -> SymMatrix:
    """Covariance of the first ``t_cut`` rows around the full-sample mean.

    The mean subtracted is always the grand mean over all ``T`` rows, so the
    partial covariances share a single centering.
    """
    p = as_panel(p)
    if demean != "grand":
        raise InvalidInput(f"unsupported demeaning {demean!r}")
    if not 1 <= t_cut <= p.t_len:
        raise InvalidInput(f"t_cut must lie in [1, {p.t_len}], got {t_cut}")
    d = p.values[:t_cut] - grand_mean(p)
    return SymMatrix(d.T @ d / t_cut)


def partial_cov_stack(p: PanelData | ArrayLike, start: int = 0, stop: int | None = None,
                      running: NDArray[np.float64] | None = None) -> tuple[NDArray, NDArray]:
    """Partial covariances for ``t_cut`` in ``start+1 .. stop`` as a stacked array.

    ``running`` must hold the outer-product sum of the first ``start`` centered
    rows. Returns the stack and the updated running sum.
    """
    p = as_panel(p)
    stop = p.t_len if stop is None else stop
    d = p.values[start:stop] - grand_mean(p)
    n = p.n_len
    if running is None:
        running = np.zeros((n, n))
    sums = np.cumsum(d[:, :, None] * d[:, None, :], axis=0)
    sums += running
    counts = np.arange(start + 1, stop + 1, dtype=float)
    return sums / counts[:, None, None], sums[-1].copy()


def eigen_process(p: PanelData | ArrayLike, k: int = 1,
                  method: Literal["lapack", "jacobi"] = "lapack") -> EigenProcess:
    """Track the ``k`` largest eigenvalues of the partial covariances for ``t = 1..T``.

    The running outer-product sum is updated one row at a time, so the cost is
    ``O(T N^2)`` plus ``T`` eigensolves. ``method="lapack"`` solves the
    eigenproblems in batches through LAPACK; ``method="jacobi"`` routes every
    one through :func:`~panelbreak.linalg.sym_eigen_topk`.
    """
    p = as_panel(p)
    t_len, n = p.values.shape
    if not 1 <= k <= min(n, t_len):
        raise InvalidInput(f"k must lie in [1, min(N, T)] = [1, {min(n, t_len)}], got {k}")
    if method not in ("lapack", "jacobi"):
        raise InvalidInput(f"unknown eigen method {method!r}")

    hat = np.empty((k, t_len))
    block = max(1, _BLOCK_ELEMS // (n * n))
    running = None
    for start in range(0, t_len, block):
        stop = min(t_len, start + block)
        covs, running = partial_cov_stack(p, start, stop, running)
        if method == "lapack":
            try:
                hat[:, start:stop] = batched_eigvalsh_topk(covs, k).T
                continue
            except NumericalFailure:
                pass  # fall through to locate the failing t
        for j, c in enumerate(covs):
            t = start + j + 1
            try:
                if method == "lapack":
                    hat[:, t - 1] = batched_eigvalsh_topk(c, k)
                else:
                    hat[:, t - 1] = sym_eigen_topk(c, k).values
            except NumericalFailure as exc:
                raise NumericalFailure(f"eigensolve failed at t={t}: {exc}") from exc

    grid = np.arange(1, t_len + 1) / t_len
    return EigenProcess(k=k, grid=grid, hat_lambda=hat, tilde_lambda=hat * grid)
