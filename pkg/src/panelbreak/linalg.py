"""Dense symmetric eigensolvers.

The primary routine is a cyclic Jacobi eigensolver compiled with numba. For
the many small eigenproblems solved when building eigenvalue processes, a
batched LAPACK path is also exposed; both return eigenvalues sorted in
descending order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np
from numpy.typing import ArrayLike, NDArray

from panelbreak.errors import InvalidInput, NumericalFailure

__all__ = [
    "SymMatrix",
    "EigenPairs",
    "sym_eigen_topk",
    "trace",
    "batched_eigvalsh_topk",
    "JACOBI_TOL",
    "JACOBI_MAX_SWEEPS",
]

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 64


class SymMatrix:
    """Real symmetric matrix.

    Only the lower triangle of the input is read; the upper triangle is
    mirrored from it so that ``m[i, j] == m[j, i]`` holds exactly.
    """

    __slots__ = ("_a",)

    def __init__(self, values: ArrayLike):
        a = np.array(values, dtype=float, copy=True)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInput(f"expected a non-empty square matrix, got shape {a.shape}")
        lower = np.tril(a)
        a = lower + np.tril(a, -1).T
        a.setflags(write=False)
        self._a = a

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def values(self) -> NDArray[np.float64]:
        return self._a

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a
        return self._a.astype(dtype)

    def __repr__(self) -> str:
        return f"SymMatrix(dim={self.dim})"


@dataclass(frozen=True)
class EigenPairs:
    """Leading eigenpairs; ``vectors[j]`` belongs to ``values[j]``."""

    values: NDArray[np.float64]
    vectors: NDArray[np.float64]  # shape (k, n)
    sweeps: int = 0

    def __len__(self) -> int:
        return len(self.values)


@nb.njit(cache=True)
def _jacobi(a_in, tol, max_sweeps):  # pragma: no cover - compiled
    n = a_in.shape[0]
    a = a_in.copy()
    v = np.eye(n)
    fro = np.sqrt(np.sum(a * a))
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if np.sqrt(off) <= tol * fro:
            return np.diag(a).copy(), v, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return np.diag(a).copy(), v, max_sweeps, False


def _fix_signs(vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    # first nonzero component of each row made positive
    for row in vectors:
        nz = np.flatnonzero(row)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return vectors


def sym_eigen_topk(
    m: SymMatrix | ArrayLike,
    k: int,
    *,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigenPairs:
    """Largest ``k`` eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : SymMatrix or array_like
        Symmetric input. Plain arrays are symmetrized from their lower triangle.
    k : int
        Number of leading eigenpairs, ``1 <= k <= m.dim``.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm drops below
        ``tol * ||m||_F``.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`NumericalFailure`.

    Returns
    -------
    EigenPairs
        Eigenvalues in descending order (stable with respect to Jacobi output
        order for ties) and unit eigenvectors as rows, sign-normalized so the
        first nonzero component is positive.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    a = m.values
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    if not 1 <= k <= m.dim:
        raise InvalidInput(f"k must lie in [1, {m.dim}], got {k}")
    vals, vecs, sweeps, ok = _jacobi(np.ascontiguousarray(a), float(tol), int(max_sweeps))
    if not ok:
        raise NumericalFailure(f"Jacobi iteration did not converge within {max_sweeps} sweeps")
    order = np.argsort(-vals, kind="stable")[:k]
    return EigenPairs(
        values=vals[order].copy(),
        vectors=_fix_signs(vecs[:, order].T.copy()),
        sweeps=int(sweeps),
    )


def trace(m: SymMatrix | ArrayLike) -> float:
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    return float(np.trace(m.values))


def batched_eigvalsh_topk(stack: NDArray[np.float64], k: int) -> NDArray[np.float64]:
    """Top-``k`` eigenvalues (descending) of each matrix in a ``(..., n, n)`` stack.

    LAPACK ``syevd`` via :func:`numpy.linalg.eigvalsh`; reads the lower triangle.
    """
    try:
        w = np.linalg.eigvalsh(stack)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    return w[..., ::-1][..., :k]
