import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import eigenvalues_bisection
from panelbreak.errors import InvalidInput, NumericalFailure
from panelbreak.linalg import SymMatrix, batched_eigvalsh_topk, sym_eigen_topk, trace

# eigenvalues of the seed-20240501 matrix below, from the inertia-bisection oracle
SEEDED_5X5_EIGS = [
    0.7018837315233171,
    0.10124260248158967,
    -0.7501334634448016,
    -1.996590098021596,
    -2.7945573486161304,
]


def seeded_5x5():
    a = np.random.default_rng(20240501).standard_normal((5, 5))
    return (a + a.T) / 2


def test_identity():
    res = sym_eigen_topk(np.eye(3), 3)
    np.testing.assert_allclose(res.values, [1, 1, 1])
    np.testing.assert_allclose(np.abs(res.vectors @ res.vectors.T), np.eye(3), atol=1e-12)


def test_two_by_two():
    res = sym_eigen_topk([[2.0, 1.0], [1.0, 2.0]], 2)
    np.testing.assert_allclose(res.values, [3.0, 1.0], atol=1e-14)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(res.vectors[0], [s, s], atol=1e-12)
    np.testing.assert_allclose(res.vectors[1], [s, -s], atol=1e-12)


def test_seeded_matches_oracle():
    res = sym_eigen_topk(seeded_5x5(), 5)
    np.testing.assert_allclose(res.values, SEEDED_5X5_EIGS, atol=1e-8, rtol=0)


def test_oracle_recomputed_live():
    a = seeded_5x5()
    np.testing.assert_allclose(eigenvalues_bisection(a.tolist()), SEEDED_5X5_EIGS, atol=1e-10)


def test_topk_is_prefix():
    a = seeded_5x5()
    full = sym_eigen_topk(a, 5)
    top2 = sym_eigen_topk(a, 2)
    np.testing.assert_array_equal(top2.values, full.values[:2])


def test_residuals_and_orthogonality(rng):
    b = rng.standard_normal((12, 12))
    a = b @ b.T
    res = sym_eigen_topk(a, 12)
    for lam, v in zip(res.values, res.vectors):
        assert np.linalg.norm(a @ v - lam * v) <= 1e-8 * max(1, abs(res.values[0]))
        assert abs(np.linalg.norm(v) - 1) < 1e-10
    gram = res.vectors @ res.vectors.T
    assert np.abs(gram - np.eye(12)).max() < 1e-8


def test_sign_convention(rng):
    b = rng.standard_normal((6, 6))
    res = sym_eigen_topk(b + b.T, 6)
    for v in res.vectors:
        assert v[np.flatnonzero(v)[0]] > 0


def test_trace_examples():
    assert trace(np.eye(4)) == 4
    assert trace([[2, 1], [1, 2]]) == 4
    a = seeded_5x5()
    assert abs(trace(a) - sym_eigen_topk(a, 5).values.sum()) < 1e-9


def test_symmetry_from_lower_triangle():
    m = SymMatrix([[1.0, 99.0], [2.0, 3.0]])
    np.testing.assert_array_equal(m.values, [[1.0, 2.0], [2.0, 3.0]])
    assert m.dim == 2


@pytest.mark.parametrize("k", [0, 4])
def test_bad_k(k):
    with pytest.raises(InvalidInput):
        sym_eigen_topk(np.eye(3), k)


def test_non_finite():
    with pytest.raises(InvalidInput):
        sym_eigen_topk([[1.0, np.nan], [np.nan, 1.0]], 1)


def test_sweep_cap_raises(rng):
    b = rng.standard_normal((8, 8))
    with pytest.raises(NumericalFailure):
        sym_eigen_topk(b + b.T, 1, max_sweeps=1)


def test_batched_matches_jacobi(rng):
    stack = rng.standard_normal((7, 5, 5))
    stack = stack + stack.transpose(0, 2, 1)
    top = batched_eigvalsh_topk(stack, 3)
    for m, w in zip(stack, top):
        np.testing.assert_allclose(w, sym_eigen_topk(m, 3).values, atol=1e-10)


def test_psd_covariance_nonnegative(rng):
    x = rng.standard_normal((4, 9))  # rank-deficient
    c = np.cov(x, rowvar=False, bias=True)
    vals = sym_eigen_topk(c, 9).values
    assert vals.min() >= -1e-10 * np.trace(c)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 7)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_eigensum_equals_trace(b):
    n = min(b.shape)
    a = b[:n, :n]
    a = (a + a.T) / 2
    vals = sym_eigen_topk(a, n).values
    scale = max(1.0, np.abs(a).max())
    assert abs(vals.sum() - np.trace(a)) <= 1e-8 * n * scale
    assert np.all(np.diff(vals) <= 0)
