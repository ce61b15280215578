import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import seeded_panel
from oracles import autocov_loop, bai_exhaustive
from panelbreak.errors import InvalidInput
from panelbreak.lrv import (
    KernelSpec,
    andrews_bandwidth,
    autocovariances,
    bai_breakpoint,
    kernel_weight,
    long_run_variance,
    lrv_estimate,
    plugin_bandwidth,
    segment_demean,
    xi_series,
)


class TestBaiBreakpoint:
    def test_exact_split(self):
        assert bai_breakpoint(np.array([0, 0, 0, 5, 5, 5.0])) == 3

    @pytest.mark.parametrize("c", [0.0, 5.0, 0.1, -3.7])
    def test_constant_is_flat(self, c):
        assert bai_breakpoint(np.full((9, 2), c)) == 1

    def test_planted_break(self):
        x = np.random.default_rng(77).standard_normal((20, 3))
        x[11:] += 3.0  # rows t >= 12 shifted
        assert bai_breakpoint(x) == 11
        assert bai_breakpoint(x) == bai_exhaustive(x.tolist())

    def test_needs_two_rows(self):
        with pytest.raises(InvalidInput):
            bai_breakpoint(np.ones((1, 3)))

    def test_shift_invariant(self):
        x = seeded_panel(11, 30, 4)
        c = np.array([100.0, -3.0, 0.5, 7.0])
        assert bai_breakpoint(x + c) == bai_breakpoint(x)


def test_segment_demean_examples():
    np.testing.assert_array_equal(segment_demean(np.array([0, 0, 5, 5.0]), 2).values, 0)
    np.testing.assert_array_equal(segment_demean(np.full((6, 3), 2.5), 4).values, 0)
    x = seeded_panel(2, 25, 3)
    d = segment_demean(x, 9).values
    assert np.abs(d[:9].mean(axis=0)).max() < 1e-12
    assert np.abs(d[9:].mean(axis=0)).max() < 1e-12


def test_xi_series_examples():
    assert np.all(xi_series(np.zeros((6, 2)), [1.0, 0.0], 3) == 0)
    np.testing.assert_array_equal(xi_series(np.array([2, -2, 2, -2.0]), [1.0], 2), [4, 4, 4, 4])
    x = seeded_panel(3, 15, 3)
    e = np.array([1.0, 2.0, -2.0]) / 3
    expected = []
    for t in range(15):
        seg = x[:6] if t < 6 else x[6:]
        expected.append(float(e @ (x[t] - seg.mean(axis=0))) ** 2)
    np.testing.assert_allclose(xi_series(x, e, 6), expected, atol=1e-12, rtol=0)
    with pytest.raises(InvalidInput):
        xi_series(x, [1.0, 1.0, 0.0], 6)


class TestKernel:
    @pytest.mark.parametrize("kind", ["parzen", "bartlett"])
    def test_unit_at_zero(self, kind):
        assert kernel_weight(KernelSpec(kind, 3.7), 0) == 1.0

    def test_parzen_boundary(self):
        assert kernel_weight(KernelSpec("parzen", 1.0), 1) == 0.0

    def test_parzen_half(self):
        assert kernel_weight(KernelSpec("parzen", 2.0), 1) == pytest.approx(0.25, abs=1e-15)

    def test_bartlett(self):
        assert kernel_weight(KernelSpec("bartlett", 4.0), 1) == 0.75
        assert kernel_weight(KernelSpec("bartlett", 4.0), 5) == 0.0

    def test_bandwidth_floor(self):
        with pytest.raises(InvalidInput):
            KernelSpec("parzen", 0.5)

    @settings(max_examples=50, deadline=None)
    @given(kind=st.sampled_from(["parzen", "bartlett"]), h=st.floats(1, 50))
    def test_symmetric_nonincreasing(self, kind, h):
        spec = KernelSpec(kind, h)
        lags = np.arange(0, 80)
        w = kernel_weight(spec, lags)
        np.testing.assert_array_equal(w, kernel_weight(spec, -lags))
        assert np.all(np.diff(w) <= 1e-15)
        assert np.all((w >= 0) & (w <= 1))


class TestBandwidth:
    def test_white_noise_floors(self):
        xi = np.tile([1.0, 0.0, -1.0, 0.0], 25)  # lag-1 products all vanish
        assert andrews_bandwidth(xi) == 1.0

    def test_formula_arithmetic(self):
        # alpha(2) = 4 * .25 / .5**4 = 16; h = 2.6614 * 1600**0.2
        assert plugin_bandwidth(0.5, 100, "parzen") == pytest.approx(11.6395, abs=1e-4)

    def test_alternating_clamped(self):
        xi = np.tile([1.0, -1.0], 50)
        h = andrews_bandwidth(xi)
        assert np.isfinite(h) and 1.0 <= h <= 99

    def test_short_series(self):
        with pytest.raises(InvalidInput):
            andrews_bandwidth([1.0, 2.0, 3.0])


def test_autocovariances_loop_oracle():
    xi = np.random.default_rng(5).exponential(size=60)
    np.testing.assert_allclose(autocovariances(xi, 12), autocov_loop(xi.tolist(), 12), atol=1e-12, rtol=0)


def test_constant_xi_floors():
    raw, h, rho, _ = long_run_variance(np.full(40, 3.0))
    assert raw == 0.0 and h == 1.0
    est = lrv_estimate(np.zeros((20, 2)))
    assert est.raw_value == 0.0 and est.value > 0


def test_iid_scalar_matches_analytic():
    # long-run variance of Z^2 for iid N(0,1) is Var(Z^2) = 2
    x = np.random.default_rng(2024).standard_normal((2000, 1))
    assert lrv_estimate(x).value == pytest.approx(2.0, rel=0.25)


def test_ar1_series_matches_truncated_sum():
    rng = np.random.default_rng(99)
    z = rng.standard_normal(5000)
    xi = np.empty(5000)
    xi[0] = z[0] / np.sqrt(1 - 0.25)
    for t in range(1, 5000):
        xi[t] = 0.5 * xi[t - 1] + z[t]
    r = autocov_loop(xi.tolist(), 200)
    oracle = r[0] + 2 * sum(r[1:])
    raw, *_ = long_run_variance(xi)
    assert raw == pytest.approx(oracle, rel=0.25)
    assert raw == pytest.approx(4.0, rel=0.25)  # 1 / (1 - rho)^2


def test_estimate_fields():
    x = seeded_panel(13, 60, 4)
    est = lrv_estimate(x)
    assert 1 <= est.break_index <= 59
    assert est.xi_series.shape == (60,)
    assert est.value > 0 and est.bandwidth >= 1
    assert lrv_estimate(x, eigen_index=3).eigen_index == 3
    with pytest.raises(InvalidInput):
        lrv_estimate(x[:7])
    with pytest.raises(InvalidInput):
        lrv_estimate(x, eigen_index=5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), c=st.floats(0.2, 5.0))
def test_scale_and_permutation(seed, c):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 5))
    base = lrv_estimate(x)
    scaled = lrv_estimate(c * x)
    np.testing.assert_allclose(scaled.xi_series, c**2 * base.xi_series, rtol=1e-8, atol=1e-300)
    assert scaled.value == pytest.approx(c**4 * base.value, rel=1e-8)
    assert scaled.bandwidth == pytest.approx(base.bandwidth, rel=1e-8)
    perm = rng.permutation(5)
    assert lrv_estimate(x[:, perm]).value == pytest.approx(base.value, rel=1e-8)
