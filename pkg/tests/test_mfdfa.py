import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from roughvol.errors import NumericError, ValidationError
from roughvol.mfdfa import (
    FluctuationTable,
    MfdfaConfig,
    default_q_grid,
    default_s_grid,
    fluctuation_function,
    fluctuation_table,
    hurst_fit,
    mfdfa_analyze,
    profile,
    segment_variances,
)
from roughvol.synth import fbm_increments


def test_profile_small():
    np.testing.assert_allclose(profile([1, 2, 3]), [-1, -1, 0])
    assert np.all(profile(np.full(10, 3.5)) == 0)
    np.testing.assert_allclose(profile(np.full(10, 3.7)), 0, atol=1e-13)


def test_profile_needs_two_points():
    with pytest.raises(ValidationError):
        profile([1.0])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(arrays(float, st.integers(2, 200), elements=finite))
def test_profile_ends_at_zero(x):
    Y = profile(x)
    assert abs(Y[-1]) <= 1e-9 * max(1.0, np.abs(x).sum())


def test_variances_vanish_for_polynomial_profile():
    t = np.arange(1000.0)
    for order in (1, 2, 3):
        Y = 0.3 + 2.0 * t / 1000 - 0.5 * (t / 1000) ** order
        v = segment_variances(Y, 50, poly_order=order)
        assert np.all(v < 1e-24)


def test_segment_count_and_pairing():
    rng = np.random.default_rng(0)
    Y = np.cumsum(rng.normal(size=200))
    v = segment_variances(Y, 100, 3)
    assert v.size == 4
    # N = 2s: backward segment N_s+1 is the last block, N_s+2 the first
    assert v[0] == pytest.approx(v[3]) and v[1] == pytest.approx(v[2])
    v = segment_variances(Y, 200, 3)
    assert v.size == 2 and v[0] == pytest.approx(v[1])


def test_backward_tiling_uses_tail():
    rng = np.random.default_rng(1)
    Y = np.cumsum(rng.normal(size=230))
    v = segment_variances(Y, 100, 1)
    t = np.arange(100)
    tail = Y[130:230]
    resid = tail - np.polyval(np.polyfit(t, tail, 1), t)
    assert np.mean(resid**2) == pytest.approx(v[2], rel=1e-10)
    head = Y[:100]
    resid = head - np.polyval(np.polyfit(t, head, 1), t)
    assert np.mean(resid**2) == pytest.approx(v[0], rel=1e-10)


@pytest.mark.parametrize("s,order", [(4, 3), (1, 0), (500, 1)])
def test_segment_variance_preconditions(s, order):
    with pytest.raises(ValidationError):
        segment_variances(np.arange(100.0), s, order)


@given(
    arrays(float, 300, elements=st.floats(-10, 10, allow_nan=False)),
    st.lists(st.floats(-5, 5), min_size=4, max_size=4),
)
@settings(max_examples=40, deadline=None)
def test_detrending_nullity(x, coeffs):
    Y = profile(x)
    t = np.arange(Y.size) / Y.size
    trend = np.polyval(coeffs, t)
    for s in (20, 64, 150):
        a = segment_variances(Y, s, 3)
        b = segment_variances(Y + trend, s, 3)
        np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-9)


def test_fluctuation_constant_variances():
    for q in (-25.0, -2.0, 0.0, 0.5, 2.0, 25.0):
        assert fluctuation_function(np.full(7, 2.25), q) == pytest.approx(1.5, rel=1e-13)


def test_fluctuation_q2_is_rms():
    v = np.array([0.5, 1.5, 4.0])
    assert fluctuation_function(v, 2.0) == pytest.approx(np.sqrt(v.mean()), rel=1e-14)


def _mp_fluct(v, q):
    mpmath.mp.dps = 50
    v = [mpmath.mpf(x) for x in v]
    if q == 0:
        return mpmath.exp(sum(mpmath.log(x) for x in v) / (2 * len(v)))
    q = mpmath.mpf(q)
    return (sum(x ** (q / 2) for x in v) / len(v)) ** (1 / q)


def test_fluctuation_against_high_precision():
    v = [1.0, 4.0]
    assert fluctuation_function(v, 2.0) == pytest.approx(np.sqrt(2.5), rel=1e-14)
    assert fluctuation_function(v, 0.0) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    harmonic = float(_mp_fluct(v, -2.0))
    arithmetic = float(_mp_fluct(v, 2.0))
    assert harmonic < fluctuation_function(v, 0.0) < arithmetic
    rng = np.random.default_rng(3)
    w = rng.lognormal(-8, 3, size=200).tolist()
    for q in (-25.0, -3.5, -0.5, 0.0, 0.5, 3.5, 25.0):
        assert fluctuation_function(w, q) == pytest.approx(float(_mp_fluct(w, q)), rel=1e-11)


def test_fluctuation_zero_variance_negative_q():
    with pytest.raises(NumericError, match="segment 2"):
        fluctuation_function([1.0, 0.0], -1.0)
    with pytest.raises(NumericError):
        fluctuation_function([1.0, 0.0], 0.0)
    assert fluctuation_function([1.0, 0.0], 2.0) == pytest.approx(np.sqrt(0.5))


@given(arrays(float, st.integers(2, 40), elements=st.floats(1e-6, 1e6)))
def test_fluctuation_monotone_in_q(v):
    q = default_q_grid()
    F = np.array([fluctuation_function(v, x) for x in q])
    assert np.all(np.diff(F) >= -1e-9 * F[1:])


def test_fluctuation_table_monotone_over_grid():
    x = fbm_increments(0.3, 4096, 2)
    t = fluctuation_table(x, default_s_grid(4096), default_q_grid())
    assert np.all(t.F > 0)
    assert np.all(np.diff(t.F, axis=1) >= -1e-12 * t.F[:, 1:])


def test_hurst_fit_exact_power_law():
    s = np.array([50, 80, 100, 150, 200, 280, 400])
    q = np.array([1.0, 2.0])
    F = np.column_stack([3.0 * s**0.3, 0.5 * s**0.71])
    table = FluctuationTable(s=s, q=q, F=F, n_segments=np.zeros(7, int))
    h, se, r2 = hurst_fit(table, 2.0, (80, 280))
    assert h == pytest.approx(0.71, abs=1e-12)
    assert r2 == pytest.approx(1.0)
    h, _, _ = hurst_fit(table, 1.0, (80, 280))
    assert h == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(ValidationError):
        hurst_fit(table, 2.0, (80, 110))
    with pytest.raises(ValidationError):
        hurst_fit(table, 3.0, (80, 280))


def test_hurst_fit_rejects_nonfinite():
    s = np.array([80, 100, 150, 200])
    F = np.array([[1.0], [np.nan], [2.0], [3.0]])
    with pytest.raises(NumericError):
        hurst_fit(FluctuationTable(s, np.array([2.0]), F, np.zeros(4, int)), 2.0, (80, 280))


def test_constant_series_rejected():
    with pytest.raises(NumericError):
        mfdfa_analyze(np.ones(2000))


def test_config_validation():
    with pytest.raises(ValidationError):
        MfdfaConfig(s_grid=np.array([2, 3, 100, 200]), poly_order=3).resolved_s_grid(1000)
    with pytest.raises(ValidationError):
        MfdfaConfig(s_grid=np.array([100, 200, 300]), fit_range=(80, 280)).resolved_s_grid(1000)
    with pytest.raises(ValidationError):
        MfdfaConfig(s_grid=np.array([16, 50, 100, 300]), fit_range=(80, 280)).resolved_s_grid(1000)
    with pytest.raises(ValidationError):
        default_q_grid(-1, 1, 0)
    with pytest.raises(ValidationError):
        mfdfa_analyze(np.random.default_rng(0).normal(size=100), MfdfaConfig(s_grid=np.array([16, 30, 60, 120]), fit_range=(16, 120)))


def test_default_grids():
    q = default_q_grid()
    assert q.size == 101 and q[0] == -25 and q[-1] == 25 and 0.0 in q and 2.0 in q
    s = default_s_grid(1 << 16)
    assert s[0] == 16 and s[-1] == 1 << 14 and 18 <= s.size <= 20
    assert np.count_nonzero((s >= 80) & (s <= 280)) >= 3


def test_profile_reversal_symmetry():
    # reversing the profile swaps forward and backward tilings exactly
    x = fbm_increments(0.35, 2048, 9)
    Y = profile(x)
    for s in (16, 33, 70, 150, 333, 2048):
        np.testing.assert_allclose(
            np.sort(segment_variances(Y, s)), np.sort(segment_variances(Y[::-1], s)), rtol=1e-9
        )


def test_input_reversal_close():
    # reversing the input reverses the profile up to a one-sample shift
    x = fbm_increments(0.35, 1 << 14, 9)
    _, a = mfdfa_analyze(x)
    _, b = mfdfa_analyze(x[::-1])
    assert abs(a.at(2.0) - b.at(2.0)) < 0.01


@pytest.mark.parametrize("a,b", [(2.5, 1.0), (-0.3, 7.0), (1e-3, -2.0)])
def test_affine_invariance(a, b):
    x = fbm_increments(0.3, 8192, 4)
    cfg = MfdfaConfig(q_grid=default_q_grid(-5, 5, 0.5))
    t1, c1 = mfdfa_analyze(x, cfg)
    t2, c2 = mfdfa_analyze(a * x + b, cfg)
    np.testing.assert_allclose(t2.F, abs(a) * t1.F, rtol=1e-8)
    np.testing.assert_allclose(c2.h, c1.h, atol=1e-9)


def test_white_noise_h2():
    x = np.random.default_rng(5).standard_normal(1 << 16)
    _, c = mfdfa_analyze(x)
    assert c.at(2.0) == pytest.approx(0.5, abs=0.03)


def test_fbm_h07():
    _, c = mfdfa_analyze(fbm_increments(0.7, 1 << 16, 21))
    assert c.at(2.0) == pytest.approx(0.7, abs=0.03)


def test_deterministic():
    x = fbm_increments(0.4, 4096, 1)
    t1, c1 = mfdfa_analyze(x)
    t2, c2 = mfdfa_analyze(x)
    assert np.array_equal(t1.F, t2.F) and np.array_equal(c1.h, c2.h)
    assert c1.estimator == "mfdfa" and c1.fit_window == (80, 280)
