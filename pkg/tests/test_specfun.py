import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from crancomp import specfun as sf
from crancomp.validation import (E1_REF, E1_SCALED_REF, E1_TAIL_REF, GAMMA_LOWER_REF, INV_ERF_REF,
                                 SERIES_NN2_REF)


@pytest.mark.parametrize("x,ref", sorted(E1_REF.items()))
def test_e1_frozen(x, ref):
    assert sf.exp_integral_e1(x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("x,ref", sorted(E1_SCALED_REF.items()))
def test_e1_scaled_frozen(x, ref):
    assert sf.exp_integral_e1_scaled(x) == pytest.approx(ref, rel=1e-13)


def test_e1_examples():
    assert sf.exp_integral_e1(1.0) == pytest.approx(0.219383934, abs=1e-9)
    assert sf.exp_integral_e1(0.5) == pytest.approx(0.559773594, abs=1e-9)
    assert sf.exp_integral_e1(1e3) == 0.0 or sf.exp_integral_e1(1e3) < 1e-300


def test_e1_result_carries_error_estimate():
    r = sf.exp_integral_e1_result(2.0)
    assert r.value == pytest.approx(E1_REF[2.0], rel=1e-14)
    assert 0 <= r.est_abs_error < 1e-13


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_e1_domain(bad):
    with pytest.raises(sf.SpecFunDomainError):
        sf.exp_integral_e1(bad)


def test_e1_branches_agree_at_switch():
    # series and continued fraction both meet 1e-13 at the switch point
    for x in (1.5 * (1 - 1e-12), 1.5, 1.5 * (1 + 1e-12)):
        ref = float(mp.e1(x))
        assert abs(sf.exp_integral_e1(x) - ref) / ref < 1e-13


@given(st.floats(1e-8, 700.0))
def test_e1_sandwich_bounds(x):
    e = sf.exp_integral_e1(x)
    lo = math.exp(-x) / (x + 1.0)
    hi = math.exp(-x) / x
    assert lo * (1 - 1e-13) < e < hi * (1 + 1e-13)


@given(st.floats(1e-6, 600.0), st.floats(1e-3, 0.5))
def test_e1_strictly_decreasing(x, dx):
    assert sf.exp_integral_e1(x + dx * x) < sf.exp_integral_e1(x)


@given(st.floats(1e-6, 700.0))
def test_e1_matches_scipy(x):
    assert sf.exp_integral_e1(x) == pytest.approx(special.exp1(x), rel=1e-12)


@pytest.mark.parametrize("ax,ref", sorted(GAMMA_LOWER_REF.items()))
def test_gamma_lower_frozen(ax, ref):
    assert sf.incomplete_gamma_lower(*ax) == pytest.approx(ref, rel=1e-13)


def test_gamma_lower_examples():
    assert sf.incomplete_gamma_lower(0.7, 0.0) == 0.0
    for x in (0.1, 1.0, 7.0):
        assert sf.incomplete_gamma_lower(1.0, x) == pytest.approx(-math.expm1(-x), rel=1e-14)
    assert sf.incomplete_gamma_lower(2.0, 1.0) == pytest.approx(1 - 2 / math.e, abs=1e-12)
    assert sf.incomplete_gamma_lower(2.0, 1.0) == pytest.approx(0.264241117, abs=1e-9)


@pytest.mark.parametrize("a,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
def test_gamma_lower_domain(a, x):
    with pytest.raises(sf.SpecFunDomainError):
        sf.incomplete_gamma_lower(a, x)


@given(st.floats(0.05, 20.0), st.floats(0.0, 80.0))
def test_gamma_lower_plus_upper(a, x):
    total = sf.incomplete_gamma_lower(a, x) + sf.incomplete_gamma_upper(a, x)
    assert total == pytest.approx(math.gamma(a), rel=1e-12)


@given(st.floats(0.05, 20.0), st.floats(0.0, 60.0), st.floats(0.0, 5.0))
def test_gamma_lower_nondecreasing(a, x, dx):
    assert sf.incomplete_gamma_lower(a, x + dx) >= sf.incomplete_gamma_lower(a, x) * (1 - 1e-14)


@given(st.floats(0.05, 10.0), st.lists(st.floats(0.0, 50.0), min_size=1, max_size=20))
def test_gamma_lower_array_matches_scalar(a, xs):
    v = sf.incomplete_gamma_lower_array(a, np.array(xs))
    for x, y in zip(xs, v):
        assert y == pytest.approx(sf.incomplete_gamma_lower(a, x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("y,ref", sorted(SERIES_NN2_REF.items()))
def test_series_nn2_frozen(y, ref):
    assert sf.series_sum_nn2(y) == pytest.approx(ref, rel=1e-13)


def test_series_nn2_zero():
    assert sf.series_sum_nn2(0.0) == 0.0


@given(st.floats(-50.0, 50.0), st.integers(0, 40))
def test_series_nn2_tail_bound(y, extra):
    # exact partial sums: once the term ratio is <= 1/2 (n* >= 2|y|) the
    # remainder is at most twice the first omitted term
    with mp.workdps(60):
        n_star = 2 * math.ceil(abs(y)) + 1 + extra
        yy = mp.mpf(y)
        partial = mp.fsum(yy ** n / (mp.factorial(n) * n * n) for n in range(1, n_star + 1))
        nxt = abs(yy ** (n_star + 1) / (mp.factorial(n_star + 1) * (n_star + 1) ** 2))
        full = yy * mp.hyper([1, 1, 1], [2, 2, 2], yy)
        assert abs(full - partial) <= 2 * nxt + mp.mpf(10) ** -55 * abs(full)


@given(st.floats(-50.0, 50.0))
def test_series_nn2_matches_hypergeometric(y):
    ref = float(mp.mpf(y) * mp.hyper([1, 1, 1], [2, 2, 2], y))
    assert sf.series_sum_nn2(y) == pytest.approx(ref, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("t,ref", sorted(E1_TAIL_REF.items()))
def test_e1_tail_frozen(t, ref):
    assert sf.e1_over_t_tail(t) == pytest.approx(ref, rel=1e-12)


@given(st.floats(0.01, 60.0))
def test_e1_tail_scaled_consistent(t):
    assert sf.e1_over_t_tail_scaled(t) == pytest.approx(math.exp(t) * sf.e1_over_t_tail(t), rel=1e-12)


@pytest.mark.parametrize("y,ref", sorted(INV_ERF_REF.items()))
def test_inv_erf_frozen(y, ref):
    assert sf.inv_erf(y) == pytest.approx(ref, rel=1e-14, abs=1e-15)


def test_inv_erf_examples():
    assert sf.inv_erf(0.0) == 0.0
    # erf(0.906193802436823) = 0.8 to 16 digits
    assert special.erf(sf.inv_erf(0.8)) == pytest.approx(0.8, abs=1e-15)


@pytest.mark.parametrize("bad", [1.0, -1.0, 1.5, math.nan])
def test_inv_erf_domain(bad):
    with pytest.raises(sf.SpecFunDomainError):
        sf.inv_erf(bad)


@given(st.floats(-0.999, 0.999))
def test_inv_erf_roundtrip(y):
    assert abs(special.erf(sf.inv_erf(y)) - y) <= 1e-10


def test_inv_erf_roundtrip_1000_draws():
    ys = np.random.default_rng(0).uniform(-0.999, 0.999, 1000)
    err = max(abs(special.erf(sf.inv_erf(y)) - y) for y in ys)
    assert err <= 1e-10


@given(st.floats(0.0, 1.0 - 1e-15))
def test_inv_erf_odd(y):
    assert sf.inv_erf(-y) == -sf.inv_erf(y)


def test_inv_erf_series_alone_is_a_seed():
    # the raw series is fine near zero and poor near the tails
    assert sf.inv_erf_series(0.1) == pytest.approx(INV_ERF_REF[0.1], rel=1e-12)
    assert abs(sf.inv_erf_series(0.999999) - INV_ERF_REF[0.999999]) > 1e-6


@given(st.floats(-700.0, -1e-12))
def test_norm_ppf_log_matches_scipy(lp):
    from scipy.stats import norm
    # upper half via isf of 1 - p, which exp(lp) would round away
    ref = norm.ppf(math.exp(lp)) if lp < math.log(0.5) else norm.isf(-math.expm1(lp))
    assert sf.norm_ppf_log(lp) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@given(st.floats(-1e5, -1.0))
def test_norm_ppf_log_inverts_log_sf(lp):
    z = sf.norm_ppf_log(lp)
    # lower-tail quantile: log Phi(z) = log Q(-z)
    assert sf.log_norm_sf(-z) == pytest.approx(lp, rel=1e-9)
