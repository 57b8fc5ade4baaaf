import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crancomp import analytic as an
from crancomp.channel import FixedRayleigh, PathLossFpc, path_loss_fpc, sample_snr, snr_cdf, snr_pdf
from crancomp.decoder import ComplexityModelParams, complexity
from crancomp.mcs import make_equally_spaced_table
from crancomp.montecarlo import SimConfig, run
from crancomp.oracles import true_fixed_moments_quad
from crancomp.validation import closed_form_error

P = ComplexityModelParams()
RAY = FixedRayleigh(10.0)
PL = path_loss_fpc(1.0, 2.0, 0.1)


@given(st.integers(2, 50), st.floats(-10.0, 0.0), st.floats(5.0, 30.0), st.floats(0.0, 3.0),
       st.floats(-5.0, 25.0))
def test_closed_form_matches_linearized_quadrature(n_r, first, span, m_db, g_db):
    t = make_equally_spaced_table(n_r, first, first + span)
    assert closed_form_error(P, t, 10 ** (m_db / 10), 10 ** (g_db / 10)) <= 1e-8


def test_linearization_pieces_cover_support(table27):
    pieces = an.linearize(P, table27, 1.0)
    # interior MCS get one chord; the last runs to the clamp point
    assert [iv.k for iv in pieces[:26]] == list(range(1, 27))
    last = [iv for iv in pieces if iv.k == 27]
    assert last[-1].cut == pytest.approx(2 ** (P.g + table27.rates[-1]) - 1, rel=1e-12)
    assert all(iv.a > 0 for iv in pieces)
    for a, b in zip(last, last[1:]):
        assert a.upper == pytest.approx(b.lower, rel=1e-14)
        assert 10 * math.log10(a.upper / a.lower) <= 0.1 + 1e-9


def test_i_integrals_combine_into_moments(table10):
    m1 = m2 = 0.0
    L = P.log2_zeta_m1
    for iv in an.linearize(P, table10, 1.0):
        w = iv.rate / L
        m1 += w * (an.i1(iv, 10.0, P) + an.i2(iv, 10.0, P))
        m2 += w * w * 4 * an.i4(iv, 10.0, P)
    f1, f2 = an.fixed_moments(P, table10, 1.0, 10.0)
    assert m1 == pytest.approx(f1, rel=1e-12) and m2 == pytest.approx(f2, rel=1e-12)


def test_expected_complexity_examples(table10):
    assert an.expected_complexity_fixed(P, table10, 1.0, 1e-6) == pytest.approx(0.0, abs=1e-12)
    assert an.expected_complexity_fixed(P, table10, 1.0, 10.0) == pytest.approx(5.4928, rel=0.01)


def test_variance_of_constant_complexity_is_zero(table10):
    # all mass below the first threshold: C is identically zero
    assert an.variance_complexity_fixed(P, table10, 1.0, 1e-6) == 0.0


@pytest.mark.parametrize("n_r,tol", [(10, 0.06), (30, 0.02), (50, 0.02)])
def test_mean_matches_true_integrand(n_r, tol):
    t = make_equally_spaced_table(n_r)
    for ddb in (0.0, 0.4, 0.9):
        m1, _ = an.fixed_moments(P, t, 10 ** (ddb / 10), 10.0)
        t1, _ = true_fixed_moments_quad(P, t, 10 ** (ddb / 10), 10.0)
        assert abs(m1 - t1) / m1 <= tol


def test_pathloss_limit_is_rayleigh(table27):
    m_fixed = an.expected_complexity_fixed(P, table27, 1.0, 1.0)
    m_pl, _ = an.moments_pathloss(P, table27, 1.0, PathLossFpc(1.0, 2.0, 0.9999))
    assert m_pl == pytest.approx(m_fixed, rel=1e-3)


def test_pathloss_variance_modes(table27):
    m_t, v_t = an.moments_pathloss(P, table27, 1.0, PL, variance="total")
    m_c, v_c = an.moments_pathloss(P, table27, 1.0, PL, variance="conditional")
    assert m_t == m_c
    assert v_t >= v_c  # total adds the spread of the conditional means
    with pytest.raises(ValueError):
        an.moments_pathloss(P, table27, 1.0, PL, variance="other")


def test_pathloss_moments_against_simulation(table27):
    m, v = an.moments_pathloss(P, table27, 1.0, PL)
    g = sample_snr(PL, np.random.Generator(np.random.Philox(key=2)), 10 ** 6)
    c = complexity(g, 1.0, P, table27)
    se = c.std(ddof=1) / math.sqrt(c.size)
    # the closed forms linearize the gap; allow that bias on top of 3 SE
    assert abs(c.mean() - m) <= 3 * se + 0.02 * m
    assert c.var(ddof=1) == pytest.approx(v, rel=0.05)


def test_cdf_limits_and_monotone(table27):
    c = np.linspace(0, 40, 400)
    for ch in (RAY, PL):
        f = an.complexity_cdf(P, table27, 1.0, ch, c)
        assert np.all(np.diff(f) >= -1e-14)
        assert np.all((f >= 0) & (f <= 1 + 1e-14))
        assert an.complexity_cdf(P, table27, 1.0, ch, 1e6) == pytest.approx(1.0, abs=1e-12)


def test_cdf_at_zero_is_clamped_mass(table10):
    # brute force on a fine SNR grid weighted by the density
    g = np.linspace(1e-6, 400.0, 2_000_001)
    w = snr_pdf(RAY, g)
    c = complexity(g, 1.0, P, table10)
    tx = g > table10.thresholds[0]
    f0 = np.sum(w[tx & (c == 0)]) / np.sum(w[tx])
    assert an.complexity_cdf(P, table10, 1.0, RAY, 0.0) == pytest.approx(f0, abs=2e-4)


def test_cdf_median_against_simulation(table10):
    st_ = run(SimConfig(RAY, table10, P, n_trials=10 ** 6, seed=4))
    g = sample_snr(RAY, np.random.Generator(np.random.Philox(key=4)), 10 ** 6)
    c = complexity(g, 1.0, P, table10)
    c_tx = c[g > table10.thresholds[0]]
    med = float(np.median(c_tx))
    assert an.complexity_cdf(P, table10, 1.0, RAY, med) == pytest.approx(0.5, abs=0.005)
    assert st_.n_trials == 10 ** 6


def test_outage_single(table10):
    assert an.outage_complexity_single(P, table10, 1.0, RAY, 0.1) == pytest.approx(10.067, rel=0.02)
    assert an.outage_complexity_single(P, table10, 1.0, RAY, 1 - 1e-12) == pytest.approx(0.0, abs=1e-6)
    prev = math.inf
    for eps in (0.01, 0.05, 0.1, 0.3, 0.6, 0.9):
        v = an.outage_complexity_single(P, table10, 1.0, RAY, eps)
        assert v <= prev + 1e-9
        prev = v


def test_per_cell_constraint():
    assert an.per_cell_constraint(0.1, 1) == pytest.approx(0.1)
    assert an.per_cell_constraint(0.1, 2) == pytest.approx(0.19)
    assert an.per_cell_constraint(0.01, 10) == pytest.approx(0.0956179, abs=5e-8)
    for bad in ((0.0, 1), (1.0, 1), (0.1, 0.5)):
        with pytest.raises(an.MetricsError):
            an.per_cell_constraint(*bad)


# tiny variances are excluded: m + sd * q rounds back to m in double precision
@given(st.floats(0.0, 20.0), st.one_of(st.just(0.0), st.floats(1e-6, 30.0)), st.floats(1e-4, 0.5),
       st.floats(1.0, 1e4))
def test_clt_roundtrip(m, v, eps, n):
    c = an.outage_complexity_clt(m, v, eps, n)
    want = an.per_cell_constraint(eps, n)
    if v == 0:
        assert c == m
        return
    assert an.computational_outage_prob(m, v, n, c) == pytest.approx(want, rel=1e-9)


@given(st.floats(0.1, 20.0), st.floats(0.1, 30.0), st.floats(1e-4, 0.5))
def test_clt_nonincreasing_in_cells(m, v, eps):
    vals = [an.outage_complexity_clt(m, v, eps, n) for n in (1, 2, 3, 5, 10, 100, 1000)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert an.outage_complexity_asymptotic(m, v, eps) <= vals[-1] + 1e-9


def test_computational_outage_at_mean():
    for n in (1, 7, 100):
        assert an.computational_outage_prob(3.0, 2.0, n, 3.0) == pytest.approx(0.5)
    assert an.outage_complexity_asymptotic(4.0, 0.0, 0.1) == 4.0


def test_gain_properties(table27):
    mom = an.complexity_moments(P, table27, 1.0, PL)
    kw = dict(moments=mom)
    assert an.computational_gain(P, table27, 1.0, PL, 0.1, 1, **kw) == pytest.approx(1.0, abs=1e-14)
    gs = [an.computational_gain(P, table27, 1.0, PL, 0.1, n, **kw) for n in (1, 2, 3, 5, 10, 50)]
    assert all(g >= 1 - 1e-14 for g in gs)
    assert all(b >= a for a, b in zip(gs, gs[1:]))
    assert gs[-1] <= an.computational_gain(P, table27, 1.0, PL, 0.1, math.inf, **kw)
    s = an.computational_gain(P, table27, 1.0, PL, 0.1, 2, normalization="scaled", **kw)
    assert s == pytest.approx(2 * gs[1])


def test_diversity_degenerate_and_positive(table27):
    # zero variance puts the CLT budget at the mean, where the outage does not decay
    assert an.computational_diversity(P, table27, 1.0, PL, 0.1, moments=(3.0, 0.0)) == 0.0
    for ec in ("system", "per_cell"):
        assert an.computational_diversity(P, table27, 1.0, PL, 0.1, eps_comp=ec) > 0


def test_average_rate(table27):
    t1 = make_equally_spaced_table(1, 0.0, 10.0)
    want = t1.rates[0] * (1 - snr_cdf(RAY, t1.thresholds[0]))
    assert an.average_rate(t1, 1.0, RAY) == pytest.approx(want, rel=1e-14)
    r = [an.average_rate(table27, 10 ** (d / 10), RAY) for d in np.linspace(0, 1, 21)]
    assert all(b <= a + 1e-15 for a, b in zip(r, r[1:]))


def test_outage_nonincreasing_in_margin(table27):
    for ch in (RAY, PL):
        v = [an.outage_complexity_clt(*an.complexity_moments(P, table27, 10 ** (d / 10), ch), 0.1, 2)
             for d in np.linspace(0, 1, 11)]
        assert all(b <= a + 1e-9 for a, b in zip(v, v[1:]))


def test_crt_positive(table27):
    for n_c in (2, math.inf):
        for d in (0.0, 0.5):
            assert an.complexity_rate_tradeoff(P, table27, PL, 0.1, n_c, 10 ** (d / 10)) > 0


def test_metrics_report(table10):
    r = an.metrics_report(P, table10, RAY, 1.0, 0.1)
    assert r.methods["outage_complexity"] == "cdf_inversion"
    assert r.expected_complexity == pytest.approx(an.expected_complexity_fixed(P, table10, 1.0, 10.0))
    assert r.echo["n_r"] == 10
    r2 = an.metrics_report(P, table10, RAY, 1.0, 0.1, n_c=4)
    assert r2.methods["outage_complexity"] == "clt"
