"""Closed-form and semi-analytic complexity metrics.

Conventions
-----------
Within MCS interval k the SNR ranges over [margin*th_k, margin*th_{k+1});
the rate there is R_k and the gap l = log2(1 + gamma) - R_k uses the true
SNR. The gap is replaced by chords c(gamma) = a*gamma + b on each interval
(the open-ended last interval is cut at the point where the complexity
reaches zero and split into short chord pieces). Complexity is zero below
the first scaled threshold and wherever c exceeds sqrt(g2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .channel import ChannelSpec, FixedRayleigh, PathLossFpc, snr_cdf
from .decoder import ComplexityModelParams
from .mcs import McsTable
from .specfun import (
    e1_over_t_tail_scaled,
    exp_integral_e1_scaled,
    log_norm_sf,
    norm_ppf_log,
)

LN2 = math.log(2.0)


class MetricsError(ArithmeticError):
    pass


# ------------------------------------------------------------ linearization

@dataclass(frozen=True)
class LinearizedInterval:
    """Chord c(gamma) = a*gamma + b of the gap on [lower, upper].

    `cut` is where the integrand stops (upper, or the point where c reaches
    sqrt(g2) and the complexity is clamped to zero).
    """

    k: int
    rate: float
    a: float
    b: float
    lower: float
    upper: float
    cut: float

    def c(self, gamma):
        return self.a * np.asarray(gamma, dtype=float) + self.b


def _gap(gamma, rate):
    return math.log2(1.0 + gamma) - rate


def linearize(params: ComplexityModelParams, table: McsTable, margin: float = 1.0,
              last_piece_db: float = 0.1) -> list[LinearizedInterval]:
    """Chord pieces covering the support of the complexity.

    Interior MCS intervals get one chord each. The last interval runs up to
    the exact zero-complexity point 2^(G + R_N) - 1 and is split into
    pieces no wider than `last_piece_db`.
    """
    g = params.g
    th = table.thresholds * margin
    out = []
    n = table.n_r
    for k in range(n):
        r = float(table.rates[k])
        lo = float(th[k])
        if k + 1 < n:
            edges = [lo, float(th[k + 1])]
        else:
            gz = 2.0 ** (g + r) - 1.0
            if gz <= lo:
                continue
            m = max(1, int(math.ceil(10.0 * math.log10(gz / lo) / last_piece_db)))
            edges = list(lo * (gz / lo) ** (np.arange(m + 1) / m))
            edges[-1] = gz
        for x0, x1 in zip(edges[:-1], edges[1:]):
            l0 = _gap(x0, r)
            l1 = _gap(x1, r)
            if l0 <= 0:
                raise MetricsError(f"non-positive gap at the start of MCS interval {k + 1}")
            if l0 >= g:
                continue  # complexity already clamped to zero
            a = (l1 - l0) / (x1 - x0)
            b = l0 - a * x0
            cut = x1 if l1 <= g else (g - b) / a
            out.append(LinearizedInterval(k + 1, r, a, b, x0, x1, min(cut, x1)))
    return out


# ------------------------------------------------- per-interval closed forms

def _point_terms(iv: LinearizedInterval, x: float, gbar: float):
    # P, P*ln c, P*ln^2 c, P*e^t E1(t), P*[ln c * e^t E1(t) + e^t T(t)]
    p = math.exp(-x / gbar)
    if p == 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    c = iv.a * x + iv.b
    lc = math.log(c)
    t = c / (iv.a * gbar)
    e1x = exp_integral_e1_scaled(t)
    return p, p * lc, p * lc * lc, p * e1x, p * (lc * e1x + e1_over_t_tail_scaled(t))


def interval_integrals(iv: LinearizedInterval, gbar: float) -> tuple[float, float, float]:
    """(J0, J1, J2) for an exponential SNR with mean `gbar`.

    J0 = P(lower < gamma < cut), J1 = E[log2 c; interval],
    J2 = E[(log2 c)^2; interval].
    """
    x0, x1 = iv.lower, iv.cut
    if x1 <= x0:
        return 0.0, 0.0, 0.0
    p0, pl0, pll0, pe0, ph0 = _point_terms(iv, x0, gbar)
    p1, pl1, pll1, pe1, ph1 = _point_terms(iv, x1, gbar)
    j0 = p0 * -math.expm1(-(x1 - x0) / gbar)
    # integration by parts; E1 terms from the substitution t = c / (a gbar)
    jl = (pl0 - pl1) + (pe0 - pe1)
    jll = (pll0 - pll1) + 2.0 * (ph0 - ph1)
    return j0, jl / LN2, jll / (LN2 * LN2)


def i1(iv: LinearizedInterval, gbar: float, params: ComplexityModelParams) -> float:
    """log2(g2) * P(interval)."""
    return math.log2(params.g2) * interval_integrals(iv, gbar)[0]


def i2(iv: LinearizedInterval, gbar: float, params: ComplexityModelParams) -> float:
    """-2 E[log2 c; interval]."""
    return -2.0 * interval_integrals(iv, gbar)[1]


def i4(iv: LinearizedInterval, gbar: float, params: ComplexityModelParams) -> float:
    """E[(log2(g2)/2 - log2 c)^2; interval]."""
    j0, j1, j2 = interval_integrals(iv, gbar)
    h = 0.5 * math.log2(params.g2)
    return h * h * j0 - 2.0 * h * j1 + j2


def _fixed_moments(pieces, params, gbar):
    lg = math.log2(params.g2)
    L = params.log2_zeta_m1
    m1 = 0.0
    m2 = 0.0
    for iv in pieces:
        j0, j1, j2 = interval_integrals(iv, gbar)
        w = iv.rate / L
        m1 += w * (lg * j0 - 2.0 * j1)
        m2 += w * w * (lg * lg * j0 - 4.0 * lg * j1 + 4.0 * j2)
    return m1, m2


def fixed_moments(params: ComplexityModelParams, table: McsTable, margin: float,
                  gamma_bar: float, pieces: Optional[list] = None) -> tuple[float, float]:
    """(E[C], E[C^2]) under Rayleigh fading with mean SNR `gamma_bar`."""
    if not gamma_bar > 0:
        raise MetricsError("gamma_bar must be positive")
    if pieces is None:
        pieces = linearize(params, table, margin)
    return _fixed_moments(pieces, params, gamma_bar)


def expected_complexity_fixed(params: ComplexityModelParams, table: McsTable, margin: float,
                              gamma_bar: float) -> float:
    """Mean complexity for a fixed average SNR (closed form)."""
    return fixed_moments(params, table, margin, gamma_bar)[0]


def variance_complexity_fixed(params: ComplexityModelParams, table: McsTable, margin: float,
                              gamma_bar: float) -> float:
    """Complexity variance for a fixed average SNR (closed form)."""
    m1, m2 = fixed_moments(params, table, margin, gamma_bar)
    return max(m2 - m1 * m1, 0.0)


def moments_pathloss(params: ComplexityModelParams, table: McsTable, margin: float,
                     spec: PathLossFpc, variance: str = "total",
                     epsrel: float = 1e-9) -> tuple[float, float]:
    """Mean and variance of the complexity of a uniformly placed user.

    The user distance has density 2*omega on [0, 1]; with v = omega^2 the
    averages become plain integrals over v in [0, 1].

    Parameters
    ----------
    variance : {"total", "conditional"}
        "total" integrates the second moment and subtracts the squared
        mean (law of total variance). "conditional" averages the
        per-distance variances only, dropping the spread of the
        conditional means.
    """
    if variance not in ("total", "conditional"):
        raise ValueError("variance must be 'total' or 'conditional'")
    pieces = linearize(params, table, margin)
    cache: dict[float, tuple[float, float]] = {}

    def mom(v):
        if v not in cache:
            if v <= 0.0:
                cache[v] = (0.0, 0.0)
            else:
                gbar = spec.gamma_ud * v ** (-0.5 * spec.exponent)
                cache[v] = _fixed_moments(pieces, params, gbar)
        return cache[v]

    # the integrands vary on a log scale in v; break the range up
    brk = [0.0] + list(np.logspace(-8, 0, 17))
    opts = dict(epsrel=epsrel, epsabs=0.0, limit=200)

    def q(f):
        with warnings.catch_warnings():
            # roundoff notices on near-flat pieces; the result is checked below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return sum(integrate.quad(f, lo, hi, **opts)[0] for lo, hi in zip(brk[:-1], brk[1:]))

    mean = q(lambda v: mom(v)[0])
    if variance == "total":
        var = q(lambda v: mom(v)[1]) - mean * mean
    else:
        var = q(lambda v: mom(v)[1] - mom(v)[0] ** 2)
    if var < 0 and var > -1e-9 * max(1.0, mean * mean):
        var = 0.0
    if not (math.isfinite(mean) and math.isfinite(var)) or var < 0:
        raise MetricsError("path-loss moment quadrature failed")
    return mean, var


def complexity_moments(params: ComplexityModelParams, table: McsTable, margin: float,
                       channel: ChannelSpec, variance: str = "total") -> tuple[float, float]:
    """(mean, variance) dispatched on the channel model."""
    if isinstance(channel, FixedRayleigh):
        m1, m2 = fixed_moments(params, table, margin, channel.gamma_bar)
        return m1, max(m2 - m1 * m1, 0.0)
    return moments_pathloss(params, table, margin, channel, variance=variance)


# ------------------------------------------------------------------- CDF

def _max_complexity(params, table, margin):
    L = params.log2_zeta_m1
    lg = math.log2(params.g2)
    th = table.thresholds * margin
    best = 0.0
    for k in range(table.n_r):
        l0 = _gap(th[k], table.rates[k])
        best = max(best, table.rates[k] / L * (lg - 2.0 * math.log2(l0)))
    return best


def complexity_cdf(params: ComplexityModelParams, table: McsTable, margin: float,
                   channel: ChannelSpec, c_thr, conditioned: bool = True):
    """P(C <= c_thr), by default conditioned on transmission.

    Within each MCS interval the complexity decreases in SNR, so the event
    is gamma >= gamma_k,min with gamma_k,min the SNR where the gap reaches
    g * 2^(-c_thr * log2(zeta - 1) / (2 R_k)). Accepts arrays of thresholds.
    """
    c = np.atleast_1d(np.asarray(c_thr, dtype=float))
    L = params.log2_zeta_m1
    th = table.thresholds * margin
    hi = np.append(th[1:], np.inf)
    fin = np.isfinite(hi)
    f_hi = np.ones_like(hi)
    f_hi[fin] = snr_cdf(channel, hi[fin])
    f1 = float(snr_cdf(channel, th[0]))
    p_tx = 1.0 - f1
    if conditioned and p_tx <= 0:
        raise MetricsError("no transmission probability mass")
    out = np.empty(c.shape)
    step = max(1, (1 << 20) // table.n_r)
    for s0 in range(0, c.size, step):
        cc = np.maximum(c[s0:s0 + step], 0.0)[:, None]
        dr = params.g * 2.0 ** (-cc * L / (2.0 * table.rates[None, :]))
        gstar = 2.0 ** (dr + table.rates[None, :]) - 1.0
        gmin = np.maximum(th[None, :], np.minimum(hi[None, :], gstar))
        f_min = np.ones_like(gmin)
        ok = np.isfinite(gmin)
        f_min[ok] = snr_cdf(channel, gmin[ok])
        mass = np.sum(f_hi[None, :] - f_min, axis=1)
        out[s0:s0 + step] = mass / p_tx if conditioned else f1 + mass
    out = np.where(c < 0, 0.0, np.clip(out, 0.0, 1.0))
    return float(out[0]) if np.ndim(c_thr) == 0 else out


def outage_complexity_single(params: ComplexityModelParams, table: McsTable, margin: float,
                             channel: ChannelSpec, eps_hat: float, conditioned: bool = True,
                             tol: float = 1e-9) -> float:
    """Smallest C with 1 - F_C(C) <= eps_hat, by bisection."""
    if not 0 < eps_hat < 1:
        raise MetricsError("eps_hat must lie in (0, 1)")
    F = lambda c: complexity_cdf(params, table, margin, channel, c, conditioned)
    if 1.0 - F(0.0) <= eps_hat:
        return 0.0
    lo, hi = 0.0, _max_complexity(params, table, margin) + 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 1.0 - F(mid) <= eps_hat:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------- CLT pooling

def per_cell_constraint(eps_hat: float, n_c: float) -> float:
    """System outage target 1 - (1 - eps_hat)^n_c."""
    if not 0 < eps_hat < 1:
        raise MetricsError("eps_hat must lie in (0, 1)")
    if not n_c >= 1:
        raise MetricsError("n_c must be >= 1")
    return -math.expm1(n_c * math.log1p(-eps_hat))


def outage_complexity_clt(mean: float, variance: float, eps_hat: float, n_c: float) -> float:
    """Per-cell budget for n_c pooled cells under the CLT.

    mean + sqrt(variance / n_c) * Phi^-1((1 - eps_hat)^n_c), with the
    normal quantile taken in log space so large n_c does not underflow.
    """
    if variance < 0:
        raise MetricsError("variance must be >= 0")
    if not 0 < eps_hat < 1:
        raise MetricsError("eps_hat must lie in (0, 1)")
    if not n_c >= 1:
        raise MetricsError("n_c must be >= 1")
    if variance == 0:
        return mean
    z = norm_ppf_log(n_c * math.log1p(-eps_hat))
    return mean + math.sqrt(variance / n_c) * z


def outage_complexity_asymptotic(mean: float, variance: float, eps_hat: float) -> float:
    """Limit of :func:`outage_complexity_clt` as n_c grows without bound."""
    if variance < 0:
        raise MetricsError("variance must be >= 0")
    return mean - math.sqrt(2.0 * variance * -math.log1p(-eps_hat))


def log_computational_outage_prob(mean: float, variance: float, n_c: float, c_max: float) -> float:
    """Natural log of :func:`computational_outage_prob`."""
    if variance == 0:
        return 0.0 if mean > c_max else -math.inf
    z = (c_max - mean) * math.sqrt(n_c / variance)
    return log_norm_sf(z)


def computational_outage_prob(mean: float, variance: float, n_c: float, c_max: float) -> float:
    """CLT estimate of P(sum of n_c complexities > n_c * c_max)."""
    if variance == 0:
        return 1.0 if mean > c_max else 0.0
    z = (c_max - mean) * math.sqrt(n_c / variance)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _outage(params, table, margin, channel, eps_hat, n_c, method, variance, moments=None):
    if method == "cdf_inversion":
        if n_c != 1:
            raise MetricsError("cdf inversion only covers a single cell")
        return outage_complexity_single(params, table, margin, channel, eps_hat)
    m, v = moments if moments is not None else complexity_moments(params, table, margin, channel, variance)
    if n_c is None or math.isinf(n_c):
        return outage_complexity_asymptotic(m, v, eps_hat)
    return outage_complexity_clt(m, v, eps_hat, n_c)


def computational_gain(params: ComplexityModelParams, table: McsTable, margin: float,
                       channel: ChannelSpec, eps_hat: float, n_c: Optional[float],
                       normalization: str = "per_cell", numerator: str = "clt",
                       variance: str = "total", moments=None) -> float:
    """Single-cell outage budget over the pooled per-cell budget.

    Parameters
    ----------
    n_c : float or None
        Number of pooled cells; None or inf gives the asymptotic gain.
    normalization : {"per_cell", "scaled"}
        "scaled" multiplies by n_c, i.e. reads the pooled budget as a
        per-cell value in n_c * C_out(1) / C_out(n_c).
    numerator : {"clt", "cdf_inversion"}
        How the single-cell budget is obtained.
    """
    if moments is None:
        moments = complexity_moments(params, table, margin, channel, variance)
    num = _outage(params, table, margin, channel, eps_hat, 1, numerator, variance, moments)
    den = _outage(params, table, margin, channel, eps_hat, n_c, "clt", variance, moments)
    if den <= 0:
        raise MetricsError("non-positive pooled budget: gain unbounded")
    g = num / den
    if normalization == "scaled":
        g *= math.inf if n_c is None else n_c
    elif normalization != "per_cell":
        raise ValueError("normalization must be 'per_cell' or 'scaled'")
    return g


def computational_diversity(params: ComplexityModelParams, table: McsTable, margin: float,
                            channel: ChannelSpec, eps_hat: float, eps_comp: str = "system",
                            c_max: str = "clt", variance: str = "total", h: float = 1e-3,
                            moments=None) -> float:
    """-d log10(eps_comp(n_c, C_max)) / d n_c at n_c = 1.

    C_max is the single-cell outage budget. The derivative is a central
    difference over a continuous n_c.

    Parameters
    ----------
    eps_comp : {"system", "per_cell"}
        "system" differentiates the pooled outage probability itself;
        "per_cell" first maps it back to the per-cell level
        1 - (1 - eps)^(1 / n_c).
    c_max : {"clt", "cdf_inversion"}
    """
    if moments is None:
        moments = complexity_moments(params, table, margin, channel, variance)
    m, v = moments
    cm = _outage(params, table, margin, channel, eps_hat, 1, c_max, variance, moments)
    if v == 0:
        return math.inf if cm > m else 0.0

    def log10_eps(n):
        le = log_computational_outage_prob(m, v, n, cm)
        if eps_comp == "per_cell":
            # 1 - (1 - e)^(1/n) computed in log space
            le = math.log(-math.expm1(math.log1p(-math.exp(le)) / n))
        elif eps_comp != "system":
            raise ValueError("eps_comp must be 'system' or 'per_cell'")
        return le / math.log(10.0)

    return -(log10_eps(1.0 + h) - log10_eps(1.0 - h)) / (2.0 * h)


def average_rate(table: McsTable, margin: float, channel: ChannelSpec) -> float:
    """Expected selected rate, counting no-transmission draws as zero."""
    th = table.thresholds * margin
    f = np.append(snr_cdf(channel, th), 1.0)
    return float(np.sum(np.diff(f) * table.rates))


def complexity_rate_tradeoff(params: ComplexityModelParams, table: McsTable, channel: ChannelSpec,
                             eps_hat: float, n_c: Optional[float], margin: float,
                             step_db: float = 0.02, variance: str = "total") -> float:
    """Rate change per unit of outage-budget change as the margin moves.

    Both derivatives are taken on the dB margin axis with step `step_db`.
    Central differences are used when margin - step stays >= 0 dB, and a
    second-order forward difference otherwise.
    """
    d0 = 10.0 * math.log10(margin)

    def at(d_db):
        mg = 10.0 ** (d_db / 10.0)
        c = _outage(params, table, mg, channel, eps_hat, n_c, "clt", variance)
        return average_rate(table, mg, channel), c

    if d0 - step_db >= -1e-12:
        (rp, cp), (rm, cm) = at(d0 + step_db), at(d0 - step_db)
        dr, dc = rp - rm, cp - cm
    else:
        (r0, c0), (r1, c1), (r2, c2) = at(d0), at(d0 + step_db), at(d0 + 2 * step_db)
        dr, dc = -3 * r0 + 4 * r1 - r2, -3 * c0 + 4 * c1 - c2
    if dc == 0:
        raise MetricsError("zero complexity derivative")
    return dr / dc


# -------------------------------------------------------------- report

@dataclass
class MetricsReport:
    expected_complexity: float
    variance_complexity: float
    outage_complexity: float
    expected_rate: float
    methods: dict = field(default_factory=dict)
    echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variance_complexity < 0 or self.outage_complexity < 0:
            raise MetricsError("report invariants violated")


def metrics_report(params: ComplexityModelParams, table: McsTable, channel: ChannelSpec,
                   margin: float, eps_hat: float, n_c: int = 1,
                   variance: str = "total") -> MetricsReport:
    m, v = complexity_moments(params, table, margin, channel, variance)
    if n_c == 1:
        c_out = outage_complexity_single(params, table, margin, channel, eps_hat)
        c_method = "cdf_inversion"
    else:
        c_out = outage_complexity_clt(m, v, eps_hat, n_c)
        c_method = "clt"
    mom_method = "closed_form" if isinstance(channel, FixedRayleigh) else "quadrature"
    return MetricsReport(
        m, v, max(c_out, 0.0), average_rate(table, margin, channel),
        methods=dict(expected_complexity=mom_method, variance_complexity=mom_method,
                     outage_complexity=c_method, expected_rate="closed_form"),
        echo=dict(params=params, n_r=table.n_r, channel=channel, margin=margin,
                  eps_hat=eps_hat, n_c=n_c, variance=variance),
    )
