"""Independent quadrature references for the closed forms.

These integrate the defining expressions directly with adaptive
quadrature and share no code path with the closed forms beyond the
model constants.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .analytic import LinearizedInterval
from .channel import PathLossFpc
from .decoder import ComplexityModelParams
from .mcs import McsTable

_Q = dict(epsabs=0.0, epsrel=1e-12, limit=400)


def linearized_integrals_quad(iv: LinearizedInterval, gbar: float) -> tuple[float, float, float]:
    """(J0, J1, J2) of an interval by adaptive quadrature of the chord integrand."""
    def f(g, p):
        return np.log2(iv.a * g + iv.b) ** p * np.exp(-g / gbar) / gbar

    if iv.cut <= iv.lower:
        return 0.0, 0.0, 0.0
    return tuple(integrate.quad(f, iv.lower, iv.cut, args=(p,), **_Q)[0] for p in (0, 1, 2))


def true_fixed_moments_quad(params: ComplexityModelParams, table: McsTable, margin: float,
                            gamma_bar: float) -> tuple[float, float]:
    """(E[C], E[C^2]) integrating the exact gap, Rayleigh with mean gamma_bar."""
    L = params.log2_zeta_m1
    lg = math.log2(params.g2)
    th = table.thresholds * margin
    m1 = m2 = 0.0
    for k in range(table.n_r):
        r = float(table.rates[k])
        lo = float(th[k])
        hi = float(th[k + 1]) if k + 1 < table.n_r else math.inf
        top = min(hi, 2.0 ** (params.g + r) - 1.0)  # clamp point
        if top <= lo:
            continue

        def c(g):
            return r / L * (lg - 2.0 * math.log2(math.log2(1.0 + g) - r))

        pdf = lambda g: math.exp(-g / gamma_bar) / gamma_bar
        m1 += integrate.quad(lambda g: c(g) * pdf(g), lo, top, epsabs=0, epsrel=1e-11, limit=400)[0]
        m2 += integrate.quad(lambda g: c(g) ** 2 * pdf(g), lo, top, epsabs=0, epsrel=1e-11, limit=400)[0]
    return m1, m2


def pathloss_cdf_quad(spec: PathLossFpc, gamma: float) -> float:
    """1 - 2 int_0^1 exp(-gamma w^(eta(1-s)) / gamma_ud) w dw."""
    e = spec.exponent
    u = gamma / spec.gamma_ud
    if u <= 1.0:
        v = integrate.quad(lambda w: math.exp(-u * w ** e) * w, 0.0, 1.0,
                           epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    else:
        # w = u^(-1/e) t puts the mass of the integrand at t ~ 1
        top = u ** (1.0 / e)
        pts = [p for p in (1.0, 10.0) if p < top]
        v = integrate.quad(lambda t: math.exp(-t ** e) * t, 0.0, top, points=pts or None,
                           epsabs=0.0, epsrel=1e-13, limit=400)[0] * u ** (-2.0 / e)
    return 1.0 - 2.0 * v


def ks_distance(sample, cdf, cdf_left=None) -> float:
    """Two-sided Kolmogorov-Smirnov distance of a sample to a CDF callable.

    `cdf_left` gives F(x-) for distributions with atoms; ties in the sample
    are grouped so atoms are compared correctly.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    u, counts = np.unique(x, return_counts=True)
    after = np.cumsum(counts) / n
    before = after - counts / n
    f = np.asarray(cdf(u), dtype=float)
    fl = f if cdf_left is None else np.asarray(cdf_left(u), dtype=float)
    return float(max(np.max(after - f), np.max(fl - before)))


def linearized_i_quad(iv: LinearizedInterval, gbar: float,
                      params: ComplexityModelParams) -> tuple[tuple, tuple]:
    """(I1, I2, I4) of an interval by quadrature, plus the integrals of
    their absolute integrands (scales for relative comparisons)."""
    lg = math.log2(params.g2)
    fs = (lambda c: lg, lambda c: -2.0 * np.log2(c), lambda c: (0.5 * lg - np.log2(c)) ** 2)
    if iv.cut <= iv.lower:
        return (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)
    vals, scales = [], []
    for f in fs:
        w = lambda g, f=f: f(iv.a * g + iv.b) * np.exp(-g / gbar) / gbar
        with warnings.catch_warnings():
            # roundoff warnings near the clamp point, where the integrand vanishes
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            vals.append(integrate.quad(w, iv.lower, iv.cut, **_Q)[0])
            scales.append(integrate.quad(lambda g: abs(w(g)), iv.lower, iv.cut, **_Q)[0])
    return tuple(vals), tuple(scales)
