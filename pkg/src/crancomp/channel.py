"""Uplink SNR models: fixed-mean Rayleigh fading and random placement in a
unit disk with distance path loss under fractional power control."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .specfun import incomplete_gamma_lower_array

_DEGENERATE = 1e-6


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class FixedRayleigh:
    gamma_bar: float  # linear mean SNR

    def __post_init__(self):
        if not self.gamma_bar > 0:
            raise ChannelError("gamma_bar must be positive")


@dataclass(frozen=True)
class PathLossFpc:
    """Uniform user in a unit disk; mean SNR gamma_ud * r^(-eta (1 - s))."""

    gamma_ud: float  # linear SNR at unit distance
    eta: float  # path-loss exponent
    s: float  # compensation factor in [0, 1)

    def __post_init__(self):
        if not self.gamma_ud > 0:
            raise ChannelError("gamma_ud must be positive")
        if not self.eta > 0:
            raise ChannelError("eta must be positive")
        if not 0 <= self.s < 1:
            raise ChannelError("s must lie in [0, 1)")
        if self.exponent <= _DEGENERATE:
            raise ChannelError("eta (1 - s) too small; use FixedRayleigh(gamma_ud)")

    @property
    def exponent(self) -> float:
        return self.eta * (1.0 - self.s)

    @property
    def alpha(self) -> float:
        return 2.0 / self.exponent

    def mean_snr(self, omega):
        """Mean SNR of a user at normalized distance omega."""
        return self.gamma_ud * np.asarray(omega, dtype=float) ** (-self.exponent)


ChannelSpec = Union[FixedRayleigh, PathLossFpc]


def path_loss_fpc(gamma_ud: float, eta: float, s: float) -> ChannelSpec:
    """PathLossFpc, degenerating to FixedRayleigh(gamma_ud) when eta(1-s) ~ 0."""
    if eta * (1.0 - s) <= _DEGENERATE:
        return FixedRayleigh(gamma_ud)
    return PathLossFpc(gamma_ud, eta, s)


def _small_u_terms(alpha, u, n_terms=30):
    # sum_{n>=0} (-u)^n / (n! (alpha + n + shift)) evaluated for shift 0 and 1
    p = np.ones_like(u)
    s0 = np.zeros_like(u)
    s1 = np.zeros_like(u)
    for n in range(n_terms):
        s0 += p / (alpha + n)
        s1 += p / (alpha + n + 1)
        p = p * (-u) / (n + 1)
    return s0, s1


def _as_out(v):
    return float(v) if np.ndim(v) == 0 else v


def snr_cdf(spec: ChannelSpec, gamma):
    """P(SNR <= gamma).

    Path loss: 1 - alpha u^(-alpha) gamma_low(alpha, u), u = gamma/gamma_ud,
    alpha = 2 / (eta (1 - s)).
    """
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ChannelError("gamma must be >= 0")
    if isinstance(spec, FixedRayleigh):
        return _as_out(-np.expm1(-g / spec.gamma_bar))
    a = spec.alpha
    u = g / spec.gamma_ud
    out = np.empty_like(u)
    small = u <= 1.0
    if np.any(small):
        # 1 - alpha*sum_{n>=0}(-u)^n/(n!(alpha+n)), n = 0 term cancels the 1
        s0, _ = _small_u_terms(a, u[small])
        out[small] = -a * (s0 - 1.0 / a)
    big = ~small & np.isfinite(u)
    if np.any(big):
        ub = u[big]
        out[big] = 1.0 - a * incomplete_gamma_lower_array(a, ub, scaled=True)
    out[np.isinf(u)] = 1.0
    return _as_out(np.clip(out, 0.0, 1.0))


def snr_pdf(spec: ChannelSpec, gamma):
    """SNR density; for path loss the derivative of :func:`snr_cdf`."""
    g = np.asarray(gamma, dtype=float)
    if isinstance(spec, FixedRayleigh):
        return _as_out(np.exp(-g / spec.gamma_bar) / spec.gamma_bar)
    a = spec.alpha
    u = g / spec.gamma_ud
    out = np.empty_like(u)
    small = u <= 1.0
    if np.any(small):
        _, s1 = _small_u_terms(a, u[small])
        out[small] = a * s1
    big = ~small
    if np.any(big):
        ub = u[big]
        gl = incomplete_gamma_lower_array(a, ub, scaled=True)
        out[big] = (a * a * gl - a * np.exp(-ub)) / ub
    return _as_out(np.maximum(out, 0.0) / spec.gamma_ud)


def snr_from_uniforms(spec: ChannelSpec, u1, u2=None):
    """Map uniforms in (0, 1] to SNR draws by inverse transforms.

    FixedRayleigh uses `u1` only. PathLossFpc takes r = sqrt(u1) as the
    user distance and `u2` for the exponential fading.
    """
    u1 = np.asarray(u1, dtype=float)
    if isinstance(spec, FixedRayleigh):
        return -spec.gamma_bar * np.log(u1)
    if u2 is None:
        raise ChannelError("path-loss sampling needs two uniform streams")
    r = np.sqrt(u1)
    return -spec.mean_snr(r) * np.log(np.asarray(u2, dtype=float))


def sample_snr(spec: ChannelSpec, rng: np.random.Generator, size=None):
    """Draw SNR samples from an explicit generator (no global state)."""
    # 1 - U keeps the uniforms in (0, 1]
    u1 = 1.0 - rng.random(size)
    u2 = None if isinstance(spec, FixedRayleigh) else 1.0 - rng.random(size)
    return snr_from_uniforms(spec, u1, u2)
