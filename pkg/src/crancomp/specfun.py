"""Special functions used by the closed-form complexity moments.

Everything here is plain scalar Python on top of :mod:`math`; callers
vectorize where needed. Each routine has a ``*_result`` twin that also
returns a rough absolute error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

EULER_GAMMA = 0.57721566490153286061
ZETA2 = math.pi ** 2 / 6.0

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAXIT = 500
_E1_SWITCH = 1.5
_TAIL_SWITCH = 4.0
_SQRT_PI = math.sqrt(math.pi)


class SpecFunDomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class SpecFunResult:
    value: float
    est_abs_error: float

    def __post_init__(self):
        if not (math.isfinite(self.est_abs_error) and self.est_abs_error >= 0):
            raise ValueError("est_abs_error must be finite and >= 0")


# ---------------------------------------------------------------- E1

def _e1_series(x: float) -> tuple[float, float]:
    # E1(x) = -gamma - ln x - sum (-x)^n / (n n!)
    term = 1.0
    s = 0.0
    abs_s = 0.0
    for n in range(1, _MAXIT):
        term *= -x / n
        t = term / n
        s += t
        abs_s += abs(t)
        if abs(t) < 1e-17 * max(abs(s), 1e-300):
            break
    val = -EULER_GAMMA - math.log(x) - s
    err = _EPS * (abs_s + abs(math.log(x)) + 1.0) + abs(t)
    return val, err


def _e1x_cf(x: float) -> tuple[float, float]:
    # modified Lentz for exp(x) E1(x); converges well for x > 1
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h, 4 * _EPS * h


def exp_integral_e1_result(x: float) -> SpecFunResult:
    """E1(x) = int_x^inf exp(-t)/t dt with an error estimate."""
    x = float(x)
    if not x > 0:
        raise SpecFunDomainError(f"E1 requires x > 0, got {x}")
    if x <= _E1_SWITCH:
        v, e = _e1_series(x)
        return SpecFunResult(v, e)
    if x > 745.0:
        return SpecFunResult(0.0, 0.0)
    h, e = _e1x_cf(x)
    w = math.exp(-x)
    return SpecFunResult(h * w, e * w)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) for x > 0.

    Series below x = 1.5, continued fraction above.

    Examples
    --------
    >>> round(exp_integral_e1(1.0), 9)
    0.219383934
    """
    return exp_integral_e1_result(x).value


def exp_integral_e1_scaled(x: float) -> float:
    """exp(x) * E1(x), finite for all x > 0 (no underflow for large x)."""
    x = float(x)
    if not x > 0:
        raise SpecFunDomainError(f"E1 requires x > 0, got {x}")
    if x <= _E1_SWITCH:
        return math.exp(x) * _e1_series(x)[0]
    return _e1x_cf(x)[0]


# ----------------------------------------------------- incomplete gamma

def _gamma_series(a: float, x: float) -> tuple[float, float]:
    # sum_n x^n / (a (a+1) ... (a+n)), times x^a e^-x
    ap = a
    term = 1.0 / a
    s = term
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        s += term
        if abs(term) < abs(s) * 1e-17:
            break
    return s, abs(term)


def _gamma_cf(a: float, x: float) -> float:
    # Lentz for Gamma(a, x) e^x x^-a
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def _check_gamma_args(a, x):
    if not a > 0:
        raise SpecFunDomainError(f"incomplete gamma requires a > 0, got {a}")
    if not x >= 0:
        raise SpecFunDomainError(f"incomplete gamma requires x >= 0, got {x}")


def incomplete_gamma_lower_result(a: float, x: float) -> SpecFunResult:
    a = float(a)
    x = float(x)
    _check_gamma_args(a, x)
    if x == 0.0:
        return SpecFunResult(0.0, 0.0)
    if x < a + 1.0:
        s, tail = _gamma_series(a, x)
        pref = math.exp(a * math.log(x) - x)
        v = pref * s
        return SpecFunResult(v, pref * tail + 8 * _EPS * v)
    gam = math.gamma(a)
    up = math.exp(a * math.log(x) - x) * _gamma_cf(a, x)
    v = gam - up
    return SpecFunResult(v, 8 * _EPS * (gam + up))


def incomplete_gamma_lower(a: float, x: float) -> float:
    """Unnormalized lower incomplete gamma, int_0^x exp(-t) t^(a-1) dt.

    Series for x < a + 1, continued fraction for the complement otherwise.
    """
    return incomplete_gamma_lower_result(a, x).value


def incomplete_gamma_upper(a: float, x: float) -> float:
    """Unnormalized upper incomplete gamma Gamma(a, x) = Gamma(a) - gamma_low(a, x)."""
    a = float(a)
    x = float(x)
    _check_gamma_args(a, x)
    if x == 0.0:
        return math.gamma(a)
    if x < a + 1.0:
        return math.gamma(a) - incomplete_gamma_lower(a, x)
    if x > 745.0 + a * math.log(x):
        return 0.0
    return math.exp(a * math.log(x) - x) * _gamma_cf(a, x)


# ------------------------------------------------------ n! n^2 series

def series_sum_nn2_result(y: float) -> SpecFunResult:
    """sum_{n>=1} y^n / (n! n^2); direct summation except for y < -4."""
    y = float(y)
    if not math.isfinite(y):
        raise SpecFunDomainError("series_sum_nn2 requires a finite argument")
    if y == 0.0:
        return SpecFunResult(0.0, 0.0)
    if y < -_TAIL_SWITCH:
        # direct alternating sum cancels; use the E1 tail identity instead
        t = -y
        g = EULER_GAMMA + math.log(t)
        c = 0.5 * (g * g + ZETA2)
        v = math.exp(-t) * e1_over_t_tail_scaled(t) - c
        return SpecFunResult(v, 1e-14 * (abs(c) + abs(v)))
    p = 1.0
    s = 0.0
    abs_s = 0.0
    n = 0
    while n < 10 * _MAXIT:
        n += 1
        p *= y / n
        t = p / (n * n)
        s += t
        abs_s += abs(t)
        # past the peak of the terms and below resolution
        if n > abs(y) and abs(t) < 1e-16 * abs(s):
            break
    nxt = abs(p * y / (n + 1) / (n + 1) ** 2)
    return SpecFunResult(s, 2 * nxt + 4 * _EPS * abs_s)


def series_sum_nn2(y: float) -> float:
    """Sum of y^n / (n! n^2) for n >= 1.

    Examples
    --------
    >>> round(series_sum_nn2(1.0), 9)
    1.146499073
    """
    return series_sum_nn2_result(y).value


def e1_over_t_tail(t: float) -> float:
    """int_t^inf E1(s)/s ds for t > 0.

    Uses the closed form 0.5*[(gamma_E + ln t)^2 + zeta(2)] + S(-t) where
    S is :func:`series_sum_nn2`. For t > 4 the scaled Laplace form is used.
    """
    if not t > 0:
        raise SpecFunDomainError(f"requires t > 0, got {t}")
    if t > _TAIL_SWITCH:
        return math.exp(-t) * e1_over_t_tail_scaled(t)
    g = EULER_GAMMA + math.log(t)
    return 0.5 * (g * g + ZETA2) + series_sum_nn2(-t)


# Gauss-Laguerre nodes for the scaled tail; built once, lazily
_GL_CACHE: dict[int, tuple[list[float], list[float]]] = {}


def _gauss_laguerre(n: int):
    if n not in _GL_CACHE:
        import numpy as np

        x, w = np.polynomial.laguerre.laggauss(n)
        _GL_CACHE[n] = (x.tolist(), w.tolist())
    return _GL_CACHE[n]


def e1_over_t_tail_scaled(t: float) -> float:
    """exp(t) * int_t^inf E1(s)/s ds.

    Closed form via the series for t <= 4. Above that the equivalent
    Laplace integral int_0^inf exp(-t w) ln(1+w)/(1+w) dw is evaluated by
    Gauss-Laguerre, which is accurate there because the integrand's
    singularity sits at distance t from the origin.
    """
    if not t > 0:
        raise SpecFunDomainError(f"requires t > 0, got {t}")
    if t <= _TAIL_SWITCH:
        return math.exp(t) * e1_over_t_tail(t)
    x, w = _gauss_laguerre(80)
    acc = 0.0
    for xi, wi in zip(x, w):
        u = xi / t
        acc += wi * math.log1p(u) / (1.0 + u)
    return acc / t


# --------------------------------------------------------- inverse erf

def _erfinv_series_coeffs(n: int) -> list[float]:
    # v_0 = 1, v_k = sum_{m<k} v_m v_{k-1-m} / ((m+1)(2m+1))
    v = [1.0]
    for k in range(1, n):
        v.append(sum(v[m] * v[k - 1 - m] / ((m + 1) * (2 * m + 1)) for m in range(k)))
    return v


_V = _erfinv_series_coeffs(25)


def inv_erf_series(y: float, n_terms: int = 25) -> float:
    """Truncated Maclaurin series of erfinv (slow near |y| -> 1)."""
    z = 0.5 * _SQRT_PI * y
    z2 = z * z
    acc = 0.0
    p = z
    for k in range(min(n_terms, len(_V))):
        acc += _V[k] / (2 * k + 1) * p
        p *= z2
    return acc


def _tail_seed(q: float) -> float:
    # leading asymptotics of erfc(x) = q for small q
    L = -math.log(q * _SQRT_PI)
    return math.sqrt(max(L - 0.5 * math.log(max(L, 1e-300)), 1e-12))


def _inv_erfc_small(q: float) -> float:
    """Solve erfc(x) = q for 0 < q <= 1 (x >= 0)."""
    y = 1.0 - q
    x = inv_erf_series(y) if y <= 0.9 else _tail_seed(q)
    for _ in range(6):
        # residual in the complementary form keeps tail precision
        f = math.erfc(x) - q
        d = -2.0 / _SQRT_PI * math.exp(-x * x)
        if d == 0.0:
            break
        step = f / d
        # Halley correction (f'' = -2x f')
        step = step / (1.0 + x * step)
        x -= step
        if abs(step) < 1e-16 * max(1.0, abs(x)):
            break
    return x


def inv_erf(y: float) -> float:
    """Inverse error function on (-1, 1).

    Seeded with the Maclaurin series (or the tail asymptote when
    |y| > 0.9), then polished by Newton-type steps on erf.

    Examples
    --------
    >>> round(inv_erf(0.8), 9)
    0.906193802
    """
    y = float(y)
    if not -1.0 < y < 1.0:
        raise SpecFunDomainError(f"inv_erf requires |y| < 1, got {y}")
    if y == 0.0:
        return 0.0
    ay = abs(y)
    if ay < 0.5:
        x = inv_erf_series(ay)
        for _ in range(6):
            f = math.erf(x) - ay
            step = f / (2.0 / _SQRT_PI * math.exp(-x * x))
            step = step / (1.0 + x * step)
            x -= step
            if abs(step) < 1e-17:
                break
    else:
        x = _inv_erfc_small(1.0 - ay)
    return math.copysign(x, y)


def inv_erfc(q: float) -> float:
    """Solve erfc(x) = q for q in (0, 2); precise when q is tiny."""
    q = float(q)
    if not 0.0 < q < 2.0:
        raise SpecFunDomainError(f"inv_erfc requires 0 < q < 2, got {q}")
    if q <= 1.0:
        return _inv_erfc_small(q) if q < 0.5 else inv_erf(1.0 - q)
    return -inv_erfc(2.0 - q)


def _log_norm_sf_large(x: float) -> tuple[float, float]:
    # ln Q(x) and its derivative for x >> 1 via the asymptotic series
    x2 = x * x
    s = 1.0
    t = 1.0
    ds = 0.0
    for k in range(1, 8):
        t *= -(2 * k - 1) / x2
        s += t
        ds += -2 * k * t / x
    lq = -0.5 * x2 - math.log(x) - 0.5 * math.log(2 * math.pi) + math.log(s)
    dlq = -x - 1.0 / x + ds / s
    return lq, dlq


def norm_ppf_log(log_p: float) -> float:
    """Standard normal quantile at probability exp(log_p), log_p <= 0.

    Works when exp(log_p) underflows: for tiny p the lower tail is
    inverted through the asymptotic series of ln Q(x).
    """
    if log_p >= 0.0:
        raise SpecFunDomainError("norm_ppf_log requires log_p < 0")
    if log_p > -700.0:
        p = math.exp(log_p)
        if p < 0.5:
            return -math.sqrt(2.0) * inv_erfc(2.0 * p)
        # upper half: complement from -expm1 keeps precision
        return math.sqrt(2.0) * inv_erfc(-2.0 * math.expm1(log_p))
    # solve ln Q(x) = log_p, x > 0, then reflect
    x = math.sqrt(-2.0 * log_p)
    for _ in range(50):
        lq, dlq = _log_norm_sf_large(x)
        step = (lq - log_p) / dlq
        x -= step
        if abs(step) < 1e-15 * x:
            break
    return -x


def log_norm_sf(z: float) -> float:
    """ln Q(z) for the standard normal upper tail, stable for large z."""
    z = float(z)
    if z < 30.0:
        return math.log(0.5 * math.erfc(z / math.sqrt(2.0)))
    return _log_norm_sf_large(z)[0]


# ------------------------------------------------- vectorized variants

def incomplete_gamma_lower_array(a: float, x, scaled: bool = False):
    """Array version of :func:`incomplete_gamma_lower` for a scalar `a`.

    Same series / continued-fraction split, iterated over the whole array.
    With ``scaled=True`` returns x^(-a) * gamma_low(a, x) (limit 1/a at
    x = 0), which stays finite for large `a` where the factors do not.
    """
    import numpy as np

    a = float(a)
    x = np.asarray(x, dtype=float)
    if not a > 0 or np.any(x < 0):
        raise SpecFunDomainError("incomplete gamma requires a > 0 and x >= 0")
    out = np.full_like(x, 1.0 / a) if scaled else np.zeros_like(x)
    ser = (x > 0) & (x < a + 1.0)
    if np.any(ser):
        xs = x[ser]
        ap = a
        term = np.full_like(xs, 1.0 / a)
        s = term.copy()
        for _ in range(_MAXIT):
            ap += 1.0
            term *= xs / ap
            s += term
            if np.all(np.abs(term) < np.abs(s) * 1e-17):
                break
        out[ser] = np.exp(-xs) * s if scaled else np.exp(a * np.log(xs) - xs) * s
    cf = x >= a + 1.0
    if np.any(cf):
        xc = x[cf]
        b = xc + 1.0 - a
        c = np.full_like(xc, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, _MAXIT):
            an = -i * (i - a)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = b + an / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h = h * delta
            if np.all(np.abs(delta - 1.0) < _EPS):
                break
        with np.errstate(under="ignore"):
            if scaled:
                out[cf] = np.exp(math.lgamma(a) - a * np.log(xc)) - np.exp(-xc) * h
            else:
                out[cf] = math.gamma(a) - np.exp(a * np.log(xc) - xc) * h
    return out
