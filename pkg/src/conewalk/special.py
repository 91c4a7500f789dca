"""Gamma-family special functions used by the wedge endpoint law.

Implemented from scratch on purpose: the package needs log Gamma and the
regularized lower incomplete gamma function at double precision, and carrying
a heavyweight dependency for two functions is not worth it.  Accuracy is
regression-tested against high-precision reference values.
"""

from __future__ import annotations

import math

__all__ = ["log_gamma", "regularized_gamma_p"]

# Lanczos approximation, g = 7, 9 coefficients.  Relative error below 1e-14
# over the positive real axis once the reflection below handles x < 0.5.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if x <= 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        # Reflection keeps the Lanczos sum in its accurate range.
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(acc)


_MAX_ITER = 500
_EPS = 1e-16
_TINY = 1e-300


def _gamma_p_series(a: float, x: float) -> float:
    # Lower series: P(a, x) = x^a e^-x / Gamma(a+1) * sum x^k / ((a+1)...(a+k)).
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise RuntimeError(f"incomplete gamma series failed to converge (a={a}, x={x})")
    log_prefix = a * math.log(x) - x - log_gamma(a)
    return math.exp(log_prefix) * total


def _gamma_q_cont_fraction(a: float, x: float) -> float:
    # Upper tail via Lentz's continued fraction; accurate for x >= a + 1.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
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
    else:
        raise RuntimeError(
            f"incomplete gamma continued fraction failed to converge (a={a}, x={x})"
        )
    log_prefix = a * math.log(x) - x - log_gamma(a)
    return math.exp(log_prefix) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0."""
    if a <= 0.0:
        raise ValueError(f"regularized_gamma_p requires a > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"regularized_gamma_p requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_cont_fraction(a, x)
