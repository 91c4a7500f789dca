"""Diagnostics for the decay of survival-probability sequences.

Everything operates on a TailSeries in log space, so geometric tails far below
the double floor are handled exactly like polynomial ones.  Windows are
inclusive integer ranges (lo, hi); when omitted they default to the top
seven-eighths of the series, [n_max // 8, n_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "IndexEstimate",
    "VaropoulosReport",
    "RatioLimitReport",
    "estimate_index",
    "dominated_variation_stat",
    "varopoulos_check",
    "ratio_limit_check",
]


def _resolve_window(tail, window):
    if window is None:
        window = (max(1, tail.n_max // 8), tail.n_max)
    lo, hi = int(window[0]), int(window[1])
    if not (1 <= lo <= hi <= tail.n_max):
        raise ValueError(
            f"window {window} must satisfy 1 <= lo <= hi <= n_max = {tail.n_max}"
        )
    return lo, hi


@dataclass(frozen=True)
class IndexEstimate:
    """Estimated polynomial decay index alpha in p(n) ~ c / n^alpha."""

    alpha_hat: float
    stderr: float
    window: tuple
    method: str


@dataclass(frozen=True)
class VaropoulosReport:
    """Range of n^alpha * p(n) over a window.

    For a genuinely alpha-regular tail the ratio sup/inf stays modest and the
    two-sided bound p(n) in [inf, sup] / n^alpha holds on the window with
    gamma = max(sup, 1/inf).
    """

    inf: float
    sup: float
    ratio: float
    gamma: float
    alpha: float
    window: tuple


@dataclass(frozen=True)
class RatioLimitReport:
    """Observed p([n t]) / p(n) against the regular-variation target t^-alpha."""

    ratio: float
    target: float
    abs_err: float
    rel_err: float
    t: float
    n: int


def estimate_index(tail, window=None, method="loglog_ls") -> IndexEstimate:
    """Estimate the decay index of a tail series.

    Methods:
        loglog_ls: least squares slope of log p against log n (negated).
        ratio:     mean of log2(p(n) / p(2n)) over n with 2n inside the window.
    """
    lo, hi = _resolve_window(tail, window)
    ns = np.arange(lo, hi + 1)
    logs = tail.log_values[ns]
    if method == "loglog_ls":
        if ns.size < 5:
            raise ValueError("log-log fit needs at least 5 points in the window")
        x = np.log(ns.astype(np.float64))
        xm = x - x.mean()
        ym = logs - logs.mean()
        sxx = float(np.dot(xm, xm))
        slope = float(np.dot(xm, ym)) / sxx
        resid = ym - slope * xm
        dof = ns.size - 2
        var = float(np.dot(resid, resid)) / dof / sxx if dof > 0 else 0.0
        return IndexEstimate(-slope, math.sqrt(max(var, 0.0)), (lo, hi), method)
    if method == "ratio":
        base = ns[2 * ns <= hi]
        if base.size == 0:
            raise ValueError("ratio method needs n and 2n both inside the window")
        vals = (tail.log_values[base] - tail.log_values[2 * base]) / math.log(2.0)
        mean = float(vals.mean())
        stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        return IndexEstimate(mean, stderr, (lo, hi), method)
    raise ValueError(f"unknown index estimation method {method!r}")


def dominated_variation_stat(tail, t, window=None) -> float:
    """max over the window of p([n t]) / p(n); bounded iff the tail is dominated.

    Requires 0 < t <= 1 and [lo * t] >= 1 so every numerator index is valid.
    """
    if not (0.0 < t <= 1.0):
        raise ValueError(f"t must lie in (0, 1], got {t}")
    lo, hi = _resolve_window(tail, window)
    ns = np.arange(lo, hi + 1)
    nts = np.floor(ns * t).astype(np.int64)
    if nts[0] < 1:
        raise ValueError(f"[n t] must stay >= 1 on the window; lo * t = {lo * t}")
    return float(np.exp(tail.log_values[nts] - tail.log_values[ns]).max())


def varopoulos_check(tail, alpha, window=None) -> VaropoulosReport:
    """Report inf and sup of n^alpha * p(n) over the window."""
    lo, hi = _resolve_window(tail, window)
    ns = np.arange(lo, hi + 1)
    centered = alpha * np.log(ns.astype(np.float64)) + tail.log_values[ns]
    log_inf = float(centered.min())
    log_sup = float(centered.max())
    inf = math.exp(log_inf)
    sup = math.exp(log_sup)
    return VaropoulosReport(
        inf=inf,
        sup=sup,
        ratio=math.exp(log_sup - log_inf),
        gamma=max(sup, 1.0 / inf) if inf > 0.0 else math.inf,
        alpha=alpha,
        window=(lo, hi),
    )


def ratio_limit_check(tail, t, alpha, n) -> RatioLimitReport:
    """Compare p([n t]) / p(n) with the power-law target t^-alpha."""
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    n = int(n)
    nt = int(math.floor(n * t))
    if not (1 <= nt <= tail.n_max and 1 <= n <= tail.n_max):
        raise ValueError(
            f"both n = {n} and [n t] = {nt} must lie in [1, n_max = {tail.n_max}]"
        )
    ratio = float(math.exp(tail.log_values[nt] - tail.log_values[n]))
    target = t ** (-alpha)
    return RatioLimitReport(
        ratio=ratio,
        target=target,
        abs_err=abs(ratio - target),
        rel_err=abs(ratio - target) / target,
        t=t,
        n=n,
    )
