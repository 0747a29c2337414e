#!/usr/bin/env python
# MIT License

# Copyright (c) 2024, the stabsel contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

## Selection stability of a binary selection matrix, its confidence intervals,
## the lambda_stable / lambda_stable-1sd rules, and convergence traces over
## sequentially added subsamples.
from dataclasses import dataclass
from math import sqrt
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import norm

from .errors import ParameterError
from .resampling import SelectionMatrix
from util.random_streams import BOOTSTRAP, TRACE, stream

POOR_BELOW = 0.4
EXCELLENT_FROM = 0.75
DEFAULT_CI_LEVEL = 0.95
DEFAULT_N_BOOT = 1000
CI_METHODS = ("bootstrap", "asymptotic")

# Slack on the one-sd rule so phi == max - sd is not lost to rounding.
ONE_SD_SLACK = 1e-12


def classify_band(phi: Optional[float]) -> str:
    if phi is None:
        return "undefined"
    if phi >= EXCELLENT_FROM:
        return "excellent"
    if phi < POOR_BELOW:
        return "poor"
    return "intermediate"


@dataclass(frozen=True)
class StabilityReport:
    lambda_: float
    phi: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    band: str
    B: int

    @property
    def defined(self) -> bool:
        return self.phi is not None


@dataclass(frozen=True)
class ConvergenceTrace:
    lambda_: float
    t_values: np.ndarray
    phi_t: np.ndarray
    ci_low_t: np.ndarray
    ci_high_t: np.ndarray

    @property
    def B(self) -> int:
        return int(self.t_values[-1])


@dataclass(frozen=True)
class LambdaChoice:
    kind: str
    lambda_: Optional[float]
    phi_at_lambda: Optional[float]
    threshold: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lambda_,
            "phi": self.phi_at_lambda,
            "threshold": self.threshold,
        }


def _phi_from_colsums(colsum, B, p):
    """phi for every row of colsum (column sums of the first B rows of M).

    With c_j the column sums and T = sum c_j, the estimator reduces to
        1 - B p sum_j c_j (B - c_j) / ((B - 1) T (B p - T))
    which is computed as one division of two exact integers, so the result is
    the correctly rounded value of the estimator. NaN where T = 0 or T = B p."""
    colsum = np.asarray(colsum, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    total = colsum.sum(axis=-1)
    spread = (colsum * (B[..., None] - colsum)).sum(axis=-1)
    num = B * p * spread
    den = (B - 1) * total * (B * p - total)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = (den - num) / den
    return np.where(den > 0, phi, np.nan)


def _check_ci_args(ci_method, ci_level, n_boot):
    if ci_method is not None and ci_method not in CI_METHODS:
        raise ParameterError(
            "Unknown ci_method {!r}, expected one of {}".format(ci_method, CI_METHODS)
        )
    if not (0.0 < ci_level < 1.0):
        raise ParameterError("ci_level must lie in (0, 1), got {}".format(ci_level))
    if ci_method == "bootstrap" and n_boot < 1:
        raise ParameterError("n_boot must be >= 1, got {}".format(n_boot))


def _bootstrap_interval(entries, p, n_boot, level, rng) -> Tuple[Optional[float], Optional[float]]:
    """Percentile interval of phi over n_boot resamples of the rows of entries.

    Replicates whose phi is undefined are dropped."""
    t = entries.shape[0]
    # All-zero columns contribute nothing but p to the estimator.
    cols = np.flatnonzero(entries.any(axis=0))
    sub = entries[:, cols].astype(float)
    draws = rng.integers(0, t, size=(n_boot, t))
    offsets = draws + (np.arange(n_boot) * t)[:, None]
    counts = np.bincount(offsets.ravel(), minlength=n_boot * t).reshape(n_boot, t)
    colsums = np.rint(counts.astype(float) @ sub).astype(np.int64)
    phis = _phi_from_colsums(colsums, t, p)
    phis = phis[np.isfinite(phis)]
    if phis.size == 0:
        return None, None
    alpha = 1.0 - level
    low, high = np.percentile(phis, [100.0 * alpha / 2, 100.0 * (1.0 - alpha / 2)])
    return float(low), float(high)


def asymptotic_variance(entries: np.ndarray, phi: float) -> float:
    """Plug-in variance of phi from per-subsample influence terms."""
    Z = np.asarray(entries, dtype=float)
    M, d = Z.shape
    pf = Z.mean(axis=0)
    kbar = pf.sum()
    k = Z.sum(axis=1)
    denom = (kbar / d) * (1.0 - kbar / d)
    infl = (
        (Z @ pf) / d
        - k * kbar / d ** 2
        + (phi / 2.0) * (2.0 * k * kbar / d ** 2 - k / d - kbar / d + 1.0)
    ) / denom
    return float(4.0 / M ** 2 * np.sum((infl - infl.mean()) ** 2) * M / (M - 1))


def _asymptotic_interval(entries, phi, level) -> Tuple[float, float]:
    half = norm.ppf(0.5 + level / 2.0) * sqrt(asymptotic_variance(entries, phi))
    return phi - half, phi + half


def _interval(entries, p, phi, ci_method, ci_level, n_boot, rng_factory):
    if phi is None or ci_method is None:
        return None, None
    if ci_method == "asymptotic":
        return _asymptotic_interval(entries, phi, ci_level)
    return _bootstrap_interval(entries, p, n_boot, ci_level, rng_factory())


def estimate_stability(
    m: SelectionMatrix,
    ci_method: Optional[str] = None,
    ci_level: float = DEFAULT_CI_LEVEL,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
) -> StabilityReport:
    """phi = 1 - mean_j(s_j^2) / ((q/p)(1 - q/p)), s_j^2 the unbiased variance
    of column j and q the mean row sum. Undefined (None) when q is 0 or p."""
    if m.B < 2:
        raise ParameterError("Stability needs B >= 2 subsamples, got {}".format(m.B))
    _check_ci_args(ci_method, ci_level, n_boot)
    colsum = m.entries.sum(axis=0, dtype=np.int64)
    raw = float(_phi_from_colsums(colsum, m.B, m.p))
    phi = raw if np.isfinite(raw) else None
    low, high = _interval(
        m.entries, m.p, phi, ci_method, ci_level, n_boot, lambda: stream(seed, BOOTSTRAP)
    )
    return StabilityReport(
        lambda_=m.lambda_, phi=phi, ci_low=low, ci_high=high, band=classify_band(phi), B=m.B
    )


def stability_curve(
    matrices: Sequence[SelectionMatrix],
    ci_method: Optional[str] = "bootstrap",
    ci_level: float = DEFAULT_CI_LEVEL,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
) -> List[StabilityReport]:
    """One report per matrix, in the same order. Bootstrap draws for grid
    index k come from the (seed, k) stream."""
    _check_ci_args(ci_method, ci_level, n_boot)
    curve = []
    for k, m in enumerate(matrices):
        report = estimate_stability(m)
        low, high = _interval(
            m.entries,
            m.p,
            report.phi,
            ci_method,
            ci_level,
            n_boot,
            lambda: stream(seed, BOOTSTRAP, k),
        )
        curve.append(
            StabilityReport(
                lambda_=report.lambda_,
                phi=report.phi,
                ci_low=low,
                ci_high=high,
                band=report.band,
                B=report.B,
            )
        )
    return curve


def find_lambda_stable(curve: Sequence[StabilityReport], threshold: float = EXCELLENT_FROM) -> LambdaChoice:
    """Smallest lambda whose defined phi is >= threshold."""
    if len(curve) == 0:
        raise ParameterError("Stability curve is empty")
    hits = [r for r in curve if r.defined and r.phi >= threshold]
    if not hits:
        return LambdaChoice(kind="none", lambda_=None, phi_at_lambda=None, threshold=threshold)
    best = min(hits, key=lambda r: r.lambda_)
    return LambdaChoice(
        kind="stable", lambda_=best.lambda_, phi_at_lambda=best.phi, threshold=threshold
    )


def find_lambda_stable_1sd(curve: Sequence[StabilityReport]) -> LambdaChoice:
    """Smallest lambda whose phi is within one sd (across the grid) of the maximum."""
    defined = [r for r in curve if r.defined]
    if len(defined) < 2:
        raise ParameterError(
            "lambda_stable-1sd needs at least 2 defined stability values, got {}".format(
                len(defined)
            )
        )
    phis = np.array([r.phi for r in defined])
    cut = float(phis.max() - phis.std(ddof=1))
    best = min(
        (r for r in defined if r.phi >= cut - ONE_SD_SLACK), key=lambda r: r.lambda_
    )
    return LambdaChoice(
        kind="stable-1sd", lambda_=best.lambda_, phi_at_lambda=best.phi, threshold=cut
    )


def convergence_trace(
    m: SelectionMatrix,
    ci_level: float = DEFAULT_CI_LEVEL,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
    ci_method: str = "bootstrap",
) -> ConvergenceTrace:
    """phi of the first t rows for t = 2..B, with an interval at every t.

    Running column sums make every phi_t exact, and phi_t at t = B is the same
    number estimate_stability returns."""
    if m.B < 2:
        raise ParameterError("A trace needs B >= 2 subsamples, got {}".format(m.B))
    if ci_method is None:
        raise ParameterError("convergence_trace needs a ci_method")
    _check_ci_args(ci_method, ci_level, n_boot)

    running = np.cumsum(m.entries, axis=0, dtype=np.int64)[1:]
    t_values = np.arange(2, m.B + 1)
    phi_t = _phi_from_colsums(running, t_values, m.p)

    low = np.full(t_values.size, np.nan)
    high = np.full(t_values.size, np.nan)
    for i, t in enumerate(t_values):
        if not np.isfinite(phi_t[i]):
            continue
        lo, hi = _interval(
            m.entries[:t],
            m.p,
            float(phi_t[i]),
            ci_method,
            ci_level,
            n_boot,
            lambda: stream(seed, TRACE, int(t)),
        )
        if lo is not None:
            low[i], high[i] = lo, hi
    return ConvergenceTrace(
        lambda_=m.lambda_, t_values=t_values, phi_t=phi_t, ci_low_t=low, ci_high_t=high
    )


def suggest_cutoff(trace: ConvergenceTrace, window: int = 50, eps: float = 0.01) -> int:
    """First t after which the next `window` values of phi_t all stay within
    eps of phi_t. Returns B when no such t exists."""
    if window < 2:
        raise ParameterError("window must be >= 2, got {}".format(window))
    if not eps > 0:
        raise ParameterError("eps must be positive, got {}".format(eps))
    phi = trace.phi_t
    w = min(window, phi.size)
    spans = sliding_window_view(phi, w)
    with np.errstate(invalid="ignore"):
        spread = np.max(np.abs(spans - spans[:, :1]), axis=1)
    settled = np.flatnonzero(np.isfinite(spread) & (spread <= eps))
    if settled.size == 0:
        return trace.B
    return int(trace.t_values[settled[0]])
