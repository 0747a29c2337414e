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

# Holds utility functions that are NOT explicitly fixtures: independent
# oracles the components are checked against.

from fractions import Fraction

import numpy as np
from scipy import linalg

from components.resampling import SelectionMatrix


def make_matrix(rows, lam=1.0, seed=0):
    """SelectionMatrix from a nested list of 0/1 rows."""
    entries = np.array(rows, dtype=np.uint8)
    B = entries.shape[0]
    return SelectionMatrix(
        lambda_=lam,
        entries=entries,
        subsample_indices=np.zeros((B, 1), dtype=np.int64),
        seed=seed,
    )


def rational_phi(rows):
    """Direct evaluation of the stability estimator in exact arithmetic.

    Returns None when the average selection count is 0 or p."""
    B = len(rows)
    p = len(rows[0])
    freqs = [Fraction(sum(r[j] for r in rows), B) for j in range(p)]
    q = sum(freqs)
    kbar = q / p
    denom = kbar * (1 - kbar)
    if denom == 0:
        return None
    s2 = [Fraction(B, B - 1) * f * (1 - f) for f in freqs]
    return 1 - (sum(s2) / p) / denom


def pareto_oracle(pairs):
    """Indices of points (phi, acc) that no other point weakly dominates."""
    front = []
    for i, (phi_i, acc_i) in enumerate(pairs):
        dominated = False
        for k, (phi_k, acc_k) in enumerate(pairs):
            if k == i:
                continue
            if phi_k >= phi_i and acc_k >= acc_i and (phi_k > phi_i or acc_k > acc_i):
                dominated = True
                break
        if not dominated:
            front.append(i)
    return front


def ols(x, y):
    """(intercept, coefficients) of least squares with an intercept column."""
    design = np.column_stack([np.ones(x.shape[0]), x])
    sol, _, _, _ = linalg.lstsq(design, y)
    return sol[0], sol[1:]


def kkt_gaps(x, y, fit, lam):
    """(worst inactive excess, worst active mismatch) of the Lasso optimality
    conditions for the (1/2n)-scaled objective."""
    n = x.shape[0]
    r = y - fit.intercept - x @ fit.coefficients
    grad = (x - x.mean(axis=0)).T @ r / n
    active = fit.coefficients != 0
    inactive_excess = np.max(np.abs(grad[~active]) - lam, initial=0.0)
    active_mismatch = np.max(
        np.abs(grad[active] - lam * np.sign(fit.coefficients[active])), initial=0.0
    )
    return inactive_excess, active_mismatch
