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

## Coordinate-descent Lasso on the (1/2n)-scaled objective
##     (1/(2n)) ||y - b0 - X b||^2 + lambda ||b||_1
## with an unpenalized intercept, warm-started paths along a decreasing grid,
## and K-fold cross-validation giving lambda_min and lambda_1se.
from dataclasses import dataclass
from typing import List, Optional, Sequence

import logging
import warnings

import numpy as np
from scipy import linalg

from .data import CONSTANT_COLUMN_RTOL, Dataset
from .errors import GridError, ParameterError
from util.random_streams import FOLDS, stream

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100000
DEFAULT_GRID_LENGTH = 100
DEFAULT_FOLDS = 10

GRID_SOURCES = ("cv-derived", "user")


class LassoConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class LassoFit:
    intercept: float
    coefficients: np.ndarray
    lambda_: float
    iterations: int
    converged: bool

    def support(self) -> np.ndarray:
        """Indices of the nonzero coefficients."""
        return np.flatnonzero(self.coefficients)


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray
    source: str = "cv-derived"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise GridError("A lambda grid needs at least 2 values")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise GridError("Lambda grid values must be finite and positive")
        if np.any(np.diff(values) >= 0):
            raise GridError("Lambda grid must be strictly decreasing")
        if self.source not in GRID_SOURCES:
            raise GridError("Unknown grid source {!r}".format(self.source))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "LambdaGrid":
        """User grid: any order accepted, duplicates rejected."""
        v = np.sort(np.asarray(values, dtype=float))[::-1]
        if v.size >= 2 and np.any(np.diff(v) == 0):
            raise GridError("Lambda grid contains duplicate values")
        return cls(values=v, source="user")

    def __len__(self):
        return self.values.size

    def index_of(self, lam: float) -> int:
        """Position of the grid value closest to lam."""
        return int(np.argmin(np.abs(self.values - lam)))


@dataclass(frozen=True)
class CvResult:
    grid: LambdaGrid
    mean_cv_error: np.ndarray
    sd_cv_error: np.ndarray
    lambda_min: float
    lambda_1se: float
    folds: int


class CenteredProblem(object):
    """Least-squares data centered once, so the intercept drops out of the
    coordinate updates and is recovered as mean(y) - mean(x) . beta.

    With standardize=True every column is also scaled to unit variance
    (denominator n) for the fit, and coefficients are mapped back to the
    caller's scale, the way glmnet fits each problem it is given."""

    def __init__(self, x: np.ndarray, y: np.ndarray, standardize: bool = False):
        self.n = x.shape[0]
        self.p = x.shape[1]
        self.x_mean = x.mean(axis=0)
        self.y_mean = float(y.mean())
        xc = x - self.x_mean
        sd = np.sqrt(np.einsum("ij,ij->j", xc, xc) / self.n)
        self.usable = sd > CONSTANT_COLUMN_RTOL * np.maximum(1.0, np.abs(self.x_mean))
        xc[:, ~self.usable] = 0.0
        if standardize:
            self.x_scale = np.where(self.usable, sd, 1.0)
            xc = xc / self.x_scale
        else:
            self.x_scale = np.ones(self.p)
        self.xc = np.asfortranarray(xc)
        self.yc = y - self.y_mean
        self.col_sq = np.einsum("ij,ij->j", self.xc, self.xc) / self.n

    def gradient(self, r: np.ndarray) -> np.ndarray:
        """(1/n) X_c^T r, the correlation of every column with the residual."""
        return self.xc.T @ r / self.n

    def objective(self, beta: np.ndarray, r: np.ndarray, lam: float) -> float:
        return float(r @ r) / (2.0 * self.n) + lam * float(np.abs(beta).sum())

    def to_original(self, beta: np.ndarray) -> np.ndarray:
        return beta / self.x_scale

    def from_original(self, coefficients: np.ndarray) -> np.ndarray:
        return np.asarray(coefficients, dtype=float) * self.x_scale

    def intercept(self, coefficients: np.ndarray) -> float:
        return self.y_mean - float(self.x_mean @ coefficients)

    def _sweep(self, idx, beta, r, lam) -> float:
        max_change = 0.0
        for j in idx:
            xj = self.xc[:, j]
            old = beta[j]
            z = old * self.col_sq[j] + float(xj @ r) / self.n
            if z > lam:
                new = (z - lam) / self.col_sq[j]
            elif z < -lam:
                new = (z + lam) / self.col_sq[j]
            else:
                new = 0.0
            if new != old:
                r -= xj * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        return max_change

    def _sign_step(self, beta, active, lam):
        """Exact minimizer over the active set for the current sign pattern.

        Solves X_S^T (y - X_S b) / n = lam * sign(beta_S) on the nonzero set S
        and keeps b only if its signs agree and every zero active coordinate
        still satisfies |grad_j| <= lam. Returns (beta, r) or None."""
        nz = np.flatnonzero(beta)
        if nz.size == 0 or nz.size >= self.n:
            return None
        signs = np.sign(beta[nz])
        xs = self.xc[:, nz]
        gram = xs.T @ xs / self.n
        rhs = xs.T @ self.yc / self.n - lam * signs
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", linalg.LinAlgWarning)
                b = linalg.solve(gram, rhs, assume_a="pos", check_finite=False)
        except (linalg.LinAlgError, ValueError):
            return None
        if not np.all(np.isfinite(b)) or np.any(np.sign(b) != signs):
            return None
        r = self.yc - xs @ b
        zeros = np.flatnonzero(active & (beta == 0.0))
        if zeros.size and np.max(np.abs(self.xc[:, zeros].T @ r)) / self.n > lam:
            return None
        out = np.zeros(self.p)
        out[nz] = b
        return out, r

    def solve(self, lam, beta0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, debug=False):
        """Active-set cyclic coordinate descent on the internal scale.

        Sweeps the active set until the largest coefficient change is below tol,
        then admits every inactive column violating |grad_j| <= lam and repeats.
        Whenever a sweep leaves a sign pattern not tried before, the exact
        solution for that pattern is tried; the next sweep still has to certify
        convergence. Returns (beta, sweeps, converged)."""
        if beta0 is None or not np.any(beta0):
            beta = np.zeros(self.p)
            r = self.yc.copy()
        else:
            beta = np.array(beta0, dtype=float)
            beta[~self.usable] = 0.0
            r = self.yc - self.xc @ beta
        active = self.usable & (beta != 0.0)
        sweeps = 0
        tried = None
        last_obj = self.objective(beta, r, lam) if debug else None

        while True:
            idx = np.flatnonzero(active)
            if idx.size:
                while True:
                    if sweeps >= max_iter:
                        return beta, sweeps, False
                    sweeps += 1
                    change = self._sweep(idx, beta, r, lam)
                    if debug:
                        last_obj = self._check_descent(beta, r, lam, last_obj, sweeps)
                    if change < tol:
                        break
                    nz = np.flatnonzero(beta)
                    pattern = (nz.tobytes(), (beta[nz] > 0.0).tobytes())
                    if pattern == tried:
                        continue
                    tried = pattern
                    step = self._sign_step(beta, active, lam)
                    if step is not None:
                        beta, r = step
                        if debug:
                            last_obj = self._check_descent(beta, r, lam, last_obj, sweeps)
            grad = self.gradient(r)
            violators = np.flatnonzero(self.usable & ~active & (np.abs(grad) > lam))
            if violators.size == 0:
                return beta, sweeps, True
            active[violators] = True

    def _check_descent(self, beta, r, lam, last_obj, sweeps):
        obj = self.objective(beta, r, lam)
        assert obj <= last_obj + 1e-12 * max(1.0, abs(last_obj)), (
            "Objective increased from {} to {} in sweep {}".format(last_obj, obj, sweeps)
        )
        return obj


def fit_path_arrays(problem: CenteredProblem, lambdas, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> List[LassoFit]:
    """Warm-started fits for a decreasing sequence of lambdas. No warnings raised."""
    fits = []
    beta = None
    for lam in lambdas:
        beta, sweeps, converged = problem.solve(lam, beta, tol, max_iter)
        coefficients = problem.to_original(beta)
        fits.append(
            LassoFit(
                intercept=problem.intercept(coefficients),
                coefficients=coefficients,
                lambda_=float(lam),
                iterations=sweeps,
                converged=converged,
            )
        )
    return fits


def _check_solver_args(tol, max_iter):
    if not tol > 0:
        raise ParameterError("tol must be positive, got {}".format(tol))
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1, got {}".format(max_iter))


def _warn_nonconverged(fit: LassoFit):
    warnings.warn(
        "Lasso did not converge at lambda={:.6g} after {} sweeps".format(
            fit.lambda_, fit.iterations
        ),
        LassoConvergenceWarning,
        stacklevel=3,
    )


def fit_lasso(
    d: Dataset,
    lambda_: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: Optional[np.ndarray] = None,
    debug: bool = False,
    standardize: bool = False,
) -> LassoFit:
    if not lambda_ >= 0:
        raise ParameterError("lambda must be >= 0, got {}".format(lambda_))
    _check_solver_args(tol, max_iter)
    problem = CenteredProblem(d.x, d.y, standardize)
    if warm_start is not None:
        warm_start = problem.from_original(warm_start)
    beta, sweeps, converged = problem.solve(lambda_, warm_start, tol, max_iter, debug)
    coefficients = problem.to_original(beta)
    fit = LassoFit(
        intercept=problem.intercept(coefficients),
        coefficients=coefficients,
        lambda_=float(lambda_),
        iterations=sweeps,
        converged=converged,
    )
    if not converged:
        _warn_nonconverged(fit)
    return fit


def lasso_path(
    d: Dataset,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    rows: Optional[Sequence[int]] = None,
    standardize: bool = False,
) -> List[LassoFit]:
    """Fits along the grid, optionally on a subset of rows."""
    _check_solver_args(tol, max_iter)
    if rows is None:
        problem = CenteredProblem(d.x, d.y, standardize)
    else:
        rows = np.asarray(rows, dtype=int)
        problem = CenteredProblem(d.x[rows], d.y[rows], standardize)
    fits = fit_path_arrays(problem, grid.values, tol, max_iter)
    for f in fits:
        if not f.converged:
            _warn_nonconverged(f)
    return fits


def predict(fit: LassoFit, x: np.ndarray) -> np.ndarray:
    return fit.intercept + np.asarray(x) @ fit.coefficients


def lambda_max(d: Dataset, standardize: bool = False) -> float:
    """Smallest lambda whose solution is the null model: max_j |<x_j, y - ybar>| / n,
    with x_j scaled to unit variance first when standardize is set."""
    if np.ptp(d.y) == 0.0:
        warnings.warn("Response has zero variance; lambda_max is 0", RuntimeWarning)
        return 0.0
    problem = CenteredProblem(d.x, d.y, standardize)
    return float(np.max(np.abs(problem.gradient(problem.yc))))


def make_grid(
    d: Dataset,
    length: int = DEFAULT_GRID_LENGTH,
    ratio: Optional[float] = None,
    standardize: bool = False,
) -> LambdaGrid:
    """Geometric grid from lambda_max down to ratio * lambda_max.

    The default ratio is 1e-4 when n > p and 1e-2 otherwise."""
    if length < 2:
        raise GridError("Grid length must be >= 2, got {}".format(length))
    if ratio is None:
        ratio = 1e-4 if d.n > d.p else 1e-2
    if not (0.0 < ratio < 1.0):
        raise GridError("Grid ratio must lie in (0, 1), got {}".format(ratio))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lmax = lambda_max(d, standardize)
    if lmax <= 0.0:
        raise GridError("lambda_max is 0 (constant response); cannot build a grid")
    return LambdaGrid(values=np.geomspace(lmax, ratio * lmax, length), source="cv-derived")


def fold_assignment(n: int, folds: int, seed: int) -> List[np.ndarray]:
    """Shuffle row indices from the seed, then cut contiguous blocks."""
    perm = stream(seed, FOLDS).permutation(n)
    return [np.sort(block) for block in np.array_split(perm, folds)]


def cross_validate(
    d: Dataset,
    grid: LambdaGrid,
    folds: int = DEFAULT_FOLDS,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    standardize: bool = False,
) -> CvResult:
    """K-fold CV of held-out squared error along the grid.

    Fold errors are averaged with fold-size weights; the standard error is the
    weighted sd of fold errors over sqrt(K - 1). lambda_1se is the largest
    lambda whose mean error is within one standard error of the minimum."""
    if folds < 2:
        raise ParameterError("Need at least 2 folds, got {}".format(folds))
    if folds > d.n:
        raise ParameterError(
            "{} folds leave a fold with no rows (n = {})".format(folds, d.n)
        )
    _check_solver_args(tol, max_iter)

    blocks = fold_assignment(d.n, folds, seed)
    fold_err = np.empty((folds, len(grid)))
    weights = np.empty(folds)
    for k, test_rows in enumerate(blocks):
        train_mask = np.ones(d.n, dtype=bool)
        train_mask[test_rows] = False
        problem = CenteredProblem(d.x[train_mask], d.y[train_mask], standardize)
        fits = fit_path_arrays(problem, grid.values, tol, max_iter)
        for f in fits:
            if not f.converged:
                logger.warning(
                    "CV fold %d did not converge at lambda %.6g", k, f.lambda_
                )
        coefs = np.stack([f.coefficients for f in fits])
        intercepts = np.array([f.intercept for f in fits])
        preds = d.x[test_rows] @ coefs.T + intercepts
        fold_err[k] = np.mean((d.y[test_rows][:, None] - preds) ** 2, axis=0)
        weights[k] = test_rows.size

    cvm = weights @ fold_err / weights.sum()
    cvsd = np.sqrt(
        (weights @ (fold_err - cvm) ** 2) / weights.sum() / (folds - 1)
    )
    i_min = int(np.argmin(cvm))
    i_1se = int(np.flatnonzero(cvm <= cvm[i_min] + cvsd[i_min])[0])
    return CvResult(
        grid=grid,
        mean_cv_error=cvm,
        sd_cv_error=cvsd,
        lambda_min=float(grid.values[i_min]),
        lambda_1se=float(grid.values[i_1se]),
        folds=folds,
    )
