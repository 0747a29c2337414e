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

## Stability selection over a lambda grid: B half-size subsamples, a Lasso path
## per subsample, and one binary selection matrix per grid value.
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from .data import Dataset, apply_standardization
from .errors import ParameterError
from .lasso import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    CenteredProblem,
    LambdaGrid,
    fit_path_arrays,
)
from parallel import Invoker
from util.random_streams import SUBSAMPLE, check_seed, stream

logger = logging.getLogger(__name__)


@dataclass
class SelectionMatrix:
    """M(lambda): entries[b, j] = 1 iff variable j was selected on subsample b.

    coefficients (B x p) and intercepts (B) are only kept when a run asks for
    them, since they are needed for held-out MSE and nothing else."""

    lambda_: float
    entries: np.ndarray
    subsample_indices: np.ndarray
    seed: int
    nonconverged: Tuple[int, ...] = ()
    coefficients: Optional[np.ndarray] = None
    intercepts: Optional[np.ndarray] = None

    @property
    def B(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class SelectionFrequencies:
    lambda_: float
    freq: np.ndarray


@dataclass(frozen=True)
class AccuracyCurve:
    lambdas: np.ndarray
    mse: np.ndarray
    n_test: int


def draw_subsample(n: int, seed: int, b: int, k: Optional[int] = None) -> np.ndarray:
    """floor(n/2) distinct rows for subsample b (and grid index k when streams are per-lambda)."""
    index = (b,) if k is None else (b, k)
    rng = stream(seed, SUBSAMPLE, *index)
    return np.sort(rng.choice(n, size=n // 2, replace=False))


def fit_subsample(
    b,
    x=None,
    y=None,
    lambdas=None,
    seed=0,
    keep_coefficients=False,
    independent_per_lambda=False,
    tol=DEFAULT_TOL,
    max_iter=DEFAULT_MAX_ITER,
    standardize=False,
):
    """All fits for subsample b. Module-level so worker processes can run it.

    Returns a dict with rows (m or K x m), support (K x p bool), the grid
    indices that did not converge, and optionally coefficients/intercepts."""
    n = x.shape[0]
    K = len(lambdas)
    if independent_per_lambda:
        rows = np.stack([draw_subsample(n, seed, b, k) for k in range(K)])
        fits = []
        for k in range(K):
            problem = CenteredProblem(x[rows[k]], y[rows[k]], standardize)
            fits.extend(fit_path_arrays(problem, [lambdas[k]], tol, max_iter))
    else:
        rows = draw_subsample(n, seed, b)
        problem = CenteredProblem(x[rows], y[rows], standardize)
        fits = fit_path_arrays(problem, lambdas, tol, max_iter)

    coefs = np.stack([f.coefficients for f in fits])
    out = {
        "rows": rows,
        "support": coefs != 0.0,
        "nonconverged": [k for k, f in enumerate(fits) if not f.converged],
    }
    if keep_coefficients:
        out["coefficients"] = coefs
        out["intercepts"] = np.array([f.intercept for f in fits])
    return out


def run_stability_selection(
    d: Dataset,
    grid: LambdaGrid,
    B: int,
    seed: int,
    threads: int = 1,
    keep_coefficients: bool = False,
    independent_per_lambda: bool = False,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    standardize: bool = False,
    progress: bool = False,
) -> List[SelectionMatrix]:
    """One SelectionMatrix per grid value, in grid order.

    With standardize set, every subsample is rescaled to unit column variance
    before its fits and coefficients are reported on the scale of d.

    Subsample b depends only on (seed, b), so the same B subsamples serve every
    lambda and the output does not depend on threads."""
    if B < 2:
        raise ParameterError("B must be >= 2, got {}".format(B))
    d.require_resamplable()
    try:
        seed = check_seed(seed)
    except ValueError as e:
        raise ParameterError(str(e))

    job_kwargs = {
        "x": d.x,
        "y": d.y,
        "lambdas": np.asarray(grid.values),
        "seed": seed,
        "keep_coefficients": keep_coefficients,
        "independent_per_lambda": independent_per_lambda,
        "tol": tol,
        "max_iter": max_iter,
        "standardize": standardize,
    }
    if threads <= 1:
        results = {
            b: fit_subsample(b, **job_kwargs)
            for b in tqdm(range(B), unit="subsamples", disable=not progress)
        }
    else:
        controller = Invoker(
            numProcs=threads,
            runnableTarg=fit_subsample,
            argrange=range(B),
            optargs=job_kwargs,
        )
        results = controller.run()

    K = len(grid)
    p = d.p
    m = d.n // 2
    entries = np.zeros((K, B, p), dtype=np.uint8)
    if independent_per_lambda:
        indices = np.empty((K, B, m), dtype=np.int64)
    else:
        shared = np.empty((B, m), dtype=np.int64)
    coefs = np.empty((K, B, p)) if keep_coefficients else None
    intercepts = np.empty((K, B)) if keep_coefficients else None
    nonconverged: Dict[int, List[int]] = {k: [] for k in range(K)}

    for b in range(B):
        r = results[b]
        entries[:, b, :] = r["support"]
        if independent_per_lambda:
            indices[:, b, :] = r["rows"]
        else:
            shared[b] = r["rows"]
        if keep_coefficients:
            coefs[:, b, :] = r["coefficients"]
            intercepts[:, b] = r["intercepts"]
        for k in r["nonconverged"]:
            nonconverged[k].append(b)
            logger.warning(
                "Subsample %d did not converge at lambda %.17g (grid index %d)",
                b,
                grid.values[k],
                k,
            )

    matrices = []
    for k in range(K):
        matrices.append(
            SelectionMatrix(
                lambda_=float(grid.values[k]),
                entries=entries[k],
                subsample_indices=indices[k] if independent_per_lambda else shared,
                seed=seed,
                nonconverged=tuple(nonconverged[k]),
                coefficients=coefs[k] if keep_coefficients else None,
                intercepts=intercepts[k] if keep_coefficients else None,
            )
        )
    return matrices


def selection_frequencies(m: SelectionMatrix) -> SelectionFrequencies:
    if m.B < 1:
        raise ParameterError("Selection matrix has no rows")
    colsum = m.entries.sum(axis=0, dtype=np.int64)
    return SelectionFrequencies(lambda_=m.lambda_, freq=colsum / m.B)


def average_selected(m: SelectionMatrix) -> float:
    """q(lambda): mean number of variables selected per subsample."""
    if m.B < 1:
        raise ParameterError("Selection matrix has no rows")
    return float(m.entries.sum(dtype=np.int64)) / m.B


def evaluate_mse(
    d: Dataset,
    grid: LambdaGrid,
    matrices: Sequence[SelectionMatrix],
    test: Dataset,
) -> AccuracyCurve:
    """Per-lambda mean over subsamples of the test-set mean squared error.

    Test rows are mapped onto the training standardization before predicting."""
    if test.p != d.p:
        raise ParameterError(
            "Test set has p={} but training data has p={}".format(test.p, d.p)
        )
    if len(matrices) != len(grid):
        raise ParameterError(
            "Got {} selection matrices for a grid of {}".format(len(matrices), len(grid))
        )
    if d.standardized and d.center is not None and not test.standardized:
        test = apply_standardization(test, d)

    mse = np.empty(len(grid))
    for k, m in enumerate(matrices):
        if m.coefficients is None:
            raise ParameterError(
                "Selection matrices carry no coefficients; rerun with keep_coefficients=True"
            )
        preds = test.x @ m.coefficients.T + m.intercepts
        per_subsample = np.mean((test.y[:, None] - preds) ** 2, axis=0)
        mse[k] = per_subsample.mean()
    return AccuracyCurve(lambdas=np.array(grid.values), mse=mse, n_test=test.n)


def save_matrices(matrices: Sequence[SelectionMatrix], names: Sequence[str], path: str) -> None:
    """Compact audit archive: bit-packed entries plus the subsample rows."""
    p = matrices[0].p
    np.savez_compressed(
        path,
        lambdas=np.array([m.lambda_ for m in matrices]),
        entries=np.packbits(np.stack([m.entries for m in matrices]), axis=-1),
        subsample_indices=np.stack([m.subsample_indices for m in matrices]),
        nonconverged=np.array(
            [(k, b) for k, m in enumerate(matrices) for b in m.nonconverged],
            dtype=np.int64,
        ).reshape(-1, 2),
        seed=np.array(matrices[0].seed, dtype=np.uint64),
        p=np.array(p),
        names=np.array(list(names)),
    )


def load_matrices(path: str) -> Tuple[List[SelectionMatrix], Tuple[str, ...]]:
    with np.load(path, allow_pickle=False) as archive:
        p = int(archive["p"])
        entries = np.unpackbits(archive["entries"], axis=-1, count=p)
        lambdas = archive["lambdas"]
        indices = archive["subsample_indices"]
        seed = int(archive["seed"])
        failed = archive["nonconverged"]
        names = tuple(str(s) for s in archive["names"])
    matrices = [
        SelectionMatrix(
            lambda_=float(lambdas[k]),
            entries=entries[k],
            subsample_indices=indices[k],
            seed=seed,
            nonconverged=tuple(int(b) for kk, b in failed if kk == k),
        )
        for k in range(lambdas.size)
    ]
    return matrices, names


def save_matrix_csv(m: SelectionMatrix, names: Sequence[str], path: str) -> None:
    """Rows are subsamples, columns are variables, cells are 0/1."""
    frame = pd.DataFrame(m.entries, columns=list(names))
    frame.index.name = "b"
    frame.to_csv(path, encoding="utf-8", lineterminator="\n")
