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

## Datasets for stability selection: AR(1) synthetic designs, CSV ingestion,
## and column standardization with retained constants.
from dataclasses import dataclass, field, replace
from math import ceil, sqrt
from typing import Optional, Sequence, Tuple, Union

import os

import numpy as np
import pandas as pd
import unidecode

from .errors import IngestionError, ParameterError
from util.random_streams import HOLDOUT, ROWS, check_seed, stream

# Columns whose sample sd is below this (relative to their mean) are treated as constant.
CONSTANT_COLUMN_RTOL = 1e-12
DEFAULT_BETA_HEAD = (1.5, 1.1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Design matrix x (n x p), response y (n), predictor names.

    When standardized is True, center and scale hold the constants that map
    the original predictors onto the stored x, so fresh rows can be put on
    the same scale with apply_standardization()."""

    x: np.ndarray
    y: np.ndarray
    names: Tuple[str, ...]
    standardized: bool = False
    response_name: str = "y"
    center: Optional[np.ndarray] = field(default=None, repr=False)
    scale: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        x = _frozen(self.x)
        y = _frozen(self.y)
        if x.ndim != 2:
            raise ParameterError("x must be a 2-d matrix, got shape {}".format(x.shape))
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ParameterError(
                "y must be a vector of length n={}, got shape {}".format(
                    x.shape[0], y.shape
                )
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ParameterError("Dataset needs at least one row and one column")
        if len(self.names) != x.shape[1]:
            raise ParameterError(
                "Got {} names for {} columns".format(len(self.names), x.shape[1])
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ParameterError("Dataset contains non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        if self.center is not None:
            object.__setattr__(self, "center", _frozen(self.center))
            object.__setattr__(self, "scale", _frozen(self.scale))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def require_resamplable(self) -> None:
        """Half-size subsamples need at least 2 rows, and selection needs 2 columns."""
        if self.n < 4 or self.p < 2:
            raise ParameterError(
                "Stability selection needs n >= 4 and p >= 2, got n={}, p={}".format(
                    self.n, self.p
                )
            )

    def take(self, rows: Sequence[int]) -> "Dataset":
        """Return the given rows as a new, unstandardized Dataset."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(
            x=self.x[rows],
            y=self.y[rows],
            names=self.names,
            response_name=self.response_name,
        )


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    p: int
    rho: float
    beta: Tuple[float, ...]
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 4 or self.p < 2:
            raise ParameterError(
                "Synthetic design needs n >= 4 and p >= 2, got n={}, p={}".format(
                    self.n, self.p
                )
            )
        if not (0.0 <= self.rho < 1.0):
            raise ParameterError("rho must lie in [0, 1), got {}".format(self.rho))
        if not self.noise_sd > 0:
            raise ParameterError("noise_sd must be positive, got {}".format(self.noise_sd))
        if len(self.beta) != self.p:
            raise ParameterError(
                "beta has length {} but p = {}".format(len(self.beta), self.p)
            )
        try:
            object.__setattr__(self, "seed", check_seed(self.seed))
        except ValueError as e:
            raise ParameterError(str(e))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @classmethod
    def with_leading_beta(cls, n, p, rho, head=DEFAULT_BETA_HEAD, noise_sd=1.0, seed=0):
        """Spec whose first coefficients are head and the rest zero."""
        if len(head) > p:
            raise ParameterError("{} leading coefficients exceed p = {}".format(len(head), p))
        beta = tuple(head) + (0.0,) * (p - len(head))
        return cls(n=n, p=p, rho=rho, beta=beta, noise_sd=noise_sd, seed=seed)

    def to_dict(self) -> dict:
        nonzero = {str(j + 1): b for j, b in enumerate(self.beta) if b != 0.0}
        return {
            "n": self.n,
            "p": self.p,
            "rho": self.rho,
            "beta_nonzero": nonzero,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
        }


def default_names(p: int) -> Tuple[str, ...]:
    return tuple("V{}".format(j + 1) for j in range(p))


def _draw_ar1_rows(spec: SyntheticSpec, count: int, seed: int) -> Dataset:
    """Row i is drawn from its own stream (seed, i): x_1 ~ N(0,1) and
    x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j, giving corr(x_j, x_k) = rho^|j-k|."""
    z = np.empty((count, spec.p))
    eps = np.empty(count)
    for i in range(count):
        rng = stream(seed, ROWS, i)
        z[i] = rng.standard_normal(spec.p)
        eps[i] = rng.standard_normal()

    innovation = sqrt(1.0 - spec.rho * spec.rho)
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    for j in range(1, spec.p):
        x[:, j] = spec.rho * x[:, j - 1] + innovation * z[:, j]

    y = x @ np.asarray(spec.beta) + spec.noise_sd * eps
    return Dataset(x=x, y=y, names=default_names(spec.p))


def simulate(spec: SyntheticSpec) -> Dataset:
    """Draw spec.n training rows from the AR(1) design."""
    return _draw_ar1_rows(spec, spec.n, spec.seed)


def simulate_ar1_samples(spec: SyntheticSpec, count: int, seed: int) -> Dataset:
    """Draw count fresh rows (e.g. a test set) from the distribution of spec.

    Rows come from the streams of seed, so a seed different from spec.seed
    gives draws independent of the training data."""
    if count < 1:
        raise ParameterError("count must be >= 1, got {}".format(count))
    try:
        seed = check_seed(seed)
    except ValueError as e:
        raise ParameterError(str(e))
    return _draw_ar1_rows(spec, count, seed)


def _resolve_response(columns, response: Union[str, int], header: bool) -> int:
    if isinstance(response, (int, np.integer)) and not isinstance(response, bool):
        idx = int(response)
    elif header and response in columns:
        return list(columns).index(response)
    elif isinstance(response, str) and response.isdigit():
        idx = int(response)
    else:
        raise IngestionError(
            "Response column {!r} not found in header".format(response), line=1
        )
    if idx < 0 or idx >= len(columns):
        raise IngestionError(
            "Response column index {} out of range for {} columns".format(
                idx, len(columns)
            ),
            line=1,
        )
    return idx


def _parse_cell(text: str) -> float:
    # float() is correctly rounded, so %.17g text reads back bit-identical.
    try:
        return float(text)
    except ValueError:
        return np.nan


def load_csv(path: str, response: Union[str, int] = "y", header: bool = True) -> Dataset:
    """Read a numeric CSV. The response column is picked by name or zero-based
    index; every other column becomes a predictor, in file order."""
    if not os.path.isfile(path):
        raise FileNotFoundError("Input file {} does not exist".format(path))
    try:
        raw = pd.read_csv(
            path,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise IngestionError("File {} is empty".format(path), line=1)
    except pd.errors.ParserError as e:
        raise IngestionError("Malformed CSV {}: {}".format(path, e))

    if raw.shape[1] < 2:
        raise IngestionError(
            "File {} needs a response and at least one predictor column".format(path),
            line=1,
        )
    if raw.shape[0] < 1:
        raise IngestionError("File {} has no data rows".format(path), line=2)

    resp_idx = _resolve_response(raw.columns, response, header)
    first_line = 2 if header else 1

    values = np.empty(raw.shape, dtype=float)
    for c, col in enumerate(raw.columns):
        # Unicode minus signs and friends are folded to ASCII before parsing.
        cells = raw[col].map(unidecode.unidecode).str.strip()
        parsed = cells.map(_parse_cell).to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            row = int(bad[0])
            label = col if header else c + 1
            raise IngestionError(
                "Non-numeric cell {!r} at line {}, column {!r} of {}".format(
                    raw[col].iloc[row], row + first_line, label, path
                ),
                line=row + first_line,
                column=label,
            )
        values[:, c] = parsed

    pred_cols = [c for c in range(raw.shape[1]) if c != resp_idx]
    if header:
        names = tuple(str(raw.columns[c]) for c in pred_cols)
        response_name = str(raw.columns[resp_idx])
    else:
        names = default_names(len(pred_cols))
        response_name = "y"
    return Dataset(
        x=values[:, pred_cols],
        y=values[:, resp_idx],
        names=names,
        response_name=response_name,
    )


def save_csv(d: Dataset, path: str) -> None:
    """Write the response column first, then the predictors, at 17 significant digits."""
    frame = pd.DataFrame(
        np.column_stack([d.y, d.x]), columns=[d.response_name] + list(d.names)
    )
    frame.to_csv(
        path, index=False, float_format="%.17g", encoding="utf-8", lineterminator="\n"
    )


def standardize(d: Dataset) -> Dataset:
    """Center every column to mean 0 and scale it to unit sample sd (ddof=1).

    Constant columns become all zeros with scale 1. y is left untouched.
    Standardizing an already standardized Dataset composes the constants."""
    x = d.x
    center = x.mean(axis=0)
    xc = x - center
    if d.n > 1:
        sd = xc.std(axis=0, ddof=1)
    else:
        sd = np.zeros(d.p)
    constant = sd <= CONSTANT_COLUMN_RTOL * np.maximum(1.0, np.abs(center))
    scale = np.where(constant, 1.0, sd)
    xs = xc / scale
    xs[:, constant] = 0.0

    if d.center is not None:
        center = d.center + d.scale * center
        scale = d.scale * scale
    return replace(d, x=xs, standardized=True, center=center, scale=scale)


def apply_standardization(rows: Dataset, reference: Dataset) -> Dataset:
    """Put rows on the scale of a standardized reference Dataset."""
    if reference.center is None:
        raise ParameterError("Reference dataset carries no standardization constants")
    if rows.p != reference.p:
        raise ParameterError(
            "Dataset has p={} but the reference has p={}".format(rows.p, reference.p)
        )
    x = (rows.x - reference.center) / reference.scale
    return replace(rows, x=x, standardized=True, center=reference.center, scale=reference.scale)


def holdout_split(d: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Carve a deterministic test split of ceil(fraction * n) rows off d."""
    if not (0.0 < fraction < 1.0):
        raise ParameterError("Holdout fraction must lie in (0, 1), got {}".format(fraction))
    n_test = max(1, int(ceil(fraction * d.n)))
    if d.n - n_test < 4:
        raise ParameterError(
            "Holdout of {} rows leaves only {} training rows (need >= 4)".format(
                n_test, d.n - n_test
            )
        )
    perm = stream(seed, HOLDOUT).permutation(d.n)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return d.take(train_rows), d.take(test_rows)
