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

## One stability-selection run from a RunConfig: data, grid, cross-validation,
## subsampling, stability curve, lambda choice, selected sets and calibration.
from dataclasses import dataclass, field
from typing import List, Optional

import logging

import numpy as np

from .data import Dataset, SyntheticSpec, holdout_split, load_csv, simulate, simulate_ar1_samples, standardize
from .errors import GridError, ParameterError
from .lasso import (
    DEFAULT_FOLDS,
    DEFAULT_GRID_LENGTH,
    CvResult,
    LambdaGrid,
    cross_validate,
    make_grid,
)
from .resampling import (
    AccuracyCurve,
    SelectionFrequencies,
    SelectionMatrix,
    average_selected,
    evaluate_mse,
    run_stability_selection,
    selection_frequencies,
)
from .selection import (
    DEFAULT_PI_THR,
    CalibrationResult,
    StableSet,
    calibrate_pfer,
    check_pi_thr,
    mb_stable_set,
    stable_stability_set,
)
from .stability import (
    DEFAULT_CI_LEVEL,
    DEFAULT_N_BOOT,
    EXCELLENT_FROM,
    LambdaChoice,
    StabilityReport,
    find_lambda_stable,
    find_lambda_stable_1sd,
    stability_curve,
)
from util.random_streams import MAX_SEED, check_seed

logger = logging.getLogger(__name__)

DEFAULT_B = 500
DEFAULT_TEST_N = 25


@dataclass
class RunConfig:
    """Everything a run depends on. threads and out never change results and
    are left out of to_dict()."""

    input: Optional[str] = None
    response: str = "y"
    header: bool = True
    synthetic: Optional[SyntheticSpec] = None
    grid_length: int = DEFAULT_GRID_LENGTH
    grid_ratio: Optional[float] = None
    lambda_file: Optional[str] = None
    B: int = DEFAULT_B
    seed: int = 0
    pi_thr: float = DEFAULT_PI_THR
    pfer: Optional[float] = None
    threshold: float = EXCELLENT_FROM
    holdout: Optional[float] = None
    test_n: Optional[int] = None
    test_seed: Optional[int] = None
    standardize: bool = True
    folds: int = DEFAULT_FOLDS
    ci_method: Optional[str] = "bootstrap"
    ci_level: float = DEFAULT_CI_LEVEL
    n_boot: int = DEFAULT_N_BOOT
    threads: int = field(default=1, compare=False)
    out: str = field(default="out", compare=False)

    def validate(self) -> "RunConfig":
        if (self.input is None) == (self.synthetic is None):
            raise ParameterError("Give exactly one input source: a CSV file or a synthetic design")
        if self.B < 2:
            raise ParameterError("B must be >= 2, got {}".format(self.B))
        try:
            self.seed = check_seed(self.seed)
            if self.test_seed is not None:
                self.test_seed = check_seed(self.test_seed)
        except ValueError as e:
            raise ParameterError(str(e))
        check_pi_thr(self.pi_thr)
        if self.pfer is not None and not self.pfer > 0:
            raise ParameterError("pfer must be positive, got {}".format(self.pfer))
        if self.holdout is not None:
            if self.input is None:
                raise ParameterError("--holdout applies to CSV input; use --test-n for synthetic data")
            if not (0.0 < self.holdout < 1.0):
                raise ParameterError("holdout must lie in (0, 1), got {}".format(self.holdout))
        if self.test_n is not None:
            if self.synthetic is None:
                raise ParameterError("--test-n applies to synthetic data; use --holdout for CSV input")
            if self.test_n < 1:
                raise ParameterError("test_n must be >= 1, got {}".format(self.test_n))
        if self.threads < 1:
            raise ParameterError("threads must be >= 1, got {}".format(self.threads))
        if self.folds < 2:
            raise ParameterError("folds must be >= 2, got {}".format(self.folds))
        return self

    @property
    def effective_test_seed(self) -> int:
        if self.test_seed is not None:
            return self.test_seed
        return (self.seed + 1) & MAX_SEED

    @property
    def has_test_data(self) -> bool:
        return self.holdout is not None or self.test_n is not None

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "response": self.response if self.input is not None else None,
            "header": self.header if self.input is not None else None,
            "synthetic": self.synthetic.to_dict() if self.synthetic else None,
            "grid_length": self.grid_length,
            "grid_ratio": self.grid_ratio,
            "lambda_file": self.lambda_file,
            "B": self.B,
            "seed": self.seed,
            "pi_thr": self.pi_thr,
            "pfer": self.pfer,
            "threshold": self.threshold,
            "holdout": self.holdout,
            "test_n": self.test_n,
            "test_seed": self.effective_test_seed if self.has_test_data else None,
            "standardize": self.standardize,
            "folds": self.folds,
            "ci_method": self.ci_method,
            "ci_level": self.ci_level,
            "n_boot": self.n_boot,
        }


@dataclass
class RunResult:
    config: RunConfig
    data: Dataset
    test: Optional[Dataset]
    grid: LambdaGrid
    cv: CvResult
    matrices: List[SelectionMatrix]
    freqs: List[SelectionFrequencies]
    curve: List[StabilityReport]
    lambda_stable: LambdaChoice
    lambda_stable_1sd: Optional[LambdaChoice]
    choice: LambdaChoice
    mb_set: StableSet
    stable_set: Optional[StableSet]
    calibration: Optional[CalibrationResult]
    accuracy: Optional[AccuracyCurve]

    def metadata(self) -> dict:
        meta = self.config.to_dict()
        meta.update(
            {
                "n": self.data.n,
                "p": self.data.p,
                "standardized": self.data.standardized,
                "grid_source": self.grid.source,
                "grid_size": len(self.grid),
                "n_test": self.test.n if self.test is not None else None,
            }
        )
        if self.test is not None and self.config.synthetic is not None:
            meta["test_seed"] = self.config.effective_test_seed
        return meta

    def lambda_choices(self) -> dict:
        return {
            "lambda_min": self.cv.lambda_min,
            "lambda_1se": self.cv.lambda_1se,
            "lambda_stable": self.lambda_stable.to_dict(),
            "lambda_stable_1sd": self.lambda_stable_1sd.to_dict() if self.lambda_stable_1sd else None,
            "choice": self.choice.to_dict(),
        }


def load_input(cfg: RunConfig) -> Dataset:
    if cfg.input is not None:
        return load_csv(cfg.input, response=cfg.response, header=cfg.header)
    return simulate(cfg.synthetic)


def split_test(cfg: RunConfig, raw: Dataset, default_test_n: Optional[int] = None):
    """(train, test) on the raw scale. test is None when the config asks for none."""
    if cfg.input is not None:
        if cfg.holdout is None:
            return raw, None
        return holdout_split(raw, cfg.holdout, cfg.seed)
    test_n = cfg.test_n if cfg.test_n is not None else default_test_n
    if test_n is None:
        return raw, None
    return raw, simulate_ar1_samples(cfg.synthetic, test_n, cfg.effective_test_seed)


def read_lambda_file(path: str) -> LambdaGrid:
    """Grid values separated by newlines or commas."""
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float, encoding="utf-8")
    except ValueError as e:
        raise GridError("Cannot read lambda values from {}: {}".format(path, e))
    return LambdaGrid.from_values(np.ravel(values))


def build_grid(cfg: RunConfig, train: Dataset) -> LambdaGrid:
    if cfg.lambda_file is not None:
        return read_lambda_file(cfg.lambda_file)
    return make_grid(
        train, length=cfg.grid_length, ratio=cfg.grid_ratio, standardize=cfg.standardize
    )


def effective_choice(stable: LambdaChoice, one_sd: Optional[LambdaChoice]) -> LambdaChoice:
    if stable.kind != "none":
        return stable
    if one_sd is not None:
        return one_sd
    return stable


def run_pipeline(cfg: RunConfig, default_test_n: Optional[int] = None, progress: bool = False) -> RunResult:
    cfg.validate()
    raw = load_input(cfg)
    train, test = split_test(cfg, raw, default_test_n)
    train.require_resamplable()
    if cfg.standardize:
        train = standardize(train)
    print("*** Data: n = {}, p = {}, standardized = {}".format(train.n, train.p, train.standardized))

    grid = build_grid(cfg, train)
    cv = cross_validate(train, grid, folds=cfg.folds, seed=cfg.seed, standardize=cfg.standardize)
    print(
        "*** Grid of {} values ({}), lambda_min = {:.6g}, lambda_1se = {:.6g}".format(
            len(grid), grid.source, cv.lambda_min, cv.lambda_1se
        )
    )

    matrices = run_stability_selection(
        train,
        grid,
        cfg.B,
        cfg.seed,
        threads=cfg.threads,
        keep_coefficients=test is not None,
        standardize=cfg.standardize,
        progress=progress,
    )
    freqs = [selection_frequencies(m) for m in matrices]
    curve = stability_curve(
        matrices, ci_method=cfg.ci_method, ci_level=cfg.ci_level, n_boot=cfg.n_boot, seed=cfg.seed
    )

    stable = find_lambda_stable(curve, cfg.threshold)
    one_sd = None
    if sum(1 for r in curve if r.defined) >= 2:
        one_sd = find_lambda_stable_1sd(curve)
    choice = effective_choice(stable, one_sd)
    if choice.kind == "stable":
        print("*** lambda_stable = {:.6g} (phi = {:.4f})".format(choice.lambda_, choice.phi_at_lambda))
    elif choice.kind == "stable-1sd":
        print(
            "*** No lambda reaches phi >= {}; lambda_stable-1sd = {:.6g} (phi = {:.4f})".format(
                cfg.threshold, choice.lambda_, choice.phi_at_lambda
            )
        )
    else:
        print("*** No lambda choice could be made from the stability curve")

    calibration = None
    pi_thr = cfg.pi_thr
    stable_set = None
    if choice.lambda_ is not None:
        k = grid.index_of(choice.lambda_)
        q = average_selected(matrices[k])
        if cfg.pfer is not None:
            calibration = calibrate_pfer(q, train.p, pfer=cfg.pfer, lambda_=choice.lambda_)
            pi_thr = calibration.pi_thr
        else:
            calibration = calibrate_pfer(q, train.p, pi_thr=cfg.pi_thr, lambda_=choice.lambda_)
        stable_set = stable_stability_set(freqs[k], pi_thr, rule=choice.kind)
    elif cfg.pfer is not None:
        raise ParameterError("Cannot calibrate a PFER target without a lambda choice")
    mb_set = mb_stable_set(freqs, pi_thr)

    accuracy = evaluate_mse(train, grid, matrices, test) if test is not None else None
    return RunResult(
        config=cfg,
        data=train,
        test=test,
        grid=grid,
        cv=cv,
        matrices=matrices,
        freqs=freqs,
        curve=curve,
        lambda_stable=stable,
        lambda_stable_1sd=one_sd,
        choice=choice,
        mb_set=mb_set,
        stable_set=stable_set,
        calibration=calibration,
        accuracy=accuracy,
    )
