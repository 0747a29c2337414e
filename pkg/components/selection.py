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

## Variable-selection decisions made from selection frequencies:
## best-case and stable-stability sets, PFER calibration, and the Pareto
## analysis of stability against held-out accuracy.
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import logging
import warnings

import numpy as np

from .errors import ContractViolation, InfeasibleCalibrationError, ParameterError
from .resampling import AccuracyCurve, SelectionFrequencies
from .stability import LambdaChoice, StabilityReport

logger = logging.getLogger(__name__)

DEFAULT_PI_THR = 0.6
RECOMMENDED_PI_THR = (0.6, 0.9)
MONOTONE_TOL = 1e-9

RULES = ("mb-best-case", "stable", "stable-1sd")


def check_pi_thr(pi_thr: float) -> float:
    """Accept (0.5, 1]; warn when outside the usual [0.6, 0.9]."""
    if not (0.5 < pi_thr <= 1.0):
        raise ParameterError("pi_thr must lie in (0.5, 1], got {}".format(pi_thr))
    lo, hi = RECOMMENDED_PI_THR
    if not (lo <= pi_thr <= hi):
        warnings.warn(
            "pi_thr={} is outside the recommended range [{}, {}]".format(pi_thr, lo, hi),
            UserWarning,
            stacklevel=3,
        )
    return float(pi_thr)


@dataclass(frozen=True)
class StableSet:
    rule: str
    pi_thr: float
    members: Tuple[int, ...]
    frequencies: Tuple[float, ...]
    # Grid value each member's frequency was read at.
    lambdas: Tuple[float, ...] = ()

    def __len__(self):
        return len(self.members)

    def to_dict(self, names: Optional[Sequence[str]] = None) -> dict:
        rows = []
        for i, j in enumerate(self.members):
            row = {"index": j, "frequency": self.frequencies[i]}
            if names is not None:
                row["name"] = names[j]
            if self.lambdas:
                row["lambda"] = self.lambdas[i]
            rows.append(row)
        return {"rule": self.rule, "pi_thr": self.pi_thr, "members": rows}


@dataclass(frozen=True)
class CalibrationResult:
    mode: str
    pi_thr: float
    pfer_bound: float
    q_used: float
    p: int
    lambda_: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pi_thr": self.pi_thr,
            "pfer_bound": self.pfer_bound,
            "q": self.q_used,
            "p": self.p,
            "lambda": self.lambda_,
        }


@dataclass(frozen=True)
class ParetoPoint:
    lambda_: float
    phi: float
    mse: float
    on_front: bool = False

    @property
    def accuracy(self) -> float:
        return -self.mse


@dataclass(frozen=True)
class Corollary1Record:
    stable_nondecreasing_before: bool
    loss_nondecreasing_after: bool
    lambda_stable_on_front: bool
    max_stability_violation: float
    max_loss_violation: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ParetoAnalysis:
    """points are sorted by increasing lambda; front holds the lambdas of the
    non-dominated points in the same order."""

    points: Tuple[ParetoPoint, ...]
    front: Tuple[float, ...]
    lambda_pareto: float
    lambda_choice: Optional[LambdaChoice] = None
    choice_on_front: Optional[bool] = None
    corollary1: Optional[Corollary1Record] = field(default=None)

    def to_dict(self) -> dict:
        return {
            "lambda_pareto": self.lambda_pareto,
            "front": list(self.front),
            "lambda_choice": self.lambda_choice.to_dict() if self.lambda_choice else None,
            "choice_on_front": self.choice_on_front,
            "corollary1": self.corollary1.to_dict() if self.corollary1 else None,
        }


def mb_stable_set(freq_per_lambda: Sequence[SelectionFrequencies], pi_thr: float) -> StableSet:
    """Variables whose best frequency over the grid reaches pi_thr."""
    if len(freq_per_lambda) == 0:
        raise ParameterError("No selection frequencies given")
    pi_thr = check_pi_thr(pi_thr)
    table = np.stack([f.freq for f in freq_per_lambda])
    lambdas = np.array([f.lambda_ for f in freq_per_lambda])
    best_k = np.argmax(table, axis=0)
    best = table[best_k, np.arange(table.shape[1])]
    members = np.flatnonzero(best >= pi_thr)
    return StableSet(
        rule="mb-best-case",
        pi_thr=pi_thr,
        members=tuple(int(j) for j in members),
        frequencies=tuple(float(best[j]) for j in members),
        lambdas=tuple(float(lambdas[best_k[j]]) for j in members),
    )


def stable_stability_set(freq: SelectionFrequencies, pi_thr: float, rule: str = "stable") -> StableSet:
    """Variables whose frequency at the chosen lambda reaches pi_thr."""
    if rule not in ("stable", "stable-1sd"):
        raise ParameterError("Unknown rule {!r}".format(rule))
    pi_thr = check_pi_thr(pi_thr)
    members = np.flatnonzero(freq.freq >= pi_thr)
    return StableSet(
        rule=rule,
        pi_thr=pi_thr,
        members=tuple(int(j) for j in members),
        frequencies=tuple(float(freq.freq[j]) for j in members),
        lambdas=tuple(float(freq.lambda_) for j in members),
    )


def calibrate_pfer(
    q: float,
    p: int,
    pi_thr: Optional[float] = None,
    pfer: Optional[float] = None,
    lambda_: Optional[float] = None,
) -> CalibrationResult:
    """PFER <= q^2 / (p (2 pi_thr - 1)), solved for whichever side is not fixed."""
    if (pi_thr is None) == (pfer is None):
        raise ParameterError("Fix exactly one of pi_thr and pfer")
    if p < 1:
        raise ParameterError("p must be >= 1, got {}".format(p))
    if not (0.0 <= q <= p):
        raise ParameterError("q must lie in [0, p], got q={}, p={}".format(q, p))

    if pi_thr is not None:
        pi_thr = check_pi_thr(pi_thr)
        bound = q * q / (p * (2.0 * pi_thr - 1.0))
        return CalibrationResult(
            mode="fix-threshold", pi_thr=pi_thr, pfer_bound=bound, q_used=q, p=p, lambda_=lambda_
        )

    if not pfer > 0:
        raise ParameterError("pfer must be positive, got {}".format(pfer))
    if q == 0:
        raise ParameterError("q = 0: no variable is ever selected, nothing to calibrate")
    minimal = q * q / p
    solved = (1.0 + minimal / pfer) / 2.0
    if solved > 1.0:
        raise InfeasibleCalibrationError(
            "PFER target {} needs pi_thr = {:.6g} > 1; the minimal achievable PFER "
            "for q = {:.6g}, p = {} is {:.6g}".format(pfer, solved, q, p, minimal),
            minimal_pfer=minimal,
        )
    check_pi_thr(solved)
    return CalibrationResult(
        mode="fix-pfer", pi_thr=solved, pfer_bound=float(pfer), q_used=q, p=p, lambda_=lambda_
    )


def dominates(a: ParetoPoint, b: ParetoPoint) -> bool:
    """a is at least as good as b in stability and accuracy and better in one."""
    return (
        a.phi >= b.phi
        and a.accuracy >= b.accuracy
        and (a.phi > b.phi or a.accuracy > b.accuracy)
    )


def brute_force_front(points: Sequence[ParetoPoint]) -> List[bool]:
    return [not any(dominates(o, pt) for o in points) for pt in points]


def sweep_front(points: Sequence[ParetoPoint]) -> List[bool]:
    """Non-dominated flags in O(N log N): walk points by decreasing phi,
    tracking the best accuracy among strictly more stable points."""
    order = sorted(range(len(points)), key=lambda i: (-points[i].phi, -points[i].accuracy))
    flags = [False] * len(points)
    best_above = -np.inf
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and points[order[j]].phi == points[order[i]].phi:
            j += 1
        group_best = points[order[i]].accuracy
        for idx in order[i:j]:
            acc = points[idx].accuracy
            flags[idx] = acc == group_best and acc > best_above
        best_above = max(best_above, group_best)
        i = j
    return flags


def _monotone_violation(values: np.ndarray) -> float:
    """Largest drop between neighbours of a sequence that should not decrease."""
    if values.size < 2:
        return 0.0
    return float(max(0.0, np.max(values[:-1] - values[1:])))


def _anchor_index(points: Sequence[ParetoPoint], lam: float) -> int:
    lambdas = np.array([pt.lambda_ for pt in points])
    anchor = int(np.argmin(np.abs(lambdas - lam)))
    if not np.isclose(lambdas[anchor], lam, rtol=1e-12, atol=0.0):
        raise ParameterError("lambda {} is not a grid point with defined stability".format(lam))
    return anchor


def _corollary1_record(points: Sequence[ParetoPoint], lambda_stable: float) -> Corollary1Record:
    anchor = _anchor_index(points, lambda_stable)
    phi = np.array([pt.phi for pt in points])
    mse = np.array([pt.mse for pt in points])
    # points run by increasing lambda: stability should rise up to the anchor,
    # the loss should keep rising past it.
    stab_drop = _monotone_violation(phi[: anchor + 1])
    loss_drop = _monotone_violation(mse[anchor:])
    return Corollary1Record(
        stable_nondecreasing_before=stab_drop <= MONOTONE_TOL,
        loss_nondecreasing_after=loss_drop <= MONOTONE_TOL,
        lambda_stable_on_front=bool(points[anchor].on_front),
        max_stability_violation=stab_drop,
        max_loss_violation=loss_drop,
    )


def pareto_analysis(
    curve: Sequence[StabilityReport],
    acc: AccuracyCurve,
    lambda_choice: Optional[LambdaChoice] = None,
    verify: bool = False,
) -> ParetoAnalysis:
    """Pareto front of (phi, -MSE) over the grid points with defined phi.

    lambda_pareto maximizes phi - MSE on the front, ties going to the larger
    lambda. With verify=True the front is re-derived by exhaustive pairwise
    comparison and any disagreement raises ContractViolation."""
    if len(curve) != acc.mse.size:
        raise ParameterError(
            "Stability curve has {} points but the accuracy curve has {}".format(
                len(curve), acc.mse.size
            )
        )
    lambdas = np.array([r.lambda_ for r in curve])
    if not np.allclose(lambdas, acc.lambdas, rtol=1e-12, atol=0.0):
        raise ParameterError("Stability and accuracy curves are on different grids")

    raw = [
        ParetoPoint(lambda_=r.lambda_, phi=r.phi, mse=float(acc.mse[k]))
        for k, r in enumerate(curve)
        if r.defined
    ]
    if not raw:
        raise ParameterError("No grid point has a defined stability value")
    raw.sort(key=lambda pt: pt.lambda_)

    flags = sweep_front(raw)
    if verify:
        oracle = brute_force_front(raw)
        if oracle != flags:
            raise ContractViolation("Pareto sweep disagrees with the pairwise dominance check")
    points = tuple(
        ParetoPoint(lambda_=pt.lambda_, phi=pt.phi, mse=pt.mse, on_front=f)
        for pt, f in zip(raw, flags)
    )
    front = [pt for pt in points if pt.on_front]
    best = max(front, key=lambda pt: (pt.phi + pt.accuracy, pt.lambda_))

    record = None
    on_front = None
    if lambda_choice is not None and lambda_choice.lambda_ is not None:
        k = _anchor_index(points, lambda_choice.lambda_)
        on_front = bool(points[k].on_front)
        if lambda_choice.kind == "stable":
            record = _corollary1_record(points, lambda_choice.lambda_)
    return ParetoAnalysis(
        points=points,
        front=tuple(pt.lambda_ for pt in front),
        lambda_pareto=best.lambda_,
        lambda_choice=lambda_choice,
        choice_on_front=on_front,
        corollary1=record,
    )


def check_corollary1(analysis: ParetoAnalysis, lambda_stable: float) -> bool:
    """True iff stability is non-decreasing in lambda up to lambda_stable and
    the loss is non-decreasing beyond it.

    When both hold, no grid point may be strictly more stable and strictly
    more accurate than lambda_stable at once; ContractViolation is raised if
    one is. That is a strict-dominance check. A point above lambda_stable with
    higher stability and the same loss weakly dominates it without breaking
    either condition, so lambda_stable can be off the front while this returns
    True; front membership is reported in the record only."""
    record = _corollary1_record(analysis.points, lambda_stable)
    holds = record.stable_nondecreasing_before and record.loss_nondecreasing_after
    if not holds:
        return False

    anchor = analysis.points[_anchor_index(analysis.points, lambda_stable)]
    slack = MONOTONE_TOL * len(analysis.points)
    for pt in analysis.points:
        if pt.phi > anchor.phi + slack and pt.accuracy > anchor.accuracy + slack:
            raise ContractViolation(
                "lambda {} is more stable and more accurate than lambda_stable {}".format(
                    pt.lambda_, anchor.lambda_
                )
            )
    return True
