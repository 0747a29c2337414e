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

from components.errors import InfeasibleCalibrationError, ParameterError
from components.resampling import AccuracyCurve, SelectionFrequencies
from components.selection import (
    ParetoPoint,
    brute_force_front,
    calibrate_pfer,
    check_corollary1,
    check_pi_thr,
    dominates,
    mb_stable_set,
    pareto_analysis,
    stable_stability_set,
    sweep_front,
)
from components.stability import StabilityReport, classify_band, find_lambda_stable, find_lambda_stable_1sd
from .util import pareto_oracle

import numpy as np
import pytest


def freqs(lam, values):
    return SelectionFrequencies(lambda_=lam, freq=np.array(values, dtype=float))


def curves(lambdas, phis, mses):
    """Stability and accuracy curves in grid order (decreasing lambda)."""
    order = np.argsort(lambdas)[::-1]
    curve = [
        StabilityReport(
            lambda_=float(lambdas[k]),
            phi=None if phis[k] is None else float(phis[k]),
            ci_low=None,
            ci_high=None,
            band=classify_band(phis[k]),
            B=100,
        )
        for k in order
    ]
    acc = AccuracyCurve(
        lambdas=np.array([lambdas[k] for k in order], dtype=float),
        mse=np.array([mses[k] for k in order], dtype=float),
        n_test=25,
    )
    return curve, acc


def test_best_case_set():
    table = [freqs(1.0, [0.3, 0.1]), freqs(0.5, [0.7, 0.2]), freqs(0.1, [0.5, 0.59])]
    s = mb_stable_set(table, 0.6)
    assert s.rule == "mb-best-case"
    assert s.members == (0,)
    assert s.frequencies == (0.7,)
    assert s.lambdas == (0.5,)


def test_best_case_set_of_zeros():
    assert len(mb_stable_set([freqs(1.0, [0, 0, 0])], 0.6)) == 0


def test_best_case_set_needs_input():
    with pytest.raises(ParameterError):
        mb_stable_set([], 0.6)


def test_stable_set_at_one_lambda():
    s = stable_stability_set(freqs(0.3, [0.9, 0.4]), 0.6)
    assert s.members == (0,)
    assert s.frequencies == (0.9,)
    assert s.to_dict(("a", "b"))["members"] == [{"index": 0, "frequency": 0.9, "name": "a", "lambda": 0.3}]


def test_threshold_reached_exactly_is_selected():
    assert stable_stability_set(freqs(0.3, [0.6, 0.5999]), 0.6).members == (0,)


def test_pi_thr_one():
    with pytest.warns(UserWarning):
        s = stable_stability_set(freqs(0.3, [0.99, 0.4]), 1.0)
    assert len(s) == 0


@pytest.mark.parametrize("pi_thr", [0.5, 0.2, 1.01])
def test_pi_thr_out_of_range(pi_thr):
    with pytest.raises(ParameterError):
        check_pi_thr(pi_thr)


def test_pi_thr_outside_recommended_range_warns():
    with pytest.warns(UserWarning):
        assert check_pi_thr(0.55) == 0.55


def test_stable_set_within_best_case_set():
    rng = np.random.default_rng(0)
    for _ in range(200):
        table = [freqs(float(l), rng.uniform(0, 1, 12)) for l in (1.0, 0.5, 0.2, 0.1)]
        pi_thr = float(rng.uniform(0.6, 0.9))
        best = set(mb_stable_set(table, pi_thr).members)
        for f in table:
            assert set(stable_stability_set(f, pi_thr).members) <= best


def test_pfer_bound_example():
    c = calibrate_pfer(2.0, 500, pi_thr=0.9)
    assert c.mode == "fix-threshold"
    assert c.pfer_bound == 0.01


def test_threshold_from_pfer_example():
    c = calibrate_pfer(2.0, 500, pfer=0.01, lambda_=0.2)
    assert c.mode == "fix-pfer"
    assert c.pi_thr == pytest.approx(0.9, abs=1e-12)
    assert c.pfer_bound == 0.01
    assert c.to_dict()["lambda"] == 0.2


def test_unit_threshold_gives_minimal_pfer():
    with pytest.warns(UserWarning):
        c = calibrate_pfer(3.0, 100, pi_thr=1.0)
    assert c.pfer_bound == pytest.approx(9.0 / 100, rel=1e-15)


def test_calibration_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = int(rng.integers(1, 1000))
        q = float(rng.uniform(0.01, p))
        pi_thr = float(rng.uniform(0.6, 0.9))
        fwd = calibrate_pfer(q, p, pi_thr=pi_thr)
        back = calibrate_pfer(q, p, pfer=fwd.pfer_bound)
        assert back.pi_thr == pytest.approx(pi_thr, abs=1e-12)
        assert fwd.pfer_bound == pytest.approx(q * q / (p * (2 * pi_thr - 1)), rel=1e-12)


def test_bound_decreases_with_threshold():
    thresholds = np.linspace(0.6, 0.9, 31)
    bounds = [calibrate_pfer(5.0, 200, pi_thr=float(t)).pfer_bound for t in thresholds]
    assert np.all(np.diff(bounds) < 0)


def test_infeasible_pfer_target():
    with pytest.raises(InfeasibleCalibrationError) as e:
        calibrate_pfer(10.0, 100, pfer=0.5)
    assert e.value.minimal_pfer == pytest.approx(1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"q": 1.0, "p": 10},
        {"q": 1.0, "p": 10, "pi_thr": 0.7, "pfer": 1.0},
        {"q": 0.0, "p": 10, "pfer": 1.0},
        {"q": 11.0, "p": 10, "pi_thr": 0.7},
        {"q": 1.0, "p": 10, "pfer": 0.0},
    ],
)
def test_bad_calibration_arguments(kwargs):
    with pytest.raises(ParameterError):
        calibrate_pfer(**kwargs)


def test_no_selection_has_zero_bound():
    assert calibrate_pfer(0.0, 10, pi_thr=0.7).pfer_bound == 0.0


def test_pareto_three_points():
    curve, acc = curves([0.3, 0.2, 0.1], [0.2, 0.8, 0.9], [1.0, 1.1, 2.0])
    a = pareto_analysis(curve, acc, verify=True)
    # The least stable point is also the most accurate, so nothing dominates it.
    assert set(a.front) == {0.1, 0.2, 0.3}
    assert a.lambda_pareto == 0.2


def test_pareto_two_points():
    curve, acc = curves([0.2, 0.1], [0.8, 0.5], [1.0, 1.5])
    a = pareto_analysis(curve, acc, verify=True)
    assert a.front == (0.2,)
    assert [pt.on_front for pt in a.points] == [False, True]


def test_pareto_ties_stay_on_front():
    curve, acc = curves([0.3, 0.2, 0.1], [0.8, 0.8, 0.1], [1.0, 1.0, 0.5])
    a = pareto_analysis(curve, acc, verify=True)
    assert a.front == (0.1, 0.2, 0.3)
    assert a.lambda_pareto == 0.3


def test_pareto_skips_undefined_points():
    curve, acc = curves([0.3, 0.2, 0.1], [None, 0.8, 0.5], [0.1, 1.0, 1.5])
    a = pareto_analysis(curve, acc)
    assert [pt.lambda_ for pt in a.points] == [0.1, 0.2]


def test_pareto_needs_a_defined_point():
    curve, acc = curves([0.3, 0.2], [None, None], [0.1, 1.0])
    with pytest.raises(ParameterError):
        pareto_analysis(curve, acc)


def test_pareto_needs_aligned_curves():
    curve, acc = curves([0.3, 0.2], [0.5, 0.8], [0.1, 1.0])
    shifted = AccuracyCurve(lambdas=acc.lambdas * 2, mse=acc.mse, n_test=25)
    with pytest.raises(ParameterError):
        pareto_analysis(curve, shifted)


@pytest.mark.parametrize("seed", range(25))
def test_sweep_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    # Coarse values so ties in either coordinate are common.
    phis = rng.integers(0, 6, n) / 5.0
    mses = rng.integers(0, 6, n) / 5.0
    points = [ParetoPoint(lambda_=float(k), phi=float(a), mse=float(b)) for k, a, b in zip(range(n), phis, mses)]
    expected = set(pareto_oracle([(pt.phi, pt.accuracy) for pt in points]))
    flags = sweep_front(points)
    assert {i for i, f in enumerate(flags) if f} == expected
    assert flags == brute_force_front(points)


def test_dominance():
    a = ParetoPoint(lambda_=1.0, phi=0.8, mse=1.0)
    b = ParetoPoint(lambda_=2.0, phi=0.8, mse=1.2)
    assert dominates(a, b)
    assert not dominates(b, a)
    assert not dominates(a, a)


def monotone_case(rng, n=30):
    """Stability non-decreasing in lambda everywhere, loss non-decreasing past
    the first lambda whose stability reaches 0.75."""
    lambdas = np.sort(rng.uniform(0.01, 1.0, n))
    phis = np.sort(rng.uniform(0.0, 1.0, n))
    phis[-1] = max(phis[-1], 0.95)
    mses = rng.uniform(0.5, 2.0, n)
    anchor = int(np.argmax(phis >= 0.75))
    mses[anchor:] = np.sort(mses[anchor:])
    return lambdas, phis, mses, anchor


@pytest.mark.parametrize("seed", range(50))
def test_corollary_on_constructed_curves(seed):
    lambdas, phis, mses, anchor = monotone_case(np.random.default_rng(seed))
    curve, acc = curves(lambdas, phis, mses)
    choice = find_lambda_stable(curve)
    assert choice.lambda_ == lambdas[anchor]

    a = pareto_analysis(curve, acc, lambda_choice=choice, verify=True)
    assert check_corollary1(a, choice.lambda_)
    assert a.corollary1.stable_nondecreasing_before
    assert a.corollary1.loss_nondecreasing_after
    pairs = [(pt.phi, pt.accuracy) for pt in a.points]
    stable = pairs[anchor]
    assert not any(phi > stable[0] and acc > stable[1] for phi, acc in pairs)


def test_dip_before_lambda_stable():
    curve, acc = curves([0.1, 0.2, 0.3, 0.4], [0.3, 0.5, 0.4, 0.8], [0.5, 0.6, 0.7, 0.8])
    choice = find_lambda_stable(curve)
    a = pareto_analysis(curve, acc, lambda_choice=choice)
    assert not a.corollary1.stable_nondecreasing_before
    assert a.corollary1.max_stability_violation == pytest.approx(0.1)
    assert not check_corollary1(a, choice.lambda_)


def test_loss_decreasing_after_lambda_stable():
    curve, acc = curves([0.1, 0.2, 0.3, 0.4], [0.3, 0.8, 0.85, 0.9], [0.5, 0.6, 0.55, 0.9])
    choice = find_lambda_stable(curve)
    assert choice.lambda_ == 0.2
    a = pareto_analysis(curve, acc, lambda_choice=choice)
    assert not a.corollary1.loss_nondecreasing_after
    assert not check_corollary1(a, choice.lambda_)


def test_corollary_needs_grid_lambda():
    curve, acc = curves([0.1, 0.2], [0.5, 0.8], [0.5, 0.6])
    a = pareto_analysis(curve, acc)
    with pytest.raises(ParameterError):
        check_corollary1(a, 0.15)


def test_corollary_holds_with_lambda_stable_weakly_dominated():
    curve, acc = curves([0.1, 0.2, 0.3, 0.4], [0.3, 0.5, 0.8, 0.9], [1.0, 1.1, 1.2, 1.2])
    choice = find_lambda_stable(curve)
    assert choice.lambda_ == 0.3
    a = pareto_analysis(curve, acc, lambda_choice=choice, verify=True)
    assert 0.3 not in a.front
    assert not a.corollary1.lambda_stable_on_front
    assert a.choice_on_front is False
    assert check_corollary1(a, choice.lambda_)


def test_one_sd_choice_has_no_corollary_record():
    curve, acc = curves([0.1, 0.2, 0.3, 0.4], [0.3, 0.5, 0.6, 0.55], [1.0, 1.1, 1.2, 1.3])
    assert find_lambda_stable(curve).kind == "none"
    choice = find_lambda_stable_1sd(curve)
    assert choice.kind == "stable-1sd"
    a = pareto_analysis(curve, acc, lambda_choice=choice)
    assert a.corollary1 is None
    assert a.choice_on_front == (choice.lambda_ in a.front)
    assert a.to_dict()["corollary1"] is None
