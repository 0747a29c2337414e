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

from components.data import (
    Dataset,
    SyntheticSpec,
    apply_standardization,
    holdout_split,
    load_csv,
    save_csv,
    simulate,
    simulate_ar1_samples,
    standardize,
)
from components.errors import IngestionError, ParameterError
from .shared_fixtures import small_spec

import numpy as np
import pytest


def test_wide_design_shape():
    spec = SyntheticSpec.with_leading_beta(n=50, p=500, rho=0.2, seed=5)
    d = simulate(spec)
    assert d.x.shape == (50, 500)
    assert d.y.shape == (50,)
    assert d.names[0] == "V1" and d.names[-1] == "V500"
    assert spec.beta[:3] == (1.5, 1.1, 0.0)


def test_simulate_is_bit_identical(small_spec):
    a = simulate(small_spec)
    b = simulate(small_spec)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)


def test_independent_columns_when_rho_zero():
    spec = SyntheticSpec.with_leading_beta(n=10000, p=12, rho=0.0, seed=1)
    corr = np.corrcoef(simulate(spec).x, rowvar=False)
    off = corr[~np.eye(12, dtype=bool)]
    assert np.all(np.abs(off) < 0.05)


@pytest.mark.parametrize("rho", [0.2, 0.5, 0.8])
def test_lag_one_correlation(rho):
    spec = SyntheticSpec.with_leading_beta(n=20000, p=10, rho=rho, seed=2)
    x = simulate(spec).x
    lag1 = [np.corrcoef(x[:, j], x[:, j + 1])[0, 1] for j in range(9)]
    assert np.all(np.abs(np.array(lag1) - rho) < 0.03)


def test_fresh_samples(small_spec):
    test = simulate_ar1_samples(small_spec, 25, seed=99)
    assert test.x.shape == (25, small_spec.p)
    single = simulate_ar1_samples(small_spec, 1, seed=99)
    assert single.n == 1
    other = simulate_ar1_samples(small_spec, 25, seed=100)
    assert not np.array_equal(test.y, other.y)


def test_fresh_samples_need_positive_count(small_spec):
    with pytest.raises(ParameterError):
        simulate_ar1_samples(small_spec, 0, seed=1)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rho": 1.0},
        {"rho": -0.1},
        {"noise_sd": 0.0},
        {"n": 3},
        {"seed": -1},
    ],
)
def test_invalid_spec(kwargs):
    args = {"n": 10, "p": 5, "rho": 0.5, "noise_sd": 1.0, "seed": 0}
    args.update(kwargs)
    with pytest.raises(ParameterError):
        SyntheticSpec.with_leading_beta(**args)


def test_load_hand_written_csv(tmp_path):
    f = tmp_path / "hand.csv"
    f.write_text("a,y,b\n1,2,3\n4,5,6\n7,8.5,9\n-1e-3,0,2.5E2\n", encoding="utf-8")
    d = load_csv(str(f), response="y")
    assert d.names == ("a", "b")
    assert d.response_name == "y"
    assert np.array_equal(d.y, [2.0, 5.0, 8.5, 0.0])
    assert np.array_equal(d.x, [[1, 3], [4, 6], [7, 9], [-0.001, 250.0]])


def test_load_by_index_without_header(tmp_path):
    f = tmp_path / "nohead.csv"
    f.write_text("1,2,3\n4,5,6\n", encoding="utf-8")
    d = load_csv(str(f), response=2, header=False)
    assert d.names == ("V1", "V2")
    assert np.array_equal(d.y, [3.0, 6.0])


def test_text_cell_is_located(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("y,a\n1,2\n3,oops\n", encoding="utf-8")
    with pytest.raises(IngestionError) as e:
        load_csv(str(f))
    assert e.value.line == 3
    assert e.value.column == "a"
    assert "oops" in str(e.value)


def test_missing_response_column(tmp_path):
    f = tmp_path / "noresp.csv"
    f.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(IngestionError):
        load_csv(str(f), response="y")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(str(tmp_path / "absent.csv"))


def test_csv_round_trip(tmp_path, small_spec):
    d = simulate(small_spec)
    path = str(tmp_path / "d.csv")
    save_csv(d, path)
    back = load_csv(path)
    assert back.names == d.names
    assert np.array_equal(back.x, d.x)
    assert np.array_equal(back.y, d.y)


def test_csv_round_trip_is_bit_exact_on_wide_design(tmp_path):
    d = simulate(SyntheticSpec.with_leading_beta(n=50, p=500, rho=0.5, seed=7))
    path = str(tmp_path / "wide.csv")
    save_csv(d, path)
    back = load_csv(path)
    assert back.x.shape == (50, 500)
    assert np.array_equal(np.ascontiguousarray(back.x).view(np.uint64), np.ascontiguousarray(d.x).view(np.uint64))
    assert np.array_equal(np.ascontiguousarray(back.y).view(np.uint64), np.ascontiguousarray(d.y).view(np.uint64))


def test_standardize_hand_column():
    d = Dataset(x=np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]), y=np.zeros(3), names=("a", "b"))
    s = standardize(d)
    assert np.allclose(s.x[:, 0], [-1.0, 0.0, 1.0], atol=1e-15)
    assert np.array_equal(s.x[:, 1], [0.0, 0.0, 0.0])
    assert s.scale[1] == 1.0
    assert s.standardized
    assert np.array_equal(s.y, d.y)


def test_standardize_invariants_and_idempotence(small_spec):
    s = standardize(simulate(small_spec))
    assert np.all(np.abs(s.x.mean(axis=0)) < 1e-10)
    assert np.all(np.abs(s.x.std(axis=0, ddof=1) - 1.0) < 1e-8)
    twice = standardize(s)
    assert np.allclose(twice.x, s.x, atol=1e-10)


def test_apply_standardization_reuses_constants(small_spec):
    raw = simulate(small_spec)
    s = standardize(raw)
    mapped = apply_standardization(raw, s)
    assert np.allclose(mapped.x, s.x, atol=1e-12)


def test_holdout_split(small_spec):
    d = simulate(small_spec)
    train, test = holdout_split(d, 0.25, seed=4)
    assert (train.n, test.n) == (30, 10)
    again_train, again_test = holdout_split(d, 0.25, seed=4)
    assert np.array_equal(test.x, again_test.x)
    with pytest.raises(ParameterError):
        holdout_split(d, 0.95, seed=4)


def test_resamplable_bounds():
    d = Dataset(x=np.ones((3, 2)), y=np.arange(3.0), names=("a", "b"))
    with pytest.raises(ParameterError):
        d.require_resamplable()


def test_non_finite_rejected():
    with pytest.raises(ParameterError):
        Dataset(x=np.array([[np.nan, 1.0]]), y=np.zeros(1), names=("a", "b"))
