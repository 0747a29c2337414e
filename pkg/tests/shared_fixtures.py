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

# Shared fixtures for testing components that need data, grids or selection matrices.

import numpy as np
import pytest
from components.data import Dataset, SyntheticSpec, simulate, standardize
from components.lasso import make_grid
from components.resampling import run_stability_selection
from .util import make_matrix


@pytest.fixture
def hand_matrix():
    """Four subsamples over three variables: q = 1.25, sum of s^2 = 0.25."""
    return make_matrix([[1, 0, 0], [1, 0, 0], [1, 1, 0], [1, 0, 0]], lam=0.5)


@pytest.fixture
def small_spec():
    return SyntheticSpec.with_leading_beta(n=40, p=8, rho=0.5, head=(2.0, 1.5), seed=11)


@pytest.fixture
def small_dataset(small_spec):
    """A standardized 40 x 8 AR(1) dataset with two strong signals."""
    return standardize(simulate(small_spec))


@pytest.fixture
def small_grid(small_dataset):
    return make_grid(small_dataset, length=12, ratio=0.05)


@pytest.fixture
def small_matrices(small_dataset, small_grid):
    return run_stability_selection(small_dataset, small_grid, B=20, seed=3, keep_coefficients=True)


@pytest.fixture(name="tiny_dataset", scope="function", params=[(12, 4), (9, 3)])
def create_tiny_dataset(request):
    n, p = request.param
    rng = np.random.default_rng(n * 100 + p)
    x = rng.standard_normal((n, p))
    y = x[:, 0] - 0.5 * x[:, 1] + 0.3 * rng.standard_normal(n)
    return Dataset(x=x, y=y, names=tuple("x{}".format(j) for j in range(p)))
