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

# The process pool must hand back every job's output keyed by job, whatever
# the split between workers.

from parallel import Invoker

import pytest


def scaled_square(job, scale=1):
    return scale * job * job


def explode(job):
    if job == 3:
        raise ValueError("job {} exploded".format(job))
    return job


@pytest.mark.parametrize("procs", [1, 2, 3, 7, 20])
def test_all_jobs_collected(procs):
    jobs = list(range(10))
    results = Invoker(
        numProcs=procs, runnableTarg=scaled_square, argrange=jobs, optargs={"scale": 2}
    ).run()
    assert results == {j: 2 * j * j for j in jobs}


def test_never_more_workers_than_jobs():
    inv = Invoker(numProcs=8, runnableTarg=scaled_square, argrange=[1, 2, 3])
    assert inv.numProcs == 3
    assert sum(inv.jobs_assigned) == 3
    assert inv.run() == {1: 1, 2: 4, 3: 9}


def test_uneven_blocks():
    inv = Invoker(numProcs=3, runnableTarg=scaled_square, argrange=range(8))
    assert inv.jobs_assigned == [3, 3, 2]
    inv.run()


def test_failure_is_reraised():
    with pytest.raises(RuntimeError) as e:
        Invoker(numProcs=2, runnableTarg=explode, argrange=range(6)).run()
    assert "job 3 exploded" in str(e.value)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"runnableTarg": scaled_square, "argrange": [1]},
        {"numProcs": 2, "argrange": [1]},
        {"numProcs": 2, "runnableTarg": scaled_square},
        {"numProcs": 0, "runnableTarg": scaled_square, "argrange": [1]},
    ],
)
def test_missing_arguments(kwargs):
    with pytest.raises(ValueError):
        Invoker(**kwargs)
