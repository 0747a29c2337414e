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

## Seeded random streams.
## Every random draw in the package comes from a Generator keyed by
## (master seed, purpose, index...), so results never depend on which worker
## process or in which order a task was executed.
from numpy.random import Generator, PCG64, SeedSequence

# Purpose codes, one per independent family of streams.
ROWS = 0
SUBSAMPLE = 1
FOLDS = 2
HOLDOUT = 3
BOOTSTRAP = 4
TRACE = 5

MAX_SEED = (1 << 64) - 1


def check_seed(seed) -> int:
    """Return seed as an int, or raise ValueError if it is not a 64-bit unsigned value."""
    if isinstance(seed, bool) or int(seed) != seed:
        raise ValueError("Seed {} is not an integer".format(seed))
    seed = int(seed)
    if seed < 0 or seed > MAX_SEED:
        raise ValueError("Seed {} is outside [0, 2^64 - 1]".format(seed))
    return seed


def stream(seed: int, purpose: int, *index: int) -> Generator:
    """Return the generator for (seed, purpose, index...)."""
    entropy = [check_seed(seed), int(purpose)] + [int(i) for i in index]
    return Generator(PCG64(SeedSequence(entropy)))
