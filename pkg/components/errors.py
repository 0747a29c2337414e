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

## Exception types shared by the stability-selection components.


class ParameterError(ValueError):
    """Raised when an argument or a data invariant is violated."""


class IngestionError(ValueError):
    """Raised when a CSV file cannot be turned into a Dataset.

    The message always names the offending file line (1-based) and column."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class GridError(ValueError):
    """Raised when a regularization grid cannot be built or is malformed."""


class InfeasibleCalibrationError(ValueError):
    """Raised when a PFER target would need a threshold above 1."""

    def __init__(self, message, minimal_pfer):
        super().__init__(message)
        self.minimal_pfer = minimal_pfer


class ContractViolation(AssertionError):
    """Raised when a machine-checked result fails although its assumptions held."""
