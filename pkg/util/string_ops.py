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

# Utility string ops
import os


def conv_file_suffix(csv_fname: str, new_suffix: str) -> str:
    """Swap the last suffix of a filename, e.g. curve.csv -> curve.pdf."""
    prefix, ext = os.path.splitext(csv_fname)
    if not ext:
        raise ValueError("No suffix found in {}".format(csv_fname))
    return prefix + "." + new_suffix


def parse_float_list(text: str) -> tuple:
    """'1.5,1.1' -> (1.5, 1.1). Blank entries are rejected."""
    parts = [t.strip() for t in text.split(",")]
    if not parts or any(not t for t in parts):
        raise ValueError("Malformed number list {!r}".format(text))
    return tuple(float(t) for t in parts)
