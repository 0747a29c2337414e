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

## CSV and JSON emitters shared by the command-line driver and the experiments.
from typing import Optional, Sequence

import os

from .resampling import SelectionFrequencies
from .selection import ParetoAnalysis
from .stability import ConvergenceTrace, StabilityReport
from util.csv_dict_ops import save_dict_json, write_csv

SCHEMA_VERSION = 1

CURVE_SCHEMA = ["lambda", "phi", "ci_low", "ci_high", "band"]
TRACE_SCHEMA = ["t", "phi", "ci_low", "ci_high"]
PARETO_SCHEMA = ["lambda", "phi", "mse", "on_front"]


def write_stability_curve(path: str, curve: Sequence[StabilityReport]) -> None:
    write_csv(
        path,
        CURVE_SCHEMA,
        [[r.lambda_, r.phi, r.ci_low, r.ci_high, r.band] for r in curve],
    )


def write_frequencies(path: str, freqs: Sequence[SelectionFrequencies], names: Sequence[str]) -> None:
    """One row per grid value, one column per variable."""
    write_csv(
        path,
        ["lambda"] + list(names),
        [[f.lambda_] + list(f.freq) for f in freqs],
    )


def write_trace(path: str, trace: ConvergenceTrace) -> None:
    write_csv(
        path,
        TRACE_SCHEMA,
        zip(trace.t_values, trace.phi_t, trace.ci_low_t, trace.ci_high_t),
    )


def write_pareto(path: str, analysis: ParetoAnalysis) -> None:
    write_csv(
        path,
        PARETO_SCHEMA,
        [[pt.lambda_, pt.phi, pt.mse, pt.on_front] for pt in analysis.points],
    )


def write_json(path: str, payload: dict, metadata: Optional[dict] = None) -> None:
    """Every JSON file carries schema_version first and the run metadata last."""
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(payload)
    if metadata is not None:
        doc["metadata"] = metadata
    save_dict_json(path, doc)


def out_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)
