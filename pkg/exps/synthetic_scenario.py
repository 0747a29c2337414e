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

# One synthetic scenario end to end: AR(1) design with the given correlation,
# stability selection, lambda choices, convergence trace and Pareto analysis.

import numpy as np

from components.data import SyntheticSpec
from components.pipeline import DEFAULT_TEST_N, RunConfig, run_pipeline
from components.selection import check_corollary1, pareto_analysis
from components.stability import convergence_trace, suggest_cutoff

SCENARIO_RHOS = (0.2, 0.5, 0.8)
RELEVANT = (0, 1)


def get_statistics_keys():
    return [
        "rho",
        "lambda_min",
        "lambda_1se",
        "lambda_stable",
        "phi_stable",
        "choice_kind",
        "lambda_choice",
        "phi_choice",
        "phi_min",
        "phi_max",
        "freq_min",
        "freq_1se",
        "freq_choice",
        "top_two",
        "stable_set",
        "cutoff",
        "max_late_deviation",
        "lambda_pareto",
        "choice_on_front",
        "corollary1",
    ]


def _relevant_freqs(result, lam):
    f = result.freqs[result.grid.index_of(lam)].freq
    return "/".join("{:.3f}".format(f[j]) for j in RELEVANT)


def _phi_at(result, lam):
    return result.curve[result.grid.index_of(lam)].phi


def run_exp(rho, **kwargs):
    """Returns a dict keyed by get_statistics_keys().

    threads is the number of worker processes fitting subsamples inside this
    scenario; it does not change the statistics."""
    n = kwargs.get("n", 50)
    p = kwargs.get("p", 500)
    seed = kwargs.get("seed", 0)
    window = kwargs.get("window", 50)
    eps = kwargs.get("eps", 0.01)
    spec = SyntheticSpec.with_leading_beta(n=n, p=p, rho=rho, seed=seed)
    cfg = RunConfig(
        synthetic=spec,
        B=kwargs.get("B", 500),
        seed=seed,
        test_n=kwargs.get("test_n", DEFAULT_TEST_N),
        n_boot=kwargs.get("n_boot", 200),
        grid_length=kwargs.get("grid_length", 100),
        threads=kwargs.get("threads", 1),
    )
    result = run_pipeline(cfg)
    phis = [r.phi for r in result.curve if r.defined]
    stats = {key: None for key in get_statistics_keys()}
    stats.update(
        {
            "rho": rho,
            "lambda_min": result.cv.lambda_min,
            "lambda_1se": result.cv.lambda_1se,
            "lambda_stable": result.lambda_stable.lambda_,
            "phi_stable": result.lambda_stable.phi_at_lambda,
            "choice_kind": result.choice.kind,
            "phi_min": _phi_at(result, result.cv.lambda_min),
            "phi_max": max(phis) if phis else None,
            "freq_min": _relevant_freqs(result, result.cv.lambda_min),
            "freq_1se": _relevant_freqs(result, result.cv.lambda_1se),
        }
    )

    analysis = pareto_analysis(result.curve, result.accuracy, result.choice, verify=True)
    stats["lambda_pareto"] = analysis.lambda_pareto
    stats["choice_on_front"] = analysis.choice_on_front
    if result.lambda_stable.lambda_ is not None:
        stats["corollary1"] = check_corollary1(analysis, result.lambda_stable.lambda_)

    lam = result.choice.lambda_
    if lam is None:
        return stats

    k = result.grid.index_of(lam)
    m = result.matrices[k]
    freq = result.freqs[k].freq
    trace = convergence_trace(m, n_boot=cfg.n_boot, seed=seed)
    late = trace.t_values >= m.B // 2
    stats.update(
        {
            "lambda_choice": lam,
            "phi_choice": result.choice.phi_at_lambda,
            "freq_choice": _relevant_freqs(result, lam),
            "top_two": " ".join(
                result.data.names[j] for j in sorted(np.argsort(-freq, kind="stable")[:2])
            ),
            "stable_set": " ".join(result.data.names[j] for j in result.stable_set.members),
            "cutoff": suggest_cutoff(trace, window=window, eps=eps),
            "max_late_deviation": float(
                np.nanmax(np.abs(trace.phi_t[late] - trace.phi_t[-1]))
            ),
        }
    )
    return stats
