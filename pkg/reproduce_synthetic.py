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

# Runs the three synthetic scenarios (rho = 0.2, 0.5, 0.8) in parallel and
# writes one summary row per scenario.

import argparse

from parallel import Invoker
from exps.synthetic_scenario import SCENARIO_RHOS, get_statistics_keys, run_exp
from util.csv_dict_ops import write_csv


def main():
    parser = argparse.ArgumentParser(
        description="Synthetic stable-stability-selection scenarios."
    )
    parser.add_argument(
        "--threads", type=int, default=3, help="Scenarios run at once. Default = 3"
    )
    parser.add_argument(
        "--fit-threads",
        type=int,
        default=1,
        help="Worker processes fitting subsamples inside each scenario. Default = 1",
    )
    parser.add_argument("--B", type=int, default=500, help="Subsamples. Default = 500")
    parser.add_argument("--seed", type=int, default=0, help="Master seed. Default = 0")
    parser.add_argument(
        "--n-boot",
        type=int,
        default=200,
        help="Bootstrap resamples per interval. Default = 200",
    )
    parser.add_argument(
        "--ofile",
        type=str,
        default="synthetic_summary.csv",
        help="Summary CSV. Default = synthetic_summary.csv",
    )
    args = parser.parse_args()

    invokerArgs = {
        "numProcs": args.threads,
        "runnableTarg": run_exp,
        "argrange": SCENARIO_RHOS,
        "optargs": {
            "B": args.B,
            "seed": args.seed,
            "n_boot": args.n_boot,
            "threads": args.fit_threads,
        },
    }
    print("*** Master thread starting {} scenarios....".format(len(SCENARIO_RHOS)))
    threadController = Invoker(**invokerArgs)
    results = threadController.run()

    keys = get_statistics_keys()
    rows = [[results[rho][k] for k in keys] for rho in SCENARIO_RHOS]
    for row in rows:
        print("*** " + ", ".join("{}={}".format(k, v) for k, v in zip(keys, row)))
    write_csv(args.ofile, keys, rows)
    print("*** Summary written to {}".format(args.ofile))


if __name__ == "__main__":
    main()
