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

# Command-line driver for stable stability selection.
#
#   stabsel.py simulate  -> dataset.csv, metadata.json
#   stabsel.py run       -> stability_curve.csv, frequencies.csv, lambda_choices.json,
#                           selection.json, calibration.json, diagnostics.log
#   stabsel.py trace     -> trace.csv, cutoff.json
#   stabsel.py pareto    -> pareto.csv, pareto.json
#
# Exit codes: 0 success, 2 usage, 3 I/O, 4 infeasible calibration, 5 internal.

import argparse
import logging
import os
import sys
import traceback

import numpy as np

from components.data import SyntheticSpec, save_csv, simulate
from components.errors import (
    ContractViolation,
    GridError,
    InfeasibleCalibrationError,
    IngestionError,
    ParameterError,
)
from components.lasso import DEFAULT_FOLDS, DEFAULT_GRID_LENGTH
from components.pipeline import DEFAULT_B, DEFAULT_TEST_N, RunConfig, run_pipeline
from components.reports import (
    out_path,
    write_frequencies,
    write_json,
    write_pareto,
    write_stability_curve,
    write_trace,
)
from components.resampling import load_matrices, save_matrices
from components.selection import DEFAULT_PI_THR, check_corollary1, pareto_analysis
from components.stability import (
    CI_METHODS,
    DEFAULT_CI_LEVEL,
    DEFAULT_N_BOOT,
    EXCELLENT_FROM,
    convergence_trace,
    estimate_stability,
    suggest_cutoff,
)
from util.csv_dict_ops import get_dict_json, write_csv
from util.string_ops import parse_float_list

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4
EXIT_INTERNAL = 5

SYNTHETIC_DEFAULTS = {"n": 50, "p": 500, "rho": 0.5, "beta": "1.5,1.1", "noise_sd": 1.0}
SYNTHETIC_FLAGS = tuple(SYNTHETIC_DEFAULTS)

DEFAULT_WINDOW = 50
DEFAULT_EPS = 0.01

logger = logging.getLogger("stabsel")


def add_synthetic_args(parser):
    parser.add_argument("--n", type=int, help="Synthetic sample count. Default = 50")
    parser.add_argument("--p", type=int, help="Synthetic predictor count. Default = 500")
    parser.add_argument(
        "--rho", type=float, help="AR(1) correlation between neighbouring predictors. Default = 0.5"
    )
    parser.add_argument(
        "--beta",
        type=str,
        help="Comma-separated leading coefficients, the rest are zero. Default = 1.5,1.1",
    )
    parser.add_argument(
        "--noise-sd", type=float, help="Standard deviation of the noise term. Default = 1"
    )


def add_run_args(parser):
    parser.add_argument("--input", type=str, help="CSV file to read instead of simulating.")
    parser.add_argument(
        "--response",
        type=str,
        default="y",
        help="Response column name, or zero-based index. Default = y",
    )
    parser.add_argument(
        "--header",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Whether the CSV starts with a header row. Default = yes",
    )
    add_synthetic_args(parser)
    parser.add_argument(
        "--grid-length",
        type=int,
        default=DEFAULT_GRID_LENGTH,
        help="Number of lambda values. Default = {}".format(DEFAULT_GRID_LENGTH),
    )
    parser.add_argument(
        "--grid-ratio",
        type=float,
        help="Smallest lambda as a fraction of lambda_max. Default = 1e-4 if n > p, else 1e-2",
    )
    parser.add_argument(
        "--lambda-file", type=str, help="File of lambda values to use as the grid."
    )
    parser.add_argument(
        "--B",
        type=int,
        default=DEFAULT_B,
        help="Number of half-size subsamples. Default = {}".format(DEFAULT_B),
    )
    parser.add_argument("--seed", type=int, default=0, help="Master seed. Default = 0")
    parser.add_argument(
        "--pi-thr",
        type=float,
        default=DEFAULT_PI_THR,
        help="Selection-frequency threshold. Default = {}".format(DEFAULT_PI_THR),
    )
    parser.add_argument(
        "--pfer",
        type=float,
        help="PFER target; pi_thr is then solved for instead of fixed.",
    )
    parser.add_argument(
        "--threshold",
        type=float,
        default=EXCELLENT_FROM,
        help="Stability a lambda must reach to be lambda_stable. Default = {}".format(
            EXCELLENT_FROM
        ),
    )
    parser.add_argument(
        "--holdout",
        type=float,
        help="Fraction of CSV rows held out as a test set before subsampling.",
    )
    parser.add_argument(
        "--test-n", type=int, help="Fresh synthetic test rows for MSE evaluation."
    )
    parser.add_argument(
        "--test-seed", type=int, help="Seed of the synthetic test rows. Default = seed + 1"
    )
    parser.add_argument(
        "--no-standardize",
        action="store_true",
        default=False,
        help="Fit on the raw predictors. Default = standardize",
    )
    parser.add_argument(
        "--folds",
        type=int,
        default=DEFAULT_FOLDS,
        help="Cross-validation folds for lambda_min and lambda_1se. Default = {}".format(
            DEFAULT_FOLDS
        ),
    )
    parser.add_argument(
        "--ci-method",
        choices=CI_METHODS,
        default="bootstrap",
        help="Interval around each stability value. Default = bootstrap",
    )
    parser.add_argument(
        "--ci-level",
        type=float,
        default=DEFAULT_CI_LEVEL,
        help="Confidence level. Default = {}".format(DEFAULT_CI_LEVEL),
    )
    parser.add_argument(
        "--n-boot",
        type=int,
        default=DEFAULT_N_BOOT,
        help="Bootstrap resamples per interval. Default = {}".format(DEFAULT_N_BOOT),
    )
    parser.add_argument(
        "--threads", type=int, default=1, help="Worker processes for subsampling. Default = 1"
    )
    parser.add_argument(
        "--progress", action="store_true", default=False, help="Show a progress bar."
    )


def build_parser():
    parser = argparse.ArgumentParser(
        description="Stable stability selection for Lasso-based variable selection."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Draw a synthetic AR(1) dataset.")
    add_synthetic_args(sim)
    sim.add_argument("--seed", type=int, default=0, help="Seed of the draw. Default = 0")
    sim.add_argument("--out", type=str, default="out", help="Output directory. Default = out")

    run = sub.add_parser("run", help="Stability curve, lambda choice, selected sets.")
    add_run_args(run)
    run.add_argument(
        "--save-matrices",
        action="store_true",
        default=False,
        help="Also write matrices.npz for a later trace --from-run.",
    )
    run.add_argument("--out", type=str, default="out", help="Output directory. Default = out")

    trace = sub.add_parser("trace", help="Stability over sequentially added subsamples.")
    add_run_args(trace)
    trace.add_argument(
        "--from-run", type=str, help="Directory of a run made with --save-matrices."
    )
    trace.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        help="Trace the grid value nearest this lambda. Default = the run's lambda choice",
    )
    trace.add_argument(
        "--window",
        type=int,
        default=DEFAULT_WINDOW,
        help="Window of the cutoff rule. Default = {}".format(DEFAULT_WINDOW),
    )
    trace.add_argument(
        "--eps",
        type=float,
        default=DEFAULT_EPS,
        help="Tolerance of the cutoff rule. Default = {}".format(DEFAULT_EPS),
    )
    trace.add_argument("--out", type=str, default="out", help="Output directory. Default = out")

    par = sub.add_parser("pareto", help="Pareto analysis of stability against test MSE.")
    add_run_args(par)
    par.add_argument("--out", type=str, default="out", help="Output directory. Default = out")
    return parser


def synthetic_spec_from_args(args, seed):
    given = [f for f in SYNTHETIC_FLAGS if getattr(args, f, None) is not None]
    if getattr(args, "input", None) is not None:
        if given:
            raise ParameterError(
                "--input cannot be combined with synthetic flags ({})".format(
                    ", ".join("--" + f.replace("_", "-") for f in given)
                )
            )
        return None
    vals = {
        f: getattr(args, f) if getattr(args, f, None) is not None else SYNTHETIC_DEFAULTS[f]
        for f in SYNTHETIC_FLAGS
    }
    try:
        head = parse_float_list(vals["beta"])
    except ValueError as e:
        raise ParameterError(str(e))
    return SyntheticSpec.with_leading_beta(
        n=vals["n"],
        p=vals["p"],
        rho=vals["rho"],
        head=head,
        noise_sd=vals["noise_sd"],
        seed=seed,
    )


def config_from_args(args) -> RunConfig:
    return RunConfig(
        input=args.input,
        response=int(args.response) if args.response.isdigit() else args.response,
        header=args.header,
        synthetic=synthetic_spec_from_args(args, args.seed),
        grid_length=args.grid_length,
        grid_ratio=args.grid_ratio,
        lambda_file=args.lambda_file,
        B=args.B,
        seed=args.seed,
        pi_thr=args.pi_thr,
        pfer=args.pfer,
        threshold=args.threshold,
        holdout=args.holdout,
        test_n=args.test_n,
        test_seed=args.test_seed,
        standardize=not args.no_standardize,
        folds=args.folds,
        ci_method=args.ci_method,
        ci_level=args.ci_level,
        n_boot=args.n_boot,
        threads=args.threads,
        out=args.out,
    ).validate()


def start_logging(out_dir):
    """diagnostics.log in out_dir gets every record; the console only warnings."""
    os.makedirs(out_dir, exist_ok=True)
    root = logging.getLogger()
    root.setLevel(logging.INFO)
    file_handler = logging.FileHandler(
        os.path.join(out_dir, "diagnostics.log"), mode="w", encoding="utf-8"
    )
    file_handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.WARNING)
    console.setFormatter(logging.Formatter("*** %(message)s"))
    root.addHandler(file_handler)
    root.addHandler(console)
    logging.captureWarnings(True)
    return [file_handler, console]


def stop_logging(handlers):
    root = logging.getLogger()
    for h in handlers:
        root.removeHandler(h)
        h.close()
    logging.captureWarnings(False)


def cmd_simulate(args):
    spec = synthetic_spec_from_args(args, args.seed)
    d = simulate(spec)
    save_csv(d, out_path(args.out, "dataset.csv"))
    write_json(
        out_path(args.out, "metadata.json"),
        {"seed": spec.seed, "spec": spec.to_dict(), "n": d.n, "p": d.p},
    )
    print("*** Wrote {} x {} dataset to {}".format(d.n, d.p + 1, args.out))


def write_run_outputs(result, out_dir, save_matrix_archive=False):
    meta = result.metadata()
    names = result.data.names
    write_stability_curve(out_path(out_dir, "stability_curve.csv"), result.curve)
    write_frequencies(out_path(out_dir, "frequencies.csv"), result.freqs, names)
    if result.accuracy is not None:
        write_csv(
            out_path(out_dir, "accuracy.csv"),
            ["lambda", "mse"],
            zip(result.accuracy.lambdas, result.accuracy.mse),
        )
    write_json(out_path(out_dir, "lambda_choices.json"), result.lambda_choices(), meta)
    write_json(
        out_path(out_dir, "selection.json"),
        {
            "mb_best_case": result.mb_set.to_dict(names),
            "stable": result.stable_set.to_dict(names) if result.stable_set else None,
        },
        meta,
    )
    write_json(
        out_path(out_dir, "calibration.json"),
        {"calibration": result.calibration.to_dict() if result.calibration else None},
        meta,
    )
    if save_matrix_archive:
        save_matrices(result.matrices, names, out_path(out_dir, "matrices.npz"))


def cmd_run(args):
    cfg = config_from_args(args)
    result = run_pipeline(cfg, progress=args.progress)
    write_run_outputs(result, args.out, args.save_matrices)
    if result.stable_set is not None:
        chosen = [result.data.names[j] for j in result.stable_set.members]
        print("*** Stable set at pi_thr = {}: {}".format(result.stable_set.pi_thr, chosen))
    print("*** Outputs written to {}".format(args.out))


def _trace_source(args):
    """(matrices, lambda to trace, metadata) from a saved run or a fresh one."""
    if args.from_run is not None:
        archive = os.path.join(args.from_run, "matrices.npz")
        if not os.path.isfile(archive):
            raise FileNotFoundError(
                "{} not found; rerun with run --save-matrices".format(archive)
            )
        matrices, _ = load_matrices(archive)
        choices = get_dict_json(os.path.join(args.from_run, "lambda_choices.json"))
        meta = choices.get("metadata", {})
        lam = choices["choice"]["lambda"]
    else:
        result = run_pipeline(config_from_args(args), progress=args.progress)
        matrices = result.matrices
        meta = result.metadata()
        lam = result.choice.lambda_
    if matrices[0].B < 2:
        raise ParameterError("A trace needs B >= 2 subsamples")
    if args.lambda_ is not None:
        lam = args.lambda_
    if lam is None:
        raise ParameterError("No lambda choice in this run; pass --lambda")
    lambdas = np.array([m.lambda_ for m in matrices])
    return matrices[int(np.argmin(np.abs(lambdas - lam)))], meta


def cmd_trace(args):
    m, meta = _trace_source(args)
    trace = convergence_trace(
        m, ci_level=args.ci_level, n_boot=args.n_boot, seed=args.seed, ci_method=args.ci_method
    )
    cutoff = suggest_cutoff(trace, window=args.window, eps=args.eps)
    write_trace(out_path(args.out, "trace.csv"), trace)
    write_json(
        out_path(args.out, "cutoff.json"),
        {
            "lambda": m.lambda_,
            "B": m.B,
            "phi_B": estimate_stability(m).phi,
            "cutoff": cutoff,
            "window": args.window,
            "eps": args.eps,
            "ci_method": args.ci_method,
            "ci_level": args.ci_level,
            "n_boot": args.n_boot,
            "trace_seed": args.seed,
        },
        meta,
    )
    print("*** Suggested number of subsamples at lambda = {:.6g}: {}".format(m.lambda_, cutoff))


def cmd_pareto(args):
    cfg = config_from_args(args)
    if cfg.input is not None and cfg.holdout is None:
        raise ParameterError(
            "No accuracy data for CSV input: pass --holdout FRACTION to carve a test split"
        )
    result = run_pipeline(cfg, default_test_n=DEFAULT_TEST_N, progress=args.progress)
    analysis = pareto_analysis(result.curve, result.accuracy, result.choice, verify=True)
    holds = None
    if result.lambda_stable.lambda_ is not None:
        holds = check_corollary1(analysis, result.lambda_stable.lambda_)
    write_pareto(out_path(args.out, "pareto.csv"), analysis)
    payload = analysis.to_dict()
    payload.update(
        {
            "lambda_min": result.cv.lambda_min,
            "lambda_1se": result.cv.lambda_1se,
            "lambda_stable": result.lambda_stable.lambda_,
            "corollary1_holds": holds,
        }
    )
    write_json(out_path(args.out, "pareto.json"), payload, result.metadata())
    print("*** lambda_pareto = {:.6g}".format(analysis.lambda_pareto))


COMMANDS = {
    "simulate": cmd_simulate,
    "run": cmd_run,
    "trace": cmd_trace,
    "pareto": cmd_pareto,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = []
    try:
        if args.command != "simulate":
            handlers = start_logging(args.out)
        COMMANDS[args.command](args)
        return EXIT_OK
    except InfeasibleCalibrationError as e:
        print("*** Infeasible calibration: {}".format(e), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParameterError, GridError) as e:
        print("*** Usage error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE
    except (IngestionError, OSError) as e:
        print("*** I/O error: {}".format(e), file=sys.stderr)
        return EXIT_IO
    except ContractViolation as e:
        print("*** Contract violation: {}".format(e), file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    finally:
        stop_logging(handlers)


if __name__ == "__main__":
    sys.exit(main())
