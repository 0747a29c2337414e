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


# Plot stability curves, MSE overlays, convergence traces and Pareto fronts.
# Data is generated by "stabsel.py run/trace/pareto"; every CSV found in the
# given directory is rendered to a PDF of the same name.

import argparse
import os
import matplotlib as mpl
import numpy

mpl.use("Agg")
mpl.rc("font", **{"size": 9})
import pandas as pd
from matplotlib import pyplot as plt

from util.csv_dict_ops import get_dict_json
from util.string_ops import conv_file_suffix

mpl.rcParams["pdf.fonttype"] = 42
mpl.rcParams["ps.fonttype"] = 42

band_to_colour_dict = {
    0.4: "xkcd:dark red",
    0.75: "xkcd:prussian blue",
}

choice_to_colour_dict = {
    "lambda_min": "xkcd:black",
    "lambda_1se": "xkcd:grey",
    "lambda_stable": "xkcd:prussian blue",
    "lambda_pareto": "xkcd:dark red",
}

linestyles = ["-", "--", "-.", ":"]

fig_width_in = 4
fig_height_in = 2.4


def _json_or_empty(fname):
    return get_dict_json(fname) if os.path.isfile(fname) else {}


def _choice_markers(choices):
    """{label: lambda} for whatever choices a lambda_choices.json holds."""
    marks = {}
    for k in ("lambda_min", "lambda_1se"):
        if choices.get(k) is not None:
            marks[k] = choices[k]
    choice = choices.get("choice") or {}
    if choice.get("lambda") is not None:
        marks["lambda_stable"] = choice["lambda"]
    return marks


def _mark_lambdas(ax, marks):
    cur = 0
    for k, lam in marks.items():
        ax.axvline(
            lam,
            linestyle=linestyles[cur % len(linestyles)],
            color=choice_to_colour_dict.get(k, "xkcd:black"),
            linewidth=0.8,
            label=k,
        )
        cur += 1


def plot_stability_curve(df, marks, fname):
    fh = plt.figure(figsize=(fig_width_in, fig_height_in))
    ax = fh.subplots(1)
    defined = df.dropna(subset=["phi"])
    ax.plot(defined["lambda"], defined["phi"], marker="o", markersize=2, color="xkcd:black")
    if defined["ci_low"].notna().any():
        ax.fill_between(
            defined["lambda"], defined["ci_low"], defined["ci_high"], alpha=0.2, color="xkcd:grey"
        )
    for level, col in band_to_colour_dict.items():
        ax.axhline(level, linestyle="--", color=col, linewidth=0.8)
    _mark_lambdas(ax, marks)
    ax.set_xscale("log")
    ax.set_xlabel("Regularization value")
    ax.set_ylabel("Stability")
    ax.legend(loc="lower right", frameon=False, fontsize=7)
    fh.tight_layout()
    fh.savefig(fname)
    plt.close(fh)
    print("Saved plot", fname)


def plot_mse_overlay(df, acc, marks, fname):
    fh = plt.figure(figsize=(fig_width_in, fig_height_in))
    ax = fh.subplots(1)
    defined = df.dropna(subset=["phi"])
    ax.plot(defined["lambda"], defined["phi"], color="xkcd:prussian blue", label="stability")
    ax.axhline(0.75, linestyle="--", color="xkcd:prussian blue", linewidth=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("Regularization value")
    ax.set_ylabel("Stability")
    twin = ax.twinx()
    twin.plot(acc["lambda"], acc["mse"], color="xkcd:dark red", linestyle="-.", label="MSE")
    twin.set_ylabel("Test MSE")
    _mark_lambdas(ax, marks)
    fh.tight_layout()
    fh.savefig(fname)
    plt.close(fh)
    print("Saved plot", fname)


def plot_trace(df, cutoff, fname):
    fh = plt.figure(figsize=(fig_width_in, fig_height_in))
    ax = fh.subplots(1)
    ax.plot(df["t"], df["phi"], color="xkcd:black", linewidth=0.8)
    ax.fill_between(df["t"], df["ci_low"], df["ci_high"], alpha=0.25, color="xkcd:grey")
    if cutoff.get("cutoff") is not None:
        ax.axvline(cutoff["cutoff"], linestyle="--", color="xkcd:dark red", linewidth=0.8)
    ax.set_xlabel("Number of subsamples")
    ax.set_ylabel("Stability")
    ax.set_ylim(
        max(-1.0, numpy.nanmin(df["ci_low"].to_numpy(dtype=float), initial=0.0) - 0.05), 1.05
    )
    fh.tight_layout()
    fh.savefig(fname)
    plt.close(fh)
    print("Saved plot", fname)


def plot_pareto(df, summary, fname):
    fh = plt.figure(figsize=(fig_width_in, fig_height_in))
    ax = fh.subplots(1)
    on_front = df["on_front"].astype(bool)
    ax.scatter(df["phi"][~on_front], -df["mse"][~on_front], s=6, color="xkcd:grey", label="dominated")
    front = df[on_front].sort_values("phi")
    ax.plot(front["phi"], -front["mse"], marker="o", markersize=3, color="xkcd:black", label="front")
    for k in ("lambda_stable", "lambda_pareto"):
        lam = summary.get(k)
        if lam is None:
            continue
        row = df.iloc[(df["lambda"] - lam).abs().argmin()]
        ax.scatter([row["phi"]], [-row["mse"]], s=30, marker="x", color=choice_to_colour_dict[k], label=k)
    ax.set_xlabel("Stability")
    ax.set_ylabel("Accuracy (-MSE)")
    ax.legend(loc="lower left", frameon=False, fontsize=7)
    fh.tight_layout()
    fh.savefig(fname)
    plt.close(fh)
    print("Saved plot", fname)


def render_dir(run_dir):
    """Render every recognised CSV in run_dir; returns the PDFs written."""
    written = []
    curve_csv = os.path.join(run_dir, "stability_curve.csv")
    marks = _choice_markers(_json_or_empty(os.path.join(run_dir, "lambda_choices.json")))
    if os.path.isfile(curve_csv):
        df = pd.read_csv(curve_csv)
        fname = conv_file_suffix(curve_csv, "pdf")
        plot_stability_curve(df, marks, fname)
        written.append(fname)
        acc_csv = os.path.join(run_dir, "accuracy.csv")
        if os.path.isfile(acc_csv):
            fname = conv_file_suffix(acc_csv, "pdf")
            plot_mse_overlay(df, pd.read_csv(acc_csv), marks, fname)
            written.append(fname)

    trace_csv = os.path.join(run_dir, "trace.csv")
    if os.path.isfile(trace_csv):
        fname = conv_file_suffix(trace_csv, "pdf")
        cutoff = _json_or_empty(os.path.join(run_dir, "cutoff.json"))
        plot_trace(pd.read_csv(trace_csv), cutoff, fname)
        written.append(fname)

    pareto_csv = os.path.join(run_dir, "pareto.csv")
    if os.path.isfile(pareto_csv):
        fname = conv_file_suffix(pareto_csv, "pdf")
        summary = _json_or_empty(os.path.join(run_dir, "pareto.json"))
        plot_pareto(pd.read_csv(pareto_csv), summary, fname)
        written.append(fname)
    return written


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument(
        "run_dir",
        help="Output directory of stabsel.py holding the CSV/JSON files.",
    )
    args = parser.parse_args()
    if not render_dir(args.run_dir):
        print("No plottable CSV found in", args.run_dir)


if __name__ == "__main__":
    main()
