#!/usr/bin/env python3
"""Plots a trace CSV and the BO histories of an experiment directory."""

import argparse
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_trace(csv_path: Path, out_dir: Path) -> None:
    df = pd.read_csv(csv_path)
    fig = plt.figure(figsize=(11, 8))
    ax = fig.add_subplot(2, 2, 1)
    ax.plot(df["e_ref"], df["n_ref"], "k--", label="reference")
    ax.plot(df["e"], df["n"], label="truth")
    ax.plot(df["e_hat"], df["n_hat"], alpha=0.6, label="estimate")
    ax.set_xlabel("east [m]")
    ax.set_ylabel("north [m]")
    ax.set_aspect("equal")
    ax.legend()

    ax = fig.add_subplot(2, 2, 2)
    ax.plot(df["t"], df["d_ref"], "k--", label="reference")
    ax.plot(df["t"], df["d"], label="truth")
    ax.invert_yaxis()
    ax.set_xlabel("t [s]")
    ax.set_ylabel("depth [m]")
    ax.legend()

    ax = fig.add_subplot(2, 2, 3)
    for col in ("u_surge", "u_rl", "u_ud"):
        ax.step(df["t"], df[col], where="post", label=col)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("normalized command")
    ax.legend()

    ax = fig.add_subplot(2, 2, 4)
    ax.plot(df["t"], (df["cross_track"] ** 2 + df["depth_error"] ** 2) ** 0.5, label="deviation")
    ax.plot(df["t"], df["current_n"], label="current n")
    ax.plot(df["t"], df["current_e"], label="current e")
    ax.set_xlabel("t [s]")
    ax.legend()

    fig.tight_layout()
    fig.savefig(out_dir / (csv_path.stem + ".png"), dpi=120)
    plt.close(fig)


def plot_histories(exp_dir: Path, out_dir: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for hist in sorted(exp_dir.glob("run_*/history.jsonl")):
        best = float("inf")
        xs, ys = [], []
        for line in hist.read_text().splitlines():
            rec = json.loads(line)
            if rec["l"] == 1 and rec["j"] is not None:
                best = min(best, rec["j"])
            xs.append(rec["iter"])
            ys.append(best)
        ax.plot(xs, ys, label=hist.parent.name)
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best observed J")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "convergence.png", dpi=120)
    plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("path", type=Path, help="trace CSV or experiment directory")
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()
    out_dir = args.out or (args.path if args.path.is_dir() else args.path.parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.path.is_dir():
        plot_histories(args.path, out_dir)
        trace = args.path / "best_trace.csv"
        if trace.exists():
            plot_trace(trace, out_dir)
    else:
        plot_trace(args.path, out_dir)


if __name__ == "__main__":
    main()
