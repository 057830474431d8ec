"""Figures for benchmark reports, written next to the JSON output."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchRow  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 150,
    # keep SVG/PDF output stable between runs
    "svg.hashsalt": "streammatch",
}


def _label(r: BenchRow) -> str:
    return r.mode if r.mode == "basic" else f"{r.mode} eps={r.epsilon:g}"


def _series(rows: Sequence[BenchRow]):
    groups = defaultdict(list)
    for r in rows:
        groups[_label(r)].append(r)
    for key in groups:
        groups[key].sort(key=lambda r: r.edges)
    return dict(sorted(groups.items()))


def plot_throughput(rows: Sequence[BenchRow], path: str) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for label, rs in _series(rows).items():
            ax.plot([r.edges for r in rs], [r.ns_per_edge for r in rs], marker="o", label=label)
        ax.set_xscale("log")
        ax.set_xlabel("stream length (edges)")
        ax.set_ylabel("ns per edge")
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None} if path.endswith(".svg") else None)
        plt.close(fig)
    return path


def plot_space(rows: Sequence[BenchRow], path: str) -> str:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for label, rs in _series(rows).items():
            ax.plot([r.n for r in rs], [r.peak_stack_size for r in rs], marker="o", label=label)
            if rs[0].space_bound is not None:
                ax.plot([r.n for r in rs], [r.space_bound for r in rs], ls="--", lw=0.8,
                        label=f"n*beta ({label})")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("vertices seen")
        ax.set_ylabel("peak stored edges")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None} if path.endswith(".svg") else None)
        plt.close(fig)
    return path


def render_bench_figures(rows: Sequence[BenchRow], outdir: str, fmt: str = "png") -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    return [
        plot_throughput(rows, os.path.join(outdir, f"throughput.{fmt}")),
        plot_space(rows, os.path.join(outdir, f"space.{fmt}")),
    ]
