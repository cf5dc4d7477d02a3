"""Figure construction for each kind, plus the shared render entry point."""
from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .schema import FigureSpec, load_table  # noqa: E402

DPI = 150


def build_validation_figure(spec):
    frame = load_table(spec.inputs[0], "validation")
    ok = frame[frame["trusted"] == 1]
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.loglog(ok["true_cost"], ok["abs_error"], "k.-", label="|linear - shot|")
    left.set_xlabel("shot cost [DU$^2$/TU$^3$]")
    left.set_ylabel("cost error [DU$^2$/TU$^3$]")
    left.grid(True, which="both", alpha=0.3)
    left.legend()
    right.loglog(ok["scale"], ok["linear_cost"], "C0o-", label="linear")
    right.loglog(ok["scale"], ok["true_cost"], "C1.--", label="shot")
    right.set_xlabel("deviation scale [DU]")
    right.set_ylabel("cost [DU$^2$/TU$^3$]")
    right.grid(True, which="both", alpha=0.3)
    right.legend()
    fig.tight_layout()
    return fig


def build_bundle3d_figure(spec):
    frame = load_table(spec.inputs[0], "bundle3d")
    fig = plt.figure(figsize=(7, 6))
    axes = fig.add_subplot(projection="3d")
    for _, group in frame.groupby("sample"):
        axes.plot(group["dx"], group["dy"], group["dz"],
                  linewidth=0.4, alpha=0.35)
    axes.plot([0.0], [0.0], [0.0], "k.", markersize=10, label="reference")
    axes.set_xlabel("dx [DU]")
    axes.set_ylabel("dy [DU]")
    axes.set_zlabel("dz [DU]")
    axes.legend()
    fig.tight_layout()
    return fig


def build_eigen_compare_figure(spec):
    frame = load_table(spec.inputs[0], "eigen-compare")
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    labels = ("dx [DU]", "dy [DU]", "dz [DU]")
    for row, (component, label) in enumerate(zip(("dx", "dy", "dz"), labels)):
        for axis_id, group in frame.groupby("axis"):
            axes[row].plot(group["t"], group[component], linewidth=1.0,
                           label=f"axis {axis_id}" if row == 0 else None)
        axes[row].axhline(0.0, color="black", linewidth=1.5)
        axes[row].set_ylabel(label)
        axes[row].grid(alpha=0.3)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("t [TU]")
    fig.tight_layout()
    return fig


def build_thrust_figure(spec):
    frame = load_table(spec.inputs[0], "thrust")
    fig, axes = plt.subplots(figsize=(7, 4.5))
    for axis_id, group in frame.groupby("axis"):
        axes.plot(group["t"], group["u_mag"], linewidth=1.2,
                  label=f"axis {axis_id}")
    axes.set_xlabel("t [TU]")
    axes.set_ylabel("|u| [DU/TU$^2$]")
    axes.grid(alpha=0.3)
    axes.legend(fontsize=8)
    fig.tight_layout()
    return fig


BUILDERS = {
    "validation": build_validation_figure,
    "bundle3d": build_bundle3d_figure,
    "eigen-compare": build_eigen_compare_figure,
    "thrust": build_thrust_figure,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure spec to its output path and return the path."""
    fig = BUILDERS[spec.kind](spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out, dpi=DPI)
    finally:
        plt.close(fig)
    return out


def script_main(kind, argv=None):
    parser = argparse.ArgumentParser(
        description=f"render the {kind} figure from pipeline CSV output")
    parser.add_argument("--in", dest="input", required=True,
                        help="input CSV path")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path")
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=kind, inputs=(args.input,), output=args.output)
    path = render(spec)
    print(f"wrote {path}")
    return 0
