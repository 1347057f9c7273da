"""Optional figures rendered from a :class:`SweepResult` (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_SERIES = {
    "fig1": ("g_over_delta", ["ratio_qfi_tau2", "bound_sql"], True),
    "fig2": ("T_delta", ["qfi_cd", "qfi_no_cd", "bound_hl", "qfi_adiabatic"], True),
    "fig3": ("g_over_gc", ["ratio_exact_hl", "ratio_approx_hl"], False),
    "fig4": ("T", ["qfi_cd", "qfi_no_cd", "bound_hl", "qfi_adiabatic"], True),
    "custom": ("T_delta", ["qfi_cd", "qfi_no_cd", "bound_hl"], True),
}


def plot_result(result, outdir) -> list:
    """Write ``<experiment>.png`` (and Husimi panels for fig6); returns paths."""
    plt = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    if result.experiment == "fig6":
        fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))
        for ax, tag in zip(axes, "abc"):
            text = result.extra_files[f"fig6_husimi_{tag}.csv"]
            data = np.loadtxt(text.splitlines()[1:], delimiter=",")
            n = int(round(np.sqrt(len(data))))
            ax.contourf(data[:, 0].reshape(n, n), data[:, 1].reshape(n, n), data[:, 2].reshape(n, n), 30)
            ax.set_title(f"({tag})")
            ax.set_xlabel("Re alpha")
            ax.set_aspect("equal")
        axes[0].set_ylabel("Im alpha")
    else:
        x, ys, logy = _SERIES[result.experiment]
        fig, ax = plt.subplots(figsize=(5, 4))
        for name in ys:
            ax.plot(result.column(x), result.column(name), label=name)
        if result.experiment != "fig3":
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(x)
        ax.legend()
    path = outdir / f"{result.experiment}.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
