"""Matplotlib figures for experiment reports."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import SuperconvReport, _limit_samples  # noqa: E402

_META = {"Software": None}


def density_figure(report: SuperconvReport, path):
    J = tuple(report.config["window"]["J"])
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for n, c in sorted(report.curves.items()):
        if n in report.schedule:
            ax.plot(c.x, c.p, lw=1.2, label=f"n = {n}")
    lim = _limit_samples(report, J)
    if lim is not None:
        ax.plot(*lim, "k--", lw=1.2, label="limit")
    ax.set_xlim(*J)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return Path(path)


def error_figure(report: SuperconvReport, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    for key in ("sup_err", "d1_err", "d2_err"):
        pts = [(e["n"], e[key]) for e in report.entries if e[key] is not None and e[key] > 0]
        if pts:
            n, v = np.array(pts).T
            ax.loglog(n, v, "o-", label=key)
    ax.set_xlabel("n")
    ax.set_ylabel("error on J")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return Path(path)


def render(report, out_dir, stem="report"):
    out = Path(out_dir)
    return [density_figure(report, out / f"{stem}_density.png"),
            error_figure(report, out / f"{stem}_errors.png")]
