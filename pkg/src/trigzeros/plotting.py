"""Figure rendering for the CLI report paths.

matplotlib is imported inside the functions so that library users who never
plot do not pay for the import, and so headless environments only ever see
the Agg backend.
"""

from __future__ import annotations

from typing import Mapping, Sequence


def _axes(title: str, xlabel: str, ylabel: str):
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    import matplotlib.pyplot as plt
    plt.close(fig)


def save_curves(path: str, x: Sequence[float], series: Mapping[str, Sequence[float]],
                title: str, xlabel: str, ylabel: str, logy: bool = False) -> None:
    """One line per (label, values) pair over a shared x grid."""
    fig, ax = _axes(title, xlabel, ylabel)
    for label, ys in series.items():
        ax.plot(x, ys, lw=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    _save(fig, path)


def save_ratio_plot(path: str, degrees: Sequence[int], ratios: Sequence[float],
                    reference: float, title: str) -> None:
    """Normalized zero counts against degree, with the limiting constant."""
    fig, ax = _axes(title, "degree n", "expected zeros / n")
    ax.semilogx(degrees, ratios, "o-", lw=1.2, label="quadrature")
    ax.axhline(reference, color="k", ls="--", lw=1.0, label=f"limit {reference:.6f}")
    ax.legend(fontsize=8)
    _save(fig, path)


def save_errorbar(path: str, labels: Sequence[str], means: Sequence[float],
                  errors: Sequence[float], references: Sequence[float] | None,
                  title: str, ylabel: str) -> None:
    """Means with error bars, optionally against reference markers."""
    fig, ax = _axes(title, "", ylabel)
    xs = range(len(labels))
    ax.errorbar(xs, means, yerr=errors, fmt="o", capsize=4, label="monte carlo")
    if references is not None:
        ax.plot(xs, references, "x", ms=9, label="kac-rice")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.legend(fontsize=8)
    _save(fig, path)
