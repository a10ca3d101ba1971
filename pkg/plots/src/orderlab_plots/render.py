"""Figure rendering from sweep aggregates.

The deviation figure mirrors the three-panel layout: one panel per density
value, one curve per intervention coverage, deviation width (or mean) of the
chosen metric against graph size.  Mean figures can overlay the analytic
bound; log-log axes carry a fitted-slope annotation per curve.  All statistics
are taken verbatim from the aggregate rows; the only computation done here is
the least-squares slope drawn on the figure itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "orderlab-plots"

import matplotlib.pyplot as plt

from .readers import AggregateRow, InputError, read_maxdeg, read_sweep_aggregates

METRICS = ("f", "g")
STATS = ("mean", "std", "iqr")


@dataclass
class FigureSpec:
    input_csv: str
    metric: str = "g"
    stat: str = "iqr"
    loglog: bool = True
    annotate_slope: bool = True
    overlay_bound: bool = False  # dashed bound curve; mean-of-g figures only
    out: str = "figure.png"

    def validate(self) -> None:
        if self.metric not in METRICS:
            raise InputError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.stat not in STATS:
            raise InputError(f"stat must be one of {STATS}, got {self.stat!r}")
        if self.overlay_bound and not (self.metric == "g" and self.stat == "mean"):
            raise InputError("bound overlay only applies to the mean-FNR figure")


@dataclass
class RenderSummary:
    out_files: list[str]
    slopes: dict = field(default_factory=dict)  # (density, p_int) -> fitted slope
    gamma_hat: float | None = None
    r2: float | None = None


def _loglog_slope(xs: np.ndarray, ys: np.ndarray) -> float | None:
    keep = ys > 0
    if keep.sum() < 3:
        return None
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)


def _save(fig, out: str) -> list[str]:
    path = Path(out)
    fig.savefig(path, metadata=_clean_metadata(path.suffix))
    plt.close(fig)
    return [str(path)]


def _clean_metadata(suffix: str):
    if suffix == ".png":
        return {"Software": None}
    if suffix == ".svg":
        return {"Date": None}
    return None


def render(spec: FigureSpec) -> RenderSummary:
    """Deviation-width (or mean) panels from sweep aggregates."""
    spec.validate()
    rows = read_sweep_aggregates(spec.input_csv)
    column = f"{spec.metric}_{spec.stat}"
    densities = sorted({r.density for r in rows})
    coverages = sorted({r.p_int for r in rows})

    fig, axes = plt.subplots(
        1, len(densities), figsize=(4.2 * len(densities), 3.6),
        sharey=True, squeeze=False,
    )
    summary = RenderSummary(out_files=[])
    stat_label = {"iqr": "IQR", "std": "std", "mean": "mean"}[spec.stat]
    for ax, density in zip(axes[0], densities):
        panel = [r for r in rows if r.density == density]
        for p_int in coverages:
            curve = sorted((r.d, r.stats[column]) for r in panel if r.p_int == p_int)
            if not curve:
                continue
            ds = np.array([d for d, _ in curve], dtype=float)
            vals = np.array([v for _, v in curve], dtype=float)
            label = f"coverage {p_int:g}"
            if spec.annotate_slope and spec.loglog:
                slope = _loglog_slope(ds, vals)
                summary.slopes[(density, p_int)] = slope
                if slope is not None:
                    label += f" (slope {slope:.2f})"
            ax.plot(ds, vals, marker="o", label=label)
            if spec.overlay_bound:
                bound = sorted((r.d, r.g_bound) for r in panel if r.p_int == p_int)
                ax.plot([d for d, _ in bound], [b for _, b in bound],
                        linestyle="--", alpha=0.7)
        if spec.loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_title(f"density {density:g}")
        ax.set_xlabel("graph size d")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel(f"{stat_label} of {spec.metric}")
    fig.tight_layout()
    summary.out_files = _save(fig, spec.out)
    return summary


def render_fit(spec: FigureSpec) -> RenderSummary:
    """Log-log max-degree scatter with the fitted power law and its exponent."""
    data = read_maxdeg(spec.input_csv)
    ds = np.array([d for d, _ in data.means], dtype=float)
    means = np.array([v for _, v in data.means], dtype=float)
    if ds.size < 3:
        raise InputError(f"need at least 3 sizes for a scaling fit, have {ds.size}")
    slope, intercept = np.polyfit(np.log(ds), np.log(means), 1)
    pred = slope * np.log(ds) + intercept
    ss_tot = float(np.sum((np.log(means) - np.log(means).mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum((np.log(means) - pred) ** 2)) / ss_tot
    gamma_hat = 1.0 / float(slope) + 1.0

    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    if data.points:
        ax.scatter([d for d, _ in data.points], [v for _, v in data.points],
                   s=12, alpha=0.35, label="draws")
    ax.plot(ds, means, marker="o", linestyle="none", color="k", label="mean")
    ax.plot(ds, np.exp(pred), color="C3",
            label=f"fit: gamma_hat={gamma_hat:.2f}, r2={r2:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("graph size d")
    ax.set_ylabel("max total degree")
    title_bits = []
    for key in ("m", "kappa"):
        if key in data.meta:
            title_bits.append(f"{key}={data.meta[key]:g}")
    ax.set_title("max-degree scaling " + " ".join(title_bits))
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_files = _save(fig, spec.out)
    return RenderSummary(out_files=out_files, gamma_hat=gamma_hat, r2=r2)
