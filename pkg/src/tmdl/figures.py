"""Chart rendering for the report path.

Figures are written as PNG files alongside the delimited report outputs.
Rendering builds Figure objects directly instead of going through pyplot,
so no global state or GUI backend is involved and repeated renders of the
same model produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

from matplotlib.figure import Figure

from tmdl.dread import (
    HIGH_MIN_TENTHS,
    MEDIUM_MIN_TENTHS,
    category_histogram,
    rank_threats,
    severity_histogram,
)
from tmdl.model import SeverityBand, ThreatModel

_BAND_COLORS = {
    SeverityBand.LOW: "#4c9f70",
    SeverityBand.MEDIUM: "#e0a458",
    SeverityBand.HIGH: "#c3423f",
}


def _save(fig: Figure, path: Path) -> None:
    fig.savefig(path, format="png", dpi=120)


def _severity_figure(model: ThreatModel) -> Figure:
    counts = severity_histogram(model)
    fig = Figure(figsize=(5, 3.4))
    ax = fig.subplots()
    bands = list(SeverityBand)
    values = [counts[b] for b in bands]
    bars = ax.bar(
        [b.value for b in bands], values, color=[_BAND_COLORS[b] for b in bands]
    )
    ax.bar_label(bars)
    ax.set_ylabel("threats")
    ax.set_title("Threats by severity band")
    ax.set_ylim(0, max(values + [1]) * 1.2)
    fig.tight_layout()
    return fig


def _category_figure(model: ThreatModel) -> Figure:
    counts = category_histogram(model)
    fig = Figure(figsize=(5.5, 3.4))
    ax = fig.subplots()
    letters = [cat.letter for cat in counts]
    values = list(counts.values())
    bars = ax.bar(letters, values, color="#4a6fa5")
    ax.bar_label(bars)
    ax.set_xlabel("STRIDE category")
    ax.set_ylabel("threats")
    ax.set_title("Threats by category")
    ax.set_ylim(0, max(values + [1]) * 1.2)
    fig.tight_layout()
    return fig


def _score_profile_figure(model: ThreatModel) -> Figure:
    ranking = rank_threats(model)
    fig = Figure(figsize=(7, 3.6))
    ax = fig.subplots()
    if ranking:
        ranks = [r.rank for r in ranking]
        scores = [r.score.tenths / 10 for r in ranking]
        colors = [_BAND_COLORS[r.band] for r in ranking]
        ax.bar(ranks, scores, color=colors, width=0.8)
    for cutoff, label in ((MEDIUM_MIN_TENTHS, "Medium"), (HIGH_MIN_TENTHS, "High")):
        ax.axhline(cutoff / 10, color="#444444", linestyle="--", linewidth=0.8)
        ax.annotate(
            f"{label} ≥ {cutoff / 10}",
            xy=(0.99, cutoff / 10),
            xycoords=("axes fraction", "data"),
            ha="right",
            va="bottom",
            fontsize=8,
            color="#444444",
        )
    ax.set_xlabel("rank")
    ax.set_ylabel("DREAD score")
    ax.set_ylim(0, 4.3)
    ax.set_title("Ranked scores")
    fig.tight_layout()
    return fig


def render_figures(model: ThreatModel, outdir: Path) -> list[Path]:
    """Write the three report charts into ``outdir``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = {
        "severity_bands.png": _severity_figure(model),
        "category_counts.png": _category_figure(model),
        "score_profile.png": _score_profile_figure(model),
    }
    written = []
    for filename, fig in outputs.items():
        path = outdir / filename
        _save(fig, path)
        written.append(path)
    return written
