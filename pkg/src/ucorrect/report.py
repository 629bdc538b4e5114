"""Rendering of evaluation results: fixed-width tables and figure files.

Figures are written next to the delimited/JSON outputs so a report
directory is self-contained. The Agg backend keeps rendering headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport, LatencyStats


def _fmt(value: float | None, digits: int = 2) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def render_eval_table(report: EvalReport, system_name: str = "ucorrect") -> str:
    """Fixed-width accuracy table with Model / FAR / wer / werr columns."""
    rows = [
        ("Model", "FAR", "wer", "werr"),
        ("No correction", "-", _fmt(report.baseline.wer), "-"),
        (system_name, _fmt(report.far.far), _fmt(report.system.wer), _fmt(report.werr)),
    ]
    widths = [max(len(row[col]) for row in rows) for col in range(4)]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_latency_table(latency: LatencyStats, speedup: float | None = None) -> str:
    lines = [
        f"sentences        {latency.total_sentences}",
        f"mean ms/sent     {latency.mean_ms_per_sent:.3f}",
        f"p50 ms/sent      {latency.p50:.3f}",
        f"p95 ms/sent      {latency.p95:.3f}",
    ]
    if speedup is not None:
        lines.append(f"speedup          {speedup:.2f}x")
    return "\n".join(lines)


def save_eval_figures(
    report: EvalReport, outdir: str | Path, system_name: str = "ucorrect"
) -> list[Path]:
    """Write WER-comparison and correction-breakdown charts; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(5, 3.5))
    labels = ["No correction", system_name]
    values = [report.baseline.wer, report.system.wer]
    bars = ax.bar(labels, values, color=["#888888", "#2b7bba"])
    ax.bar_label(bars, fmt="%.2f")
    ax.set_ylabel("WER (%)")
    ax.set_title(f"WER before/after correction (WERR {report.werr:.2f}%)")
    fig.tight_layout()
    path = outdir / "wer_comparison.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    good = report.far.corrections - report.far.false_alarms
    bars = ax.bar(
        ["true corrections", "false alarms"],
        [good, report.far.false_alarms],
        color=["#3a923a", "#c03d3e"],
    )
    ax.bar_label(bars)
    ax.set_ylabel("changed positions")
    far_text = "-" if report.far.far is None else f"{report.far.far:.1f}%"
    ax.set_title(f"Applied corrections (FAR {far_text})")
    fig.tight_layout()
    path = outdir / "corrections_breakdown.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    return written


def save_latency_figure(
    samples_ms: list[float], latency: LatencyStats, outdir: str | Path
) -> Path:
    """Histogram of per-sentence latencies with p50/p95 markers."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(samples_ms, bins=min(40, max(5, len(samples_ms) // 5)), color="#2b7bba")
    ax.axvline(latency.p50, color="#3a923a", linestyle="--", label=f"p50 {latency.p50:.2f} ms")
    ax.axvline(latency.p95, color="#c03d3e", linestyle="--", label=f"p95 {latency.p95:.2f} ms")
    ax.set_xlabel("ms per sentence")
    ax.set_ylabel("count")
    ax.set_title(f"Correction latency (mean {latency.mean_ms_per_sent:.2f} ms/sent)")
    ax.legend()
    fig.tight_layout()
    path = outdir / "latency_hist.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
