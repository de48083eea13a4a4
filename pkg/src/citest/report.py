"""Benchmark figure rendering.

The bench command writes its power/FDR curves as a PNG next to the CSV and
JSON reports. PNG metadata is stripped so that identical reports render to
identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_benchmark_figure(report, path):
    """Plot power (and FDR for skeleton benchmarks) against sample size.

    Shaded bands show plus/minus one binomial standard error around each
    curve.
    """
    ns = [a.n for a in report.aggregates]
    power = [a.power for a in report.aggregates]
    power_se = [a.power_se for a in report.aggregates]

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    ax.plot(ns, power, color="tab:blue", marker="o", label="power")
    ax.fill_between(
        ns,
        [p - s for p, s in zip(power, power_se)],
        [p + s for p, s in zip(power, power_se)],
        color="tab:blue",
        alpha=0.2,
        linewidth=0,
    )
    if report.kind == "fdr":
        fdr = [a.fdr for a in report.aggregates]
        fdr_se = [a.fdr_se for a in report.aggregates]
        ax.plot(ns, fdr, color="tab:red", marker="s", label="FDR")
        ax.fill_between(
            ns,
            [f - s for f, s in zip(fdr, fdr_se)],
            [f + s for f, s in zip(fdr, fdr_se)],
            color="tab:red",
            alpha=0.2,
            linewidth=0,
        )
    ax.set_xlabel("sample size n")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.02, 1.02)
    ax.set_xscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    ax.set_title(f"{report.kind} benchmark ({report.method})")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
