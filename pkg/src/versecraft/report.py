"""Run-log reports: chain diagnostics rendered to figures plus a TSV trace.

Energy and cumulative acceptance rate are the two mixing diagnostics the
sampler exports; constraint-change markers show up as dashed verticals.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .runlog import ConstraintMarker, LogEntry, SampleRecord, SessionEmission, read_log


def _series(entries: list[LogEntry]):
    steps, energies, rates, ids, texts, marker_steps = [], [], [], [], [], []
    for e in entries:
        if isinstance(e, ConstraintMarker):
            marker_steps.append(e.step)
        elif isinstance(e, (SampleRecord, SessionEmission)):
            steps.append(e.step)
            energies.append(e.energy)
            rates.append(e.accept_rate)
            ids.append(e.ids)
            texts.append(e.text if isinstance(e, SessionEmission) else "")
    return steps, energies, rates, ids, texts, marker_steps


def _trace_figure(steps, values, marker_steps, ylabel, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(steps, values, lw=0.9)
    for m in marker_steps:
        ax.axvline(m, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(log_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render energy/acceptance figures and the delimited trace; returns paths."""
    entries = read_log(log_path)
    steps, energies, rates, ids, texts, marker_steps = _series(entries)
    if not steps:
        raise ValueError(f"no emissions in run log {log_path}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    energy_png = out / "energy_trace.png"
    accept_png = out / "acceptance_rate.png"
    trace_tsv = out / "trace.tsv"

    _trace_figure(steps, energies, marker_steps, "energy", energy_png)
    _trace_figure(steps, rates, marker_steps, "acceptance rate", accept_png)

    with open(trace_tsv, "w", encoding="utf-8") as fh:
        fh.write("step\tenergy\taccept_rate\tids\ttext\n")
        for s, e, r, i, t in zip(steps, energies, rates, ids, texts):
            fh.write(f"{s}\t{e!r}\t{r!r}\t{' '.join(map(str, i))}\t{t}\n")

    return [energy_png, accept_png, trace_tsv]
