"""Delimited output and figure rendering for experiment runs.

Every CSV carries its header and ends with a comment line holding a hash of
the experiment parameters, so files can be traced back to the exact run
that produced them.  Figures are rendered with a non-interactive backend
and contain no timestamps: rerunning the same experiment reproduces every
output byte for byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "ExperimentSpec",
    "write_csv",
    "lognorm_floor",
    "render_series_figure",
    "render_frequency_figure",
    "render_green_figure",
    "render_window_figure",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """Canonical description of one experiment; execution details such as
    the thread count or output directory are deliberately excluded, so the
    hash identifies the result, not the run environment."""

    command: str
    params: tuple = field(default_factory=tuple)  # sorted (key, value) pairs

    @classmethod
    def build(cls, command: str, **params) -> "ExperimentSpec":
        items = tuple(sorted((k, str(v)) for k, v in params.items() if v is not None))
        return cls(command, items)

    def canonical(self) -> str:
        return "|".join([self.command] + [f"{k}={v}" for k, v in self.params])

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def write_csv(path, header: str, rows, spec: ExperimentSpec) -> None:
    lines = [header]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    lines.append(f"# spec_hash={spec.digest()}")
    Path(path).write_text("\n".join(lines) + "\n")


def lognorm_floor(length: int, start_exp: int = 0) -> int:
    """Rendering substitute for log2|0|_2: one below any log-norm reachable
    within the given number of steps (each step moves the exponent by at
    most one)."""
    return -(abs(start_exp) + length + 1)


def _finish(fig, path):
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_series_figure(path, series_by_label: dict, floor: int) -> None:
    """Log-norm trajectories; zero positions are drawn at the floor level."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for label, series in series_by_label.items():
        y = np.where(np.isfinite(series), series, floor)
        ax.plot(y, lw=0.8, label=label)
    ax.axhline(0, color="grey", lw=0.5)
    ax.set_xlabel("step")
    ax.set_ylabel("log2 of 2-adic norm")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _finish(fig, path)


def render_frequency_figure(path, frequencies: dict) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(frequencies)
    ax.bar(range(len(labels)), [frequencies[k] for k in labels], color="steelblue")
    ax.set_xticks(range(len(labels)), labels)
    ax.set_ylabel("frequency")
    ax.set_ylim(0, 1)
    fig.tight_layout()
    _finish(fig, path)


def render_green_figure(path, rows) -> None:
    """rows: (radius, lam, green, ...) — one line per lambda."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_lam: dict = {}
    for r in rows:
        by_lam.setdefault(r[1], []).append((r[0], r[2]))
    for lam, pts in sorted(by_lam.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"lambda={lam}")
    ax.set_xlabel("truncation radius")
    ax.set_ylabel("Green value at center")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _finish(fig, path)


def render_window_figure(path, reports) -> None:
    """Final slope-jump value per window point."""
    fig, ax = plt.subplots(figsize=(8, 4))
    xs = [float(r.point) for r in reports]
    ys = [r.final_value for r in reports]
    ax.stem(xs, ys, basefmt="grey")
    ax.set_xlabel("window point")
    ax.set_ylabel("final configuration value")
    fig.tight_layout()
    _finish(fig, path)
