"""Trajectory records and their writers (CSV, SVG profile plot, JSON summary)."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig, dumps
from .operator import StepFailure
from .stepper import Trajectory, run

CSV_HEADER = ("t_s", "z_cm", "theta")
OUTPUT_ENV = "PERIRICHARDS_OUTPUT"


@dataclass
class TrajectoryRecord:
    """A finished (or interrupted) run ready to be written out."""

    config: SimConfig
    times: np.ndarray
    z: np.ndarray
    theta: np.ndarray  # shape (snapshots, N + 1)
    diagnostics: dict = field(default_factory=dict)
    complete: bool = True
    version: str = __version__

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        if self.theta.shape != (len(self.times), len(self.z)):
            raise ValueError(f"theta has shape {self.theta.shape}, expected ({len(self.times)}, {len(self.z)})")

    @classmethod
    def from_trajectory(cls, config: SimConfig, traj: Trajectory) -> "TrajectoryRecord":
        # depth ascending for output
        order = np.argsort(traj.z)
        times = np.array([s.t for s in traj.snapshots])
        theta = np.array([s.theta[order] for s in traj.snapshots])
        diag = {
            "steps_taken": traj.steps_taken,
            "steps_requested": config.n_steps,
            "clamp_count": traj.clamp_count,
            "theta_min": traj.theta_min,
            "theta_max": traj.theta_max,
            "final_rhs_norm": traj.final.diagnostics.rhs_norm,
            "failure": traj.failure,
        }
        return cls(config, times, traj.z[order], theta, diag, traj.completed)

    def rows(self):
        for t, values in zip(self.times, self.theta):
            for z, th in zip(self.z, values):
                yield t, z, th


def output_root(default="runs") -> Path:
    return Path(os.environ.get(OUTPUT_ENV, default))


def write_csv(record: TrajectoryRecord, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for t, z, th in record.rows():
            w.writerow((repr(float(t)), repr(float(z)), repr(float(th))))
    return path


def read_csv(path):
    """Return ``(t, z, theta)`` columns of a trajectory CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        data = np.array([[float(x) for x in row] for row in reader])
    return data.T if data.size else (np.empty(0),) * 3


def _ticks(lo, hi, n=5):
    step = (hi - lo) / (n - 1) if hi > lo else 1.0
    return [lo + i * step for i in range(n)]


def render_svg(record: TrajectoryRecord, width=640, height=480) -> str:
    """Profile plot: moisture content on x, depth on y (increasing downward)."""
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    zlo, zhi = float(record.z.min()), float(record.z.max())
    finite = record.theta[np.isfinite(record.theta)]
    tlo, thi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if thi - tlo < 1e-9:
        tlo, thi = tlo - 0.01, thi + 0.01
    pad = 0.05 * (thi - tlo)
    tlo, thi = tlo - pad, thi + pad

    def x_of(th):
        return ml + (th - tlo) / (thi - tlo) * pw

    def y_of(z):
        return mt + (z - zlo) / (zhi - zlo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{record.config.label}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(tlo, thi):
        x = x_of(v)
        out.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{mt + ph + 18}" text-anchor="middle" font-size="11">{v:.3f}</text>')
    for v in _ticks(zlo, zhi):
        y = y_of(v)
        out.append(f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{v:g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">theta</text>')
    out.append(
        f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {mt + ph / 2:.1f})">depth z [cm]</text>'
    )
    k = len(record.times)
    for i, (t, values) in enumerate(zip(record.times, record.theta)):
        ok = np.isfinite(values)
        pts = " ".join(f"{x_of(th):.2f},{y_of(z):.2f}" for z, th in zip(record.z[ok], values[ok]))
        shade = int(200 * (1 - i / max(k - 1, 1)))
        out.append(
            f'<polyline fill="none" stroke="rgb({shade},{shade},255)" stroke-width="1.2" '
            f'points="{pts}"><title>t = {t:g} s</title></polyline>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(record: TrajectoryRecord, path) -> Path:
    path = Path(path)
    path.write_text(render_svg(record), encoding="utf-8")
    return path


def summary(record: TrajectoryRecord) -> dict:
    return {
        "label": record.config.label,
        "version": record.version,
        "complete": record.complete,
        "config_sha256": record.config.digest(),
        "config": dumps(record.config),
        "n_modes": record.config.n_modes,
        "snapshots": len(record.times),
        "final_time": float(record.times[-1]),
        "diagnostics": record.diagnostics,
    }


def write_summary(record: TrajectoryRecord, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(summary(record), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_outputs(record: TrajectoryRecord, directory) -> dict:
    """Write the configured formats into ``directory``; returns format -> path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = "trajectory" if record.complete else "partial"
    writers = {"csv": (write_csv, ".csv"), "svg": (write_svg, ".svg"), "summary": (write_summary, ".json")}
    paths = {}
    for fmt in record.config.output.formats:
        fn, ext = writers[fmt]
        name = "summary.json" if fmt == "summary" else stem + ext
        paths[fmt] = fn(record, directory / name)
    return paths


def run_scenario(config: SimConfig, out_dir=None):
    """Run ``config`` and write its outputs.

    Returns ``(record, paths)``. On a step failure the partial trajectory is
    written with ``complete = false`` and the :class:`StepFailure` is re-raised
    with ``record`` and ``paths`` attached.
    """
    out_dir = Path(out_dir) if out_dir is not None else output_root() / config.label
    try:
        traj = run(config)
    except StepFailure as exc:
        if exc.partial is not None:
            record = TrajectoryRecord.from_trajectory(config, exc.partial)
            exc.record = record
            exc.paths = write_outputs(record, out_dir)
        raise
    record = TrajectoryRecord.from_trajectory(config, traj)
    return record, write_outputs(record, out_dir)
