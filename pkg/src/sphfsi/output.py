"""CSV writers and the run manifest."""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np

from sphfsi.probes import ProbeSeries


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_probe_csv(series: ProbeSeries, directory: str | Path) -> Path:
    """``probe_<id>.csv`` with header ``time,<v1>[,<v2>...]`` and LF endings."""
    path = Path(directory) / f"probe_{series.probe_id}.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("time," + ",".join(series.columns) + "\n")
        for t, row in zip(series.times, series.values):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")
    return path


def read_probe_csv(path: str | Path) -> ProbeSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "time":
            raise ValueError(f"{path}: not a probe CSV (header {header!r})")
        series = ProbeSeries(
            probe_id=Path(path).stem.removeprefix("probe_"),
            kind="loaded",
            columns=header[1:],
        )
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            series.append(float(parts[0]), tuple(float(p) for p in parts[1:]))
    return series


def write_snapshot(sim, step: int, directory: str | Path) -> Path:
    """``snap_<step:08d>.csv``: id,body,x,y,vx,vy,rho,p,vonmises.

    The von Mises column is empty for fluid particles; solids report the
    scalar from their current Cauchy stress.
    """
    path = Path(directory) / f"snap_{step:08d}.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write("id,body,x,y,vx,vy,rho,p,vonmises\n")
        pid = 0
        f = sim.fluid
        for i in range(f.n):
            fh.write(
                f"{pid},{f.name},{_fmt(f.pos[i, 0])},{_fmt(f.pos[i, 1])},"
                f"{_fmt(f.vel[i, 0])},{_fmt(f.vel[i, 1])},{_fmt(f.rho[i])},"
                f"{_fmt(f.p[i])},\n"
            )
            pid += 1
        for body in sim.solids:
            s = body.system
            if body.is_wall:
                vm = np.zeros(s.n)
                p_col = np.zeros(s.n)
            else:
                st = body.stress_state()
                vm = st.von_mises
                fg = body.f_grad
                det = fg[:, 0, 0] * fg[:, 1, 1] - fg[:, 0, 1] * fg[:, 1, 0]
                cauchy = np.einsum("nij,nkj->nik", st.pk1, fg) / det[:, None, None]
                # mean Cauchy pressure, compression positive
                p_col = -0.5 * (cauchy[:, 0, 0] + cauchy[:, 1, 1])
            for i in range(s.n):
                fh.write(
                    f"{pid},{body.name},{_fmt(s.pos[i, 0])},{_fmt(s.pos[i, 1])},"
                    f"{_fmt(s.vel[i, 0])},{_fmt(s.vel[i, 1])},{_fmt(s.rho[i])},"
                    f"{_fmt(p_col[i])},{_fmt(vm[i])}\n"
                )
                pid += 1
    return path


def write_manifest(
    directory: str | Path,
    entries: dict,
    partial: bool = False,
) -> Path:
    path = Path(directory) / "manifest.txt"
    with open(path, "w", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
        if partial:
            fh.write("partial_output = true\n")
    return path


def ensure_directory(directory: str | Path) -> Path:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path
