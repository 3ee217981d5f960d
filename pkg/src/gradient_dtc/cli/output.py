"""Result tables on disk: comma-separated values with '#' metadata lines."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..diagnostics import power_law_fit

# log-log panels: experiment -> (metric, smallest g/J used in the footer fit)
LOGLOG = {
    "qfi": ("f_Q", 30.0), "entropy": ("S_over_L", 0.0), "participation": ("PR", None), "sw_checks": ("eta", 0.0),
}


class PlotDataError(ValueError):
    """The table cannot produce the requested plot files."""


@dataclass
class ResultTable:
    experiment: str
    axes: list
    metrics: list
    rows: list
    metadata: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    description: str = ""

    @property
    def columns(self) -> list[str]:
        cols = list(self.axes)
        for m in self.metrics:
            cols += [f"{m}_mean", f"{m}_std"]
        return cols + ["count"]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])

    def select(self, **where) -> list[dict]:
        return [r for r in self.rows if all(np.isclose(r[k], v) for k, v in where.items())]


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv_lines(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def table_text(table: ResultTable) -> str:
    lines = [f"# {k}: {v}" for k, v in table.metadata.items()]
    if table.description:
        lines.append(f"# description: {table.description}")
    lines.append("# config: " + json.dumps(table.config, sort_keys=True))
    cols = table.columns
    body = _csv_lines(cols, [[row[c] for c in cols] for row in table.rows])
    return "\n".join(lines) + "\n" + body


def write_table(table: ResultTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(table_text(table))
    return path


def read_table(path: str | Path) -> tuple[dict, list[str], np.ndarray]:
    """(metadata incl. parsed config, header, numeric data) of a written table."""
    meta, data_lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value) if key == "config" else value
        elif line:
            data_lines.append(line)
    header = data_lines[0].split(",")
    data = np.array([[float(x) for x in l.split(",")] for l in data_lines[1:]], ndmin=2)
    return meta, header, data


def numeric_lines(path: str | Path) -> list[str]:
    return [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]


def _J_of(table: ResultTable, row: dict) -> float:
    return float(row.get("J_mhz", table.config.get("model", {}).get("J_mhz", 0.0)))


def emit_plot_data(
    table: ResultTable, figure_id: str, directory: str | Path, metrics: list[str] | None = None,
) -> list[Path]:
    """One file per metric (axes, mean, std), plus log-log panels for g/J scans.

    Everything is validated before the first file is written.
    """
    if not table.rows:
        raise PlotDataError("the table has no rows to plot")
    chosen = table.metrics if metrics is None else list(metrics)
    if not chosen:
        raise PlotDataError("empty metric selection")
    missing = [m for m in chosen if m not in table.metrics]
    if missing:
        raise PlotDataError(f"table has no metric(s) {missing}")
    files: dict[Path, str] = {}
    directory = Path(directory)
    head = [f"# figure: {figure_id}", f"# experiment: {table.experiment}"]
    for m in chosen:
        header = list(table.axes) + ["mean", "std"]
        rows = [[r[a] for a in table.axes] + [r[f"{m}_mean"], r[f"{m}_std"]] for r in table.rows]
        text = "\n".join(head + [f"# columns: {', '.join(table.axes)} vs {m} (ensemble mean, std)"])
        files[directory / f"{figure_id}_{m}.csv"] = text + "\n" + _csv_lines(header, rows)
    spec = LOGLOG.get(table.experiment)
    if spec and "g_mhz" in table.axes and spec[0] in chosen:
        files.update(_loglog_files(table, figure_id, directory, head, *spec))
    directory.mkdir(parents=True, exist_ok=True)
    for path, text in files.items():
        path.write_text(text)
    return list(files)


def _loglog_files(table, figure_id, directory, head, metric, tail):
    others = [a for a in table.axes if a not in ("g_mhz", "J_mhz")]
    panels: dict[tuple, list] = {}
    for r in table.rows:
        panels.setdefault(tuple(r[a] for a in others), []).append(r)
    out = {}
    for key, rows in panels.items():
        x = np.array([r["g_mhz"] / _J_of(table, r) for r in rows])
        y = np.array([r[f"{metric}_mean"] for r in rows])
        order = np.argsort(x)
        x, y = x[order], y[order]
        tag = "_".join(f"{a}{fmt(v)}" for a, v in zip(others, key))
        name = f"{figure_id}_{metric}_loglog" + (f"_{tag}" if tag else "") + ".csv"
        text = "\n".join(head + [f"# panel: {dict(zip(others, key))}", f"# columns: g/J, {metric}"])
        text += "\n" + _csv_lines(["g_over_J", metric], [[a, b] for a, b in zip(x, y)])
        if tail is not None:
            sel = (x >= tail) & (y > 0)
            if sel.sum() >= 2:
                a, k = power_law_fit(x[sel], y[sel])
                text += f"# fit over g/J >= {fmt(tail)}: {metric} = alpha (g/J)^exponent, alpha={fmt(a)}, exponent={fmt(k)}\n"
        out[directory / name] = text
    return out
