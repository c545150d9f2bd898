"""Render study CSVs into publication-style figure panels.

Two kinds of input are understood, selected with --kind:

* ``contraction`` (default): a summary CSV with columns
  ``dist,p,n,median_w_distance``.  One panel per distribution, one series
  per order p, log-log axes, with an n^(-1/2) guide line.
* ``discretization``: an error-table CSV with columns
  ``dist,p,M,error_bound``.  One panel per distribution, one series per p,
  log-log axes; rows with an infinite bound are dropped from their series
  (they have no finite ordinate) and the legend marks the affected orders.

The combined figure lands in ``<out>/<kind>.png`` and each panel is also
written alone as ``<out>/<kind>_<dist>.png``.  Rendering is deterministic:
a fixed style, no timestamps, and the PNG Software tag suppressed, so
identical inputs give byte-identical images.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_KIND_COLUMNS = {
    "contraction": ("dist", "p", "n", "median_w_distance"),
    "discretization": ("dist", "p", "M", "error_bound"),
}

_SAVE_OPTS = {"dpi": 110, "metadata": {"Software": None}}


class RenderError(Exception):
    pass


def read_rows(path: str, kind: str) -> list[dict]:
    columns = _KIND_COLUMNS[kind]
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise RenderError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise RenderError(
                f"{path}: missing column(s) {', '.join(missing)}; "
                f"a {kind} CSV needs {', '.join(columns)}"
            )
        rows = []
        for raw in reader:
            rows.append(
                {
                    "dist": raw["dist"],
                    "p": float(raw["p"]),
                    "x": float(raw[columns[2]]),
                    "y": float(raw[columns[3]]),
                }
            )
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return rows


def group_series(rows: list[dict]) -> dict[str, dict[float, list[tuple[float, float]]]]:
    """dist -> p -> [(x, y)] with x ascending."""
    panels: dict[str, dict[float, list[tuple[float, float]]]] = {}
    for row in rows:
        panels.setdefault(row["dist"], {}).setdefault(row["p"], []).append(
            (row["x"], row["y"])
        )
    for series_by_p in panels.values():
        for pts in series_by_p.values():
            pts.sort()
    return panels


def _draw_panel(ax, dist: str, series_by_p: dict, kind: str) -> None:
    xlabel = "n" if kind == "contraction" else "M"
    dropped = []
    for p in sorted(series_by_p):
        pts = [(x, y) for x, y in series_by_p[p] if math.isfinite(y) and y > 0.0]
        if not pts:
            dropped.append(p)
            continue
        xs = [x for x, _ in pts]
        ys = [y for _, y in pts]
        ax.plot(xs, ys, marker="o", markersize=3.5, label=f"p = {p:g}")
    if kind == "contraction":
        finite = [
            (x, y)
            for pts in series_by_p.values()
            for x, y in pts
            if math.isfinite(y) and y > 0.0
        ]
        if finite:
            x0, y0 = min(finite)
            xs = sorted({x for x, _ in finite})
            ax.plot(
                xs,
                [y0 * math.sqrt(x0 / x) for x in xs],
                linestyle="--",
                color="0.5",
                linewidth=1.0,
                label="slope -1/2",
            )
    if dropped:
        ax.plot([], [], " ", label="inf: p = " + ", ".join(f"{p:g}" for p in dropped))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_title(dist)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("median $W_p$" if kind == "contraction" else "error bound")
    ax.legend(fontsize=7)


def render(summary: str, out_dir: str, kind: str = "contraction") -> list[Path]:
    """Write the combined figure and one image per panel; returns the paths."""
    if kind not in _KIND_COLUMNS:
        raise RenderError(f"unknown kind {kind!r}")
    panels = group_series(read_rows(summary, kind))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    names = sorted(panels)
    ncols = min(3, len(names))
    nrows = (len(names) + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 3.2 * nrows), squeeze=False
    )
    for idx, dist in enumerate(names):
        _draw_panel(axes[idx // ncols][idx % ncols], dist, panels[dist], kind)
    for idx in range(len(names), nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.tight_layout()
    combined = out / f"{kind}.png"
    fig.savefig(combined, **_SAVE_OPTS)
    plt.close(fig)
    written.append(combined)

    for dist in names:
        fig, ax = plt.subplots(figsize=(4.0, 3.2))
        _draw_panel(ax, dist, panels[dist], kind)
        fig.tight_layout()
        single = out / f"{kind}_{dist}.png"
        fig.savefig(single, **_SAVE_OPTS)
        plt.close(fig)
        written.append(single)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render wass1d study CSVs to PNG panels."
    )
    parser.add_argument("--summary", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--kind", choices=tuple(_KIND_COLUMNS), default="contraction"
    )
    args = parser.parse_args(argv)
    try:
        written = render(args.summary, args.out, args.kind)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
