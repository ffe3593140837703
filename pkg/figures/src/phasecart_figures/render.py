"""Render publication-style figures from phasecart CSV outputs.

The scripts are read-only consumers of the CSV contract: no numerical work
happens here beyond axis transforms (the scaling fit is drawn from the
already-fitted columns).  Rendering is deterministic: fixed figure size,
fixed dpi, fixed colormap, and no timestamps in the output, so re-running
on identical inputs produces byte-identical images.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "FigureSpec",
    "FigureError",
    "MissingColumnError",
    "EmptyDataError",
    "KINDS",
    "render",
]

KINDS = ("separatrix", "fluctuation", "fidelity", "heatmap", "error-map",
         "scaling-fit")

_FIGSIZE = (6.0, 4.5)
_DPI = 120
_CMAP = "viridis"
_METADATA = {"Software": "phasecart-figures"}


class FigureError(RuntimeError):
    """Base class for figure rendering failures."""


class MissingColumnError(FigureError):
    def __init__(self, column: str, path: str):
        self.column = column
        super().__init__(f"column '{column}' missing from {path}")


class EmptyDataError(FigureError):
    def __init__(self, path: str):
        super().__init__(f"no data rows in {path}")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV, figure kind, labels, output image path.

    ``columns`` overrides the kind's default column names, e.g.
    {"x": "mu12", "y": "mu23", "value": "label"} for a heatmap.
    """

    csv_path: str
    kind: str
    out_path: str
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureError(f"unknown figure kind '{self.kind}'")


def _read(path: str) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    if not rows:
        raise EmptyDataError(path)
    return header, rows


def _column(rows, header, name, path, numeric=True):
    if name not in header:
        raise MissingColumnError(name, path)
    vals = [r[name] for r in rows]
    if not numeric:
        return vals
    try:
        return np.array([float(v) for v in vals])
    except ValueError as exc:
        raise FigureError(f"column '{name}' in {path} is not numeric: {exc}")


def _new_axes(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    if spec.xlabel:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel:
        ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    return fig, ax


def _save(fig, spec: FigureSpec) -> str:
    fig.savefig(spec.out_path, format="png", metadata=dict(_METADATA))
    plt.close(fig)
    return spec.out_path


def _grid(x, y, v):
    """Pivot three flat columns into a (len(ys), len(xs)) array."""
    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[yi, xi] = v
    return xs, ys, grid


def _render_separatrix(spec: FigureSpec) -> str:
    header, rows = _read(spec.csv_path)
    c = {"x": "mu23", "y": "mu12_boundary", "order": "order"} | spec.columns
    x = _column(rows, header, c["x"], spec.csv_path)
    y = _column(rows, header, c["y"], spec.csv_path)
    order = _column(rows, header, c["order"], spec.csv_path, numeric=False)
    fig, ax = _new_axes(spec)
    for tag, style in (("second", "-"), ("first", "--")):
        mask = np.array([o == tag for o in order])
        if mask.any():
            ax.plot(x[mask], y[mask], style, color="C0",
                    label=f"{tag} order")
    ax.fill_between(x, y, 0.0, color="C0", alpha=0.15)
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="upper right")
    return _save(fig, spec)


def _render_fluctuation(spec: FigureSpec) -> str:
    header, rows = _read(spec.csv_path)
    c = {"x": "gamma", "exact": "exact_var_n",
         "coherent": "coherent_var_n"} | spec.columns
    x = _column(rows, header, c["x"], spec.csv_path)
    exact = _column(rows, header, c["exact"], spec.csv_path)
    coh = _column(rows, header, c["coherent"], spec.csv_path)
    fig, ax = _new_axes(spec)
    ax.plot(x, exact, "-", color="C0", label="exact")
    ax.plot(x, coh, "-", color="C3", label="coherent")
    ax.legend(loc="upper left")
    return _save(fig, spec)


def _render_fidelity(spec: FigureSpec) -> str:
    header, rows = _read(spec.csv_path)
    c = {"x": "gamma", "y": "fidelity"} | spec.columns
    x = _column(rows, header, c["x"], spec.csv_path)
    y = _column(rows, header, c["y"], spec.csv_path)
    fig, ax = _new_axes(spec)
    ax.plot(x, y, "-", color="C0")
    ax.set_ylim(min(0.99, float(np.min(y)) - 0.001), 1.0005)
    return _save(fig, spec)


def _render_heatmap(spec: FigureSpec, annotate_max: bool = False) -> str:
    header, rows = _read(spec.csv_path)
    c = {"x": "mu12", "y": "mu23", "value": "label"} | spec.columns
    x = _column(rows, header, c["x"], spec.csv_path)
    y = _column(rows, header, c["y"], spec.csv_path)
    name = c["value"]
    if name not in header:
        raise MissingColumnError(name, spec.csv_path)
    raw = [r[name] for r in rows]
    try:
        v = np.array([float(s) for s in raw])
        categories = None
    except ValueError:
        categories = sorted(set(raw))
        lut = {lab: i for i, lab in enumerate(categories)}
        v = np.array([float(lut[s]) for s in raw])
    xs, ys, grid = _grid(x, y, v)
    fig, ax = _new_axes(spec)
    im = ax.pcolormesh(xs, ys, grid, cmap=_CMAP, shading="nearest")
    if categories is not None:
        cbar = fig.colorbar(im, ax=ax, ticks=range(len(categories)))
        cbar.ax.set_yticklabels(categories)
    else:
        fig.colorbar(im, ax=ax)
        if annotate_max:
            flat = np.nanargmax(grid)
            iy, ix = np.unravel_index(flat, grid.shape)
            ax.plot([xs[ix]], [ys[iy]], "r+", markersize=12)
            ax.annotate(f"max {grid[iy, ix]:.3g}", (xs[ix], ys[iy]),
                        textcoords="offset points", xytext=(6, 6),
                        color="red")
    return _save(fig, spec)


def _render_error_map(spec: FigureSpec) -> str:
    spec2 = FigureSpec(spec.csv_path, "heatmap", spec.out_path, spec.xlabel,
                       spec.ylabel, spec.title,
                       {"value": "delta"} | spec.columns)
    return _render_heatmap(spec2, annotate_max=True)


def _render_scaling_fit(spec: FigureSpec) -> str:
    header, rows = _read(spec.csv_path)
    c = {"x": "ln_N", "y": "ln_dmu", "s": "s", "A": "A",
         "r2": "r2"} | spec.columns
    x = _column(rows, header, c["x"], spec.csv_path)
    y = _column(rows, header, c["y"], spec.csv_path)
    s = _column(rows, header, c["s"], spec.csv_path)[0]
    A = _column(rows, header, c["A"], spec.csv_path)[0]
    r2 = _column(rows, header, c["r2"], spec.csv_path)[0]
    fig, ax = _new_axes(spec)
    ax.plot(x, y, "o", color="C0", label="data")
    xf = np.linspace(float(np.min(x)), float(np.max(x)), 50)
    ax.plot(xf, np.log(A) + s * xf, "-", color="C3",
            label=f"fit: s = {s:.4f}, r$^2$ = {r2:.4f}")
    ax.legend(loc="best")
    return _save(fig, spec)


_RENDERERS = {
    "separatrix": _render_separatrix,
    "fluctuation": _render_fluctuation,
    "fidelity": _render_fidelity,
    "heatmap": _render_heatmap,
    "error-map": _render_error_map,
    "scaling-fit": _render_scaling_fit,
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path.

    Raises MissingColumnError when a required column is absent and
    EmptyDataError when the CSV has no data rows.
    """
    return _RENDERERS[spec.kind](spec)
