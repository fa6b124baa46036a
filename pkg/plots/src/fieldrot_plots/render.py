"""Recipe-driven figure renderer for fieldrot CSV outputs.

Usage: fieldrot-plots --figure N --data-dir DIR --out FILE.png

Each of the eight figures has a JSON recipe (recipes/figN.json) mapping CSV
columns to line styles and markers; rendering never recomputes anything —
the plotted arrays are exactly the CSV values.

Exit codes: 0 success, 2 recipe/data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

RECIPE_DIR = Path(__file__).parent / "recipes"


class RecipeError(ValueError):
    """Recipe references a missing file/column or the data is empty."""


@dataclass(frozen=True)
class FigureRecipe:
    figure: int
    kind: str                 # "lines" | "scatter"
    inputs: dict              # role -> CSV filename
    spec: dict                # full recipe document

    @property
    def xlabel(self) -> str:
        return self.spec.get("xlabel", "")

    @property
    def ylabel(self) -> str:
        return self.spec.get("ylabel", "")


def load_recipe(figure: int) -> FigureRecipe:
    path = RECIPE_DIR / f"fig{figure}.json"
    if not path.exists():
        raise RecipeError(f"no recipe for figure {figure} (expected {path.name})")
    spec = json.loads(path.read_text(encoding="utf-8"))
    return FigureRecipe(
        figure=figure, kind=spec["kind"], inputs=spec["inputs"], spec=spec
    )


def read_columns(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise RecipeError(f"input CSV not found: {path}")
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RecipeError(f"{path.name}: file is empty") from None
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise RecipeError(f"{path.name}: no data rows")
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def _column(cols: dict[str, np.ndarray], name: str, source: str) -> np.ndarray:
    if name not in cols:
        raise RecipeError(f"{source}: missing column {name!r}")
    return cols[name]


def _render_lines(recipe: FigureRecipe, data_dir: Path):
    source = recipe.inputs["main"]
    cols = read_columns(data_dir / source)
    x = _column(cols, recipe.spec["x"], source)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for series in recipe.spec["series"]:
        y = _column(cols, series["column"], source)
        ax.plot(
            x,
            y,
            linestyle=series.get("style", "solid"),
            color=series.get("color"),
            label=series.get("label", series["column"]),
        )
    _finish_axes(ax, recipe)
    fig.tight_layout()
    return fig


def _render_scatter(recipe: FigureRecipe, data_dir: Path):
    summary_name = recipe.inputs["summary"]
    scatter_name = recipe.inputs["scatter"]
    summary = read_columns(data_dir / summary_name)
    scatter = read_columns(data_dir / scatter_name)
    panel_flag = _column(scatter, recipe.spec["panel_column"], scatter_name)
    sc_theta = _column(scatter, recipe.spec["scatter_x"], scatter_name)
    sc_error = _column(scatter, recipe.spec["scatter_y"], scatter_name)
    theta = _column(summary, recipe.spec["x"], summary_name)

    panels = recipe.spec["panels"]
    fig, axes = plt.subplots(
        1, len(panels), figsize=(6.0 * len(panels), 4.2), squeeze=False
    )
    for ax, panel in zip(axes[0], panels):
        mask = panel_flag == panel["flag"]
        ax.plot(
            sc_theta[mask],
            sc_error[mask],
            linestyle="none",
            marker="+",
            color="0.6",
            markersize=4,
            label="samples",
        )
        ax.plot(
            theta,
            _column(summary, panel["theory_column"], summary_name),
            linestyle="dotted",
            color="C0",
            label="theory (average)",
        )
        ax.plot(
            theta,
            _column(summary, panel["mean_column"], summary_name),
            linestyle="none",
            marker="s",
            markerfacecolor="none",
            color="C0",
            label="sample average",
        )
        ax.plot(
            theta,
            _column(summary, panel["cat_x_column"], summary_name),
            linestyle="none",
            marker="x",
            color="C3",
            label="x-cat",
        )
        ax.plot(
            theta,
            _column(summary, panel["cat_z_column"], summary_name),
            linestyle="none",
            marker="d",
            markerfacecolor="none",
            color="C2",
            label="z-cat",
        )
        ax.set_title(panel.get("title", ""))
        _finish_axes(ax, recipe)
    fig.tight_layout()
    return fig


def _finish_axes(ax, recipe: FigureRecipe):
    ax.set_xlabel(recipe.xlabel)
    ax.set_ylabel(recipe.ylabel)
    if recipe.spec.get("yscale"):
        ax.set_yscale(recipe.spec["yscale"])
    ax.legend(fontsize=8)


def render_figure(figure: int, data_dir: Path):
    """Build the matplotlib Figure for one recipe (no file output)."""
    recipe = load_recipe(figure)
    if recipe.kind == "lines":
        return _render_lines(recipe, Path(data_dir))
    if recipe.kind == "scatter":
        return _render_scatter(recipe, Path(data_dir))
    raise RecipeError(f"fig{figure}.json: unknown kind {recipe.kind!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fieldrot-plots", description="Render fieldrot figure CSVs to images."
    )
    parser.add_argument("--figure", type=int, required=True, help="figure number, 1..8")
    parser.add_argument("--data-dir", required=True, help="directory with the CLI CSVs")
    parser.add_argument("--out", required=True, help="output image path (.png/.pdf/.svg)")
    args = parser.parse_args(argv)
    try:
        fig = render_figure(args.figure, Path(args.data_dir))
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
