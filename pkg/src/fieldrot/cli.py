"""Command-line orchestrator: figure datasets, error queries, ensembles, sweeps.

File formats (stable for CI diffing): CSV with a header row, lowercase
snake_case columns, comma separated, floats at 12 significant digits, UTF-8,
Unix newlines.  Every run writes a JSON sidecar with all parameters, the
seed, and the code version; feeding that sidecar back through --config
reproduces the run bit for bit.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

import fieldrot
from fieldrot import formulas
from fieldrot.core import (
    AtomState,
    TruncationError,
    cat_state,
    coherent_state,
    haar_random_state,
    squeezed_coherent_state,
)
from fieldrot.dynamics import ConvergenceError, RotationSpec, gate_error_exact
from fieldrot.ensemble import EnsembleRun, run_ensemble
from fieldrot.perturbation import perturbative_error

DEFAULT_GRID_POINTS = 121
ENSEMBLE_GRID_POINTS = 13    # scatter figures; exact evolution per point is costly


class SpecParseError(ValueError):
    """State/field spec string failed to parse; message names the segment."""


# ---------------------------------------------------------------- formatting

def format_float(value: float) -> str:
    return f"{float(value):.12g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    lines = path.read_text(encoding="utf-8").strip().split("\n")
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def write_sidecar(path: Path, command: str, params: dict, outputs: list[str]) -> None:
    doc = {
        "command": command,
        "params": params,
        "version": fieldrot.__version__,
        "outputs": outputs,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ------------------------------------------------------------- spec parsing

def _parse_kv_segments(segments: list[str], spec: str) -> dict[str, str]:
    out = {}
    for pos, seg in enumerate(segments, start=1):
        if "=" not in seg:
            raise SpecParseError(
                f"segment {pos} ({seg!r}) of spec {spec!r}: expected key=value"
            )
        key, _, value = seg.partition("=")
        out[key] = value
    return out


def parse_state_spec(spec: str) -> AtomState:
    """Parse "cat-x:4", "cat-z:3", "haar:seed=7:n=3", "excited", "ground",
    or "@amplitudes.json"."""
    if spec.startswith("@"):
        doc = json.loads(Path(spec[1:]).read_text(encoding="utf-8"))
        amp = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        amp = amp / np.linalg.norm(amp)
        return AtomState(amplitudes=amp, n_atoms=int(doc["n_atoms"]))
    head, *rest = spec.split(":")
    if head == "excited":
        return AtomState(amplitudes=np.array([0.0, 1.0], dtype=complex), n_atoms=1)
    if head == "ground":
        return AtomState(amplitudes=np.array([1.0, 0.0], dtype=complex), n_atoms=1)
    if head in ("cat-x", "cat-z"):
        if len(rest) != 1:
            raise SpecParseError(f"spec {spec!r}: expected {head}:<n_atoms>")
        try:
            n = int(rest[0])
        except ValueError:
            raise SpecParseError(
                f"segment 2 ({rest[0]!r}) of spec {spec!r}: not an integer"
            ) from None
        return cat_state(head[-1], n)
    if head == "haar":
        kv = _parse_kv_segments(rest, spec)
        try:
            return haar_random_state(int(kv["n"]), int(kv["seed"]))
        except KeyError as exc:
            raise SpecParseError(f"spec {spec!r}: missing key {exc}") from None
    raise SpecParseError(f"segment 1 ({head!r}) of spec {spec!r}: unknown state kind")


def parse_field_spec(spec: str):
    """Parse "coherent:alpha=10" or "squeezed:alpha=10:r=0.5[:n_max=...]"."""
    head, *rest = spec.split(":")
    kv = _parse_kv_segments(rest, spec)
    try:
        alpha = float(kv["alpha"])
    except KeyError:
        raise SpecParseError(f"spec {spec!r}: missing key 'alpha'") from None
    n_max = int(kv["n_max"]) if "n_max" in kv else None
    if head == "coherent":
        return coherent_state(alpha, n_max)
    if head == "squeezed":
        try:
            r = float(kv["r"])
        except KeyError:
            raise SpecParseError(f"spec {spec!r}: missing key 'r'") from None
        return squeezed_coherent_state(alpha, r, n_max)
    raise SpecParseError(f"segment 1 ({head!r}) of spec {spec!r}: unknown field kind")


# ------------------------------------------------------------------ figures

def _theta_grid(n_points: int) -> np.ndarray:
    return np.linspace(0.0, math.pi, n_points)


def _safe_theta(theta: float) -> float:
    # continuous limit at theta = 0 for the log-form optima
    return max(theta, 1e-12)


def _figure1(params: dict):
    n = params["n_atoms"]
    alpha = params["alpha"]
    thetas = _theta_grid(params["grid_points"])
    rows = []
    for t in thetas:
        rows.append(
            (
                t,
                formulas.cat_error(formulas.CatErrorParams("x", n, alpha, t)),
                formulas.cat_error_opt("x", n, alpha, t),
                formulas.cat_error(formulas.CatErrorParams("z", n, alpha, t)),
                formulas.cat_error_opt("z", n, alpha, t),
            )
        )
    header = ["theta", "xcat_coherent", "xcat_squeezed", "zcat_coherent", "zcat_squeezed"]
    return {"main": (header, rows)}


def _figure2(params: dict):
    n_list = params["n_list"]
    thetas = _theta_grid(params["grid_points"])
    rows = []
    for t in thetas:
        row = [t]
        for n in n_list:
            row.append(math.sinh(formulas.cat_r_opt("x", n, _safe_theta(t))) ** 2)
        rows.append(row)
    header = ["theta"] + [f"added_photons_n{n}" for n in n_list]
    return {"main": (header, rows)}


def _figure3(params: dict):
    n_list = params["n_list"]
    photons_per_atom = params["photons_per_atom"]
    thetas = _theta_grid(params["grid_points"])
    alpha1 = math.sqrt(photons_per_atom)
    header = ["theta"]
    for n in n_list:
        header += [f"xcat_coherent_n{n}", f"xcat_squeezed_n{n}"]
    header += ["n1_coherent", "n1_opt"]
    rows = []
    for t in thetas:
        row = [t]
        for n in n_list:
            alpha = math.sqrt(photons_per_atom * n)
            row.append(formulas.cat_error(formulas.CatErrorParams("x", n, alpha, t)))
            row.append(formulas.cat_error_opt("x", n, alpha, t))
        row.append(formulas.single_atom_error(alpha1, t, 0.0, "excited"))
        row.append(t * math.sin(t) / (16.0 * alpha1**2))
        rows.append(row)
    return {"main": (header, rows)}


def _figure4(params: dict):
    thetas = _theta_grid(params["grid_points"])
    rows = []
    for t in thetas:
        r = formulas.avg_r_opt(_safe_theta(t))
        rows.append((t, r, math.sinh(r) ** 2))
    return {"main": (["theta", "r_opt", "added_photons"], rows)}


def _figure5(params: dict):
    n_list = params["n_list"]
    photons_per_atom = params["photons_per_atom"]
    thetas = _theta_grid(params["grid_points"])
    alpha1 = math.sqrt(photons_per_atom)
    header = ["theta"]
    for n in n_list:
        header += [f"avg_coherent_n{n}", f"avg_squeezed_n{n}"]
    header += ["n1_coherent"]
    rows = []
    for t in thetas:
        row = [t]
        for n in n_list:
            alpha = math.sqrt(photons_per_atom * n)
            row.append(formulas.avg_error(n, alpha, t, 0.0))
            row.append(formulas.avg_error_opt(n, alpha, t))
        row.append(formulas.single_atom_error(alpha1, t, 0.0, "excited"))
        rows.append(row)
    return {"main": (header, rows)}


def _scatter_figure(params: dict):
    """Figures 6 and 7: Haar scatter, averages, cat overlays; coherent panel
    plus a panel squeezed by the theta-dependent average-optimal r."""
    n = params["n_atoms"]
    alpha = math.sqrt(params["alpha_sq"])
    thetas = _theta_grid(params["grid_points"])
    method = params["method"]
    seed = params["seed"]
    samples = params["samples"]
    summary_rows = []
    scatter_rows = []
    panels = {}
    for k, t in enumerate(thetas):
        for panel in ("coherent", "squeezed"):
            r = 0.0 if panel == "coherent" else formulas.avg_r_opt(_safe_theta(t))
            cfg = EnsembleRun(
                n_atoms=n,
                alpha=alpha,
                r=r,
                theta_grid=(t,),
                n_samples=samples,
                seed=seed,
                method=method,
                n_max=params.get("n_max"),
                tol=params.get("tol", 1e-9),
            )
            res = run_ensemble(cfg)
            panels[panel] = res
            for i in range(samples):
                scatter_rows.append(
                    (0.0 if panel == "coherent" else 1.0, i, t, res.per_sample_errors[i, 0])
                )
        row = [t]
        for panel in ("coherent", "squeezed"):
            res = panels[panel]
            row += [
                res.analytic_mean[0],
                res.mean[0],
                res.std_error[0],
                res.cat_x_error[0],
                res.cat_z_error[0],
            ]
        summary_rows.append(row)
    header = ["theta"]
    for suffix in ("coh", "sq"):
        header += [
            f"analytic_mean_{suffix}",
            f"sample_mean_{suffix}",
            f"std_error_{suffix}",
            f"cat_x_{suffix}",
            f"cat_z_{suffix}",
        ]
    scatter_header = ["panel_squeezed", "sample_index", "theta", "error"]
    return {"main": (header, summary_rows), "scatter": (scatter_header, scatter_rows)}


def _figure8(params: dict):
    alpha = math.sqrt(params["alpha_sq"])
    nbar = params["alpha_sq"]
    thetas = _theta_grid(params["grid_points"])
    rows = []
    for t in thetas:
        base = formulas.two_atom_error_rd(alpha, t, 0.0, 0.0)
        if t == 0.0:
            rows.append((t, 0.0, 0.0, 0.0))
            continue
        delta = formulas.delta_opt("two_atom", 2, t, nbar)
        r_t = formulas.cat_r_opt("x", 2, t)
        r_shifted = formulas.cat_r_opt("x", 2, t + delta)
        rows.append(
            (
                t,
                base - formulas.two_atom_error_rd(alpha, t, 0.0, delta),
                base - formulas.two_atom_error_rd(alpha, t, r_t, 0.0),
                base - formulas.two_atom_error_rd(alpha, t, r_shifted, delta),
            )
        )
    header = ["theta", "reduction_delta_only", "reduction_r_only", "reduction_combined"]
    return {"main": (header, rows)}


FIGURE_DEFAULTS = {
    1: {"n_atoms": 4, "alpha": 10.0, "grid_points": DEFAULT_GRID_POINTS},
    2: {"n_list": [5, 10, 20], "grid_points": DEFAULT_GRID_POINTS},
    3: {
        "n_list": [2, 3, 4, 5],
        "photons_per_atom": 20.0,
        "grid_points": DEFAULT_GRID_POINTS,
    },
    4: {"grid_points": DEFAULT_GRID_POINTS},
    5: {
        "n_list": [2, 3, 4, 5],
        "photons_per_atom": 20.0,
        "grid_points": DEFAULT_GRID_POINTS,
    },
    6: {
        "n_atoms": 3,
        "alpha_sq": 60.0,
        "samples": 400,
        "seed": 20240801,
        "method": "perturbative",
        "grid_points": ENSEMBLE_GRID_POINTS,
    },
    7: {
        "n_atoms": 4,
        "alpha_sq": 80.0,
        "samples": 400,
        "seed": 20240801,
        "method": "perturbative",
        "grid_points": ENSEMBLE_GRID_POINTS,
    },
    8: {"alpha_sq": 20.0, "grid_points": DEFAULT_GRID_POINTS},
}

FIGURE_BUILDERS = {
    1: _figure1,
    2: _figure2,
    3: _figure3,
    4: _figure4,
    5: _figure5,
    6: _scatter_figure,
    7: _scatter_figure,
    8: _figure8,
}


# ----------------------------------------------------------------- commands

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    # a sidecar from a previous run is accepted as-is
    return doc.get("params", doc)


def _merge_params(defaults: dict, config: dict, overrides: dict) -> dict:
    params = dict(defaults)
    params.update({k: v for k, v in config.items() if k in defaults or k in ("n_max", "tol")})
    params.update({k: v for k, v in overrides.items() if v is not None})
    return params


def cmd_figure(args) -> int:
    fig_id = args.id
    if fig_id not in FIGURE_BUILDERS:
        raise ValueError(f"figure id must be 1..8, got {fig_id}")
    overrides = {
        "n_atoms": args.n_atoms,
        "alpha": args.alpha,
        "alpha_sq": args.alpha_sq,
        "samples": args.samples,
        "seed": args.seed,
        "method": args.method,
        "n_max": args.n_max,
        "tol": args.tol,
    }
    params = _merge_params(FIGURE_DEFAULTS[fig_id], _load_config(args.config), overrides)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = FIGURE_BUILDERS[fig_id](params)
    outputs = []
    main_path = out_dir / f"fig{fig_id}.csv"
    write_csv(main_path, *result["main"])
    outputs.append(main_path.name)
    if "scatter" in result:
        scatter_path = out_dir / f"fig{fig_id}_scatter.csv"
        write_csv(scatter_path, *result["scatter"])
        outputs.append(scatter_path.name)
    write_sidecar(out_dir / f"fig{fig_id}.json", f"figure {fig_id}", params, outputs)
    print(f"wrote {', '.join(outputs)} to {out_dir}", file=sys.stderr)
    return 0


def cmd_error(args) -> int:
    state = parse_state_spec(args.state)
    field = parse_field_spec(args.field)
    spec = RotationSpec(
        theta=args.theta,
        alpha=field.alpha,
        n_atoms=state.n_atoms,
        r=field.r,
        delta=args.delta,
    )
    reports = {}
    methods = ("exact", "perturbative") if args.method == "both" else (args.method,)
    for method in methods:
        if method == "exact":
            reports[method] = gate_error_exact(state, field, spec, tol=args.tol or 1e-9)
        elif method == "perturbative":
            reports[method] = perturbative_error(state, field, spec)
        else:
            raise ValueError(f"unknown method {method!r}")
    doc = {
        "state": args.state,
        "field": args.field,
        "theta": args.theta,
        "delta": args.delta,
        "reports": {m: r.as_dict() for m, r in reports.items()},
        "version": fieldrot.__version__,
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    out = Path(args.out)
    if args.out and not out.is_dir():
        out.write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


ENSEMBLE_DEFAULTS = {
    "n_atoms": 3,
    "alpha_sq": 60.0,
    "r": 0.0,
    "samples": 400,
    "seed": 20240801,
    "method": "exact",
    "grid_points": ENSEMBLE_GRID_POINTS,
    "theta": None,
}


def cmd_ensemble(args) -> int:
    overrides = {
        "n_atoms": args.n_atoms,
        "alpha_sq": args.alpha_sq,
        "r": args.r,
        "samples": args.samples,
        "seed": args.seed,
        "method": args.method,
        "n_max": args.n_max,
        "tol": args.tol,
        "theta": args.theta,
    }
    if args.alpha is not None:
        overrides["alpha_sq"] = args.alpha**2
    params = _merge_params(ENSEMBLE_DEFAULTS, _load_config(args.config), overrides)
    if params["samples"] < 1:
        raise ValueError(f"--samples must be >= 1, got {params['samples']}")
    thetas = (
        (params["theta"],)
        if params["theta"] is not None
        else tuple(_theta_grid(params["grid_points"]))
    )
    cfg = EnsembleRun(
        n_atoms=params["n_atoms"],
        alpha=math.sqrt(params["alpha_sq"]),
        r=params["r"],
        theta_grid=thetas,
        n_samples=params["samples"],
        seed=params["seed"],
        method=params["method"],
        n_max=params.get("n_max"),
        tol=params.get("tol") or 1e-9,
    )
    res = run_ensemble(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_rows = [
        (
            t,
            res.analytic_mean[k],
            res.mean[k],
            res.std_error[k],
            res.cat_x_error[k],
            res.cat_z_error[k],
        )
        for k, t in enumerate(cfg.theta_grid)
    ]
    write_csv(
        out_dir / "ensemble_summary.csv",
        ["theta", "analytic_mean", "sample_mean", "std_error", "cat_x", "cat_z"],
        summary_rows,
    )
    scatter_rows = [
        (i, t, res.per_sample_errors[i, k])
        for k, t in enumerate(cfg.theta_grid)
        for i in range(cfg.n_samples)
    ]
    write_csv(
        out_dir / "ensemble_scatter.csv", ["sample_index", "theta", "error"], scatter_rows
    )
    write_sidecar(
        out_dir / "ensemble.json",
        "ensemble",
        params,
        ["ensemble_summary.csv", "ensemble_scatter.csv"],
    )
    print(f"wrote ensemble_summary.csv, ensemble_scatter.csv to {out_dir}", file=sys.stderr)
    return 0


SWEEP_DEFAULTS = {
    "kind": "avg",
    "n_atoms": 4,
    "alpha_sq": 100.0,
    "grid_points": DEFAULT_GRID_POINTS,
}


def cmd_sweep(args) -> int:
    overrides = {
        "kind": args.kind,
        "n_atoms": args.n_atoms,
        "alpha_sq": args.alpha_sq,
    }
    if args.alpha is not None:
        overrides["alpha_sq"] = args.alpha**2
    params = _merge_params(SWEEP_DEFAULTS, _load_config(args.config), overrides)
    kind = params["kind"]
    n = params["n_atoms"]
    alpha = math.sqrt(params["alpha_sq"])
    nbar = params["alpha_sq"]
    thetas = [t for t in _theta_grid(params["grid_points"]) if t > 0.05]
    rows = []
    if kind in ("cat-x", "cat-z", "avg"):
        for t in thetas:
            if kind == "avg":
                closed_r = formulas.avg_r_opt(t)
                func = lambda r: formulas.avg_error(n, alpha, t, r)
                err_closed = formulas.avg_error_opt(n, alpha, t)
            else:
                closed_r = formulas.cat_r_opt(kind[-1], n, t)
                func = lambda r: formulas.cat_error(
                    formulas.CatErrorParams(kind[-1], n, alpha, t, r=r)
                )
                err_closed = formulas.cat_error_opt(kind[-1], n, alpha, t)
            num_r, num_err = formulas.minimize_scalar(func, (-3.0, 3.0), tol=1e-8)
            rows.append((t, closed_r, num_r, err_closed, num_err))
        header = ["theta", "r_opt_closed", "r_opt_numeric", "err_opt_closed", "err_opt_numeric"]
    elif kind == "two-atom-delta":
        for t in thetas:
            closed_d = formulas.delta_opt("two_atom", 2, t, nbar)
            func = lambda d: formulas.two_atom_error_rd(alpha, t, 0.0, d)
            num_d, num_err = formulas.minimize_scalar(func, (-0.5, 0.25), tol=1e-8)
            rows.append((t, closed_d, num_d, func(closed_d), num_err))
        header = [
            "theta",
            "delta_opt_closed",
            "delta_opt_numeric",
            "err_at_closed",
            "err_opt_numeric",
        ]
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "sweep.csv", header, rows)
    write_sidecar(out_dir / "sweep.json", "sweep", params, ["sweep.csv"])
    print(f"wrote sweep.csv to {out_dir}", file=sys.stderr)
    return 0


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldrot",
        description="Rotation errors from field quantization: figure datasets,"
        " error queries, ensembles, optimizer sweeps.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--out", default=".", help="output directory (or file for 'error')")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n-atoms", type=int, default=None, dest="n_atoms")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--alpha-sq", type=float, default=None, dest="alpha_sq")
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--delta", type=float, default=0.0)
        p.add_argument("--method", default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--n-max", type=int, default=None, dest="n_max")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--config", default=None, help="JSON config; flags take precedence")

    p_fig = sub.add_parser("figure", help="write a figure dataset as CSV")
    p_fig.add_argument("id", type=int, help="figure number, 1..8")
    add_common(p_fig)
    p_fig.set_defaults(func=cmd_figure)

    p_err = sub.add_parser("error", help="single-shot gate-error query")
    p_err.add_argument("--state", required=True, help="cat-x:N | cat-z:N | haar:seed=S:n=N | excited | ground | @file.json")
    p_err.add_argument("--field", required=True, help="coherent:alpha=A | squeezed:alpha=A:r=R")
    add_common(p_err)
    p_err.set_defaults(func=cmd_error, method_default="perturbative")

    p_ens = sub.add_parser("ensemble", help="Haar-random ensemble run")
    add_common(p_ens)
    p_ens.set_defaults(func=cmd_ensemble)

    p_sweep = sub.add_parser("sweep", help="closed-form optima vs numerical minimizer")
    p_sweep.add_argument(
        "--kind", default=None, choices=["cat-x", "cat-z", "avg", "two-atom-delta"]
    )
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "error":
        if args.theta is None:
            parser.error("error command requires --theta")
        if args.method is None:
            args.method = "perturbative"
    try:
        return args.func(args)
    except (TruncationError, ConvergenceError) as exc:
        # TruncationError subclasses ValueError; numerical failures first
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (SpecParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
