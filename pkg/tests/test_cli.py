import json
import math

import numpy as np
import pytest

from fieldrot import formulas
from fieldrot.cli import (
    SpecParseError,
    format_float,
    main,
    parse_field_spec,
    parse_state_spec,
    read_csv,
    write_csv,
)

PI = math.pi


# ------------------------------------------------------------------- parsing

def test_parse_state_specs():
    assert parse_state_spec("excited").amplitudes[1] == 1.0
    assert parse_state_spec("ground").amplitudes[0] == 1.0
    cat = parse_state_spec("cat-z:3")
    assert cat.n_atoms == 3 and cat.amplitudes[0] == pytest.approx(1 / math.sqrt(2))
    h1 = parse_state_spec("haar:seed=7:n=3")
    h2 = parse_state_spec("haar:n=3:seed=7")
    assert np.array_equal(h1.amplitudes, h2.amplitudes)


def test_parse_state_spec_from_file(tmp_path):
    amp = [[1.0, 0.0], [0.0, 1.0]]
    path = tmp_path / "state.json"
    path.write_text(json.dumps({"n_atoms": 1, "amplitudes": amp}))
    st = parse_state_spec(f"@{path}")
    assert st.n_atoms == 1
    assert st.amplitudes[1] == pytest.approx(1j / math.sqrt(2))


def test_parse_state_spec_failures():
    for bad in ("squeezed:alpha=1", "cat-y:3", "cat-x:three", "haar:n=2", "cat-x"):
        with pytest.raises(SpecParseError):
            parse_state_spec(bad)


def test_parse_field_specs():
    f = parse_field_spec("coherent:alpha=4")
    assert f.alpha == 4.0 and f.r == 0.0
    f = parse_field_spec("squeezed:alpha=4:r=0.3:n_max=120")
    assert f.r == 0.3 and f.n_max == 120
    for bad in ("coherent", "coherent:4", "squeezed:alpha=4", "thermal:alpha=4"):
        with pytest.raises(SpecParseError):
            parse_field_spec(bad)


def test_csv_round_trip(tmp_path):
    rows = [(0.1, 1e-7), (PI, 123456.789012345)]
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], rows)
    header, data = read_csv(path)
    assert header == ["a", "b"]
    for (a, b), row in zip(rows, data):
        assert row[0] == float(format_float(a))
        assert row[1] == float(format_float(b))
    assert "\r" not in path.read_text()


# ------------------------------------------------------------------- figures

def test_figure1_values(tmp_path):
    assert main(["figure", "1", "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "fig1.csv")
    assert header == [
        "theta",
        "xcat_coherent",
        "xcat_squeezed",
        "zcat_coherent",
        "zcat_squeezed",
    ]
    assert data.shape == (121, 5)
    k = 60   # theta = pi/2
    t = float(np.linspace(0.0, PI, 121)[k])
    assert data[k, 0] == pytest.approx(PI / 2, abs=1e-10)
    expect = formulas.cat_error(formulas.CatErrorParams("x", 4, 10.0, t))
    assert data[k, 1] == float(format_float(expect))
    assert data[-1, 2] == float(format_float(formulas.cat_error_opt("x", 4, 10.0, PI)))
    sidecar = json.loads((tmp_path / "fig1.json").read_text())
    assert sidecar["params"]["n_atoms"] == 4
    assert sidecar["outputs"] == ["fig1.csv"]


def test_figure1_config_reproduces_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["figure", "1", "--out", str(a), "--n-atoms", "5"]) == 0
    assert main(["figure", "1", "--out", str(b), "--config", str(a / "fig1.json")]) == 0
    assert (a / "fig1.csv").read_bytes() == (b / "fig1.csv").read_bytes()
    assert json.loads((b / "fig1.json").read_text())["params"]["n_atoms"] == 5


@pytest.mark.parametrize("fig", ["2", "3", "4", "5", "8"])
def test_closed_form_figures_render(fig, tmp_path):
    assert main(["figure", fig, "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / f"fig{fig}.csv")
    assert data.shape[0] == 121
    assert np.all(np.isfinite(data))


def test_figure8_reductions_positive_at_pi(tmp_path):
    assert main(["figure", "8", "--out", str(tmp_path)]) == 0
    _, data = read_csv(tmp_path / "fig8.csv")
    # all three strategies reduce the error at theta = pi; squeezing beats
    # underrotation alone
    last = data[-1]
    assert last[1] > 0 and last[2] > 0 and last[3] > 0
    assert last[2] > last[1]


def test_figure6_scatter(tmp_path):
    args = ["figure", "6", "--out", str(tmp_path), "--samples", "25"]
    assert main(args) == 0
    header, summary = read_csv(tmp_path / "fig6.csv")
    sheader, scatter = read_csv(tmp_path / "fig6_scatter.csv")
    assert summary.shape == (13, 11)
    assert scatter.shape == (13 * 25 * 2, 4)
    assert sheader == ["panel_squeezed", "sample_index", "theta", "error"]
    # summary sample mean equals the mean of the matching scatter points
    k, t = 6, summary[6, 0]
    coh = scatter[(scatter[:, 0] == 0.0) & (np.abs(scatter[:, 2] - t) < 1e-9), 3]
    assert len(coh) == 25
    assert summary[k, 2] == pytest.approx(coh.mean(), rel=1e-10)
    # rerun from sidecar is bit-identical
    again = tmp_path / "again"
    assert main(["figure", "6", "--out", str(again), "--config", str(tmp_path / "fig6.json")]) == 0
    assert (again / "fig6_scatter.csv").read_bytes() == (tmp_path / "fig6_scatter.csv").read_bytes()


def test_figure_bad_id(tmp_path):
    assert main(["figure", "9", "--out", str(tmp_path)]) == 2


# -------------------------------------------------------------------- error

def _run_error(capsys, *extra):
    code = main(["error", *extra])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_error_perturbative_two_atom(capsys):
    code, doc = _run_error(
        capsys,
        "--state", "cat-x:2",
        "--field", "coherent:alpha=4.47213595499958",
        "--theta", str(PI),
    )
    assert code == 0
    rep = doc["reports"]["perturbative"]
    assert rep["total"] == pytest.approx(0.173, abs=5e-4)
    assert rep["method"] == "perturbative"
    assert rep["first_order_term"] is not None


def test_error_exact_single_atom(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, doc = _run_error(
        capsys,
        "--state", "excited",
        "--field", "coherent:alpha=10",
        "--theta", str(PI),
        "--method", "exact",
        "--out", str(out_file),
    )
    assert code == 0
    rep = doc["reports"]["exact"]
    assert rep["total"] == pytest.approx(PI**2 / 1600.0, rel=0.10)
    assert rep["first_order_term"] is None
    assert json.loads(out_file.read_text()) == doc


def test_error_both_methods(capsys):
    code, doc = _run_error(
        capsys,
        "--state", "cat-z:2",
        "--field", "coherent:alpha=20",
        "--theta", str(PI / 2),
        "--method", "both",
    )
    assert code == 0
    assert set(doc["reports"]) == {"exact", "perturbative"}
    e = doc["reports"]["exact"]["total"]
    p = doc["reports"]["perturbative"]["total"]
    assert abs(e - p) <= 0.15 * p + 2.0 / 20.0**3


def test_error_theta_zero(capsys):
    code, doc = _run_error(
        capsys, "--state", "cat-z:2", "--field", "coherent:alpha=5", "--theta", "0"
    )
    assert code == 0
    assert abs(doc["reports"]["perturbative"]["total"]) < 1e-12


def test_error_requires_theta():
    with pytest.raises(SystemExit) as exc:
        main(["error", "--state", "excited", "--field", "coherent:alpha=5"])
    assert exc.value.code == 2


def test_error_parse_failure_exit_2(capsys):
    code = main(
        ["error", "--state", "cat-y:3", "--field", "coherent:alpha=5", "--theta", "1"]
    )
    assert code == 2
    assert "spec" in capsys.readouterr().err


def test_error_truncation_exit_3(capsys):
    code = main(
        [
            "error",
            "--state", "excited",
            "--field", "coherent:alpha=10:n_max=60",
            "--theta", "1",
        ]
    )
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


# ----------------------------------------------------------------- ensemble

def test_ensemble_command(tmp_path):
    args = [
        "ensemble",
        "--out", str(tmp_path),
        "--samples", "6",
        "--method", "perturbative",
        "--theta", str(PI / 2),
    ]
    assert main(args) == 0
    header, summary = read_csv(tmp_path / "ensemble_summary.csv")
    assert header == ["theta", "analytic_mean", "sample_mean", "std_error", "cat_x", "cat_z"]
    assert summary.shape == (1, 6)
    _, scatter = read_csv(tmp_path / "ensemble_scatter.csv")
    assert scatter.shape == (6, 3)
    assert summary[0, 2] == pytest.approx(scatter[:, 2].mean(), rel=1e-10)
    # sidecar replay (including the single-theta grid) is bit-identical
    again = tmp_path / "again"
    assert main(
        ["ensemble", "--out", str(again), "--config", str(tmp_path / "ensemble.json")]
    ) == 0
    assert (again / "ensemble_scatter.csv").read_bytes() == (
        tmp_path / "ensemble_scatter.csv"
    ).read_bytes()


def test_ensemble_zero_samples_exit_2(tmp_path):
    assert main(["ensemble", "--out", str(tmp_path), "--samples", "0"]) == 2


# -------------------------------------------------------------------- sweep

def test_sweep_avg(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--kind", "avg"]) == 0
    header, data = read_csv(tmp_path / "sweep.csv")
    assert header == [
        "theta",
        "r_opt_closed",
        "r_opt_numeric",
        "err_opt_closed",
        "err_opt_numeric",
    ]
    assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-5
    assert np.max(np.abs(data[:, 3] - data[:, 4])) < 1e-10


def test_sweep_two_atom_delta(tmp_path):
    assert main(
        ["sweep", "--out", str(tmp_path), "--kind", "two-atom-delta", "--alpha-sq", "100"]
    ) == 0
    _, data = read_csv(tmp_path / "sweep.csv")
    assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-5
