import math

import numpy as np
import pytest

from ris_lab import cli, experiments
from ris_lab.experiments import (
    CSV_COLUMNS, ExperimentSpec, Row, SpecError, Sweep, bundled_spec_names, config_hash,
    gnuplot_script, load_spec, parse_spec, provenance, render_csv, run_experiment,
    run_optimizer_sweep, serialize_spec, trend_summary, write_outputs,
)
from ris_lab.montecarlo import SimPlan

BASIC = """
[experiment]
name = basic
scenario = external
series = analytic
sweep = m
start = 100
stop = 300
step = 100

[code]
b_bits = 300
"""


def spec_file(tmp_path, text, name="s.spec"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# --- spec files ---------------------------------------------------------------------------------

def test_bundled_specs_present():
    assert bundled_spec_names() == [f"fig{i}" for i in range(2, 10)]


@pytest.mark.parametrize("name", [f"fig{i}" for i in range(2, 10)])
def test_round_trip(name):
    spec = load_spec(name)
    again = parse_spec(serialize_spec(spec))
    assert again == spec
    assert serialize_spec(again) == serialize_spec(spec)


def test_parse_basic():
    spec = parse_spec(BASIC)
    assert spec.sweep.values() == [100.0, 200.0, 300.0]
    assert spec.fixed.code.b == 300 and spec.plan.scenario == "external"


def test_dbw_alias():
    spec = parse_spec(BASIC + "\n[system]\nsigma2_e_dbw = 4\n")
    assert spec.fixed.system.sigma2_e == pytest.approx(10 ** 0.4)


@pytest.mark.parametrize("patch,path", [
    (("scenario = external", "scenario = relay"), "experiment.scenario"),
    (("sweep = m", "sweep = colour"), "experiment.sweep"),
    (("step = 100", "step = 0"), "experiment.step"),
    (("stop = 300", "stop = 50"), "experiment.stop"),
    (("series = analytic", "series = guess"), "experiment.series"),
    (("start = 100", "start = abc"), "experiment.start"),
    (("b_bits = 300", "b_bits = -3"), "code.b_bits"),
    (("b_bits = 300", "bits = 3"), "code.bits"),
    (("[code]", "[channel]"), "channel"),
])
def test_validation_errors_carry_paths(patch, path):
    with pytest.raises(SpecError) as info:
        parse_spec(BASIC.replace(*patch))
    assert info.value.path == path


def test_system_field_errors():
    with pytest.raises(SpecError) as info:
        parse_spec(BASIC + "\n[system]\nn_elements = 2.5\n")
    assert info.value.path == "system.n_elements"


def test_swept_key_also_fixed_rejected():
    with pytest.raises(SpecError) as info:
        parse_spec(BASIC + "m = 200\n")
    assert info.value.path == "code.m"


def test_varied_key_also_fixed_rejected():
    text = BASIC.replace("step = 100", "step = 100\nvary = b_bits:100,200")
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert info.value.path == "code.b_bits"


def test_unknown_bundled_spec():
    with pytest.raises(SpecError):
        load_spec("fig42")


def test_config_hash_changes_with_content():
    a = parse_spec(BASIC)
    b = parse_spec(BASIC.replace("b_bits = 300", "b_bits = 200"))
    assert config_hash(a) == config_hash(parse_spec(BASIC)) != config_hash(b)
    assert len(config_hash(a)) == 16


# --- running ------------------------------------------------------------------------------------

def test_empty_sweep_range_gives_one_point():
    spec = parse_spec(BASIC.replace("stop = 300", "stop = 100"))
    rows = run_experiment(spec)
    assert len(rows) == 1 and rows[0].sweep_value == 100.0


def test_rows_in_sweep_order_with_series():
    text = BASIC.replace("series = analytic", "series = analytic, infinite_blocklength") \
                .replace("step = 100", "step = 100\nvary = delta:0.01,0.001")
    rows = run_experiment(parse_spec(text))
    assert [r.sweep_value for r in rows] == [100.0] * 4 + [200.0] * 4 + [300.0] * 4
    assert rows[0].series == "analytic:delta=0.01" and rows[1].series == "infinite_blocklength:delta=0.01"
    by = {(r.sweep_value, r.series): r.ast_bpcu for r in rows}
    assert by[(200.0, "analytic:delta=0.01")] > by[(200.0, "analytic:delta=0.001")]


def test_failed_point_recorded(monkeypatch):
    real = experiments.ast_external

    def flaky(cfg, code, **kw):
        if code.m == 200:
            raise FloatingPointError("boom")
        return real(cfg, code, **kw)

    monkeypatch.setattr(experiments, "ast_external", flaky)
    rows = run_experiment(parse_spec(BASIC))
    assert [r.failed for r in rows] == [False, True, False]
    assert math.isnan(rows[1].ast_bpcu) and rows[1].notes == "error: boom"


def test_monte_carlo_rows_worker_independent():
    spec = parse_spec(BASIC.replace("series = analytic", "series = monte_carlo")
                      + "\n[plan]\nrealizations = 5000\nseed = 3\n")
    assert run_experiment(spec, workers=1) == run_experiment(spec, workers=3)


def test_fig2_style_reduced():
    spec = load_spec("fig2")
    spec = ExperimentSpec(name="fig2r", scenario="external", sweep=Sweep("m", 100, 400, 150),
                          series=("analytic", "monte_carlo"), plan=SimPlan(20_000, seed=2),
                          vary=(("b_bits", (200.0, 300.0)),), fixed=spec.fixed)
    rows = run_experiment(spec)
    mc = {(r.sweep_value, r.series.split(":")[1]): r for r in rows if r.series.startswith("monte")}
    for r in rows:
        if r.series.startswith("analytic"):
            m = mc[(r.sweep_value, r.series.split(":")[1])]
            assert abs(r.ast_bpcu - m.ast_bpcu) <= max(0.02, 3 * m.sem)


def test_fig7_style_gaps():
    spec = load_spec("fig7")
    pts = []
    for p in (20.0, 26.0):
        sub = ExperimentSpec(name="fig7r", scenario="internal", sweep=Sweep("p_g_dbw", p, p, 1),
                             series=("analytic",), fixed=spec.fixed,
                             vary=(("omega_sic", (0.01, 0.05)),))
        rows = {r.series: r.ast_bpcu for r in run_experiment(sub)}
        pts.append(rows["analytic:omega_sic=0.01"] - rows["analytic:omega_sic=0.05"])
    assert pts[0] == pytest.approx(0.09, abs=0.03)
    assert pts[1] == pytest.approx(0.16, abs=0.03)


def test_optimizer_sweep_trends():
    spec = load_spec("fig5")
    spec = ExperimentSpec(name="fig5r", scenario="external", sweep=Sweep("p_g_dbw", 10, 40, 10),
                          fixed=spec.fixed, vary=spec.vary, optimizer=spec.optimizer)
    rows = run_optimizer_sweep(spec)
    assert {r.series for r in rows} == {"optimal_unconstrained:delta=0.01",
                                        "optimal_unconstrained:delta=0.001"}
    assert all(line.endswith("optimal AST nondecreasing, m* nonincreasing")
               for line in trend_summary(rows))
    loose = [r.ast_bpcu for r in rows if r.series.endswith("0.01")]
    tight = [r.ast_bpcu for r in rows if r.series.endswith("0.001")]
    assert all(a > b for a, b in zip(loose, tight))
    assert all(r.m_star is not None and r.eps_bar is not None for r in rows)


def test_optimizer_sweep_over_m_rejected():
    spec = parse_spec(BASIC.replace("step = 100", "step = 100\noptimize = unconstrained"))
    with pytest.raises(SpecError):
        run_optimizer_sweep(spec)


# --- output ---------------------------------------------------------------------------------------

def test_csv_layout_and_provenance():
    spec = parse_spec(BASIC)
    rows = [Row("m", 100.0, "analytic", 1.5, eps_bar=0.5), Row("m", 200.0, "x", math.nan,
                                                               notes="error: a, b")]
    text = render_csv(rows, provenance(spec, "2026-01-01T00:00:00Z"))
    lines = text.splitlines()
    assert lines[0].startswith("# ris-lab v") and lines[2] == f"# config_hash: {config_hash(spec)}"
    assert lines[4] == "# generated: 2026-01-01T00:00:00Z"
    assert lines[5] == ",".join(CSV_COLUMNS)
    assert lines[6] == "m,100.0,analytic,1.5,,0.5,,"
    assert lines[7].split(",")[3] == "nan" and lines[7].endswith("error: a; b")
    assert all(len(l.split(",")) == len(CSV_COLUMNS) for l in lines[5:])


def test_write_outputs(tmp_path):
    spec = parse_spec(BASIC)
    rows = run_experiment(spec)
    csv_path, gp_path = write_outputs(spec, rows, tmp_path / "out", "T")
    data = np.genfromtxt(csv_path, delimiter=",", comments="#", skip_header=6, usecols=(1, 3))
    assert data.shape == (3, 2) and np.all(data[:, 1] > 0)
    gp = gp_path.read_text()
    assert "basic.csv" in gp and "y2" not in gp
    assert not [p for p in (tmp_path / "out").iterdir() if p.name.endswith(".tmp")]


def test_gnuplot_second_axis_for_optimizer():
    spec = parse_spec(BASIC)
    rows = [Row("p_g_dbw", 10.0, "optimal_unconstrained", 1.0, m_star=120)]
    assert "axes x1y2" in gnuplot_script(spec, rows, "x.csv")


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "a.csv"
    experiments.atomic_write(target, "old\n")

    def broken(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(experiments.os, "replace", broken)
    with pytest.raises(OSError):
        experiments.atomic_write(target, "new\n")
    assert target.read_text() == "old\n" and len(list(tmp_path.iterdir())) == 1


# --- command line ------------------------------------------------------------------------------------

def test_cli_selftest(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_cli_analyze(tmp_path, capsys):
    assert cli.main(["analyze", "--config", spec_file(tmp_path, BASIC)]) == 0
    assert capsys.readouterr().out.startswith("analytic")


def test_cli_simulate_overrides(tmp_path, capsys):
    args = ["simulate", "--config", spec_file(tmp_path, BASIC), "--seed", "5", "--realizations", "2000"]
    assert cli.main(args) == 0
    first = capsys.readouterr().out
    assert cli.main(args) == 0
    assert capsys.readouterr().out == first and "sem=" in first


def test_cli_sweep(tmp_path):
    out = tmp_path / "res"
    assert cli.main(["sweep", "--config", spec_file(tmp_path, BASIC), "--out", str(out)]) == 0
    assert (out / "basic.csv").exists() and (out / "basic.gp").exists()


def test_cli_invalid_input(tmp_path, capsys):
    assert cli.main(["analyze", "--config", str(tmp_path / "missing.spec")]) == 1
    bad = spec_file(tmp_path, BASIC.replace("scenario = external", "scenario = relay"))
    assert cli.main(["analyze", "--config", bad]) == 1
    assert "experiment.scenario" in capsys.readouterr().err
    assert cli.main(["analyze", "--config", spec_file(tmp_path, BASIC), "--series", "nope"]) == 1
    assert cli.main(["simulate", "--config", spec_file(tmp_path, BASIC), "--realizations", "0"]) == 1


def test_cli_numerical_failure(tmp_path, monkeypatch):
    def broken(cfg, code, **kw):
        raise FloatingPointError("overflow")

    monkeypatch.setattr(experiments, "ast_external", broken)
    assert cli.main(["sweep", "--config", spec_file(tmp_path, BASIC), "--out", str(tmp_path)]) == 2


def test_cli_optimize(tmp_path, capsys):
    path = spec_file(tmp_path, BASIC.replace("sweep = m", "sweep = p_g_dbw").replace("start = 100", "start = 30")
                     .replace("stop = 300", "stop = 30"))
    assert cli.main(["optimize", "--config", path]) == 0
    assert "m_star=125" in capsys.readouterr().out
    assert cli.main(["optimize", "--config", path, "--eps-th", "0.05", "--m-th", "150"]) == 3
    assert cli.main(["optimize", "--config", path, "--eps-th", "0", "--m-th", "150"]) == 1
