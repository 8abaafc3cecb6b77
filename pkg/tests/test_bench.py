import os
import xml.etree.ElementTree as ET
from dataclasses import replace

import numpy as np
import pytest

from mintime.bench import (CSV_HEADER, VARIANTS, GridSpec, RunSettings,
                           default_grid, emit_plots, failure_rates,
                           grid_scenarios, load_rows, mean_complexities,
                           parse_variant, run_grid, run_sample,
                           superiority_matrix)
from mintime.cli import main as cli_main
from mintime.counters import (ComplexityWeights, RunCounters,
                              complexity_type_a, complexity_type_b,
                              complexity_type_c)
from mintime.rocket import Scenario


@pytest.fixture(scope="module")
def tiny_grid():
    return replace(default_grid(), epsilons=(3.0 ** -4,), taus=(1e-2,))


@pytest.fixture(scope="module")
def tiny_run(tiny_grid, tmp_path_factory):
    out = tmp_path_factory.mktemp("tinyrun")
    paths = run_grid(tiny_grid, VARIANTS, str(out), stride=8)
    return paths


def test_complexity_type_a_examples():
    assert complexity_type_a(RunCounters(i_s=2, i_f=1)) == 8.0
    assert complexity_type_a(RunCounters()) == 0.0
    assert complexity_type_a(RunCounters(i_s=0, i_f=4.5)) == 9.0


def test_complexity_type_b_examples():
    w = ComplexityWeights()
    assert complexity_type_b(RunCounters(n_s=1000), w, 1e-3) == pytest.approx(4.22e-4)
    assert complexity_type_b(RunCounters(i_f=1.0), w, 1e-3) == pytest.approx(2.08e-5)
    assert complexity_type_b(RunCounters(), w, 1e-2) == 0.0


def test_complexity_type_c_examples():
    assert complexity_type_c(RunCounters(i_s=5, i_f=0, n_s=3, n_f=2)) == 5
    assert complexity_type_c(RunCounters()) == 0
    assert complexity_type_c(RunCounters(n_s=7)) == 7


def test_complexity_weights_positive():
    with pytest.raises(ValueError):
        ComplexityWeights(t_an=0.0)


def test_grid_counts_match_study():
    grid = default_grid()
    assert grid.scenario_count() == 78_400
    assert grid.sample_count() == 705_600
    assert len(grid.epsilons) == 9
    assert grid.sample_count() // len(grid.epsilons) == 78_400


def test_grid_axes_values():
    grid = default_grid()
    assert grid.epsilons[0] == pytest.approx(3.0 ** -3)
    assert grid.epsilons[-1] == pytest.approx(3.0 ** -11)
    assert grid.v0s == tuple(i / 8 for i in range(8))
    assert grid.s1s[0] == -5.0 and grid.s1s[-1] == 5.0
    assert grid.s2s[0] == 0.0 and grid.s2s[-1] == 5.0
    assert len(grid.angles) == 10 and len(grid.speeds) == 5
    assert grid.taus == (1e-2, 1e-3, 1e-4)


def test_stride_subsample_is_nested():
    grid = default_grid()
    full = {s for s in grid_scenarios(grid, 2)}
    sub = {s for s in grid_scenarios(grid, 4)}
    assert sub <= full
    assert len(grid_scenarios(grid, 4)) == grid.scenario_count(4)


def test_parse_variant():
    assert parse_variant("ne") == ("ne", None)
    assert parse_variant("bg+gjk") == ("bg", "gjk")
    assert parse_variant("S+SA") == ("s", "sa")
    with pytest.raises(ValueError):
        parse_variant("ne+sa")
    with pytest.raises(ValueError):
        parse_variant("xx")


def test_run_sample_row_shape():
    row = run_sample(Scenario(0.0, 1.5, 0.5, 0.0, 0.0), 3.0 ** -5, 1e-2,
                     "s+sa", RunSettings())
    for col in CSV_HEADER.split(","):
        assert col in row
    assert row["status"] == "converged"
    assert row["da"] == "sa"
    # complexity columns recompute from the counters columns
    c = RunCounters(i_s=float(row["i_s"]), i_f=float(row["i_f"]),
                    n_s=int(row["n_s"]), n_f=int(row["n_f"]))
    assert float(row["cx_a"]) == pytest.approx(complexity_type_a(c))
    assert float(row["cx_b"]) == pytest.approx(
        complexity_type_b(c, ComplexityWeights(), 1e-2))
    assert int(row["cx_c"]) == complexity_type_c(c)


def test_run_grid_well_formed(tiny_grid, tiny_run):
    rows = load_rows(tiny_run["results"])
    expected = tiny_grid.scenario_count(8) * len(VARIANTS)
    assert len(rows) == expected
    assert {r["status"] for r in rows} <= {"converged", "trivial_hit_at_zero",
                                           "failed", "error"}
    assert os.path.exists(tiny_run["failure_rates"])
    assert os.path.exists(tiny_run["superiority"])


def test_run_grid_empty_algos_header_only(tmp_path):
    grid = replace(default_grid(), epsilons=(3.0 ** -4,), taus=(1e-2,))
    paths = run_grid(grid, (), str(tmp_path), stride=8)
    with open(paths["results"]) as fh:
        content = fh.read()
    assert content == CSV_HEADER + "\n"


def test_run_grid_deterministic(tiny_grid, tmp_path):
    a = run_grid(tiny_grid, ("ne", "s+sa"), str(tmp_path / "a"), stride=8)
    b = run_grid(tiny_grid, ("ne", "s+sa"), str(tmp_path / "b"), stride=8)
    with open(a["results"], "rb") as fh:
        blob_a = fh.read()
    with open(b["results"], "rb") as fh:
        blob_b = fh.read()
    assert blob_a == blob_b


def test_failure_rates_and_exclusion_rule(tiny_run):
    rows = load_rows(tiny_run["results"])
    rates = failure_rates(rows)
    scen = {(r["v0"], r["s1"], r["s2"], r["v1"], r["v2"]) for r in rows}
    for (tau, eps, variant), (fails, samples) in rates.items():
        assert samples == len(scen)
        assert 0 <= fails <= samples
    means = mean_complexities(rows)
    for cell in means.values():
        assert cell["count"] >= 1
        assert cell["cx_b"] >= 0.0


def test_superiority_matrix_bounds(tiny_run):
    rows = load_rows(tiny_run["results"])
    pct = superiority_matrix(rows, VARIANTS)
    k = len(VARIANTS)
    for i in range(k):
        for j in range(k):
            v = pct[i][j]
            if v is None:
                continue
            assert 0.0 <= v <= 100.0
            w = pct[j][i]
            if w is not None:
                assert v + w <= 100.0 + 1e-9


def test_load_rows_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("eps,tau,v0\n1,2,3\n")
    with pytest.raises(ValueError, match="missing column 's1'"):
        load_rows(str(path))


def test_load_rows_reports_row_number(tmp_path):
    path = tmp_path / "bad2.csv"
    lines = [CSV_HEADER, ",".join(["1"] * 19), "1,2,3"]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match=":3:"):
        load_rows(str(path))


def test_emit_plots(tiny_run, tmp_path):
    written = emit_plots(tiny_run["results"], str(tmp_path / "plots"))
    assert len(written) >= 3
    for path in written:
        tree = ET.parse(path)  # parseable XML
        assert tree.getroot().tag.endswith("svg")


def test_emit_plots_single_epsilon_ok(tiny_run, tmp_path):
    # tiny_run already has a single epsilon: degenerate one-point polylines
    written = emit_plots(tiny_run["results"], str(tmp_path / "plots1"))
    assert all(os.path.getsize(p) > 0 for p in written)


def test_emit_plots_missing_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("eps,tau\n1,2\n")
    with pytest.raises(ValueError, match="missing column"):
        emit_plots(str(bad), str(tmp_path / "plots"))


def test_cli_run_and_plot(tmp_path):
    cfgfile = tmp_path / "grid.cfg"
    cfgfile.write_text(
        "# desk-scale smoke\n"
        "eps_powers = 4\n"
        "taus = 1e-2\n"
        "stride = 8\n"
        "algos = ne, s+sa\n"
        "alpha = 0.01\n")
    out = tmp_path / "out"
    assert cli_main(["run", "--config", str(cfgfile), "--out", str(out)]) == 0
    assert (out / "results.csv").exists()
    plots = tmp_path / "plots"
    assert cli_main(["plot", "--csv", str(out / "results.csv"),
                     "--out", str(plots)]) == 0
    assert any(p.suffix == ".svg" for p in plots.iterdir())


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 1\n")
    assert cli_main(["run", "--config", str(bad),
                     "--out", str(tmp_path / "o")]) == 3
    bad2 = tmp_path / "bad2.cfg"
    bad2.write_text("algos = warp\n")
    assert cli_main(["run", "--config", str(bad2),
                     "--out", str(tmp_path / "o2")]) == 3


def test_cli_io_error_exit_code(tmp_path):
    missing = tmp_path / "nope.cfg"
    assert cli_main(["run", "--config", str(missing),
                     "--out", str(tmp_path / "o")]) == 2
    assert cli_main(["plot", "--csv", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path / "p")]) == 2


def test_run_sample_panic_becomes_failure_record(monkeypatch):
    import mintime.bench as bench_mod

    def boom(*a, **k):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(bench_mod._SOLVERS, "s", boom)
    row = run_sample(Scenario(0.0, 1.0, 0.0, 0.0, 0.0), 0.01, 1e-2, "s+sa",
                     RunSettings())
    assert row["status"] == "error"
    assert row["fail_code"] == "0"
    assert row["t_star"] == "nan"
