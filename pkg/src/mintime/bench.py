"""Benchmark harness: parameter grid, per-sample solver runs, aggregation.

Reproduces the isotropic-rocket study: every (epsilon, tau, scenario) sample
is solved by each selected algorithm variant, and per-run counters feed the
three empirical complexity metrics.  Output is a flat CSV (exact schema
below), plus aggregated failure-rate and superiority tables.  Runs are
deterministic: identical configuration yields byte-identical CSV.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .counters import (ComplexityWeights, RunCounters, complexity_type_a,
                       complexity_type_b, complexity_type_c)
from .dynamics import IntegratorConfig
from .rocket import Scenario
from .solvers import (MtplsConfig, barr_gilbert, neustadt_eaton,
                      semi_analytic)

__all__ = [
    "VARIANTS", "CSV_HEADER", "GridSpec", "RunSettings", "default_grid",
    "grid_scenarios", "run_sample", "run_grid", "load_rows",
    "failure_rates", "mean_complexities", "superiority_matrix", "emit_plots",
]

#: The nine algorithm variants: the flow-boost solvers and the
#: decomposition solvers with each distance algorithm.
VARIANTS = ("ne", "bg+gjk", "bg+g", "bg+sa", "bg+ga",
            "s+gjk", "s+g", "s+sa", "s+ga")

CSV_HEADER = ("eps,tau,v0,s1,s2,v1,v2,algo,da,status,fail_code,t_star,"
              "i_s,i_f,n_s,n_f,cx_a,cx_b,cx_c")

_SOLVERS = {"ne": neustadt_eaton, "bg": barr_gilbert, "s": semi_analytic}


def parse_variant(name: str) -> tuple[str, Optional[str]]:
    name = name.strip().lower()
    algo, _, da = name.partition("+")
    if algo not in _SOLVERS or (algo == "ne") != (da == ""):
        raise ValueError(f"unknown algorithm variant {name!r}")
    if algo != "ne" and da not in ("gjk", "g", "sa", "ga"):
        raise ValueError(f"unknown distance algorithm in variant {name!r}")
    return algo, (da or None)


@dataclass(frozen=True)
class GridSpec:
    """Benchmark parameter axes (defaults reproduce the full study grid)."""

    epsilons: tuple[float, ...]
    v0s: tuple[float, ...]
    s1s: tuple[float, ...]
    s2s: tuple[float, ...]
    angles: tuple[float, ...]
    speeds: tuple[float, ...]
    taus: tuple[float, ...]

    def scenario_count(self, stride: int = 1) -> int:
        return (len(self.v0s[::stride]) * len(self.s1s[::stride])
                * len(self.s2s[::stride]) * len(self.angles[::stride])
                * len(self.speeds[::stride]))

    def sample_count(self, stride: int = 1) -> int:
        """Samples = epsilon axis times the scenario product (tau and the
        algorithm set multiply the row count, not the sample count)."""
        return len(self.epsilons) * self.scenario_count(stride)


def default_grid() -> GridSpec:
    return GridSpec(
        epsilons=tuple(3.0 ** -i for i in range(3, 12)),
        v0s=tuple(i / 8.0 for i in range(8)),
        s1s=tuple(10.0 * i / 13.0 - 5.0 for i in range(14)),
        s2s=tuple(5.0 * i / 13.0 for i in range(14)),
        angles=tuple(2.0 * math.pi * i / 10.0 for i in range(10)),
        speeds=tuple(j / 8.0 for j in range(5)),
        taus=(1e-2, 1e-3, 1e-4),
    )


def grid_scenarios(grid: GridSpec, stride: int = 1) -> list[Scenario]:
    """Stride-based per-axis subsample; stride 1 is the full grid, larger
    strides give nested subsets."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    out = []
    for v0 in grid.v0s[::stride]:
        for s1 in grid.s1s[::stride]:
            for s2 in grid.s2s[::stride]:
                for angle in grid.angles[::stride]:
                    for speed in grid.speeds[::stride]:
                        out.append(Scenario(
                            v0=v0, s1=s1, s2=s2,
                            v1=speed * math.cos(angle),
                            v2=speed * math.sin(angle)))
    return out


@dataclass(frozen=True)
class RunSettings:
    """Knobs shared by every run in a sweep."""

    alpha: float = 1e-2
    engine: str = "analytic"
    compiled: bool = True
    weights: ComplexityWeights = field(default_factory=ComplexityWeights)
    boost_call_cap: int = 10_000
    seed: int = 0


def _solver_cfg(eps: float, tau: float, da: Optional[str],
                settings: RunSettings) -> MtplsConfig:
    return MtplsConfig(
        epsilon=eps, alpha=settings.alpha, da_kind=da,
        integrator=IntegratorConfig(tau=tau), engine=settings.engine,
        boost_call_cap=settings.boost_call_cap, record_trace=False)


def _f(x: float) -> str:
    return f"{x:.17g}"


def run_sample(scenario: Scenario, eps: float, tau: float, variant: str,
               settings: RunSettings) -> dict:
    """Run one (sample, variant) pair; panics become failure records."""
    algo, da = parse_variant(variant)
    row = {
        "eps": _f(eps), "tau": _f(tau), "v0": _f(scenario.v0),
        "s1": _f(scenario.s1), "s2": _f(scenario.s2),
        "v1": _f(scenario.v1), "v2": _f(scenario.v2),
        "algo": algo, "da": da or "",
    }
    counters = RunCounters()
    try:
        plant, target = scenario.problem(compiled=settings.compiled)
        p0 = scenario.initial_support()
        outcome = _SOLVERS[algo](plant, target, _solver_cfg(eps, tau, da, settings), p0)
        counters = outcome.counters
        row["status"] = outcome.status.value
        row["fail_code"] = str(outcome.fail_code)
        row["t_star"] = _f(outcome.t_star)
    except Exception as exc:  # per-sample panic: record, never abort the grid
        row["status"] = "error"
        row["fail_code"] = "0"
        row["t_star"] = "nan"
        row["detail"] = f"{type(exc).__name__}: {exc}"
    row["i_s"] = _f(counters.i_s)
    row["i_f"] = _f(counters.i_f)
    row["n_s"] = str(counters.n_s)
    row["n_f"] = str(counters.n_f)
    row["cx_a"] = _f(complexity_type_a(counters))
    row["cx_b"] = _f(complexity_type_b(counters, settings.weights, tau))
    row["cx_c"] = str(complexity_type_c(counters))
    return row


def _row_line(row: dict) -> str:
    return ",".join(row[k] for k in CSV_HEADER.split(","))


def iter_jobs(grid: GridSpec, stride: int):
    scenarios = grid_scenarios(grid, stride)
    for eps in grid.epsilons:
        for tau in grid.taus:
            for scenario in scenarios:
                yield eps, tau, scenario


def run_grid(grid: GridSpec, algos: Iterable[str], out_dir: str,
             stride: int = 1, settings: RunSettings | None = None,
             workers: int = 1) -> dict[str, str]:
    """Run the sweep and write results + aggregate tables.

    Rows are emitted in grid-enumeration order regardless of worker count,
    so output is deterministic.  Returns the written file paths.
    """
    settings = settings or RunSettings()
    algos = tuple(algos)
    for name in algos:
        parse_variant(name)
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")

    jobs = list(iter_jobs(grid, stride))
    rows: list[dict] = []
    with open(results_path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        if workers > 1:
            import multiprocessing as mp
            with mp.Pool(workers) as pool:
                for chunk in pool.imap(
                        _run_job_batch,
                        ((eps, tau, scenario, algos, settings)
                         for eps, tau, scenario in jobs),
                        chunksize=4):
                    for row in chunk:
                        fh.write(_row_line(row) + "\n")
                        rows.append(row)
        else:
            for eps, tau, scenario in jobs:
                for row in _run_job_batch((eps, tau, scenario, algos, settings)):
                    fh.write(_row_line(row) + "\n")
                    rows.append(row)

    paths = {"results": results_path}
    paths["failure_rates"] = _write_failure_rates(rows, out_dir)
    paths["superiority"] = _write_superiority(rows, algos, out_dir)
    return paths


def _run_job_batch(job) -> list[dict]:
    eps, tau, scenario, algos, settings = job
    return [run_sample(scenario, eps, tau, v, settings) for v in algos]


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

_OK_STATUSES = ("converged", "trivial_hit_at_zero")


def _variant_of(row: dict) -> str:
    return row["algo"] + ("+" + row["da"] if row["da"] else "")


def _sample_key(row: dict) -> tuple:
    return (row["eps"], row["tau"], row["v0"], row["s1"], row["s2"],
            row["v1"], row["v2"])


def load_rows(path: str) -> list[dict]:
    """Read a results CSV, checking schema and reporting bad rows by number."""
    cols = CSV_HEADER.split(",")
    with open(path) as fh:
        header = fh.readline().strip()
        have = header.split(",") if header else []
        for col in cols:
            if col not in have:
                raise ValueError(f"missing column {col!r} in {path}")
        idx = {c: have.index(c) for c in cols}
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(have):
                raise ValueError(f"{path}:{lineno}: expected {len(have)} "
                                 f"fields, got {len(parts)}")
            row = {c: parts[idx[c]] for c in cols}
            try:
                for c in ("eps", "tau", "t_star", "i_s", "i_f",
                          "cx_a", "cx_b", "cx_c"):
                    float(row[c])
                int(row["fail_code"])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            rows.append(row)
    return rows


def excluded_samples(rows: list[dict]) -> set[tuple]:
    """Samples in which at least one algorithm failed; these are dropped
    from every complexity average and superiority count."""
    return {_sample_key(r) for r in rows if r["status"] not in _OK_STATUSES}


def failure_rates(rows: list[dict]) -> dict[tuple, tuple[int, int]]:
    """(tau, eps, variant) -> (failures, samples)."""
    out: dict[tuple, list[int]] = {}
    for r in rows:
        key = (r["tau"], r["eps"], _variant_of(r))
        cell = out.setdefault(key, [0, 0])
        cell[1] += 1
        if r["status"] not in _OK_STATUSES:
            cell[0] += 1
    return {k: (v[0], v[1]) for k, v in out.items()}


def mean_complexities(rows: list[dict]) -> dict[tuple, dict[str, float]]:
    """(tau, eps, variant) -> mean of each complexity over clean samples."""
    bad = excluded_samples(rows)
    acc: dict[tuple, list] = {}
    for r in rows:
        if _sample_key(r) in bad:
            continue
        key = (r["tau"], r["eps"], _variant_of(r))
        cell = acc.setdefault(key, [0, 0.0, 0.0, 0.0])
        cell[0] += 1
        cell[1] += float(r["cx_a"])
        cell[2] += float(r["cx_b"])
        cell[3] += float(r["cx_c"])
    return {k: {"count": v[0], "cx_a": v[1] / v[0], "cx_b": v[2] / v[0],
                "cx_c": v[3] / v[0]}
            for k, v in acc.items() if v[0] > 0}


def superiority_matrix(rows: list[dict], algos: Iterable[str],
                       metric: str = "cx_b"):
    """Pooled percentage of clean samples where the row variant beats the
    column variant on the given complexity metric."""
    algos = tuple(algos)
    bad = excluded_samples(rows)
    by_sample: dict[tuple, dict[str, float]] = {}
    for r in rows:
        key = _sample_key(r)
        if key in bad:
            continue
        by_sample.setdefault(key, {})[_variant_of(r)] = float(r[metric])
    pct: list[list[float | None]] = []
    for a in algos:
        line: list[float | None] = []
        for b in algos:
            considered = wins = 0
            for cells in by_sample.values():
                if a in cells and b in cells:
                    considered += 1
                    if cells[a] < cells[b]:
                        wins += 1
            line.append(100.0 * wins / considered if considered else None)
        pct.append(line)
    return pct


def _write_failure_rates(rows: list[dict], out_dir: str) -> str:
    path = os.path.join(out_dir, "failure_rates.csv")
    table = failure_rates(rows)
    with open(path, "w", newline="\n") as fh:
        fh.write("tau,eps,variant,samples,failures,rate\n")
        for key in sorted(table, key=lambda k: (float(k[0]), -float(k[1]), k[2])):
            failures, samples = table[key]
            fh.write(f"{key[0]},{key[1]},{key[2]},{samples},{failures},"
                     f"{_f(failures / samples)}\n")
    return path


def _write_superiority(rows: list[dict], algos: tuple[str, ...],
                       out_dir: str) -> str:
    path = os.path.join(out_dir, "superiority.csv")
    pct = superiority_matrix(rows, algos)
    with open(path, "w", newline="\n") as fh:
        fh.write("row_variant,col_variant,pct_lower_type_b\n")
        for i, a in enumerate(algos):
            for j, b in enumerate(algos):
                val = pct[i][j]
                fh.write(f"{a},{b},{'' if val is None else _f(val)}\n")
    return path


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------

def emit_plots(csv_path: str, out_dir: str) -> list[str]:
    """Render failure-rate, complexity, and superiority charts as SVG."""
    from . import svgplot
    rows = load_rows(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    os.makedirs(out_dir, exist_ok=True)
    algos = sorted({_variant_of(r) for r in rows},
                   key=lambda v: VARIANTS.index(v) if v in VARIANTS else 99)
    taus = sorted({r["tau"] for r in rows}, key=float, reverse=True)
    epsilons = sorted({r["eps"] for r in rows}, key=float, reverse=True)
    written = []

    rates = failure_rates(rows)
    for tau in taus:
        series = []
        for v in algos:
            pts = []
            for eps in epsilons:
                cell = rates.get((tau, eps, v))
                if cell:
                    pts.append((float(eps), 100.0 * cell[0] / cell[1]))
            series.append((v, pts))
        svg = svgplot.line_chart(
            f"Failure rate vs accuracy (tau = {float(tau):g})",
            "epsilon", "failure rate, %", series, logx=True)
        path = os.path.join(out_dir, f"failure_rate_tau_{float(tau):.0e}.svg")
        with open(path, "w", newline="\n") as fh:
            fh.write(svg)
        written.append(path)

    means = mean_complexities(rows)
    labels = {"cx_a": ("type A (integration span)", "complexity_type_a"),
              "cx_b": ("type B, seconds", "complexity_type_b"),
              "cx_c": ("type C (unique calls)", "complexity_type_c")}
    for metric, (ylabel, stem) in labels.items():
        for tau in taus:
            series = []
            for v in algos:
                pts = []
                for eps in epsilons:
                    cell = means.get((tau, eps, v))
                    if cell:
                        pts.append((float(eps), cell[metric]))
                series.append((v, pts))
            svg = svgplot.line_chart(
                f"{ylabel} vs accuracy (tau = {float(tau):g})",
                "epsilon", ylabel, series, logx=True, logy=True)
            path = os.path.join(out_dir, f"{stem}_tau_{float(tau):.0e}.svg")
            with open(path, "w", newline="\n") as fh:
                fh.write(svg)
            written.append(path)

    pct = superiority_matrix(rows, algos)
    svg = svgplot.heatmap(
        "Share of samples with lower type B complexity (row vs column), %",
        list(algos), list(algos), pct)
    path = os.path.join(out_dir, "superiority_type_b.svg")
    with open(path, "w", newline="\n") as fh:
        fh.write(svg)
    written.append(path)
    return written
