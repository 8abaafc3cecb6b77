"""Command-line benchmark driver.

Two subcommands::

    bench run  --config grid.cfg --out results/ [--stride K]
               [--algos ne,bg+sa,...] [--taus 1e-2,1e-3] [--workers N]
    bench plot --csv results/results.csv --out plots/

The configuration file is plain ``key = value`` text (``#`` comments);
unknown keys are rejected.  Axes default to the full study grid.  Exit
codes: 0 success, 2 I/O error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .bench import (GridSpec, RunSettings, VARIANTS, default_grid,
                    emit_plots, parse_variant, run_grid)
from .counters import ComplexityWeights

_FLOAT_LIST_KEYS = ("epsilons", "v0s", "s1s", "s2s", "angles", "speeds",
                    "taus")
_KNOWN_KEYS = set(_FLOAT_LIST_KEYS) | {
    "stride", "alpha", "algos", "engine", "compiled", "t_an", "kappa",
    "seed", "workers", "boost_call_cap", "eps_powers",
}


class ConfigError(ValueError):
    pass


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}")


def parse_config(path: str | None) -> dict:
    values: dict = {}
    if path is None:
        return values
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def _build(values: dict, args) -> tuple[GridSpec, tuple[str, ...],
                                        RunSettings, int, int]:
    grid = default_grid()
    for key in _FLOAT_LIST_KEYS:
        if key in values:
            grid = replace(grid, **{key: _parse_floats(values[key])})
    if "eps_powers" in values:
        powers = _parse_floats(values["eps_powers"])
        grid = replace(grid, epsilons=tuple(3.0 ** -k for k in powers))
    if args.taus:
        grid = replace(grid, taus=_parse_floats(args.taus))

    algos_text = args.algos or values.get("algos", ",".join(VARIANTS))
    algos = tuple(a.strip().lower() for a in algos_text.split(",") if a.strip())
    for name in algos:
        try:
            parse_variant(name)
        except ValueError as exc:
            raise ConfigError(str(exc))

    try:
        weights = ComplexityWeights(
            t_an=float(values.get("t_an", 422e-9)),
            kappa=float(values.get("kappa", 208e-10)))
        settings = RunSettings(
            alpha=float(values.get("alpha", 1e-2)),
            engine=values.get("engine", "analytic"),
            compiled=values.get("compiled", "true").lower() != "false",
            weights=weights,
            boost_call_cap=int(values.get("boost_call_cap", 10_000)),
            seed=int(values.get("seed", 0)))
        stride = int(args.stride if args.stride is not None
                     else values.get("stride", 1))
        workers = int(args.workers if args.workers is not None
                      else values.get("workers", 1))
    except ValueError as exc:
        raise ConfigError(str(exc))
    if settings.engine not in ("analytic", "rk4"):
        raise ConfigError(f"unknown engine {settings.engine!r}")
    if stride < 1 or workers < 1:
        raise ConfigError("stride and workers must be >= 1")
    return grid, algos, settings, stride, workers


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Minimum-time benchmark sweep over the rocket grid.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the sweep and write CSV tables")
    p_run.add_argument("--config", default=None, help="key = value file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--stride", type=int, default=None,
                       help="per-axis subsample stride (default 1)")
    p_run.add_argument("--algos", default=None,
                       help="comma-separated variants, e.g. ne,bg+sa,s+gjk")
    p_run.add_argument("--taus", default=None,
                       help="comma-separated integration steps")
    p_run.add_argument("--workers", type=int, default=None)

    p_plot = sub.add_parser("plot", help="render SVG charts from results")
    p_plot.add_argument("--csv", required=True, help="results.csv path")
    p_plot.add_argument("--out", required=True, help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            try:
                values = parse_config(args.config)
                grid, algos, settings, stride, workers = _build(values, args)
            except ConfigError as exc:
                print(f"bench: config error: {exc}", file=sys.stderr)
                return 3
            paths = run_grid(grid, algos, args.out, stride=stride,
                             settings=settings, workers=workers)
            for name, path in sorted(paths.items()):
                print(f"{name}: {path}")
            return 0
        if args.command == "plot":
            try:
                written = emit_plots(args.csv, args.out)
            except ValueError as exc:
                print(f"bench: {exc}", file=sys.stderr)
                return 3
            for path in written:
                print(path)
            return 0
    except OSError as exc:
        print(f"bench: i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
