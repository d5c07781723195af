"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Environment: ADIASCALE_PRECISION (significant digits in report files,
default full precision) and ADIASCALE_THREADS (worker threads for ensemble
studies; outputs are identical for any value).
"""

from __future__ import annotations

import dataclasses
import sys

import click

from . import sweep as sweep_mod
from . import verify as verify_mod
from .errors import ConfigError, NumericalError


@click.group()
def cli():
    """Scaling studies of adiabaticity-cost proxies vs ground-state path length."""


def _fail(exc, code):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _print_fits(series):
    for variant, fit in series.fits.items():
        verdict = "superlinear" if fit.superlinear else "not superlinear"
        click.echo(
            f"{variant}: Q_D/L ~ {fit.a:.6g}*log(L) + {fit.b:.6g} "
            f"(stderr_a {fit.stderr_a:.3g}, residual {fit.residual:.3g}) -> {verdict}"
        )


@cli.command("sweep")
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--resume", is_flag=True, default=False,
              help="Keep records already present in the output directory.")
def sweep_cmd(config_file, out_dir, resume):
    """Run a ladder sweep from a JSON config file."""
    try:
        config = sweep_mod.SweepConfig.from_file(config_file)
        if out_dir is not None:
            config = dataclasses.replace(config, out_dir=out_dir)
    except ConfigError as exc:
        _fail(exc, 2)
    try:
        series = sweep_mod.run_sweep(config, resume=resume)
        if config.out_dir:
            for fmt in ("csv", "jsonl", "plotdata"):
                sweep_mod.emit_report(series, fmt, config.out_dir)
    except NumericalError as exc:
        _fail(exc, 3)
    click.echo(f"{len(series.records)} ladder points")
    _print_fits(series)


@cli.command("dim-study")
@click.option("--dims", default="2,4,8,16,32,64", show_default=True)
@click.option("--samples", default=100, show_default=True, type=int)
@click.option("--t-end", default=10.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def dim_study_cmd(dims, samples, t_end, seed, out_dir):
    """Mean path length per Hilbert-space dimension (random ensemble)."""
    try:
        dim_list = [int(x) for x in dims.split(",") if x.strip()]
    except ValueError as exc:
        _fail(f"bad --dims: {exc}", 2)
    try:
        result = sweep_mod.dim_study(dim_list, samples, t_end, seed)
    except ConfigError as exc:
        _fail(exc, 2)
    except NumericalError as exc:
        _fail(exc, 3)
    for d, mean, std in result.rows:
        click.echo(f"dim {d}: mean L = {mean:.6g} (std {std:.4g})")
    if result.fit_log is not None:
        click.echo(
            f"log fit: L ~ {result.fit_log.a:.6g}*log(dim) + {result.fit_log.b:.6g} "
            f"(residual {result.fit_log.residual:.3g}; "
            f"linear-in-dim residual {result.fit_linear_residual:.3g})"
        )
    if out_dir:
        for fmt in ("csv", "jsonl", "plotdata"):
            sweep_mod.emit_report(result, fmt, out_dir)


@cli.command("proxies")
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def proxies_cmd(config_file, out_dir):
    """Sweep one path with all proxy variants and compare their fits."""
    try:
        config = sweep_mod.SweepConfig.from_file(config_file)
        config = dataclasses.replace(
            config, variants=sweep_mod.VARIANTS,
            out_dir=out_dir if out_dir is not None else config.out_dir,
        )
    except ConfigError as exc:
        _fail(exc, 2)
    try:
        series = sweep_mod.run_sweep(config)
        if config.out_dir:
            for fmt in ("csv", "jsonl", "plotdata"):
                sweep_mod.emit_report(series, fmt, config.out_dir)
    except NumericalError as exc:
        _fail(exc, 3)
    _print_fits(series)


@cli.command("verify")
def verify_cmd():
    """Run the built-in oracle/invariant suite."""
    ok = verify_mod.run_all(echo=click.echo)
    if not ok:
        sys.exit(3)


def main():
    cli(prog_name="adiascale")


if __name__ == "__main__":
    main()
