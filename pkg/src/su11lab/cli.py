"""Command line entry point: ``su11lab verify | converge | sample``."""

from __future__ import annotations

import csv
import json
import sys
from fractions import Fraction

import click
import numpy as np

from . import gamma, pascal, univariate
from .fock import SiteSpace
from .harness import (SUITES, ConfigError, RunConfig, build_report, convergence_study, rng_stream, run_suite,
                      write_convergence_csv)


def _parse_alpha(text: str):
    try:
        return [Fraction(a.strip()) for a in text.split(",") if a.strip()]
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"cannot parse alpha list {text!r}") from None


@click.group()
def cli():
    """Numerical and exact verification of su(1,1) current-algebra representations."""


@cli.command()
@click.option("--suite", "suites", multiple=True, type=click.Choice(SUITES + ("all",)),
              help="Suite to run (repeatable). Default: all.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML or JSON run configuration.")
@click.option("--seed", type=int, default=None, help="Master seed (overrides config and SU11LAB_SEED).")
@click.option("--replicas", type=int, default=None, help="Monte Carlo replicas per check.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report here instead of stdout.")
def verify(suites, config_path, seed, replicas, out_path):
    """Run verification suites and emit a JSON report. Exit status 1 if any check fails."""
    overrides = {"seed": seed, "replicas": replicas}
    if suites and "all" not in suites:
        overrides["suites"] = list(dict.fromkeys(suites))
    try:
        cfg = RunConfig.load(config_path, **overrides) if config_path else RunConfig.from_mapping({}, **overrides)
    except ConfigError as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from None
    records = run_suite(cfg)
    text = json.dumps(build_report(cfg, records), indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    failed = [r.id for r in records if not r.passed]
    for rid in failed:
        click.echo(f"FAIL {rid}", err=True)
    click.echo(f"{len(records) - len(failed)}/{len(records)} checks passed", err=True)
    sys.exit(1 if failed else 0)


@cli.command()
@click.option("--target", type=click.Choice(["thm33", "bch", "vacuum-corollary"]), required=True,
              help="thm33: exponential-vector action; bch: factorization; vacuum-corollary: <Psi, U Psi>.")
@click.option("--m-list", default="10,20,30", show_default=True, help="Comma-separated truncation levels.")
@click.option("--alpha", default="1/2,3/2", show_default=True, help="Site weights.")
@click.option("--d-check", type=int, default=6, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV output (default stdout).")
def converge(target, m_list, alpha, d_check, out_path):
    """Residual against truncation level M, as CSV."""
    try:
        M_list = [int(m) for m in m_list.split(",")]
    except ValueError:
        raise click.BadParameter(f"cannot parse {m_list!r}", param_hint="--m-list") from None
    space = SiteSpace(_parse_alpha(alpha))
    try:
        rows = convergence_study(target, M_list, space=space, d_check=d_check)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    if out_path:
        with open(out_path, "w", newline="") as fh:
            write_convergence_csv(fh, rows)
    else:
        write_convergence_csv(sys.stdout, rows)


@cli.command()
@click.option("--model", type=click.Choice(["gamma", "pascal", "bd", "cir"]), required=True)
@click.option("--replicas", type=int, default=1000, show_default=True)
@click.option("--alpha", default="1/2,3/2", show_default=True, help="Site weights (first entry for bd and cir).")
@click.option("--s", "s_text", default="1/2", show_default=True, help="Pascal parameter, p = s^2.")
@click.option("--time", "T", type=float, default=1.0, show_default=True, help="Horizon for bd and cir.")
@click.option("--x0", type=float, default=1.0, show_default=True, help="Initial state for bd and cir.")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV output (default stdout).")
def sample(model, replicas, alpha, s_text, T, x0, seed, out_path):
    """Draw seeded samples from one of the reference models."""
    if replicas < 1:
        raise click.BadParameter("must be positive", param_hint="--replicas")
    try:
        seed = RunConfig.from_mapping({}, suites=[]).seed if seed is None else seed
    except ConfigError as exc:
        raise click.UsageError(str(exc)) from None
    alphas = _parse_alpha(alpha)
    space = SiteSpace(alphas)
    s = Fraction(s_text)
    if not 0 < s < 1:
        raise click.BadParameter("s must lie in (0, 1)", param_hint="--s")
    rng = rng_stream(seed, f"sample/{model}")
    fh = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        if model == "gamma":
            gamma.write_samples_csv(fh, seed, gamma.sample_gamma(gamma.GammaSampler(space), rng, replicas))
        elif model == "pascal":
            params = pascal.PascalParams(s)
            pascal.write_counts_csv(fh, seed, pascal.sample_pascal(pascal.PascalSampler(space, params), rng, replicas))
        else:
            a = float(alphas[0])
            if model == "bd":
                x = pascal.birth_death_endpoints(a, float(s * s), int(x0), T, replicas, rng)
            else:
                x = univariate.cir_euler_maruyama(a, x0, T, 1e-3, replicas, rng)
            w = csv.writer(fh)
            w.writerow(["seed", "replica", "x_T"])
            for i, v in enumerate(np.asarray(x)):
                w.writerow([seed, i, v.item()])
    finally:
        if out_path:
            fh.close()


def main(argv=None):
    cli.main(args=argv, prog_name="su11lab")


if __name__ == "__main__":
    main()
