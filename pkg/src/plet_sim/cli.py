"""Command-line entry point.

Exit codes: 0 success, 2 configuration/schema error, 3 numerical guard trip
(integrator non-convergence, trace drift, or Fock-cutoff saturation).
"""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .config import SCENARIOS, ConfigError, default_config, load_config
from .lindblad import LindbladError
from .oracle import ConvergenceError
from .runner import RUNNERS, ExternalDataError, ingest_external
from .model import PHOTO_LABELS

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@click.group()
def main():
    """Classical simulator of Trotterized donor-acceptor transfer dynamics."""


def _load(scenario: str | None, config: str | None, defaults: bool):
    if (config is None) == (not defaults):
        raise ConfigError(["exactly one of --config or --defaults is required"])
    if defaults:
        if scenario is None:
            raise ConfigError(["--defaults requires a scenario argument"])
        return default_config(scenario)
    cfg = load_config(config)
    if scenario is not None and cfg.scenario != scenario:
        raise ConfigError(
            [f"config is for scenario {cfg.scenario!r}, command asked for {scenario!r}"]
        )
    return cfg


@main.command()
@click.argument("scenario", type=click.Choice(SCENARIOS))
@click.option("--config", type=click.Path(), default=None, help="JSON configuration file.")
@click.option("--defaults", is_flag=True, help="Use the built-in scenario defaults.")
@click.option("--out", type=click.Path(), default=None, help="Output directory override.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for scan points.")
@click.option("--no-figures", is_flag=True, help="Skip PNG rendering.")
@click.option("--external-photo", type=click.Path(), default=None,
              help="Measured photo-excitation CSV (trotter_accuracy only).")
@click.option("--external-et", type=click.Path(), default=None,
              help="Measured electron-transfer CSV (trotter_accuracy only).")
def run(scenario, config, defaults, out, threads, no_figures, external_photo, external_et):
    """Run one scenario and write its CSV/JSON (and PNG) outputs."""
    try:
        cfg = _load(scenario, config, defaults)
        if out is not None:
            cfg = replace(cfg, out_dir=Path(out))
        if no_figures:
            cfg = replace(cfg, figures=False)
        if (external_photo or external_et) and scenario != "trotter_accuracy":
            raise ConfigError(["--external-* options apply to trotter_accuracy only"])
        kwargs = {"threads": threads}
        if scenario == "trotter_accuracy":
            if external_photo:
                kwargs["external_photo"] = ingest_external(external_photo, PHOTO_LABELS)
            if external_et:
                kwargs["external_et"] = ingest_external(external_et)
        result = RUNNERS[scenario](cfg, **kwargs)
    except (ConfigError, ExternalDataError) as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_CONFIG)
    except (LindbladError, ConvergenceError) as e:
        click.echo(f"numerical guard tripped: {e}", err=True)
        sys.exit(EXIT_NUMERICAL)
    for path in result["paths"]:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--config", type=click.Path(), required=True, help="JSON configuration file.")
def validate(config):
    """Check a configuration file against the schema."""
    try:
        cfg = load_config(config)
    except ConfigError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(f"OK: scenario={cfg.scenario}")


if __name__ == "__main__":
    main()
