"""Command line interface: ``simopo run <scenario>`` and ``simopo list``.

Exit codes: 0 on success, 2 for configuration errors, 3 for unstable or
over-threshold configurations.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import ConfigError, SimopoError, ThresholdError, UnstableCavityError
from .scenarios import SCENARIOS, list_scenarios, parse_sweep, run as run_scenario

_CONFIG_KEYS = {
    "xi": float,
    "ti": float,
    "tl": float,
    "g00": float,
    "omega": float,
    "gouy": float,
    "nmax": int,
    "kind": str,
    "plane": str,
    "lo-phase": float,
    "sweep": str,
    "eta-extra": float,
    "waist-ratio": float,
    "parameter": float,
    "alpha": float,
    "pump-waist": float,
    "max-order": int,
    "out": str,
}


def _load_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` configuration file."""
    values = {}
    for line_number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{line_number}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError as err:
            raise ConfigError(f"{path}:{line_number}: bad value for {key}: {err}") from err
    return values


@click.group()
@click.version_option()
def main():
    """Multimode squeezed light from a self-imaging OPO: figure datasets as CSV."""


@main.command("list")
@click.option("--json", "as_json", is_flag=True, help="Emit the schema as JSON.")
def list_command(as_json):
    """List scenarios and their parameter schemas."""
    schema = list_scenarios()
    if as_json:
        click.echo(json.dumps(schema, indent=2, sort_keys=True))
        return
    for name, info in schema.items():
        click.echo(f"{name}  [{info['figure']}]  {info['description']}")
        defaults = ", ".join(f"{key}={value}" for key, value in info["parameters"].items())
        click.echo(f"    defaults: {defaults}")


@main.command("run")
@click.argument("scenario", type=str)
@click.option("--xi", type=float, help="Pump focusing parameter (0, 1].")
@click.option("--ti", type=float, help="Output coupler transmittance T_i.")
@click.option("--tl", type=float, help="Intracavity loss transmittance T_l.")
@click.option("--g00", type=float, help="Normalized fundamental gain (below 1).")
@click.option("--omega", type=float, help="Normalized sideband frequency.")
@click.option("--gouy", type=float, help="Round-trip Gouy phase as a fraction of 2*pi.")
@click.option("--nmax", type=int, help="Basis cutoff: modes with m+n <= nmax.")
@click.option("--kind", type=click.Choice(["disp", "tilt", "size"]), help="Mismatch kind.")
@click.option("--plane", type=click.Choice(["image", "fourier"]), help="Target plane.")
@click.option("--lo-phase", type=float, help="Extra local-oscillator phase in radians.")
@click.option("--sweep", type=str, help="Sweep range as MIN:MAX:STEPS.")
@click.option("--eta-extra", type=float, help="Extra transmission (1 = lossless).")
@click.option("--waist-ratio", type=float, help="w_H/w_c ratio for waist-mismatch.")
@click.option("--parameter", type=float, help="Fixed mismatch strength for gouy-map.")
@click.option("--alpha", type=float, help="Sinc-approximation coefficient (default: fitted).")
@click.option("--pump-waist", type=float, help="Pump waist in cavity-waist units (default: fitted).")
@click.option("--max-order", type=int, help="Highest tracked mode order for order sweeps.")
@click.option("--check-convergence", is_flag=True, help="Re-run at nmax+5 and report dB drift.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output CSV path.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Flat key = value configuration file; flags override it.")
@click.pass_context
def run_command(ctx, scenario, config_path, check_convergence, out, **flags):
    """Run SCENARIO and write its CSV dataset plus a JSON manifest."""
    try:
        file_values = _load_config_file(config_path) if config_path else {}
        overrides = {}
        for key, value in file_values.items():
            overrides[key.replace("-", "_")] = value
        for key, value in flags.items():
            source = ctx.get_parameter_source(key)
            if source is not None and source.name == "COMMANDLINE":
                overrides[key] = value
        if "sweep" in overrides and overrides["sweep"] is not None:
            overrides["sweep"] = parse_sweep(overrides["sweep"])
        out_path = out or overrides.pop("out", None) or f"{scenario}.csv"
        overrides.pop("out", None)
        result = run_scenario(
            scenario, out_path, check_convergence=check_convergence, **overrides
        )
    except ConfigError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    except (ThresholdError, UnstableCavityError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(3)
    except SimopoError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)
    click.echo(f"wrote {result.csv_path} ({result.manifest['row_count']} rows)")
    click.echo(f"wrote {result.manifest_path}")
    if "convergence_max_delta_db" in result.manifest:
        click.echo(f"max convergence drift: {result.manifest['convergence_max_delta_db']} dB")


if __name__ == "__main__":
    main()
