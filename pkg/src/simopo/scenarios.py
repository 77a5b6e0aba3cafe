"""Named, reproducible experiments emitting CSV datasets for the paper-style figures.

Each scenario assembles the library layers into one deterministic dataset:
identical configuration produces byte-identical CSV output.  A JSON manifest
recording every resolved parameter is written next to each dataset.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .errors import ConfigError
from .mismatch import (
    MismatchSpec,
    coupling_vector,
    enhancement_factor,
    target_variance,
    to_decibels,
)
from .modes import ModeBasis, basis_change
from .opo import OpoConfig, apply_loss, block_squeezing, covariance, gouy_phase
from .pdc import SincKernelParams, fit_alpha, fit_pump_waist, gaussian_gain, sinc_gain, transformed_gain

__all__ = ["SCENARIOS", "list_scenarios", "run", "parse_sweep", "RunResult"]

UNSTABLE = "unstable"
STABLE = "ok"

_KIND_ALIASES = {"disp": "displacement", "displacement": "displacement", "tilt": "tilt", "size": "size"}
_DEFAULT_PLANE = {"displacement": "image", "tilt": "fourier", "size": "image"}
# mismatch strengths giving 50% power overlap with the target mode
_HALF_OVERLAP = {
    "displacement": math.sqrt(math.log(2.0)),
    "tilt": math.sqrt(math.log(2.0)),
    "size": 1.0 + math.sqrt(2.0),
}


def parse_sweep(text: str) -> tuple[float, float, int]:
    """Parse a MIN:MAX:STEPS sweep specification."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must be MIN:MAX:STEPS, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as err:
        raise ConfigError(f"invalid sweep {text!r}: {err}") from err
    if steps < 2:
        raise ConfigError(f"sweep needs at least 2 steps, got {steps}")
    return lo, hi, steps


def _sweep_values(sweep) -> np.ndarray:
    if isinstance(sweep, str):
        sweep = parse_sweep(sweep)
    lo, hi, steps = sweep
    if steps < 2:
        raise ConfigError(f"sweep needs at least 2 steps, got {steps}")
    return np.linspace(lo, hi, int(steps))


def _map_ordered(func: Callable, items) -> list:
    """Parallel map preserving input order (results are gathered, then sorted
    by index, so threading never changes output bytes)."""
    items = list(items)
    if len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=4) as pool:
        return list(pool.map(func, items))


def _resolve_kind(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind]
    except KeyError:
        raise ConfigError(f"kind must be one of disp|tilt|size, got {kind!r}") from None


def _build_config(p: dict, cutoff: int) -> OpoConfig:
    try:
        gain = gaussian_gain(p["g00"], p["xi"], ModeBasis(cutoff))
        return OpoConfig(
            t_input=p["ti"],
            t_loss=p["tl"],
            gouy=2.0 * math.pi * p["gouy"],
            gain=gain,
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _spec_from_params(p: dict) -> MismatchSpec:
    kind = _resolve_kind(p["kind"])
    plane = p["plane"] or _DEFAULT_PLANE[kind]
    # neutral placeholder strength; sweeps substitute the real value
    return MismatchSpec(kind=kind, parameter=1.0, plane=plane, lo_phase=p["lo_phase"])


def _default_mismatch_sweep(kind: str) -> tuple[float, float, int]:
    if kind == "size":
        return (0.4, 2.5, 43)
    return (0.0, 3.0, 61)


def _mismatch_rows(v, basis, template: MismatchSpec, parameters, eta_extra: float):
    """Shared mismatch-sweep core: multimode vs the two reference models."""
    v = apply_loss(v, eta_extra)
    s00 = v[basis.index((0, 0)), basis.index((0, 0))]

    def one(parameter):
        parameter = float(parameter)
        if template.kind == "size" and parameter <= 0:
            raise ConfigError("size sweep values must be positive")
        spec = MismatchSpec(
            kind=template.kind,
            parameter=parameter,
            plane=template.plane,
            lo_phase=template.lo_phase,
        )
        coupling = coupling_vector(spec, basis)
        beta00_sq = abs(coupling.coefficients[0]) ** 2
        multi = target_variance(v, coupling)
        single = beta00_sq * s00 + (1.0 - beta00_sq)
        infinite = 1.0 - beta00_sq * eta_extra
        return parameter, beta00_sq, multi, single, infinite

    return _map_ordered(one, parameters)


def _scenario_mode_spectrum(p: dict, cutoff: int):
    config = _build_config(p, cutoff)
    v = covariance(config, p["omega"])
    results = block_squeezing(v, config.basis)
    delta = config.delta_tilde()
    rows = []
    for order in range(cutoff + 1):
        index = config.basis.index((0, order))
        res = results[index]
        rows.append(
            [
                order,
                config.gain.entries[index, index],
                delta[index],
                res.sx,
                res.sp,
                res.theta,
                to_decibels(res.sx),
                to_decibels(res.sp),
            ]
        )
    columns = [
        "order",
        "g_tilde",
        "delta_tilde",
        "variance_x",
        "variance_p",
        "angle_rad",
        "squeezing_db",
        "antisqueezing_db",
    ]
    return columns, rows, ["squeezing_db"]


def _tracked_orders(p: dict, cutoff: int) -> list[int]:
    return list(range(min(int(p["max_order"]), cutoff) + 1))


def _scenario_gouy_sweep(p: dict, cutoff: int):
    orders = _tracked_orders(p, cutoff)
    rows = []
    for fraction in _sweep_values(p["sweep"]):
        config = _build_config({**p, "gouy": float(fraction)}, cutoff)
        results = block_squeezing(covariance(config, p["omega"]), config.basis)
        for order in orders:
            res = results[config.basis.index((0, order))]
            rows.append([float(fraction), order, res.sx, res.theta, to_decibels(res.sx)])
    columns = ["gouy_over_2pi", "order", "variance_x", "angle_rad", "squeezing_db"]
    return columns, rows, ["squeezing_db"]


def _scenario_sideband_sweep(p: dict, cutoff: int):
    orders = _tracked_orders(p, cutoff)
    config = _build_config(p, cutoff)
    rows = []
    for omega in _sweep_values(p["sweep"]):
        results = block_squeezing(covariance(config, float(omega)), config.basis)
        for order in orders:
            res = results[config.basis.index((0, order))]
            rows.append([float(omega), order, res.sx, res.theta, to_decibels(res.sx)])
    columns = ["omega", "order", "variance_x", "angle_rad", "squeezing_db"]
    return columns, rows, ["squeezing_db"]


def _scenario_mismatch_sweep(p: dict, cutoff: int):
    template = _spec_from_params(p)
    sweep = p["sweep"] or _default_mismatch_sweep(template.kind)
    config = _build_config(p, cutoff)
    v = covariance(config, p["omega"])
    rows = []
    for parameter, beta00_sq, multi, single, infinite in _mismatch_rows(
        v, config.basis, template, _sweep_values(sweep), p["eta_extra"]
    ):
        rows.append(
            [
                parameter,
                beta00_sq,
                multi,
                single,
                infinite,
                to_decibels(multi),
                to_decibels(single),
                to_decibels(infinite),
            ]
        )
    columns = [
        "parameter",
        "beta00_sq",
        "var_multimode",
        "var_single_mode",
        "var_infinite",
        "db_multimode",
        "db_single_mode",
        "db_infinite",
    ]
    return columns, rows, ["db_multimode", "db_single_mode", "db_infinite"]


def _scenario_loss_sweep(p: dict, cutoff: int):
    template = _spec_from_params(p)
    sweep = p["sweep"] or _default_mismatch_sweep(template.kind)
    config = _build_config(p, cutoff)
    v = covariance(config, p["omega"])
    etas = (1.0, 0.95, 0.9) if p["eta_extra"] is None else (p["eta_extra"],)
    rows = []
    for eta in etas:
        for parameter, beta00_sq, multi, single, infinite in _mismatch_rows(
            v, config.basis, template, _sweep_values(sweep), eta
        ):
            rows.append(
                [
                    eta,
                    parameter,
                    beta00_sq,
                    multi,
                    single,
                    infinite,
                    to_decibels(multi),
                    to_decibels(single),
                    to_decibels(infinite),
                ]
            )
    columns = [
        "eta",
        "parameter",
        "beta00_sq",
        "var_multimode",
        "var_single_mode",
        "var_infinite",
        "db_multimode",
        "db_single_mode",
        "db_infinite",
    ]
    return columns, rows, ["db_multimode", "db_single_mode", "db_infinite"]


def _scenario_waist_mismatch(p: dict, cutoff: int):
    template = _spec_from_params(p)
    sweep = p["sweep"] or _default_mismatch_sweep(template.kind)
    ratio = p["waist_ratio"]
    if ratio <= 0:
        raise ConfigError(f"waist ratio must be positive, got {ratio}")
    config = _build_config(p, cutoff)
    change = basis_change(1.0, ratio, config.basis)
    mixed_gain = transformed_gain(config.gain, change)
    mixed = OpoConfig(
        t_input=p["ti"], t_loss=p["tl"], gouy=config.gouy, gain=mixed_gain
    )
    v_mixed = covariance(mixed, p["omega"])
    v_matched = covariance(config, p["omega"])
    parameters = _sweep_values(sweep)
    mixed_rows = _mismatch_rows(v_mixed, config.basis, template, parameters, p["eta_extra"])
    matched_rows = _mismatch_rows(v_matched, config.basis, template, parameters, p["eta_extra"])
    rows = []
    for (parameter, beta00_sq, multi, single, _), (_, _, matched, _, _) in zip(
        mixed_rows, matched_rows
    ):
        rows.append(
            [
                ratio,
                parameter,
                beta00_sq,
                multi,
                matched,
                single,
                to_decibels(multi),
                to_decibels(matched),
                to_decibels(single),
            ]
        )
    columns = [
        "waist_ratio",
        "parameter",
        "beta00_sq",
        "var_multimode",
        "var_matched",
        "var_single_mode",
        "db_multimode",
        "db_matched",
        "db_single_mode",
    ]
    return columns, rows, ["db_multimode", "db_matched", "db_single_mode"]


def _scenario_sinc_compare(p: dict, cutoff: int, extras: Optional[dict] = None):
    template = _spec_from_params(p)
    sweep = p["sweep"] or _default_mismatch_sweep(template.kind)
    alpha = p["alpha"] if p["alpha"] is not None else fit_alpha(p["xi"], cutoff=cutoff)
    cavity_waist = 1.0
    params = SincKernelParams(xi=p["xi"], alpha=alpha, pump_waist=1.0)
    pump = p["pump_waist"] if p["pump_waist"] is not None else fit_pump_waist(params, cavity_waist)
    params = SincKernelParams(xi=p["xi"], alpha=alpha, pump_waist=pump)
    if extras is not None:
        extras["fitted_alpha"] = alpha
        extras["fitted_pump_waist"] = pump

    basis = ModeBasis(cutoff)
    gain = sinc_gain(params, cavity_waist, basis, p["g00"])
    config_sinc = OpoConfig(
        t_input=p["ti"], t_loss=p["tl"], gouy=2 * math.pi * p["gouy"], gain=gain
    )
    config_gauss = _build_config(p, cutoff)
    v_sinc = covariance(config_sinc, p["omega"])
    v_gauss = covariance(config_gauss, p["omega"])
    parameters = _sweep_values(sweep)
    sinc_rows = _mismatch_rows(v_sinc, basis, template, parameters, p["eta_extra"])
    gauss_rows = _mismatch_rows(v_gauss, basis, template, parameters, p["eta_extra"])
    rows = []
    for (parameter, beta00_sq, multi, single, _), (_, _, gauss, _, _) in zip(
        sinc_rows, gauss_rows
    ):
        rows.append(
            [
                parameter,
                beta00_sq,
                multi,
                gauss,
                single,
                to_decibels(multi),
                to_decibels(gauss),
                to_decibels(single),
            ]
        )
    columns = [
        "parameter",
        "beta00_sq",
        "var_sinc",
        "var_gaussian",
        "var_single_mode",
        "db_sinc",
        "db_gaussian",
        "db_single_mode",
    ]
    return columns, rows, ["db_sinc", "db_gaussian", "db_single_mode"]


def _scenario_gouy_map(p: dict, cutoff: int):
    template = _spec_from_params(p)
    parameter = p["parameter"]
    if parameter is None:
        parameter = _HALF_OVERLAP[template.kind]
    spec = MismatchSpec(
        kind=template.kind, parameter=parameter, plane=template.plane, lo_phase=template.lo_phase
    )
    # wide enough that both the instability hatching and the sign change of
    # the enhancement factor are visible on the default map
    sweep = p["sweep"] or (-0.05, 0.05, 41)
    detunings = _sweep_values(sweep)
    basis = ModeBasis(cutoff)
    coupling = coupling_vector(spec, basis)
    beta00_sq = abs(coupling.coefficients[0]) ** 2

    def one(point):
        dl1, dl2 = point
        theta = gouy_phase(dl1, dl2)
        if theta is None:
            return [dl1, dl2, UNSTABLE, "", "", "", ""]
        config = OpoConfig(
            t_input=p["ti"],
            t_loss=p["tl"],
            gouy=theta,
            gain=gaussian_gain(p["g00"], p["xi"], basis),
        )
        v = apply_loss(covariance(config, p["omega"]), p["eta_extra"])
        s00 = v[0, 0]
        multi = target_variance(v, coupling)
        single = beta00_sq * s00 + (1.0 - beta00_sq)
        return [dl1, dl2, STABLE, theta, multi, single, enhancement_factor(multi, single)]

    points = [(float(dl1), float(dl2)) for dl1 in detunings for dl2 in detunings]
    rows = _map_ordered(one, points)
    columns = [
        "dl1_over_r",
        "dl2_over_r",
        "status",
        "theta_gouy",
        "var_multimode",
        "var_single_mode",
        "enhancement_db",
    ]
    return columns, rows, ["enhancement_db"]


_COMMON = {
    "xi": 1.0 / 81.0,
    "ti": 0.1,
    "tl": 0.0,
    "g00": 0.5,
    "gouy": 0.0,
    "nmax": 20,
    "eta_extra": 1.0,
}
_MISMATCH = {"kind": "disp", "plane": None, "lo_phase": None, "sweep": None}


@dataclass(frozen=True)
class Scenario:
    name: str
    figure: str
    description: str
    defaults: dict
    build: Callable

    def schema(self) -> dict:
        return {
            "figure": self.figure,
            "description": self.description,
            "parameters": {
                key: None if value is None else value for key, value in sorted(self.defaults.items())
            },
        }


SCENARIOS: dict[str, Scenario] = {
    scenario.name: scenario
    for scenario in [
        Scenario(
            "mode-spectrum",
            "fig2a",
            "Per-order squeezing and angle of the multimode output",
            {**_COMMON, "omega": 0.0},
            _scenario_mode_spectrum,
        ),
        Scenario(
            "gouy-sweep",
            "fig2bc",
            "Squeezing and angle of low orders versus the Gouy phase detuning",
            {**_COMMON, "omega": 0.0, "sweep": (0.0, 0.01, 51), "max_order": 4},
            _scenario_gouy_sweep,
        ),
        Scenario(
            "sideband-sweep",
            "fig2de",
            "Squeezing and angle of low orders versus the sideband frequency",
            {**_COMMON, "gouy": 0.002, "sweep": (0.0, 3.0, 121), "max_order": 4},
            _scenario_sideband_sweep,
        ),
        Scenario(
            "mismatch-sweep",
            "fig4",
            "Delivered squeezing versus mismatch strength, against both references",
            {**_COMMON, **_MISMATCH, "omega": math.pi / 25},
            _scenario_mismatch_sweep,
        ),
        Scenario(
            "loss-sweep",
            "fig5",
            "Mismatch sweep repeated for several total transmissions",
            {**_COMMON, **_MISMATCH, "omega": math.pi / 25, "eta_extra": None},
            _scenario_loss_sweep,
        ),
        Scenario(
            "waist-mismatch",
            "fig6ab",
            "Mismatch sweep with the gain built in a different-waist basis",
            {**_COMMON, **_MISMATCH, "omega": math.pi / 25, "waist_ratio": 1.4},
            _scenario_waist_mismatch,
        ),
        Scenario(
            "sinc-compare",
            "fig6cd",
            "Exact sinc-kernel gain versus the Gaussian approximation",
            {**_COMMON, **_MISMATCH, "omega": math.pi / 25, "alpha": None, "pump_waist": None},
            _scenario_sinc_compare,
        ),
        Scenario(
            "gouy-map",
            "fig8",
            "Enhancement factor over the cavity detuning plane at fixed mismatch",
            {**_COMMON, **_MISMATCH, "omega": math.pi / 25, "parameter": None},
            _scenario_gouy_map,
        ),
    ]
}


def list_scenarios() -> dict:
    """Machine-readable schema of every scenario (names, figures, parameters)."""
    return {name: scenario.schema() for name, scenario in sorted(SCENARIOS.items())}


@dataclass(frozen=True)
class RunResult:
    csv_path: Path
    manifest_path: Path
    columns: list
    rows: list
    manifest: dict


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, columns, rows) -> None:
    lines = [",".join(columns)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _convergence_deltas(scenario, p, cutoff, columns, rows, db_columns):
    _, refined_rows, _ = scenario.build(p, cutoff + 5)
    if len(refined_rows) != len(rows):
        raise ConfigError("convergence re-run produced a different row count")
    indices = [columns.index(c) for c in db_columns]
    deltas = []
    for row, refined in zip(rows, refined_rows):
        cells = [
            abs(row[i] - refined[i])
            for i in indices
            if not isinstance(row[i], str)
            and not isinstance(refined[i], str)
            and math.isfinite(row[i])
            and math.isfinite(refined[i])
        ]
        deltas.append(max(cells) if cells else "")
    return deltas


def run(name: str, out: str, check_convergence: bool = False, **overrides) -> RunResult:
    """Run one scenario and write its CSV dataset and JSON manifest.

    ``overrides`` update the scenario's default parameters; unknown keys are
    rejected.  With ``check_convergence`` the dataset is recomputed at
    N_max + 5 and a per-row ``conv_delta_db`` column reports the largest
    squeezing-level drift.
    """
    if name not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise ConfigError(f"unknown scenario {name!r}; valid scenarios: {known}")
    scenario = SCENARIOS[name]
    params = dict(scenario.defaults)
    unknown = set(overrides) - set(params)
    if unknown:
        raise ConfigError(
            f"unknown parameter(s) {sorted(unknown)} for scenario {name!r}; "
            f"valid: {sorted(params)}"
        )
    params.update({k: v for k, v in overrides.items() if v is not None})
    cutoff = int(params["nmax"])
    if cutoff < 0:
        raise ConfigError(f"nmax must be non-negative, got {cutoff}")

    extras: dict = {}
    if scenario.build is _scenario_sinc_compare:
        columns, rows, db_columns = scenario.build(params, cutoff, extras)
    else:
        columns, rows, db_columns = scenario.build(params, cutoff)

    manifest = {
        "scenario": name,
        "figure": scenario.figure,
        "library_version": __version__,
        "parameters": {
            key: (list(value) if isinstance(value, tuple) else value)
            for key, value in sorted(params.items())
        },
        "columns": list(columns),
        "row_count": len(rows),
    }
    manifest.update(extras)

    if check_convergence:
        if scenario.build is _scenario_sinc_compare:
            refined_params = {**params, "alpha": extras["fitted_alpha"],
                              "pump_waist": extras["fitted_pump_waist"]}
        else:
            refined_params = params
        deltas = _convergence_deltas(scenario, refined_params, cutoff, columns, rows, db_columns)
        columns = list(columns) + ["conv_delta_db"]
        rows = [row + [delta] for row, delta in zip(rows, deltas)]
        numeric = [d for d in deltas if not isinstance(d, str)]
        manifest["convergence_max_delta_db"] = max(numeric) if numeric else None
        manifest["columns"] = list(columns)

    csv_path = Path(out)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    _write_csv(csv_path, columns, rows)
    manifest_path = Path(str(csv_path) + ".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return RunResult(
        csv_path=csv_path, manifest_path=manifest_path, columns=columns, rows=rows,
        manifest=manifest,
    )
