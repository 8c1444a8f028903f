"""Command line front end: config-driven runs with CSV/JSON/SVG output.

Configs are flat ``key: value`` text files (``=`` also accepted, ``#`` starts
a comment).  All rates and detunings in configs and outputs are in THz; the
conversion to the library's angular rates is a plain factor of 1e12.

Every command writes ``<command>.csv`` or ``<command>.json`` into the output
directory, plus ``<command>.svg`` when plotting is requested.  Output bytes
are a pure function of the config, command line and package version: no
timestamps, no environment lookups.

Exit codes: 0 success, 2 unusable config (parse or validation failure),
3 valid config outside the model's numerical domain.
"""

from __future__ import annotations

import argparse
import csv as _csv
import difflib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (
    THZ,
    NumericsError,
    ProbeDetuning,
    SystemParams,
    diagnostics,
    scattering_arrays,
)
from .repeater import (
    BELL_LABELS,
    TwoDipoleState,
    bell_measurement,
    entanglement_generation,
    false_even_probability,
    fidelity_success_tradeoff,
    parity_probe,
)
from .spectra import (
    SWEEP_AXES,
    DetuningGrid,
    NoPeak,
    locate_transparency_peak,
    parameter_sweep,
    transmission_spectrum,
)
from .svgplot import LineSeries, render_lines

COMMANDS = ("spectrum", "sweep", "entangle", "parity", "bell", "tradeoff", "diagnostics")

# node parameters, THz; defaults match the reference operating point
_PARAM_KEYS = ("gamma", "g", "tau", "kappa", "delta", "omega0")
_PARAM_DEFAULTS = {
    "gamma": 1.0,
    "g": 0.33,
    "tau": 0.001,
    "kappa": 0.1,
    "delta": 0.0,
    "omega0": 0.0,
}

_NODE_B_KEYS = tuple(f"{k}_b" for k in _PARAM_KEYS)
_TWO_NODE = set(_PARAM_KEYS) | set(_NODE_B_KEYS) | {"delta_omega"}

_COMMAND_KEYS: dict[str, set[str]] = {
    "spectrum": set(_PARAM_KEYS) | {"span", "points", "start", "stop"},
    "sweep": set(_PARAM_KEYS) | {"delta_omega", "axis", "start", "stop", "count"},
    "entangle": _TWO_NODE | {"mean_photons"},
    "parity": _TWO_NODE | {"gamma_start", "gamma_stop", "gamma_count"},
    "bell": _TWO_NODE | {"mean_photons", "state", "samples"},
    "tradeoff": _TWO_NODE | {"nbar_start", "nbar_stop", "nbar_count"},
    "diagnostics": set(_PARAM_KEYS) | {"eta"},
}

_INT_KEYS = {"points", "count", "gamma_count", "nbar_count", "samples"}
_STR_KEYS = {"axis", "state"}


class ParseError(ValueError):
    """Config file is not flat ``key: value`` text."""


class ValidationError(ValueError):
    """Config parsed but one or more settings are unusable."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key: value`` lines into raw string settings."""
    settings: dict[str, str] = {}
    first_line: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in (":", "="):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise ParseError(
                f"config line {lineno}: expected 'key: value', got {line!r}"
            )
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ParseError(
                f"config line {lineno}: expected 'key: value', got {line!r}"
            )
        if key in settings:
            raise ParseError(
                f"config line {lineno}: duplicate key {key!r} "
                f"(first set on line {first_line[key]})"
            )
        settings[key] = value
        first_line[key] = lineno
    return settings


def load_config(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_config_text(f.read())
    except OSError as exc:
        raise ParseError(f"cannot read config {path!r}: {exc.strerror}") from exc


def _coerce(command: str, raw: Mapping[str, str]) -> dict:
    """Type-check and range-check raw settings; collects every problem."""
    allowed = _COMMAND_KEYS[command]
    problems: list[str] = []
    options: dict = {}

    for key in raw:
        if key not in allowed:
            near = difflib.get_close_matches(key, sorted(allowed), n=1)
            hint = f" (did you mean {near[0]!r}?)" if near else ""
            problems.append(f"key {key!r} is not recognized for '{command}'{hint}")

    for key, value in raw.items():
        if key not in allowed:
            continue
        if key in _STR_KEYS:
            options[key] = value
        elif key in _INT_KEYS:
            try:
                options[key] = int(value)
            except ValueError:
                problems.append(f"key {key!r}: expected an integer, got {value!r}")
        else:
            try:
                number = float(value)
            except ValueError:
                problems.append(f"key {key!r}: expected a number, got {value!r}")
                continue
            if not math.isfinite(number):
                problems.append(f"key {key!r}: must be finite, got {value!r}")
                continue
            options[key] = number

    problems.extend(_check_ranges(command, options))
    if problems:
        raise ValidationError(problems)
    return options


def _check_ranges(command: str, options: dict) -> list[str]:
    problems: list[str] = []

    def positive(key):
        if key in options and not options[key] > 0:
            problems.append(f"key {key!r}: must be > 0, got {options[key]}")

    def nonnegative(key):
        if key in options and options[key] < 0:
            problems.append(f"key {key!r}: must be >= 0, got {options[key]}")

    def at_least(key, minimum):
        if key in options and options[key] < minimum:
            problems.append(
                f"key {key!r}: must be >= {minimum}, got {options[key]}"
            )

    for suffix in ("", "_b"):
        positive(f"gamma{suffix}")
        for name in ("g", "tau", "kappa", "omega0"):
            nonnegative(f"{name}{suffix}")

    if command == "spectrum":
        positive("span")
        at_least("points", 2)
        has_start, has_stop = "start" in options, "stop" in options
        if has_start != has_stop:
            problems.append("keys 'start' and 'stop' must be given together")
        elif has_start and not options["start"] < options["stop"]:
            problems.append(
                f"key 'start': must be < 'stop', got {options['start']} "
                f"and {options['stop']}"
            )
    elif command == "sweep":
        if "axis" not in options:
            problems.append(f"key 'axis' is required (one of {', '.join(SWEEP_AXES)})")
        elif options["axis"] not in SWEEP_AXES:
            problems.append(
                f"key 'axis': must be one of {', '.join(SWEEP_AXES)}, "
                f"got {options['axis']!r}"
            )
        for key in ("start", "stop"):
            if key not in options:
                problems.append(f"key {key!r} is required")
        at_least("count", 1)
        if (
            "start" in options
            and "stop" in options
            and options.get("count", 41) > 1
            and not options["start"] < options["stop"]
        ):
            problems.append(
                f"key 'start': must be < 'stop', got {options['start']} "
                f"and {options['stop']}"
            )
    elif command == "entangle":
        nonnegative("mean_photons")
    elif command == "parity":
        positive("gamma_start")
        positive("gamma_stop")
        at_least("gamma_count", 1)
        if (
            "gamma_start" in options
            and "gamma_stop" in options
            and options["gamma_stop"] < options["gamma_start"]
        ):
            problems.append(
                "key 'gamma_stop': must be >= 'gamma_start', got "
                f"{options['gamma_stop']} and {options['gamma_start']}"
            )
    elif command == "bell":
        nonnegative("mean_photons")
        at_least("samples", 0)
        if "state" in options and options["state"] not in BELL_LABELS:
            problems.append(
                f"key 'state': must be one of {', '.join(BELL_LABELS)}, "
                f"got {options['state']!r}"
            )
    elif command == "tradeoff":
        nonnegative("nbar_start")
        nonnegative("nbar_stop")
        at_least("nbar_count", 1)
        if (
            "nbar_start" in options
            and "nbar_stop" in options
            and options["nbar_stop"] < options["nbar_start"]
        ):
            problems.append(
                "key 'nbar_stop': must be >= 'nbar_start', got "
                f"{options['nbar_stop']} and {options['nbar_start']}"
            )
    elif command == "diagnostics":
        if "eta" in options and not 0.0 < options["eta"] <= 1.0:
            problems.append(f"key 'eta': must be in (0, 1], got {options['eta']}")

    return problems


# ============================================================== results ==


@dataclass(frozen=True)
class ResultTable:
    """Tabular command output: column names, rows, and a metadata mapping."""

    metadata: dict
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_result_table(table: ResultTable, path: str, fmt: str) -> None:
    """Write a result table as CSV (with a metadata comment line) or JSON."""
    meta = json.dumps(table.metadata, sort_keys=True)
    if fmt == "csv":
        buffer = io.StringIO()
        buffer.write(f"# metadata: {meta}\n")
        writer = _csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(v) for v in row])
        payload = buffer.getvalue()
    elif fmt == "json":
        payload = (
            json.dumps(
                {
                    "metadata": table.metadata,
                    "columns": list(table.columns),
                    "rows": [list(row) for row in table.rows],
                },
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(payload)


def read_result_table(path: str) -> ResultTable:
    """Load a table written by ``write_result_table`` (either format)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        text = f.read()
    if text.startswith("# metadata:"):
        lines = text.splitlines()
        metadata = json.loads(lines[0].split(":", 1)[1])
        reader = _csv.reader(lines[1:])
        columns = tuple(next(reader))
        rows = []
        for record in reader:
            parsed = []
            for cell in record:
                if cell == "":
                    parsed.append(None)
                else:
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        parsed.append(cell)
            rows.append(tuple(parsed))
        return ResultTable(metadata=metadata, columns=columns, rows=tuple(rows))
    payload = json.loads(text)
    return ResultTable(
        metadata=payload["metadata"],
        columns=tuple(payload["columns"]),
        rows=tuple(tuple(row) for row in payload["rows"]),
    )


# ============================================================= handlers ==


def _params_from(options: Mapping, suffix: str = "") -> SystemParams:
    values = {}
    for name in _PARAM_KEYS:
        if suffix and f"{name}{suffix}" in options:
            values[name] = options[f"{name}{suffix}"]
        elif name in options:
            values[name] = options[name]
        else:
            values[name] = _PARAM_DEFAULTS[name]
    return SystemParams(
        gamma=values["gamma"] * THZ,
        g=values["g"] * THZ,
        tau=values["tau"] * THZ,
        kappa=values["kappa"] * THZ,
        delta=values["delta"] * THZ,
        omega0=values["omega0"] * THZ,
    )


def _params_meta(params: SystemParams) -> dict:
    return {
        "gamma_thz": params.gamma / THZ,
        "g_thz": params.g / THZ,
        "tau_thz": params.tau / THZ,
        "kappa_thz": params.kappa / THZ,
        "delta_thz": params.delta / THZ,
        "omega0_thz": params.omega0 / THZ,
    }


def _probe_from(options: Mapping) -> ProbeDetuning:
    return ProbeDetuning(options.get("delta_omega", 0.0) * THZ)


Handler = Callable[[dict, "argparse.Namespace"], tuple[ResultTable, list[LineSeries] | None]]


def _run_spectrum(options, args):
    params = _params_from(options)
    points = options.get("points", 2001)
    if "start" in options:
        grid = DetuningGrid(options["start"] * THZ, options["stop"] * THZ, points)
    else:
        grid = DetuningGrid.default(params, span=options.get("span", 3.0), count=points)
    series = transmission_spectrum(params, grid)
    arrays = scattering_arrays(params, grid.points())
    x_thz = grid.points() / THZ
    loss_kappa = params.kappa * np.abs(arrays.b_amp) ** 2
    loss_tau = params.tau * np.abs(arrays.sigma_amp) ** 2

    peak_meta = None
    try:
        peak = locate_transparency_peak(series)
        peak_meta = {
            "detuning_thz": peak.peak_detuning / THZ,
            "through_power": peak.peak_value,
            "fwhm_thz": peak.fwhm / THZ,
        }
    except NoPeak:
        pass

    metadata = {
        "command": "spectrum",
        "params": _params_meta(params),
        "grid": {"start_thz": x_thz[0], "stop_thz": x_thz[-1], "count": grid.count},
        "peak": peak_meta,
    }
    columns = ("delta_omega_thz", "through", "drop", "loss_kappa", "loss_tau")
    rows = tuple(
        (float(x_thz[i]), float(series.through[i]), float(series.drop[i]),
         float(loss_kappa[i]), float(loss_tau[i]))
        for i in range(grid.count)
    )
    plot = [
        LineSeries("through", x_thz.tolist(), series.through.tolist()),
        LineSeries("drop", x_thz.tolist(), series.drop.tolist()),
    ]
    return ResultTable(metadata, columns, rows), plot


def _run_sweep(options, args):
    params = _params_from(options)
    probe = _probe_from(options)
    count = options.get("count", 41)
    values_thz = np.linspace(options["start"], options["stop"], count)
    table = parameter_sweep(params, options["axis"], values_thz * THZ, probe)
    metadata = {
        "command": "sweep",
        "axis": options["axis"],
        "params": _params_meta(params),
        "probe_delta_omega_thz": probe.delta_omega / THZ,
    }
    columns = ("value_thz", "through", "drop", "loss_kappa", "loss_tau", "error")
    rows = []
    xs, ys = [], []
    for row in table.rows:
        v = row.value / THZ
        if row.budget is None:
            rows.append((float(v), None, None, None, None, row.error))
        else:
            b = row.budget
            rows.append(
                (float(v), b.through, b.drop, b.cavity_loss, b.dipole_loss, "")
            )
            xs.append(float(v))
            ys.append(b.through)
    plot = [LineSeries("through", xs, ys)] if xs else None
    return ResultTable(metadata, columns, tuple(rows)), plot


def _run_entangle(options, args):
    node_a = _params_from(options)
    node_b = _params_from(options, suffix="_b")
    probe = _probe_from(options)
    nbar = options.get("mean_photons", 0.05)
    result = entanglement_generation(node_a, node_b, probe, nbar)
    metadata = {
        "command": "entangle",
        "params_a": _params_meta(node_a),
        "params_b": _params_meta(node_b),
        "probe_delta_omega_thz": probe.delta_omega / THZ,
        "post_state": [[a.real, a.imag] for a in result.post_state.amplitudes],
    }
    columns = ("mean_photons", "herald_probability", "fidelity_to_singlet")
    rows = ((float(nbar), result.success_probability, result.fidelity),)
    return ResultTable(metadata, columns, rows), None


def _run_parity(options, args):
    node_a = _params_from(options)
    node_b = _params_from(options, suffix="_b")
    probe = _probe_from(options)
    start = options.get("gamma_start", 0.5)
    stop = options.get("gamma_stop", 8.0)
    count = options.get("gamma_count", 50)
    gammas = np.linspace(start, stop, count)
    rows = []
    for value in gammas:
        a = replace(node_a, gamma=float(value) * THZ)
        b = replace(node_b, gamma=float(value) * THZ)
        rows.append((float(value), false_even_probability(a, b, probe)))

    # single-point interrogation detail at the configured parameters
    probed = parity_probe(
        node_a, node_b, TwoDipoleState.bell("psi_plus"), probe, mean_photons=1.0
    )
    metadata = {
        "command": "parity",
        "params_a": _params_meta(node_a),
        "params_b": _params_meta(node_b),
        "probe_delta_omega_thz": probe.delta_omega / THZ,
        "state": "psi_plus",
        "mean_photons": 1.0,
        "at_configured_gamma": {
            "even_flux": probed.even_flux,
            "odd_flux": probed.odd_flux,
            "outcome_probabilities": dict(probed.outcome_probabilities),
        },
    }
    columns = ("gamma_thz", "false_even_probability")
    plot = [
        LineSeries(
            "false even", [r[0] for r in rows], [r[1] for r in rows]
        )
    ]
    return ResultTable(metadata, columns, tuple(rows)), plot


def _run_bell(options, args):
    node_a = _params_from(options)
    node_b = _params_from(options, suffix="_b")
    probe = _probe_from(options)
    nbar = options.get("mean_photons", 1.0)
    metadata = {
        "command": "bell",
        "params_a": _params_meta(node_a),
        "params_b": _params_meta(node_b),
        "probe_delta_omega_thz": probe.delta_omega / THZ,
        "mean_photons": nbar,
    }

    if "state" in options:
        label = options["state"]
        record = bell_measurement(
            node_a, node_b, TwoDipoleState.bell(label), probe, nbar
        )
        samples = options.get("samples", 0)
        metadata["input_state"] = label
        metadata["reported_outcome"] = record.outcome.label
        metadata["fidelity"] = record.result.fidelity
        if samples > 0:
            seed = args.seed if args.seed is not None else 0
            metadata["samples"] = samples
            metadata["seed"] = seed
            rng = np.random.default_rng(seed)
            probs = np.array([p for _, p in record.distribution])
            draws = rng.choice(len(probs), size=samples, p=probs / probs.sum())
            counts = np.bincount(draws, minlength=len(probs))
            columns = (
                "outcome", "first_parity", "second_parity",
                "probability", "count", "frequency",
            )
            rows = tuple(
                (o.label, o.first_parity, o.second_parity, float(p),
                 int(counts[i]), counts[i] / samples)
                for i, (o, p) in enumerate(record.distribution)
            )
        else:
            columns = ("outcome", "first_parity", "second_parity", "probability")
            rows = tuple(
                (o.label, o.first_parity, o.second_parity, float(p))
                for o, p in record.distribution
            )
        return ResultTable(metadata, columns, rows), None

    # no input given: classify each Bell state and report the verdicts
    columns = (
        "input_state", "outcome", "first_parity", "second_parity",
        "probability", "fidelity",
    )
    rows = []
    for label in BELL_LABELS:
        record = bell_measurement(
            node_a, node_b, TwoDipoleState.bell(label), probe, nbar
        )
        rows.append(
            (
                label,
                record.outcome.label,
                record.outcome.first_parity,
                record.outcome.second_parity,
                record.result.success_probability,
                record.result.fidelity,
            )
        )
    return ResultTable(metadata, columns, tuple(rows)), None


def _run_tradeoff(options, args):
    node_a = _params_from(options)
    node_b = _params_from(options, suffix="_b")
    probe = _probe_from(options)
    grid = np.linspace(
        options.get("nbar_start", 0.0),
        options.get("nbar_stop", 5.0),
        options.get("nbar_count", 21),
    )
    table = fidelity_success_tradeoff(node_a, node_b, probe, grid)
    metadata = {
        "command": "tradeoff",
        "params_a": _params_meta(node_a),
        "params_b": _params_meta(node_b),
        "probe_delta_omega_thz": probe.delta_omega / THZ,
        "state": "phi_plus",
    }
    columns = ("mean_photons", "fidelity", "success_probability")
    rows = tuple(
        (p.mean_photons, p.fidelity, p.success_probability) for p in table.points
    )
    plot = [
        LineSeries("fidelity", [r[0] for r in rows], [r[1] for r in rows]),
        LineSeries("success", [r[0] for r in rows], [r[2] for r in rows]),
    ]
    return ResultTable(metadata, columns, rows), plot


def _run_diagnostics(options, args):
    params = _params_from(options)
    eta = options.get("eta", 0.01)
    report = diagnostics(params, eta=eta)
    arrays = scattering_arrays(params, np.array([params.delta]))
    transparency = float(np.abs(arrays.t_through[0]) ** 2)
    metadata = {
        "command": "diagnostics",
        "params": _params_meta(params),
        "eta": eta,
        "quality_factor": params.quality_factor,
    }
    columns = (
        "purcell",
        "critical_atom_number",
        "critical_photon_number",
        "max_safe_flux_per_s",
        "transparency_at_dipole",
    )
    rows = (
        (
            report.purcell,
            report.critical_atom,
            report.critical_photon,
            report.max_safe_flux,
            transparency,
        ),
    )
    return ResultTable(metadata, columns, rows), None


_HANDLERS: dict[str, Handler] = {
    "spectrum": _run_spectrum,
    "sweep": _run_sweep,
    "entangle": _run_entangle,
    "parity": _run_parity,
    "bell": _run_bell,
    "tradeoff": _run_tradeoff,
    "diagnostics": _run_diagnostics,
}

_PLOT_LABELS = {
    "spectrum": ("detuning (THz)", "output power fraction"),
    "sweep": ("value (THz)", "output power fraction"),
    "parity": ("linewidth gamma (THz)", "false even probability"),
    "tradeoff": ("mean photon number", "probability"),
}


def run(command: str, options: dict, args) -> tuple[ResultTable, list[LineSeries] | None]:
    """Execute one validated command; returns the table and plot series."""
    return _HANDLERS[command](options, args)


def _seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ditsim",
        description="Dipole-induced transparency: spectra and repeater protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, help=f"run the {command} calculation")
        p.add_argument("--config", required=True, help="flat key: value config file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument(
            "--format", choices=("csv", "json"), default="csv",
            help="table format (default: csv)",
        )
        p.add_argument(
            "--plot", action="store_true", help="also write an SVG plot if available"
        )
        p.add_argument(
            "--seed", type=_seed_value, default=None,
            help="RNG seed for sampled outputs (default: 0)",
        )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        options = _coerce(args.command, load_config(args.config))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(
            f"error: invalid configuration ({len(exc.problems)} "
            f"problem{'s' if len(exc.problems) != 1 else ''})",
            file=sys.stderr,
        )
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2

    try:
        table, plot = run(args.command, options, args)
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{args.command}.{args.format}")
    write_result_table(table, out_path, args.format)
    print(out_path)
    if args.plot and plot is not None:
        xlabel, ylabel = _PLOT_LABELS.get(args.command, ("", ""))
        svg = render_lines(plot, title=args.command, xlabel=xlabel, ylabel=ylabel)
        svg_path = os.path.join(args.out, f"{args.command}.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as f:
            f.write(svg)
        print(svg_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
