"""Command-line entry point.

Subcommands
-----------
generate   build a lattice and write its JSON document
run        full pipeline: sweep, pulse train, arrivals (plus variants)
oracle     path enumeration: per-path rows and solver-comparable peaks
compare    match a solver arrival CSV against an oracle peak CSV

Run configuration is a JSON object with the top-level keys

    dimension, seed, samplers, overrides, drive, assess, sweep,
    variant, output, emit_plot, peaks, oracle

resolved from (lowest to highest precedence) built-in defaults, a
``--preset`` name, a ``--config`` file, then command-line flags.  The
presets ``paper-1d`` .. ``paper-4d`` pin the published scenario values
(drive at 0.2, assess at 0.7 on edge 1, loss factor 0.003, and the
square's connector impedances 1.7 / 1.8).

CSV files use a header row, dot decimal separator and newline-terminated
records; floats are written with shortest round-trip formatting, so
identical configurations produce byte-identical outputs.  Exit codes:
0 success, 1 comparison failure, 2 configuration error, 3 numerical
error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__
from .compare import match_arrivals
from .errors import ConfigurationError, NumericalError
from .experiments import (
    VARIANT_EXCESS,
    VARIANT_IN_VITRO,
    VARIANT_IN_VIVO,
    VARIANT_TOTAL,
    VARIANTS,
    Scenario,
    canonical_scenario,
    run_scenario,
)
from .fdsolver import AssessSpec, DriveSpec
from .lattice import UniformSampler, to_document, validate
from .oracle import flatten_paths, predicted_arrivals
from .plotting import time_response_svg
from .tdtransform import Arrival, SweepConfig, envelope

OUTPUT_ROOT_ENV = "HYPERLATTICE_OUT"

DEFAULT_CONFIG: dict = {
    "dimension": 1,
    "seed": 0,
    "samplers": {
        "length": [0.7, 1.3],
        "impedance": [0.7, 1.3],
        "loss_factor": 0.003,
    },
    "overrides": {},
    "drive": {"edge": 1, "position": 0.2, "amplitude": 1.0},
    "assess": {"edge": 1, "position": 0.7},
    "sweep": {
        "delta_omega": 2.0 * math.pi / 10.0,
        "bins": 4096,
        "window": "raised_cosine",
    },
    "variant": VARIANT_TOTAL,
    "output": "run",
    "emit_plot": False,
    "peaks": {"relative_threshold": 1e-3},
    "oracle": {"t_max": None, "floor_rel": 1e-4, "threshold_rel": 5e-4},
}

PRESETS: dict[str, dict] = {
    "paper-1d": {"dimension": 1, "seed": 11, "output": "paper-1d"},
    "paper-2d": {
        "dimension": 2,
        "seed": 22,
        "overrides": {"2": {"density": 1.7}, "4": {"density": 1.8}},
        "output": "paper-2d",
    },
    "paper-3d": {"dimension": 3, "seed": 33, "output": "paper-3d"},
    "paper-4d": {"dimension": 4, "seed": 44, "output": "paper-4d"},
}


# ---------------------------------------------------------------------------
# Configuration handling


def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def resolve_config(args: argparse.Namespace) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigurationError(
                f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}"
            )
        _deep_update(config, copy.deepcopy(PRESETS[args.preset]))
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        _deep_update(config, loaded)
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "variant", None):
        config["variant"] = args.variant
    if getattr(args, "plot", False):
        config["emit_plot"] = True
    if getattr(args, "out", None):
        config["output"] = args.out
    return config


def _sampler(config: dict, name: str) -> UniformSampler:
    bounds = config["samplers"][name]
    try:
        low, high = float(bounds[0]), float(bounds[1])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigurationError(f"samplers.{name}: expected [low, high]") from exc
    try:
        return UniformSampler(low, high)
    except ConfigurationError as exc:
        raise ConfigurationError(f"samplers.{name}: {exc}") from exc


def _overrides(config: dict) -> dict[int, dict[str, float]]:
    out: dict[int, dict[str, float]] = {}
    for eid, fields in config.get("overrides", {}).items():
        try:
            out[int(eid)] = {str(k): float(v) for k, v in fields.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"overrides.{eid}: {exc}") from exc
    return out


def _sweep(config: dict) -> SweepConfig:
    sweep = config["sweep"]
    try:
        return SweepConfig(
            delta_omega=float(sweep["delta_omega"]),
            bins=int(sweep["bins"]),
            window=str(sweep["window"]),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"sweep: {exc}") from exc


def build_scenario(config: dict) -> Scenario:
    loss = float(config["samplers"].get("loss_factor", 0.003))
    scenario = canonical_scenario(
        int(config["dimension"]),
        int(config["seed"]),
        _overrides(config),
        sweep=_sweep(config),
        length_sampler=_sampler(config, "length"),
        impedance_sampler=_sampler(config, "impedance"),
        loss_factor=loss,
        peak_threshold=float(config["peaks"]["relative_threshold"]),
    )
    drive = config["drive"]
    assess = config["assess"]
    return replace(
        scenario,
        drive=DriveSpec(
            edge=int(drive["edge"]),
            position=float(drive["position"]),
            amplitude=float(drive.get("amplitude", 1.0)),
        ),
        assess=AssessSpec(edge=int(assess["edge"]), position=float(assess["position"])),
    )


# ---------------------------------------------------------------------------
# Output helpers


def output_dir(config: dict) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV, ".")
    path = Path(config["output"])
    if not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def read_arrivals_csv(path: Path) -> list[Arrival]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith("time,amplitude"):
        raise ConfigurationError(f"{path} is not an arrivals CSV")
    arrivals = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        arrivals.append(
            Arrival(
                time=float(parts[0]),
                amplitude=float(parts[1]),
                prominence=float(parts[2]) if len(parts) > 2 else 0.0,
            )
        )
    return arrivals


def _arrival_rows(arrivals) -> list[tuple]:
    return [(a.time, a.amplitude, a.prominence) for a in arrivals]


def _write_result_files(out: Path, prefix: str, result) -> None:
    tag = f"{prefix}_" if prefix else ""
    response = result.response
    write_csv(
        out / f"{tag}frequency.csv",
        ["omega", "re", "im"],
        [
            (float(w), float(v.real), float(v.imag))
            for w, v in zip(response.omegas, response.values)
        ],
    )
    env = envelope(result.time_response)
    write_csv(
        out / f"{tag}time.csv",
        ["t", "value", "envelope"],
        [
            (float(t), float(v), float(e))
            for t, v, e in zip(
                result.time_response.t_grid, result.time_response.values, env
            )
        ],
    )
    write_csv(
        out / f"{tag}arrivals.csv",
        ["time", "amplitude", "prominence"],
        _arrival_rows(result.arrivals),
    )


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    scenario = build_scenario(config)
    problems = validate(scenario.lattice)
    if problems:
        raise ConfigurationError("; ".join(problems))
    out = output_dir(config)
    write_json(out / "lattice.json", to_document(scenario.lattice))
    write_json(out / "manifest.json", _manifest(config))
    print(out / "lattice.json")
    return 0


def _manifest(config: dict) -> dict:
    return {"package": "hyperlattice", "version": __version__, "config": config}


def cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    scenario = build_scenario(config)
    variant = config["variant"]
    if variant not in VARIANTS:
        raise ConfigurationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    wanted = (VARIANT_TOTAL,) if variant == VARIANT_TOTAL else (VARIANT_TOTAL, variant)
    results = run_scenario(scenario, wanted, jobs=args.jobs)

    out = output_dir(config)
    write_json(out / "manifest.json", _manifest(config))
    write_json(out / "lattice.json", to_document(scenario.lattice))
    _write_result_files(out, "", results[VARIANT_TOTAL])
    for name in (VARIANT_IN_VIVO, VARIANT_IN_VITRO, VARIANT_EXCESS):
        if name in results:
            _write_result_files(out, name, results[name])
            if results[name].lattice is not scenario.lattice:
                write_json(
                    out / f"{name}_lattice.json", to_document(results[name].lattice)
                )
    if config["emit_plot"]:
        total = results[VARIANT_TOTAL]
        svg = time_response_svg(total.time_response, total.arrivals, title="total")
        _atomic_write(out / "plot.svg", svg)
    print(out)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    scenario = build_scenario(config)
    opts = config["oracle"]
    t_max = opts.get("t_max")
    if args.t_max is not None:
        t_max = args.t_max
    floor_rel = float(opts.get("floor_rel", 1e-4))
    if args.floor is not None:
        floor_rel = args.floor
    peaks, merged, _ = predicted_arrivals(
        scenario.lattice,
        scenario.drive,
        scenario.assess,
        scenario.sweep,
        t_max=None if t_max is None else float(t_max),
        floor_rel=floor_rel,
        threshold_rel=float(opts.get("threshold_rel", 5e-4)),
    )
    out = output_dir(config)
    write_csv(
        out / "oracle_paths.csv",
        ["time", "amplitude", "n_reflections", "edge_sequence"],
        [
            (p.time, p.amplitude, p.n_reflections, ";".join(str(e) for e in p.edge_sequence))
            for p in flatten_paths(merged)
        ],
    )
    write_csv(
        out / "oracle_peaks.csv",
        ["time", "amplitude", "prominence"],
        _arrival_rows(peaks),
    )
    print(out / "oracle_peaks.csv")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    solver = read_arrivals_csv(Path(args.solver))
    oracle = read_arrivals_csv(Path(args.oracle))
    dt = args.dt
    if dt is None and args.manifest:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        sweep = manifest["config"]["sweep"]
        dt = SweepConfig(
            delta_omega=float(sweep["delta_omega"]),
            bins=int(sweep["bins"]),
            window=str(sweep["window"]),
        ).dt
    if dt is None:
        raise ConfigurationError("compare needs --dt or --manifest to fix tolerances")
    time_tol = args.time_tol if args.time_tol is not None else 2.0 * dt
    # Amplitude disagreements below the peak-detection scale are not
    # meaningful: peaks that small are themselves interference-limited.
    scale = max((abs(a.amplitude) for a in solver), default=0.0)
    report = match_arrivals(
        solver,
        oracle,
        time_tol,
        args.amp_tol,
        amplitude_floor=args.amp_floor_rel * scale,
    )
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperlattice",
        description="Pulse propagation in hypercube waveguide lattices",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--preset", help=f"one of {', '.join(sorted(PRESETS))}")
        p.add_argument("--out", help="output directory (under $HYPERLATTICE_OUT)")
        p.add_argument("--seed", type=int, help="override the lattice seed")

    p_gen = sub.add_parser("generate", help="generate and write a lattice document")
    common(p_gen)
    p_gen.set_defaults(func=cmd_generate)

    p_run = sub.add_parser("run", help="sweep, transform and extract arrivals")
    common(p_run)
    p_run.add_argument("--variant", choices=VARIANTS, help="additional variant to run")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel sweep chunks")
    p_run.add_argument("--plot", action="store_true", help="emit plot.svg")
    p_run.set_defaults(func=cmd_run)

    p_oracle = sub.add_parser("oracle", help="path-enumeration arrival prediction")
    common(p_oracle)
    p_oracle.add_argument("--t-max", type=float, dest="t_max", help="search horizon")
    p_oracle.add_argument(
        "--floor", type=float, help="relative amplitude floor for path pruning"
    )
    p_oracle.set_defaults(func=cmd_oracle)

    p_cmp = sub.add_parser("compare", help="match solver arrivals against oracle peaks")
    p_cmp.add_argument("solver", help="solver arrivals CSV")
    p_cmp.add_argument("oracle", help="oracle peaks CSV")
    p_cmp.add_argument("--dt", type=float, help="time step fixing the tolerances")
    p_cmp.add_argument("--manifest", help="manifest.json to read the sweep from")
    p_cmp.add_argument("--time-tol", type=float, dest="time_tol")
    p_cmp.add_argument("--amp-tol", type=float, dest="amp_tol", default=0.10)
    p_cmp.add_argument(
        "--amp-floor-rel",
        type=float,
        dest="amp_floor_rel",
        default=1e-3,
        help="absolute amplitude slack as a fraction of the largest solver peak",
    )
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
