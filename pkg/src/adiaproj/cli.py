"""Command-line experiment orchestration.

Configs are INI files with one section per concern::

    [experiment]
    name = fig4
    workers = 1

    [model]
    kind = aho
    n_qubits = 6
    lambda = 2.0

    [schedule]
    t_run = 94.2477796076938

    [evolution]
    dt = 5e-5

    [sweep]
    parameter = lambda
    values = 0.5, 1.0, 1.5, 2.0

    [output]
    directory = out
    formats = csv, json

Every key is optional; each experiment fills in its published defaults
(see ``adiaproj list-experiments``).  ``--set section.key=value`` flags
override file values.  Exit codes: 0 success, 1 run error (outputs
written so far are kept with a ``.partial`` suffix), 2 validation
failure.  ``ADIAPROJ_WORKERS`` overrides the configured worker count.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import _experiments
from .evolve import RK4_STABILITY_LIMIT, EvolutionConfig
from .models import ModelKind, ModelSpec, ObservableKind, ObservableSpec, assemble
from .schedule import Schedule, ScheduleShape

_SECTIONS = {
    "experiment": {"name", "workers", "readout"},
    "model": {
        "kind", "n_qubits", "lambda", "g", "delta", "e_c",
        "alpha", "observable", "observable_index",
    },
    "schedule": {"t_run", "shape", "steepness", "midpoint_fraction"},
    "evolution": {"dt", "sample_stride", "record_amplitudes"},
    "sweep": {"parameter", "values"},
    "output": {"directory", "formats", "emit_plot_script"},
}

# Accepted sweep parameters and the ModelSpec field each one names.
_SWEEP_FIELDS = {"lambda": "lam", "g": "g", "delta": "delta", "e_c": "e_c"}


@dataclass
class ExperimentConfig:
    """Parsed but unresolved experiment description.

    Raw section dictionaries keep exactly what the user wrote; each
    experiment resolves them against its own defaults at run time.
    """

    experiment: str = ""
    workers: int = 1
    readout: bool | None = None
    model: dict[str, str] = field(default_factory=dict)
    schedule: dict[str, str] = field(default_factory=dict)
    evolution: dict[str, str] = field(default_factory=dict)
    sweep: dict[str, str] = field(default_factory=dict)
    output: dict[str, str] = field(default_factory=dict)
    unknown: list[str] = field(default_factory=list)

    # ------------------------------------------------------- resolution

    def model_spec(self, defaults: ModelSpec) -> ModelSpec:
        """Defaults overridden by whatever [model] keys are present."""
        m = self.model
        kind = ModelKind(m["kind"]) if "kind" in m else defaults.kind
        kw = {
            "kind": kind,
            "n_qubits": int(m.get("n_qubits", defaults.n_qubits)),
            "e_c": float(m.get("e_c", defaults.e_c)),
            "alpha": float(m.get("alpha", defaults.alpha)),
        }
        if kind in (ModelKind.DHO, ModelKind.AHO):
            base = defaults.lam if defaults.kind == kind else 0.0
            kw["lam"] = float(m.get("lambda", base if base is not None else 0.0))
        else:
            kw["g"] = float(m.get("g", defaults.g if defaults.g is not None else -1.0))
            kw["delta"] = float(
                m.get("delta", defaults.delta if defaults.delta is not None else 10.0 / 64.0)
            )
        obs = defaults.observable
        if "observable" in m:
            okind = ObservableKind(m["observable"])
            idx = int(m["observable_index"]) if "observable_index" in m else None
            obs = ObservableSpec(okind, idx)
        kw["observable"] = obs
        return ModelSpec(**kw)

    def schedule_obj(self, default_t_run: float) -> Schedule:
        s = self.schedule
        return Schedule(
            t_run=float(s.get("t_run", default_t_run)),
            shape=ScheduleShape(s.get("shape", "tanh")),
            steepness=float(s.get("steepness", 20.0)),
            midpoint_fraction=float(s.get("midpoint_fraction", 0.5)),
        )

    def evolution_config(self, default_dt: float, record: bool = False) -> EvolutionConfig:
        e = self.evolution
        return EvolutionConfig(
            dt=float(e.get("dt", default_dt)),
            sample_stride=int(e.get("sample_stride", 0)),
            record_amplitudes=_parse_bool(e.get("record_amplitudes", str(record))),
        )

    def sweep_values(self) -> tuple[str, list[float]] | None:
        if not self.sweep:
            return None
        param = self.sweep.get("parameter", "")
        raw = self.sweep.get("values", "")
        values = [float(v) for v in raw.replace(",", " ").split()]
        return param, values

    def output_directory(self) -> str:
        return self.output.get("directory", "out")

    def output_formats(self) -> set[str]:
        raw = self.output.get("formats", "csv")
        return {f.strip() for f in raw.replace(",", " ").split() if f.strip()}

    def emit_plot_script(self) -> bool:
        return _parse_bool(self.output.get("emit_plot_script", "false"))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(path: str, overrides: list[str] | None = None) -> ExperimentConfig:
    """Read an INI config and apply --set section.key=value overrides."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)

    cfg = ExperimentConfig()
    for section in parser.sections():
        sec = section.lower()
        known = _SECTIONS.get(sec)
        if known is None:
            cfg.unknown.append(f"unknown section [{section}]")
            continue
        for key, value in parser.items(sec):
            if key not in known:
                cfg.unknown.append(f"unknown key '{key}' in [{section}]")
                continue
            _assign(cfg, sec, key, value)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        sec, key = target.split(".", 1)
        sec = sec.strip().lower()
        key = key.strip().lower()
        if sec not in _SECTIONS:
            cfg.unknown.append(f"unknown section [{sec}] in --set {item!r}")
            continue
        if key not in _SECTIONS[sec]:
            cfg.unknown.append(f"unknown key '{key}' in --set {item!r}")
            continue
        _assign(cfg, sec, key, value.strip())
    return cfg


def _assign(cfg: ExperimentConfig, sec: str, key: str, value: str) -> None:
    if sec == "experiment":
        if key == "name":
            cfg.experiment = value.strip()
        elif key == "workers":
            cfg.workers = int(value)
        elif key == "readout":
            cfg.readout = _parse_bool(value)
    else:
        getattr(cfg, sec)[key] = value.strip()


def validate(config: ExperimentConfig) -> list[str]:
    """All violations found in a config, without executing anything."""
    diags = list(config.unknown)
    name = config.experiment
    if not name:
        diags.append("missing [experiment] name")
        return diags
    if name not in _experiments.EXPERIMENTS:
        known = ", ".join(sorted(_experiments.EXPERIMENTS))
        diags.append(f"unknown experiment '{name}' (known: {known})")
        return diags
    entry = _experiments.EXPERIMENTS[name]

    spec = None
    try:
        spec = config.model_spec(entry.default_model)
    except (ValueError, KeyError) as exc:
        diags.append(f"model: {exc}")
    try:
        config.schedule_obj(entry.default_t_run)
    except ValueError as exc:
        diags.append(f"schedule: {exc}")
    evo = None
    try:
        evo = config.evolution_config(entry.default_dt)
    except ValueError as exc:
        diags.append(f"evolution: {exc}")

    if spec is not None and evo is not None:
        bound = assemble(spec, 1.0).gershgorin_bound()
        if evo.dt * bound >= RK4_STABILITY_LIMIT:
            diags.append(
                f"stability: dt * Gershgorin({bound:.4g}) = {evo.dt * bound:.3g} >= "
                f"{RK4_STABILITY_LIMIT}; the integrator would reject this step size"
            )

    sweep = None
    try:
        sweep = config.sweep_values()
    except ValueError as exc:
        diags.append(f"sweep: {exc}")
    if sweep is not None:
        param, values = sweep
        if not entry.sweepable:
            diags.append(f"experiment '{name}' does not take a sweep")
        elif param not in _SWEEP_FIELDS:
            accepted = ", ".join(sorted(_SWEEP_FIELDS))
            diags.append(f"sweep parameter '{param}' not recognised (accepted: {accepted})")
        elif spec is not None:
            field_name = _SWEEP_FIELDS[param]
            if getattr(spec, field_name, None) is None:
                diags.append(f"sweep: parameter not in model (no '{param}' on {spec.kind.value})")
        if not values:
            diags.append("sweep: values list is empty")
        elif sorted(values) != values:
            diags.append("sweep: values must be sorted ascending")
        if (
            spec is not None
            and param in _SWEEP_FIELDS
            and values
            and getattr(spec, _SWEEP_FIELDS[param], None) is not None
        ):
            for v in values:
                try:
                    probe = replace(spec, **{_SWEEP_FIELDS[param]: v})
                except ValueError as exc:
                    diags.append(f"sweep value {v:g}: {exc}")
                    continue
                if evo is not None:
                    bound = assemble(probe, 1.0).gershgorin_bound()
                    if evo.dt * bound >= RK4_STABILITY_LIMIT:
                        diags.append(
                            f"sweep value {v:g}: dt * Gershgorin = "
                            f"{evo.dt * bound:.3g} >= {RK4_STABILITY_LIMIT}"
                        )

    fmts = config.output_formats()
    bad = fmts - {"csv", "json"}
    if bad:
        diags.append(f"output: unknown formats {sorted(bad)} (choose from csv, json)")
    outdir = config.output_directory()
    probe_dir = outdir if os.path.isdir(outdir) else (os.path.dirname(outdir) or ".")
    if os.path.exists(probe_dir) and not os.access(probe_dir, os.W_OK):
        diags.append(f"output: directory {outdir!r} is not writable")
    if config.workers < 1:
        diags.append(f"workers must be >= 1, got {config.workers}")
    return diags


def run(config: ExperimentConfig) -> int:
    """Validate, execute, and write outputs.  Returns a process exit code."""
    diags = validate(config)
    if diags:
        for d in diags:
            print(f"config error: {d}", file=sys.stderr)
        return 2
    workers = config.workers
    env = os.environ.get("ADIAPROJ_WORKERS")
    if env:
        try:
            workers = max(1, int(env))
        except ValueError:
            print(f"ignoring non-integer ADIAPROJ_WORKERS={env!r}", file=sys.stderr)
    try:
        written = _experiments.execute(config, workers)
    except _experiments.ExperimentError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        for p in exc.partial_files:
            print(f"partial output kept: {p}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="adiaproj",
        description="Adiabatic ground-state projection experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to INI config file")
    p_run.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="SECTION.KEY=VALUE", help="override one config value",
    )

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="path to INI config file")
    p_val.add_argument(
        "--set", dest="overrides", action="append", default=[],
        metavar="SECTION.KEY=VALUE", help="override one config value",
    )

    sub.add_parser("list-experiments", help="show available experiments")

    args = parser.parse_args(argv)
    if args.command == "list-experiments":
        for name in sorted(_experiments.EXPERIMENTS):
            entry = _experiments.EXPERIMENTS[name]
            print(f"{name:14s} {entry.description}")
        return 0

    try:
        config = parse_config(args.config, args.overrides)
    except (OSError, ValueError, configparser.Error) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        diags = validate(config)
        if not diags:
            print("ok")
            return 0
        for d in diags:
            print(d)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
