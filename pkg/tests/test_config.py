"""Config parsing, overrides, and pre-run validation diagnostics."""

import numpy as np
import pytest

from adiaproj.cli import ExperimentConfig, parse_config, validate


def write_config(tmp_path, text):
    p = tmp_path / "exp.ini"
    p.write_text(text, encoding="utf-8")
    return str(p)


BASE = """
[experiment]
name = dho-energy
workers = 2

[model]
kind = dho
n_qubits = 4
lambda = 1.25

[schedule]
t_run = 40.0
steepness = 22

[evolution]
dt = 2e-4

[output]
directory = outdir
formats = csv, json
"""


def test_parse_round_trip(tmp_path):
    cfg = parse_config(write_config(tmp_path, BASE))
    assert cfg.experiment == "dho-energy"
    assert cfg.workers == 2
    assert cfg.model["lambda"] == "1.25"
    assert cfg.schedule["steepness"] == "22"
    assert cfg.evolution["dt"] == "2e-4"
    assert cfg.output_formats() == {"csv", "json"}
    assert cfg.output_directory() == "outdir"
    assert not cfg.unknown
    assert validate(cfg) == []


def test_resolution_against_defaults(tmp_path):
    from adiaproj._experiments import EXPERIMENTS

    cfg = parse_config(write_config(tmp_path, BASE))
    entry = EXPERIMENTS["dho-energy"]
    spec = cfg.model_spec(entry.default_model)
    assert spec.lam == 1.25
    assert spec.e_c == entry.default_model.e_c  # default kept where unset
    sched = cfg.schedule_obj(entry.default_t_run)
    assert sched.t_run == 40.0
    assert sched.steepness == 22.0
    evo = cfg.evolution_config(entry.default_dt)
    assert evo.dt == 2e-4


def test_set_overrides(tmp_path):
    path = write_config(tmp_path, BASE)
    cfg = parse_config(path, ["model.lambda=2.0", "experiment.workers = 4"])
    assert cfg.model["lambda"] == "2.0"
    assert cfg.workers == 4
    with pytest.raises(ValueError, match="section.key=value"):
        parse_config(path, ["lambda=2.0"])


def test_unknown_sections_and_keys_are_diagnosed(tmp_path):
    text = BASE + "\n[plotting]\ncolor = red\n"
    cfg = parse_config(write_config(tmp_path, text), ["model.mass=5"])
    diags = validate(cfg)
    assert any("unknown section [plotting]" in d for d in diags)
    assert any("unknown key 'mass'" in d for d in diags)


def test_missing_and_unknown_experiment_name(tmp_path):
    cfg = parse_config(write_config(tmp_path, "[model]\nkind = dho\n"))
    assert any("missing [experiment] name" in d for d in validate(cfg))
    cfg2 = parse_config(write_config(tmp_path, "[experiment]\nname = fig9\n"))
    assert any("unknown experiment 'fig9'" in d for d in validate(cfg2))


def test_negative_quartic_coupling_diagnosed(tmp_path):
    text = "[experiment]\nname = aho-energy\n[model]\nkind = aho\nlambda = -1\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("lam >= 0" in d for d in diags)


def test_sweep_parameter_must_exist_on_model(tmp_path):
    text = (
        "[experiment]\nname = psm-spectrum\n[model]\nkind = psm\n"
        "[sweep]\nparameter = lambda\nvalues = 0.5, 1.0\n"
    )
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("parameter not in model" in d for d in diags)


def test_unstable_step_size_diagnosed(tmp_path):
    text = "[experiment]\nname = aho-energy\n[evolution]\ndt = 0.1\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("stability" in d for d in diags)


def test_sweep_rules(tmp_path):
    # fig1 takes no sweep at all
    text = "[experiment]\nname = fig1\n[sweep]\nparameter = lambda\nvalues = 1\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("does not take a sweep" in d for d in diags)

    text = "[experiment]\nname = dho-energy\n[sweep]\nparameter = mass\nvalues = 1\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("not recognised" in d for d in diags)

    text = "[experiment]\nname = dho-energy\n[sweep]\nparameter = lambda\nvalues =\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("values list is empty" in d for d in diags)

    text = "[experiment]\nname = dho-energy\n[sweep]\nparameter = lambda\nvalues = 2, 1\n"
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("sorted ascending" in d for d in diags)

    # a sweep value can individually break the stability bound
    text = (
        "[experiment]\nname = dho-energy\n[evolution]\ndt = 5e-2\n"
        "[sweep]\nparameter = lambda\nvalues = 1, 40\n"
    )
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any(d.startswith("sweep value 40") for d in diags)


def test_output_and_worker_diagnostics(tmp_path):
    text = BASE.replace("formats = csv, json", "formats = csv, xml")
    diags = validate(parse_config(write_config(tmp_path, text)))
    assert any("unknown formats" in d for d in diags)

    cfg = parse_config(write_config(tmp_path, BASE))
    cfg.workers = 0
    assert any("workers must be >= 1" in d for d in validate(cfg))


def test_sweep_values_parse_commas_and_whitespace():
    cfg = ExperimentConfig(sweep={"parameter": "lambda", "values": "0.5, 1.0  1.5"})
    param, values = cfg.sweep_values()
    assert param == "lambda"
    np.testing.assert_allclose(values, [0.5, 1.0, 1.5])
    assert ExperimentConfig().sweep_values() is None


def test_inline_comments_are_stripped(tmp_path):
    text = "[experiment]\nname = dho-energy  # the default pipeline\n"
    cfg = parse_config(write_config(tmp_path, text))
    assert cfg.experiment == "dho-energy"
