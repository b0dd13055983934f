import io
import json
import subprocess
import sys

import pytest

from fraclab import cli


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def base(tmp_path, command, out="out", **extra):
    cfg = {"command": command, "torus": {"dim": 1, "side_lengths": [1.0]}, "grid": {"points_per_axis": [128]},
           "output_dir": str(tmp_path / out), "seed": 0}
    cfg.update(extra)
    return cfg


@pytest.mark.parametrize("where", ["top", "kernel", "ac", "experiment", "torus"])
def test_unknown_keys_exit_2(tmp_path, where):
    cfg = base(tmp_path, "solve-ac")
    if where == "top":
        cfg["bogus"] = 1
    else:
        cfg.setdefault(where, {})["bogus"] = 1
    assert cli.run(write(tmp_path, cfg)) == cli.EXIT_CONFIG
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("patch", [{"command": "nope"}, {"kernel": {"s": 1.0}}, {"grid": {"points_per_axis": [127]}},
                                   {"experiment": {"p_range": [1, 2, 3]}}])
def test_invalid_values_exit_2(tmp_path, patch):
    cfg = base(tmp_path, "scaling")
    cfg.update(patch)
    assert cli.run(write(tmp_path, cfg)) == cli.EXIT_CONFIG


def test_missing_output_dir_and_bad_json(tmp_path):
    cfg = base(tmp_path, "seminorm")
    del cfg["output_dir"]
    assert cli.run(write(tmp_path, cfg)) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert cli.run(bad) == cli.EXIT_CONFIG


def test_dry_run_prints_resolved_plan(tmp_path):
    buf = io.StringIO()
    assert cli.run(write(tmp_path, base(tmp_path, "solve-ac")), dry_run=True, stream=buf) == 0
    plan = json.loads(buf.getvalue())
    assert plan["plan"] == "solve-ac"
    assert plan["resolved_config"]["ac"]["epsilon"] == 0.05
    assert not (tmp_path / "out").exists()


def test_seed_override(tmp_path):
    buf = io.StringIO()
    cli.run(write(tmp_path, base(tmp_path, "solve-ac")), seed=17, dry_run=True, stream=buf)
    assert json.loads(buf.getvalue())["resolved_config"]["seed"] == 17


def test_constant_field_has_zero_seminorm(tmp_path):
    cfg = base(tmp_path, "seminorm", experiment={"field": {"type": "constant", "value": 2.0}})
    assert cli.run(write(tmp_path, cfg), stream=io.StringIO()) == 0
    vals = json.loads((tmp_path / "out" / "seminorm.json").read_text())
    assert vals["spectral"] == 0 and vals["double_integral"] == 0
    assert abs(vals["extension"]) < 1e-20


def test_manifest_and_determinism(tmp_path):
    cfgs = [base(tmp_path, "solve-ac", out=o) for o in ("a", "b")]
    for i, c in enumerate(cfgs):
        assert cli.run(write(tmp_path, c, f"c{i}.json"), stream=io.StringIO()) == 0
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["status"] == "ok" and man["seed"] == 0
    assert set(man["versions"]) >= {"fraclab", "numpy", "scipy", "python"}
    assert "solution.json" in man["files"]
    for f in ("energy_history.csv", "fields/solution.bin"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_nonconvergence_exits_3(tmp_path):
    cfg = base(tmp_path, "solve-ac", ac={"max_iters": 2})
    assert cli.run(write(tmp_path, cfg), stream=io.StringIO()) == cli.EXIT_NUMERIC
    man = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert man["status"] == "numerical_failure"


def test_morse_command_matches_closed_form(tmp_path):
    cfg = base(tmp_path, "morse-index", experiment={"k_max": 30})
    assert cli.run(write(tmp_path, cfg), stream=io.StringIO()) == 0
    res = json.loads((tmp_path / "out" / "morse.json").read_text())
    assert res["index"] == res["closed_form"]


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, base(tmp_path, "layer1d", experiment={"n_points": 512}))
    r = subprocess.run([sys.executable, "-m", "fraclab", "--config", str(cfg)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "out" / "layer.csv").exists()
