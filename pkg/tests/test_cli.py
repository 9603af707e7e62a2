import json

import pytest

from multapprox.cli import ExperimentConfig, UsageError, build_parser, parse_and_dispatch, resolve_config
from multapprox.output import config_hash, header_line, render_csv, render_json


def run(tmp_path, *argv):
    code = parse_and_dispatch([*argv, "--out", str(tmp_path)])
    return code, {p.name: p.read_text() for p in sorted(tmp_path.iterdir())}


def load(files, name):
    return json.loads(files[name])


def test_exponent_examples(tmp_path):
    code, files = run(tmp_path, "exponent", "--kind", "tau", "--psi", "power:3")
    assert code == 0
    doc = load(files, "exponent.json")
    assert doc["value"] == 0.4 and doc["applicable"] is True
    for key in ("kind", "value", "lo", "hi", "method", "applicable"):
        assert key in doc
    assert files["exponent.csv"].splitlines()[1].startswith("kind,s,block")
    code, files = run(tmp_path, "exponent", "--kind", "tau", "--psi", "reciprocal")
    doc = load(files, "exponent.json")
    assert doc["value"] == pytest.approx(2 / 3, abs=1e-15)
    assert doc["applicable"] is False


def test_missing_required_flag_writes_nothing(tmp_path, capsys):
    code = parse_and_dispatch(["measure", "--out", str(tmp_path / "x")])
    assert code == 2
    assert not (tmp_path / "x").exists()
    assert "--q" in capsys.readouterr().err


def test_bad_flags_exit_2(tmp_path):
    assert parse_and_dispatch(["exponent", "--kind", "zeta"]) == 2
    assert parse_and_dispatch(["nonsense"]) == 2
    assert parse_and_dispatch(["exponent", "--psi", "cubic", "--out", str(tmp_path)]) == 2
    assert parse_and_dispatch(["measure", "--q", "3", "--psi", "power:0.5", "--out", str(tmp_path)]) == 2
    assert parse_and_dispatch(["bc-sum", "--threads", "0", "--out", str(tmp_path)]) == 2
    assert parse_and_dispatch(["exponent", "--seed", "-3"]) == 2
    assert list(tmp_path.iterdir()) == []


def test_verification_failure_exit_1(tmp_path):
    # one Fejer term is far too few for the point-mass identity
    code, files = run(tmp_path, "measure", "--q", "5", "--psi", "power:2", "--atom", "0.2,0.4", "--nmax", "1")
    assert code == 1
    assert load(files, "measure.json")["error"] > 1e-2


def test_budget_failure_exit_1(tmp_path):
    code, files = run(tmp_path, "counterexample", "--levels", "2", "--mode", "exact")
    assert code == 1 and files == {}


def test_every_artifact_has_header(tmp_path):
    code, files = run(tmp_path, "bc-sum", "--qmax", "500")
    assert code == 0
    assert set(files) == {"bc_sum.csv", "bc_sum.json", "bc_sum.svg"}
    chash = load(files, "bc_sum.json")["_meta"]["config_hash"]
    line = header_line(chash)
    assert files["bc_sum.csv"].splitlines()[0] == "# " + line
    assert line in files["bc_sum.svg"]
    meta = load(files, "bc_sum.json")["_meta"]
    assert meta["version"] == "0.1.0" and meta["config"]["command"] == "bc-sum"


def test_config_round_trip_and_unknown_keys():
    cfg = ExperimentConfig(command="lemma33", psi="power:3", qs=[4, 8], s=0.5, seed=3, threads=2, out="x")
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(UsageError):
        ExperimentConfig.from_dict({"command": "exponent", "colour": "red"})
    h = cfg.hashed_dict()
    assert "threads" not in h and "out" not in h


def test_config_file_and_flag_override(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"command": "exponent", "psi": "power:2", "kind": "lambda"}))
    out = tmp_path / "o"
    code = parse_and_dispatch(["exponent", "--config", str(conf), "--out", str(out)])
    assert code == 0
    assert json.loads((out / "exponent.json").read_text())["value"] == pytest.approx(1 / 3)
    code = parse_and_dispatch(["exponent", "--config", str(conf), "--kind", "d", "--out", str(out)])
    assert json.loads((out / "exponent.json").read_text())["value"] == pytest.approx(2 / 3)
    conf.write_text(json.dumps({"command": "boxdim"}))
    assert parse_and_dispatch(["exponent", "--config", str(conf), "--out", str(out)]) == 2
    conf.write_text("[1, 2]")
    assert parse_and_dispatch(["exponent", "--config", str(conf), "--out", str(out)]) == 2
    assert parse_and_dispatch(["exponent", "--config", str(tmp_path / "missing.json")]) == 2


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MULTAPPROX_OUT", str(tmp_path / "env"))
    args = build_parser().parse_args(["bc-sum"])
    assert resolve_config(args).out == str(tmp_path / "env")
    assert parse_and_dispatch(["bc-sum", "--qmax", "100"]) == 0
    assert (tmp_path / "env" / "bc_sum.csv").exists()


def test_subcommand_payloads(tmp_path):
    code, files = run(tmp_path, "cover-check", "--qs", "3,17", "--samples", "2000")
    assert code == 0 and load(files, "cover_check.json")["escaped"] == 0
    code, files = run(tmp_path, "coeffs", "--q", "4")
    doc = load(files, "coeffs.json")
    assert code == 0 and doc["max_ratio"] <= 16 and doc["nonzero_off_lattice"] == 0
    code, files = run(tmp_path, "lemma33", "--qs", "4,8,16")
    doc = load(files, "lemma33.json")
    assert code == 0 and doc["omega0_exact"] and doc["max_identity_error"] <= 1e-9
    code, files = run(tmp_path, "counterexample", "--samples", "200")
    doc = load(files, "counterexample.json")
    assert code == 0 and doc["levels"][0]["prime_count"] == 59
    assert doc["divergence"][0]["exceeds_one"] and doc["transfer"][0]["holds"]
    code, files = run(tmp_path, "boxdim", "--qmax", "256", "--resolutions", "16,32,64,128")
    assert code == 0 and 0 <= load(files, "boxdim.json")["slope"] <= 2
    code, files = run(tmp_path, "decay", "--q", "5", "--shells", "5", "--xi-budget", "32")
    assert code == 0 and load(files, "decay.json")["cells"] == 1
    code, files = run(tmp_path, "measure", "--q", "3", "--samples", "100000")
    assert code == 0 and abs(load(files, "measure.json")["z"]) <= 4
    assert parse_and_dispatch(["decay", "--q", "5", "--cells", "1-2", "--out", str(tmp_path)]) == 2


def test_rendering_is_canonical():
    chash = config_hash({"b": 1, "a": [1.5, 2]})
    assert chash == config_hash({"a": [1.5, 2], "b": 1})
    csv_text = render_csv(["x", "y"], [(0.1, "a,b")], chash)
    assert csv_text.splitlines()[2] == '0.1,"a,b"'
    assert render_json({"v": 1}, {}, chash) == render_json({"v": 1}, {}, chash)
