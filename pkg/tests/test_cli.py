"""Command-line interface: exit codes, seed resolution, output plumbing,
determinism, and a smoke run of every scenario."""

from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from zkpoi import __version__, cli


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def config_file(tmp_path):
    def write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


@pytest.fixture(autouse=True)
def no_ambient_seed(monkeypatch):
    monkeypatch.delenv("ZKPOI_SEED", raising=False)


class TestArgparseSurface:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.strip() == f"zkpoi {__version__}"

    def test_unknown_group_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["astrology", "chart"])
        assert exc.value.code == 2

    def test_missing_verb_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["econ"])
        assert exc.value.code == 2

    def test_console_script_is_installed(self):
        proc = subprocess.run(["zkpoi", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.strip() == f"zkpoi {__version__}"


class TestSuccessPath:
    def test_csv_payload_on_stdout_manifest_on_stderr(self, capsys):
        code, out, err = run_cli(["econ", "ess"], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows == [{"candidate": "A", "is_ess": "true"}]
        manifest = json.loads(err)
        assert manifest["scenario"] == "econ.ess"
        assert manifest["seed"] == 0
        assert manifest["artifact_version"] == __version__
        assert set(manifest["outputs"]) == {"econ.ess.csv"}

    def test_json_format_flag(self, capsys):
        code, out, _ = run_cli(["econ", "ess", "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["scenario"] == "econ.ess"
        assert doc["columns"] == ["candidate", "is_ess"]
        assert doc["rows"][0]["is_ess"] is True
        assert doc["summary"]["is_ess"] is True

    def test_dump_defaults_to_json(self, capsys, config_file):
        cfg = config_file({"params": {"count": 2, "kdf_iterations": 4}})
        code, out, _ = run_cli(["registry", "dump", "--config", cfg], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["scenario"] == "registry.dump"
        assert doc["summary"]["identity_tags"] == 2

    def test_worked_anarchy_ratio_through_the_cli(self, capsys, config_file):
        cfg = config_file({"params": {"gamma": 0.1}})
        code, out, _ = run_cli(["econ", "poa", "--config", cfg], capsys)
        assert code == 0
        row = next(csv.DictReader(io.StringIO(out)))
        assert float(row["ratio"]) == pytest.approx(20.0, abs=1e-9)

    def test_out_writes_file_and_prints_manifest(self, capsys, tmp_path):
        target = tmp_path / "run.csv"
        code, out, err = run_cli(
            ["econ", "congestion", "--out", str(target)], capsys)
        assert code == 0
        assert err == ""
        manifest = json.loads(out)
        payload = target.read_bytes()
        import hashlib
        assert manifest["outputs"] == {
            "run.csv": hashlib.sha256(payload).hexdigest()}
        assert payload.startswith(b"puzzle,load,utility\n")


class TestSeedResolution:
    def test_default_seed_is_zero(self, capsys):
        _, _, err = run_cli(["econ", "ess"], capsys)
        assert json.loads(err)["seed"] == 0

    def test_config_seed(self, capsys, config_file):
        cfg = config_file({"seed": 9})
        _, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert json.loads(err)["seed"] == 9

    def test_env_overrides_config(self, capsys, config_file, monkeypatch):
        monkeypatch.setenv("ZKPOI_SEED", "123")
        cfg = config_file({"seed": 9})
        _, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert json.loads(err)["seed"] == 123

    def test_flag_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("ZKPOI_SEED", "123")
        _, _, err = run_cli(["econ", "ess", "--seed", "5"], capsys)
        assert json.loads(err)["seed"] == 5

    def test_non_integer_env_seed_is_a_config_error(self, capsys, monkeypatch):
        monkeypatch.setenv("ZKPOI_SEED", "abc")
        code, _, err = run_cli(["econ", "ess"], capsys)
        assert code == 2
        assert err.startswith("config error: ZKPOI_SEED: must be an integer")

    def test_oversized_config_seed_rejected(self, capsys, config_file):
        cfg = config_file({"seed": 2**64})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "seed: must fit in 64 bits" in err


class TestConfigErrors:
    def test_unknown_parameter_names_the_field(self, capsys, config_file):
        cfg = config_file({"params": {"bogus": 1}})
        code, out, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert out == ""
        assert err.strip() == "config error: params.bogus: unknown parameter"

    def test_wrong_type_names_the_field(self, capsys, config_file):
        cfg = config_file({"params": {"u_aa": "three"}})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "params.u_aa: must be a number" in err

    def test_range_violation_names_the_bound(self, capsys, config_file):
        cfg = config_file({"params": {"miner_count": 1}})
        code, _, err = run_cli(["econ", "dominance", "--config", cfg], capsys)
        assert code == 2
        assert "params.miner_count: must be >= 2" in err

    def test_bad_list_entry_is_indexed(self, capsys, config_file):
        cfg = config_file({"params": {"deltas": [0.5, "x"]}})
        code, _, err = run_cli(["econ", "circulation", "--config", cfg], capsys)
        assert code == 2
        assert "params.deltas[1]: must be a number" in err

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, err = run_cli(
            ["econ", "ess", "--config", str(tmp_path / "nope.json")], capsys)
        assert code == 2
        assert err.startswith("config error: config: cannot read")

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        code, _, err = run_cli(["econ", "ess", "--config", str(path)], capsys)
        assert code == 2
        assert "config: not valid JSON" in err

    def test_non_object_config(self, capsys, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        code, _, err = run_cli(["econ", "ess", "--config", str(path)], capsys)
        assert code == 2
        assert "top level must be a JSON object" in err

    def test_scenario_mismatch(self, capsys, config_file):
        cfg = config_file({"scenario": "econ.poa"})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "scenario: config names 'econ.poa'" in err

    def test_unknown_top_level_key(self, capsys, config_file):
        cfg = config_file({"paramz": {}})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "paramz: unknown config key" in err

    def test_unsupported_schema_version(self, capsys, config_file):
        cfg = config_file({"schema_version": 99})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "schema_version" in err

    def test_bad_output_format_in_config(self, capsys, config_file):
        cfg = config_file({"output": {"format": "xml"}})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "output.format: must be 'csv' or 'json'" in err

    def test_unknown_output_key(self, capsys, config_file):
        cfg = config_file({"output": {"compression": "gzip"}})
        code, _, err = run_cli(["econ", "ess", "--config", cfg], capsys)
        assert code == 2
        assert "output.compression: unknown output key" in err


class TestRuntimeErrors:
    def test_domain_failure_exits_1(self, capsys, config_file):
        # both networks start with zero customers: join odds are undefined
        cfg = config_file({"params": {"c_a": 0.0, "c_b": 0.0, "steps": 10}})
        code, out, err = run_cli(["econ", "network", "--config", cfg], capsys)
        assert code == 1
        assert out == ""
        assert err.startswith("error: BothSidesEmpty:")

    def test_exhaustive_cap_exits_1(self, capsys, config_file):
        cfg = config_file({"params": {"puzzles": 16, "miners": 64}})
        code, _, err = run_cli(["econ", "poa", "--config", cfg], capsys)
        assert code == 1
        assert err.startswith("error: TooLarge:")

    def test_unwritable_out_path_exits_1(self, capsys, tmp_path):
        target = tmp_path / "missing-dir" / "run.csv"
        code, _, err = run_cli(["econ", "ess", "--out", str(target)], capsys)
        assert code == 1
        assert err.startswith("error: IoFailure:")


class TestDeterminism:
    def test_same_seed_same_bytes(self, capsys):
        argv = ["sim", "epoch", "--seed", "7"]
        _, out_a, err_a = run_cli(argv, capsys)
        _, out_b, err_b = run_cli(argv, capsys)
        assert out_a == out_b
        assert err_a == err_b

    def test_different_seed_different_bytes(self, capsys):
        _, out_a, _ = run_cli(["sim", "epoch", "--seed", "7"], capsys)
        _, out_b, _ = run_cli(["sim", "epoch", "--seed", "8"], capsys)
        assert out_a != out_b

    def test_written_files_are_identical(self, capsys, tmp_path, config_file):
        cfg = config_file({"params": {"count": 2, "kdf_iterations": 4}})
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["registry", "dump", "--config", cfg, "--seed", "3",
                 "--out", str(a)], capsys)
        run_cli(["registry", "dump", "--config", cfg, "--seed", "3",
                 "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()


SMOKE_RUNS = [
    ("identity", "gen", {"params": {"count": 2}}),
    ("identity", "validate", {"params": {"count": 2}}),
    ("register", "build", {"params": {"count": 2, "kdf_iterations": 4}}),
    ("register", "verify", {"params": {"count": 2, "kdf_iterations": 4}}),
    ("registry", "register", {"params": {"count": 2, "kdf_iterations": 4}}),
    ("registry", "offline",
     {"params": {"count": 2, "kdf_iterations": 4, "offline_count": 1}}),
    ("registry", "dump", {"params": {"count": 2, "kdf_iterations": 4}}),
    ("sim", "epoch", {}),
    ("econ", "congestion", {}),
    ("econ", "poa", {"params": {"gamma": 0.1}}),
    ("econ", "dominance", {}),
    ("econ", "ess", {}),
    ("econ", "network", {"params": {"steps": 200}}),
    ("econ", "circulation", {}),
]


class TestScenarioSmoke:
    @pytest.mark.parametrize("group,verb,doc", SMOKE_RUNS,
                             ids=[f"{g}.{v}" for g, v, _ in SMOKE_RUNS])
    def test_scenario_runs_clean(self, group, verb, doc, capsys, config_file):
        argv = [group, verb, "--seed", "1"]
        if doc:
            argv += ["--config", config_file(doc, name=f"{group}.{verb}.json")]
        code, out, err = run_cli(argv, capsys)
        assert code == 0
        assert out
        manifest = json.loads(err)
        assert manifest["scenario"] == f"{group}.{verb}"

    def test_every_scenario_is_smoke_tested(self):
        from zkpoi import runner
        assert {f"{g}.{v}" for g, v, _ in SMOKE_RUNS} == set(runner.SCENARIOS)
