"""Command line interface driven fully in-process through ``run``."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema
import pytest

import gfaas.adapters
from gfaas.cli import COMMANDS, CommandOutcome, main, run
from gfaas.config import PlatformKind
from gfaas.container import fake_engine
from support import SCHEMA_DIR

ENVELOPE_SCHEMA = json.loads(
    (Path(SCHEMA_DIR).parent.parent / "schemas" / "cli-output.schema.json").read_text()
)

FUNCTION_YAML = """\
name: cli-fn
runtime: python
image: cli-fn
registry: registry.example.com:5000
"""


def _platform_yaml(mock) -> str:
    return (
        f"kind: {mock.kind.value}\n"
        f"managementHost: {mock.host}\n"
        f"managementPort: {mock.port}\n"
    )


@pytest.fixture
def workspace(tmp_path, monkeypatch, knative_mock):
    """A cwd holding both config files wired to a live knative mock."""
    (tmp_path / "function-config.yml").write_text(FUNCTION_YAML)
    (tmp_path / "platform-config.yml").write_text(_platform_yaml(knative_mock))
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _check_envelope(outcome: CommandOutcome) -> dict:
    assert outcome.json_payload is not None
    jsonschema.Draft202012Validator(ENVELOPE_SCHEMA).validate(outcome.json_payload)
    return outcome.json_payload


class TestParsing:
    def test_no_arguments_shows_usage_and_fails(self):
        outcome = run([])
        assert outcome.exit_code == 1
        assert any("usage" in m for m in outcome.messages)

    def test_help_exits_zero_and_lists_all_commands(self):
        outcome = run(["--help"])
        assert outcome.exit_code == 0
        text = "\n".join(outcome.messages)
        for command in COMMANDS:
            assert command in text

    def test_exactly_eight_commands(self):
        assert len(COMMANDS) == 8

    def test_subcommand_help(self):
        outcome = run(["deploy", "--help"])
        assert outcome.exit_code == 0
        assert any("--mock" in m for m in outcome.messages)

    def test_unknown_command(self):
        outcome = run(["frobnicate"])
        assert outcome.exit_code == 1
        assert any("frobnicate" in m for m in outcome.messages)

    def test_run_never_raises_system_exit(self):
        # argparse normally calls sys.exit; the CLI parser must not.
        outcome = run(["deploy", "--no-such-flag"])
        assert outcome.exit_code == 1


class TestConfigDiscovery:
    def test_missing_function_config_names_path_and_remedies(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        outcome = run(["build", "--engine", "fake"])
        assert outcome.exit_code == 1
        text = "\n".join(outcome.messages)
        assert "function-config.yml" in text
        assert "-f" in text
        assert "GFAAS_FUNCTION_CONFIG" in text

    def test_env_var_discovery(self, tmp_path, monkeypatch, knative_mock):
        confs = tmp_path / "confs"
        confs.mkdir()
        (confs / "fn.yml").write_text(FUNCTION_YAML)
        (confs / "pf.yml").write_text(_platform_yaml(knative_mock))
        elsewhere = tmp_path / "elsewhere"
        elsewhere.mkdir()
        monkeypatch.chdir(elsewhere)
        monkeypatch.setenv("GFAAS_FUNCTION_CONFIG", str(confs / "fn.yml"))
        monkeypatch.setenv("GFAAS_PLATFORM_CONFIG", str(confs / "pf.yml"))

        outcome = run(["deploy", "--mock"])
        assert outcome.exit_code == 0, outcome.messages

    def test_explicit_flags_beat_env(self, workspace, monkeypatch):
        monkeypatch.setenv("GFAAS_FUNCTION_CONFIG", "/nonexistent/fn.yml")
        outcome = run([
            "deploy", "--mock",
            "-f", "function-config.yml",
            "-p", "platform-config.yml",
        ])
        assert outcome.exit_code == 0, outcome.messages

    def test_malformed_function_config(self, workspace):
        (workspace / "function-config.yml").write_text("{{nope")
        outcome = run(["deploy", "--mock"])
        assert outcome.exit_code == 1

    def test_invalid_function_config_field(self, workspace):
        (workspace / "function-config.yml").write_text(
            FUNCTION_YAML + "resources:\n  cpuRequest: lots\n"
        )
        outcome = run(["deploy", "--mock"])
        assert outcome.exit_code == 1
        assert any("cpuRequest" in m for m in outcome.messages)

    def test_strict_rejects_unknown_keys(self, workspace):
        (workspace / "function-config.yml").write_text(FUNCTION_YAML + "colour: red\n")
        assert run(["deploy", "--mock"]).exit_code == 0
        assert run(["deploy", "--mock", "--strict"]).exit_code == 1


class TestDeployAndList:
    def test_deploy_then_list_then_delete(self, workspace):
        deploy = run(["deploy", "--mock"])
        assert deploy.exit_code == 0
        assert any("invoke URL:" in m for m in deploy.messages)

        listed = run(["functions", "--mock", "--json"])
        payload = _check_envelope(listed)
        functions = payload["data"]["functions"]
        assert [f["name"] for f in functions] == ["cli-fn"]
        assert functions[0]["replicas"] >= 0

        deleted = run(["delete", "cli-fn", "--mock"])
        assert deleted.exit_code == 0
        assert run(["functions", "--mock", "--json"]).json_payload["data"] == {
            "functions": []
        }

    def test_deploy_json_envelope(self, workspace):
        payload = _check_envelope(run(["deploy", "--mock", "--json"]))
        assert payload["command"] == "deploy"
        assert payload["exitCode"] == 0
        assert payload["error"] is None
        assert payload["data"]["name"] == "cli-fn"
        assert payload["data"]["isGrpc"] is False
        assert payload["data"]["invokeUrl"].startswith("http://")

    def test_unreachable_platform_exits_2(self, workspace):
        (workspace / "platform-config.yml").write_text(
            "kind: knative\nmanagementHost: 127.0.0.1\nmanagementPort: 9\n"
        )
        outcome = run(["deploy", "--mock"])
        assert outcome.exit_code == 2

    def test_error_json_envelope(self, workspace):
        (workspace / "platform-config.yml").write_text(
            "kind: knative\nmanagementHost: 127.0.0.1\nmanagementPort: 9\n"
        )
        payload = _check_envelope(run(["deploy", "--mock", "--json"]))
        assert payload["exitCode"] == 2
        assert payload["data"] is None
        assert isinstance(payload["error"], str)

    def test_delete_missing_function_exits_1(self, workspace):
        outcome = run(["delete", "ghost", "--mock"])
        assert outcome.exit_code == 2  # NotFoundError is a platform error

    def test_delete_ignore_missing_exits_0(self, workspace):
        outcome = run(["delete", "ghost", "--mock", "--ignore-missing", "--json"])
        assert outcome.exit_code == 0
        assert outcome.json_payload["data"] == {
            "deleted": "ghost",
            "namespace": "default",
            "found": False,
        }


class TestInvoke:
    def test_invoke_named_function(self, workspace):
        run(["deploy", "--mock"])
        outcome = run(["invoke", "cli-fn", "--mock", "--json"])
        assert outcome.exit_code == 0
        payload = _check_envelope(outcome)
        assert payload["data"]["statusCode"] == 200
        assert payload["data"]["body"] == "Hello world!"

    def test_invoke_name_defaults_from_function_config(self, workspace):
        run(["deploy", "--mock"])
        outcome = run(["invoke", "--mock"])
        assert outcome.exit_code == 0
        assert any("200" in m for m in outcome.messages)

    def test_invoke_without_name_or_config(self, tmp_path, monkeypatch, knative_mock):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "platform-config.yml").write_text(_platform_yaml(knative_mock))
        outcome = run(["invoke", "--mock"])
        assert outcome.exit_code == 1
        assert any("name" in m for m in outcome.messages)

    def test_invoke_posts_data(self, workspace, knative_mock):
        run(["deploy", "--mock"])

        def echo(request):
            from gfaas.shim import XResponse

            return XResponse(status_code=200, body=request.body.upper())

        knative_mock.register_backend("cli-fn", handler=echo)
        outcome = run(["invoke", "cli-fn", "--mock", "--data", "abc", "--json"])
        assert outcome.json_payload["data"]["body"] == "ABC"

    def test_load_test_writes_csv(self, workspace):
        run(["deploy", "--mock"])
        out = workspace / "stats.csv"
        outcome = run([
            "invoke", "cli-fn", "--mock", "--json",
            "--vus", "2", "--duration", "1s", "--out", str(out),
        ])
        assert outcome.exit_code == 0, outcome.messages
        data = outcome.json_payload["data"]
        assert data["errorCount"] == 0
        assert data["count"] > 0

        with out.open() as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 1
        assert float(rows[0]["count"]) == data["count"]

    def test_load_test_against_dead_target_exits_2(self, workspace):
        run(["deploy", "--mock"])
        (workspace / "platform-config.yml").write_text(
            "kind: knative\nmanagementHost: 127.0.0.1\nmanagementPort: 9\n"
        )
        outcome = run(["invoke", "cli-fn", "--mock", "--vus", "1", "--duration", "1s"])
        assert outcome.exit_code == 2


class TestScaffoldCommands:
    def test_new_function_and_build_and_push(self, tmp_path, monkeypatch, fresh_fake_engine):
        monkeypatch.chdir(tmp_path)
        created = run(["newFunction", "fn-a", "--runtime", "python", "--json"])
        assert created.exit_code == 0, created.messages
        assert created.json_payload["data"]["name"] == "fn-a"
        assert (tmp_path / "fn-a" / "function-config.yml").exists()

        monkeypatch.chdir(tmp_path / "fn-a")
        built = run(["build", "--engine", "fake", "--json"])
        assert built.exit_code == 0, built.messages
        digest = built.json_payload["data"]["digest"]
        assert digest.startswith("sha256:")

        pushed = run([
            "push", "--engine", "fake", "--json",
            "--registry-user", "bot", "--registry-password", "hunter2",
        ])
        assert pushed.exit_code == 0, pushed.messages
        assert pushed.json_payload["data"]["digest"] == digest

    def test_new_function_existing_target_exits_1(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "fn-b").mkdir()
        (tmp_path / "fn-b" / "junk").write_text("x")
        outcome = run(["newFunction", "fn-b", "--runtime", "python"])
        assert outcome.exit_code == 1
        assert any("not empty" in m for m in outcome.messages)

    def test_new_function_bad_runtime(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        outcome = run(["newFunction", "fn-c", "--runtime", "perl"])
        assert outcome.exit_code == 1
        assert any("supported runtimes" in m for m in outcome.messages)

    def test_adapt_command(self, tmp_path, monkeypatch):
        project = tmp_path / "legacy"
        project.mkdir()
        (project / "main.go").write_text("package main\n")
        monkeypatch.chdir(tmp_path)

        outcome = run(["adapt", "--runtime", "go", "--dir", "legacy", "--json"])
        assert outcome.exit_code == 0, outcome.messages
        assert (project / "function-config.yml").exists()

        again = run(["adapt", "--runtime", "go", "--dir", "legacy"])
        assert again.exit_code == 1
        assert any("refusing to overwrite" in m for m in again.messages)

    def test_engine_env_var(self, tmp_path, monkeypatch, fresh_fake_engine):
        monkeypatch.chdir(tmp_path)
        run(["newFunction", "fn-d", "--runtime", "go"])
        monkeypatch.chdir(tmp_path / "fn-d")
        monkeypatch.setenv("GFAAS_ENGINE", "fake")
        outcome = run(["build"])
        assert outcome.exit_code == 0, outcome.messages

    def test_registry_creds_from_env(self, tmp_path, monkeypatch, fresh_fake_engine):
        monkeypatch.chdir(tmp_path)
        run(["newFunction", "fn-e", "--runtime", "python"])
        monkeypatch.chdir(tmp_path / "fn-e")
        run(["build", "--engine", "fake"])
        monkeypatch.setenv("GFAAS_REGISTRY_USER", "bot")
        monkeypatch.setenv("GFAAS_REGISTRY_PASSWORD", "hunter2")
        outcome = run(["push", "--engine", "fake"])
        assert outcome.exit_code == 0, outcome.messages
        auth = fake_engine().registry.auth_seen
        assert auth and auth[-1] is not None

    def test_unknown_engine(self, workspace):
        outcome = run(["build", "--engine", "podman"])
        assert outcome.exit_code == 1


class TestMain:
    def test_main_exits_with_outcome_code(self, workspace, capsys):
        with pytest.raises(SystemExit) as exit_info:
            main(["functions", "--mock"])
        assert exit_info.value.code == 0
        assert "no functions deployed" in capsys.readouterr().out

    def test_main_json_goes_to_stdout(self, workspace, capsys):
        with pytest.raises(SystemExit):
            main(["functions", "--mock", "--json"])
        captured = capsys.readouterr()
        parsed = json.loads(captured.out)
        assert parsed["command"] == "functions"

    def test_main_errors_go_to_stderr(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        with pytest.raises(SystemExit) as exit_info:
            main(["deploy"])
        assert exit_info.value.code == 1
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "function-config.yml" in captured.err


class TestInterfaceClosure:
    def test_adapters_expose_no_platform_specific_names(self):
        public = [n for n in dir(gfaas.adapters) if not n.startswith("_")]
        for marker in ("knative", "openfaas", "fission", "nuclio"):
            leaked = [n for n in public if marker in n.lower() and n != marker]
            assert leaked == [], f"platform-specific name leaked: {leaked}"

    def test_all_platforms_reachable_through_one_factory(self, workspace, knative_mock):
        for kind in PlatformKind:
            handle = run(["functions", "--mock", "-p", "platform-config.yml"])
            assert handle.exit_code == 0
