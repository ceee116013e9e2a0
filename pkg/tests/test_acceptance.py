"""End-to-end acceptance checks, one test per headline guarantee.

Each test is self-contained: it builds its own fixtures, states its
tolerance inline, and uses one-sided bounds for anything timing-based.
A terminal summary hook prints one PASS/FAIL line per test here.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import jsonschema
import pytest

from support import (
    ALL_KINDS,
    golden_function_config,
    load_golden,
    load_schema,
    make_function_config,
    platform_config_for,
)
from gfaas.adapters import get_service
from gfaas.cli import run
from gfaas.config import (
    PlatformConfig,
    PlatformKind,
    ScalePolicy,
    parse_function_config,
    serialize_function_config,
)
from gfaas.container import reset_fake_engine
from gfaas.errors import FileCollision, UnsupportedFeature
from gfaas.invoker import LoadSpec, invoke, load_test
from gfaas.mockfaas import LatencyModel, start_mock
from gfaas.scaffold import adapt_project
from gfaas.shim import hello_world_handler, serve


def test_criterion_1_config_fidelity():
    """Parsing the canonical example yields exact values; round-trip is identity."""
    document = """\
name: test-function
runtime: java
image: test-function
registry: registry.example.com:5000
resources:
  cpuRequest: "2"
  cpuLimit: "2"
  memRequest: 4Gi
  memLimit: 4Gi
scale:
  knative:
    minReplicas: 1
    maxReplicas: 5
    scaleToZeroDuration: 2m
"""
    started = time.monotonic()
    fn = parse_function_config(document)

    assert fn.name == "test-function"
    assert fn.resources.cpu_request == 2000  # 2 cores in millicores
    assert fn.resources.cpu_limit == 2000
    assert fn.resources.mem_request == 4 * 1024**3
    assert fn.resources.mem_limit == 4 * 1024**3
    assert fn.scale == {PlatformKind.KNATIVE: ScalePolicy(1, 5, 120)}

    again = parse_function_config(serialize_function_config(fn))
    assert again == fn
    assert time.monotonic() - started < 1.0


def test_criterion_2_manifest_goldens():
    """One fixed config renders to the frozen, schema-validated body per platform."""
    started = time.monotonic()
    fn = golden_function_config()
    for kind in ALL_KINDS:
        golden = load_golden(kind)
        platform = PlatformConfig(
            kind=kind, management_host="faas.example.com", management_port=8080
        )
        request = get_service(platform, mock=False).render_deployment(fn)
        assert request.method == golden["method"], kind
        assert request.path == golden["path"], kind
        assert request.body == golden["body"], kind
        jsonschema.Draft202012Validator(load_schema(kind)).validate(request.body)
    assert time.monotonic() - started < 1.0


def test_criterion_3_portability_parity():
    """One shim-hosted handler answers identically through all four proxies."""
    started = time.monotonic()
    responses = {}
    with serve(hello_world_handler, port=0) as shim:
        for kind in ALL_KINDS:
            with start_mock(kind) as mock:
                service = get_service(platform_config_for(mock), mock=True)
                service.deploy(make_function_config(name="parity"))
                mock.register_backend("parity", base_url=shim.base_url)
                result = invoke(f"{mock.url}/fn/default/parity")
                assert result.status_code == 200, kind
                responses[kind] = result.body
    assert set(responses) == set(ALL_KINDS)
    assert all(body == b"Hello world!" for body in responses.values())
    assert len(set(responses.values())) == 1  # byte-identical across platforms
    assert time.monotonic() - started < 10.0


def test_criterion_4_cold_hot_distinction():
    """300 ms cold starts appear on first use and again after 2 s idle."""
    started = time.monotonic()
    model = LatencyModel(cold_start_delay_ms=300, scale_to_zero_after_ms=2000)
    with start_mock(PlatformKind.KNATIVE, latency_model=model) as mock:
        service = get_service(platform_config_for(mock), mock=True)
        service.deploy(
            make_function_config(
                scale={PlatformKind.KNATIVE: ScalePolicy(0, 3, None)}
            )
        )
        url = f"{mock.url}/fn/default/hello-world"

        first = invoke(url)
        assert first.status_code == 200
        assert first.latency >= 300

        second = invoke(url)
        assert second.status_code == 200
        assert second.latency < 150

        time.sleep(3.0)
        third = invoke(url)
        assert third.status_code == 200
        assert third.latency >= 300
    assert time.monotonic() - started < 15.0


def test_criterion_5_hot_start_load():
    """100 VUs for 10 s: zero errors, ordered percentiles, consistent throughput."""
    with serve(hello_world_handler, port=0) as shim:
        spec = LoadSpec(vus=100, duration=10)
        stats = load_test(shim.base_url, spec)

    assert stats.error_count == 0
    assert stats.count > 0
    assert stats.min <= stats.p50 <= stats.p90 <= stats.p95 <= stats.max
    nominal = stats.count / spec.duration
    assert abs(stats.throughput - nominal) / nominal < 0.05


def test_criterion_6_grpc_gating():
    """gRPC matches HTTP byte-for-byte on knative; other kinds refuse it."""
    started = time.monotonic()
    grpc_fn = make_function_config(name="rpc-fn", is_grpc=True)

    with start_mock(PlatformKind.KNATIVE) as mock:
        service = get_service(platform_config_for(mock), mock=True)
        service.deploy(grpc_fn)
        http_body = invoke(f"{mock.url}/fn/default/rpc-fn").body
        grpc_result = invoke(
            f"{mock.host}:{mock.grpc_port}/fn/default/rpc-fn", trigger="grpc"
        )
        assert grpc_result.status_code == 200
        assert grpc_result.body == http_body

    for kind in (PlatformKind.OPENFAAS, PlatformKind.FISSION, PlatformKind.NUCLIO):
        with start_mock(kind) as mock:
            service = get_service(platform_config_for(mock), mock=True)
            with pytest.raises(UnsupportedFeature):
                service.deploy(grpc_fn)
            with pytest.raises(UnsupportedFeature):
                service.resolve_invoke_url("rpc-fn", "default", "grpc")
    assert time.monotonic() - started < 5.0


def test_criterion_7_legacy_migration_safety(tmp_path):
    """adapt only ever adds files; a rerun aborts without writing anything."""
    started = time.monotonic()
    for index in range(20):
        project = tmp_path / f"legacy-{index:02d}"
        (project / "lib").mkdir(parents=True)
        (project / "app.py").write_text(f"# app {index}\n")
        (project / "lib" / "helpers.py").write_text(f"N = {index}\n")
        if index % 2:
            (project / "README.rst").write_text("legacy docs\n")

        def tree(root: Path) -> dict[str, str]:
            return {
                str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
                for p in root.rglob("*")
                if p.is_file()
            }

        before = tree(project)
        created = adapt_project(project, "python")
        after = tree(project)

        assert created, index
        for rel, checksum in before.items():
            assert after[rel] == checksum, f"{index}: {rel} was modified"
        assert set(after) > set(before), index

        with pytest.raises(FileCollision):
            adapt_project(project, "python")
        assert tree(project) == after, f"{index}: second run wrote files"
    assert time.monotonic() - started < 5.0


def test_criterion_8_scale_to_zero_gating():
    """Platforms without scale-to-zero clamp to one replica and warn."""
    started = time.monotonic()
    zero = {kind: ScalePolicy(0, 3, 60) for kind in PlatformKind}

    for kind in (PlatformKind.OPENFAAS, PlatformKind.NUCLIO):
        with start_mock(kind) as mock:
            get_service(platform_config_for(mock), mock=True).deploy(
                make_function_config(scale={kind: zero[kind]})
            )
            doc = mock.inspect()[0]
            assert doc["minReplicas"] == 1, kind
            assert doc["state"] == "warm", kind
            assert any("clamped" in warning for warning in mock.warnings), kind

    for kind in (PlatformKind.KNATIVE, PlatformKind.FISSION):
        with start_mock(kind) as mock:
            get_service(platform_config_for(mock), mock=True).deploy(
                make_function_config(scale={kind: zero[kind]})
            )
            doc = mock.inspect()[0]
            assert doc["minReplicas"] == 0, kind
            assert doc["state"] == "cold", kind
            assert mock.warnings == [], kind
    assert time.monotonic() - started < 2.0


def test_criterion_9_cli_end_to_end(tmp_path, monkeypatch):
    """newFunction, build, push, deploy, list, invoke, delete on every kind."""
    started = time.monotonic()
    reset_fake_engine()
    monkeypatch.setenv("GFAAS_ENGINE", "fake")

    for kind in PlatformKind:
        name = f"e2e-{kind.value}"
        workdir = tmp_path / kind.value
        workdir.mkdir()
        monkeypatch.chdir(workdir)

        outcome = run(["newFunction", name, "--runtime", "python"])
        assert outcome.exit_code == 0, (kind, outcome.messages)
        monkeypatch.chdir(workdir / name)

        assert run(["build"]).exit_code == 0, kind
        assert run(["push"]).exit_code == 0, kind

        with start_mock(kind) as mock:
            Path("platform-config.yml").write_text(
                f"kind: {kind.value}\n"
                f"managementHost: {mock.host}\n"
                f"managementPort: {mock.port}\n"
            )
            assert run(["deploy", "--mock"]).exit_code == 0, kind

            listed = run(["functions", "--mock", "--json"])
            names = [f["name"] for f in listed.json_payload["data"]["functions"]]
            assert names == [name], kind

            invoked = run(["invoke", name, "--mock", "--json"])
            assert invoked.exit_code == 0, (kind, invoked.messages)
            assert invoked.json_payload["data"]["statusCode"] == 200, kind

            assert run(["delete", name, "--mock"]).exit_code == 0, kind
            emptied = run(["functions", "--mock", "--json"])
            assert emptied.json_payload["data"]["functions"] == [], kind
    assert time.monotonic() - started < 30.0
