"""gRPC transport: server + invoke round-trips, routing header, failures."""

from __future__ import annotations

import threading

import pytest

from gfaas.errors import GrpcUnavailable, PortInUse, RequestTimeout
from gfaas.rpc import ROUTE_HEADER, grpc_invoke, split_target, start_grpc_server


@pytest.fixture
def echo_server():
    seen = []

    def behavior(headers, body):
        seen.append((dict(headers), body))
        return 200, {"x-echo": "yes"}, body

    server, port = start_grpc_server(behavior)
    yield port, seen
    server.stop(grace=None)


class TestSplitTarget:
    def test_bare_authority(self):
        assert split_target("host:50051") == ("host:50051", "")

    def test_authority_with_path(self):
        assert split_target("host:50051/fn/ns/name") == ("host:50051", "/fn/ns/name")


class TestInvoke:
    def test_roundtrip(self, echo_server):
        port, _ = echo_server
        status, headers, body = grpc_invoke(f"127.0.0.1:{port}", b"payload")
        assert status == 200
        assert headers["x-echo"] == "yes"
        assert body == b"payload"

    def test_request_headers_reach_behavior(self, echo_server):
        port, seen = echo_server
        grpc_invoke(f"127.0.0.1:{port}", b"", headers={"x-custom": "v1"})
        assert seen[-1][0].get("x-custom") == "v1"

    def test_path_travels_in_route_header(self, echo_server):
        port, seen = echo_server
        grpc_invoke(f"127.0.0.1:{port}/fn/default/hello", b"")
        assert seen[-1][0].get(ROUTE_HEADER) == "/fn/default/hello"

    def test_large_payload(self, echo_server):
        port, _ = echo_server
        payload = b"\xab" * (1024 * 1024)
        status, _, body = grpc_invoke(f"127.0.0.1:{port}", payload)
        assert status == 200
        assert body == payload

    def test_concurrent_invocations(self, echo_server):
        port, _ = echo_server
        errors = []

        def call(i):
            try:
                status, _, body = grpc_invoke(f"127.0.0.1:{port}", str(i).encode())
                assert status == 200 and body == str(i).encode()
            except Exception as exc:  # noqa: BLE001 - collected for the assert
                errors.append(exc)

        threads = [threading.Thread(target=call, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []

    def test_unreachable_target(self):
        with pytest.raises(GrpcUnavailable):
            grpc_invoke("127.0.0.1:1", b"", timeout=2.0)

    def test_deadline_exceeded(self):
        import time

        def slow(headers, body):
            time.sleep(0.5)
            return 200, {}, b""

        server, port = start_grpc_server(slow)
        try:
            with pytest.raises(RequestTimeout):
                grpc_invoke(f"127.0.0.1:{port}", b"", timeout=0.05)
        finally:
            server.stop(grace=None)

    def test_port_in_use(self, echo_server):
        port, _ = echo_server
        with pytest.raises(PortInUse):
            start_grpc_server(lambda h, b: (200, {}, b""), port=port)
