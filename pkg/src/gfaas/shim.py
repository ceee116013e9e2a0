"""Generic function server: wraps one user handler behind the endpoints
every supported platform expects.

The handler sees a neutral request/response pair and never touches
platform specifics. The server answers liveness and readiness probes,
dispatches GET/POST on the root route to the handler, and can additionally
serve the same handler over gRPC on the next port up.

Configuration follows the container conventions: PORT selects the HTTP
port (default 8080), GFAAS_GRPC switches the gRPC listener on.
"""

from __future__ import annotations

import logging
import os
import threading
from collections.abc import Callable
from dataclasses import dataclass, field
from urllib.parse import parse_qsl, urlsplit

from ._httpd import HttpServerHandle, start_http_server
from .rpc import start_grpc_server

log = logging.getLogger(__name__)

DEFAULT_PORT = 8080
GRPC_PORT_OFFSET = 1

# Probe routes answered by the server itself; platforms differ in what they
# poll, so both canonical paths and the platform-style aliases are served.
LIVENESS_PATHS = ("/healthz", "/live", "/_/health")
READINESS_PATHS = ("/ready", "/_/ready")


@dataclass
class XRequest:
    """One invocation as seen by a handler."""

    method: str = "POST"
    path: str = "/"
    query: dict[str, str] = field(default_factory=dict)
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""

    def get_header(self, name: str, default: str | None = None) -> str | None:
        """Case-insensitive header lookup."""
        wanted = name.lower()
        for key, value in self.headers.items():
            if key.lower() == wanted:
                return value
        return default


@dataclass
class XResponse:
    """What a handler returns; written to the wire byte-exact."""

    status_code: int = 200
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes | str = b""

    def body_bytes(self) -> bytes:
        return self.body.encode() if isinstance(self.body, str) else self.body


HandlerFn = Callable[[XRequest], XResponse]


def hello_world_handler(request: XRequest) -> XResponse:
    """The canonical example handler."""
    return XResponse(status_code=200, body=b"Hello world!")


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


class FunctionServer:
    """Running shim; ``shutdown`` drains in-flight requests, bounded by 5 s."""

    def __init__(self, http: HttpServerHandle, grpc_server, grpc_port: int | None):
        self._http = http
        self._grpc = grpc_server
        self.grpc_port = grpc_port
        self._closed = False
        self._stopped = threading.Event()
        self._lock = threading.Lock()

    @property
    def host(self) -> str:
        return self._http.host

    @property
    def port(self) -> int:
        return self._http.port

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def shutdown(self, drain_seconds: float = 5.0) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
        if self._grpc is not None:
            self._grpc.stop(grace=drain_seconds).wait(drain_seconds)
        self._http.shutdown(drain_seconds)
        self._stopped.set()

    def wait(self, timeout: float | None = None) -> None:
        """Block (e.g. a scaffolded main) until shutdown is called."""
        self._stopped.wait(timeout)

    def __enter__(self) -> "FunctionServer":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def serve(
    handler: HandlerFn,
    port: int | None = None,
    host: str = "127.0.0.1",
    grpc_enabled: bool | None = None,
    serialize_handler: bool = False,
) -> FunctionServer:
    """Start serving the handler; returns once the server reports ready.

    The handler may be invoked concurrently unless ``serialize_handler``
    wraps it in a mutual-exclusion region.
    """
    if port is None:
        port = int(os.environ.get("PORT", DEFAULT_PORT))
    if grpc_enabled is None:
        grpc_enabled = _env_flag("GFAAS_GRPC")

    ready = threading.Event()
    handler_lock = threading.Lock() if serialize_handler else None

    def call_handler(request: XRequest) -> XResponse:
        if handler_lock is not None:
            with handler_lock:
                return handler(request)
        return handler(request)

    def app(method: str, raw_path: str, headers: dict[str, str], body: bytes):
        parts = urlsplit(raw_path)
        path = parts.path or "/"
        if path in LIVENESS_PATHS and method in ("GET", "HEAD"):
            return 200, {"Content-Type": "text/plain"}, b"ok"
        if path in READINESS_PATHS and method in ("GET", "HEAD"):
            if ready.is_set():
                return 200, {"Content-Type": "text/plain"}, b"ready"
            return 503, {"Content-Type": "text/plain"}, b"starting"
        if path == "/" and method in ("GET", "POST"):
            if not ready.is_set():
                return 503, {"Content-Type": "text/plain"}, b"starting"
            request = XRequest(
                method=method,
                path=path,
                query=dict(parse_qsl(parts.query)),
                headers=headers,
                body=body,
            )
            response = call_handler(request)
            return response.status_code, dict(response.headers), response.body_bytes()
        if path == "/":
            return 405, {"Allow": "GET, POST"}, b"method not allowed"
        return 404, {}, b"not found"

    http = start_http_server(app, host=host, port=port)

    grpc_server = None
    grpc_port = None
    if grpc_enabled:
        def grpc_behavior(headers: dict[str, str], body: bytes):
            if not ready.is_set():
                return 503, {}, b"starting"
            response = call_handler(
                XRequest(method="POST", path="/", headers=headers, body=body)
            )
            return response.status_code, dict(response.headers), response.body_bytes()

        try:
            grpc_server, grpc_port = start_grpc_server(
                grpc_behavior, host=host, port=http.port + GRPC_PORT_OFFSET
            )
        except Exception:
            http.shutdown()
            raise

    ready.set()
    log.info("function server listening on %s (grpc: %s)", http.port, grpc_port)
    return FunctionServer(http, grpc_server, grpc_port)
