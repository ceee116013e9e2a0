"""Hermetic platform double: one server per kind, management API plus proxy.

The mock accepts exactly the requests the matching adapter renders
(enforced with the same JSON Schemas the golden tests use) and exposes a
uniform invocation proxy at ``/fn/<namespace>/<name>``. A small latency
model makes cold starts, warm paths, and scale-to-zero observable at
desk scale: cold invocations sleep ``cold_start_delay_ms``, a background
scheduler flips idle functions back to cold, and OpenFaaS/Nuclio mocks
clamp minReplicas to at least one because their community editions do
not scale to zero.

State lives in memory only; nothing survives a restart.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from urllib.parse import parse_qs

import jsonschema

from ._httpd import HttpServerHandle, start_http_server
from .config import PlatformKind
from .errors import FunctionCrashed, PortInUse
from .rpc import ROUTE_HEADER, start_grpc_server
from .shim import XRequest, XResponse

PROXY_PREFIX = "/fn"
STATE_PATH = "/__mock/state"

KNATIVE_PREFIX = "/apis/serving.knative.dev/v1"
OPENFAAS_PATH = "/system/functions"
FISSION_PATH = "/v2/functions"
NUCLIO_PATH = "/api/functions"

MIN_SCALE_ANNOTATION = "autoscaling.knative.dev/min-scale"
MAX_SCALE_ANNOTATION = "autoscaling.knative.dev/max-scale"
RETENTION_ANNOTATION = "autoscaling.knative.dev/scale-to-zero-pod-retention-period"
MIN_SCALE_LABEL = "com.openfaas.scale.min"
MAX_SCALE_LABEL = "com.openfaas.scale.max"

# Platforms without scale-to-zero in their community editions.
NO_SCALE_TO_ZERO = (PlatformKind.OPENFAAS, PlatformKind.NUCLIO)

_TIMER_INTERVAL_S = 0.005

_JSON = {"Content-Type": "application/json"}


@dataclass(frozen=True)
class LatencyModel:
    """All figures in milliseconds; scale_to_zero_after_ms is the fallback
    used when the deployed function carries no retention period itself."""

    cold_start_delay_ms: float = 0.0
    scale_to_zero_after_ms: float | None = None
    warm_overhead_ms: float = 0.0

    def __post_init__(self):
        if self.cold_start_delay_ms < 0 or self.warm_overhead_ms < 0:
            raise ValueError("latency figures cannot be negative")
        if self.scale_to_zero_after_ms is not None and self.scale_to_zero_after_ms < 0:
            raise ValueError("scale_to_zero_after_ms cannot be negative")


@dataclass
class MockFunction:
    """One deployed function plus its live scaling state."""

    name: str
    namespace: str
    image: str
    min_replicas: int
    max_replicas: int
    requested_min_replicas: int
    scale_to_zero_ms: float | None
    is_grpc: bool
    env: dict[str, str]
    document: dict
    state: str = "cold"
    replicas: int = 0
    last_invoked_at: float = field(default_factory=time.monotonic)

    def normalized(self) -> dict:
        return {
            "name": self.name,
            "namespace": self.namespace,
            "image": self.image,
            "minReplicas": self.min_replicas,
            "maxReplicas": self.max_replicas,
            "requestedMinReplicas": self.requested_min_replicas,
            "scaleToZeroDuration": (
                None if self.scale_to_zero_ms is None else self.scale_to_zero_ms / 1000.0
            ),
            "isGrpc": self.is_grpc,
            "env": dict(self.env),
            "state": self.state,
            "replicas": self.replicas,
        }


def _backend_from_handler(handler):
    """Adapt a shim-style handler into the proxy's backend contract."""

    def call(method: str, headers: dict[str, str], body: bytes):
        request = XRequest(
            method=method, path="/", query="", headers=dict(headers), body=body
        )
        response = handler(request)
        if not isinstance(response, XResponse):
            raise FunctionCrashed("handler did not return a response")
        return response.status_code, dict(response.headers), response.body_bytes()

    return call


def _default_backend(method: str, headers: dict[str, str], body: bytes):
    return 200, {"Content-Type": "text/plain; charset=utf-8"}, b"Hello world!"


def _backend_from_url(base_url: str, grpc_target: str | None = None):
    """Forward proxied invocations to a live runtime-shim process."""
    import requests as _requests

    from . import rpc as _rpc

    def call(method: str, headers: dict[str, str], body: bytes):
        if method == "GRPC":
            if grpc_target is None:
                raise FunctionCrashed("backend has no gRPC listener")
            return _rpc.grpc_invoke(grpc_target, body, headers=headers)
        hop = {"host", "content-length", "connection", "accept-encoding"}
        forwarded = {k: v for k, v in headers.items() if k.lower() not in hop}
        try:
            response = _requests.request(
                method, base_url + "/", headers=forwarded, data=body or None, timeout=60
            )
        except _requests.RequestException as exc:
            raise FunctionCrashed(f"backend unreachable: {exc}") from exc
        return response.status_code, {}, response.content

    return call


_SCHEMA_CACHE: dict[PlatformKind, jsonschema.Draft202012Validator] = {}


def _validator(kind: PlatformKind) -> jsonschema.Draft202012Validator:
    if kind not in _SCHEMA_CACHE:
        text = (
            resources.files("gfaas.adapters")
            .joinpath(f"schemas/{kind.value}.schema.json")
            .read_text()
        )
        _SCHEMA_CACHE[kind] = jsonschema.Draft202012Validator(json.loads(text))
    return _SCHEMA_CACHE[kind]


def _error_path(error: jsonschema.ValidationError) -> str:
    best = jsonschema.exceptions.best_match([error]) or error
    parts = [str(p) for p in best.absolute_path]
    return ".".join(parts) if parts else "(root)"


def _reply(status: int, doc) -> tuple[int, dict[str, str], bytes]:
    return status, dict(_JSON), json.dumps(doc).encode()


class MockPlatform:
    """In-memory platform emulation behind :func:`start_mock`."""

    def __init__(
        self,
        kind: PlatformKind,
        latency_model: LatencyModel,
        auth_header: str | None,
        default_backend=None,
    ):
        self.kind = kind
        self.model = latency_model
        self._auth_header = auth_header
        self._default_backend = default_backend or _default_backend
        self._functions: dict[tuple[str, str], MockFunction] = {}
        self._backends: dict[tuple[str, str], object] = {}
        self.warnings: list[str] = []
        self._lock = threading.Lock()

    # --- store ------------------------------------------------------------

    def register_backend(self, name: str, namespace: str = "default", *,
                         handler=None, base_url=None, grpc_target=None) -> None:
        """Route invocations of one function to a handler or a live shim."""
        if handler is not None:
            backend = _backend_from_handler(handler)
        elif base_url is not None:
            backend = _backend_from_url(base_url, grpc_target)
        else:
            raise ValueError("register_backend needs handler= or base_url=")
        with self._lock:
            self._backends[(namespace, name)] = backend

    def inspect(self) -> list[dict]:
        with self._lock:
            return [fn.normalized() for fn in self._functions.values()]

    def state_document(self) -> dict:
        with self._lock:
            return {
                "kind": self.kind.value,
                "functions": [fn.normalized() for fn in self._functions.values()],
                "warnings": list(self.warnings),
            }

    def _initial_scale(self, fn: MockFunction) -> None:
        if fn.min_replicas >= 1:
            fn.state = "warm"
            fn.replicas = fn.min_replicas
        else:
            fn.state = "cold"
            fn.replicas = 0
        fn.last_invoked_at = time.monotonic()

    def _upsert(self, parsed: MockFunction, *, create: bool) -> tuple[int, dict[str, str], bytes] | None:
        """Store the function; returns an error response or None on success."""
        key = (parsed.namespace, parsed.name)
        with self._lock:
            exists = key in self._functions
            if create and exists:
                return _reply(409, {"error": f"function {parsed.name} already exists"})
            if not create and not exists:
                return _reply(404, {"error": f"function {parsed.name} not found"})
            if parsed.requested_min_replicas < 1 and self.kind in NO_SCALE_TO_ZERO:
                self.warnings.append(
                    f"{self.kind.value}: minReplicas "
                    f"{parsed.requested_min_replicas} clamped to 1 "
                    "(no scale-to-zero support)"
                )
            self._initial_scale(parsed)
            self._functions[key] = parsed
        return None

    def _delete(self, name: str, namespace: str) -> tuple[int, dict[str, str], bytes]:
        key = (namespace, name)
        with self._lock:
            if key not in self._functions:
                return _reply(404, {"error": f"function {name} not found"})
            del self._functions[key]
        return _reply(200, {})

    def sweep_idle(self) -> None:
        """Scale idle functions to zero; called by the background scheduler."""
        now = time.monotonic()
        with self._lock:
            for fn in self._functions.values():
                if (
                    fn.state == "warm"
                    and fn.min_replicas == 0
                    and fn.scale_to_zero_ms is not None
                    and (now - fn.last_invoked_at) * 1000.0 >= fn.scale_to_zero_ms
                ):
                    fn.state = "cold"
                    fn.replicas = 0

    # --- request parsing per kind -------------------------------------------

    def _parse_body(self, doc: dict) -> MockFunction:
        kind = self.kind
        if kind is PlatformKind.KNATIVE:
            metadata = doc["metadata"]
            template = doc["spec"]["template"]
            annotations = template.get("metadata", {}).get("annotations", {})
            container = template["spec"]["containers"][0]
            ports = container.get("ports", [])
            scale_ms = None
            if RETENTION_ANNOTATION in annotations:
                scale_ms = _duration_ms(annotations[RETENTION_ANNOTATION])
            return self._make_function(
                name=metadata["name"],
                namespace=metadata.get("namespace", "default"),
                image=container["image"],
                min_replicas=int(annotations.get(MIN_SCALE_ANNOTATION, "0")),
                max_replicas=int(annotations.get(MAX_SCALE_ANNOTATION, "10")),
                scale_ms=scale_ms,
                is_grpc=any(p.get("name") == "h2c" for p in ports),
                env=_env_from_list(container.get("env", [])),
                document=doc,
            )
        if kind is PlatformKind.OPENFAAS:
            labels = doc.get("labels", {})
            return self._make_function(
                name=doc["service"],
                namespace=doc.get("namespace", "default"),
                image=doc["image"],
                min_replicas=int(labels.get(MIN_SCALE_LABEL, "1")),
                max_replicas=int(labels.get(MAX_SCALE_LABEL, "20")),
                scale_ms=None,
                is_grpc=False,
                env=dict(doc.get("envVars", {})),
                document=doc,
            )
        if kind is PlatformKind.FISSION:
            metadata = doc["metadata"]
            spec = doc["spec"]
            container = spec["podspec"]["containers"][0]
            strategy = spec["invokeStrategy"]["executionStrategy"]
            scale_ms = None
            if "idletimeout" in spec:
                scale_ms = float(spec["idletimeout"]) * 1000.0
            return self._make_function(
                name=metadata["name"],
                namespace=metadata.get("namespace", "default"),
                image=container["image"],
                min_replicas=int(strategy["minScale"]),
                max_replicas=int(strategy["maxScale"]),
                scale_ms=scale_ms,
                is_grpc=False,
                env=_env_from_list(container.get("env", [])),
                document=doc,
            )
        metadata = doc["metadata"]
        spec = doc["spec"]
        return self._make_function(
            name=metadata["name"],
            namespace=metadata.get("namespace", "default"),
            image=spec["image"],
            min_replicas=int(spec.get("minReplicas", 1)),
            max_replicas=int(spec.get("maxReplicas", 1)),
            scale_ms=None,
            is_grpc=False,
            env=_env_from_list(spec.get("env", [])),
            document=doc,
        )

    def _make_function(self, *, name, namespace, image, min_replicas, max_replicas,
                       scale_ms, is_grpc, env, document) -> MockFunction:
        requested_min = min_replicas
        if self.kind in NO_SCALE_TO_ZERO and min_replicas < 1:
            min_replicas = 1
        if scale_ms is None and min_replicas == 0:
            scale_ms = self.model.scale_to_zero_after_ms
        return MockFunction(
            name=name,
            namespace=namespace,
            image=image,
            min_replicas=min_replicas,
            max_replicas=max(max_replicas, min_replicas),
            requested_min_replicas=requested_min,
            scale_to_zero_ms=scale_ms,
            is_grpc=is_grpc,
            env=env,
            document=document,
        )

    # --- management HTTP surface ---------------------------------------------

    def handle_management(self, method: str, path: str, query: str,
                          headers: dict[str, str], body: bytes):
        if self._auth_header is not None:
            provided = _header(headers, "Authorization")
            if provided != self._auth_header:
                return _reply(401, {"error": "unauthorized"})
        handler = {
            PlatformKind.KNATIVE: self._knative_route,
            PlatformKind.OPENFAAS: self._openfaas_route,
            PlatformKind.FISSION: self._fission_route,
            PlatformKind.NUCLIO: self._nuclio_route,
        }[self.kind]
        return handler(method, path, query, body)

    def _validated(self, body: bytes):
        """Decode and schema-check a deploy body; returns (doc, error)."""
        try:
            doc = json.loads(body.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            return None, _reply(400, {"error": "body is not valid JSON"})
        errors = sorted(
            _validator(self.kind).iter_errors(doc), key=lambda e: list(e.absolute_path)
        )
        if errors:
            best = jsonschema.exceptions.best_match(errors)
            return None, _reply(
                422, {"error": best.message, "field": _error_path(best)}
            )
        return doc, None

    def _deploy_from_body(self, body: bytes, *, create: bool, url_namespace=None,
                          url_name=None):
        doc, error = self._validated(body)
        if error is not None:
            return error
        parsed = self._parse_body(doc)
        if url_namespace is not None and parsed.namespace != url_namespace:
            return _reply(
                422,
                {
                    "error": "namespace does not match request path",
                    "field": "metadata.namespace",
                },
            )
        if url_name is not None and parsed.name != url_name:
            return _reply(
                422,
                {"error": "name does not match request path", "field": "metadata.name"},
            )
        error = self._upsert(parsed, create=create)
        if error is not None:
            return error
        return _reply(201 if create else 200, parsed.document)

    # Knative: services under namespaced collection paths.
    def _knative_route(self, method: str, path: str, query: str, body: bytes):
        if path == f"{KNATIVE_PREFIX}/services" and method == "GET":
            with self._lock:
                items = [self._knative_doc(fn) for fn in self._functions.values()]
            return _reply(200, {"items": items})
        if not path.startswith(f"{KNATIVE_PREFIX}/namespaces/"):
            return _reply(404, {"error": "unknown path"})
        parts = path[len(KNATIVE_PREFIX) + 1:].split("/")
        # namespaces/<ns>/services[/<name>]
        if len(parts) == 3 and parts[2] == "services" and method == "POST":
            return self._deploy_from_body(body, create=True, url_namespace=parts[1])
        if len(parts) == 4 and parts[2] == "services":
            namespace, name = parts[1], parts[3]
            if method == "PUT":
                return self._deploy_from_body(
                    body, create=False, url_namespace=namespace, url_name=name
                )
            if method == "DELETE":
                return self._delete(name, namespace)
            if method == "GET":
                with self._lock:
                    fn = self._functions.get((namespace, name))
                    if fn is None:
                        return _reply(404, {"error": f"function {name} not found"})
                    return _reply(200, self._knative_doc(fn))
        return _reply(404, {"error": "unknown path"})

    def _knative_doc(self, fn: MockFunction) -> dict:
        doc = json.loads(json.dumps(fn.document))
        doc["status"] = {
            "readyReplicas": fn.replicas,
            "conditions": [{"type": "Ready", "status": "True"}],
            "url": f"http://{fn.name}.{fn.namespace}.example.com",
        }
        return doc

    def _openfaas_route(self, method: str, path: str, query: str, body: bytes):
        if path != OPENFAAS_PATH:
            return _reply(404, {"error": "unknown path"})
        if method == "GET":
            with self._lock:
                items = [
                    {
                        "name": fn.name,
                        "namespace": fn.namespace,
                        "image": fn.image,
                        "replicas": fn.replicas,
                        "availableReplicas": fn.replicas if fn.state == "warm" else 0,
                        "labels": {
                            MIN_SCALE_LABEL: str(fn.min_replicas),
                            MAX_SCALE_LABEL: str(fn.max_replicas),
                        },
                    }
                    for fn in self._functions.values()
                ]
            return _reply(200, items)
        if method == "POST":
            return self._deploy_from_body(body, create=True)
        if method == "PUT":
            return self._deploy_from_body(body, create=False)
        if method == "DELETE":
            try:
                doc = json.loads(body.decode("utf-8"))
                name = doc["functionName"]
            except (ValueError, KeyError, UnicodeDecodeError):
                return _reply(400, {"error": "delete body needs functionName"})
            return self._delete(name, doc.get("namespace", "default"))
        return _reply(405, {"error": f"{method} not allowed"})

    def _fission_route(self, method: str, path: str, query: str, body: bytes):
        if path == FISSION_PATH:
            if method == "GET":
                with self._lock:
                    items = [self._fission_doc(fn) for fn in self._functions.values()]
                return _reply(200, items)
            if method == "POST":
                return self._deploy_from_body(body, create=True)
            return _reply(405, {"error": f"{method} not allowed"})
        if path.startswith(f"{FISSION_PATH}/"):
            name = path[len(FISSION_PATH) + 1:]
            namespace = parse_qs(query).get("namespace", ["default"])[0]
            if method == "PUT":
                return self._deploy_from_body(body, create=False, url_name=name)
            if method == "DELETE":
                return self._delete(name, namespace)
            if method == "GET":
                with self._lock:
                    fn = self._functions.get((namespace, name))
                    if fn is None:
                        return _reply(404, {"error": f"function {name} not found"})
                    return _reply(200, self._fission_doc(fn))
        return _reply(404, {"error": "unknown path"})

    def _fission_doc(self, fn: MockFunction) -> dict:
        doc = json.loads(json.dumps(fn.document))
        doc["status"] = {"replicas": fn.replicas, "ready": fn.state == "warm"}
        return doc

    def _nuclio_route(self, method: str, path: str, query: str, body: bytes):
        if path != NUCLIO_PATH:
            return _reply(404, {"error": "unknown path"})
        if method == "GET":
            with self._lock:
                items = {
                    fn.name: self._nuclio_doc(fn) for fn in self._functions.values()
                }
            return _reply(200, items)
        if method == "POST":
            return self._deploy_from_body(body, create=True)
        if method == "PUT":
            return self._deploy_from_body(body, create=False)
        if method == "DELETE":
            try:
                doc = json.loads(body.decode("utf-8"))
                metadata = doc["metadata"]
                name = metadata["name"]
            except (ValueError, KeyError, UnicodeDecodeError):
                return _reply(400, {"error": "delete body needs metadata.name"})
            return self._delete(name, metadata.get("namespace", "default"))
        return _reply(405, {"error": f"{method} not allowed"})

    def _nuclio_doc(self, fn: MockFunction) -> dict:
        doc = json.loads(json.dumps(fn.document))
        doc["status"] = {
            "state": "ready" if fn.state == "warm" else "scaledToZero",
            "replicas": fn.replicas,
        }
        return doc

    # --- invocation proxy ---------------------------------------------------

    def proxy_invoke(self, method: str, namespace: str, name: str,
                     headers: dict[str, str], body: bytes):
        key = (namespace, name)
        with self._lock:
            fn = self._functions.get(key)
            if fn is None:
                return _reply(404, {"error": f"function {namespace}/{name} not found"})
            was_cold = fn.state == "cold"
            backend = self._backends.get(key, self._default_backend)
        if was_cold:
            time.sleep(self.model.cold_start_delay_ms / 1000.0)
            with self._lock:
                fn.state = "warm"
                fn.replicas = max(fn.min_replicas, 1)
        elif self.model.warm_overhead_ms:
            time.sleep(self.model.warm_overhead_ms / 1000.0)
        try:
            status, response_headers, payload = backend(method, headers, body)
        except FunctionCrashed as exc:
            return _reply(502, {"error": str(exc)})
        except Exception as exc:  # backend bug: surface, do not crash the mock
            return _reply(502, {"error": f"function crashed: {exc}"})
        with self._lock:
            fn.last_invoked_at = time.monotonic()
        return status, response_headers, payload


def _duration_ms(text: str) -> float:
    from .units import parse_duration

    return float(parse_duration(text)) * 1000.0


def _env_from_list(entries) -> dict[str, str]:
    return {e["name"]: e["value"] for e in entries}


def _header(headers: dict[str, str], wanted: str) -> str | None:
    for key, value in headers.items():
        if key.lower() == wanted.lower():
            return value
    return None


class MockPlatformHandle:
    """Running mock server; shut down with :meth:`shutdown`."""

    def __init__(self, platform: MockPlatform, http: HttpServerHandle,
                 grpc_server, grpc_port: int | None, timer_stop: threading.Event):
        self.platform = platform
        self._http = http
        self._grpc_server = grpc_server
        self.grpc_port = grpc_port
        self._timer_stop = timer_stop

    @property
    def kind(self) -> PlatformKind:
        return self.platform.kind

    @property
    def host(self) -> str:
        return self._http.host

    @property
    def port(self) -> int:
        return self._http.port

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def warnings(self) -> list[str]:
        return list(self.platform.warnings)

    def inspect(self) -> list[dict]:
        return self.platform.inspect()

    def register_backend(self, name: str, namespace: str = "default", **kwargs) -> None:
        self.platform.register_backend(name, namespace, **kwargs)

    def shutdown(self) -> None:
        self._timer_stop.set()
        if self._grpc_server is not None:
            self._grpc_server.stop(grace=0.5)
        self._http.shutdown()

    def __enter__(self) -> "MockPlatformHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def _make_app(platform: MockPlatform):
    def app(method: str, path: str, headers: dict[str, str], body: bytes):
        path, _, query = path.partition("?")
        if path == STATE_PATH and method == "GET":
            return _reply(200, platform.state_document())
        if path.startswith(f"{PROXY_PREFIX}/"):
            parts = path[len(PROXY_PREFIX) + 1:].split("/")
            if len(parts) < 2 or not parts[0] or not parts[1]:
                return _reply(404, {"error": "proxy path is /fn/<namespace>/<name>"})
            return platform.proxy_invoke(method, parts[0], parts[1], headers, body)
        return platform.handle_management(method, path, query, headers, body)

    return app


def _grpc_behavior(platform: MockPlatform):
    def behavior(headers: dict[str, str], body: bytes):
        target = headers.get(ROUTE_HEADER, "")
        parts = [p for p in target.split("/") if p]
        # expected: fn/<namespace>/<name>
        if len(parts) != 3 or parts[0] != PROXY_PREFIX.strip("/"):
            return 404, {}, json.dumps({"error": f"unknown gRPC target {target!r}"}).encode()
        forwarded = {k: v for k, v in headers.items() if k != ROUTE_HEADER}
        return platform.proxy_invoke("GRPC", parts[1], parts[2], forwarded, body)

    return behavior


def start_mock(
    kind: PlatformKind | str,
    host: str = "127.0.0.1",
    port: int = 0,
    latency_model: LatencyModel | None = None,
    auth=None,
    default_backend=None,
) -> MockPlatformHandle:
    """Start one mock platform; Knative mocks also get a gRPC proxy on port+1."""
    kind = PlatformKind(kind)
    model = latency_model or LatencyModel()
    auth_header = None
    if auth is not None:
        from .adapters import render_auth_headers

        rendered = render_auth_headers(auth)
        auth_header = rendered.get("Authorization")

    platform = MockPlatform(kind, model, auth_header, default_backend)

    # The gRPC proxy lives on the management port + 1; with an ephemeral
    # management port the sibling may be taken, so retry on a fresh pair.
    attempts = 5 if port == 0 else 1
    http = None
    grpc_server = None
    grpc_port = None
    for attempt in range(attempts):
        http = start_http_server(_make_app(platform), host=host, port=port)
        if kind is not PlatformKind.KNATIVE:
            break
        try:
            grpc_server, grpc_port = start_grpc_server(
                _grpc_behavior(platform), host=host, port=http.port + 1
            )
            break
        except PortInUse:
            http.shutdown()
            http = None
            if attempt == attempts - 1:
                raise

    timer_stop = threading.Event()

    def sweep_loop():
        while not timer_stop.wait(_TIMER_INTERVAL_S):
            platform.sweep_idle()

    threading.Thread(target=sweep_loop, daemon=True, name=f"mock-sweep-{kind.value}").start()
    return MockPlatformHandle(platform, http, grpc_server, grpc_port, timer_stop)
