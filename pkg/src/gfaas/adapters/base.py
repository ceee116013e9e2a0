"""Uniform service interface over the four FaaS platforms.

Everything outside this package talks to platforms exclusively through
:class:`FaaSService` and the neutral types below; platform-specific
request shapes never leak. Rendering is pure (no I/O) and deterministic:
the same config always produces a byte-identical body.
"""

from __future__ import annotations

import base64
import json
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

from ..config import (
    BasicAuth,
    BearerAuth,
    FunctionConfig,
    PlatformConfig,
    PlatformKind,
    ScalePolicy,
    apply_scale_defaults,
)
from ..errors import ConflictError, UnsupportedFeature
from .transport import HttpTransport, raise_for_status

MOCK_PROXY_PREFIX = "/fn"
GRPC_PORT_OFFSET = 1


@dataclass(frozen=True)
class PlatformRequest:
    """A fully rendered management-API call."""

    method: str
    path: str
    headers: dict[str, str] = field(default_factory=dict)
    body: dict | None = None

    def body_bytes(self) -> bytes:
        """Canonical serialization; identical bodies serialize identically."""
        if self.body is None:
            return b""
        return json.dumps(self.body, sort_keys=True, separators=(",", ":")).encode()


@dataclass(frozen=True)
class FunctionSummary:
    """Normalized listing entry, identical in shape across platforms."""

    name: str
    namespace: str
    image: str
    replicas: int
    ready: bool
    platform: PlatformKind


@dataclass(frozen=True)
class DeploymentRecord:
    name: str
    platform: PlatformKind
    invoke_url: str
    timestamp: float
    is_grpc: bool


def render_auth_headers(auth) -> dict[str, str]:
    """RFC 7617 for basic credentials, ``Bearer <token>`` for tokens."""
    if isinstance(auth, BasicAuth):
        raw = f"{auth.username}:{auth.password}".encode()
        return {"Authorization": "Basic " + base64.b64encode(raw).decode("ascii")}
    if isinstance(auth, BearerAuth):
        return {"Authorization": f"Bearer {auth.token}"}
    return {}


class FaaSService(ABC):
    """Abstract platform service: deploy, list, delete, resolve, render.

    Instances are immutable after construction and safe to share across
    threads. ``mock`` switches invoke-URL resolution to the mock platform's
    uniform proxy scheme.
    """

    kind: PlatformKind

    def __init__(
        self,
        platform: PlatformConfig,
        transport: HttpTransport | None = None,
        mock: bool = False,
    ):
        if platform.kind is not self.kind:
            raise ValueError(f"platform config is for {platform.kind.value}")
        self.platform = platform
        self.mock = mock
        self._transport = transport or HttpTransport(platform.management_url())

    # --- rendering (pure) ---------------------------------------------------

    def render_deployment(self, fn: FunctionConfig) -> PlatformRequest:
        """Render the create request for this platform. Pure; no I/O."""
        if fn.is_grpc and self.kind is not PlatformKind.KNATIVE:
            raise UnsupportedFeature(
                f"gRPC functions are supported on knative only, not {self.kind.value}"
            )
        fn = apply_scale_defaults(fn, self.kind)
        return self._render(fn, fn.scale[self.kind])

    @abstractmethod
    def _render(self, fn: FunctionConfig, scale: ScalePolicy) -> PlatformRequest:
        ...

    @abstractmethod
    def _update_request(self, fn: FunctionConfig, request: PlatformRequest) -> PlatformRequest:
        """The update-in-place variant of a rendered create request."""

    # --- management operations ------------------------------------------------

    def _send(self, request: PlatformRequest, context: str):
        headers = dict(request.headers)
        headers.update(render_auth_headers(self.platform.auth))
        body = request.body_bytes() if request.body is not None else None
        if body:
            headers.setdefault("Content-Type", "application/json")
        response = self._transport.send(request.method, request.path, headers, body)
        return raise_for_status(response, context)

    def deploy(self, fn: FunctionConfig) -> DeploymentRecord:
        """Create-or-update the function; returns the resolved invoke URL."""
        request = self.render_deployment(fn)
        try:
            self._send(request, f"deploy {fn.name}")
        except ConflictError:
            self._send(self._update_request(fn, request), f"update {fn.name}")
        trigger = "grpc" if fn.is_grpc else "http"
        return DeploymentRecord(
            name=fn.name,
            platform=self.kind,
            invoke_url=self.resolve_invoke_url(fn.name, fn.namespace, trigger),
            timestamp=time.time(),
            is_grpc=fn.is_grpc,
        )

    def list_functions(self) -> list[FunctionSummary]:
        request = self._list_request()
        response = self._send(request, "list functions")
        return self._parse_list(response.json())

    @abstractmethod
    def _list_request(self) -> PlatformRequest:
        ...

    @abstractmethod
    def _parse_list(self, doc) -> list[FunctionSummary]:
        ...

    def delete_function(self, name: str, namespace: str = "default") -> None:
        self._send(self._delete_request(name, namespace), f"delete {name}")

    @abstractmethod
    def _delete_request(self, name: str, namespace: str) -> PlatformRequest:
        ...

    # --- invoke-URL resolution ---------------------------------------------

    def resolve_invoke_url(
        self, name: str, namespace: str = "default", trigger: str = "http"
    ) -> str:
        """Absolute URL for http, host:port authority for grpc."""
        if trigger not in ("http", "grpc"):
            raise ValueError(f"unknown trigger {trigger!r}")
        if trigger == "grpc" and self.kind is not PlatformKind.KNATIVE:
            raise UnsupportedFeature(
                f"gRPC invocation is supported on knative only, not {self.kind.value}"
            )
        if self.mock:
            return self._mock_invoke_url(name, namespace, trigger)
        return self._real_invoke_url(name, namespace, trigger)

    def _mock_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        p = self.platform
        path = f"{MOCK_PROXY_PREFIX}/{namespace}/{name}"
        if trigger == "grpc":
            return f"{p.management_host}:{p.management_port + GRPC_PORT_OFFSET}{path}"
        return f"{p.scheme}://{p.management_host}:{p.management_port}{path}"

    @abstractmethod
    def _real_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        ...
