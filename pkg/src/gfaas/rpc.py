"""gRPC invocation plumbing shared by the shim, the mock platforms, and the invoker.

The service contract is the one emitted by the scaffolder as
``function.proto``: a single ``Invoke`` rpc on service ``gfaas.GFunction``
carrying header map + body in both directions. Messages are encoded with
:mod:`gfaas._protowire`, so no generated code is required at runtime.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent import futures

import grpc

from ._protowire import (
    decode_request,
    decode_response,
    encode_request,
    encode_response,
)
from .errors import GrpcUnavailable, PortInUse, RequestTimeout

INVOKE_METHOD = "/gfaas.GFunction/Invoke"
_SERVICE = "gfaas.GFunction"

# Mock platforms route proxied gRPC calls by this request header; the
# invoker fills it from the path portion of a mock invoke target.
ROUTE_HEADER = "x-gfaas-target"

CONNECT_TIMEOUT = 10.0

# behavior: (headers, body) -> (status, headers, body)
GrpcBehavior = Callable[[dict[str, str], bytes], tuple[int, dict[str, str], bytes]]


def start_grpc_server(
    behavior: GrpcBehavior,
    host: str = "127.0.0.1",
    port: int = 0,
    max_workers: int = 32,
) -> tuple[grpc.Server, int]:
    """Serve the Invoke rpc; returns (server, bound port)."""

    def invoke(request: tuple[dict[str, str], bytes], context) -> tuple[int, dict[str, str], bytes]:
        headers, body = request
        return behavior(headers, body)

    handler = grpc.method_handlers_generic_handler(
        _SERVICE,
        {
            "Invoke": grpc.unary_unary_rpc_method_handler(
                invoke,
                request_deserializer=decode_request,
                response_serializer=lambda r: encode_response(*r),
            )
        },
    )
    # SO_REUSEPORT would let two servers share a port; binding must fail
    # loudly instead so the port+1 pairing logic can detect collisions.
    server = grpc.server(
        futures.ThreadPoolExecutor(max_workers=max_workers),
        options=(("grpc.so_reuseport", 0),),
    )
    server.add_generic_rpc_handlers((handler,))
    try:
        bound = server.add_insecure_port(f"{host}:{port}")
    except RuntimeError as exc:
        raise PortInUse(f"cannot bind gRPC port {port}: {exc}") from exc
    if bound == 0:
        raise PortInUse(f"cannot bind gRPC port {port}")
    server.start()
    return server, bound


def split_target(target: str) -> tuple[str, str]:
    """Split 'host:port[/path]' into authority and path ('' when absent)."""
    if "/" in target:
        authority, _, path = target.partition("/")
        return authority, "/" + path
    return target, ""


def grpc_invoke(
    target: str,
    payload: bytes,
    headers: dict[str, str] | None = None,
    timeout: float = 60.0,
) -> tuple[int, dict[str, str], bytes]:
    """One Invoke call; returns (status, headers, body).

    ``target`` is a host:port authority, optionally followed by a routing
    path (mock platforms); the path travels in the route header.
    """
    authority, path = split_target(target)
    request_headers = dict(headers or {})
    if path:
        request_headers[ROUTE_HEADER] = path

    channel = grpc.insecure_channel(authority)
    try:
        try:
            grpc.channel_ready_future(channel).result(timeout=CONNECT_TIMEOUT)
        except grpc.FutureTimeoutError as exc:
            raise GrpcUnavailable(f"cannot reach gRPC target {authority}") from exc
        call = channel.unary_unary(
            INVOKE_METHOD,
            request_serializer=lambda r: encode_request(*r),
            response_deserializer=decode_response,
        )
        try:
            status, response_headers, body = call(
                (request_headers, payload), timeout=timeout
            )
        except grpc.RpcError as exc:
            code = exc.code() if hasattr(exc, "code") else None
            if code == grpc.StatusCode.DEADLINE_EXCEEDED:
                raise RequestTimeout(f"gRPC call to {authority} timed out") from exc
            if code == grpc.StatusCode.UNAVAILABLE:
                raise GrpcUnavailable(f"gRPC target {authority} unavailable") from exc
            raise GrpcUnavailable(f"gRPC call failed: {code}") from exc
        return status, response_headers, body
    finally:
        channel.close()
