"""HTTP transport used by the platform adapters.

One instance per management endpoint. Connect timeout 10 s, request
timeout 60 s, no retries on mutating calls, up to 2 retries on idempotent
GETs. Maps request failures onto the shared error types.
"""

from __future__ import annotations

from dataclasses import dataclass

import requests

from ..errors import (
    AuthError,
    ConflictError,
    NetworkError,
    NotFoundError,
    PlatformError,
    RequestTimeout,
)

CONNECT_TIMEOUT = 10.0
REQUEST_TIMEOUT = 60.0
GET_RETRIES = 2


@dataclass(frozen=True)
class TransportResponse:
    status: int
    headers: dict[str, str]
    body: bytes

    def json(self):
        import json

        return json.loads(self.body.decode("utf-8")) if self.body else None


class HttpTransport:
    def __init__(self, base_url: str, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self._session = session or requests.Session()

    def send(
        self,
        method: str,
        path: str,
        headers: dict[str, str] | None = None,
        body: bytes | None = None,
    ) -> TransportResponse:
        url = self.base_url + path
        attempts = 1 + (GET_RETRIES if method == "GET" else 0)
        last_exc: Exception | None = None
        for _ in range(attempts):
            try:
                response = self._session.request(
                    method,
                    url,
                    headers=headers or {},
                    data=body,
                    timeout=(CONNECT_TIMEOUT, REQUEST_TIMEOUT),
                    allow_redirects=False,
                )
                return TransportResponse(
                    status=response.status_code,
                    headers=dict(response.headers),
                    body=response.content,
                )
            except requests.Timeout as exc:
                raise RequestTimeout(f"{method} {url} timed out") from exc
            except requests.RequestException as exc:
                last_exc = exc
        raise NetworkError(f"cannot reach {url}: {last_exc}") from last_exc

    def close(self) -> None:
        self._session.close()


def raise_for_status(response: TransportResponse, context: str) -> TransportResponse:
    """Translate error statuses into typed exceptions; pass 2xx through."""
    status = response.status
    if status < 400:
        return response
    excerpt = response.body[:200].decode("utf-8", errors="replace")
    if status in (401, 403):
        raise AuthError(f"{context}: platform rejected credentials ({status})")
    if status == 404:
        raise NotFoundError(f"{context}: not found")
    if status == 409:
        raise ConflictError(f"{context}: already exists")
    raise PlatformError(status, f"{context}: {excerpt}")
