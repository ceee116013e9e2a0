"""Minimal threaded HTTP server shared by the runtime shim and the mock platforms.

The application callback receives (method, path, headers, body) and returns
(status, headers, body). Connections are HTTP/1.1 with keep-alive;
responses always carry Content-Length. Shutdown stops the listener first,
then waits up to the drain deadline for in-flight requests to finish.
"""

from __future__ import annotations

import errno
import logging
import threading
from collections.abc import Callable
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import PortInUse

log = logging.getLogger(__name__)

WsgiLike = Callable[[str, str, dict[str, str], bytes], tuple[int, dict[str, str], bytes]]

_HOP_HEADERS = {"content-length", "connection", "transfer-encoding"}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    timeout = 30
    # Buffer the whole response and skip Nagle so a status line, headers,
    # and a small body leave as one segment; unbuffered writes on keep-alive
    # connections otherwise hit the 40 ms delayed-ACK stall under load.
    wbufsize = -1
    disable_nagle_algorithm = True

    def _dispatch(self) -> None:
        server: _Httpd = self.server  # type: ignore[assignment]
        with server.track_request():
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length > 0 else b""
            try:
                status, headers, out = server.app(
                    self.command, self.path, dict(self.headers), body
                )
            except Exception:
                log.exception("unhandled error in HTTP application")
                status, headers, out = 500, {}, b"internal error"
            self.send_response(status)
            for key, value in headers.items():
                if key.lower() not in _HOP_HEADERS:
                    self.send_header(key, value)
            self.send_header("Content-Length", str(len(out)))
            if server.closing:
                self.send_header("Connection", "close")
                self.close_connection = True
            self.end_headers()
            if self.command != "HEAD":
                self.wfile.write(out)

    do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = do_HEAD = _dispatch

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        log.debug("%s - %s", self.address_string(), format % args)


class _Httpd(ThreadingHTTPServer):
    daemon_threads = True
    block_on_close = False
    # Deep accept backlog: bursts of concurrent connections (load tests)
    # must queue rather than get reset.
    request_queue_size = 1024

    def __init__(self, address: tuple[str, int], app: WsgiLike):
        self.app = app
        self.closing = False
        self._active = 0
        self._drained = threading.Condition()
        super().__init__(address, _Handler)

    def track_request(self):
        return _RequestTracker(self)


class _RequestTracker:
    def __init__(self, server: _Httpd):
        self._server = server

    def __enter__(self):
        with self._server._drained:
            self._server._active += 1
        return self

    def __exit__(self, *exc):
        with self._server._drained:
            self._server._active -= 1
            if self._server._active == 0:
                self._server._drained.notify_all()
        return False


class HttpServerHandle:
    """Running server; ``shutdown`` is idempotent."""

    def __init__(self, server: _Httpd, thread: threading.Thread):
        self._server = server
        self._thread = thread
        self._closed = False
        self._lock = threading.Lock()

    @property
    def host(self) -> str:
        return self._server.server_address[0]

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def shutdown(self, drain_seconds: float = 5.0) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
        self._server.closing = True
        self._server.shutdown()
        self._thread.join(timeout=drain_seconds)
        with self._server._drained:
            if self._server._active > 0:
                self._server._drained.wait(timeout=drain_seconds)
        self._server.server_close()


def start_http_server(app: WsgiLike, host: str = "127.0.0.1", port: int = 0) -> HttpServerHandle:
    """Bind, start serving on a daemon thread, and return the handle."""
    try:
        server = _Httpd((host, port), app)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUse(f"port {port} is already in use") from exc
        raise
    # Tight poll interval: shutdown() blocks until serve_forever notices,
    # and test suites start and stop servers constantly.
    thread = threading.Thread(
        target=lambda: server.serve_forever(poll_interval=0.02),
        daemon=True,
        name=f"httpd:{server.server_address[1]}",
    )
    thread.start()
    return HttpServerHandle(server, thread)
