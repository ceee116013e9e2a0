"""Build function images and push them to a registry.

The engine behind :func:`build_image` and :func:`push_image` is a small
port with two implementations: the real container engine reached over its
local-socket HTTP API, and a deterministic in-process fake for hermetic
tests. The fake hashes the build context, so identical contexts always
produce identical digests, and its paired registry records what was pushed
with which credentials.

Credentials never appear in logs or error messages.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import re
import socket
import tarfile
import threading
from collections.abc import Callable
from dataclasses import dataclass, replace
from http.client import HTTPConnection
from pathlib import Path

from .errors import BuildFailed, EngineUnavailable, MissingBuildFile, PushFailed

log = logging.getLogger(__name__)

BUILD_FILE_NAMES = ("Dockerfile", "Containerfile")
DOCKER_SOCKET_ENV = "GFAAS_DOCKER_SOCKET"
DEFAULT_DOCKER_SOCKET = "/var/run/docker.sock"

_DIGEST_RE = re.compile(r"^sha256:[0-9a-f]{64}$")
_TAG_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9._-]{0,127}$")

ProgressFn = Callable[[str], None]


@dataclass(frozen=True)
class ImageRef:
    """Parsed OCI image reference: registry/repository:tag[@sha256:...]."""

    registry: str
    repository: str
    tag: str = "latest"
    digest: str | None = None

    def __post_init__(self):
        if not self.repository:
            raise ValueError("image repository must be non-empty")
        if not _TAG_RE.match(self.tag):
            raise ValueError(f"invalid image tag {self.tag!r}")
        if self.digest is not None and not _DIGEST_RE.match(self.digest):
            raise ValueError("digest must be sha256: followed by 64 hex chars")

    @classmethod
    def parse(cls, text: str) -> "ImageRef":
        digest = None
        if "@" in text:
            text, _, digest = text.partition("@")
        registry = ""
        rest = text
        first, _, remainder = text.partition("/")
        # Docker heuristic: the first segment is a registry host when it
        # looks like one (dot, port, or "localhost").
        if remainder and ("." in first or ":" in first or first == "localhost"):
            registry, rest = first, remainder
        repository, _, tag = rest.partition(":")
        return cls(
            registry=registry,
            repository=repository,
            tag=tag or "latest",
            digest=digest,
        )

    def canonical(self) -> str:
        prefix = f"{self.registry}/" if self.registry else ""
        suffix = f"@{self.digest}" if self.digest else ""
        return f"{prefix}{self.repository}:{self.tag}{suffix}"

    def name(self) -> str:
        """Reference without the digest, as an engine tags it."""
        prefix = f"{self.registry}/" if self.registry else ""
        return f"{prefix}{self.repository}:{self.tag}"


@dataclass(frozen=True)
class RegistryCredentials:
    registry: str
    username: str
    secret: str

    def __post_init__(self):
        if not self.registry:
            raise ValueError("registry host must be non-empty")

    def __repr__(self) -> str:  # keep the secret out of logs and tracebacks
        return f"RegistryCredentials(registry={self.registry!r}, username={self.username!r})"


def find_build_file(context_dir: Path) -> Path:
    for name in BUILD_FILE_NAMES:
        candidate = context_dir / name
        if candidate.is_file():
            return candidate
    raise MissingBuildFile(
        f"no container build file ({' or '.join(BUILD_FILE_NAMES)}) in {context_dir}"
    )


def build_image(engine, context_dir: Path | str, ref: ImageRef) -> ImageRef:
    """Build the context into an image tagged ``ref``; returns ref + digest."""
    context_dir = Path(context_dir)
    if not context_dir.is_dir():
        raise MissingBuildFile(f"build context {context_dir} does not exist")
    find_build_file(context_dir)
    digest = engine.build(context_dir, ref)
    return replace(ref, digest=digest)


def push_image(
    engine,
    ref: ImageRef,
    creds: RegistryCredentials | None = None,
    progress: ProgressFn | None = None,
) -> ImageRef:
    """Push a locally built image; returns the ref with the pushed digest."""
    digest = engine.push(ref, creds, progress or (lambda line: None))
    return replace(ref, digest=digest)


# --- deterministic fake, for hermetic tests and the --engine fake CLI path ---


class FakeRegistry:
    """In-process registry: digest store plus a record of observed auth."""

    def __init__(self):
        self._store: dict[str, str] = {}
        self.auth_seen: list[str | None] = []
        self._lock = threading.Lock()

    def put(self, ref: ImageRef, digest: str, auth_header: str | None) -> None:
        with self._lock:
            self._store[ref.name()] = digest
            self.auth_seen.append(auth_header)

    def pull_digest(self, ref: ImageRef) -> str | None:
        with self._lock:
            return self._store.get(ref.name())


class FakeEngine:
    """Hashes the build context instead of building; fully deterministic."""

    def __init__(self, registry: FakeRegistry | None = None):
        self.registry = registry or FakeRegistry()
        self._images: dict[str, str] = {}
        self._lock = threading.Lock()

    def build(self, context_dir: Path, ref: ImageRef) -> str:
        digest = "sha256:" + _hash_context(context_dir)
        with self._lock:
            self._images[ref.name()] = digest
        return digest

    def push(self, ref: ImageRef, creds, progress: ProgressFn) -> str:
        with self._lock:
            digest = self._images.get(ref.name())
        if digest is None:
            raise PushFailed(f"image {ref.name()} not found in local store")
        auth_header = None
        if creds is not None:
            import base64

            raw = f"{creds.username}:{creds.secret}".encode()
            auth_header = "Basic " + base64.b64encode(raw).decode("ascii")
        progress(f"pushing {ref.name()}")
        self.registry.put(ref, digest, auth_header)
        progress("done")
        return digest


def _hash_context(context_dir: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(context_dir.rglob("*")):
        if not path.is_file():
            continue
        h.update(str(path.relative_to(context_dir)).encode())
        h.update(b"\0")
        h.update(path.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


_fake_engine: FakeEngine | None = None
_fake_lock = threading.Lock()


def fake_engine() -> FakeEngine:
    """Process-wide fake engine so build and push share one image store."""
    global _fake_engine
    with _fake_lock:
        if _fake_engine is None:
            _fake_engine = FakeEngine()
        return _fake_engine


def reset_fake_engine() -> None:
    global _fake_engine
    with _fake_lock:
        _fake_engine = None


# --- real engine over the local-socket HTTP API -------------------------------


class _UnixSocketConnection(HTTPConnection):
    def __init__(self, socket_path: str, timeout: float):
        super().__init__("localhost", timeout=timeout)
        self._socket_path = socket_path

    def connect(self):
        sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        sock.settimeout(self.timeout)
        sock.connect(self._socket_path)
        self.sock = sock


class DockerEngine:
    """Talks to a Docker-compatible engine over its local socket.

    One build at a time per process; pushes may run concurrently.
    """

    def __init__(self, socket_path: str | None = None, timeout: float = 600.0):
        self.socket_path = socket_path or os.environ.get(
            DOCKER_SOCKET_ENV, DEFAULT_DOCKER_SOCKET
        )
        self.timeout = timeout
        self._build_lock = threading.Lock()

    def _request(self, method: str, path: str, body: bytes = b"", headers=None):
        conn = _UnixSocketConnection(self.socket_path, self.timeout)
        try:
            conn.request(method, path, body=body or None, headers=headers or {})
            response = conn.getresponse()
            return response.status, response.read()
        except OSError as exc:
            raise EngineUnavailable(
                f"cannot reach container engine at {self.socket_path}: {exc}"
            ) from exc
        finally:
            conn.close()

    def build(self, context_dir: Path, ref: ImageRef) -> str:
        buffer = io.BytesIO()
        with tarfile.open(fileobj=buffer, mode="w") as tar:
            tar.add(context_dir, arcname=".")
        from urllib.parse import quote

        with self._build_lock:
            status, payload = self._request(
                "POST",
                f"/build?t={quote(ref.name(), safe='')}",
                body=buffer.getvalue(),
                headers={"Content-Type": "application/x-tar"},
            )
        lines = payload.decode("utf-8", errors="replace").splitlines()
        errors = [line for line in lines if '"error"' in line]
        if status >= 400 or errors:
            raise BuildFailed(
                f"build of {ref.name()} failed", log_tail="\n".join(lines[-20:])
            )
        status, payload = self._request(
            "GET", f"/images/{quote(ref.name(), safe='')}/json"
        )
        if status >= 400:
            raise BuildFailed(f"built image {ref.name()} not found after build")
        return json.loads(payload)["Id"]

    def push(self, ref: ImageRef, creds, progress: ProgressFn) -> str:
        from urllib.parse import quote

        headers = {}
        if creds is not None:
            import base64

            auth = {
                "username": creds.username,
                "password": creds.secret,
                "serveraddress": creds.registry,
            }
            headers["X-Registry-Auth"] = base64.b64encode(
                json.dumps(auth).encode()
            ).decode("ascii")
        name = quote(f"{ref.registry}/{ref.repository}" if ref.registry else ref.repository, safe="")
        status, payload = self._request(
            "POST", f"/images/{name}/push?tag={quote(ref.tag, safe='')}", headers=headers
        )
        lines = payload.decode("utf-8", errors="replace").splitlines()
        for line in lines:
            progress(line)
        if status >= 400 or any('"error"' in line for line in lines):
            raise PushFailed(f"push of {ref.name()} was rejected by the registry")
        status, payload = self._request(
            "GET", f"/images/{quote(ref.name(), safe='')}/json"
        )
        if status < 400:
            digests = json.loads(payload).get("RepoDigests") or []
            for entry in digests:
                if "@" in entry:
                    return entry.rpartition("@")[2]
        return ref.digest or ""


def make_engine(name: str):
    """Engine selection for the CLI: 'docker' (default) or 'fake'."""
    if name == "fake":
        return fake_engine()
    if name == "docker":
        return DockerEngine()
    raise ValueError(f"unknown engine {name!r}; expected 'docker' or 'fake'")
