"""Project scaffolding: template bundles, new-function generation, and
legacy-project adaptation.

Template bundles live under ``templates/<runtime>/<mode>/`` where mode is
``http``, ``grpc``, or ``adapter``. Each bundle carries a ``manifest.yml``
naming its files with content checksums and declaring the substitution
slots; a bundle that disagrees with its manifest is rejected rather than
silently used. The embedded copies mirror the remote layout, so offline
scaffolding behaves exactly like a download.
"""

from __future__ import annotations

import hashlib
import io
import re
import tarfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import requests
import yaml

from .config import Runtime, is_dns_label
from .errors import (
    CorruptTemplate,
    FileCollision,
    NetworkError,
    TargetNotEmpty,
    UnknownRuntime,
    ValidationError,
)

EMBEDDED = "embedded"
MODES = ("http", "grpc", "adapter")
MANIFEST_NAME = "manifest.yml"

_SLOT_RE = re.compile(r"\{\{([A-Za-z0-9_]+)\}\}")


def coerce_runtime(runtime: Runtime | str) -> Runtime:
    if isinstance(runtime, Runtime):
        return runtime
    try:
        return Runtime(runtime)
    except ValueError:
        supported = ", ".join(r.value for r in Runtime)
        raise UnknownRuntime(
            f"unknown runtime {runtime!r}; supported runtimes: {supported}"
        ) from None


@dataclass(frozen=True)
class TemplateBundle:
    """One validated template set for a runtime and mode."""

    runtime: Runtime
    mode: str
    version: int
    substitutions: tuple[str, ...]
    files: dict[str, str]

    def render(self, values: dict[str, str]) -> dict[str, str]:
        """Substitute all declared slots; every slot must receive a value."""
        missing = [s for s in self.substitutions if s not in values]
        if missing:
            raise ValidationError(
                missing[0], "no value provided for template substitution"
            )
        rendered = {}
        for path, content in self.files.items():
            for slot in self.substitutions:
                content = content.replace("{{" + slot + "}}", values[slot])
            rendered[path] = content
        return rendered


def _safe_relative(path: str) -> bool:
    if not path or path.startswith("/") or path.startswith("\\"):
        return False
    return ".." not in path.split("/")


def _bundle_from_files(
    runtime: Runtime, mode: str, raw: dict[str, bytes]
) -> TemplateBundle:
    """Validate a {relpath: bytes} map (including the manifest) into a bundle."""
    if MANIFEST_NAME not in raw:
        raise CorruptTemplate(f"{runtime.value}/{mode}: missing {MANIFEST_NAME}")
    try:
        manifest = yaml.safe_load(raw[MANIFEST_NAME].decode("utf-8"))
    except (yaml.YAMLError, UnicodeDecodeError) as exc:
        raise CorruptTemplate(f"{runtime.value}/{mode}: unreadable manifest") from exc
    if not isinstance(manifest, dict) or not isinstance(manifest.get("files"), dict):
        raise CorruptTemplate(f"{runtime.value}/{mode}: malformed manifest")

    substitutions = tuple(manifest.get("substitutions") or ())
    checksums: dict[str, str] = manifest["files"]
    files: dict[str, str] = {}
    for path, expected in checksums.items():
        if not _safe_relative(path):
            raise CorruptTemplate(f"{runtime.value}/{mode}: unsafe path {path!r}")
        if path not in raw:
            raise CorruptTemplate(f"{runtime.value}/{mode}: missing file {path}")
        actual = hashlib.sha256(raw[path]).hexdigest()
        if actual != expected:
            raise CorruptTemplate(
                f"{runtime.value}/{mode}: checksum mismatch for {path}"
            )
        files[path] = raw[path].decode("utf-8")
    extras = set(raw) - set(checksums) - {MANIFEST_NAME}
    if extras:
        raise CorruptTemplate(
            f"{runtime.value}/{mode}: files not in manifest: {', '.join(sorted(extras))}"
        )
    for path, content in files.items():
        undeclared = set(_SLOT_RE.findall(content)) - set(substitutions)
        if undeclared:
            raise CorruptTemplate(
                f"{runtime.value}/{mode}: {path} uses undeclared slots: "
                f"{', '.join(sorted(undeclared))}"
            )
    return TemplateBundle(
        runtime=runtime,
        mode=mode,
        version=int(manifest.get("version", 1)),
        substitutions=substitutions,
        files=files,
    )


def _load_embedded(runtime: Runtime, mode: str) -> dict[str, bytes]:
    root = resources.files("gfaas").joinpath(f"templates/{runtime.value}/{mode}")
    if not root.is_dir():
        raise CorruptTemplate(
            f"no embedded template bundle for {runtime.value}/{mode}"
        )
    raw: dict[str, bytes] = {}

    def walk(node, prefix: str) -> None:
        for entry in node.iterdir():
            rel = f"{prefix}{entry.name}"
            if entry.is_dir():
                walk(entry, rel + "/")
            else:
                raw[rel] = entry.read_bytes()

    walk(root, "")
    return raw


def _load_remote(source: str, runtime: Runtime, mode: str) -> dict[str, bytes]:
    try:
        response = requests.get(source, timeout=(10, 60))
        response.raise_for_status()
    except requests.RequestException as exc:
        raise NetworkError(
            f"cannot fetch templates from {source}: {exc}; "
            "pass --offline to use the embedded templates"
        ) from exc
    prefix = f"templates/{runtime.value}/{mode}/"
    raw: dict[str, bytes] = {}
    try:
        with tarfile.open(fileobj=io.BytesIO(response.content), mode="r:*") as archive:
            for member in archive.getmembers():
                if not member.isfile():
                    continue
                name = member.name.lstrip("./")
                if not name.startswith(prefix):
                    continue
                rel = name[len(prefix):]
                if not _safe_relative(rel):
                    continue
                extracted = archive.extractfile(member)
                if extracted is not None:
                    raw[rel] = extracted.read()
    except tarfile.TarError as exc:
        raise CorruptTemplate(f"template archive from {source} is unreadable") from exc
    if not raw:
        raise CorruptTemplate(
            f"archive from {source} has no bundle for {runtime.value}/{mode}"
        )
    return raw


def fetch_templates(
    source: str, runtime: Runtime | str, mode: str = "http"
) -> TemplateBundle:
    """Load and validate one bundle from "embedded" or an archive URL."""
    runtime = coerce_runtime(runtime)
    if mode not in MODES:
        raise ValueError(f"unknown template mode {mode!r}; expected one of {MODES}")
    if source == EMBEDDED:
        raw = _load_embedded(runtime, mode)
    else:
        raw = _load_remote(source, runtime, mode)
    return _bundle_from_files(runtime, mode, raw)


def _write_rendered(base: Path, rendered: dict[str, str]) -> list[Path]:
    created = []
    for rel in sorted(rendered):
        target = base / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(rendered[rel])
        created.append(target)
    return created


def new_function(
    name: str,
    runtime: Runtime | str,
    is_grpc: bool = False,
    target_dir: str | Path = ".",
    source: str = EMBEDDED,
) -> list[Path]:
    """Generate a fresh function project; refuses non-empty targets."""
    if not is_dns_label(name):
        raise ValidationError(
            "name", "must be a DNS label (lowercase alphanumeric and '-')"
        )
    runtime = coerce_runtime(runtime)
    bundle = fetch_templates(source, runtime, "grpc" if is_grpc else "http")

    target = Path(target_dir)
    if target.exists():
        if not target.is_dir():
            raise TargetNotEmpty(f"{target} exists and is not a directory")
        if any(target.iterdir()):
            raise TargetNotEmpty(f"target directory {target} is not empty")
    # Render first so a bad bundle cannot leave a half-written project.
    rendered = bundle.render({"name": name})
    target.mkdir(parents=True, exist_ok=True)
    return _write_rendered(target, rendered)


def _project_label(project: Path) -> str:
    cleaned = re.sub(r"[^a-z0-9-]", "-", project.resolve().name.lower()).strip("-")
    return cleaned[:63] if cleaned else "function"


def adapt_project(
    project_dir: str | Path,
    runtime: Runtime | str,
    source: str = EMBEDDED,
) -> list[Path]:
    """Add adapter shim files to a legacy project; never touches existing files."""
    project = Path(project_dir)
    if not project.is_dir():
        raise ValidationError("projectDir", f"{project} is not a directory")
    runtime = coerce_runtime(runtime)
    bundle = fetch_templates(source, runtime, "adapter")
    rendered = bundle.render({"name": _project_label(project)})

    collisions = sorted(rel for rel in rendered if (project / rel).exists())
    if collisions:
        raise FileCollision(
            "refusing to overwrite existing files: " + ", ".join(collisions)
        )
    return _write_rendered(project, rendered)
