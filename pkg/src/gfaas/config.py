"""Function and platform configuration: parsing, validation, defaults, serialization.

Both configuration files are YAML 1.2 documents. ``parse_function_config``
and ``parse_platform_config`` are total over arbitrary input text: they
return a validated config or raise one of the structured errors from
:mod:`gfaas.errors`, never an unhandled exception. Every ValidationError
names the dotted path of the offending field.

Unknown keys are errors in strict mode and logged warnings otherwise.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from enum import Enum

import yaml

from .errors import (
    AmbiguousAuthError,
    ConfigSyntaxError,
    UnknownFieldError,
    ValidationError,
)
from .units import (
    format_cpu,
    format_duration,
    format_memory,
    parse_cpu,
    parse_duration,
    parse_memory,
)

log = logging.getLogger(__name__)

DNS_LABEL_MAX = 63
_DNS_LABEL_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789-")

FUNCTION_CONFIG_FILENAME = "function-config.yml"
PLATFORM_CONFIG_FILENAME = "platform-config.yml"


class PlatformKind(str, Enum):
    KNATIVE = "knative"
    OPENFAAS = "openfaas"
    FISSION = "fission"
    NUCLIO = "nuclio"


class Runtime(str, Enum):
    JAVA = "java"
    NODEJS = "nodejs"
    PYTHON = "python"
    GO = "go"
    CPP = "cpp"


def is_dns_label(value: str) -> bool:
    if not value or len(value) > DNS_LABEL_MAX:
        return False
    if value[0] == "-" or value[-1] == "-":
        return False
    return all(ch in _DNS_LABEL_CHARS for ch in value)


@dataclass(frozen=True)
class ResourceSpec:
    """CPU in millicores, memory in bytes; None means platform default."""

    cpu_request: int | None = None
    cpu_limit: int | None = None
    mem_request: int | None = None
    mem_limit: int | None = None

    def is_empty(self) -> bool:
        return all(
            v is None
            for v in (self.cpu_request, self.cpu_limit, self.mem_request, self.mem_limit)
        )


@dataclass(frozen=True)
class ScalePolicy:
    """Replica bounds plus the idle period before scaling to zero (seconds)."""

    min_replicas: int
    max_replicas: int
    scale_to_zero_duration: int | None = None


@dataclass(frozen=True)
class BasicAuth:
    username: str
    password: str


@dataclass(frozen=True)
class BearerAuth:
    token: str


@dataclass(frozen=True)
class NoAuth:
    pass


AuthMethod = BasicAuth | BearerAuth | NoAuth


@dataclass(frozen=True)
class PlatformConfig:
    """How to reach and authenticate against one platform's management API."""

    kind: PlatformKind
    management_host: str
    management_port: int
    auth: AuthMethod = field(default_factory=NoAuth)
    use_tls: bool = False

    @property
    def scheme(self) -> str:
        return "https" if self.use_tls else "http"

    def management_url(self) -> str:
        return f"{self.scheme}://{self.management_host}:{self.management_port}"


@dataclass(frozen=True)
class FunctionConfig:
    """Platform-independent description of one function."""

    name: str
    runtime: Runtime
    image: str
    registry: str
    namespace: str = "default"
    resources: ResourceSpec = field(default_factory=ResourceSpec)
    scale: dict[PlatformKind, ScalePolicy] = field(default_factory=dict)
    is_grpc: bool = False
    env: dict[str, str] = field(default_factory=dict)

    def full_image(self) -> str:
        """Image reference including the registry prefix."""
        return f"{self.registry}/{self.image}"


# Out-of-box autoscaler defaults per platform, applied when the user's scale
# map has no entry for the target platform. Sources are recorded in
# docs/platform-api-notes.md; tests pin these values.
DEFAULT_SCALE_POLICIES: dict[PlatformKind, ScalePolicy] = {
    PlatformKind.KNATIVE: ScalePolicy(0, 10, 60),
    PlatformKind.OPENFAAS: ScalePolicy(1, 20, None),
    PlatformKind.FISSION: ScalePolicy(0, 1, 120),
    PlatformKind.NUCLIO: ScalePolicy(1, 1, None),
}

_FUNCTION_KEYS = {
    "name", "namespace", "runtime", "image", "registry",
    "resources", "scale", "isGrpc", "env",
}
_RESOURCE_KEYS = {"cpuRequest", "cpuLimit", "memRequest", "memLimit"}
_SCALE_KEYS = {"minReplicas", "maxReplicas", "scaleToZeroDuration"}
_PLATFORM_KEYS = {"kind", "managementHost", "managementPort", "auth", "useTls"}


def _load_yaml_mapping(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigSyntaxError(f"malformed YAML: {exc}") from exc
    if doc is None:
        raise ConfigSyntaxError("document is empty")
    if not isinstance(doc, dict):
        raise ConfigSyntaxError("document root must be a mapping")
    return doc


def _check_unknown_keys(doc: dict, allowed: set[str], prefix: str, strict: bool) -> None:
    for key in doc:
        key_name = key if isinstance(key, str) else repr(key)
        if key_name not in allowed:
            path = f"{prefix}.{key_name}" if prefix else key_name
            if strict:
                raise UnknownFieldError(path, "unrecognized key")
            log.warning("ignoring unrecognized key %s", path)


def _require_str(doc: dict, key: str, prefix: str = "") -> str:
    path = f"{prefix}.{key}" if prefix else key
    if key not in doc:
        raise ValidationError(path, "required field is missing")
    value = doc[key]
    if not isinstance(value, str) or not value:
        raise ValidationError(path, "must be a non-empty string")
    return value


def _dns_label(value: str, path: str) -> str:
    if not is_dns_label(value):
        raise ValidationError(
            path,
            "must be a DNS label (lowercase alphanumeric and '-', at most "
            f"{DNS_LABEL_MAX} chars)",
        )
    return value


def _parse_resources(doc: object, strict: bool) -> ResourceSpec:
    if doc is None:
        return ResourceSpec()
    if not isinstance(doc, dict):
        raise ValidationError("resources", "must be a mapping")
    _check_unknown_keys(doc, _RESOURCE_KEYS, "resources", strict)

    def quantity(key: str, parser) -> int | None:
        if key not in doc or doc[key] is None:
            return None
        try:
            return parser(doc[key])
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"resources.{key}", str(exc)) from exc

    spec = ResourceSpec(
        cpu_request=quantity("cpuRequest", parse_cpu),
        cpu_limit=quantity("cpuLimit", parse_cpu),
        mem_request=quantity("memRequest", parse_memory),
        mem_limit=quantity("memLimit", parse_memory),
    )
    if (
        spec.cpu_request is not None
        and spec.cpu_limit is not None
        and spec.cpu_request > spec.cpu_limit
    ):
        raise ValidationError("resources.cpuRequest", "request exceeds limit")
    if (
        spec.mem_request is not None
        and spec.mem_limit is not None
        and spec.mem_request > spec.mem_limit
    ):
        raise ValidationError("resources.memRequest", "request exceeds limit")
    return spec


def _parse_scale_policy(doc: object, path: str, strict: bool) -> ScalePolicy:
    if not isinstance(doc, dict):
        raise ValidationError(path, "must be a mapping")
    _check_unknown_keys(doc, _SCALE_KEYS, path, strict)

    def integer(key: str, minimum: int) -> int:
        p = f"{path}.{key}"
        if key not in doc:
            raise ValidationError(p, "required field is missing")
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(p, "must be an integer")
        if value < minimum:
            raise ValidationError(p, f"must be >= {minimum}")
        return value

    min_replicas = integer("minReplicas", 0)
    max_replicas = integer("maxReplicas", 1)
    if min_replicas > max_replicas:
        raise ValidationError(f"{path}.minReplicas", "exceeds maxReplicas")

    duration = None
    if doc.get("scaleToZeroDuration") is not None:
        try:
            duration = parse_duration(doc["scaleToZeroDuration"])
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"{path}.scaleToZeroDuration", str(exc)) from exc
    if min_replicas == 0 and duration is None:
        raise ValidationError(
            f"{path}.scaleToZeroDuration", "required when minReplicas is 0"
        )
    return ScalePolicy(min_replicas, max_replicas, duration)


def _parse_scale(doc: object, strict: bool) -> dict[PlatformKind, ScalePolicy]:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ValidationError("scale", "must be a mapping keyed by platform")
    scale: dict[PlatformKind, ScalePolicy] = {}
    for key, policy_doc in doc.items():
        try:
            kind = PlatformKind(key)
        except ValueError:
            path = f"scale.{key}"
            if strict:
                raise UnknownFieldError(path, "not a supported platform") from None
            log.warning("ignoring scale entry for unknown platform %s", key)
            continue
        scale[kind] = _parse_scale_policy(policy_doc, f"scale.{kind.value}", strict)
    return scale


def _parse_env(doc: object) -> dict[str, str]:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ValidationError("env", "must be a mapping")
    env: dict[str, str] = {}
    for key, value in doc.items():
        if not isinstance(key, str) or not key:
            raise ValidationError("env", f"invalid variable name {key!r}")
        if not isinstance(value, str):
            raise ValidationError(f"env.{key}", "value must be a string")
        env[key] = value
    return env


def parse_function_config(text: str, strict: bool = False) -> FunctionConfig:
    """Parse and validate a function configuration document."""
    doc = _load_yaml_mapping(text)
    # "is_gRPC" is accepted as a spelling variant of isGrpc.
    if "is_gRPC" in doc and "isGrpc" not in doc:
        doc["isGrpc"] = doc.pop("is_gRPC")
    _check_unknown_keys(doc, _FUNCTION_KEYS, "", strict)

    name = _dns_label(_require_str(doc, "name"), "name")
    namespace = doc.get("namespace", "default")
    if not isinstance(namespace, str):
        raise ValidationError("namespace", "must be a string")
    namespace = _dns_label(namespace, "namespace")

    runtime_text = _require_str(doc, "runtime")
    try:
        runtime = Runtime(runtime_text)
    except ValueError:
        supported = ", ".join(r.value for r in Runtime)
        raise ValidationError("runtime", f"must be one of: {supported}") from None

    image = _require_str(doc, "image")
    registry = _require_str(doc, "registry")

    is_grpc = doc.get("isGrpc", False)
    if not isinstance(is_grpc, bool):
        raise ValidationError("isGrpc", "must be a boolean")

    return FunctionConfig(
        name=name,
        namespace=namespace,
        runtime=runtime,
        image=image,
        registry=registry,
        resources=_parse_resources(doc.get("resources"), strict),
        scale=_parse_scale(doc.get("scale"), strict),
        is_grpc=is_grpc,
        env=_parse_env(doc.get("env")),
    )


def _parse_auth(doc: object, strict: bool) -> AuthMethod:
    if doc is None:
        return NoAuth()
    if not isinstance(doc, dict):
        raise ValidationError("auth", "must be a mapping")
    _check_unknown_keys(doc, {"basic", "bearer"}, "auth", strict)
    has_basic = doc.get("basic") is not None
    has_bearer = doc.get("bearer") is not None
    if has_basic and has_bearer:
        raise AmbiguousAuthError("auth", "both basic and bearer are present")
    if has_basic:
        basic = doc["basic"]
        if not isinstance(basic, dict):
            raise ValidationError("auth.basic", "must be a mapping")
        _check_unknown_keys(basic, {"username", "password"}, "auth.basic", strict)
        username = _require_str(basic, "username", "auth.basic")
        password = basic.get("password", "")
        if not isinstance(password, str):
            raise ValidationError("auth.basic.password", "must be a string")
        return BasicAuth(username, password)
    if has_bearer:
        bearer = doc["bearer"]
        if not isinstance(bearer, dict):
            raise ValidationError("auth.bearer", "must be a mapping")
        _check_unknown_keys(bearer, {"token"}, "auth.bearer", strict)
        return BearerAuth(_require_str(bearer, "token", "auth.bearer"))
    if doc:
        raise ValidationError("auth", "expected a 'basic' or 'bearer' section")
    return NoAuth()


def parse_platform_config(text: str, strict: bool = False) -> PlatformConfig:
    """Parse and validate a platform configuration document."""
    doc = _load_yaml_mapping(text)
    _check_unknown_keys(doc, _PLATFORM_KEYS, "", strict)

    kind_text = _require_str(doc, "kind")
    try:
        kind = PlatformKind(kind_text)
    except ValueError:
        supported = ", ".join(k.value for k in PlatformKind)
        raise ValidationError("kind", f"must be one of: {supported}") from None

    host = _require_str(doc, "managementHost")

    if "managementPort" not in doc:
        raise ValidationError("managementPort", "required field is missing")
    port = doc["managementPort"]
    if isinstance(port, bool) or not isinstance(port, int):
        raise ValidationError("managementPort", "must be an integer")
    if not 1 <= port <= 65535:
        raise ValidationError("managementPort", "must be in range 1-65535")

    use_tls = doc.get("useTls", False)
    if not isinstance(use_tls, bool):
        raise ValidationError("useTls", "must be a boolean")

    return PlatformConfig(
        kind=kind,
        management_host=host,
        management_port=port,
        auth=_parse_auth(doc.get("auth"), strict),
        use_tls=use_tls,
    )


def apply_scale_defaults(config: FunctionConfig, kind: PlatformKind) -> FunctionConfig:
    """Insert the platform's default scale policy when the map has no entry.

    Existing entries are never touched; applying twice equals applying once.
    """
    if kind in config.scale:
        return config
    scale = dict(config.scale)
    scale[kind] = DEFAULT_SCALE_POLICIES[kind]
    return dataclasses.replace(config, scale=scale)


def serialize_function_config(config: FunctionConfig) -> str:
    """Render the config back to YAML with canonical quantity spellings."""
    doc: dict[str, object] = {
        "name": config.name,
        "namespace": config.namespace,
        "runtime": config.runtime.value,
        "image": config.image,
        "registry": config.registry,
    }
    if not config.resources.is_empty():
        resources: dict[str, str] = {}
        r = config.resources
        if r.cpu_request is not None:
            resources["cpuRequest"] = format_cpu(r.cpu_request)
        if r.cpu_limit is not None:
            resources["cpuLimit"] = format_cpu(r.cpu_limit)
        if r.mem_request is not None:
            resources["memRequest"] = format_memory(r.mem_request)
        if r.mem_limit is not None:
            resources["memLimit"] = format_memory(r.mem_limit)
        doc["resources"] = resources
    if config.scale:
        scale: dict[str, dict] = {}
        for kind in PlatformKind:
            if kind not in config.scale:
                continue
            policy = config.scale[kind]
            entry: dict[str, object] = {
                "minReplicas": policy.min_replicas,
                "maxReplicas": policy.max_replicas,
            }
            if policy.scale_to_zero_duration is not None:
                entry["scaleToZeroDuration"] = format_duration(
                    policy.scale_to_zero_duration
                )
            scale[kind.value] = entry
        doc["scale"] = scale
    doc["isGrpc"] = config.is_grpc
    if config.env:
        doc["env"] = dict(config.env)
    return yaml.safe_dump(doc, sort_keys=False)


def serialize_platform_config(config: PlatformConfig) -> str:
    doc: dict[str, object] = {
        "kind": config.kind.value,
        "managementHost": config.management_host,
        "managementPort": config.management_port,
    }
    if isinstance(config.auth, BasicAuth):
        doc["auth"] = {
            "basic": {
                "username": config.auth.username,
                "password": config.auth.password,
            }
        }
    elif isinstance(config.auth, BearerAuth):
        doc["auth"] = {"bearer": {"token": config.auth.token}}
    doc["useTls"] = config.use_tls
    return yaml.safe_dump(doc, sort_keys=False)
