"""Exception hierarchy shared by all gfaas modules.

Errors are grouped by where they surface: configuration parsing,
platform management calls, container engine interactions, project
scaffolding, and invocation. The CLI maps these groups onto exit codes.
"""

from __future__ import annotations


class GFaasError(Exception):
    """Base class for all errors raised by this package."""


# --- configuration ---------------------------------------------------------

class ConfigSyntaxError(GFaasError):
    """The configuration document is not well-formed YAML."""


class ValidationError(GFaasError):
    """A configuration value violates an invariant.

    ``path`` is the dotted path of the offending field, e.g.
    ``"scale.knative.minReplicas"``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnknownFieldError(ValidationError):
    """Strict mode: the document contains an unrecognized key."""


class AmbiguousAuthError(ValidationError):
    """More than one authentication method is present."""


# --- platform management calls ---------------------------------------------

class PlatformAPIError(GFaasError):
    """Base for errors talking to a platform management endpoint."""


class AuthError(PlatformAPIError):
    """The platform rejected our credentials (401/403)."""


class PlatformError(PlatformAPIError):
    """The platform reported a server-side failure (5xx)."""

    def __init__(self, status: int, excerpt: str = ""):
        self.status = status
        self.excerpt = excerpt
        super().__init__(f"platform returned {status}: {excerpt}".rstrip(": "))


class ConflictError(PlatformAPIError):
    """Create-only call hit an already-existing function."""


class NotFoundError(PlatformAPIError):
    """The named function does not exist on the platform."""


class NetworkError(PlatformAPIError):
    """The management or invocation endpoint could not be reached."""


class RequestTimeout(NetworkError):
    """A request exceeded its deadline."""


class GrpcUnavailable(PlatformAPIError):
    """The gRPC channel could not reach the target."""


class UnsupportedFeature(GFaasError):
    """The requested capability is not available on this platform."""


# --- container engine / registry --------------------------------------------

class EngineUnavailable(GFaasError):
    """The container engine API cannot be reached."""


class BuildFailed(GFaasError):
    """Image build returned non-zero; carries the captured log tail."""

    def __init__(self, message: str, log_tail: str = ""):
        self.log_tail = log_tail
        super().__init__(message if not log_tail else f"{message}\n{log_tail}")


class MissingBuildFile(GFaasError):
    """The build context has no container build file."""


class PushFailed(GFaasError):
    """Image push was rejected or the image is unknown locally."""


# --- scaffolding -------------------------------------------------------------

class UnknownRuntime(GFaasError):
    """The runtime is not one of the supported language runtimes."""


class TargetNotEmpty(GFaasError):
    """newFunction refuses to write into a non-empty directory."""


class FileCollision(GFaasError):
    """adapt would overwrite an existing file; nothing was written."""


class CorruptTemplate(GFaasError):
    """Template bundle does not match its manifest."""


# --- invocation / servers ----------------------------------------------------

class AllRequestsFailed(GFaasError):
    """Every request in a load test errored."""


class PortInUse(GFaasError):
    """The requested listen port is already bound."""


class FunctionCrashed(GFaasError):
    """The function backend raised while handling a proxied invocation."""


class UsageError(GFaasError):
    """Bad command line; the CLI prints help and exits 1."""
