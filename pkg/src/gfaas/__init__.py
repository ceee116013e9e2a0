"""gFaaS: develop, deploy, manage, and invoke serverless functions on
Knative, OpenFaaS, Fission, and Nuclio from one platform-independent
function definition.
"""

from __future__ import annotations

from .adapters import (
    DeploymentRecord,
    FaaSService,
    FunctionSummary,
    HttpTransport,
    PlatformRequest,
    get_service,
)
from .config import (
    BasicAuth,
    BearerAuth,
    FunctionConfig,
    NoAuth,
    PlatformConfig,
    PlatformKind,
    ResourceSpec,
    Runtime,
    ScalePolicy,
    apply_scale_defaults,
    parse_function_config,
    parse_platform_config,
    serialize_function_config,
    serialize_platform_config,
)
from .container import FakeEngine, FakeRegistry, ImageRef, RegistryCredentials
from .errors import (
    AuthError,
    ConfigSyntaxError,
    ConflictError,
    GFaasError,
    NotFoundError,
    PlatformAPIError,
    PlatformError,
    UnsupportedFeature,
    ValidationError,
)
from .invoker import InvocationResult, LatencyStats, LoadSpec, invoke, load_test
from .shim import XRequest, XResponse, hello_world_handler, serve

__version__ = "0.1.0"

__all__ = [
    "AuthError",
    "BasicAuth",
    "BearerAuth",
    "ConfigSyntaxError",
    "ConflictError",
    "DeploymentRecord",
    "FaaSService",
    "FakeEngine",
    "FakeRegistry",
    "FunctionConfig",
    "FunctionSummary",
    "GFaasError",
    "HttpTransport",
    "ImageRef",
    "InvocationResult",
    "LatencyStats",
    "LoadSpec",
    "NoAuth",
    "NotFoundError",
    "PlatformAPIError",
    "PlatformConfig",
    "PlatformError",
    "PlatformKind",
    "PlatformRequest",
    "RegistryCredentials",
    "ResourceSpec",
    "Runtime",
    "ScalePolicy",
    "UnsupportedFeature",
    "ValidationError",
    "XRequest",
    "XResponse",
    "apply_scale_defaults",
    "get_service",
    "hello_world_handler",
    "invoke",
    "load_test",
    "parse_function_config",
    "parse_platform_config",
    "serialize_function_config",
    "serialize_platform_config",
    "serve",
    "__version__",
]
