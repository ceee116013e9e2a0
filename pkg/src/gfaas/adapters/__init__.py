"""Platform adapters behind one uniform service interface.

Callers outside this package use :func:`get_service` and the neutral
types re-exported here; the per-platform classes are implementation
details and are deliberately not part of the public surface.
"""

from __future__ import annotations

from ..config import PlatformConfig, PlatformKind
from .base import (
    DeploymentRecord,
    FaaSService,
    FunctionSummary,
    PlatformRequest,
    render_auth_headers,
)
from .fission import FissionService as _FissionService
from .knative import KnativeService as _KnativeService
from .nuclio import NuclioService as _NuclioService
from .openfaas import OpenFaasService as _OpenFaasService
from .transport import HttpTransport

__all__ = [
    "DeploymentRecord",
    "FaaSService",
    "FunctionSummary",
    "HttpTransport",
    "PlatformRequest",
    "get_service",
    "render_auth_headers",
]

_SERVICES: dict[PlatformKind, type[FaaSService]] = {
    PlatformKind.KNATIVE: _KnativeService,
    PlatformKind.OPENFAAS: _OpenFaasService,
    PlatformKind.FISSION: _FissionService,
    PlatformKind.NUCLIO: _NuclioService,
}


def get_service(
    platform: PlatformConfig,
    transport: HttpTransport | None = None,
    mock: bool = False,
) -> FaaSService:
    """Construct the adapter for the platform named in the config."""
    return _SERVICES[platform.kind](platform, transport=transport, mock=mock)
