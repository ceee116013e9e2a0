"""Shared helpers for the test suite (fixtures live in conftest.py)."""

from __future__ import annotations

import json
from pathlib import Path

from gfaas.config import (
    FunctionConfig,
    PlatformConfig,
    PlatformKind,
    ResourceSpec,
    Runtime,
    ScalePolicy,
)

ALL_KINDS = tuple(PlatformKind)

GOLDEN_DIR = Path(__file__).parent / "goldens"
SCHEMA_DIR = Path(__file__).parents[1] / "src" / "gfaas" / "adapters" / "schemas"


def load_golden(kind: PlatformKind) -> dict:
    return json.loads((GOLDEN_DIR / f"deploy-{kind.value}.json").read_text())


def load_schema(kind: PlatformKind) -> dict:
    return json.loads((SCHEMA_DIR / f"{kind.value}.schema.json").read_text())


def make_function_config(
    name: str = "hello-world",
    namespace: str = "default",
    is_grpc: bool = False,
    scale: dict[PlatformKind, ScalePolicy] | None = None,
    env: dict[str, str] | None = None,
) -> FunctionConfig:
    return FunctionConfig(
        name=name,
        namespace=namespace,
        runtime=Runtime.PYTHON,
        image=name,
        registry="registry.example.com:5000",
        resources=ResourceSpec(),
        scale=scale or {},
        is_grpc=is_grpc,
        env=env or {},
    )


def golden_function_config() -> FunctionConfig:
    """The fixed config the goldens were rendered from."""
    return FunctionConfig(
        name="hello-world",
        namespace="default",
        runtime=Runtime.PYTHON,
        image="hello-world",
        registry="registry.example.com:5000",
        resources=ResourceSpec(
            cpu_request=500,
            cpu_limit=2000,
            mem_request=256 * 1024**2,
            mem_limit=1024**3,
        ),
        scale={
            PlatformKind.KNATIVE: ScalePolicy(0, 5, 120),
            PlatformKind.OPENFAAS: ScalePolicy(1, 5, None),
            PlatformKind.FISSION: ScalePolicy(0, 5, 120),
            PlatformKind.NUCLIO: ScalePolicy(1, 5, None),
        },
        env={"LOG_LEVEL": "info", "MODE": "prod"},
    )


def platform_config_for(mock) -> PlatformConfig:
    """Platform config pointing at a running mock's management endpoint."""
    return PlatformConfig(
        kind=mock.kind, management_host=mock.host, management_port=mock.port
    )
