"""Shared body fragments for the Kubernetes-flavored platform APIs."""

from __future__ import annotations

from ..config import ResourceSpec
from ..units import format_cpu, format_memory


def k8s_env(env: dict[str, str]) -> list[dict[str, str]]:
    """Env map as the k8s name/value list, sorted for determinism."""
    return [{"name": k, "value": v} for k, v in sorted(env.items())]


def k8s_resources(spec: ResourceSpec) -> dict[str, dict[str, str]]:
    """Requests/limits block with canonical quantity spellings; {} when unset."""
    requests: dict[str, str] = {}
    limits: dict[str, str] = {}
    if spec.cpu_request is not None:
        requests["cpu"] = format_cpu(spec.cpu_request)
    if spec.mem_request is not None:
        requests["memory"] = format_memory(spec.mem_request)
    if spec.cpu_limit is not None:
        limits["cpu"] = format_cpu(spec.cpu_limit)
    if spec.mem_limit is not None:
        limits["memory"] = format_memory(spec.mem_limit)
    block: dict[str, dict[str, str]] = {}
    if requests:
        block["requests"] = requests
    if limits:
        block["limits"] = limits
    return block
