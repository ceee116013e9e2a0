"""OpenFaaS adapter.

Functions deploy through the gateway's /system/functions endpoint.
Replica bounds map onto the com.openfaas.scale labels. The community
edition has no scale-to-zero retention knob, so a configured
scaleToZeroDuration is ignored with a warning rather than silently
cross-applied.
"""

from __future__ import annotations

import logging

from ..config import FunctionConfig, PlatformKind, ScalePolicy
from ..units import format_cpu, format_memory
from .base import FaaSService, FunctionSummary, PlatformRequest

log = logging.getLogger(__name__)

FUNCTIONS_PATH = "/system/functions"

MIN_SCALE_LABEL = "com.openfaas.scale.min"
MAX_SCALE_LABEL = "com.openfaas.scale.max"


class OpenFaasService(FaaSService):
    kind = PlatformKind.OPENFAAS

    def _render(self, fn: FunctionConfig, scale: ScalePolicy) -> PlatformRequest:
        if scale.scale_to_zero_duration is not None:
            log.warning(
                "openfaas: scaleToZeroDuration has no retention equivalent and is ignored"
            )
        body: dict = {
            "service": fn.name,
            "image": fn.full_image(),
            "namespace": fn.namespace,
            "labels": {
                MIN_SCALE_LABEL: str(scale.min_replicas),
                MAX_SCALE_LABEL: str(scale.max_replicas),
            },
        }
        if fn.env:
            body["envVars"] = {k: fn.env[k] for k in sorted(fn.env)}
        requests_block: dict[str, str] = {}
        limits_block: dict[str, str] = {}
        r = fn.resources
        if r.cpu_request is not None:
            requests_block["cpu"] = format_cpu(r.cpu_request)
        if r.mem_request is not None:
            requests_block["memory"] = format_memory(r.mem_request)
        if r.cpu_limit is not None:
            limits_block["cpu"] = format_cpu(r.cpu_limit)
        if r.mem_limit is not None:
            limits_block["memory"] = format_memory(r.mem_limit)
        if requests_block:
            body["requests"] = requests_block
        if limits_block:
            body["limits"] = limits_block
        return PlatformRequest(method="POST", path=FUNCTIONS_PATH, body=body)

    def _update_request(self, fn: FunctionConfig, request: PlatformRequest) -> PlatformRequest:
        return PlatformRequest(
            method="PUT", path=FUNCTIONS_PATH, headers=request.headers, body=request.body
        )

    def _list_request(self) -> PlatformRequest:
        return PlatformRequest(method="GET", path=FUNCTIONS_PATH)

    def _parse_list(self, doc) -> list[FunctionSummary]:
        summaries = []
        for item in doc or []:
            available = int(item.get("availableReplicas", 0))
            summaries.append(
                FunctionSummary(
                    name=item.get("name", ""),
                    namespace=item.get("namespace", "default"),
                    image=item.get("image", ""),
                    replicas=int(item.get("replicas", 0)),
                    ready=available >= 1,
                    platform=self.kind,
                )
            )
        return summaries

    def _delete_request(self, name: str, namespace: str) -> PlatformRequest:
        return PlatformRequest(
            method="DELETE",
            path=FUNCTIONS_PATH,
            body={"functionName": name, "namespace": namespace},
        )

    def _real_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        # Gateway proxy route; non-default namespaces use the dotted suffix.
        p = self.platform
        suffix = name if namespace == "default" else f"{name}.{namespace}"
        return f"{p.scheme}://{p.management_host}:{p.management_port}/function/{suffix}"
