"""Nuclio adapter.

Functions are dashboard REST function documents with spec-level
minReplicas/maxReplicas. The community edition does not scale to zero,
so scaleToZeroDuration is ignored with a warning. Invocation goes
through the dashboard's invocation proxy; the function identity travels
as query parameters that the invoker folds into the x-nuclio headers.
"""

from __future__ import annotations

import logging

from ..config import FunctionConfig, PlatformKind, ScalePolicy
from .base import FaaSService, FunctionSummary, PlatformRequest
from .common import k8s_env, k8s_resources

log = logging.getLogger(__name__)

FUNCTIONS_PATH = "/api/functions"
INVOCATIONS_PATH = "/api/function_invocations"


class NuclioService(FaaSService):
    kind = PlatformKind.NUCLIO

    def _render(self, fn: FunctionConfig, scale: ScalePolicy) -> PlatformRequest:
        if scale.scale_to_zero_duration is not None:
            log.warning(
                "nuclio: scaleToZeroDuration has no retention equivalent and is ignored"
            )
        spec: dict = {"image": fn.full_image()}
        if fn.env:
            spec["env"] = k8s_env(fn.env)
        resources = k8s_resources(fn.resources)
        if resources:
            spec["resources"] = resources
        spec["minReplicas"] = scale.min_replicas
        spec["maxReplicas"] = scale.max_replicas

        body = {
            "metadata": {"name": fn.name, "namespace": fn.namespace},
            "spec": spec,
        }
        return PlatformRequest(method="POST", path=FUNCTIONS_PATH, body=body)

    def _update_request(self, fn: FunctionConfig, request: PlatformRequest) -> PlatformRequest:
        return PlatformRequest(
            method="PUT", path=FUNCTIONS_PATH, headers=request.headers, body=request.body
        )

    def _list_request(self) -> PlatformRequest:
        return PlatformRequest(method="GET", path=FUNCTIONS_PATH)

    def _parse_list(self, doc) -> list[FunctionSummary]:
        summaries = []
        for item in (doc or {}).values():
            metadata = item.get("metadata", {})
            status = item.get("status", {})
            summaries.append(
                FunctionSummary(
                    name=metadata.get("name", ""),
                    namespace=metadata.get("namespace", "default"),
                    image=item.get("spec", {}).get("image", ""),
                    replicas=int(status.get("replicas", 0)),
                    ready=status.get("state") == "ready",
                    platform=self.kind,
                )
            )
        return summaries

    def _delete_request(self, name: str, namespace: str) -> PlatformRequest:
        return PlatformRequest(
            method="DELETE",
            path=FUNCTIONS_PATH,
            body={"metadata": {"name": name, "namespace": namespace}},
        )

    def _real_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        p = self.platform
        return (
            f"{p.scheme}://{p.management_host}:{p.management_port}"
            f"{INVOCATIONS_PATH}?name={name}&namespace={namespace}"
        )
