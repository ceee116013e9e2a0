"""Fission adapter.

Functions are container-image Function resources posted to the controller
API; the source-package/builder flow is deliberately not used. Replica
bounds map onto the execution strategy's min/max scale, and the idle
timeout carries the scale-to-zero duration.
"""

from __future__ import annotations

from ..config import FunctionConfig, PlatformKind, ScalePolicy
from .base import FaaSService, FunctionSummary, PlatformRequest
from .common import k8s_env, k8s_resources

FUNCTIONS_PATH = "/v2/functions"


class FissionService(FaaSService):
    kind = PlatformKind.FISSION

    def _render(self, fn: FunctionConfig, scale: ScalePolicy) -> PlatformRequest:
        container: dict = {"name": fn.name, "image": fn.full_image()}
        if fn.env:
            container["env"] = k8s_env(fn.env)
        resources = k8s_resources(fn.resources)
        if resources:
            container["resources"] = resources

        spec: dict = {
            "podspec": {"containers": [container]},
            "invokeStrategy": {
                "strategyType": "execution",
                "executionStrategy": {
                    "executorType": "container",
                    "minScale": scale.min_replicas,
                    "maxScale": scale.max_replicas,
                },
            },
        }
        if scale.scale_to_zero_duration is not None:
            spec["idletimeout"] = scale.scale_to_zero_duration

        body = {
            "apiVersion": "fission.io/v1",
            "kind": "Function",
            "metadata": {"name": fn.name, "namespace": fn.namespace},
            "spec": spec,
        }
        return PlatformRequest(method="POST", path=FUNCTIONS_PATH, body=body)

    def _update_request(self, fn: FunctionConfig, request: PlatformRequest) -> PlatformRequest:
        return PlatformRequest(
            method="PUT",
            path=f"{FUNCTIONS_PATH}/{fn.name}",
            headers=request.headers,
            body=request.body,
        )

    def _list_request(self) -> PlatformRequest:
        return PlatformRequest(method="GET", path=FUNCTIONS_PATH)

    def _parse_list(self, doc) -> list[FunctionSummary]:
        summaries = []
        for item in doc or []:
            metadata = item.get("metadata", {})
            containers = (
                item.get("spec", {}).get("podspec", {}).get("containers", [{}])
            )
            status = item.get("status", {})
            replicas = int(status.get("replicas", 0))
            summaries.append(
                FunctionSummary(
                    name=metadata.get("name", ""),
                    namespace=metadata.get("namespace", "default"),
                    image=containers[0].get("image", ""),
                    replicas=replicas,
                    ready=bool(status.get("ready", replicas > 0)),
                    platform=self.kind,
                )
            )
        return summaries

    def _delete_request(self, name: str, namespace: str) -> PlatformRequest:
        return PlatformRequest(
            method="DELETE",
            path=f"{FUNCTIONS_PATH}/{name}?namespace={namespace}",
        )

    def _real_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        # Router's function route.
        p = self.platform
        return (
            f"{p.scheme}://{p.management_host}:{p.management_port}"
            f"/fission-function/{name}"
        )
