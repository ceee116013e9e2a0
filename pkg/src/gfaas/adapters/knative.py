"""Knative Serving adapter.

Functions become Serving v1 Service documents. Scaling maps onto the
autoscaling annotations on the revision template; resources go on the
user container. gRPC functions get an h2c port so the ingress speaks
HTTP/2 to the container.
"""

from __future__ import annotations

from ..config import FunctionConfig, PlatformKind, ScalePolicy
from ..units import format_duration
from .base import FaaSService, FunctionSummary, PlatformRequest
from .common import k8s_env, k8s_resources

API_PREFIX = "/apis/serving.knative.dev/v1"

MIN_SCALE_ANNOTATION = "autoscaling.knative.dev/min-scale"
MAX_SCALE_ANNOTATION = "autoscaling.knative.dev/max-scale"
RETENTION_ANNOTATION = "autoscaling.knative.dev/scale-to-zero-pod-retention-period"

CONTAINER_PORT = 8080


class KnativeService(FaaSService):
    kind = PlatformKind.KNATIVE

    def _render(self, fn: FunctionConfig, scale: ScalePolicy) -> PlatformRequest:
        annotations = {
            MIN_SCALE_ANNOTATION: str(scale.min_replicas),
            MAX_SCALE_ANNOTATION: str(scale.max_replicas),
        }
        if scale.scale_to_zero_duration is not None:
            annotations[RETENTION_ANNOTATION] = format_duration(
                scale.scale_to_zero_duration
            )

        container: dict = {"image": fn.full_image()}
        if fn.env:
            container["env"] = k8s_env(fn.env)
        resources = k8s_resources(fn.resources)
        if resources:
            container["resources"] = resources
        if fn.is_grpc:
            container["ports"] = [{"name": "h2c", "containerPort": CONTAINER_PORT}]
        else:
            container["ports"] = [{"containerPort": CONTAINER_PORT}]

        body = {
            "apiVersion": "serving.knative.dev/v1",
            "kind": "Service",
            "metadata": {"name": fn.name, "namespace": fn.namespace},
            "spec": {
                "template": {
                    "metadata": {"annotations": annotations},
                    "spec": {"containers": [container]},
                }
            },
        }
        return PlatformRequest(
            method="POST",
            path=f"{API_PREFIX}/namespaces/{fn.namespace}/services",
            body=body,
        )

    def _update_request(self, fn: FunctionConfig, request: PlatformRequest) -> PlatformRequest:
        return PlatformRequest(
            method="PUT",
            path=f"{request.path}/{fn.name}",
            headers=request.headers,
            body=request.body,
        )

    def _list_request(self) -> PlatformRequest:
        return PlatformRequest(method="GET", path=f"{API_PREFIX}/services")

    def _parse_list(self, doc) -> list[FunctionSummary]:
        summaries = []
        for item in (doc or {}).get("items", []):
            metadata = item.get("metadata", {})
            containers = (
                item.get("spec", {})
                .get("template", {})
                .get("spec", {})
                .get("containers", [{}])
            )
            status = item.get("status", {})
            conditions = status.get("conditions", [])
            ready = any(
                c.get("type") == "Ready" and c.get("status") == "True"
                for c in conditions
            )
            summaries.append(
                FunctionSummary(
                    name=metadata.get("name", ""),
                    namespace=metadata.get("namespace", "default"),
                    image=containers[0].get("image", ""),
                    replicas=int(status.get("readyReplicas", 0)),
                    ready=ready,
                    platform=self.kind,
                )
            )
        return summaries

    def _delete_request(self, name: str, namespace: str) -> PlatformRequest:
        return PlatformRequest(
            method="DELETE",
            path=f"{API_PREFIX}/namespaces/{namespace}/services/{name}",
        )

    def _real_invoke_url(self, name: str, namespace: str, trigger: str) -> str:
        # Default domain template: <name>.<namespace>.<domain>, with the
        # management host standing in for the cluster's serving domain.
        p = self.platform
        authority = f"{name}.{namespace}.{p.management_host}:{p.management_port}"
        if trigger == "grpc":
            return authority
        return f"{p.scheme}://{authority}"
