"""Invoke deployed functions and run k6-style closed-loop load tests.

A load test spawns ``vus`` independent worker threads that each issue
back-to-back requests until the duration elapses (the k6 default
executor). Workers never share mutable statistics: every result is
passed to the collector through a queue and aggregated after the run.
Percentiles use the nearest-rank method, so results are deterministic
for a given latency list.
"""

from __future__ import annotations

import csv
import math
import statistics
import threading
import time
from dataclasses import dataclass, replace
from queue import SimpleQueue
from urllib.parse import parse_qs, urlsplit, urlunsplit

import requests

from . import rpc
from .errors import (
    AllRequestsFailed,
    GFaasError,
    GrpcUnavailable,
    NetworkError,
    RequestTimeout,
    ValidationError,
)

DEFAULT_TIMEOUT = 60.0
TRIGGERS = ("http", "grpc")

# coldStartSuspected fires when a latency exceeds 5x the trailing median
# of the same worker; purely diagnostic, never asserted on.
COLD_START_FACTOR = 5.0
_COLD_START_MIN_HISTORY = 3

NUCLIO_INVOKE_PATH = "/api/function_invocations"
NUCLIO_NAME_HEADER = "x-nuclio-function-name"
NUCLIO_NAMESPACE_HEADER = "x-nuclio-function-namespace"

STATS_FIELDS = (
    "count",
    "errorCount",
    "min",
    "mean",
    "p50",
    "p90",
    "p95",
    "max",
    "throughput",
)


@dataclass(frozen=True)
class InvocationResult:
    """Outcome of a single invocation; latency is in milliseconds."""

    status_code: int
    body: bytes
    latency: float
    cold_start_suspected: bool = False

    def __post_init__(self):
        if self.latency < 0:
            raise ValueError("latency cannot be negative")

    def to_dict(self) -> dict:
        return {
            "statusCode": self.status_code,
            "body": self.body.decode("utf-8", errors="replace"),
            "latency": self.latency,
            "coldStartSuspected": self.cold_start_suspected,
        }


@dataclass(frozen=True)
class LoadSpec:
    vus: int
    duration: float
    payload: bytes = b""
    trigger: str = "http"

    def __post_init__(self):
        if not isinstance(self.vus, int) or isinstance(self.vus, bool) or self.vus < 1:
            raise ValidationError("vus", "must be a positive integer")
        if self.duration < 1:
            raise ValidationError("duration", "must be at least 1 second")
        if self.trigger not in TRIGGERS:
            raise ValidationError("trigger", f"must be one of {', '.join(TRIGGERS)}")


@dataclass(frozen=True)
class LatencyStats:
    """Aggregate latency figures; all latencies in ms, throughput in rps."""

    count: int
    error_count: int
    min: float
    mean: float
    p50: float
    p90: float
    p95: float
    max: float
    throughput: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "errorCount": self.error_count,
            "min": self.min,
            "mean": self.mean,
            "p50": self.p50,
            "p90": self.p90,
            "p95": self.p95,
            "max": self.max,
            "throughput": self.throughput,
        }

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=STATS_FIELDS)
            writer.writeheader()
            writer.writerow(self.to_dict())


def nearest_rank(sorted_latencies: list[float], percentile: float) -> float:
    """Nearest-rank percentile: value at rank ceil(p/100 * n), 1-indexed."""
    if not sorted_latencies:
        raise ValueError("cannot take a percentile of an empty list")
    rank = math.ceil(percentile / 100.0 * len(sorted_latencies))
    return sorted_latencies[max(rank, 1) - 1]


def _fold_nuclio_query(url: str) -> tuple[str, dict[str, str]]:
    """The Nuclio invocation endpoint addresses functions via headers."""
    parts = urlsplit(url)
    if not parts.path.endswith(NUCLIO_INVOKE_PATH) or not parts.query:
        return url, {}
    params = parse_qs(parts.query)
    headers = {}
    if "name" in params:
        headers[NUCLIO_NAME_HEADER] = params["name"][0]
    if "namespace" in params:
        headers[NUCLIO_NAMESPACE_HEADER] = params["namespace"][0]
    stripped = urlunsplit((parts.scheme, parts.netloc, parts.path, "", ""))
    return stripped, headers


def _http_once(
    session: requests.Session,
    url: str,
    payload: bytes | None,
    timeout: float,
    headers: dict[str, str] | None,
) -> InvocationResult:
    url, folded = _fold_nuclio_query(url)
    merged = dict(folded)
    if headers:
        merged.update(headers)
    start = time.perf_counter()
    try:
        if payload is None:
            response = session.get(url, headers=merged, timeout=timeout)
        else:
            response = session.post(url, data=payload, headers=merged, timeout=timeout)
        body = response.content  # force the full body so latency covers it
    except requests.Timeout as exc:
        raise RequestTimeout(f"invocation of {url} timed out after {timeout}s") from exc
    except requests.RequestException as exc:
        raise NetworkError(f"cannot reach {url}: {exc}") from exc
    latency = (time.perf_counter() - start) * 1000.0
    return InvocationResult(response.status_code, body, latency)


def _grpc_once(
    url: str,
    payload: bytes | None,
    timeout: float,
    headers: dict[str, str] | None,
) -> InvocationResult:
    target = url
    for prefix in ("grpc://", "http://", "https://"):
        if target.startswith(prefix):
            target = target[len(prefix):]
    start = time.perf_counter()
    status, _, body = rpc.grpc_invoke(
        target, payload or b"", headers=headers, timeout=timeout
    )
    latency = (time.perf_counter() - start) * 1000.0
    return InvocationResult(status, body, latency)


def invoke(
    url: str,
    payload: bytes | None = None,
    trigger: str = "http",
    timeout: float = DEFAULT_TIMEOUT,
    headers: dict[str, str] | None = None,
) -> InvocationResult:
    """Issue one request; latency runs from send to last body byte."""
    if trigger not in TRIGGERS:
        raise ValidationError("trigger", f"must be one of {', '.join(TRIGGERS)}")
    if trigger == "grpc":
        return _grpc_once(url, payload, timeout, headers)
    with requests.Session() as session:
        return _http_once(session, url, payload, timeout, headers)


def _worker(
    url: str,
    spec: LoadSpec,
    timeout: float,
    headers: dict[str, str] | None,
    start_gate: threading.Event,
    results: SimpleQueue,
) -> None:
    history: list[float] = []
    session = requests.Session()
    try:
        start_gate.wait()
        deadline = time.monotonic() + spec.duration
        while time.monotonic() < deadline:
            try:
                if spec.trigger == "grpc":
                    result = _grpc_once(url, spec.payload, timeout, headers)
                else:
                    result = _http_once(session, url, spec.payload, timeout, headers)
            except (NetworkError, GrpcUnavailable) as exc:
                results.put(exc)
                continue
            suspected = (
                len(history) >= _COLD_START_MIN_HISTORY
                and result.latency > COLD_START_FACTOR * statistics.median(history)
            )
            history.append(result.latency)
            results.put(replace(result, cold_start_suspected=suspected))
    finally:
        session.close()


def load_test(
    url: str,
    spec: LoadSpec,
    timeout: float = DEFAULT_TIMEOUT,
    headers: dict[str, str] | None = None,
) -> LatencyStats:
    """Run spec.vus closed-loop workers for spec.duration seconds."""
    results: SimpleQueue = SimpleQueue()
    start_gate = threading.Event()
    workers = [
        threading.Thread(
            target=_worker,
            args=(url, spec, timeout, headers, start_gate, results),
            name=f"gfaas-vu-{i}",
            daemon=True,
        )
        for i in range(spec.vus)
    ]
    for thread in workers:
        thread.start()
    wall_start = time.monotonic()
    start_gate.set()
    for thread in workers:
        thread.join()
    wall = time.monotonic() - wall_start

    completed: list[InvocationResult] = []
    transport_errors = 0
    while not results.empty():
        item = results.get()
        if isinstance(item, GFaasError):
            transport_errors += 1
        else:
            completed.append(item)

    count = len(completed) + transport_errors
    error_count = transport_errors + sum(1 for r in completed if r.status_code >= 400)
    if count == 0 or error_count == count:
        raise AllRequestsFailed(
            f"all {count} requests against {url} failed"
        )

    latencies = sorted(r.latency for r in completed)
    return LatencyStats(
        count=count,
        error_count=error_count,
        min=latencies[0],
        mean=statistics.fmean(latencies),
        p50=nearest_rank(latencies, 50),
        p90=nearest_rank(latencies, 90),
        p95=nearest_rank(latencies, 95),
        max=latencies[-1],
        throughput=count / wall if wall > 0 else float(count),
    )
