"""The gfaas command line: newFunction, build, push, deploy, functions,
delete, invoke, and adapt.

``run`` is the library entry point: it never calls sys.exit and never
prints, returning a :class:`CommandOutcome` instead, so tests drive the
full CLI in-process. ``main`` is the console-script wrapper around it.

Exit codes: 0 success, 1 validation or usage, 2 platform or network,
3 internal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from . import scaffold
from .adapters import get_service
from .config import (
    FUNCTION_CONFIG_FILENAME,
    PLATFORM_CONFIG_FILENAME,
    FunctionConfig,
    PlatformConfig,
    Runtime,
    parse_function_config,
    parse_platform_config,
)
from .container import (
    ImageRef,
    RegistryCredentials,
    build_image,
    make_engine,
    push_image,
)
from .errors import (
    AllRequestsFailed,
    BuildFailed,
    ConfigSyntaxError,
    CorruptTemplate,
    EngineUnavailable,
    FileCollision,
    FunctionCrashed,
    GFaasError,
    MissingBuildFile,
    NotFoundError,
    PlatformAPIError,
    PushFailed,
    TargetNotEmpty,
    UnknownRuntime,
    UnsupportedFeature,
    UsageError,
    ValidationError,
)
from .invoker import LoadSpec, invoke, load_test
from .units import parse_duration

COMMANDS = (
    "newFunction",
    "build",
    "push",
    "deploy",
    "functions",
    "delete",
    "invoke",
    "adapt",
)

FUNCTION_CONFIG_ENV = "GFAAS_FUNCTION_CONFIG"
PLATFORM_CONFIG_ENV = "GFAAS_PLATFORM_CONFIG"
ENGINE_ENV = "GFAAS_ENGINE"
REGISTRY_USER_ENV = "GFAAS_REGISTRY_USER"
REGISTRY_PASSWORD_ENV = "GFAAS_REGISTRY_PASSWORD"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PLATFORM = 2
EXIT_INTERNAL = 3

_VALIDATION_ERRORS = (
    UsageError,
    ValidationError,
    ConfigSyntaxError,
    UnknownRuntime,
    TargetNotEmpty,
    FileCollision,
    CorruptTemplate,
    MissingBuildFile,
    UnsupportedFeature,
)
_PLATFORM_ERRORS = (
    PlatformAPIError,
    EngineUnavailable,
    BuildFailed,
    PushFailed,
    FunctionCrashed,
    AllRequestsFailed,
)


@dataclass(frozen=True)
class CommandOutcome:
    """What a CLI run produced; main() turns this into process behavior."""

    exit_code: int
    messages: list[str]
    json_payload: dict | None = None


class _HelpRequested(Exception):
    def __init__(self, status: int):
        self.status = status


_capture = threading.local()


def _sink() -> list[str] | None:
    return getattr(_capture, "sink", None)


class _Parser(argparse.ArgumentParser):
    """Parser that reports through CommandOutcome instead of the process."""

    def _print_message(self, message, file=None):
        sink = _sink()
        if not message:
            return
        if sink is not None:
            sink.append(message.rstrip("\n"))
        else:
            (file or sys.stderr).write(message)

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}".rstrip())

    def exit(self, status=0, message=None):
        if message:
            self._print_message(message)
        raise _HelpRequested(int(status or 0))


def build_parser() -> _Parser:
    parser = _Parser(
        prog="gfaas",
        description=(
            "Develop, deploy, and invoke serverless functions on Knative, "
            "OpenFaaS, Fission, and Nuclio from one function definition."
        ),
    )
    sub = parser.add_subparsers(
        dest="command",
        metavar="{" + ",".join(COMMANDS) + "}",
        parser_class=_Parser,
    )

    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON envelope on stdout")
    common.add_argument("--strict", action="store_true", help="reject unknown config keys")

    configs = _Parser(add_help=False)
    configs.add_argument("-f", "--function-config", metavar="PATH", help=f"function config (default ./{FUNCTION_CONFIG_FILENAME})")
    configs.add_argument("-p", "--platform-config", metavar="PATH", help=f"platform config (default ./{PLATFORM_CONFIG_FILENAME})")
    configs.add_argument("--mock", action="store_true", help="target a mock platform's uniform proxy")

    templates = _Parser(add_help=False)
    templates.add_argument("--source", metavar="URL", help="template archive URL (default: embedded)")
    templates.add_argument("--offline", action="store_true", help="force the embedded templates")

    new_fn = sub.add_parser("newFunction", parents=[common, templates], help="generate a function project from a template")
    new_fn.add_argument("name", help="function name (DNS label)")
    new_fn.add_argument("--runtime", required=True, help="java | nodejs | python | go | cpp")
    new_fn.add_argument("--grpc", action="store_true", help="include the gRPC service definition")
    new_fn.add_argument("--target", metavar="DIR", help="target directory (default ./<name>)")

    build = sub.add_parser("build", parents=[common, configs], help="build the function image")
    build.add_argument("--engine", default=None, help="container engine: docker | fake")
    build.add_argument("--tag", help="image reference (default <registry>/<image>:latest)")
    build.add_argument("--context", metavar="DIR", help="build context (default: config directory)")

    push = sub.add_parser("push", parents=[common, configs], help="push the image to its registry")
    push.add_argument("--engine", default=None, help="container engine: docker | fake")
    push.add_argument("--tag", help="image reference (default <registry>/<image>:latest)")
    push.add_argument("--registry-user", help=f"registry username (or {REGISTRY_USER_ENV})")
    push.add_argument("--registry-password", help=f"registry password (or {REGISTRY_PASSWORD_ENV})")

    sub.add_parser("deploy", parents=[common, configs], help="deploy (create or update) the function")

    sub.add_parser("functions", parents=[common, configs], help="list deployed functions")

    delete = sub.add_parser("delete", parents=[common, configs], help="delete a deployed function")
    delete.add_argument("name", help="function name")
    delete.add_argument("--namespace", default="default")
    delete.add_argument("--ignore-missing", action="store_true", help="exit 0 when the function does not exist")

    invoke_cmd = sub.add_parser("invoke", parents=[common, configs], help="invoke a function, optionally under load")
    invoke_cmd.add_argument("name", nargs="?", help="function name (default: from function config)")
    invoke_cmd.add_argument("--namespace", default=None)
    invoke_cmd.add_argument("--trigger", choices=("http", "grpc"), default="http")
    invoke_cmd.add_argument("--data", help="request payload")
    invoke_cmd.add_argument("--vus", type=int, help="virtual users: run a load test")
    invoke_cmd.add_argument("--duration", help="load-test duration, e.g. 10s")
    invoke_cmd.add_argument("--out", metavar="CSV", help="also write load-test stats as CSV")

    adapt = sub.add_parser("adapt", parents=[common, templates], help="add gFaaS adapter files to a legacy project")
    adapt.add_argument("--runtime", required=True, help="java | nodejs | python | go | cpp")
    adapt.add_argument("--dir", default=".", metavar="DIR", help="project directory (default .)")

    return parser


# --- config discovery ---------------------------------------------------------


def _find_config(explicit: str | None, env_var: str, default_name: str, flag: str) -> Path:
    path = explicit or os.environ.get(env_var) or default_name
    resolved = Path(path)
    if not resolved.is_file():
        raise UsageError(
            f"no configuration file at {resolved} (pass {flag} or set {env_var})"
        )
    return resolved


def _load_function_config(args) -> tuple[Path, FunctionConfig]:
    path = _find_config(
        getattr(args, "function_config", None),
        FUNCTION_CONFIG_ENV,
        FUNCTION_CONFIG_FILENAME,
        "-f",
    )
    return path, parse_function_config(path.read_text(), strict=args.strict)


def _load_platform_config(args) -> PlatformConfig:
    path = _find_config(
        getattr(args, "platform_config", None),
        PLATFORM_CONFIG_ENV,
        PLATFORM_CONFIG_FILENAME,
        "-p",
    )
    return parse_platform_config(path.read_text(), strict=args.strict)


def _image_ref(args, fn: FunctionConfig) -> ImageRef:
    if args.tag:
        return ImageRef.parse(args.tag)
    return ImageRef(registry=fn.registry, repository=fn.image, tag="latest")


def _engine(args):
    name = args.engine or os.environ.get(ENGINE_ENV) or "docker"
    try:
        return make_engine(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _template_source(args) -> str:
    if args.offline or not args.source:
        return scaffold.EMBEDDED
    return args.source


# --- subcommands ---------------------------------------------------------------


def _cmd_new_function(args, messages: list[str]) -> dict:
    try:
        runtime = Runtime(args.runtime)
    except ValueError:
        supported = ", ".join(r.value for r in Runtime)
        raise UnknownRuntime(
            f"unknown runtime {args.runtime!r}; supported runtimes: {supported}"
        ) from None
    target = Path(args.target) if args.target else Path(args.name)
    created = scaffold.new_function(
        args.name, runtime, args.grpc, target, source=_template_source(args)
    )
    messages.append(f"created {args.name} ({runtime.value}) in {target}")
    for path in created:
        messages.append(f"  {path}")
    return {"name": args.name, "target": str(target), "created": [str(p) for p in created]}


def _cmd_build(args, messages: list[str]) -> dict:
    config_path, fn = _load_function_config(args)
    context = Path(args.context) if args.context else config_path.parent
    ref = _image_ref(args, fn)
    built = build_image(_engine(args), context, ref)
    messages.append(f"built {built.canonical()}")
    return {"image": built.name(), "digest": built.digest}


def _cmd_push(args, messages: list[str]) -> dict:
    _, fn = _load_function_config(args)
    ref = _image_ref(args, fn)
    username = args.registry_user or os.environ.get(REGISTRY_USER_ENV)
    password = args.registry_password or os.environ.get(REGISTRY_PASSWORD_ENV)
    creds = None
    if username:
        creds = RegistryCredentials(ref.registry or fn.registry, username, password or "")
    pushed = push_image(_engine(args), ref, creds)
    messages.append(f"pushed {pushed.canonical()}")
    return {"image": pushed.name(), "digest": pushed.digest}


def _cmd_deploy(args, messages: list[str]) -> dict:
    _, fn = _load_function_config(args)
    platform = _load_platform_config(args)
    service = get_service(platform, mock=args.mock)
    record = service.deploy(fn)
    messages.append(f"deployed {record.name} to {record.platform.value}")
    messages.append(f"invoke URL: {record.invoke_url}")
    return {
        "name": record.name,
        "platform": record.platform.value,
        "invokeUrl": record.invoke_url,
        "isGrpc": record.is_grpc,
    }


def _cmd_functions(args, messages: list[str]) -> dict:
    platform = _load_platform_config(args)
    service = get_service(platform, mock=args.mock)
    summaries = service.list_functions()
    if not summaries:
        messages.append("no functions deployed")
    for s in summaries:
        ready = "ready" if s.ready else "not-ready"
        messages.append(
            f"{s.name}  {s.namespace}  {s.image}  replicas={s.replicas}  {ready}"
        )
    return {
        "functions": [
            {
                "name": s.name,
                "namespace": s.namespace,
                "image": s.image,
                "replicas": s.replicas,
                "ready": s.ready,
            }
            for s in summaries
        ]
    }


def _cmd_delete(args, messages: list[str]) -> dict:
    platform = _load_platform_config(args)
    service = get_service(platform, mock=args.mock)
    try:
        service.delete_function(args.name, args.namespace)
    except NotFoundError:
        if not args.ignore_missing:
            raise
        messages.append(f"{args.name} not found; ignored")
        return {"deleted": args.name, "namespace": args.namespace, "found": False}
    messages.append(f"deleted {args.name}")
    return {"deleted": args.name, "namespace": args.namespace, "found": True}


def _cmd_invoke(args, messages: list[str]) -> dict:
    name = args.name
    namespace = args.namespace
    if name is None or namespace is None:
        try:
            _, fn = _load_function_config(args)
        except UsageError:
            if name is None:
                raise UsageError(
                    "invoke needs a function name (argument or function config)"
                ) from None
            fn = None
        if name is None:
            name = fn.name
        if namespace is None:
            namespace = fn.namespace if fn is not None else "default"
    platform = _load_platform_config(args)
    service = get_service(platform, mock=args.mock)
    url = service.resolve_invoke_url(name, namespace, args.trigger)
    payload = args.data.encode() if args.data is not None else None

    if args.vus is not None or args.duration is not None:
        spec = LoadSpec(
            vus=args.vus if args.vus is not None else 1,
            duration=parse_duration(args.duration) if args.duration else 10,
            payload=payload or b"",
            trigger=args.trigger,
        )
        stats = load_test(url, spec)
        if args.out:
            stats.write_csv(args.out)
            messages.append(f"wrote {args.out}")
        messages.append(json.dumps(stats.to_dict(), indent=2))
        return stats.to_dict()

    result = invoke(url, payload, trigger=args.trigger)
    body = result.body.decode("utf-8", errors="replace")
    messages.append(f"{result.status_code} ({result.latency:.1f} ms)")
    if body:
        messages.append(body)
    return result.to_dict()


def _cmd_adapt(args, messages: list[str]) -> dict:
    created = scaffold.adapt_project(args.dir, args.runtime, source=_template_source(args))
    messages.append(f"added {len(created)} files to {args.dir}")
    for path in created:
        messages.append(f"  {path}")
    messages.append("next: follow the migration steps in Readme.md")
    return {"dir": str(args.dir), "created": [str(p) for p in created]}


_HANDLERS = {
    "newFunction": _cmd_new_function,
    "build": _cmd_build,
    "push": _cmd_push,
    "deploy": _cmd_deploy,
    "functions": _cmd_functions,
    "delete": _cmd_delete,
    "invoke": _cmd_invoke,
    "adapt": _cmd_adapt,
}


def _classify(exc: Exception) -> int:
    if isinstance(exc, _VALIDATION_ERRORS):
        return EXIT_VALIDATION
    if isinstance(exc, _PLATFORM_ERRORS):
        return EXIT_PLATFORM
    return EXIT_INTERNAL


def run(argv: Sequence[str]) -> CommandOutcome:
    """Execute one command; collects output instead of printing."""
    messages: list[str] = []
    _capture.sink = messages
    command = None
    wants_json = False
    try:
        parser = build_parser()
        try:
            args = parser.parse_args(list(argv))
        except _HelpRequested as help_exit:
            return CommandOutcome(help_exit.status, messages, None)
        command = args.command
        if command is None:
            raise UsageError(parser.format_help().rstrip())
        wants_json = bool(getattr(args, "json", False))
        data = _HANDLERS[command](args, messages)
        payload = None
        if wants_json:
            payload = {
                "command": command,
                "exitCode": EXIT_OK,
                "data": data,
                "error": None,
            }
        return CommandOutcome(EXIT_OK, messages, payload)
    except _HelpRequested as help_exit:
        return CommandOutcome(help_exit.status, messages, None)
    except GFaasError as exc:
        code = _classify(exc)
        messages.append(f"error: {exc}")
        payload = None
        if wants_json:
            payload = {
                "command": command,
                "exitCode": code,
                "data": None,
                "error": str(exc),
            }
        return CommandOutcome(code, messages, payload)
    except Exception as exc:  # pragma: no cover - programming errors
        messages.append(f"internal error: {exc!r}")
        payload = None
        if wants_json:
            payload = {
                "command": command,
                "exitCode": EXIT_INTERNAL,
                "data": None,
                "error": repr(exc),
            }
        return CommandOutcome(EXIT_INTERNAL, messages, payload)
    finally:
        _capture.sink = None


def main(argv: Sequence[str] | None = None) -> None:
    outcome = run(sys.argv[1:] if argv is None else argv)
    if outcome.json_payload is not None:
        for message in outcome.messages:
            print(message, file=sys.stderr)
        print(json.dumps(outcome.json_payload, indent=2))
    else:
        stream = sys.stdout if outcome.exit_code == EXIT_OK else sys.stderr
        for message in outcome.messages:
            print(message, file=stream)
    sys.exit(outcome.exit_code)


if __name__ == "__main__":
    main()
