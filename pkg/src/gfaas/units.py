"""Parsing and canonical formatting for CPU, memory, and duration values.

CPU quantities use the Kubernetes requests/limits grammar: whole or
fractional cores ("2", "0.5") or millicores ("500m"). Memory uses binary
suffixes ("4Gi", "512Mi") or plain bytes. Durations are an integer plus a
unit suffix from {s, m, h}; a bare integer means seconds.

Parsers normalize to integers (millicores, bytes, seconds) and raise
ValueError on anything else; callers wrap into ValidationError with the
field path.
"""

from __future__ import annotations

import re

_CPU_MILLI_RE = re.compile(r"^(\d+)m$")
_CPU_CORES_RE = re.compile(r"^(\d+(?:\.\d+)?)$")
_MEM_RE = re.compile(r"^(\d+)(Ki|Mi|Gi|Ti|Pi|Ei)?$")
_DURATION_RE = re.compile(r"^(\d+)([smh])?$")

_MEM_FACTORS = {
    None: 1,
    "Ki": 1024,
    "Mi": 1024**2,
    "Gi": 1024**3,
    "Ti": 1024**4,
    "Pi": 1024**5,
    "Ei": 1024**6,
}

_DURATION_FACTORS = {None: 1, "s": 1, "m": 60, "h": 3600}


def parse_cpu(value: str | int | float) -> int:
    """Return the CPU quantity in millicores."""
    if isinstance(value, bool):
        raise ValueError("CPU quantity must be a number or string")
    if isinstance(value, (int, float)):
        millicores = round(value * 1000)
    else:
        text = value.strip()
        if m := _CPU_MILLI_RE.match(text):
            millicores = int(m.group(1))
        elif m := _CPU_CORES_RE.match(text):
            millicores = round(float(m.group(1)) * 1000)
        else:
            raise ValueError(f"invalid CPU quantity {value!r}")
    if millicores <= 0:
        raise ValueError("CPU quantity must be positive")
    return millicores


def format_cpu(millicores: int) -> str:
    if millicores % 1000 == 0:
        return str(millicores // 1000)
    return f"{millicores}m"


def parse_memory(value: str | int) -> int:
    """Return the memory quantity in bytes."""
    if isinstance(value, bool):
        raise ValueError("memory quantity must be an integer or string")
    if isinstance(value, int):
        amount = value
    else:
        m = _MEM_RE.match(value.strip())
        if not m:
            raise ValueError(f"invalid memory quantity {value!r}")
        amount = int(m.group(1)) * _MEM_FACTORS[m.group(2)]
    if amount <= 0:
        raise ValueError("memory quantity must be positive")
    return amount


def format_memory(nbytes: int) -> str:
    for suffix in ("Ei", "Pi", "Ti", "Gi", "Mi", "Ki"):
        factor = _MEM_FACTORS[suffix]
        if nbytes % factor == 0:
            return f"{nbytes // factor}{suffix}"
    return str(nbytes)


def parse_duration(value: str | int) -> int:
    """Return the duration in whole seconds."""
    if isinstance(value, bool):
        raise ValueError("duration must be an integer or string")
    if isinstance(value, int):
        seconds = value
    else:
        m = _DURATION_RE.match(value.strip())
        if not m:
            raise ValueError(f"invalid duration {value!r}")
        seconds = int(m.group(1)) * _DURATION_FACTORS[m.group(2)]
    if seconds <= 0:
        raise ValueError("duration must be positive")
    return seconds


def format_duration(seconds: int) -> str:
    if seconds % 3600 == 0:
        return f"{seconds // 3600}h"
    if seconds % 60 == 0:
        return f"{seconds // 60}m"
    return f"{seconds}s"
