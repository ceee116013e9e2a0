"""proto3 wire codec for the invocation messages.

Encodes and decodes exactly the two messages from function.proto:

    message GRequest  { map<string, string> headers = 1; bytes body = 2; }
    message GResponse { int32 status = 1; map<string, string> headers = 2;
                        bytes body = 3; }

Map entries are emitted in sorted key order so equal messages serialize
identically. Unknown fields are skipped on decode. Tests cross-check this
codec against the google.protobuf runtime.
"""

from __future__ import annotations

_WIRE_VARINT = 0
_WIRE_I64 = 1
_WIRE_LEN = 2
_WIRE_I32 = 5


def _varint(value: int) -> bytes:
    out = bytearray()
    while True:
        bits = value & 0x7F
        value >>= 7
        if value:
            out.append(bits | 0x80)
        else:
            out.append(bits)
            return bytes(out)


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise ValueError("truncated varint")
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise ValueError("varint too long")


def _len_field(field: int, payload: bytes) -> bytes:
    return _varint((field << 3) | _WIRE_LEN) + _varint(len(payload)) + payload


def _varint_field(field: int, value: int) -> bytes:
    return _varint((field << 3) | _WIRE_VARINT) + _varint(value)


def _map_entry(key: str, value: str) -> bytes:
    return _len_field(1, key.encode()) + _len_field(2, value.encode())


def _iter_fields(data: bytes):
    pos = 0
    while pos < len(data):
        key, pos = _read_varint(data, pos)
        field, wire = key >> 3, key & 0x7
        if wire == _WIRE_VARINT:
            value, pos = _read_varint(data, pos)
        elif wire == _WIRE_LEN:
            length, pos = _read_varint(data, pos)
            if pos + length > len(data):
                raise ValueError("truncated length-delimited field")
            value = data[pos : pos + length]
            pos += length
        elif wire == _WIRE_I64:
            value, pos = data[pos : pos + 8], pos + 8
        elif wire == _WIRE_I32:
            value, pos = data[pos : pos + 4], pos + 4
        else:
            raise ValueError(f"unsupported wire type {wire}")
        yield field, wire, value


def _decode_map_entry(data: bytes) -> tuple[str, str]:
    key = value = ""
    for field, wire, payload in _iter_fields(data):
        if field == 1 and wire == _WIRE_LEN:
            key = payload.decode()
        elif field == 2 and wire == _WIRE_LEN:
            value = payload.decode()
    return key, value


def encode_request(headers: dict[str, str], body: bytes) -> bytes:
    out = bytearray()
    for key in sorted(headers):
        out += _len_field(1, _map_entry(key, headers[key]))
    if body:
        out += _len_field(2, body)
    return bytes(out)


def decode_request(data: bytes) -> tuple[dict[str, str], bytes]:
    headers: dict[str, str] = {}
    body = b""
    for field, wire, payload in _iter_fields(data):
        if field == 1 and wire == _WIRE_LEN:
            key, value = _decode_map_entry(payload)
            headers[key] = value
        elif field == 2 and wire == _WIRE_LEN:
            body = bytes(payload)
    return headers, body


def encode_response(status: int, headers: dict[str, str], body: bytes) -> bytes:
    if status < 0:
        raise ValueError("status must be non-negative")
    out = bytearray()
    if status:
        out += _varint_field(1, status)
    for key in sorted(headers):
        out += _len_field(2, _map_entry(key, headers[key]))
    if body:
        out += _len_field(3, body)
    return bytes(out)


def decode_response(data: bytes) -> tuple[int, dict[str, str], bytes]:
    status = 0
    headers: dict[str, str] = {}
    body = b""
    for field, wire, payload in _iter_fields(data):
        if field == 1 and wire == _WIRE_VARINT:
            status = payload
        elif field == 2 and wire == _WIRE_LEN:
            key, value = _decode_map_entry(payload)
            headers[key] = value
        elif field == 3 and wire == _WIRE_LEN:
            body = bytes(payload)
    return status, headers, body
