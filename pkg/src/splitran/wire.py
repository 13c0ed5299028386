"""Backhaul message set and binary codec for the CBS-TBS link.

Every message is one datagram with a fixed little-endian layout:

    [msg_type: u8][tbs_id: u16][timestamp_us: u64][payload]

The 11-byte header is followed by a fixed-length payload per type.  There
is no framing, no varints and no optional fields, so the byte layout is
the wire contract and ``decode(encode(m)) == m`` holds for every
well-formed message.  Messages are immutable values; the codec is
stateless.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, fields
from typing import ClassVar, Union

_HEADER = struct.Struct("<BHQ")
HEADER_LEN = _HEADER.size  # 11 bytes


class WireError(ValueError):
    """Base class for codec failures."""


class UnknownType(WireError):
    """First byte is not an assigned message type."""


class TruncatedMessage(WireError):
    """Input shorter than the declared type's fixed length."""


class TrailingBytes(WireError):
    """Input longer than the declared type's fixed length."""


class MalformedField(WireError):
    """A field value no encoder could have produced (e.g. boolean > 1)."""


@dataclass(frozen=True)
class LoadReport:
    """Periodic traffic-station load sample; also reused as the
    mode-change notification emitted when a sleep/wake transition
    completes.  ``data_rate_bps`` counts payload bytes per second on the
    packet data channels."""

    TYPE: ClassVar[int] = 1
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<BBI")

    tbs_id: int
    timestamp_us: int
    slot_usage: int
    arfcn_usage: int
    data_rate_bps: int


@dataclass(frozen=True)
class TbsRequest:
    """CBS asks the chosen traffic station for a channel assignment."""

    TYPE: ClassVar[int] = 2
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<I")

    tbs_id: int
    timestamp_us: int
    request_id: int


@dataclass(frozen=True)
class TbsResponse:
    """Assignment result; a refusal has assigned=False and zeroed
    (arfcn, timeslot)."""

    TYPE: ClassVar[int] = 3
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<IBHB")

    tbs_id: int
    timestamp_us: int
    request_id: int
    assigned: bool
    arfcn: int
    timeslot: int


@dataclass(frozen=True)
class Sleep:
    """Turn-off command; must be acknowledged."""

    TYPE: ClassVar[int] = 4
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<I")

    tbs_id: int
    timestamp_us: int
    command_id: int


@dataclass(frozen=True)
class Wake:
    """Turn-on command; must be acknowledged."""

    TYPE: ClassVar[int] = 5
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<I")

    tbs_id: int
    timestamp_us: int
    command_id: int


@dataclass(frozen=True)
class Ack:
    """Acknowledges one Sleep or Wake by its command id."""

    TYPE: ClassVar[int] = 6
    _PAYLOAD: ClassVar[struct.Struct] = struct.Struct("<I")

    tbs_id: int
    timestamp_us: int
    acked_command_id: int


Message = Union[LoadReport, TbsRequest, TbsResponse, Sleep, Wake, Ack]

_BY_TYPE: dict[int, type] = {
    cls.TYPE: cls for cls in (LoadReport, TbsRequest, TbsResponse, Sleep, Wake, Ack)
}


def message_length(msg_type: int) -> int:
    """Total encoded length for a message type."""
    try:
        return HEADER_LEN + _BY_TYPE[msg_type]._PAYLOAD.size
    except KeyError:
        raise UnknownType(f"unassigned message type {msg_type}") from None


def _payload_values(msg: Message) -> tuple:
    # Field order after (tbs_id, timestamp_us) matches the payload struct.
    vals = tuple(getattr(msg, f.name) for f in fields(msg))[2:]
    return tuple(int(v) for v in vals)


def encode(msg: Message) -> bytes:
    """Encode a message to its fixed-layout byte sequence."""
    head = _HEADER.pack(msg.TYPE, msg.tbs_id, msg.timestamp_us)
    return head + msg._PAYLOAD.pack(*_payload_values(msg))


def decode(data: bytes) -> Message:
    """Decode a byte sequence into the unique message that encodes to it.

    Raises UnknownType, TruncatedMessage, TrailingBytes or MalformedField;
    never reads past the declared length.
    """
    if len(data) < 1:
        raise TruncatedMessage("empty input")
    msg_type = data[0]
    cls = _BY_TYPE.get(msg_type)
    if cls is None:
        raise UnknownType(f"unassigned message type {msg_type}")
    expected = HEADER_LEN + cls._PAYLOAD.size
    if len(data) < expected:
        raise TruncatedMessage(
            f"type {msg_type} needs {expected} bytes, got {len(data)}"
        )
    if len(data) > expected:
        raise TrailingBytes(
            f"type {msg_type} is {expected} bytes, got {len(data)}"
        )
    _, tbs_id, timestamp_us = _HEADER.unpack_from(data)
    payload = cls._PAYLOAD.unpack_from(data, HEADER_LEN)
    if cls is TbsResponse:
        request_id, assigned, arfcn, timeslot = payload
        if assigned > 1:
            raise MalformedField(f"assigned flag must be 0 or 1, got {assigned}")
        return TbsResponse(tbs_id, timestamp_us, request_id, bool(assigned), arfcn, timeslot)
    return cls(tbs_id, timestamp_us, *payload)
