"""
Bit-exact datagram codec for the coordination link.

Layout (big-endian):

    header   magic[4] version[1] tag[1] sender_id[2] seq[4] txn[4]   16 bytes
    0x01     ms_id[4] service[1] slot[1]
    0x02     accept[1] arfcn[2] slot[1]
    0x03-05  id[4]
    0x06     power[1] load[1]

decode never reads past the buffer and reports every malformed input as a
DecodeError carrying its code and byte offset.
"""

import struct
from typing import Dict, Tuple

from app.errors import DecodeError, DecodeErrorCode
from app.protocol.messages import (
    MAGIC, PROTOCOL_VERSION, AppointmentResponse, ChannelAppointment,
    ControlMessage, LinkRelease, MessageHeader, MessageKind, PowerState,
    ServiceKind, StatusReport, WakeupAck, WakeupCommand,
)

HEADER = struct.Struct(">4sBBHII")
HEADER_SIZE = HEADER.size

_PAYLOAD_STRUCTS: Dict[MessageKind, struct.Struct] = {
    MessageKind.CHANNEL_APPOINTMENT: struct.Struct(">IBB"),
    MessageKind.APPOINTMENT_RESPONSE: struct.Struct(">BHB"),
    MessageKind.WAKEUP_COMMAND: struct.Struct(">I"),
    MessageKind.WAKEUP_ACK: struct.Struct(">I"),
    MessageKind.LINK_RELEASE: struct.Struct(">I"),
    MessageKind.STATUS_REPORT: struct.Struct(">BB"),
}

_POWER_BYTES = {PowerState.SLEEP: 0, PowerState.ACTIVE: 1}
_SERVICE_BYTES = frozenset(int(kind) for kind in ServiceKind)

# Offsets of header fields, used to locate errors
_VERSION_OFFSET = 4
_TAG_OFFSET = 5


def encode(message: ControlMessage, header: MessageHeader) -> bytes:
    if header.tag is not message.kind:
        raise ValueError(f"header tag {header.tag.name} does not match {message.kind.name}")
    if header.transaction_id != message.transaction_id:
        raise ValueError("header and message transaction ids differ")

    prefix = HEADER.pack(header.magic, header.version, int(header.tag),
                         header.sender_id, header.seq, header.transaction_id)
    return prefix + _encode_payload(message)


def _encode_payload(message: ControlMessage) -> bytes:
    payload = message.payload
    layout = _PAYLOAD_STRUCTS[message.kind]
    if isinstance(payload, ChannelAppointment):
        return layout.pack(payload.ms_id, int(payload.service), payload.slot)
    if isinstance(payload, AppointmentResponse):
        return layout.pack(1 if payload.accept else 0, payload.arfcn, payload.slot)
    if isinstance(payload, (WakeupCommand, WakeupAck)):
        return layout.pack(payload.dbs_id)
    if isinstance(payload, LinkRelease):
        return layout.pack(payload.ms_id)
    return layout.pack(_POWER_BYTES[payload.power_state], payload.load_level)


def decode(data: bytes) -> Tuple[ControlMessage, MessageHeader]:
    data = bytes(data)
    if len(data) < HEADER_SIZE:
        _diagnose_short_header(data)

    magic, version, tag, sender_id, seq, txn = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DecodeError(DecodeErrorCode.BAD_MAGIC, 0, f"got {magic!r}")
    if version != PROTOCOL_VERSION:
        raise DecodeError(DecodeErrorCode.BAD_VERSION, _VERSION_OFFSET, f"got {version}")
    kind = _kind_of(tag)

    layout = _PAYLOAD_STRUCTS[kind]
    end = HEADER_SIZE + layout.size
    if len(data) < end:
        raise DecodeError(DecodeErrorCode.TRUNCATED, len(data),
                          f"{kind.name} needs {end} bytes")
    if len(data) > end:
        raise DecodeError(DecodeErrorCode.TRAILING_BYTES, end,
                          f"{len(data) - end} extra bytes")

    fields = layout.unpack_from(data, HEADER_SIZE)
    message = ControlMessage(transaction_id=txn, payload=_decode_payload(kind, fields))
    header = MessageHeader(sender_id=sender_id, seq=seq, transaction_id=txn, tag=kind)
    return message, header


def _diagnose_short_header(data: bytes):
    """Pick the most specific error for a buffer shorter than the header."""
    available = data[:len(MAGIC)]
    if available != MAGIC[:len(available)]:
        raise DecodeError(DecodeErrorCode.BAD_MAGIC, 0, f"got {available!r}")
    if len(data) > _VERSION_OFFSET and data[_VERSION_OFFSET] != PROTOCOL_VERSION:
        raise DecodeError(DecodeErrorCode.BAD_VERSION, _VERSION_OFFSET,
                          f"got {data[_VERSION_OFFSET]}")
    if len(data) > _TAG_OFFSET:
        _kind_of(data[_TAG_OFFSET])
    raise DecodeError(DecodeErrorCode.TRUNCATED, len(data),
                      f"header needs {HEADER_SIZE} bytes")


def _kind_of(tag: int) -> MessageKind:
    try:
        return MessageKind(tag)
    except ValueError:
        raise DecodeError(DecodeErrorCode.UNKNOWN_TAG, _TAG_OFFSET, f"tag 0x{tag:02X}") from None


def _bad_field(offset: int, detail: str) -> DecodeError:
    return DecodeError(DecodeErrorCode.BAD_FIELD, HEADER_SIZE + offset, detail)


def _decode_payload(kind: MessageKind, fields: tuple):
    if kind is MessageKind.CHANNEL_APPOINTMENT:
        ms_id, service, slot = fields
        if service not in _SERVICE_BYTES:
            raise _bad_field(4, f"service kind 0x{service:02X}")
        if slot > 7:
            raise _bad_field(5, f"slot {slot}")
        return ChannelAppointment(ms_id=ms_id, service=ServiceKind(service), slot=slot)

    if kind is MessageKind.APPOINTMENT_RESPONSE:
        accept, arfcn, slot = fields
        if accept not in (0, 1):
            raise _bad_field(0, f"accept flag {accept}")
        if slot > 7:
            raise _bad_field(3, f"slot {slot}")
        return AppointmentResponse(accept=bool(accept), arfcn=arfcn, slot=slot)

    if kind is MessageKind.WAKEUP_COMMAND:
        return WakeupCommand(dbs_id=fields[0])
    if kind is MessageKind.WAKEUP_ACK:
        return WakeupAck(dbs_id=fields[0])
    if kind is MessageKind.LINK_RELEASE:
        return LinkRelease(ms_id=fields[0])

    power, load_level = fields
    if power not in (0, 1):
        raise _bad_field(0, f"power state {power}")
    state = PowerState.ACTIVE if power else PowerState.SLEEP
    return StatusReport(power_state=state, load_level=load_level)
