"""
Per-peer ordering filter for the datagram link.

UDP may duplicate or reorder datagrams; the receiver only hands a message to
its state machine when its seq is newer than anything already delivered from
that sender.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict

from app.protocol.messages import U32_MAX, MessageHeader

logger = logging.getLogger(__name__)


class Delivery(str, Enum):
    DELIVER = "DELIVER"
    DROP_DUPLICATE = "DROP_DUPLICATE"
    DROP_STALE = "DROP_STALE"


@dataclass
class PeerChannelState:
    last_seq_seen: Dict[int, int] = field(default_factory=dict)
    duplicates: int = 0
    reordered: int = 0


def accept_in_order(state: PeerChannelState, header: MessageHeader) -> Delivery:
    last = state.last_seq_seen.get(header.sender_id, 0)
    if header.seq > last:
        state.last_seq_seen[header.sender_id] = header.seq
        return Delivery.DELIVER
    if header.seq == last:
        state.duplicates += 1
        logger.debug(f"Duplicate seq {header.seq} from sender {header.sender_id}")
        return Delivery.DROP_DUPLICATE
    state.reordered += 1
    logger.debug(f"Stale seq {header.seq} from sender {header.sender_id} (last {last})")
    return Delivery.DROP_STALE


class SequenceCounter:
    """Strictly increasing seq per receiver; the first datagram to a peer carries 1."""

    def __init__(self):
        self._next: Dict[int, int] = {}

    def next_for(self, receiver_id: int) -> int:
        seq = self._next.get(receiver_id, 1)
        if seq > U32_MAX:
            raise OverflowError(f"sequence space exhausted towards {receiver_id}")
        self._next[receiver_id] = seq + 1
        return seq
