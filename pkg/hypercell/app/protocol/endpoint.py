"""
Coordination endpoint owned by one base station.

Outgoing messages get a fresh per-receiver seq and are encoded to HCN1 bytes;
incoming bytes are decoded and passed through the ordering filter. Drops and
decode failures become trace records instead of exceptions.
"""

import logging
from typing import Dict, Optional, Tuple

from app.engine.steps import Datagram, StepResult
from app.engine.trace import Verb
from app.errors import DecodeError
from app.protocol import codec
from app.protocol.messages import ControlMessage, MessageHeader
from app.protocol.ordering import Delivery, PeerChannelState, SequenceCounter, accept_in_order

logger = logging.getLogger(__name__)

_DROP_VERBS = {
    Delivery.DROP_DUPLICATE: Verb.DROP_DUPLICATE,
    Delivery.DROP_STALE: Verb.DROP_STALE,
}


class ControlEndpoint:
    def __init__(self, station_id: int, entity: str, peers: Dict[int, str]):
        self.station_id = station_id
        self.entity = entity
        # numeric station id -> entity id, used to name peers in traces
        self.peers = dict(peers)
        self.sequences = SequenceCounter()
        self.peer_state = PeerChannelState()

    def peer_entity(self, station_id: int) -> str:
        return self.peers.get(station_id, self.entity)

    def outgoing(self, receiver_id: int, message: ControlMessage) -> Datagram:
        seq = self.sequences.next_for(receiver_id)
        header = MessageHeader.for_message(message, sender_id=self.station_id, seq=seq)
        data = codec.encode(message, header)
        logger.debug(f"{self.entity} -> {receiver_id}: {message.kind.name} seq={seq} txn={message.transaction_id}")
        return Datagram(sender=self.station_id, receiver=receiver_id, seq=seq, data=data)

    def incoming(self, datagram: Datagram, now: int) -> Tuple[Optional[ControlMessage], Optional[MessageHeader], StepResult]:
        """Decode and order-check one datagram; the message is None when it must not be delivered."""
        step = StepResult()
        peer = self.peer_entity(datagram.sender)
        try:
            message, header = codec.decode(datagram.data or b"")
        except DecodeError as e:
            logger.warning(f"{self.entity}: undecodable datagram from {peer}: {e}")
            step.trace(now, self.entity, Verb.DECODE_ERROR, peer,
                       code=e.code.value, offset=e.offset)
            return None, None, step

        verdict = accept_in_order(self.peer_state, header)
        if verdict is not Delivery.DELIVER:
            step.trace(now, self.entity, _DROP_VERBS[verdict], self.peer_entity(header.sender_id),
                       seq=header.seq, txn=header.transaction_id)
            return None, header, step
        return message, header, step
