"""
UDP transport for the coordination link (split-process mode).

A reader thread drains the socket into a queue; the station's own loop stays
single-threaded and pulls exactly the datagram it has been told to expect,
parking anything that arrived early.
"""

import logging
import queue
import socket
import threading
import time
from typing import Dict, Tuple

from app.errors import TransportError
from app.protocol.codec import HEADER, HEADER_SIZE

logger = logging.getLogger(__name__)

MAX_DATAGRAM = 2048
_READ_POLL_S = 0.2

Address = Tuple[str, int]


def datagram_key(data: bytes) -> Tuple[int, int]:
    """(sender_id, seq) straight from an HCN1 header."""
    if len(data) < HEADER_SIZE:
        return -1, -1
    _, _, _, sender_id, seq, _ = HEADER.unpack_from(data, 0)
    return sender_id, seq


class UdpLink:
    def __init__(self, host: str, port: int, peers: Dict[int, Address]):
        self.address = (host, port)
        self.peers = dict(peers)
        self.inbox: "queue.Queue[bytes]" = queue.Queue()
        self._parked: Dict[Tuple[int, int], bytes] = {}
        self._stop = threading.Event()

        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self.sock.bind(self.address)
        except OSError as e:
            self.sock.close()
            raise TransportError(f"cannot bind UDP {host}:{port}: {e.strerror}", port=port) from None
        self.sock.settimeout(_READ_POLL_S)

        self._reader = threading.Thread(target=self._read_loop, name=f"udp-{port}", daemon=True)
        self._reader.start()
        logger.info(f"UDP link bound on {host}:{port}")

    def _read_loop(self):
        while not self._stop.is_set():
            try:
                data, _ = self.sock.recvfrom(MAX_DATAGRAM)
            except socket.timeout:
                continue
            except OSError:
                break
            self.inbox.put(data)

    def send(self, receiver_id: int, data: bytes):
        address = self.peers.get(receiver_id)
        if address is None:
            logger.warning(f"No UDP address for station {receiver_id}, datagram dropped")
            return
        self.sock.sendto(data, address)

    def take(self, sender_id: int, seq: int, timeout_s: float) -> bytes:
        """Block until the datagram (sender_id, seq) is here; TransportError after timeout_s."""
        key = (sender_id, seq)
        if key in self._parked:
            return self._parked.pop(key)

        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            try:
                if remaining <= 0:
                    raise queue.Empty
                data = self.inbox.get(timeout=remaining)
            except queue.Empty:
                raise TransportError(
                    f"datagram seq {seq} from station {sender_id} not received within {timeout_s}s",
                    port=self.address[1],
                ) from None
            arrived = datagram_key(data)
            if arrived == key:
                return data
            self._parked[arrived] = data

    def close(self):
        self._stop.set()
        self._reader.join(timeout=2 * _READ_POLL_S)
        self.sock.close()
