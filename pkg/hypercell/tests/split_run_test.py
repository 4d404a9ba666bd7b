import os
import socket
import sys
import unittest
from pathlib import Path

# Add hypercell to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.engine.conformance import check_trace
from app.engine.scenario import load_scenario
from app.engine.simulator import run_scenario
from app.engine.station_host import run_split, station_addresses
from app.errors import TransportError
from app.protocol.codec import encode
from app.protocol.messages import ControlMessage, LinkRelease, MessageHeader
from app.protocol.udp_link import UdpLink, datagram_key

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
HOST = "127.0.0.1"
SBS_PORT = 47700
DBS_PORT_BASE = 47701


def release_bytes(sender, seq):
    message = ControlMessage(seq, LinkRelease(ms_id=100))
    return encode(message, MessageHeader.for_message(message, sender_id=sender, seq=seq))


def flow(records):
    return [(r.time, r.actor, r.verb, r.subject) for r in records]


class SplitRunTests(unittest.TestCase):

    def test_same_flow_as_single_process(self):
        """One process per station over UDP reproduces the in-process run."""
        for name, template in (("mo", "mo"), ("mt", "mt"), ("wakeup", "mo")):
            scenario = load_scenario(SCENARIO_DIR / f"{name}.hcn-scn")
            expected = run_scenario(scenario)
            split = run_split(scenario, host=HOST, sbs_port=SBS_PORT, dbs_port_base=DBS_PORT_BASE, timeout_s=2.0)
            self.assertEqual(flow(split.records), flow(expected.records), name)
            self.assertTrue(check_trace(split.records, template).passed, name)
            self.assertEqual(split.end_us, expected.end_us)

    def test_port_in_use(self):
        """A port that is already bound fails the run with a transport error."""
        blocker = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        blocker.bind((HOST, SBS_PORT + 10))
        try:
            scenario = load_scenario(SCENARIO_DIR / "mo.hcn-scn")
            with self.assertRaises(TransportError) as ctx:
                run_split(scenario, host=HOST, sbs_port=SBS_PORT + 10, dbs_port_base=SBS_PORT + 11, timeout_s=2.0)
            self.assertEqual(ctx.exception.port, SBS_PORT + 10)
        finally:
            blocker.close()

    def test_overlapping_port_plan(self):
        scenario = load_scenario(SCENARIO_DIR / "deny.hcn-scn")
        with self.assertRaises(TransportError):
            station_addresses(scenario, HOST, sbs_port=5701, dbs_port_base=5700)
        addresses = station_addresses(scenario, HOST, sbs_port=5700, dbs_port_base=5701)
        self.assertEqual(addresses, {0: (HOST, 5700), 1: (HOST, 5701), 2: (HOST, 5702)})


class UdpLinkTests(unittest.TestCase):

    def test_take_waits_for_the_expected_datagram(self):
        """Early arrivals are parked until asked for."""
        receiver = UdpLink(HOST, SBS_PORT + 20, {})
        sender = UdpLink(HOST, SBS_PORT + 21, {0: (HOST, SBS_PORT + 20)})
        try:
            sender.send(0, release_bytes(sender=1, seq=2))
            sender.send(0, release_bytes(sender=1, seq=1))
            self.assertEqual(datagram_key(receiver.take(1, 1, timeout_s=2.0)), (1, 1))
            self.assertEqual(datagram_key(receiver.take(1, 2, timeout_s=2.0)), (1, 2))
            with self.assertRaises(TransportError):
                receiver.take(1, 3, timeout_s=0.1)
        finally:
            sender.close()
            receiver.close()

    def test_datagram_key_of_short_data(self):
        self.assertEqual(datagram_key(b"HCN"), (-1, -1))
        self.assertEqual(datagram_key(release_bytes(sender=4, seq=9)), (4, 9))


if __name__ == '__main__':
    unittest.main()
