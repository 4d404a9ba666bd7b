"""
Split-process mode: the SBS and every DBS run in their own OS process.

The parent keeps the handsets, the radio medium and the virtual clock. Each
station process binds its UDP port and serves calls from the parent over a
pipe; coordination datagrams go station-to-station over loopback and are
taken from the receiver's inbox when the parent's clock says they arrive.
"""

import logging
import multiprocessing
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

import hypercell_config as config
from app.engine.scenario import Scenario, StationSpec
from app.engine.simulator import RunResult, Simulator, build_station
from app.engine.steps import Datagram, StepResult
from app.errors import TransportError
from app.protocol.udp_link import Address, UdpLink

logger = logging.getLogger(__name__)

_CONTEXT = multiprocessing.get_context("fork")


def station_addresses(scenario: Scenario, host: str, sbs_port: int, dbs_port_base: int) -> Dict[int, Address]:
    """SBS on sbs_port, the k-th DBS (in scenario order) on dbs_port_base + k."""
    addresses = {}
    if scenario.sbs is not None:
        addresses[scenario.sbs.id] = (host, sbs_port)
    for k, spec in enumerate(scenario.data_stations):
        addresses[spec.id] = (host, dbs_port_base + k)
    ports = [port for _, port in addresses.values()]
    if len(set(ports)) != len(ports):
        raise TransportError(f"SBS port {sbs_port} falls inside the DBS port range", port=sbs_port)
    return addresses


def _ship(link: UdpLink, step: StepResult) -> StepResult:
    """Put outgoing datagrams on the wire; the parent only needs their envelope."""
    emissions = []
    for emission in step.emissions:
        if isinstance(emission, Datagram):
            link.send(emission.receiver, emission.data)
            emission = replace(emission, data=None)
        emissions.append(emission)
    step.emissions = emissions
    return step


def station_main(conn, scenario: Scenario, spec: StationSpec, addresses: Dict[int, Address], timeout_s: float):
    """Child process body: one station, one UDP link, requests served in order."""
    host, port = addresses[spec.id]
    try:
        link = UdpLink(host, port, addresses)
    except TransportError as e:
        conn.send(("error", str(e), e.port))
        conn.close()
        return

    station = build_station(scenario, spec)
    conn.send(("ready", None, None))
    try:
        while True:
            try:
                method, args = conn.recv()
            except EOFError:
                break
            if method == "close":
                break
            try:
                if method == "on_datagram":
                    envelope, now = args
                    data = link.take(envelope.sender, envelope.seq, timeout_s)
                    step = station.on_datagram(replace(envelope, data=data), now)
                else:
                    step = getattr(station, method)(*args)
                conn.send(("ok", _ship(link, step), None))
            except TransportError as e:
                conn.send(("error", str(e), e.port))
    finally:
        link.close()
        conn.close()


class StationProxy:
    """Parent-side stand-in exposing the station entity interface over the pipe."""

    def __init__(self, entity: str, process, conn, timeout_s: float):
        self.entity = entity
        self.process = process
        self.conn = conn
        self.timeout_s = timeout_s

    def _call(self, method: str, *args) -> StepResult:
        try:
            self.conn.send((method, args))
            if not self.conn.poll(self.timeout_s * 2):
                raise TransportError(f"{self.entity} did not answer {method}")
            status, value, port = self.conn.recv()
        except (EOFError, BrokenPipeError, ConnectionResetError):
            raise TransportError(f"{self.entity} process died") from None
        if status == "error":
            raise TransportError(value, port=port)
        return value

    def start(self, now):
        return self._call("start", now)

    def on_air(self, event, now):
        return self._call("on_air", event, now)

    def on_datagram(self, datagram, now):
        return self._call("on_datagram", datagram, now)

    def on_timer(self, timer, now):
        return self._call("on_timer", timer, now)

    def page(self, now, ms_id):
        return self._call("page", now, ms_id)

    def deny_next_appointment(self, now):
        return self._call("deny_next_appointment", now)

    def close(self):
        try:
            self.conn.send(("close", ()))
        except (BrokenPipeError, OSError):
            pass
        self.process.join(timeout=self.timeout_s)
        if self.process.is_alive():
            self.process.terminate()
            self.process.join()
        self.conn.close()


class SplitStations:
    """Station factory for the simulator that spawns one process per station."""

    def __init__(self, host: str = config.UDP_HOST, sbs_port: int = config.SBS_PORT,
                 dbs_port_base: int = config.DBS_PORT_BASE, timeout_s: float = config.UDP_TIMEOUT_S):
        self.host = host
        self.sbs_port = sbs_port
        self.dbs_port_base = dbs_port_base
        self.timeout_s = timeout_s
        self.proxies: List[StationProxy] = []

    def __call__(self, scenario: Scenario) -> Dict[str, StationProxy]:
        addresses = station_addresses(scenario, self.host, self.sbs_port, self.dbs_port_base)
        stations: Dict[str, StationProxy] = {}
        failure: Optional[Tuple[str, Optional[int]]] = None
        for spec in scenario.stations:
            parent_conn, child_conn = _CONTEXT.Pipe()
            process = _CONTEXT.Process(
                target=station_main,
                args=(child_conn, scenario, spec, addresses, self.timeout_s),
                name=f"hcn-{spec.entity}",
                daemon=True,
            )
            process.start()
            child_conn.close()
            proxy = StationProxy(spec.entity, process, parent_conn, self.timeout_s)
            self.proxies.append(proxy)
            stations[spec.entity] = proxy

            if not parent_conn.poll(self.timeout_s):
                failure = (f"{spec.entity} did not start", None)
                break
            status, message, port = parent_conn.recv()
            if status != "ready":
                failure = (message, port)
                break
            logger.info(f"{spec.entity} running as pid {process.pid} on {addresses[spec.id]}")

        if failure is not None:
            self.close()
            raise TransportError(failure[0], port=failure[1])
        return stations

    def close(self):
        for proxy in self.proxies:
            proxy.close()
        self.proxies = []

    def __enter__(self) -> "SplitStations":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()


def run_split(scenario: Scenario, host: str = config.UDP_HOST, sbs_port: int = config.SBS_PORT,
              dbs_port_base: int = config.DBS_PORT_BASE, timeout_s: float = config.UDP_TIMEOUT_S) -> RunResult:
    with SplitStations(host, sbs_port, dbs_port_base, timeout_s) as stations:
        return Simulator(scenario, station_factory=stations).run()
