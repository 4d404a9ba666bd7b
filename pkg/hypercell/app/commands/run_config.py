from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, model_validator

import hypercell_config as config

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_TRANSPORT = 3

TRACE_SUFFIX = ".hcn-trace"


class Transport(str, Enum):
    INPROC = "inproc"
    UDP = "udp"


class RunConfig(BaseModel):
    scenario: Path
    seed: Optional[int] = None
    transport: Transport = Transport.INPROC
    trace_out: Optional[Path] = None
    horizon_us: Optional[int] = Field(default=None, ge=0)
    verbosity: int = Field(default=0, ge=0)
    json_lines: bool = False
    host: str = config.UDP_HOST
    sbs_port: int = Field(default=config.SBS_PORT, ge=1, le=65535)
    dbs_port_base: int = Field(default=config.DBS_PORT_BASE, ge=1, le=65535)
    udp_timeout_s: float = Field(default=config.UDP_TIMEOUT_S, gt=0)

    @model_validator(mode="after")
    def check_ports(self) -> "RunConfig":
        if self.sbs_port == self.dbs_port_base:
            raise ValueError("sbs_port and dbs_port_base must differ")
        return self

    def trace_path(self) -> Path:
        if self.trace_out is not None:
            return self.trace_out
        return Path(self.scenario.stem + TRACE_SUFFIX)
