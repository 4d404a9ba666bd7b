"""
Scenario files (.hcn-scn)

Line-oriented text with four sections:

    [knobs]       key=value, one per line
    [stations]    role=SBS id=0 arfcn=50 color_code=1
    [mobiles]     id=100
    [stimuli]     t=1000000 action=MO_CALL ms=100 duration_us=2000000

`#` starts a comment. Records parse into pydantic models; anything broken
raises ScenarioError listing every problem with its line number.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

import hypercell_config as config
from app.air.um_channels import (
    DEFAULT_CHANNELS, CarrierConfig, LogicalChannel, Role, validate_bs_channels,
    validate_carrier_pair,
)
from app.errors import ScenarioError
from app.protocol.messages import U16_MAX, U32_MAX, PowerState
from app.utils.entities import DBS, MS, entity_id, parse_entity

logger = logging.getLogger(__name__)

SECTIONS = ("knobs", "stations", "mobiles", "stimuli")


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Knobs(BaseModel):
    seed: int = 1
    horizon_us: Optional[int] = Field(default=None, ge=0)
    high_load_threshold: float = Field(default=config.HIGH_LOAD_THRESHOLD, ge=0.0, le=1.0)
    wake_latency_us: int = Field(default=config.WAKE_LATENCY_US, ge=0)
    idle_timeout_us: int = Field(default=config.IDLE_TIMEOUT_US, ge=1)
    control_delay_us: int = Field(default=config.CONTROL_DELAY_US, ge=0)
    air_delay_us: int = Field(default=config.AIR_DELAY_US, ge=0)
    power_sleep_w: float = Field(default=config.POWER_SLEEP_W, ge=0.0)
    power_waking_w: float = Field(default=config.POWER_WAKING_W, ge=0.0)
    power_active_w: float = Field(default=config.POWER_ACTIVE_W, ge=0.0)
    # None means open admission
    admission_allowlist: Optional[List[int]] = None

    @field_validator("admission_allowlist", mode="before")
    @classmethod
    def split_allowlist(cls, value):
        return _split_list(value)

    def state_powers(self) -> Dict[PowerState, float]:
        return {
            PowerState.SLEEP: self.power_sleep_w,
            PowerState.WAKING: self.power_waking_w,
            PowerState.ACTIVE: self.power_active_w,
        }


class StationSpec(BaseModel):
    role: Role
    id: int = Field(ge=0, le=U16_MAX)
    arfcn: int = Field(ge=0, le=U16_MAX)
    color_code: int = Field(ge=0, le=7)
    capacity: int = Field(default=config.DBS_CAPACITY, ge=1, le=8)
    power: PowerState = PowerState.ACTIVE
    channels: Optional[List[LogicalChannel]] = None
    line: Optional[int] = Field(default=None, exclude=True)

    @field_validator("channels", mode="before")
    @classmethod
    def split_channels(cls, value):
        return _split_list(value)

    @field_validator("power")
    @classmethod
    def no_waking_start(cls, value: PowerState) -> PowerState:
        if value is PowerState.WAKING:
            raise ValueError("a station starts ACTIVE or SLEEP")
        return value

    @property
    def entity(self) -> str:
        return entity_id(self.role.value, self.id)

    @property
    def channel_set(self) -> frozenset:
        return frozenset(self.channels) if self.channels is not None else DEFAULT_CHANNELS[self.role]

    @property
    def carrier(self) -> CarrierConfig:
        return CarrierConfig(arfcn=self.arfcn, color_code=self.color_code, role=self.role)


class MobileSpec(BaseModel):
    id: int = Field(ge=0, le=U32_MAX)
    line: Optional[int] = Field(default=None, exclude=True)


class StimulusAction(str, Enum):
    POWER_ON = "POWER_ON"
    MO_CALL = "MO_CALL"
    MT_CALL = "MT_CALL"
    DENY_NEXT_APPOINTMENT = "DENY_NEXT_APPOINTMENT"
    REMOVE = "REMOVE"


_MS_ACTIONS = (StimulusAction.POWER_ON, StimulusAction.MO_CALL, StimulusAction.MT_CALL)


class Stimulus(BaseModel):
    t: int = Field(ge=0)
    action: StimulusAction
    ms: Optional[int] = Field(default=None, ge=0, le=U32_MAX)
    dbs: Optional[int] = Field(default=None, ge=0, le=U16_MAX)
    entity: Optional[str] = None
    duration_us: int = Field(default=0, ge=0)
    line: Optional[int] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def check_target(self) -> "Stimulus":
        if self.action in _MS_ACTIONS and self.ms is None:
            raise ValueError(f"{self.action.value} needs ms=")
        if self.action is StimulusAction.DENY_NEXT_APPOINTMENT and self.dbs is None:
            raise ValueError("DENY_NEXT_APPOINTMENT needs dbs=")
        if self.action is StimulusAction.REMOVE:
            if self.entity is None:
                raise ValueError("REMOVE needs entity=")
            parse_entity(self.entity)
        return self

    @property
    def target(self) -> str:
        if self.action in _MS_ACTIONS:
            return entity_id(MS, self.ms)
        if self.action is StimulusAction.DENY_NEXT_APPOINTMENT:
            return entity_id(DBS, self.dbs)
        return self.entity


def _where(record) -> str:
    return f"line {record.line}: " if record.line else ""


class Scenario(BaseModel):
    knobs: Knobs = Field(default_factory=Knobs)
    stations: List[StationSpec] = Field(default_factory=list)
    mobiles: List[MobileSpec] = Field(default_factory=list)
    stimuli: List[Stimulus] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_consistency(self) -> "Scenario":
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def problems(self) -> List[str]:
        """Cross-record checks: uniqueness, channel legality, carrier pairing, references, order."""
        problems: List[str] = []

        sbs_list = [s for s in self.stations if s.role is Role.SBS]
        if len(sbs_list) > 1:
            problems.append(f"{_where(sbs_list[1])}at most one SBS is allowed")

        seen_ids: Dict[int, StationSpec] = {}
        seen_arfcns: Dict[int, StationSpec] = {}
        for station in self.stations:
            if station.id in seen_ids:
                problems.append(f"{_where(station)}station id {station.id} already used")
            if station.arfcn in seen_arfcns:
                problems.append(f"{_where(station)}ARFCN {station.arfcn} already used")
            seen_ids.setdefault(station.id, station)
            seen_arfcns.setdefault(station.arfcn, station)

            channels = validate_bs_channels(station.role, station.channel_set)
            if not channels.ok:
                names = ",".join(c.value for c in channels.violations)
                problems.append(f"{_where(station)}{station.role.value} cannot carry {names}")

        if not sbs_list and any(s.role is Role.DBS for s in self.stations):
            problems.append("a DBS needs an SBS to coordinate with")
        if sbs_list:
            for dbs in (s for s in self.stations if s.role is Role.DBS):
                pairing = validate_carrier_pair(sbs_list[0].carrier, dbs.carrier)
                if not pairing.ok:
                    names = ",".join(v.value for v in pairing.violations)
                    problems.append(f"{_where(dbs)}DBS {dbs.id} does not pair with the SBS: {names}")

        ms_ids = set()
        for mobile in self.mobiles:
            if mobile.id in ms_ids:
                problems.append(f"{_where(mobile)}mobile id {mobile.id} already used")
            ms_ids.add(mobile.id)

        entities = {s.entity for s in self.stations} | {entity_id(MS, m) for m in ms_ids}
        dbs_ids = {s.id for s in self.stations if s.role is Role.DBS}
        previous = 0
        for stimulus in self.stimuli:
            if stimulus.t < previous:
                problems.append(f"{_where(stimulus)}stimuli must be sorted by time")
            previous = max(previous, stimulus.t)
            if stimulus.action in _MS_ACTIONS and stimulus.ms not in ms_ids:
                problems.append(f"{_where(stimulus)}unknown mobile {stimulus.ms}")
            if stimulus.action is StimulusAction.MT_CALL and not sbs_list:
                problems.append(f"{_where(stimulus)}MT_CALL needs an SBS to page from")
            if stimulus.action is StimulusAction.DENY_NEXT_APPOINTMENT and stimulus.dbs not in dbs_ids:
                problems.append(f"{_where(stimulus)}unknown DBS {stimulus.dbs}")
            if stimulus.action is StimulusAction.REMOVE and stimulus.entity not in entities:
                problems.append(f"{_where(stimulus)}unknown entity {stimulus.entity}")
        return problems

    @property
    def sbs(self) -> Optional[StationSpec]:
        return next((s for s in self.stations if s.role is Role.SBS), None)

    @property
    def data_stations(self) -> List[StationSpec]:
        return [s for s in self.stations if s.role is Role.DBS]

    def with_overrides(self, seed: Optional[int] = None, horizon_us: Optional[int] = None) -> "Scenario":
        updates = {}
        if seed is not None:
            updates["seed"] = seed
        if horizon_us is not None:
            updates["horizon_us"] = horizon_us
        if not updates:
            return self
        return self.model_copy(update={"knobs": self.knobs.model_copy(update=updates)})


# =============================================================================
# Text format
# =============================================================================

def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _fields(text: str, number: int, errors: List[str]) -> Dict[str, str]:
    fields: Dict[str, str] = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or not key:
            errors.append(f"line {number}: expected key=value, got {token!r}")
            continue
        if key in fields:
            errors.append(f"line {number}: duplicate field {key!r}")
        fields[key] = value
    return fields


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"])
        parts.append(f"{location}: {item['msg']}" if location else item["msg"])
    return "; ".join(parts)


_RECORD_MODELS = {"stations": StationSpec, "mobiles": MobileSpec, "stimuli": Stimulus}


def parse_scenario(text: str) -> Scenario:
    errors: List[str] = []
    section: Optional[str] = None
    knob_values: Dict[str, str] = {}
    records: Dict[str, list] = {name: [] for name in _RECORD_MODELS}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                errors.append(f"line {number}: unknown section [{section}]")
                section = None
            continue
        if section is None:
            errors.append(f"line {number}: record outside a known section")
            continue

        if section == "knobs":
            # Allow "key = value" as well as "key=value"
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                errors.append(f"line {number}: expected key=value")
                continue
            key = key.strip()
            if key not in Knobs.model_fields:
                errors.append(f"line {number}: unknown knob {key!r}")
                continue
            knob_values[key] = value.strip()
            continue

        fields = _fields(line, number, errors)
        model = _RECORD_MODELS[section]
        unknown = sorted(set(fields) - (set(model.model_fields) - {"line"}))
        if unknown:
            errors.append(f"line {number}: unknown field(s) {', '.join(unknown)}")
            continue
        try:
            records[section].append(model(**fields, line=number))
        except ValidationError as e:
            errors.append(f"line {number}: {_describe(e)}")

    try:
        knobs = Knobs(**knob_values)
    except ValidationError as e:
        errors.append(f"[knobs]: {_describe(e)}")
        knobs = Knobs()

    if errors:
        raise ScenarioError(errors)

    # Records are validated already; only the cross-record checks remain
    scenario = Scenario.model_construct(knobs=knobs, **records)
    problems = scenario.problems()
    if problems:
        raise ScenarioError(problems)
    return scenario


def load_scenario(path: Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError([f"cannot read {path}: {e.strerror}"]) from None
    logger.info(f"Loaded scenario {path}")
    return parse_scenario(text)


def _value_text(value) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple, frozenset, set)):
        return ",".join(_value_text(v) for v in value)
    return str(value)


def _record_line(record: BaseModel, keys: Tuple[str, ...]) -> str:
    parts = []
    for key in keys:
        value = getattr(record, key)
        if value is None:
            continue
        parts.append(f"{key}={_value_text(value)}")
    return " ".join(parts)


def format_scenario(scenario: Scenario) -> str:
    lines = ["[knobs]"]
    for key, value in scenario.knobs.model_dump().items():
        if value is None:
            continue
        lines.append(f"{key}={_value_text(value)}")

    lines.append("")
    lines.append("[stations]")
    for station in scenario.stations:
        keys = ("role", "id", "arfcn", "color_code")
        if station.role is Role.DBS:
            keys += ("capacity", "power")
        keys += ("channels",)
        lines.append(_record_line(station, keys))

    lines.append("")
    lines.append("[mobiles]")
    lines.extend(_record_line(mobile, ("id",)) for mobile in scenario.mobiles)

    lines.append("")
    lines.append("[stimuli]")
    for stimulus in scenario.stimuli:
        keys = ("t", "action", "ms", "dbs", "entity")
        if stimulus.action in (StimulusAction.MO_CALL, StimulusAction.MT_CALL):
            keys += ("duration_us",)
        lines.append(_record_line(stimulus, keys))
    return "\n".join(lines) + "\n"


def save_scenario(path: Path, scenario: Scenario):
    Path(path).write_text(format_scenario(scenario), encoding="utf-8")
