"""Entity id helpers: every simulated actor is addressed as "<ROLE>:<number>"."""

from typing import Tuple

SBS = "SBS"
DBS = "DBS"
MS = "MS"

ENTITY_ROLES = (SBS, DBS, MS)
STATION_ROLES = (SBS, DBS)


def entity_id(role: str, number: int) -> str:
    return f"{role}:{number}"


def parse_entity(identifier: str) -> Tuple[str, int]:
    """Split "DBS:3" into ("DBS", 3); raises ValueError on anything else."""
    role, sep, number = identifier.partition(":")
    if not sep or role not in ENTITY_ROLES or not number.isdigit():
        raise ValueError(f"not an entity id: {identifier!r}")
    return role, int(number)


def role_of(identifier: str) -> str:
    return parse_entity(identifier)[0]


def is_station(identifier: str) -> bool:
    return role_of(identifier) in STATION_ROLES
