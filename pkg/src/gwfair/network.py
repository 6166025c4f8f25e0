"""Network description shared by the allocation solver and the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InfeasibleError, SemanticError


@dataclass(frozen=True)
class Link:
    """A unidirectional bottleneck link between two switches."""

    id: str
    capacity_mbps: float
    length_km: float = 0.0
    vbr_mbps: float = 0.0  # static reservation for higher-priority traffic

    def __post_init__(self):
        if self.capacity_mbps <= 0:
            raise ValueError(f"link {self.id}: capacity must be > 0")
        if self.length_km < 0 or self.vbr_mbps < 0:
            raise ValueError(f"link {self.id}: length and vbr must be >= 0")


@dataclass(frozen=True)
class Session:
    """One end-to-end connection: the links it crosses, its floor and weight.

    ``cap_mbps`` models an application that never offers more than that much
    traffic regardless of the rate the network would allow it.
    """

    id: str
    route: tuple[str, ...]
    mcr: float = 0.0
    weight: float = 1.0
    cap_mbps: float | None = None

    def __post_init__(self):
        if not self.route:
            raise ValueError(f"session {self.id}: route must name at least one link")
        if self.mcr < 0:
            raise ValueError(f"session {self.id}: mcr must be >= 0")
        if not self.weight > 0:
            raise ValueError(f"session {self.id}: weight must be > 0")
        if self.cap_mbps is not None and self.cap_mbps < 0:
            raise ValueError(f"session {self.id}: cap must be >= 0")


@dataclass
class NetworkSpec:
    """Links plus the sessions routed over them."""

    links: list[Link] = field(default_factory=list)
    sessions: list[Session] = field(default_factory=list)

    def link(self, link_id: str) -> Link:
        for l in self.links:
            if l.id == link_id:
                return l
        raise KeyError(link_id)

    def sessions_on(self, link_id: str) -> list[Session]:
        return [s for s in self.sessions if link_id in s.route]

    def validate(self) -> None:
        """Raise SemanticError/InfeasibleError on an inconsistent description."""
        link_ids = [l.id for l in self.links]
        if len(set(link_ids)) != len(link_ids):
            raise SemanticError("duplicate link ids")
        session_ids = [s.id for s in self.sessions]
        if len(set(session_ids)) != len(session_ids):
            raise SemanticError("duplicate session ids")
        known = set(link_ids)
        for s in self.sessions:
            missing = [lid for lid in s.route if lid not in known]
            if missing:
                raise SemanticError(f"session {s.id}: route names missing link(s) {missing}")
            if len(set(s.route)) != len(s.route):
                raise SemanticError(f"session {s.id}: route repeats a link")
        for l in self.links:
            floors = math.fsum(s.mcr for s in self.sessions_on(l.id))
            usable = l.capacity_mbps - l.vbr_mbps
            if floors > usable:
                raise InfeasibleError(
                    f"link {l.id}: guaranteed minima total {floors:g} Mbps but only "
                    f"{usable:g} Mbps is usable",
                    deficit=floors - usable,
                )
