"""Centralized weighted-fair allocation over a multi-link network.

The solver generalizes max-min water-filling: each link offers its
unresolved sessions a common "excess level" lambda, every session's rate
being mcr + weight * lambda, and an application-capped session offers
itself the level at which it hits its cap.  Each round fixes whichever
level is globally smallest (all ties together), subtracts the fixed rates
from every link they cross, and repeats until no session is left.  The
number of rounds equals the number of distinct bottleneck levels in the
network, which ``bottleneck_order`` exposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyProblemError
from .network import NetworkSpec

_TIE_EPS = 1e-9


@dataclass
class Allocation:
    """Solved rates plus the order in which bottlenecks were resolved."""

    rates: dict[str, float]
    # one entry per round: (round number starting at 1, ids of the links and
    # capped sessions whose level was fixed in that round)
    order: list[tuple[int, tuple[str, ...]]] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.order)


def solve(net: NetworkSpec) -> Allocation:
    """Compute the unique weighted-fair allocation for ``net``."""
    net.validate()
    if not net.sessions:
        raise EmptyProblemError("network has no sessions")

    unresolved = {s.id: s for s in net.sessions}
    rates: dict[str, float] = {}
    consumed = {l.id: 0.0 for l in net.links}
    capacity = {l.id: l.capacity_mbps - l.vbr_mbps for l in net.links}
    crossing = {l.id: [s.id for s in net.sessions_on(l.id)] for l in net.links}
    order: list[tuple[int, tuple[str, ...]]] = []
    live_links = set(consumed)

    round_no = 0
    while unresolved:
        round_no += 1
        # candidate levels: one per link still carrying unresolved sessions,
        # one per unresolved capped session
        link_level: dict[str, float] = {}
        for lid in sorted(live_links):
            pending = [unresolved[sid] for sid in crossing[lid] if sid in unresolved]
            if not pending:
                continue  # cannot be a bottleneck, skip
            headroom = capacity[lid] - consumed[lid] - math.fsum(s.mcr for s in pending)
            weight_total = math.fsum(s.weight for s in pending)
            link_level[lid] = max(0.0, headroom) / weight_total
        session_level = {
            s.id: (s.cap_mbps - s.mcr) / s.weight
            for s in unresolved.values()
            if s.cap_mbps is not None
        }
        lowest = min(list(link_level.values()) + list(session_level.values()))
        tie = _TIE_EPS * max(1.0, abs(lowest))

        fixed_ids: list[str] = []
        # capped sessions at the lowest level stop exactly at their cap
        for sid, level in sorted(session_level.items()):
            if level <= lowest + tie and sid in unresolved:
                s = unresolved.pop(sid)
                rates[sid] = s.cap_mbps
                for lid in s.route:
                    consumed[lid] += rates[sid]
                fixed_ids.append(sid)
        # links at the lowest level pin every session still on them
        for lid, level in sorted(link_level.items()):
            if level > lowest + tie:
                continue
            pending = [sid for sid in crossing[lid] if sid in unresolved]
            for sid in pending:
                s = unresolved.pop(sid)
                rates[sid] = s.mcr + s.weight * level
                for other in s.route:
                    consumed[other] += rates[sid]
            if pending:
                fixed_ids.append(lid)
            live_links.discard(lid)
        order.append((round_no, tuple(fixed_ids)))

    return Allocation(rates=rates, order=order)


def bottleneck_order(net: NetworkSpec) -> list[tuple[int, tuple[str, ...]]]:
    """The sequence of bottleneck levels ``solve`` resolves, in order."""
    return solve(net).order


def verify_allocation(net: NetworkSpec, rates: dict[str, float], tol: float = 1e-6) -> list[str]:
    """Check a rate vector against the definition of the weighted-fair point.

    Returns a list of human-readable violations (empty means the allocation
    is the fair one): no link carries more than its capacity, every session
    sits between its floor and its cap, and every session not at its cap
    crosses a saturated link on which its normalized excess
    (rate - mcr) / weight is maximal.
    """
    problems: list[str] = []
    by_id = {s.id: s for s in net.sessions}
    missing = [s.id for s in net.sessions if s.id not in rates]
    if missing:
        return [f"no rate given for session(s) {missing}"]

    load = {}
    for l in net.links:
        load[l.id] = math.fsum(rates[s.id] for s in net.sessions_on(l.id))
        usable = l.capacity_mbps - l.vbr_mbps
        if load[l.id] > usable * (1 + tol) + tol:
            problems.append(f"link {l.id} oversubscribed: {load[l.id]:g} > {usable:g}")

    for s in net.sessions:
        r = rates[s.id]
        if r < s.mcr - tol * max(1.0, s.mcr):
            problems.append(f"session {s.id} below its floor: {r:g} < {s.mcr:g}")
        if s.cap_mbps is not None and r > s.cap_mbps + tol * max(1.0, s.cap_mbps):
            problems.append(f"session {s.id} above its cap: {r:g} > {s.cap_mbps:g}")

    for s in net.sessions:
        r = rates[s.id]
        if s.cap_mbps is not None and abs(r - s.cap_mbps) <= tol * max(1.0, s.cap_mbps):
            continue  # pinned by its own demand
        ok = False
        for lid in s.route:
            link = net.link(lid)
            usable = link.capacity_mbps - link.vbr_mbps
            if load[lid] < usable * (1 - tol) - tol:
                continue  # not saturated, cannot justify the rate
            norm = (r - s.mcr) / s.weight
            peers = [(rates[t.id] - t.mcr) / t.weight for t in net.sessions_on(lid)]
            peak = max(peers)
            if norm >= peak - tol * max(1.0, abs(peak)):
                ok = True
                break
        if not ok:
            problems.append(
                f"session {s.id} is neither capped nor maximal on any saturated link"
            )
    return problems
