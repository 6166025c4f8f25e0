"""Cell-level discrete-event simulation of rate-controlled sources.

Sources emit 424-bit cells at their currently allowed rate; every 32nd cell
is a forward resource-management cell carrying the source's declared rate.
Each link is modelled as a FIFO output port with a transmission time per
cell and a propagation delay of 5 microseconds per km.  The destination
turns forward RM cells around with zero delay; on the way back every
switch the connection crosses stamps its explicit-rate feedback into the
cell, and the source finally adjusts its allowed rate to the stamped value
(clamped between its guaranteed minimum and its peak rate).

The simulation is deterministic: no randomness anywhere, and the event
heap is totally ordered by (time, event kind, entity, sequence number).
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, EmptyTraceError
from .network import NetworkSpec
from .switchalg import CELL_BITS, PortState, RmCell, SwitchParams

US_PER_KM = 5.0  # signal propagation through fibre
RM_EVERY = 32  # forward RM cell cadence, in cells
_MIN_EMIT_MBPS = 0.15  # scheduling floor so the feedback loop never starves

# event kinds, in processing order within one timestamp
_START = 0
_STOP = 1
_ARRIVE = 2
_BRM = 3
_DEPART = 4
_INTERVAL = 5
_EMIT = 6
_SAMPLE = 7

SOURCE_KINDS = ("greedy", "capped", "transient")


@dataclass(frozen=True)
class SourceModel:
    """Traffic behaviour of one session's source endpoint."""

    kind: str = "greedy"
    icr_mbps: float = 10.0
    pcr_mbps: float = 149.76
    cap_mbps: float | None = None  # demand ceiling; None falls back to the session's
    start_ms: float = 0.0
    stop_ms: float | None = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ConfigError(f"unknown source kind {self.kind!r}")
        if self.icr_mbps <= 0 or self.pcr_mbps <= 0:
            raise ConfigError("icr and pcr must be > 0")
        if self.cap_mbps is not None and self.cap_mbps <= 0:
            raise ConfigError("cap must be > 0 when given")
        if self.start_ms < 0:
            raise ConfigError("start must be >= 0")
        if self.stop_ms is not None and self.stop_ms <= self.start_ms:
            raise ConfigError("stop must come after start")


@dataclass
class Trace:
    """Sampled time series from one simulation run.

    ``acr`` is the raw allowed cell rate at the source; ``rate`` is the
    effective sending rate (allowed rate limited by the demand cap, zero
    while the source is switched off).
    """

    times: list = field(default_factory=list)  # ms
    acr: dict = field(default_factory=dict)  # session id -> [mbps]
    rate: dict = field(default_factory=dict)  # session id -> [mbps]
    queue: dict = field(default_factory=dict)  # link id -> [cells]
    util: dict = field(default_factory=dict)  # link id -> [fraction]
    load_factor: dict = field(default_factory=dict)  # link id -> [(ms, z)]
    balance: list = field(default_factory=list)  # (ms, emitted, delivered, buffered)
    link_capacity: dict = field(default_factory=dict)
    sessions: list = field(default_factory=list)
    duration_ms: float = 0.0
    sample_ms: float = 1.0


class _Source:
    __slots__ = ("idx", "sid", "session", "model", "acr", "active", "sent", "gen", "cap")

    def __init__(self, idx, session, model):
        self.idx = idx
        self.sid = session.id
        self.session = session
        self.model = model
        self.acr = model.icr_mbps
        self.active = False
        self.sent = 0
        self.gen = 0
        cap = model.cap_mbps if model.cap_mbps is not None else session.cap_mbps
        self.cap = cap if cap is not None else math.inf

    def effective_rate(self) -> float:
        if not self.active:
            return 0.0
        return min(self.acr, self.cap)


class _Port:
    __slots__ = ("idx", "link", "state", "fifo", "busy", "tx_us", "prop_us", "dep_cells")

    def __init__(self, idx, link, params):
        self.idx = idx
        self.link = link
        self.state = PortState(link.capacity_mbps, params, link.vbr_mbps)
        self.fifo = deque()
        self.busy = False
        self.tx_us = CELL_BITS / link.capacity_mbps
        self.prop_us = US_PER_KM * link.length_km
        self.dep_cells = 0


class Engine:
    """Event loop binding sources, ports, and the per-port rate controller."""

    def __init__(self, net: NetworkSpec, source_models: dict, *,
                 averaging_interval_ms: float = 5.0,
                 target_delay_ms: float = 1.5,
                 qdlf_floor: float = 0.5,
                 use_measured_source_rate: bool = True,
                 fraction_steepness: float = 1.0,
                 min_load_factor: float = 0.01,
                 sample_ms: float = 1.0):
        net.validate()
        if not net.sessions:
            raise ConfigError("nothing to simulate: the network has no sessions")
        if sample_ms <= 0:
            raise ConfigError("sample_ms must be > 0")
        missing = [s.id for s in net.sessions if s.id not in source_models]
        if missing:
            raise ConfigError(f"no source model for session(s): {', '.join(map(str, missing))}")
        unknown = [sid for sid in source_models if all(s.id != sid for s in net.sessions)]
        if unknown:
            raise ConfigError(f"source model for unknown session(s): {', '.join(map(str, unknown))}")

        self.net = net
        self.sample_ms = sample_ms
        self.interval_us = averaging_interval_ms * 1000.0

        self.sources = [
            _Source(i, sess, source_models[sess.id]) for i, sess in enumerate(net.sessions)
        ]
        self._link_index = {link.id: i for i, link in enumerate(net.links)}
        self.ports = []
        for i, link in enumerate(net.links):
            mcrs = {}
            weights = {}
            for j, sess in enumerate(net.sessions):
                if link.id in sess.route:
                    mcrs[j] = sess.mcr
                    weights[j] = sess.weight
            params = SwitchParams(
                averaging_interval_ms=averaging_interval_ms,
                target_delay_ms=target_delay_ms,
                qdlf_floor=qdlf_floor,
                use_measured_source_rate=use_measured_source_rate,
                mcr_mbps=mcrs,
                weight=weights,
                fraction_steepness=fraction_steepness,
                min_load_factor=min_load_factor,
            )
            self.ports.append(_Port(i, link, params))

        self._routes = [
            tuple(self._link_index[lid] for lid in sess.route) for sess in net.sessions
        ]
        self._heap = []
        self._seq = 0
        self._ran = False

        self.emitted = {s.sid: 0 for s in self.sources}
        self.delivered = {s.sid: 0 for s in self.sources}
        self._inflight = 0

        self._trace = Trace(
            acr={s.sid: [] for s in self.sources},
            rate={s.sid: [] for s in self.sources},
            queue={p.link.id: [] for p in self.ports},
            util={p.link.id: [] for p in self.ports},
            load_factor={p.link.id: [] for p in self.ports},
            link_capacity={p.link.id: p.link.capacity_mbps for p in self.ports},
            sessions=[s.sid for s in self.sources],
            sample_ms=sample_ms,
        )
        self._last_sample_us = 0.0

    # -- scheduling ---------------------------------------------------------

    def _push(self, time_us, kind, entity, payload=None):
        self._seq += 1
        heapq.heappush(self._heap, (time_us, kind, entity, self._seq, payload))

    def summary(self) -> dict:
        return {
            "sources": len(self.sources),
            "ports": len(self.ports),
            "switches": len(self.ports) + 1,
        }

    # -- forward path ---------------------------------------------------------

    def _enqueue(self, now, port, sidx, hop, cell):
        port.state.record_forward_cell(
            sidx, is_rm=cell is not None, ccr=cell.ccr if cell is not None else None)
        if port.busy:
            port.fifo.append((sidx, hop, cell))
        else:
            port.busy = True
            self._push(now + port.tx_us, _DEPART, port.idx, (sidx, hop, cell))

    def _emit(self, now, src, gen):
        if gen != src.gen or not src.active:
            return
        cell = None
        if src.sent % RM_EVERY == 0:
            # declared rate is the raw allowed rate, not the capped sending rate
            cell = RmCell(vc=src.idx, er=src.model.pcr_mbps, ccr=src.acr,
                          mcr=src.session.mcr, direction="forward")
        src.sent += 1
        self.emitted[src.sid] += 1
        route = self._routes[src.idx]
        self._enqueue(now, self.ports[route[0]], src.idx, 0, cell)
        gap = CELL_BITS / max(src.effective_rate(), _MIN_EMIT_MBPS)
        self._push(now + gap, _EMIT, src.idx, gen)

    def _depart(self, now, port, payload):
        sidx, hop, cell = payload
        port.dep_cells += 1
        route = self._routes[sidx]
        t_next = now + port.prop_us
        self._inflight += 1
        if hop + 1 < len(route):
            self._push(t_next, _ARRIVE, route[hop + 1], (sidx, hop + 1, cell))
        else:
            self._push(t_next, _ARRIVE, -1, (sidx, -1, cell))
        if port.fifo:
            self._push(now + port.tx_us, _DEPART, port.idx, port.fifo.popleft())
        else:
            port.busy = False

    def _arrive(self, now, entity, payload):
        sidx, hop, cell = payload
        self._inflight -= 1
        if hop < 0:
            # destination: count the cell, turn RM cells around with zero delay
            self.delivered[self.sources[sidx].sid] += 1
            if cell is not None:
                cell.direction = "backward"
                route = self._routes[sidx]
                last = route[-1]
                self._push(now + self.ports[last].prop_us, _BRM, -1, (sidx, len(route) - 1, cell))
            return
        self._enqueue(now, self.ports[entity], sidx, hop, cell)

    # -- backward path ----------------------------------------------------------

    def _brm(self, now, payload):
        sidx, hop, cell = payload
        route = self._routes[sidx]
        port = self.ports[route[hop]]
        port.state.process_brm(cell)
        if hop > 0:
            prev = self.ports[route[hop - 1]]
            self._push(now + prev.prop_us, _BRM, -1, (sidx, hop - 1, cell))
        else:
            src = self.sources[sidx]
            src.acr = min(src.model.pcr_mbps, max(src.session.mcr, cell.er))

    # -- bookkeeping ------------------------------------------------------------

    def _interval(self, now, port):
        port.state.queue_len = len(port.fifo)
        port.state.end_interval()
        self._trace.load_factor[port.link.id].append((now / 1000.0, port.state.load_factor))
        self._push(now + self.interval_us, _INTERVAL, port.idx)

    def _sample(self, now):
        tr = self._trace
        tr.times.append(now / 1000.0)
        for src in self.sources:
            tr.acr[src.sid].append(src.acr)
            tr.rate[src.sid].append(src.effective_rate())
        dt = now - self._last_sample_us
        for port in self.ports:
            tr.queue[port.link.id].append(len(port.fifo))
            if dt > 0:
                frac = port.dep_cells * CELL_BITS / (dt * port.link.capacity_mbps)
            else:
                frac = 0.0
            tr.util[port.link.id].append(frac)
            port.dep_cells = 0
        buffered = sum(len(p.fifo) + (1 if p.busy else 0) for p in self.ports)
        tr.balance.append(
            (now / 1000.0, sum(self.emitted.values()), sum(self.delivered.values()), buffered))
        self._last_sample_us = now
        self._push(now + self.sample_ms * 1000.0, _SAMPLE, -1)

    # -- main loop ----------------------------------------------------------------

    def run(self, duration_ms: float) -> Trace:
        if duration_ms <= 0:
            raise ConfigError("duration must be > 0")
        if self._ran:
            raise ConfigError("engine already ran; build a fresh one")
        self._ran = True
        horizon = duration_ms * 1000.0

        for src in self.sources:
            self._push(src.model.start_ms * 1000.0, _START, src.idx)
            if src.model.stop_ms is not None:
                self._push(src.model.stop_ms * 1000.0, _STOP, src.idx)
        for port in self.ports:
            self._push(self.interval_us, _INTERVAL, port.idx)
        self._push(0.0, _SAMPLE, -1)

        heap = self._heap
        while heap and heap[0][0] <= horizon:
            now, kind, entity, _, payload = heapq.heappop(heap)
            if kind == _EMIT:
                self._emit(now, self.sources[entity], payload)
            elif kind == _ARRIVE:
                self._arrive(now, entity, payload)
            elif kind == _DEPART:
                self._depart(now, self.ports[entity], payload)
            elif kind == _BRM:
                self._brm(now, payload)
            elif kind == _INTERVAL:
                self._interval(now, self.ports[entity])
            elif kind == _SAMPLE:
                self._sample(now)
            elif kind == _START:
                src = self.sources[entity]
                src.active = True
                src.acr = src.model.icr_mbps
                src.gen += 1
                self._push(now, _EMIT, src.idx, src.gen)
            elif kind == _STOP:
                src = self.sources[entity]
                src.active = False
                src.gen += 1

        self._trace.duration_ms = duration_ms
        return self._trace


def build(net: NetworkSpec, source_models: dict, **switch_knobs) -> Engine:
    return Engine(net, source_models, **switch_knobs)


# -- trace analysis ----------------------------------------------------------


def _tail(count: int, window: float) -> int:
    return max(1, min(count, int(round(window * count))))


def steady_state_rates(trace: Trace, window: float = 0.2) -> dict:
    """Mean effective rate per session over the trailing ``window`` fraction."""
    if not trace.times:
        raise EmptyTraceError("trace has no samples")
    k = _tail(len(trace.times), window)
    return {sid: math.fsum(series[-k:]) / k for sid, series in trace.rate.items()}


def steady_state_acr(trace: Trace, window: float = 0.2) -> dict:
    """Mean raw allowed rate per session over the trailing ``window`` fraction."""
    if not trace.times:
        raise EmptyTraceError("trace has no samples")
    k = _tail(len(trace.times), window)
    return {sid: math.fsum(series[-k:]) / k for sid, series in trace.acr.items()}


def convergence_time(trace: Trace, targets: dict, rel_tol: float = 0.02,
                     abs_floor_mbps: float = 1.0):
    """Earliest sample time after which every targeted session stays on target.

    A session is on target when its effective rate is within
    ``max(rel_tol * target, abs_floor_mbps)`` of the target.  Returns the
    sample time in ms, or None when some session is still off target at the
    end of the trace.
    """
    if not trace.times:
        raise EmptyTraceError("trace has no samples")
    unknown = [sid for sid in targets if sid not in trace.rate]
    if unknown:
        raise KeyError(f"targets for sessions not in trace: {unknown}")
    bands = {sid: max(rel_tol * abs(t), abs_floor_mbps) for sid, t in targets.items()}
    last_bad = -1
    for i in range(len(trace.times) - 1, -1, -1):
        ok = all(abs(trace.rate[sid][i] - targets[sid]) <= bands[sid] for sid in targets)
        if not ok:
            last_bad = i
            break
    if last_bad == len(trace.times) - 1:
        return None
    return trace.times[last_bad + 1]


def utilization(trace: Trace, link_id, window=0.2) -> float:
    """Mean utilization of one link.

    ``window`` is either a trailing fraction of the trace (float) or an
    inclusive (t0_ms, t1_ms) time range.
    """
    if link_id not in trace.util:
        raise KeyError(f"unknown link {link_id!r}")
    series = trace.util[link_id]
    if not series:
        raise EmptyTraceError("trace has no samples")
    if isinstance(window, tuple):
        t0, t1 = window
        vals = [u for t, u in zip(trace.times, series) if t0 <= t <= t1]
        if not vals:
            raise EmptyTraceError(f"no samples in [{t0}, {t1}] ms")
    else:
        vals = series[-_tail(len(series), window):]
    return math.fsum(vals) / len(vals)
