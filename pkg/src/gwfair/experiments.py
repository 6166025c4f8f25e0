"""Packaged experiment setups, the run harness, and comparison reporting.

An experiment bundles a topology, per-session source behaviour, a weight
policy, switch parameters, and a verdict rule saying what the run must
show.  ``run_experiment`` simulates it, compares the outcome against the
centralized allocation solver (and optional reference values), optionally
writes the sampled series plus the comparison as CSV files, and returns a
report with a pass/fail verdict.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from dataclasses import dataclass, field

from .errors import ConfigError, SemanticError
from .fairness import SessionParams, WeightPolicy, resolve_weights
from .network import Link, NetworkSpec, Session
from .oracle import solve, verify_allocation
from .sim import (SourceModel, Trace, build, convergence_time, steady_state_acr,
                  steady_state_rates, utilization)

VERDICT_KINDS = ("steady", "transient", "nc_expected", "acr_steady")

_TAIL = 0.2  # trailing fraction of a trace treated as steady state
_UTIL_BUCKET_MS = 100.0


@dataclass(frozen=True)
class SwitchConfig:
    """Per-port controller knobs, uniform across all switches of a run."""

    averaging_interval_ms: float = 5.0
    target_delay_ms: float = 1.5
    qdlf_floor: float = 0.5
    use_measured_source_rate: bool = True
    fraction_steepness: float = 1.0
    min_load_factor: float = 0.01

    def as_kwargs(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class VerdictRule:
    """What a run must demonstrate to count as passing.

    Kinds: ``steady`` requires convergence of effective rates to the solver
    allocation; ``acr_steady`` requires the raw allowed rates to converge to
    the allocation of the same network with demand caps removed;
    ``nc_expected`` requires that rates do NOT settle on the solver
    allocation; ``transient`` requires phase-by-phase tracking while
    sources come and go.
    """

    kind: str = "steady"
    rel_tol: float = 0.02
    abs_floor_mbps: float = 1.0
    util_min: float | None = None
    check_load_factor: bool = False
    check_queue: bool = False
    settle_ms: float = 100.0  # transient: re-convergence allowance after each change
    dip_after_ms: float = 50.0  # transient: utilization grace right after a source stops

    def __post_init__(self):
        if self.kind not in VERDICT_KINDS:
            raise ConfigError(f"unknown verdict kind {self.kind!r}")
        if self.rel_tol < 0 or self.abs_floor_mbps < 0:
            raise ConfigError("tolerances must be >= 0")
        if self.settle_ms < 0 or self.dip_after_ms < 0:
            raise ConfigError("settle and dip windows must be >= 0")


@dataclass(frozen=True)
class SessionSetup:
    """One session as configured: routing, guarantees, and source behaviour."""

    id: str
    route: tuple
    mcr_mbps: float = 0.0
    weight: float | None = None  # only meaningful under the explicit policy
    source: SourceModel = SourceModel()


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    duration_ms: float
    links: tuple
    sessions: tuple
    policy: WeightPolicy
    switch: SwitchConfig = SwitchConfig()
    verdict: VerdictRule = VerdictRule()
    sample_ms: float = 1.0
    reference_rates: dict | None = None  # previously reported steady rates, by session
    reference_quiet: dict | None = None  # ditto for the quiet phases of a transient run


@dataclass
class VcRow:
    vc: str
    oracle_mbps: float
    sim_mbps: float
    ref_mbps: float | None
    rel_err: float
    conv_ms: float | None


@dataclass
class LinkRow:
    link: str
    capacity_mbps: float
    util: float
    mean_load_factor: float | None
    max_queue_cells: int


@dataclass
class WindowRow:
    window: str
    t0_ms: float
    t1_ms: float
    vc: str
    expected_mbps: float
    sim_mbps: float
    within_tol: bool


@dataclass
class ComparisonReport:
    experiment: str
    passed: bool
    failures: list
    rows: list
    links: list
    windows: list
    convergence_ms: float | None
    trace: Trace = field(repr=False, default=None)


def to_network(spec: ExperimentSpec) -> NetworkSpec:
    """Resolve the weight policy and build the static network description."""
    explicit = spec.policy.kind == "explicit"
    params = []
    for st in spec.sessions:
        if st.weight is not None and not explicit:
            raise ConfigError(f"session {st.id}: weight is only allowed with the explicit policy")
        if explicit and st.weight is None:
            raise ConfigError(f"session {st.id}: the explicit policy requires a weight")
        params.append(SessionParams(id=st.id, mcr=st.mcr_mbps,
                                    weight=st.weight if st.weight is not None else 1.0))
    weights = resolve_weights(spec.policy, params)
    sessions = []
    for st, w in zip(spec.sessions, weights):
        sessions.append(Session(id=st.id, route=tuple(st.route), mcr=st.mcr_mbps,
                                weight=w, cap_mbps=st.source.cap_mbps))
    net = NetworkSpec(links=list(spec.links), sessions=sessions)
    net.validate()
    return net


# -- packaged experiments -----------------------------------------------------

BUILTIN_NAMES = ("three_sources", "three_sources_transient", "source_bottleneck", "gfc2")

_LINE_RATE = 149.76  # payload rate of a 155.52 Mbps line after framing overhead

# guarantee/weight variants shared by the single-link experiments
_CASES = {
    1: ((0.0, 0.0, 0.0), WeightPolicy.pricing(math.inf)),
    2: ((10.0, 30.0, 50.0), WeightPolicy.pricing(math.inf)),
    3: ((10.0, 30.0, 50.0), WeightPolicy.pricing(5.0)),
}

_THREE_SOURCES_REF = {
    1: {"s1": 49.92, "s2": 49.92, "s3": 49.92},
    2: {"s1": 29.92, "s2": 49.92, "s3": 69.92},
    3: {"s1": 18.53, "s2": 49.92, "s3": 81.30},
}
_TRANSIENT_QUIET_REF = {
    1: {"s1": 74.88, "s3": 74.88},
    2: {"s1": 54.88, "s3": 94.88},
    3: {"s1": 29.92, "s3": 119.84},
}
_BOTTLENECK_REF = {
    1: {"s1": 10.0, "s2": 69.88, "s3": 69.88},
    2: {"s1": 10.0, "s2": 59.88, "s3": 79.88},
    3: {"s1": 10.0, "s2": 53.24, "s3": 86.52},
}
_BOTTLENECK_DECLARED_REF = {"s1": 49.92, "s2": 49.92, "s3": 49.92}

_GFC2_RATES = {"a": 10.0, "b": 5.0, "c": 35.0, "d": 35.0, "e": 35.0,
               "f": 10.0, "g": 5.0, "h": 52.5}


def builtin(name: str, case: int = 1, use_measured_source_rate=None) -> ExperimentSpec:
    """Build one of the packaged experiment specs."""
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown experiment {name!r}; choose from: {', '.join(BUILTIN_NAMES)}")
    if name == "gfc2":
        if case != 1:
            raise ConfigError("gfc2 has no case variants")
    elif case not in (1, 2, 3):
        raise ConfigError("case must be 1, 2, or 3")
    measured = True if use_measured_source_rate is None else bool(use_measured_source_rate)
    if name == "three_sources":
        return _three_sources(case, measured)
    if name == "three_sources_transient":
        return _three_sources_transient(case, measured)
    if name == "source_bottleneck":
        return _source_bottleneck(case, measured)
    return _gfc2(measured)


def _single_link_sessions(mcrs, icrs, kinds):
    sessions = []
    for i in range(3):
        kind, cap, start, stop = kinds[i]
        sessions.append(SessionSetup(
            id=f"s{i + 1}", route=("l1",), mcr_mbps=mcrs[i],
            source=SourceModel(kind=kind, icr_mbps=icrs[i], cap_mbps=cap,
                               start_ms=start, stop_ms=stop)))
    return tuple(sessions)


def _three_sources(case, measured):
    mcrs, policy = _CASES[case]
    kinds = (("greedy", None, 0.0, None),) * 3
    return ExperimentSpec(
        name=f"three_sources_case{case}",
        duration_ms=400.0,
        links=(Link("l1", _LINE_RATE, 1000.0),),
        sessions=_single_link_sessions(mcrs, (50.0, 40.0, 55.0), kinds),
        policy=policy,
        switch=SwitchConfig(use_measured_source_rate=measured),
        verdict=VerdictRule(kind="steady", rel_tol=0.02, abs_floor_mbps=1.0,
                            util_min=0.95, check_load_factor=True, check_queue=True),
        reference_rates=dict(_THREE_SOURCES_REF[case]),
    )


def _three_sources_transient(case, measured):
    mcrs, policy = _CASES[case]
    kinds = (("greedy", None, 0.0, None),
             ("transient", None, 400.0, 800.0),
             ("greedy", None, 0.0, None))
    return ExperimentSpec(
        name=f"three_sources_transient_case{case}",
        duration_ms=1200.0,
        links=(Link("l1", _LINE_RATE, 1000.0),),
        sessions=_single_link_sessions(mcrs, (50.0, 40.0, 55.0), kinds),
        policy=policy,
        switch=SwitchConfig(use_measured_source_rate=measured),
        verdict=VerdictRule(kind="transient", rel_tol=0.03, abs_floor_mbps=1.5,
                            util_min=0.90, settle_ms=100.0, dip_after_ms=50.0),
        reference_rates=dict(_THREE_SOURCES_REF[case]),
        reference_quiet=dict(_TRANSIENT_QUIET_REF[case]),
    )


def _source_bottleneck(case, measured):
    mcrs, policy = _CASES[case]
    kinds = (("capped", 10.0, 0.0, None),
             ("greedy", None, 0.0, None),
             ("greedy", None, 0.0, None))
    if measured:
        verdict = VerdictRule(kind="steady", rel_tol=0.02, abs_floor_mbps=1.0,
                              check_load_factor=True, check_queue=True)
        reference = dict(_BOTTLENECK_REF[case])
    elif case == 1:
        # sources declare their allowed rate, not their actual one, so the
        # allowed rates settle on the cap-blind fair split
        verdict = VerdictRule(kind="acr_steady", rel_tol=0.02, abs_floor_mbps=1.0)
        reference = dict(_BOTTLENECK_DECLARED_REF)
    else:
        verdict = VerdictRule(kind="nc_expected", rel_tol=0.02, abs_floor_mbps=1.0)
        reference = None
    return ExperimentSpec(
        name=f"source_bottleneck_case{case}",
        duration_ms=1000.0,
        links=(Link("l1", _LINE_RATE, 1000.0),),
        sessions=_single_link_sessions(mcrs, (50.0, 30.0, 110.0), kinds),
        policy=policy,
        switch=SwitchConfig(use_measured_source_rate=measured),
        verdict=verdict,
        reference_rates=reference,
    )


def _gfc2(measured):
    caps = (("l1", 30.0), ("l2", 150.0), ("l3", 150.0),
            ("l4", 150.0), ("l5", 75.0), ("l6", 150.0))
    links = tuple(Link(lid, cap, 1000.0) for lid, cap in caps)
    groups = (
        ("a", 3, ("l2", "l3", "l4", "l5", "l6")),
        ("b", 3, ("l1", "l2", "l3", "l4", "l5", "l6")),
        ("c", 3, ("l2",)),
        ("d", 3, ("l3",)),
        ("e", 3, ("l4",)),
        ("f", 3, ("l5",)),
        ("g", 3, ("l1",)),
        ("h", 2, ("l6",)),
    )
    sessions = []
    reference = {}
    for prefix, count, route in groups:
        for i in range(1, count + 1):
            sid = f"{prefix}{i}"
            sessions.append(SessionSetup(id=sid, route=route,
                                         source=SourceModel(kind="greedy", icr_mbps=10.0)))
            reference[sid] = _GFC2_RATES[prefix]
    return ExperimentSpec(
        name="gfc2",
        duration_ms=1000.0,
        links=links,
        sessions=tuple(sessions),
        policy=WeightPolicy.max_min(),
        switch=SwitchConfig(averaging_interval_ms=15.0, use_measured_source_rate=measured),
        verdict=VerdictRule(kind="steady", rel_tol=0.05, abs_floor_mbps=0.75,
                            check_queue=True),
        reference_rates=reference,
    )


# -- verdict machinery --------------------------------------------------------


def _tail_mean(series, frac=_TAIL):
    k = max(1, min(len(series), int(round(frac * len(series)))))
    return math.fsum(series[-k:]) / k


def _saturated_links(net: NetworkSpec, rates: dict) -> list:
    load = {link.id: 0.0 for link in net.links}
    for sess in net.sessions:
        for lid in sess.route:
            load[lid] += rates[sess.id]
    return [link.id for link in net.links
            if load[link.id] >= (link.capacity_mbps - link.vbr_mbps) * (1 - 1e-6)]


def _queue_stable(samples, frac=_TAIL) -> bool:
    k = max(1, int(round(frac * len(samples))))
    tail = samples[-k:]
    mean = math.fsum(tail) / len(tail)
    return max(tail) - min(tail) <= 0.2 * mean + 10.0


def _vc_rows(spec, trace, oracle, steady, v, conv_trace):
    rows = []
    for sid in trace.sessions:
        tgt = oracle[sid]
        sim = steady[sid]
        err = abs(sim - tgt) / tgt if tgt else abs(sim - tgt)
        conv = convergence_time(conv_trace, {sid: tgt}, v.rel_tol, v.abs_floor_mbps)
        rows.append(VcRow(vc=sid, oracle_mbps=tgt, sim_mbps=sim,
                          ref_mbps=(spec.reference_rates or {}).get(sid),
                          rel_err=err, conv_ms=conv))
    return rows


def _check_bands(steady, oracle, v, failures, what="steady rate"):
    for sid, sim in steady.items():
        tgt = oracle[sid]
        band = max(v.rel_tol * tgt, v.abs_floor_mbps)
        if abs(sim - tgt) > band:
            failures.append(
                f"{sid}: {what} {sim:.2f} Mbps vs target {tgt:.2f} (allowed band {band:.2f})")


def _link_health(net, trace, oracle, v, failures, frac=_TAIL):
    saturated = set(_saturated_links(net, oracle))
    for link in net.links:
        lid = link.id
        if lid in saturated and v.util_min is not None:
            u = utilization(trace, lid, frac)
            if u < v.util_min:
                failures.append(f"{lid}: utilization {u:.3f} below the {v.util_min} floor")
        if lid in saturated and v.check_load_factor:
            zs = [z for _, z in trace.load_factor[lid]]
            if zs:
                mean_z = _tail_mean(zs, frac)
                if abs(mean_z - 1.0) > 0.05:
                    failures.append(f"{lid}: mean load factor {mean_z:.3f}, expected 1 within 5%")
        if v.check_queue and not _queue_stable(trace.queue[lid], frac):
            failures.append(f"{lid}: queue length still drifting at the end of the run")


def _phases(spec: ExperimentSpec):
    cuts = {0.0, spec.duration_ms}
    for st in spec.sessions:
        if 0.0 < st.source.start_ms < spec.duration_ms:
            cuts.add(st.source.start_ms)
        if st.source.stop_ms is not None and st.source.stop_ms < spec.duration_ms:
            cuts.add(st.source.stop_ms)
    edges = sorted(cuts)
    return list(zip(edges[:-1], edges[1:]))


def _active_in(model: SourceModel, t0: float, t1: float) -> bool:
    if model.start_ms > t0:
        return False
    return model.stop_ms is None or model.stop_ms >= t1


def _sub_trace(trace: Trace, idx) -> Trace:
    return Trace(times=[trace.times[i] for i in idx],
                 rate={sid: [trace.rate[sid][i] for i in idx] for sid in trace.sessions},
                 sessions=list(trace.sessions))


def _transient_verdict(spec, net, trace, oracle, v, failures, windows):
    phases = _phases(spec)
    active_sets = []
    for t0, t1 in phases:
        active_sets.append({st.id for st in spec.sessions if _active_in(st.source, t0, t1)})

    for i, (t0, t1) in enumerate(phases, start=1):
        w0 = t0 + v.settle_ms
        if w0 >= t1:
            raise ConfigError(f"settle window swallows the whole phase [{t0:g}, {t1:g}) ms")
        last = i == len(phases)
        idx = [j for j, t in enumerate(trace.times)
               if w0 <= t < t1 or (last and t == t1)]
        if not idx:
            raise ConfigError(f"no samples in window [{w0:g}, {t1:g}] ms")
        sub = NetworkSpec(links=list(net.links),
                          sessions=[s for s in net.sessions if s.id in active_sets[i - 1]])
        expected = solve(sub).rates if sub.sessions else {}
        for sid in trace.sessions:
            tgt = expected.get(sid, 0.0)
            band = max(v.rel_tol * tgt, v.abs_floor_mbps)
            vals = [trace.rate[sid][j] for j in idx]
            ok = all(abs(x - tgt) <= band for x in vals)
            if not ok:
                failures.append(
                    f"window {i} [{w0:g}, {t1:g}) ms: {sid} strays from {tgt:.2f} Mbps")
            windows.append(WindowRow(window=f"w{i}", t0_ms=w0, t1_ms=t1, vc=sid,
                                     expected_mbps=tgt,
                                     sim_mbps=math.fsum(vals) / len(vals), within_tol=ok))

    if v.util_min is not None:
        stops = [st.source.stop_ms for st in spec.sessions
                 if st.source.stop_ms is not None and st.source.stop_ms < spec.duration_ms]
        for lid in _saturated_links(net, oracle):
            t = v.settle_ms
            while t < spec.duration_ms - 1e-9:
                t_end = min(t + _UTIL_BUCKET_MS, spec.duration_ms)
                dip = any(t < s + v.dip_after_ms and t_end > s for s in stops)
                if not dip:
                    u = utilization(trace, lid, (t, t_end))
                    if u < v.util_min:
                        failures.append(
                            f"{lid}: utilization {u:.3f} below {v.util_min}"
                            f" in [{t:g}, {t_end:g}] ms")
                t = t_end

    # report rows come from the phase with the most sources switched on
    busy = max(range(len(phases)), key=lambda k: (len(active_sets[k]), -k))
    t0, t1 = phases[busy]
    last = busy == len(phases) - 1
    idx = [j for j, t in enumerate(trace.times) if t0 <= t < t1 or (last and t == t1)]
    sub = _sub_trace(trace, idx)
    steady = {sid: _tail_mean(sub.rate[sid]) for sid in trace.sessions}
    conv = convergence_time(sub, oracle, v.rel_tol, v.abs_floor_mbps)
    return steady, sub, conv


def run_experiment(spec: ExperimentSpec, out_dir=None, *, duration_ms=None,
                   window=None) -> ComparisonReport:
    """Simulate ``spec``, judge it, and optionally dump CSVs into ``out_dir``.

    ``window`` overrides the trailing fraction of the run treated as steady
    state (default 0.2).
    """
    if duration_ms is not None:
        spec = dataclasses.replace(spec, duration_ms=duration_ms)
    if spec.duration_ms <= 0:
        raise ConfigError("duration must be > 0")
    if window is None:
        window = _TAIL
    elif not 0.0 < window < 1.0:
        raise ConfigError("window must be a fraction strictly between 0 and 1")
    net = to_network(spec)
    oracle = solve(net).rates
    broken = verify_allocation(net, oracle)
    if broken:
        raise SemanticError("allocation failed self-check: " + "; ".join(broken))

    engine = build(net, {st.id: st.source for st in spec.sessions},
                   sample_ms=spec.sample_ms, **spec.switch.as_kwargs())
    trace = engine.run(spec.duration_ms)

    v = spec.verdict
    failures: list = []
    windows: list = []

    if v.kind == "steady":
        steady = steady_state_rates(trace, window)
        conv = convergence_time(trace, oracle, v.rel_tol, v.abs_floor_mbps)
        if conv is None:
            failures.append("rates never settled on the allocation targets")
        _check_bands(steady, oracle, v, failures)
        _link_health(net, trace, oracle, v, failures, window)
        rows = _vc_rows(spec, trace, oracle, steady, v, trace)
    elif v.kind == "acr_steady":
        uncapped = NetworkSpec(
            links=list(net.links),
            sessions=[dataclasses.replace(s, cap_mbps=None) for s in net.sessions])
        oracle = solve(uncapped).rates
        steady = steady_state_acr(trace, window)
        shadow = Trace(times=trace.times, rate=trace.acr, sessions=list(trace.sessions))
        conv = convergence_time(shadow, oracle, v.rel_tol, v.abs_floor_mbps)
        if conv is None:
            failures.append("allowed rates never settled on the cap-blind targets")
        _check_bands(steady, oracle, v, failures, what="steady allowed rate")
        _link_health(net, trace, oracle, v, failures, window)
        rows = _vc_rows(spec, shadow, oracle, steady, v, shadow)
    elif v.kind == "nc_expected":
        steady = steady_state_rates(trace, window)
        conv = convergence_time(trace, oracle, v.rel_tol, v.abs_floor_mbps)
        if conv is not None:
            failures.append("rates unexpectedly converged to the allocation targets")
        gaps = [sid for sid, sim in steady.items()
                if abs(sim - oracle[sid]) > max(v.rel_tol * oracle[sid], v.abs_floor_mbps)]
        if not gaps:
            failures.append("every steady rate sits on its target; expected a persistent gap")
        _link_health(net, trace, oracle, v, failures, window)
        rows = _vc_rows(spec, trace, oracle, steady, v, trace)
    else:
        steady, sub, conv = _transient_verdict(spec, net, trace, oracle, v, failures, windows)
        rows = _vc_rows(spec, sub, oracle, steady, v, sub)

    links = _link_rows(trace, window)
    report = ComparisonReport(experiment=spec.name, passed=not failures, failures=failures,
                              rows=rows, links=links, windows=windows,
                              convergence_ms=conv, trace=trace)
    if out_dir is not None:
        write_outputs(out_dir, trace, report)
    return report


def _link_rows(trace: Trace, frac=_TAIL):
    rows = []
    for lid, cap in trace.link_capacity.items():
        zs = [z for _, z in trace.load_factor[lid]]
        rows.append(LinkRow(
            link=lid,
            capacity_mbps=cap,
            util=_tail_mean(trace.util[lid], frac),
            mean_load_factor=_tail_mean(zs, frac) if zs else None,
            max_queue_cells=max(trace.queue[lid]) if trace.queue[lid] else 0,
        ))
    return rows


# -- CSV output ----------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_series(path, trace, header, keys, table):
    # long format: one row per (sample time, entity)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for i, t in enumerate(trace.times):
            for k in keys:
                w.writerow([_fmt(t), k, _fmt(table[k][i])])


def write_outputs(out_dir: str, trace: Trace, report: ComparisonReport) -> None:
    """Write the sampled series and the comparison report as CSV files."""
    os.makedirs(out_dir, exist_ok=True)
    join = os.path.join
    links = list(trace.link_capacity)
    _write_series(join(out_dir, "rate.csv"), trace,
                  ["time_ms", "vc", "rate_mbps"], trace.sessions, trace.rate)
    _write_series(join(out_dir, "acr.csv"), trace,
                  ["time_ms", "vc", "acr_mbps"], trace.sessions, trace.acr)
    _write_series(join(out_dir, "queue.csv"), trace,
                  ["time_ms", "link", "queue_cells"], links, trace.queue)
    _write_series(join(out_dir, "util.csv"), trace,
                  ["time_ms", "link", "utilization"], links, trace.util)
    with open(join(out_dir, "z.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_ms", "link", "load_factor"])
        for lid in links:
            for t, z in trace.load_factor[lid]:
                w.writerow([_fmt(t), lid, _fmt(z)])
    with open(join(out_dir, "report.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["vc", "oracle_mbps", "sim_mbps", "ref_mbps_or_blank",
                    "rel_err", "conv_ms_or_NC"])
        for r in report.rows:
            w.writerow([r.vc, _fmt(r.oracle_mbps), _fmt(r.sim_mbps), _fmt(r.ref_mbps),
                        _fmt(r.rel_err), "NC" if r.conv_ms is None else _fmt(r.conv_ms)])
    with open(join(out_dir, "links.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["link", "capacity_mbps", "util", "mean_load_factor", "max_queue_cells"])
        for r in report.links:
            w.writerow([r.link, _fmt(r.capacity_mbps), _fmt(r.util),
                        _fmt(r.mean_load_factor), _fmt(r.max_queue_cells)])
    if report.windows:
        with open(join(out_dir, "windows.csv"), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["window", "t0_ms", "t1_ms", "vc", "expected_mbps",
                        "sim_mbps", "within_tol"])
            for r in report.windows:
                w.writerow([r.window, _fmt(r.t0_ms), _fmt(r.t1_ms), r.vc,
                            _fmt(r.expected_mbps), _fmt(r.sim_mbps), _fmt(r.within_tol)])
