"""Plain-text experiment configs: parse and dump with exact round-tripping.

Format: INI-like sections with ``key = value`` lines and full-line ``#``
comments.  Singleton sections are ``[experiment]``, ``[switch]``,
``[verdict]``, ``[reference]``, ``[reference_quiet]``; repeated, named
sections are ``[link <id>]`` and ``[session <id>]``.  Unknown sections and
keys are rejected with the offending line number.  ``dump_config`` writes
floats with ``repr`` so ``parse_config(dump_config(spec)) == spec``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError
from .experiments import ExperimentSpec, SessionSetup, SwitchConfig, VerdictRule
from .fairness import WeightPolicy
from .network import Link
from .sim import SOURCE_KINDS, SourceModel

# section name -> whether the header carries an id argument
_SECTIONS = {
    "experiment": False,
    "switch": False,
    "verdict": False,
    "link": True,
    "session": True,
    "reference": False,
    "reference_quiet": False,
}

_EXPERIMENT_KEYS = ("name", "duration_ms", "sample_ms", "policy", "charge_ratio")
_SWITCH_KEYS = ("averaging_interval_ms", "target_delay_ms", "qdlf_floor",
                "use_measured_source_rate", "fraction_steepness", "min_load_factor")
_VERDICT_KEYS = ("kind", "rel_tol", "abs_floor_mbps", "util_min",
                 "check_load_factor", "check_queue", "settle_ms", "dip_after_ms")
_LINK_KEYS = ("capacity_mbps", "length_km", "vbr_mbps")
_SESSION_KEYS = ("route", "mcr_mbps", "weight", "source", "icr_mbps", "pcr_mbps",
                 "cap_mbps", "start_ms", "stop_ms")
_ALLOWED_KEYS = {
    "experiment": _EXPERIMENT_KEYS,
    "switch": _SWITCH_KEYS,
    "verdict": _VERDICT_KEYS,
    "link": _LINK_KEYS,
    "session": _SESSION_KEYS,
}


@dataclass
class _Section:
    line: int
    kind: str
    arg: str | None
    items: dict = field(default_factory=dict)  # key -> (line, raw value)


def _to_float(raw: str, line: int) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(f"expected a number, got {raw!r}", line) from None
    if v != v:
        raise ParseError("nan is not a valid value", line)
    return v


def _to_bool(raw: str, line: int) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ParseError(f"expected true or false, got {raw!r}", line)


def _split_sections(text: str) -> list[_Section]:
    sections: list[_Section] = []
    current: _Section | None = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", no)
            parts = line[1:-1].split()
            if not parts or len(parts) > 2:
                raise ParseError(f"malformed section header {line!r}", no)
            kind = parts[0]
            arg = parts[1] if len(parts) == 2 else None
            if kind not in _SECTIONS:
                raise ParseError(f"unknown section [{kind}]", no)
            if _SECTIONS[kind] and arg is None:
                raise ParseError(f"section [{kind}] needs an id, e.g. [{kind} x1]", no)
            if not _SECTIONS[kind] and arg is not None:
                raise ParseError(f"section [{kind}] takes no id", no)
            current = _Section(no, kind, arg)
            sections.append(current)
            continue
        if current is None:
            raise ParseError("key/value line before any section header", no)
        key, sep, val = line.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", no)
        key = key.strip()
        val = val.strip()
        if not key:
            raise ParseError("empty key", no)
        if not val:
            raise ParseError(f"empty value for key {key!r}", no)
        if key in current.items:
            raise ParseError(f"duplicate key {key!r}", no)
        current.items[key] = (no, val)
    return sections


def _reject_unknown(sec: _Section) -> None:
    allowed = _ALLOWED_KEYS.get(sec.kind)
    if allowed is None:
        return  # reference sections: keys are session ids, checked later
    for key, (no, _) in sec.items.items():
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in section [{sec.kind}]", no)


def _require(sec: _Section, key: str):
    if key not in sec.items:
        raise ParseError(f"section [{sec.kind}] is missing required key {key!r}", sec.line)
    return sec.items[key]


def parse_config(text: str) -> ExperimentSpec:
    sections = _split_sections(text)

    singles: dict[str, _Section] = {}
    links: list[_Section] = []
    sessions: list[_Section] = []
    for sec in sections:
        _reject_unknown(sec)
        if sec.kind == "link":
            if any(s.arg == sec.arg for s in links):
                raise ParseError(f"duplicate section [link {sec.arg}]", sec.line)
            links.append(sec)
        elif sec.kind == "session":
            if any(s.arg == sec.arg for s in sessions):
                raise ParseError(f"duplicate section [session {sec.arg}]", sec.line)
            sessions.append(sec)
        else:
            if sec.kind in singles:
                raise ParseError(f"duplicate section [{sec.kind}]", sec.line)
            singles[sec.kind] = sec

    if "experiment" not in singles:
        raise ParseError("missing [experiment] section", 1)
    if not links:
        raise ParseError("at least one [link <id>] section is required", 1)
    if not sessions:
        raise ParseError("at least one [session <id>] section is required", 1)

    exp = singles["experiment"]
    name = _require(exp, "name")[1]
    no, raw = _require(exp, "duration_ms")
    duration = _to_float(raw, no)
    if "sample_ms" in exp.items:
        no, raw = exp.items["sample_ms"]
        sample = _to_float(raw, no)
    else:
        sample = 1.0
    no, raw = _require(exp, "policy")
    if raw not in WeightPolicy.KINDS:
        raise ParseError(f"unknown policy {raw!r}; choose from: {', '.join(WeightPolicy.KINDS)}", no)
    if raw == "pricing":
        cr_no, cr_raw = _require(exp, "charge_ratio")
        policy = WeightPolicy.pricing(_to_float(cr_raw, cr_no))
    else:
        if "charge_ratio" in exp.items:
            raise ParseError("charge_ratio only applies to the pricing policy",
                             exp.items["charge_ratio"][0])
        policy = WeightPolicy(raw)

    switch = _parse_switch(singles.get("switch"))
    verdict = _parse_verdict(singles.get("verdict"))
    link_objs = tuple(_parse_link(sec) for sec in links)
    session_objs = tuple(_parse_session(sec) for sec in sessions)

    ids = {s.id for s in session_objs}
    reference = _parse_reference(singles.get("reference"), ids)
    quiet = _parse_reference(singles.get("reference_quiet"), ids)

    return ExperimentSpec(name=name, duration_ms=duration, links=link_objs,
                          sessions=session_objs, policy=policy, switch=switch,
                          verdict=verdict, sample_ms=sample,
                          reference_rates=reference, reference_quiet=quiet)


def _parse_switch(sec: _Section | None) -> SwitchConfig:
    if sec is None:
        return SwitchConfig()
    kw = {}
    for key, (no, raw) in sec.items.items():
        if key == "use_measured_source_rate":
            kw[key] = _to_bool(raw, no)
        else:
            kw[key] = _to_float(raw, no)
    try:
        return SwitchConfig(**kw)
    except ValueError as exc:
        raise ParseError(str(exc), sec.line) from None


def _parse_verdict(sec: _Section | None) -> VerdictRule:
    if sec is None:
        return VerdictRule()
    kw = {}
    for key, (no, raw) in sec.items.items():
        if key == "kind":
            kw[key] = raw
        elif key in ("check_load_factor", "check_queue"):
            kw[key] = _to_bool(raw, no)
        else:
            kw[key] = _to_float(raw, no)
    try:
        return VerdictRule(**kw)
    except Exception as exc:
        raise ParseError(str(exc), sec.line) from None


def _parse_link(sec: _Section) -> Link:
    no, raw = _require(sec, "capacity_mbps")
    capacity = _to_float(raw, no)
    length = 0.0
    vbr = 0.0
    if "length_km" in sec.items:
        length = _to_float(*reversed(sec.items["length_km"]))
    if "vbr_mbps" in sec.items:
        vbr = _to_float(*reversed(sec.items["vbr_mbps"]))
    try:
        return Link(sec.arg, capacity, length, vbr)
    except ValueError as exc:
        raise ParseError(str(exc), sec.line) from None


def _parse_session(sec: _Section) -> SessionSetup:
    no, raw = _require(sec, "route")
    hops = tuple(part.strip() for part in raw.split(","))
    if any(not hop for hop in hops):
        raise ParseError("route must be a comma-separated list of link ids", no)

    def opt_float(key, default):
        if key not in sec.items:
            return default
        return _to_float(*reversed(sec.items[key]))

    mcr = opt_float("mcr_mbps", 0.0)
    weight = opt_float("weight", None)
    kind = "greedy"
    if "source" in sec.items:
        no, raw = sec.items["source"]
        if raw not in SOURCE_KINDS:
            raise ParseError(f"unknown source kind {raw!r}; choose from: {', '.join(SOURCE_KINDS)}", no)
        kind = raw
    try:
        model = SourceModel(kind=kind,
                            icr_mbps=opt_float("icr_mbps", 10.0),
                            pcr_mbps=opt_float("pcr_mbps", 149.76),
                            cap_mbps=opt_float("cap_mbps", None),
                            start_ms=opt_float("start_ms", 0.0),
                            stop_ms=opt_float("stop_ms", None))
        return SessionSetup(id=sec.arg, route=hops, mcr_mbps=mcr, weight=weight, source=model)
    except Exception as exc:
        raise ParseError(str(exc), sec.line) from None


def _parse_reference(sec: _Section | None, session_ids: set) -> dict | None:
    if sec is None:
        return None
    out = {}
    for key, (no, raw) in sec.items.items():
        if key not in session_ids:
            raise ParseError(f"reference entry for unknown session {key!r}", no)
        out[key] = _to_float(raw, no)
    return out


# -- serialization -------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def dump_config(spec: ExperimentSpec) -> str:
    """Render ``spec`` as config text; parsing it back yields an equal spec."""
    out = ["[experiment]",
           f"name = {spec.name}",
           f"duration_ms = {_num(spec.duration_ms)}",
           f"sample_ms = {_num(spec.sample_ms)}",
           f"policy = {spec.policy.kind}"]
    if spec.policy.charge_ratio is not None:
        out.append(f"charge_ratio = {_num(spec.policy.charge_ratio)}")

    sw = spec.switch
    out += ["", "[switch]",
            f"averaging_interval_ms = {_num(sw.averaging_interval_ms)}",
            f"target_delay_ms = {_num(sw.target_delay_ms)}",
            f"qdlf_floor = {_num(sw.qdlf_floor)}",
            f"use_measured_source_rate = {'true' if sw.use_measured_source_rate else 'false'}",
            f"fraction_steepness = {_num(sw.fraction_steepness)}",
            f"min_load_factor = {_num(sw.min_load_factor)}"]

    v = spec.verdict
    out += ["", "[verdict]",
            f"kind = {v.kind}",
            f"rel_tol = {_num(v.rel_tol)}",
            f"abs_floor_mbps = {_num(v.abs_floor_mbps)}"]
    if v.util_min is not None:
        out.append(f"util_min = {_num(v.util_min)}")
    out += [f"check_load_factor = {'true' if v.check_load_factor else 'false'}",
            f"check_queue = {'true' if v.check_queue else 'false'}",
            f"settle_ms = {_num(v.settle_ms)}",
            f"dip_after_ms = {_num(v.dip_after_ms)}"]

    for link in spec.links:
        out += ["", f"[link {link.id}]",
                f"capacity_mbps = {_num(link.capacity_mbps)}",
                f"length_km = {_num(link.length_km)}",
                f"vbr_mbps = {_num(link.vbr_mbps)}"]

    for st in spec.sessions:
        out += ["", f"[session {st.id}]",
                f"route = {','.join(st.route)}",
                f"mcr_mbps = {_num(st.mcr_mbps)}"]
        if st.weight is not None:
            out.append(f"weight = {_num(st.weight)}")
        src = st.source
        out += [f"source = {src.kind}",
                f"icr_mbps = {_num(src.icr_mbps)}",
                f"pcr_mbps = {_num(src.pcr_mbps)}"]
        if src.cap_mbps is not None:
            out.append(f"cap_mbps = {_num(src.cap_mbps)}")
        out.append(f"start_ms = {_num(src.start_ms)}")
        if src.stop_ms is not None:
            out.append(f"stop_ms = {_num(src.stop_ms)}")

    for title, table in (("reference", spec.reference_rates),
                         ("reference_quiet", spec.reference_quiet)):
        if table is not None:
            out += ["", f"[{title}]"]
            out += [f"{sid} = {_num(val)}" for sid, val in table.items()]

    return "\n".join(out) + "\n"
