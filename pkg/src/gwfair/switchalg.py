"""Explicit-rate feedback computed at a switch output port.

ERICA+-style control extended with per-connection minimum guarantees and
weights.  The port keeps per-interval measurements and, at the end of each
averaging interval, recomputes:

  1. available capacity  = link - reserved - sum(min(rate_i, mcr_i))
  2. target capacity     = fraction(queue) * available
  3. input rate          = offered load - sum(min(rate_i, mcr_i))
  4. load factor z       = input rate / target capacity        (floored)
  5. excess share_i      = target * w_i * activity_i / sum(w_j * activity_j)

Backward RM cells are then stamped with

  ER_i = mcr_i + max(excess share_i, (rate_i - mcr_i) / z)

capped by the excess pool riding on top of the connection's own floor.
The activity level discounts connections that use less excess than their
full share, which shrinks their claim on the budget (the discounted shares
always sum to the target) and raises the per-weight level the fully active
connections split.  The feedback itself always offers the full, undiscounted
share: a connection limited elsewhere simply leaves its offer unused while
its headroom is redistributed, and a connection limited only by stale
feedback can climb back without waiting to be re-detected.  This is the
same fixed point consistent-marking schemes reach: the budget absorbs
exactly what limited connections send, and everyone else converges on the
common level.  The source rate estimate comes either from counting this
connection's cells (default) or from the rate the source itself declared
in forward RM cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

CELL_BITS = 424  # one 53-byte cell

_EPS_SHARE = 1e-9
_EPS_WEIGHT = 1e-12


@dataclass
class SwitchParams:
    """Static knobs plus the per-connection floors and weights a port serves."""

    averaging_interval_ms: float = 5.0
    target_delay_ms: float = 1.5
    qdlf_floor: float = 0.5  # lowest fraction the queue controller may pick
    use_measured_source_rate: bool = True
    mcr_mbps: dict = field(default_factory=dict)
    weight: dict = field(default_factory=dict)
    fraction_steepness: float = 1.0
    min_load_factor: float = 0.01

    def __post_init__(self):
        if self.averaging_interval_ms <= 0:
            raise ValueError("averaging interval must be > 0")
        if self.target_delay_ms <= 0:
            raise ValueError("target delay must be > 0")
        if not 0 < self.qdlf_floor <= 1:
            raise ValueError("qdlf_floor must be in (0, 1]")
        if self.min_load_factor <= 0:
            raise ValueError("min_load_factor must be > 0")

    def mcr_for(self, vc) -> float:
        return self.mcr_mbps.get(vc, 0.0)

    def weight_for(self, vc) -> float:
        return self.weight.get(vc, 1.0)

    def knows(self, vc) -> bool:
        return vc in self.weight or vc in self.mcr_mbps


@dataclass
class RmCell:
    """The fields of a resource-management cell this algorithm touches."""

    vc: object
    er: float
    ccr: float = 0.0
    mcr: float = 0.0
    direction: str = "backward"


def fraction(queue_cells: float, threshold_cells: float,
             floor: float = 0.5, steepness: float = 1.0) -> float:
    """Queue-control multiplier on the capacity target.

    1.0 up to the threshold, then a hyperbolic fall-off bounded below by
    ``floor`` so the target never collapses entirely.
    """
    if threshold_cells <= 0:
        return 1.0 if queue_cells <= 0 else floor
    if queue_cells <= threshold_cells:
        return 1.0
    falloff = threshold_cells / (threshold_cells + steepness * (queue_cells - threshold_cells))
    return max(floor, falloff)


def activity_level(source_rate: float, mcr: float, prev_excess_share: float) -> float:
    """Fraction of its last offered excess a connection actually used, in [0, 1].

    A connection that was offered (essentially) nothing counts as fully
    active so it is not starved out of the next round.
    """
    if prev_excess_share <= _EPS_SHARE:
        return 1.0
    return min(1.0, max(0.0, source_rate - mcr) / prev_excess_share)


class PortState:
    """Measurement and control state for one output port."""

    def __init__(self, link_capacity_mbps: float, params: SwitchParams, vbr_mbps: float = 0.0):
        if link_capacity_mbps <= 0:
            raise ValueError("link capacity must be > 0")
        self.link_capacity = link_capacity_mbps
        self.vbr_reservation = vbr_mbps
        self.params = params
        usable = link_capacity_mbps - vbr_mbps
        # queue depth at which queueing delay reaches the configured target
        self.queue_threshold = params.target_delay_ms * 1000.0 * usable / CELL_BITS
        self.queue_len = 0
        self.total_abr_capacity = usable
        self.target_abr_capacity = usable
        self.input_rate = 0.0
        self.load_factor = 1.0
        self.source_rate: dict = {}
        self.activity: dict = {}
        self.excess_fairshare: dict = {}
        # per-vc share at activity 1, the denominator for discounting underuse
        self.full_share: dict = {}
        self._cells: dict = {}
        self._cells_total = 0
        self._declared: dict = {}  # last CCR seen in a forward RM cell, per vc
        self._active: set = set()

    # -- measurement ------------------------------------------------------

    def record_forward_cell(self, vc, is_rm: bool = False, ccr: float | None = None) -> None:
        """Count one arriving cell; forward RM cells also refresh the declared rate."""
        self._cells[vc] = self._cells.get(vc, 0) + 1
        self._cells_total += 1
        self._active.add(vc)
        if is_rm and ccr is not None:
            self._declared[vc] = ccr

    # -- interval-end control computation ---------------------------------

    def _default_share(self, vc, target: float) -> float:
        # before a connection has been through an interval it is assumed
        # fully active alongside every configured connection
        total = math.fsum(self.params.weight_for(v) for v in self.params.weight) \
            or float(len(self.params.mcr_mbps)) or 1.0
        return target * self.params.weight_for(vc) / total

    def end_interval(self) -> None:
        p = self.params
        interval_us = p.averaging_interval_ms * 1000.0
        prev_target = self.target_abr_capacity
        prev_full = self.full_share

        active = sorted(self._active)
        measured = {vc: self._cells[vc] * CELL_BITS / interval_us for vc in active}
        if p.use_measured_source_rate:
            rates = measured
            offered = self._cells_total * CELL_BITS / interval_us
        else:
            # trust what sources declare, for the per-vc estimate and the
            # aggregate alike; fall back to counting until a declaration shows up
            rates = {vc: self._declared.get(vc, measured[vc]) for vc in active}
            offered = math.fsum(rates.values())

        floors = math.fsum(min(rates[vc], p.mcr_for(vc)) for vc in active)
        total = max(0.0, self.link_capacity - self.vbr_reservation - floors)
        frac = fraction(self.queue_len, self.queue_threshold, p.qdlf_floor, p.fraction_steepness)
        target = frac * total
        input_rate = max(0.0, offered - floors)
        if target > 0.0 and input_rate > 0.0:
            z = max(p.min_load_factor, input_rate / target)
        else:
            z = p.min_load_factor

        if active:
            acts = {}
            for vc in active:
                full = prev_full.get(vc)
                if full is None:
                    full = self._default_share(vc, prev_target)
                acts[vc] = activity_level(rates[vc], p.mcr_for(vc), full)
            denom = math.fsum(p.weight_for(vc) * acts[vc] for vc in active)
            if denom > _EPS_WEIGHT:
                level = target / denom
                shares = {vc: p.weight_for(vc) * acts[vc] * level for vc in active}
            else:
                # nobody above their floor: hand out the excess by weight alone
                wsum = math.fsum(p.weight_for(vc) for vc in active)
                level = target / wsum
                shares = {vc: p.weight_for(vc) * level for vc in active}
            fulls = {vc: p.weight_for(vc) * level for vc in active}
        else:
            acts = {}
            shares = {}
            fulls = {}

        self.total_abr_capacity = total
        self.target_abr_capacity = target
        self.input_rate = input_rate
        self.load_factor = z
        self.activity = acts
        self.excess_fairshare = shares
        self.full_share = fulls
        self.source_rate = dict(rates)
        self._cells = {}
        self._cells_total = 0
        self._active = set()

    # -- feedback ----------------------------------------------------------

    def feedback_er(self, vc, er_in: float) -> float:
        """Explicit rate to stamp into a backward RM cell (min with ``er_in``)."""
        if not self.params.knows(vc):
            return er_in  # unknown connection: leave the cell alone
        mcr = self.params.mcr_for(vc)
        rate = self.source_rate.get(vc, 0.0)
        throttled = max(0.0, rate - mcr) / self.load_factor
        # offer the full, undiscounted share; a connection limited elsewhere
        # leaves it unused and only its measured usage is charged to the budget
        share = self.full_share.get(vc)
        if share is None:
            share = self._default_share(vc, self.target_abr_capacity)
        er = mcr + max(share, throttled)
        # the excess component may never exceed the whole excess pool
        return min(er_in, er, mcr + self.target_abr_capacity)

    def process_brm(self, cell: RmCell) -> RmCell:
        cell.er = self.feedback_er(cell.vc, cell.er)
        return cell
