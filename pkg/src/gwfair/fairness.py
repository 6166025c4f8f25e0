"""Single-link weighted fair allocation with per-session minimum guarantees.

Every session is first granted its configured minimum rate; whatever
capacity is left over is then divided among the sessions in proportion to
their weights:

    share_i = mcr_i + weight_i * (capacity - sum(mcr)) / sum(weight)

Several familiar fairness criteria are special cases of this one rule and
are exposed here as weight policies: max-min (zero minima, equal weights),
minimum-plus-equal-share (equal weights), allocation proportional to the
minimum (weight_i = mcr_i), and a price-derived rule where a session that
pays a fixed charge plus a per-guaranteed-Mbps charge gets
weight_i = charge_ratio + mcr_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyProblemError, InfeasibleError, PolicyMismatchError


@dataclass(frozen=True)
class SessionParams:
    """One contender on a link: a guaranteed floor and a weight."""

    id: str
    mcr: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if self.mcr < 0:
            raise ValueError(f"session {self.id}: mcr must be >= 0, got {self.mcr}")
        if not self.weight > 0:
            raise ValueError(f"session {self.id}: weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class WeightPolicy:
    """How per-session weights are derived.

    kind is one of ``max_min``, ``mcr_plus_equal``, ``proportional_to_mcr``,
    ``pricing`` (with ``charge_ratio``, which may be ``math.inf``) or
    ``explicit`` (weights supplied directly on the sessions).
    """

    kind: str
    charge_ratio: float | None = None

    KINDS = ("max_min", "mcr_plus_equal", "proportional_to_mcr", "pricing", "explicit")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown weight policy kind {self.kind!r}")
        if self.kind == "pricing":
            if self.charge_ratio is None or (not math.isinf(self.charge_ratio) and self.charge_ratio < 0):
                raise ValueError("pricing policy needs charge_ratio >= 0 (math.inf allowed)")
        elif self.charge_ratio is not None:
            raise ValueError(f"charge_ratio only applies to the pricing policy, not {self.kind!r}")

    @classmethod
    def max_min(cls) -> "WeightPolicy":
        return cls("max_min")

    @classmethod
    def mcr_plus_equal(cls) -> "WeightPolicy":
        return cls("mcr_plus_equal")

    @classmethod
    def proportional_to_mcr(cls) -> "WeightPolicy":
        return cls("proportional_to_mcr")

    @classmethod
    def pricing(cls, charge_ratio: float) -> "WeightPolicy":
        return cls("pricing", charge_ratio=charge_ratio)

    @classmethod
    def explicit(cls) -> "WeightPolicy":
        return cls("explicit")


@dataclass(frozen=True)
class LinkShareProblem:
    """A capacity to split and the sessions contending for it."""

    capacity: float
    contenders: tuple[SessionParams, ...]

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {self.capacity}")
        ids = [s.id for s in self.contenders]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate session ids in problem")


def weight_from_pricing(charge_ratio: float, mcr: float) -> float:
    """Weight of a session under the price-derived policy.

    An infinite charge ratio means the fixed charge dominates completely,
    so every session weighs the same regardless of its guarantee.  The
    infinity is handled as a distinguished case, never as a huge float.
    """
    if math.isinf(charge_ratio):
        return 1.0
    return charge_ratio + mcr


def resolve_weights(policy: WeightPolicy, sessions: list[SessionParams]) -> list[float]:
    """Weights for ``sessions`` under ``policy``, in the same order.

    Raises PolicyMismatchError when the policy cannot describe the sessions:
    max_min requires all-zero minimum rates, proportional_to_mcr requires
    strictly positive ones.
    """
    if policy.kind == "max_min":
        bad = [s.id for s in sessions if s.mcr != 0.0]
        if bad:
            raise PolicyMismatchError(f"max_min policy requires zero mcr, violated by {bad}")
        return [1.0] * len(sessions)
    if policy.kind == "mcr_plus_equal":
        return [1.0] * len(sessions)
    if policy.kind == "proportional_to_mcr":
        bad = [s.id for s in sessions if s.mcr <= 0.0]
        if bad:
            raise PolicyMismatchError(f"proportional_to_mcr needs mcr > 0, violated by {bad}")
        return [s.mcr for s in sessions]
    if policy.kind == "pricing":
        return [weight_from_pricing(policy.charge_ratio, s.mcr) for s in sessions]
    # explicit: weights already live on the sessions
    return [s.weight for s in sessions]


def validate_feasible(capacity: float, mcrs: list[float]) -> None:
    """Check that the guaranteed minima fit in the capacity.

    Raises InfeasibleError carrying the deficit when they do not.
    """
    total = math.fsum(mcrs)
    if total > capacity:
        deficit = total - capacity
        raise InfeasibleError(
            f"minimum rates total {total:g} Mbps exceed capacity {capacity:g} Mbps "
            f"(deficit {deficit:g})",
            deficit=deficit,
        )


def gw_share(problem: LinkShareProblem) -> dict[str, float]:
    """Allocate one link's capacity: floor plus weighted split of the excess."""
    if not problem.contenders:
        raise EmptyProblemError("no sessions to allocate to")
    validate_feasible(problem.capacity, [s.mcr for s in problem.contenders])
    excess = problem.capacity - math.fsum(s.mcr for s in problem.contenders)
    weight_total = math.fsum(s.weight for s in problem.contenders)
    return {s.id: s.mcr + s.weight * excess / weight_total for s in problem.contenders}
