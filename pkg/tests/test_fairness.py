"""Single-link weighted-fair allocation: worked examples and random properties."""

import math
import random

import pytest

from gwfair.errors import EmptyProblemError, InfeasibleError, PolicyMismatchError
from gwfair.fairness import (LinkShareProblem, SessionParams, WeightPolicy,
                             gw_share, resolve_weights, validate_feasible,
                             weight_from_pricing)

LINE = 149.76


def _problem(capacity, mcrs, weights):
    contenders = tuple(SessionParams(id=f"s{i + 1}", mcr=m, weight=w)
                       for i, (m, w) in enumerate(zip(mcrs, weights)))
    return LinkShareProblem(capacity=capacity, contenders=contenders)


def _share(capacity, mcrs, policy):
    params = [SessionParams(id=f"s{i + 1}", mcr=m) for i, m in enumerate(mcrs)]
    weights = resolve_weights(policy, params)
    contenders = tuple(SessionParams(id=p.id, mcr=p.mcr, weight=w)
                       for p, w in zip(params, weights))
    return gw_share(LinkShareProblem(capacity=capacity, contenders=contenders))


# -- worked single-link examples ------------------------------------------------


def test_equal_split_without_guarantees():
    rates = _share(LINE, (0.0, 0.0, 0.0), WeightPolicy.max_min())
    for sid in ("s1", "s2", "s3"):
        assert rates[sid] == pytest.approx(49.92, abs=1e-9)


def test_guaranteed_floor_plus_equal_excess():
    rates = _share(LINE, (10.0, 30.0, 50.0), WeightPolicy.mcr_plus_equal())
    assert rates["s1"] == pytest.approx(29.92, abs=1e-9)
    assert rates["s2"] == pytest.approx(49.92, abs=1e-9)
    assert rates["s3"] == pytest.approx(69.92, abs=1e-9)


def test_excess_proportional_to_guarantee():
    rates = _share(LINE, (10.0, 30.0, 50.0), WeightPolicy.proportional_to_mcr())
    assert rates["s1"] == pytest.approx(10.0 + 10.0 * 59.76 / 90.0, abs=1e-9)
    assert rates["s2"] == pytest.approx(49.92, abs=1e-9)
    assert rates["s3"] == pytest.approx(50.0 + 50.0 * 59.76 / 90.0, abs=1e-9)


def test_price_derived_weights_published_values():
    rates = _share(LINE, (10.0, 30.0, 50.0), WeightPolicy.pricing(5.0))
    assert rates["s1"] == pytest.approx(18.53, abs=0.01)
    assert rates["s2"] == pytest.approx(49.92, abs=0.01)
    assert rates["s3"] == pytest.approx(81.30, abs=0.01)


def test_infinite_charge_ratio_reduces_to_equal_excess():
    priced = _share(LINE, (10.0, 30.0, 50.0), WeightPolicy.pricing(math.inf))
    plain = _share(LINE, (10.0, 30.0, 50.0), WeightPolicy.mcr_plus_equal())
    assert priced == plain


def test_weight_from_pricing():
    assert weight_from_pricing(5.0, 10.0) == 15.0
    assert weight_from_pricing(0.0, 30.0) == 30.0
    assert weight_from_pricing(math.inf, 30.0) == 1.0
    assert weight_from_pricing(math.inf, 0.0) == 1.0


# -- policy and input validation --------------------------------------------------


def test_policy_constructors_and_kinds():
    assert WeightPolicy.max_min().kind == "max_min"
    assert WeightPolicy.pricing(2.0).charge_ratio == 2.0
    assert set(WeightPolicy.KINDS) == {"max_min", "mcr_plus_equal",
                                       "proportional_to_mcr", "pricing", "explicit"}


def test_policy_rejects_unknown_kind():
    with pytest.raises(ValueError):
        WeightPolicy("round_robin")


def test_pricing_needs_nonnegative_charge_ratio():
    with pytest.raises(ValueError):
        WeightPolicy("pricing")
    with pytest.raises(ValueError):
        WeightPolicy("pricing", charge_ratio=-1.0)
    WeightPolicy("pricing", charge_ratio=0.0)
    WeightPolicy("pricing", charge_ratio=math.inf)


def test_charge_ratio_rejected_elsewhere():
    with pytest.raises(ValueError):
        WeightPolicy("max_min", charge_ratio=1.0)


def test_session_params_validation():
    with pytest.raises(ValueError):
        SessionParams(id="s1", mcr=-1.0)
    with pytest.raises(ValueError):
        SessionParams(id="s1", weight=0.0)
    with pytest.raises(ValueError):
        SessionParams(id="s1", weight=-2.0)


def test_problem_rejects_duplicates_and_negative_capacity():
    dup = (SessionParams(id="s1"), SessionParams(id="s1"))
    with pytest.raises(ValueError):
        LinkShareProblem(capacity=10.0, contenders=dup)
    with pytest.raises(ValueError):
        LinkShareProblem(capacity=-1.0, contenders=(SessionParams(id="s1"),))


def test_resolve_weights_policy_mismatch():
    with_mcr = [SessionParams(id="s1", mcr=5.0)]
    without = [SessionParams(id="s1", mcr=0.0)]
    with pytest.raises(PolicyMismatchError):
        resolve_weights(WeightPolicy.max_min(), with_mcr)
    with pytest.raises(PolicyMismatchError):
        resolve_weights(WeightPolicy.proportional_to_mcr(), without)


def test_resolve_weights_explicit_uses_session_weights():
    params = [SessionParams(id="s1", weight=2.0), SessionParams(id="s2", weight=7.0)]
    assert resolve_weights(WeightPolicy.explicit(), params) == [2.0, 7.0]


def test_empty_problem_rejected():
    with pytest.raises(EmptyProblemError):
        gw_share(LinkShareProblem(capacity=10.0, contenders=()))


def test_infeasible_guarantees_carry_deficit():
    with pytest.raises(InfeasibleError) as exc:
        validate_feasible(100.0, [60.0, 50.0])
    assert exc.value.deficit == pytest.approx(10.0)
    with pytest.raises(InfeasibleError):
        gw_share(_problem(100.0, (60.0, 50.0), (1.0, 1.0)))


def test_guarantees_exactly_filling_capacity_are_feasible():
    rates = gw_share(_problem(100.0, (60.0, 40.0), (1.0, 3.0)))
    assert rates == {"s1": pytest.approx(60.0), "s2": pytest.approx(40.0)}


# -- randomized properties --------------------------------------------------------


def random_problem(rng):
    n = rng.randint(1, 8)
    mcrs = [rng.choice([0.0, rng.uniform(0.0, 8.0)]) for _ in range(n)]
    weights = [rng.uniform(0.2, 5.0) for _ in range(n)]
    capacity = math.fsum(mcrs) + rng.uniform(0.5, 120.0)
    return _problem(capacity, mcrs, weights)


def check_share_properties(iterations=1000, seed=20260816):
    """Invariants of the one-link allocator over random feasible problems."""
    rng = random.Random(seed)
    for _ in range(iterations):
        problem = random_problem(rng)
        rates = gw_share(problem)

        # capacity is handed out exactly, nothing hoarded or invented
        assert math.fsum(rates.values()) == pytest.approx(problem.capacity, rel=1e-9)

        by_id = {s.id: s for s in problem.contenders}
        excess = problem.capacity - math.fsum(s.mcr for s in problem.contenders)
        for sid, rate in rates.items():
            s = by_id[sid]
            # the guarantee is a hard floor
            assert rate >= s.mcr - 1e-9
            # everyone gets the same excess per unit of weight
            assert (rate - s.mcr) / s.weight == pytest.approx(
                excess / math.fsum(c.weight for c in problem.contenders), rel=1e-9)

        # scaling every weight by a common factor changes nothing
        scaled = LinkShareProblem(
            capacity=problem.capacity,
            contenders=tuple(SessionParams(id=s.id, mcr=s.mcr, weight=s.weight * 3.5)
                             for s in problem.contenders))
        for sid, rate in gw_share(scaled).items():
            assert rate == pytest.approx(rates[sid], rel=1e-9)

        # a heavier session never receives less excess than a lighter one
        ordered = sorted(problem.contenders, key=lambda s: s.weight)
        gains = [rates[s.id] - s.mcr for s in ordered]
        for lo, hi in zip(gains, gains[1:]):
            assert hi >= lo - 1e-9
    return iterations


def test_share_properties_random():
    assert check_share_properties() == 1000


def test_equal_weights_zero_mcr_is_plain_equal_split():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(1, 10)
        capacity = rng.uniform(1.0, 500.0)
        rates = gw_share(_problem(capacity, (0.0,) * n, (1.0,) * n))
        for rate in rates.values():
            assert rate == pytest.approx(capacity / n, rel=1e-12)
