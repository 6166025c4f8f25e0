"""Independent reference allocator used only by the tests.

Solves the weighted allocation by exhaustive enumeration instead of
iterative bottleneck elimination: every session is assigned a binding
constraint (its demand cap or one link on its route), the per-link excess
levels implied by that assignment are solved exactly over rationals, and
the assignment is kept only if it is self-consistent.  All consistent
assignments must agree on the rate vector, which is returned.

Exponential in the session count, so only meant for small instances.
"""

from fractions import Fraction
from itertools import product


def _solve_linear(matrix, rhs):
    # Gaussian elimination over Fractions; returns None for singular systems
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def brute_force_rates(net):
    """Exact rates for every session of ``net``, as a dict of floats."""
    sessions = list(net.sessions)
    links = {link.id: link for link in net.links}
    avail = {lid: Fraction(links[lid].capacity_mbps) - Fraction(links[lid].vbr_mbps)
             for lid in links}
    mcr = {s.id: Fraction(s.mcr) for s in sessions}
    weight = {s.id: Fraction(s.weight) for s in sessions}
    cap = {s.id: None if s.cap_mbps is None else Fraction(s.cap_mbps) for s in sessions}

    choices = []
    for s in sessions:
        opts = list(s.route)
        if cap[s.id] is not None:
            opts.append(None)  # None marks "bound by its own cap"
        choices.append(opts)

    solutions = []
    for assign in product(*choices):
        binding = sorted({b for b in assign if b is not None})
        index = {lid: k for k, lid in enumerate(binding)}
        n = len(binding)
        matrix = [[Fraction(0)] * n for _ in range(n)]
        rhs = [avail[lid] for lid in binding]
        ok = True
        for s, b in zip(sessions, assign):
            for lid in s.route:
                if lid not in index:
                    continue
                row = index[lid]
                if b is None:
                    rhs[row] -= cap[s.id]
                else:
                    rhs[row] -= mcr[s.id]
                    matrix[row][index[b]] += weight[s.id]
        levels = _solve_linear(matrix, rhs) if n else []
        if levels is None or any(lv < 0 for lv in levels):
            continue
        level = dict(zip(binding, levels))

        rates = {}
        for s, b in zip(sessions, assign):
            if b is None:
                r = cap[s.id]
            else:
                r = mcr[s.id] + weight[s.id] * level[b]
            # the assigned constraint must be the tightest one on the path
            if r < mcr[s.id] or (cap[s.id] is not None and r > cap[s.id]):
                ok = False
                break
            for lid in s.route:
                if lid in level and r > mcr[s.id] + weight[s.id] * level[lid]:
                    ok = False
                    break
            if not ok:
                break
            rates[s.id] = r
        if not ok:
            continue
        # links that bind nobody must not be overloaded
        for lid in links:
            if lid not in level:
                used = sum(rates[s.id] for s in sessions if lid in s.route)
                if used > avail[lid]:
                    ok = False
                    break
        if ok:
            solutions.append(rates)

    assert solutions, "no consistent constraint assignment found"
    first = solutions[0]
    for other in solutions[1:]:
        assert other == first, "constraint enumeration produced conflicting rates"
    return {sid: float(r) for sid, r in first.items()}
