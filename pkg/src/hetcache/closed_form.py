"""Closed-form optimum for the total-budget problem.

When only the total cache budget is constrained, the optimal delivery load
has an explicit description: split the budget across layers as multiples
t_l of the layer width, where t_l plays the role of the usual uniform
caching parameter inside the (K - l + 1)-user subsystem that wants layer l.
At integer t the per-unit layer load is

    g_l(t) = (K - l + 1 - t) / (1 + t),

and in general the optimum is the lower convex envelope, i.e. the linear
interpolation of g_l between neighboring integers.  Raising t_l by one
costs f_l memory and saves

    f_l * (K - l + 2) / ((t_l + 1) (t_l + 2))

load, a marginal return that decreases in both t_l and l.  Greedy
allocation by best marginal return is therefore optimal, keeps the t
vector non-increasing in l automatically, and visits every corner of the
memory/load trade-off on its way.  This module implements that greedy,
the resulting load and per-user memory shares, and a second, independent
evaluation route through the uniform-population converse expression, used
to cross-check the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import InstanceError, MemoryAllocation, RateProfile

_TOL = 1e-12


@dataclass(frozen=True)
class TDecomposition:
    """The per-layer caching levels t_l that spend a given budget.

    ``t`` is non-increasing with t_l in [0, K - l + 1] and at most one
    fractional entry; it is the authoritative result.  ``x``, ``y``,
    ``alpha`` name the same vector in threshold form: layers before y sit
    at level x, layer y holds the partial level x - 1 + alpha, later
    layers sit at x - 1 until the region where their caps K - l + 1 bind.
    That reading is faithful whenever consecutive fill levels have
    separated slope ranges, i.e. (x + 1)(x + 2) >= x (K + 1) for all x,
    which holds up to K = 5; for larger populations the optimal filling
    order interleaves levels and only ``t`` itself should be trusted.
    """

    t: tuple[float, ...]
    x: int
    y: int
    alpha: float

    def budget(self, rates: RateProfile) -> float:
        return sum(tl * fl for tl, fl in zip(self.t, rates.f))


def _unit_steps(rates: RateProfile) -> list[tuple[float, int, int, float]]:
    """All unit raises (slope, layer, from-level, cost) in greedy order.

    Marginal returns decay within a layer and with layer index, so sorting
    by slope is exactly the order a best-first greedy would visit, and
    every prefix keeps t non-increasing.  Equal slopes only happen across
    different fill levels, with the lower level in the deeper layer;
    taking the lower level first keeps the vector in threshold form when
    one exists, at no cost in load.
    """
    K = rates.K
    steps = []
    for l in range(1, K + 1):
        fl = rates.f[l - 1]
        if fl <= 0.0:
            continue
        for level in range(K - l + 1):
            slope = (K - l + 2) / ((level + 1) * (level + 2))
            steps.append((slope, l, level, fl))
    steps.sort(key=lambda s: (-s[0], s[2], s[1]))
    return steps


def t_decomposition(m_tot: float, rates: RateProfile) -> TDecomposition:
    """Spend ``m_tot`` greedily across layers; the unique best-first split."""
    K = rates.K
    total = rates.sum_rates
    if m_tot < -1e-9 or m_tot > total + 1e-9:
        raise InstanceError([f"budget {m_tot} outside [0, {total}]"])
    remaining = min(max(m_tot, 0.0), total)

    t = [0.0] * K
    for slope, l, level, cost in _unit_steps(rates):
        if remaining <= _TOL:
            break
        if remaining >= cost:
            t[l - 1] = float(level + 1)
            remaining -= cost
        else:
            t[l - 1] = level + remaining / cost
            remaining = 0.0

    # Zero-width layers carry no memory, but the reported vector should
    # still be monotone and integral there; rounding the right neighbor up
    # stays within both the cap and the left neighbor.
    for l in range(K, 0, -1):
        if rates.f[l - 1] <= 0.0:
            t[l - 1] = float(math.ceil(t[l] if l < K else 0.0))

    effective = [l for l in range(1, K + 1) if rates.f[l - 1] > 0.0]
    frac = [l for l in effective if abs(t[l - 1] - round(t[l - 1])) > _TOL]
    if not effective or all(t[l - 1] <= _TOL for l in effective):
        x, y, alpha = 1, 1, 0.0
    elif frac:
        y = frac[0]
        x = int(math.floor(t[y - 1])) + 1
        alpha = t[y - 1] - math.floor(t[y - 1])
    else:
        x = int(round(t[effective[0] - 1]))
        at_level = [l for l in effective if round(t[l - 1]) == x and l <= K - x + 1]
        y = at_level[-1] if at_level else effective[0]
        alpha = 1.0
    return TDecomposition(t=tuple(t), x=x, y=y, alpha=alpha)


def _g(K: int, l: int, level: int) -> float:
    """Per-unit load of layer l at integer caching level."""
    return (K - l + 1 - level) / (1 + level)


def _g_interp(K: int, l: int, tl: float) -> float:
    lo = math.floor(tl)
    frac = tl - lo
    if frac <= _TOL:
        return _g(K, l, int(round(tl)))
    return (1.0 - frac) * _g(K, l, int(lo)) + frac * _g(K, l, int(lo) + 1)


def theorem1_load(m_tot: float, rates: RateProfile) -> float:
    """Optimal worst-case delivery load at total budget ``m_tot``."""
    dec = t_decomposition(m_tot, rates)
    K = rates.K
    return sum(
        _g_interp(K, l, dec.t[l - 1]) * rates.f[l - 1]
        for l in range(1, K + 1)
        if rates.f[l - 1] > 0.0
    )


def corner_points(rates: RateProfile) -> list[tuple[float, float]]:
    """Every corner of the budget/load trade-off, ascending in budget.

    The curve starts at (0, sum of rates), drops along the greedy steps,
    and ends at (sum of rates, 0).
    """
    m = 0.0
    load = rates.sum_rates
    points = [(m, load)]
    for slope, _, _, cost in _unit_steps(rates):
        m += cost
        load -= slope * cost
        points.append((m, load))
    if points:
        last_m, last_load = points[-1]
        points[-1] = (last_m, max(last_load, 0.0))
    return points


def threshold_allocation(m_tot: float, rates: RateProfile) -> MemoryAllocation:
    """The per-user memory split realizing the budget optimum.

    Layer l's memory t_l * f_l is shared equally by the K - l + 1 users
    that want the layer, which is exactly what uniform caching inside the
    layer subsystem prescribes, fractional t_l included.
    """
    dec = t_decomposition(m_tot, rates)
    K = rates.K
    rows = []
    for k in range(1, K + 1):
        row = [
            dec.t[l - 1] * rates.f[l - 1] / (K - l + 1) if l <= k else 0.0
            for l in range(1, K + 1)
        ]
        rows.append(row)
    return MemoryAllocation.from_matrix(rows)


def _chi(users: int, t: float) -> float:
    """Load of a ``users``-user uniform subsystem with unit file size and
    total memory ``t``, written as the max of the supporting lines.

    Line j passes through the integer points (j - 1, g(j - 1)) and
    (j, g(j)), so the max over j equals the interpolated envelope.  Kept
    as an explicit max so it is a genuinely different evaluation path.
    """
    return max(
        (2 * users - j + 1) / (j + 1) - (users + 1) * t / (j * (j + 1))
        for j in range(1, users + 1)
    )


def lemma1_load(K: int, m_tot: float) -> float:
    """Optimal load for K users with identical unit rates at total budget
    ``m_tot`` in [0, K]."""
    if K < 1:
        raise InstanceError([f"K={K} must be at least 1"])
    if m_tot < -1e-9 or m_tot > K + 1e-9:
        raise InstanceError([f"budget {m_tot} outside [0, {K}]"])
    return _chi(K, min(max(m_tot, 0.0), float(K)))


def simplified_budget_solve(m_tot: float, rates: RateProfile) -> tuple[TDecomposition, float]:
    """Budget optimum computed through the per-layer converse expression.

    Same greedy split, but each layer's contribution is evaluated as
    chi(K - l + 1, t_l) * f_l instead of by interpolating g.  Exists as an
    independent cross-check of :func:`theorem1_load`; the two must agree
    to near machine precision.
    """
    dec = t_decomposition(m_tot, rates)
    K = rates.K
    load = sum(
        _chi(K - l + 1, dec.t[l - 1]) * rates.f[l - 1]
        for l in range(1, K + 1)
        if rates.f[l - 1] > 0.0
    )
    return dec, load
