"""Problem instances for caching with per-user quality targets.

A server holds N files drawn uniformly from a q-ary alphabet and serves K
users over a shared broadcast link.  User k tolerates reconstruction
distortion D_k, which under the usual per-symbol Hamming criterion requires
a description rate of

    rho(D) = log2(q) - H(D) - D * log2(q - 1)      bits per source symbol,

the q-ary rate-distortion function.  Users are indexed so that their rate
requirements r_1 <= r_2 <= ... <= r_K are non-decreasing (equivalently,
distortions non-increasing).  Successive refinement splits each file into
layers: layer l has width f_l = r_l - r_{l-1} and is useful exactly to
users l, l+1, ..., K.

This module holds the instance model shared by every other module: rate
profiles, memory constraints (a total budget to be split, or one fixed
cache size per user), instance validation, and the JSON interchange format.
All rates and memories are normalized per source symbol; logs are base 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class InstanceError(ValueError):
    """Raised when an instance fails validation.

    Carries the full list of problems, not just the first one, so a CLI can
    report everything wrong with an input file in one pass.
    """

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def binary_entropy(p: float) -> float:
    """H(p) in bits.  H(0) = H(1) = 0 by continuity."""
    if p < 0.0 or p > 1.0:
        raise ValueError(f"entropy argument {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def rho(distortion: float, q: int = 2) -> float:
    """Rate needed to describe a uniform q-ary source within Hamming
    distortion ``distortion``, in bits per symbol.

    Defined on [0, 1 - 1/q]; outside that range the distortion is either
    unachievable or free and we refuse rather than extrapolate.
    """
    if q < 2:
        raise ValueError(f"alphabet size q={q} must be at least 2")
    d_max = 1.0 - 1.0 / q
    if distortion < 0.0 or distortion > d_max:
        raise ValueError(f"distortion {distortion} outside [0, {d_max}] for q={q}")
    return math.log2(q) - binary_entropy(distortion) - distortion * math.log2(q - 1)


def rho_inverse(rate: float, q: int = 2) -> float:
    """Distortion achievable at description rate ``rate``: the inverse of
    :func:`rho` on [0, 1 - 1/q].

    Bisection on the strictly decreasing rho; the result D satisfies
    |rho(D) - rate| <= 1e-10.
    """
    if q < 2:
        raise ValueError(f"alphabet size q={q} must be at least 2")
    if rate < 0.0 or rate > math.log2(q):
        raise ValueError(f"rate {rate} outside [0, log2(q)={math.log2(q)}] for q={q}")
    lo, hi = 0.0, 1.0 - 1.0 / q  # rho(lo) = log2 q, rho(hi) = 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if rho(mid, q) > rate:
            lo = mid
        else:
            hi = mid
    d = lo if abs(rho(lo, q) - rate) <= abs(rho(hi, q) - rate) else hi
    assert abs(rho(d, q) - rate) <= 1e-10
    return d


@dataclass(frozen=True)
class RateProfile:
    """Non-decreasing per-user rates r and the layer widths f they induce.

    f_l = r_l - r_{l-1} (with r_0 = 0), so layer l is the increment of
    description quality that user l is the first to need.
    """

    r: tuple[float, ...]
    f: tuple[float, ...]

    @property
    def K(self) -> int:
        return len(self.r)

    @property
    def sum_rates(self) -> float:
        return sum(self.r)

    def cumulative(self, l: int) -> float:
        """r_l, with r_0 = 0."""
        return 0.0 if l == 0 else self.r[l - 1]


def make_rate_profile(rates: Iterable[float]) -> RateProfile:
    """Build a :class:`RateProfile` from per-user rates, sorted ascending by
    user index already.  Rejects negative or decreasing entries."""
    r = tuple(float(x) for x in rates)
    if not r:
        raise InstanceError(["rate vector is empty"])
    problems = []
    if r[0] < 0.0:
        problems.append(f"rates must be non-negative (r[1]={r[0]})")
    for i in range(1, len(r)):
        if r[i] < r[i - 1]:
            problems.append(
                f"rates must be non-decreasing (r[{i + 1}]={r[i]} < r[{i}]={r[i - 1]})"
            )
    if problems:
        raise InstanceError(problems)
    f = (r[0],) + tuple(r[i] - r[i - 1] for i in range(1, len(r)))
    return RateProfile(r=r, f=f)


def rates_from_distortions(distortions: Iterable[float], q: int = 2) -> RateProfile:
    """Convert a non-increasing distortion vector to its rate profile."""
    d = tuple(float(x) for x in distortions)
    for i in range(1, len(d)):
        if d[i] > d[i - 1]:
            raise InstanceError(
                [f"distortions must be non-increasing (D[{i + 1}]={d[i]} > D[{i}]={d[i - 1]})"]
            )
    return make_rate_profile(rho(x, q) for x in d)


@dataclass(frozen=True)
class Budget:
    """Total normalized cache memory to be divided among the users."""

    m_tot: float


@dataclass(frozen=True)
class FixedMemories:
    """One normalized cache size per user, m_k in [0, r_k]."""

    m: tuple[float, ...]


MemoryConstraint = Budget | FixedMemories


@dataclass(frozen=True)
class ProblemInstance:
    """A complete caching problem: population, library, rates, memory.

    Construction is permissive; call :func:`validate_instance` (or
    :func:`ensure_valid`) to collect every violation.  The regime N >= K
    with worst-case distinct demands is assumed throughout.
    """

    K: int
    N: int
    rates: RateProfile
    constraint: MemoryConstraint
    q: int = 2

    @property
    def is_budget(self) -> bool:
        return isinstance(self.constraint, Budget)


def validate_instance(inst: ProblemInstance) -> list[str]:
    """Return every validation problem with ``inst``, empty if none.

    Messages name the offending field and the bound it violates so they can
    be surfaced verbatim by the CLI.
    """
    problems: list[str] = []
    if inst.K < 1:
        problems.append(f"K={inst.K} must be at least 1")
    if inst.N < inst.K:
        problems.append(f"N >= K violated (N={inst.N} < K={inst.K})")
    if inst.q < 2:
        problems.append(f"alphabet size q={inst.q} must be at least 2")
    if inst.rates.K != inst.K:
        problems.append(
            f"rate vector has {inst.rates.K} entries, expected K={inst.K}"
        )
    if inst.q >= 2 and any(x > math.log2(inst.q) + 1e-12 for x in inst.rates.r):
        problems.append(
            f"rates exceed log2(q)={math.log2(inst.q)}, unreachable for q={inst.q}"
        )
    if isinstance(inst.constraint, Budget):
        if inst.constraint.m_tot < 0.0:
            problems.append(f"budget {inst.constraint.m_tot} is negative")
        elif inst.constraint.m_tot > inst.rates.sum_rates + 1e-12:
            problems.append(
                f"budget {inst.constraint.m_tot} exceeds sum of rates "
                f"{inst.rates.sum_rates}"
            )
    else:
        m = inst.constraint.m
        if len(m) != inst.K:
            problems.append(f"memory vector has {len(m)} entries, expected K={inst.K}")
        for k, (mk, rk) in enumerate(zip(m, inst.rates.r), start=1):
            if mk < 0.0:
                problems.append(f"m[{k}]={mk} is negative")
            elif mk > rk + 1e-12:
                problems.append(f"m[{k}]={mk} exceeds r[{k}]={rk}")
    return problems


def ensure_valid(inst: ProblemInstance) -> ProblemInstance:
    problems = validate_instance(inst)
    if problems:
        raise InstanceError(problems)
    return inst


def total_memory(inst: ProblemInstance) -> float:
    if isinstance(inst.constraint, Budget):
        return inst.constraint.m_tot
    return sum(inst.constraint.m)


@dataclass(frozen=True)
class MemoryAllocation:
    """A split of each user's cache across layers.

    ``per_layer[k-1][l-1]`` is the memory user k devotes to layer l, zero
    for l > k since those layers are useless to k.  ``per_user`` holds the
    row sums m_k.
    """

    per_layer: tuple[tuple[float, ...], ...]
    per_user: tuple[float, ...]

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[float]]) -> "MemoryAllocation":
        per_layer = tuple(tuple(float(x) for x in row) for row in rows)
        per_user = tuple(sum(row) for row in per_layer)
        return cls(per_layer=per_layer, per_user=per_user)

    @property
    def K(self) -> int:
        return len(self.per_layer)

    @property
    def total(self) -> float:
        return sum(self.per_user)

    def check(self, rates: RateProfile, tol: float = 1e-9) -> list[str]:
        problems = []
        for k in range(1, self.K + 1):
            row = self.per_layer[k - 1]
            if len(row) != self.K:
                problems.append(f"allocation row {k} has {len(row)} entries")
                continue
            for l in range(1, self.K + 1):
                v = row[l - 1]
                if v < -tol:
                    problems.append(f"allocation m[{k}][{l}]={v} is negative")
                if l > k and abs(v) > tol:
                    problems.append(
                        f"allocation m[{k}][{l}]={v} nonzero for layer above user index"
                    )
        return problems


# ---------------------------------------------------------------------------
# JSON interchange.
#
# {"K": 3, "N": 3, "q": 2, "rates": [0.5, 0.7, 1.0], "budget": 1.0}
# {"K": 3, "N": 3, "distortions": [0.3, 0.2, 0.0], "memories": [0.1, 0.2, 0.6]}
#
# Exactly one of rates/distortions and exactly one of budget/memories.


def instance_from_dict(data: dict) -> ProblemInstance:
    problems: list[str] = []
    if not isinstance(data, dict):
        raise InstanceError(["instance document must be a JSON object"])
    for key in ("K", "N"):
        if key not in data:
            problems.append(f"missing required field '{key}'")
    unknown = set(data) - {"K", "N", "q", "rates", "distortions", "budget", "memories"}
    if unknown:
        problems.append(f"unknown fields: {sorted(unknown)}")
    has_rates = "rates" in data
    has_dist = "distortions" in data
    if has_rates == has_dist:
        problems.append("exactly one of 'rates' or 'distortions' is required")
    has_budget = "budget" in data
    has_mem = "memories" in data
    if has_budget == has_mem:
        problems.append("exactly one of 'budget' or 'memories' is required")
    if problems:
        raise InstanceError(problems)

    q = int(data.get("q", 2))
    try:
        if has_rates:
            rates = make_rate_profile(data["rates"])
        else:
            rates = rates_from_distortions(data["distortions"], q)
    except InstanceError as exc:
        raise InstanceError(exc.problems) from exc
    if has_budget:
        constraint: MemoryConstraint = Budget(m_tot=float(data["budget"]))
    else:
        constraint = FixedMemories(m=tuple(float(x) for x in data["memories"]))
    inst = ProblemInstance(
        K=int(data["K"]), N=int(data["N"]), rates=rates, constraint=constraint, q=q
    )
    return ensure_valid(inst)


def instance_to_dict(inst: ProblemInstance) -> dict:
    data: dict = {"K": inst.K, "N": inst.N, "q": inst.q, "rates": list(inst.rates.r)}
    if isinstance(inst.constraint, Budget):
        data["budget"] = inst.constraint.m_tot
    else:
        data["memories"] = list(inst.constraint.m)
    return data


def load_instance(path: str) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError([f"not valid JSON: {exc}"]) from exc
    return instance_from_dict(data)
