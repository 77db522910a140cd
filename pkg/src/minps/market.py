"""Market primitives: objects with (min, cap) quotas, agents with strict
preferences, allocation matrices, and the first-order stochastic dominance
comparator.

Matrices are plain tuples of tuples indexed ``[agent][object]`` in the order
the market lists them.  Random allocations hold :class:`fractions.Fraction`
entries, deterministic ones hold ``0``/``1`` ints.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

RandomAllocation = tuple[tuple[Fraction, ...], ...]
DeterministicAllocation = tuple[tuple[int, ...], ...]


class MarketError(ValueError):
    """Raised for malformed or invalid market input."""


class InfeasibleMarketError(MarketError):
    """Raised when no allowable deterministic allocation exists."""


# -- rationals ---------------------------------------------------------------

def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text: str | int) -> Fraction:
    if isinstance(text, bool):
        raise MarketError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise MarketError(f"rationals must be strings 'p/q', got {text!r}")
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MarketError(f"not a rational: {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise MarketError(f"decimal notation is not exact: {text!r}")
    return q


def format_matrix(mu: Iterable[Iterable]) -> list[list[str]]:
    return [[format_rational(x) for x in row] for row in mu]


def parse_matrix(rows: Sequence[Sequence]) -> RandomAllocation:
    return tuple(tuple(parse_rational(x) for x in row) for row in rows)


def as_fraction_matrix(rows: Iterable[Iterable]) -> RandomAllocation:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


# -- market ------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectSpec:
    id: str
    min: int
    cap: int

    def __post_init__(self):
        for name in ("min", "cap"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise MarketError(f"object {self.id}: {name} must be an integer, got {value!r}")
        if self.min < 0:
            raise MarketError(f"object {self.id}: negative minimum {self.min}")
        if self.cap < 1:
            raise MarketError(f"object {self.id}: capacity must be positive, got {self.cap}")
        if self.min > self.cap:
            raise MarketError(f"object {self.id}: minimum {self.min} exceeds capacity {self.cap}")


@dataclass(frozen=True)
class Market:
    """Agents, objects, common demand ``d`` and a strict preference profile.

    ``prefs[i]`` lists object ids from best to worst for ``agents[i]``.
    Capacities above the number of agents are clamped to it; each clamp is
    logged and kept in ``warnings``.
    """

    agents: tuple[str, ...]
    objects: tuple[ObjectSpec, ...]
    demand: int
    prefs: tuple[tuple[str, ...], ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "agents", tuple(self.agents))
        set_(self, "objects", tuple(self.objects))
        set_(self, "prefs", tuple(tuple(p) for p in self.prefs))
        if not self.agents:
            raise MarketError("market has no agents")
        if not self.objects:
            raise MarketError("market has no objects")
        if len(set(self.agents)) != len(self.agents):
            raise MarketError("duplicate agent ids")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise MarketError("duplicate object ids")
        if isinstance(self.demand, bool) or not isinstance(self.demand, int):
            raise MarketError(f"demand must be an integer, got {self.demand!r}")
        if not 1 <= self.demand <= len(self.objects):
            raise MarketError(f"demand d={self.demand} out of range [1, {len(self.objects)}]")
        if len(self.prefs) != len(self.agents):
            raise MarketError("one preference list per agent is required")
        known = set(ids)
        for agent, pref in zip(self.agents, self.prefs):
            unknown = [j for j in pref if j not in known]
            if unknown:
                raise MarketError(f"agent {agent}: unknown objects {unknown}")
            if len(set(pref)) != len(pref):
                raise MarketError(f"agent {agent}: duplicate objects in preference list")
            if len(pref) != len(ids):
                missing = sorted(known - set(pref))
                raise MarketError(f"agent {agent}: incomplete preference list, missing {missing}")
        n = len(self.agents)
        warnings = list(self.warnings)
        clamped = []
        for o in self.objects:
            if o.cap > n:
                msg = f"object {o.id}: capacity {o.cap} clamped to {n} agents"
                logger.warning(msg)
                warnings.append(msg)
                o = ObjectSpec(o.id, o.min, n)
            clamped.append(o)
        set_(self, "objects", tuple(clamped))
        set_(self, "warnings", tuple(warnings))

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @cached_property
    def object_index(self) -> dict[str, int]:
        return {o.id: k for k, o in enumerate(self.objects)}

    @cached_property
    def mins(self) -> tuple[int, ...]:
        return tuple(o.min for o in self.objects)

    @cached_property
    def caps(self) -> tuple[int, ...]:
        return tuple(o.cap for o in self.objects)

    @cached_property
    def order(self) -> tuple[tuple[int, ...], ...]:
        """Preference lists as object indices, best first."""
        idx = self.object_index
        return tuple(tuple(idx[j] for j in p) for p in self.prefs)

    @cached_property
    def min_objects(self) -> tuple[int, ...]:
        """Indices of objects with a positive minimum (the set O_m)."""
        return tuple(j for j, m in enumerate(self.mins) if m > 0)

    def with_prefs(self, agent: int, pref: Sequence[str]) -> Market:
        """Copy of the market where ``agent`` reports ``pref`` instead."""
        prefs = list(self.prefs)
        prefs[agent] = tuple(pref)
        return Market(self.agents, self.objects, self.demand, prefs)

    def permute_agents(self, perm: Sequence[int]) -> Market:
        """Market whose k-th agent is ``self``'s agent ``perm[k]``."""
        return Market(tuple(self.agents[p] for p in perm), self.objects, self.demand,
                      tuple(self.prefs[p] for p in perm))

    def to_dict(self) -> dict:
        return {
            "d": self.demand,
            "objects": [{"id": o.id, "min": o.min, "cap": o.cap} for o in self.objects],
            "agents": [{"id": a, "prefs": list(p)} for a, p in zip(self.agents, self.prefs)],
        }


def make_market(prefs: Sequence[Sequence], mins: Sequence[int], caps: Sequence[int],
                demand: int = 1) -> Market:
    """Build a market with agents ``"1".."N"`` and objects ``"o1".."oK"``.

    ``prefs`` may hold object indices or ids.
    """
    objects = tuple(ObjectSpec(f"o{k + 1}", m, c) for k, (m, c) in enumerate(zip(mins, caps)))
    ids = [o.id for o in objects]
    named = [tuple(ids[j] if isinstance(j, int) else j for j in p) for p in prefs]
    return Market(tuple(str(i + 1) for i in range(len(prefs))), objects, demand, named)


def parse_market(text: str) -> Market:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MarketError(f"malformed market file: {exc}") from exc
    if not isinstance(data, dict):
        raise MarketError("market file must be a JSON object")
    for key in ("d", "objects", "agents"):
        if key not in data:
            raise MarketError(f"market file lacks '{key}'")
    try:
        objects = tuple(ObjectSpec(str(o["id"]), o["min"], o["cap"]) for o in data["objects"])
        agents = tuple(str(a["id"]) for a in data["agents"])
        prefs = tuple(tuple(str(j) for j in a["prefs"]) for a in data["agents"])
    except (KeyError, TypeError) as exc:
        raise MarketError(f"malformed market entry: {exc!r}") from exc
    return Market(agents, objects, data["d"], prefs)


def load_market(path) -> Market:
    with open(path, encoding="utf-8") as fh:
        return parse_market(fh.read())


# -- allocations -------------------------------------------------------------

def column_sums(mu) -> tuple:
    return tuple(sum(col) for col in zip(*mu))


def row_sums(mu) -> tuple:
    return tuple(sum(row) for row in mu)


def is_allowable(market: Market, alloc) -> bool:
    """Demand/Min/Cap check for a 0/1 matrix."""
    if len(alloc) != market.n_agents or any(len(r) != market.n_objects for r in alloc):
        return False
    if any(x not in (0, 1) for r in alloc for x in r):
        return False
    if any(s != market.demand for s in row_sums(alloc)):
        return False
    return all(m <= s <= c for s, m, c in zip(column_sums(alloc), market.mins, market.caps))


def assignment_of(market: Market, alloc) -> dict[str, list[str]]:
    """``{agent: [objects]}`` view of a deterministic allocation."""
    return {a: [market.objects[j].id for j, x in enumerate(row) if x]
            for a, row in zip(market.agents, alloc)}


# -- stochastic dominance ----------------------------------------------------

class FosdResult(enum.Enum):
    EQUAL = "equal"
    DOMINATES = "strictly_dominates"
    DOMINATED = "strictly_dominated"
    INCOMPARABLE = "incomparable"


def fosd_compare(order: Sequence[int], a: Sequence, b: Sequence) -> FosdResult:
    """Compare lotteries ``a`` and ``b`` for an agent ranking objects ``order``.

    ``order`` lists object indices best first.
    """
    if len(a) != len(b) or len(a) != len(order):
        raise ValueError(f"length mismatch: {len(order)}, {len(a)}, {len(b)}")
    if tuple(a) == tuple(b):
        return FosdResult.EQUAL
    sa = sb = 0
    ge = le = True
    for j in order:
        sa += a[j]
        sb += b[j]
        if sa < sb:
            ge = False
        elif sa > sb:
            le = False
    if ge:
        return FosdResult.DOMINATES
    if le:
        return FosdResult.DOMINATED
    return FosdResult.INCOMPARABLE


# -- feasibility -------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    capacity_inequality: bool  # sum of caps >= N d
    minimum_inequality: bool   # sum of mins <= N
    witness: DeterministicAllocation | None = None


def validate_feasibility(market: Market) -> FeasibilityReport:
    from minps.polytope import complete

    witness = complete(market, None)
    return FeasibilityReport(
        feasible=witness is not None,
        capacity_inequality=sum(market.caps) >= market.n_agents * market.demand,
        minimum_inequality=sum(market.mins) <= market.n_agents,
        witness=witness,
    )


def require_feasible(market: Market) -> None:
    if not validate_feasibility(market).feasible:
        raise InfeasibleMarketError("market admits no allowable deterministic allocation")
