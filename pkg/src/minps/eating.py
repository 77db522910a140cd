"""The Minimums Probabilistic Serial eating process.

Two engines:

``mps_unit``
    The discrete step algorithm for unit demand.  Each step every agent eats
    his favourite object among the commonly available ones until the first of
    three things happens: an object without an outstanding minimum fills its
    capacity, an object with an outstanding minimum reaches it, or the
    market-wide minimum budget ``sum_j max(m_j, mu_j) <= N`` binds.  After the
    budget binds, only objects still short of their minimum stay open.

``mps_general``
    Event-driven continuous eating on ``[0, d]`` for any demand.  Availability
    is per (agent, object) cell and is governed by the explicit ``Cap-V`` /
    ``Min-V`` rows.  Between events everything is affine in time, so event
    times are exact.

Both return the final allocation and an :class:`EatingTrace`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from minps.market import (
    Market,
    MarketError,
    RandomAllocation,
    format_rational,
    require_feasible,
)
from minps.polytope import DEFAULT_MAX_AGENTS, DEFAULT_MAX_OBJECTS, lcs_system_general

CAP_CLOSE = "cap_close"
MIN_SATISFIED = "min_satisfied"
GLOBAL_MIN = "global_min"
HORIZON = "horizon"
ROW_BINDS = "row_binds"
CELL_FULL = "cell_full"


class EatingError(RuntimeError):
    """Internal inconsistency: the eating process reached an impossible state."""


@dataclass(frozen=True)
class Event:
    kind: str
    object: str | None = None
    agent: str | None = None
    label: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in (("kind", self.kind), ("object", self.object),
                                  ("agent", self.agent), ("label", self.label)) if v is not None}


@dataclass(frozen=True)
class StepRecord:
    start: Fraction
    end: Fraction
    available: Mapping[str, tuple[str, ...]]  # agent -> objects open to him
    deficient: tuple[str, ...]                # objects still short of their minimum
    eating: Mapping[str, str]                 # agent -> object eaten during the step
    causes: tuple[Event, ...]
    binding: tuple[str, ...] = ()             # constraint labels that start binding at ``end``

    def to_dict(self) -> dict:
        return {
            "start": format_rational(self.start),
            "end": format_rational(self.end),
            "available": {a: list(v) for a, v in self.available.items()},
            "deficient": list(self.deficient),
            "eating": dict(self.eating),
            "causes": [c.to_dict() for c in self.causes],
            "binding": list(self.binding),
        }


@dataclass(frozen=True)
class EatingTrace:
    steps: tuple[StepRecord, ...]
    tau: Fraction | None
    closing_times: Mapping[str, Fraction]
    horizon: int
    # Zero-length rounds of the step algorithm: events triggered at an
    # instant by an earlier event at the same instant.  Their causes are
    # folded into the preceding step (or ``initial_causes`` at t = 0).
    iterations: int = 0
    initial_causes: tuple[Event, ...] = ()
    flag_sets: int = 0

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "tau": None if self.tau is None else format_rational(self.tau),
            "closing_times": {j: format_rational(t) for j, t in self.closing_times.items()},
            "iterations": self.iterations,
            "initial_causes": [c.to_dict() for c in self.initial_causes],
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def integrate(self, market: Market) -> RandomAllocation:
        """Rebuild the allocation from the per-step eating assignments."""
        idx = market.object_index
        mu = [[Fraction(0)] * market.n_objects for _ in market.agents]
        for step in self.steps:
            for i, agent in enumerate(market.agents):
                if agent in step.eating:
                    mu[i][idx[step.eating[agent]]] += step.end - step.start
        return tuple(tuple(r) for r in mu)


# -- unit demand -------------------------------------------------------------

@dataclass(frozen=True)
class Breakpoint:
    time: Fraction
    cap_closed: frozenset      # objects outside O_m reaching capacity
    min_met: frozenset         # objects in O_m reaching their minimum
    global_min: bool
    horizon: bool
    eaters: tuple[int, ...]    # object eaten by each agent


def _favourite(order, available) -> int | None:
    for j in order:
        if j in available:
            return j
    return None


def next_breakpoint(market: Market, t: Fraction, totals, available, deficient) -> Breakpoint:
    """End time of the current step and every event attaining it.

    ``totals`` are the current column sums, ``available`` the open objects
    and ``deficient`` the open objects still short of their minimum (all as
    object indices).  Objects nobody eats have an infinite breakpoint.
    """
    if t >= 1:
        raise EatingError(f"step requested at t={t} past the horizon")
    if not set(deficient) <= set(available):
        raise EatingError("deficient objects must be available")
    mins, caps = market.mins, market.caps
    eaters = []
    count = [0] * market.n_objects
    for order in market.order:
        j = _favourite(order, available)
        if j is None:
            raise EatingError(f"an agent has nothing left to eat at t={t}")
        eaters.append(j)
        count[j] += 1
    candidates: list[tuple[Fraction, str, int | None]] = []
    for j in available:
        if count[j] == 0:
            continue
        if j in deficient:
            if not totals[j] < mins[j]:
                raise EatingError(f"deficient object {j} already meets its minimum")
            candidates.append((t + (mins[j] - totals[j]) / count[j], MIN_SATISFIED, j))
        else:
            # Equality happens when an object with m_j = c_j just met its
            # minimum: it closes in a zero-length round.
            if totals[j] > caps[j]:
                raise EatingError(f"open object {j} is over capacity")
            candidates.append((t + (caps[j] - totals[j]) / count[j], CAP_CLOSE, j))
    rate = sum(count[j] for j in available if j not in deficient)
    if rate > 0:
        budget = (market.n_agents - sum(mins[j] for j in deficient)
                  - sum(totals[j] for j in range(market.n_objects) if j not in deficient))
        candidates.append((t + Fraction(budget) / rate, GLOBAL_MIN, None))
    end = min([Fraction(1)] + [c[0] for c in candidates])
    hits = [c for c in candidates if c[0] == end]
    return Breakpoint(
        time=end,
        cap_closed=frozenset(j for _, kind, j in hits if kind == CAP_CLOSE),
        min_met=frozenset(j for _, kind, j in hits if kind == MIN_SATISFIED),
        global_min=any(kind == GLOBAL_MIN for _, kind, _ in hits),
        horizon=end == 1,
        eaters=tuple(eaters),
    )


def _binding_min_rows(market: Market, totals) -> list[str]:
    """Labels of the subset-minimum rows tight at ``totals``.

    A row for ``S`` binds exactly when the compact condition binds and
    ``S`` lies between the objects strictly below and weakly below their
    minimum.
    """
    if market.n_agents != sum(max(m, x) for m, x in zip(market.mins, totals)):
        return []
    below = [j for j in market.min_objects if totals[j] < market.mins[j]]
    at = [j for j in market.min_objects if totals[j] == market.mins[j]]
    labels = []
    for mask in range(1 << len(at)):
        S = sorted(below + [at[b] for b in range(len(at)) if mask >> b & 1])
        labels.append("Min-III S={" + ",".join(market.objects[j].id for j in S) + "}")
    return labels


def mps_unit(market: Market, *, check: bool = True) -> tuple[RandomAllocation, EatingTrace]:
    """Run the unit-demand step algorithm; returns ``(mu, trace)``."""
    if market.demand != 1:
        raise MarketError("mps_unit requires d = 1; use mps_general")
    if check:
        require_feasible(market)
    n, k = market.n_agents, market.n_objects
    ids = [o.id for o in market.objects]
    mu = [[Fraction(0)] * k for _ in range(n)]
    totals = [Fraction(0)] * k
    t = Fraction(0)
    available = set(range(k))
    deficient = set(market.min_objects)
    flag = False
    tau = None
    flag_sets = 0
    closing = {}
    steps: list[StepRecord] = []
    initial: list[Event] = []
    iterations = 0
    bound_before: set[str] = set(_binding_min_rows(market, totals))

    while t < 1:
        iterations += 1
        bp = next_breakpoint(market, t, totals, available, deficient)
        causes = [Event(CAP_CLOSE, ids[j]) for j in sorted(bp.cap_closed)]
        causes += [Event(MIN_SATISFIED, ids[j]) for j in sorted(bp.min_met)]
        if bp.global_min:
            flag_sets += 1
            flag = True
            tau = bp.time
            causes.append(Event(GLOBAL_MIN))
        if bp.horizon:
            causes.append(Event(HORIZON))
        prev_available = available
        prev_deficient = deficient
        deficient = deficient - bp.min_met
        if flag:
            available = set(deficient)
        else:
            available = available - bp.cap_closed
        dt = bp.time - t
        if dt > 0:
            for i, j in enumerate(bp.eaters):
                mu[i][j] += dt
                totals[j] += dt
        for j in prev_available - available:
            closing[ids[j]] = bp.time
        now_binding = {f"Cap {ids[j]}" for j in range(k) if totals[j] == market.caps[j]}
        now_binding |= set(_binding_min_rows(market, totals))
        if bp.horizon:
            now_binding |= {f"Demand {a}" for a in market.agents}
        new_binding = tuple(sorted(now_binding - bound_before))
        bound_before = now_binding
        if dt > 0:
            shared = tuple(ids[j] for j in sorted(prev_available))
            steps.append(StepRecord(
                start=t, end=bp.time,
                available={a: shared for a in market.agents},
                deficient=tuple(ids[j] for j in sorted(prev_deficient)),
                eating={a: ids[j] for a, j in zip(market.agents, bp.eaters)},
                causes=tuple(causes), binding=new_binding,
            ))
        elif steps:
            last = steps[-1]
            steps[-1] = StepRecord(last.start, last.end, last.available, last.deficient,
                                   last.eating, last.causes + tuple(causes),
                                   last.binding + new_binding)
        else:
            initial += causes
        t = bp.time

    for j in available:
        closing.setdefault(ids[j], Fraction(1))
    trace = EatingTrace(
        steps=tuple(steps), tau=tau,
        closing_times={j: closing[j] for j in ids},
        horizon=1, iterations=iterations,
        initial_causes=tuple(initial), flag_sets=flag_sets,
    )
    return tuple(tuple(r) for r in mu), trace


# -- general demand ----------------------------------------------------------

def mps_general(market: Market, *, check: bool = True,
                max_agents: int = DEFAULT_MAX_AGENTS,
                max_objects: int = DEFAULT_MAX_OBJECTS) -> tuple[RandomAllocation, EatingTrace]:
    """Continuous eating on ``[0, d]`` with per-cell availability."""
    system = lcs_system_general(market, max_agents=max_agents, max_objects=max_objects)
    if check:
        require_feasible(market)
    n, k, d = market.n_agents, market.n_objects, market.demand
    ids = [o.id for o in market.objects]
    rows = system.rows
    bounds = [r.bound for r in rows]
    lhs = [Fraction(0)] * len(rows)
    rows_of = [[[] for _ in range(k)] for _ in range(n)]
    for r, row in enumerate(rows):
        for i, j in row.cells:
            rows_of[i][j].append(r)
    mu = [[Fraction(0)] * k for _ in range(n)]
    t = Fraction(0)
    closed = [[False] * k for _ in range(n)]
    closing = {}
    steps: list[StepRecord] = []
    initial: list[Event] = []
    bound_rows: set[int] = set()
    iterations = 0

    def refresh():
        for i in range(n):
            for j in range(k):
                if not closed[i][j] and (mu[i][j] >= 1 or any(r in bound_rows for r in rows_of[i][j])):
                    closed[i][j] = True
        for j in range(k):
            if ids[j] not in closing and all(closed[i][j] for i in range(n)):
                closing[ids[j]] = t

    bound_rows = {r for r in range(len(rows)) if bounds[r] == 0}
    if bound_rows:
        initial += [Event(ROW_BINDS, label=rows[r].label) for r in sorted(bound_rows)]
    refresh()

    while t < d:
        iterations += 1
        eating = []
        for i, order in enumerate(market.order):
            j = next((j for j in order if not closed[i][j]), None)
            if j is None:
                raise EatingError(f"agent {market.agents[i]} stalls at t={t} < {d}")
            eating.append(j)
        rate = [0] * len(rows)
        for i, j in enumerate(eating):
            for r in rows_of[i][j]:
                rate[r] += 1
        end = Fraction(d)
        for r in range(len(rows)):
            if rate[r]:
                end = min(end, t + (bounds[r] - lhs[r]) / rate[r])
        for i, j in enumerate(eating):
            end = min(end, t + 1 - mu[i][j])
        if end <= t:
            raise EatingError(f"no progress at t={t}")
        dt = end - t
        for i, j in enumerate(eating):
            mu[i][j] += dt
        for r in range(len(rows)):
            if rate[r]:
                lhs[r] += rate[r] * dt
        newly = [r for r in range(len(rows)) if rate[r] and lhs[r] == bounds[r]]
        full = [(i, j) for i, j in enumerate(eating) if mu[i][j] == 1]
        causes = [Event(ROW_BINDS, label=rows[r].label) for r in newly]
        causes += [Event(CELL_FULL, object=ids[j], agent=market.agents[i]) for i, j in full]
        if end == d:
            causes.append(Event(HORIZON))
        snapshot = {market.agents[i]: tuple(ids[j] for j in range(k) if not closed[i][j])
                    for i in range(n)}
        deficient = tuple(ids[j] for j in range(k)
                          if sum(mu[i][j] - (dt if eating[i] == j else 0) for i in range(n))
                          < market.mins[j])
        steps.append(StepRecord(
            start=t, end=end, available=snapshot, deficient=deficient,
            eating={market.agents[i]: ids[j] for i, j in enumerate(eating)},
            causes=tuple(causes), binding=tuple(rows[r].label for r in newly),
        ))
        t = end
        bound_rows |= set(newly)
        refresh()

    for j in ids:
        closing.setdefault(j, Fraction(d))
    trace = EatingTrace(
        steps=tuple(steps), tau=None,
        closing_times={j: closing[j] for j in ids},
        horizon=d, iterations=iterations, initial_causes=tuple(initial),
    )
    return tuple(tuple(r) for r in mu), trace


def mps(market: Market, *, general: bool = False, check: bool = True):
    """Dispatch to the unit engine when ``d = 1`` unless ``general`` is set."""
    if market.demand == 1 and not general:
        return mps_unit(market, check=check)
    return mps_general(market, check=check)
