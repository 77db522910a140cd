"""Inequality descriptions of the implementable set and its lower contour set.

Three families are generated here:

* the marginal system for implementable random allocations (row sums equal
  ``d``, column sums within ``[m_j, c_j]``);
* the unit-demand lower-contour system (relaxed demand, caps, and one
  minimum row per subset of minimum objects), plus its compact
  ``sum_j max(m_j, mu_j) <= N`` form;
* the general-demand ``Cap-V`` / ``Min-V`` families indexed by object and
  agent subsets.

Membership in the lower contour set is decided independently by a feasible
circulation on the agent/object network, which is the authoritative test at
any demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

from minps.flow import Arc, CirculationNetwork, solve_circulation
from minps.market import InfeasibleMarketError, Market, MarketError, format_rational

DEFAULT_MAX_AGENTS = 8
DEFAULT_MAX_OBJECTS = 8


class SystemTooLargeError(MarketError):
    """The requested subset-enumerated system exceeds the configured size cap."""


@dataclass(frozen=True)
class Constraint:
    """``sum(coeff * mu[i][j] for (i, j), coeff in terms) <= bound``."""

    label: str
    cells: tuple[tuple[int, int], ...]
    bound: Fraction
    coeffs: tuple | None = None  # None means every coefficient is 1

    def terms(self) -> Iterator[tuple[int, int, Fraction]]:
        coeffs = self.coeffs or (1,) * len(self.cells)
        for (i, j), a in zip(self.cells, coeffs):
            yield i, j, Fraction(a)

    def lhs(self, mu) -> Fraction:
        if self.coeffs is None:
            return sum((mu[i][j] for i, j in self.cells), Fraction(0))
        return sum((a * mu[i][j] for (i, j), a in zip(self.cells, self.coeffs)), Fraction(0))

    def slack(self, mu) -> Fraction:
        return self.bound - self.lhs(mu)


@dataclass(frozen=True)
class ConstraintSystem:
    rows: tuple[Constraint, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def labels(self) -> list[str]:
        return [r.label for r in self.rows]

    def satisfied(self, mu) -> bool:
        return all(r.slack(mu) >= 0 for r in self.rows)

    def violated(self, mu) -> list[Constraint]:
        return [r for r in self.rows if r.slack(mu) < 0]

    def binding(self, mu) -> list[Constraint]:
        return [r for r in self.rows if r.slack(mu) == 0]

    def to_dict(self, market: Market) -> list[dict]:
        return [
            {
                "label": r.label,
                "terms": [
                    {"agent": market.agents[i], "object": market.objects[j].id,
                     "coeff": format_rational(a)}
                    for i, j, a in r.terms()
                ],
                "bound": format_rational(r.bound),
            }
            for r in self.rows
        ]

    def to_json(self, market: Market) -> str:
        return json.dumps(self.to_dict(market), indent=2, sort_keys=True)


def _names(market: Market, objs) -> str:
    return "{" + ",".join(market.objects[j].id for j in objs) + "}"


def _agent_names(market: Market, agents) -> str:
    return "{" + ",".join(market.agents[i] for i in agents) + "}"


def _subsets(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    for k in range(len(items) + 1):
        yield from combinations(items, k)


# -- implementable set -------------------------------------------------------

@dataclass(frozen=True)
class DeltaDSystem:
    """Row-sum equalities plus nonnegative upper rows and the minimum rows.

    ``lower`` rows read ``lhs >= bound``; they are kept apart so that
    ``upper`` stays in nonnegative ``A mu <= b`` form.
    """

    equalities: tuple[Constraint, ...]
    upper: ConstraintSystem
    lower: tuple[Constraint, ...]

    def contains(self, mu) -> bool:
        if any(not 0 <= x <= 1 for row in mu for x in row):
            return False
        return (all(r.lhs(mu) == r.bound for r in self.equalities)
                and self.upper.satisfied(mu)
                and all(r.lhs(mu) >= r.bound for r in self.lower))


def delta_d_system(market: Market) -> DeltaDSystem:
    n, k = market.n_agents, market.n_objects
    eq = tuple(Constraint(f"Demand {market.agents[i]}", tuple((i, j) for j in range(k)),
                          Fraction(market.demand)) for i in range(n))
    caps = tuple(Constraint(f"Cap {o.id}", tuple((i, j) for i in range(n)), Fraction(o.cap))
                 for j, o in enumerate(market.objects))
    mins = tuple(Constraint(f"Min {market.objects[j].id}", tuple((i, j) for i in range(n)),
                            Fraction(market.mins[j])) for j in market.min_objects)
    return DeltaDSystem(eq, ConstraintSystem(caps), mins)


def in_delta_d(market: Market, mu) -> bool:
    if len(mu) != market.n_agents or any(len(r) != market.n_objects for r in mu):
        return False
    return delta_d_system(market).contains(mu)


# -- unit demand -------------------------------------------------------------

def lcs_system_unit(market: Market) -> ConstraintSystem:
    """Relaxed demand, caps, and one minimum row for every subset of O_m."""
    if market.demand != 1:
        raise MarketError("unit-demand system requires d = 1")
    n, k = market.n_agents, market.n_objects
    rows = [Constraint(f"Demand {market.agents[i]}", tuple((i, j) for j in range(k)), Fraction(1))
            for i in range(n)]
    rows += [Constraint(f"Cap {o.id}", tuple((i, j) for i in range(n)), Fraction(o.cap))
             for j, o in enumerate(market.objects)]
    for S in _subsets(market.min_objects):
        bound = n - sum(market.mins[j] for j in S)
        if bound < 0:
            raise InfeasibleMarketError(f"minimums of {_names(market, S)} exceed the number of agents")
        rest = [j for j in range(k) if j not in S]
        rows.append(Constraint(f"Min-III S={_names(market, S)}",
                               tuple((i, j) for j in rest for i in range(n)), Fraction(bound)))
    return ConstraintSystem(tuple(rows))


def min_iv_slack(market: Market, mu) -> Fraction:
    """``N - sum_j max(m_j, mu_j)``; zero exactly when the condition binds."""
    cols = [sum(col, Fraction(0)) for col in zip(*mu)]
    return market.n_agents - sum(max(Fraction(m), c) for m, c in zip(market.mins, cols))


def check_min_iv(market: Market, mu) -> bool:
    if market.demand != 1:
        raise MarketError("the compact minimum condition requires d = 1")
    return min_iv_slack(market, mu) >= 0


def unit_compact_member(market: Market, mu) -> bool:
    """Relaxed demand, caps, and the compact minimum condition together."""
    if any(not 0 <= x <= 1 for row in mu for x in row):
        return False
    if any(sum(row) > 1 for row in mu):
        return False
    cols = [sum(col) for col in zip(*mu)]
    if any(c > cap for c, cap in zip(cols, market.caps)):
        return False
    return check_min_iv(market, mu)


# -- general demand ----------------------------------------------------------

def lcs_system_general(market: Market, *, prune: bool = True,
                       max_agents: int = DEFAULT_MAX_AGENTS,
                       max_objects: int = DEFAULT_MAX_OBJECTS) -> ConstraintSystem:
    """``Cap-V`` rows for all (S, T) and ``Min-V`` rows for S within O_m.

    With ``prune`` a row is dropped only when its bound is at least its number
    of cells, i.e. it cannot bind before every cell in it is already full.
    Pruning never changes which matrices in the unit box satisfy the system.
    """
    n, k, d = market.n_agents, market.n_objects, market.demand
    if n > max_agents or k > max_objects:
        raise SystemTooLargeError(
            f"instance {n}x{k} exceeds the subset-enumeration cap {max_agents}x{max_objects}")
    agents, objects = range(n), range(k)
    caps, mins = market.caps, market.mins
    agent_subsets = list(_subsets(tuple(agents)))
    rows = []
    for S in _subsets(tuple(objects)):
        cap_S = sum(caps[j] for j in S)
        not_S = [j for j in objects if j not in S]
        for T in agent_subsets:
            bound = len(T) * (len(not_S) - d) + cap_S
            others = [i for i in agents if i not in T]
            rows.append((f"Cap-V S={_names(market, S)},T={_agent_names(market, T)}",
                         others, list(S), bound))
    for S in _subsets(market.min_objects):
        min_S = sum(mins[j] for j in S)
        not_S = [j for j in objects if j not in S]
        for T in agent_subsets:
            bound = len(T) * d + (n - len(T)) * len(S) - min_S
            rows.append((f"Min-V S={_names(market, S)},T={_agent_names(market, T)}",
                         list(T), not_S, bound))
    out = []
    for label, row_agents, row_objects, bound in rows:
        if bound < 0:
            raise InfeasibleMarketError(f"row {label} has negative bound {bound}")
        if not row_agents or not row_objects:
            continue
        if prune and bound >= len(row_agents) * len(row_objects):
            continue
        cells = tuple((i, j) for i in row_agents for j in row_objects)
        out.append(Constraint(label, cells, Fraction(bound)))
    return ConstraintSystem(tuple(out))


# -- circulation membership --------------------------------------------------

def market_network(market: Market, nu=None, *, upper=None) -> CirculationNetwork:
    """Agent/object network whose circulations are completions of ``nu``.

    Arcs: source->agent fixed at d, agent->object in ``[nu_ij, 1]``,
    object->sink in ``[m_j, c_j]`` and sink->source fixed at N d.  ``upper``
    optionally overrides the per-cell upper bounds.
    """
    n, k, d = market.n_agents, market.n_objects, market.demand
    arcs = [Arc("s", ("a", i), d, d) for i in range(n)]
    for i in range(n):
        for j in range(k):
            lo = nu[i][j] if nu is not None else 0
            hi = upper[i][j] if upper is not None else 1
            arcs.append(Arc(("a", i), ("o", j), lo, hi))
    arcs += [Arc(("o", j), "t", market.mins[j], market.caps[j]) for j in range(k)]
    arcs.append(Arc("t", "s", n * d, n * d))
    nodes = ("s", "t") + tuple(("a", i) for i in range(n)) + tuple(("o", j) for j in range(k))
    return CirculationNetwork(nodes, tuple(arcs))


def complete(market: Market, nu=None, *, upper=None):
    """A completion of ``nu`` inside the implementable set, or ``None``.

    The result is an N x O matrix; it is integral whenever ``nu`` and
    ``upper`` are.
    """
    if nu is not None and any(not 0 <= x <= 1 for row in nu for x in row):
        return None
    circ = solve_circulation(market_network(market, nu, upper=upper))
    if circ is None:
        return None
    n, k = market.n_agents, market.n_objects
    cells = circ.flow[n:n + n * k]
    return tuple(tuple(cells[i * k:(i + 1) * k]) for i in range(n))


def lcs_member(market: Market, nu) -> bool:
    return complete(market, nu) is not None
