"""Feasible circulations with lower and upper arc bounds, in exact arithmetic.

Lower bounds are removed by the usual excess/deficit transformation and the
resulting max-flow problem is solved with Dinic's algorithm.  Capacities may
be ``int`` or ``Fraction``; nothing here ever touches a float, and integer
bounds always produce an integer circulation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

Number = int | Fraction


@dataclass(frozen=True)
class Arc:
    tail: Hashable
    head: Hashable
    lower: Number
    upper: Number

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"arc {self.tail}->{self.head}: lower {self.lower} > upper {self.upper}")


@dataclass(frozen=True)
class CirculationNetwork:
    nodes: tuple
    arcs: tuple[Arc, ...]


@dataclass(frozen=True)
class Circulation:
    network: CirculationNetwork
    flow: tuple  # aligned with network.arcs

    def __getitem__(self, index: int) -> Number:
        return self.flow[index]

    def is_valid(self) -> bool:
        balance = {v: 0 for v in self.network.nodes}
        for arc, x in zip(self.network.arcs, self.flow):
            if not arc.lower <= x <= arc.upper:
                return False
            balance[arc.tail] -= x
            balance[arc.head] += x
        return all(b == 0 for b in balance.values())


class _Dinic:
    """Dinic max flow over integer node ids; edges stored in flat arrays."""

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[Number] = []

    def add_edge(self, u: int, v: int, c: Number) -> int:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def _levels(self, s: int, t: int):
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                if self.cap[e] > 0 and level[self.to[e]] < 0:
                    level[self.to[e]] = level[u] + 1
                    queue.append(self.to[e])
        return level if level[t] >= 0 else None

    def _augment(self, u, t, pushed, level, it):
        if u == t:
            return pushed
        adj = self.adj[u]
        while it[u] < len(adj):
            e = adj[it[u]]
            v = self.to[e]
            if self.cap[e] > 0 and level[v] == level[u] + 1:
                got = self._augment(v, t, min(pushed, self.cap[e]), level, it)
                if got > 0:
                    self.cap[e] -= got
                    self.cap[e ^ 1] += got
                    return got
            it[u] += 1
        return 0

    def max_flow(self, s: int, t: int, limit: Number) -> Number:
        total = 0
        while total < limit:
            level = self._levels(s, t)
            if level is None:
                break
            it = [0] * self.n
            while total < limit:
                got = self._augment(s, t, limit - total, level, it)
                if got == 0:
                    break
                total += got
        return total


def solve_circulation(net: CirculationNetwork) -> Circulation | None:
    """Return a feasible circulation of ``net``, or ``None`` if none exists."""
    index = {v: k for k, v in enumerate(net.nodes)}
    n = len(net.nodes)
    source, sink = n, n + 1
    graph = _Dinic(n + 2)
    excess = [0] * n
    edge_ids = []
    for arc in net.arcs:
        u, v = index[arc.tail], index[arc.head]
        edge_ids.append(graph.add_edge(u, v, arc.upper - arc.lower))
        excess[v] += arc.lower
        excess[u] -= arc.lower
    need = 0
    for v, ex in enumerate(excess):
        if ex > 0:
            graph.add_edge(source, v, ex)
            need += ex
        elif ex < 0:
            graph.add_edge(v, sink, -ex)
    if graph.max_flow(source, sink, need) < need:
        return None
    flow = tuple(arc.lower + graph.cap[e ^ 1] for arc, e in zip(net.arcs, edge_ids))
    return Circulation(net, flow)


def max_flow_value(nodes: Sequence, arcs: Sequence[tuple], source, sink) -> Number:
    """Plain max-flow value for ``(tail, head, capacity)`` triples."""
    index = {v: k for k, v in enumerate(nodes)}
    graph = _Dinic(len(nodes))
    for u, v, c in arcs:
        graph.add_edge(index[u], index[v], c)
    return graph.max_flow(index[source], index[sink], sum(c for u, _, c in arcs if u == source))
