"""Write an implementable random allocation as a lottery over allowable
deterministic allocations, and draw from such lotteries reproducibly.

Decomposition extracts one integral vertex at a time.  Each round rounds
every fractional cell to ``[0, 1]`` and every fractional column total to
``[floor, ceil]``, fixes integral cells and columns, and asks the circulation
solver for an integral point of that box (one exists because the current
matrix is a fractional point of it).  The largest weight that keeps the
residual inside the same box is then peeled off.  Each round makes at least
one fractional cell or column integral, so the number of parts is at most
``#fractional cells + #fractional columns + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from minps.flow import Arc, CirculationNetwork, solve_circulation
from minps.market import (
    DeterministicAllocation,
    Market,
    MarketError,
    RandomAllocation,
    assignment_of,
    format_rational,
    is_allowable,
)
from minps.polytope import in_delta_d

MASK64 = (1 << 64) - 1


class NotImplementableError(MarketError):
    """The matrix is not a convex combination of allowable allocations."""


@dataclass(frozen=True)
class Lottery:
    parts: tuple[tuple[Fraction, DeterministicAllocation], ...]

    def __len__(self) -> int:
        return len(self.parts)

    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for w, _ in self.parts)

    def combination(self) -> RandomAllocation:
        _, first = self.parts[0]
        acc = [[Fraction(0)] * len(first[0]) for _ in first]
        for w, alloc in self.parts:
            for i, row in enumerate(alloc):
                for j, x in enumerate(row):
                    if x:
                        acc[i][j] += w * x
        return tuple(tuple(r) for r in acc)

    def is_valid(self, market: Market, target=None) -> bool:
        if not self.parts or sum(self.weights()) != 1 or any(w <= 0 for w in self.weights()):
            return False
        if not all(is_allowable(market, alloc) for _, alloc in self.parts):
            return False
        return target is None or self.combination() == tuple(tuple(r) for r in target)

    def to_dict(self, market: Market) -> dict:
        return {"parts": [{"weight": format_rational(w), "assignment": assignment_of(market, a)}
                          for w, a in self.parts]}

    def to_json(self, market: Market) -> str:
        return json.dumps(self.to_dict(market), indent=2, sort_keys=True)


def _integral_point(market: Market, mu, lo, hi) -> DeterministicAllocation | None:
    n, k, d = market.n_agents, market.n_objects, market.demand
    arcs = [Arc("s", ("a", i), d, d) for i in range(n)]
    arcs += [Arc(("a", i), ("o", j), lo[i][j], hi[i][j]) for i in range(n) for j in range(k)]
    for j in range(k):
        col = sum(mu[i][j] for i in range(n))
        arcs.append(Arc(("o", j), "t", math.floor(col), math.ceil(col)))
    arcs.append(Arc("t", "s", n * d, n * d))
    nodes = ("s", "t") + tuple(("a", i) for i in range(n)) + tuple(("o", j) for j in range(k))
    circ = solve_circulation(CirculationNetwork(nodes, tuple(arcs)))
    if circ is None:
        return None
    cells = circ.flow[n:n + n * k]
    return tuple(tuple(int(x) for x in cells[i * k:(i + 1) * k]) for i in range(n))


def _extract(market: Market, mu) -> DeterministicAllocation:
    n, k = market.n_agents, market.n_objects
    lo = [[math.floor(x) for x in row] for row in mu]
    hi = [[math.ceil(x) for x in row] for row in mu]
    # Prefer a vertex that keeps the largest fractional cell: short lotteries.
    frac = [(mu[i][j], i, j) for i in range(n) for j in range(k) if 0 < mu[i][j] < 1]
    if frac:
        _, i, j = max(frac, key=lambda c: (c[0], -c[1], -c[2]))
        lo[i][j] = 1
        M = _integral_point(market, mu, lo, hi)
        if M is not None:
            return M
        lo[i][j] = 0
    M = _integral_point(market, mu, lo, hi)
    if M is None:
        raise NotImplementableError("no integral vertex in the rounding box")
    return M


def _step_size(mu, M) -> Fraction:
    lam = Fraction(1)
    for row, mrow in zip(mu, M):
        for x, m in zip(row, mrow):
            if 0 < x < 1:
                lam = min(lam, x if m == 1 else 1 - x)
    for col, mcol in zip(zip(*mu), zip(*M)):
        total, mt = sum(col), sum(mcol)
        if total.denominator != 1:
            lam = min(lam, total - math.floor(total) if mt > total else math.ceil(total) - total)
    return lam


def decompose(market: Market, mu) -> Lottery:
    """Lottery over allowable allocations whose mean is exactly ``mu``."""
    mu = tuple(tuple(Fraction(x) for x in row) for row in mu)
    if not in_delta_d(market, mu):
        raise NotImplementableError("matrix violates the implementability conditions")
    parts: dict[DeterministicAllocation, Fraction] = {}
    mass = Fraction(1)
    while True:
        if all(x.denominator == 1 for row in mu for x in row):
            M = tuple(tuple(int(x) for x in row) for row in mu)
            parts[M] = parts.get(M, 0) + mass
            break
        M = _extract(market, mu)
        lam = _step_size(mu, M)
        if not 0 < lam < 1:
            raise NotImplementableError(f"degenerate extraction step {lam}")
        parts[M] = parts.get(M, 0) + mass * lam
        mu = tuple(tuple((x - lam * m) / (1 - lam) for x, m in zip(row, mrow))
                   for row, mrow in zip(mu, M))
        mass *= 1 - lam
    return Lottery(tuple((w, M) for M, w in parts.items()))


# -- sampling ----------------------------------------------------------------

class SplitMix64:
    """The SplitMix64 generator (Steele, Lea & Flood), 64-bit state."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def sample(lot: Lottery, seed: int) -> DeterministicAllocation:
    """Draw one part: the first whose cumulative weight exceeds ``u / 2**64``
    where ``u`` is the first SplitMix64 output for ``seed``."""
    u = Fraction(SplitMix64(seed).next(), 1 << 64)
    acc = Fraction(0)
    for w, alloc in lot.parts:
        acc += w
        if u < acc:
            return alloc
    return lot.parts[-1][1]
