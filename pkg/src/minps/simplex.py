"""Exact two-phase tableau simplex over ``Fraction`` with Bland's rule.

Solves ``max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``x >= 0``.  Bland's smallest-index rule rules out cycling, so the method
terminates on degenerate problems too.  The tableau runs on ``gmpy2.mpq``
when available (exact, only faster); results come back as ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None


def _pivot(T, basis, r, c):
    row = T[r]
    p = row[c]
    if p != 1:
        T[r] = row = [v / p for v in row]
    for k, other in enumerate(T):
        if k != r:
            f = other[c]
            if f:
                T[k] = [a - f * b for a, b in zip(other, row)]
    basis[r] = c


def _run(T, basis, n_cols) -> str:
    """Maximise the objective held in the last row (stored as reduced costs)."""
    obj = T[-1]
    while True:
        obj = T[-1]
        entering = next((j for j in range(n_cols) if obj[j] < 0), None)
        if entering is None:
            return OPTIMAL
        best = None
        for r in range(len(T) - 1):
            a = T[r][entering]
            if a > 0:
                ratio = T[r][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                    best = (ratio, r)
        if best is None:
            return UNBOUNDED
        _pivot(T, basis, best[1], entering)


def solve_lp(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LpResult:
    n = len(c)
    Q = lambda v: _Q(Fraction(v).numerator, Fraction(v).denominator)  # noqa: E731
    rows = [([Q(a) for a in row], Q(b), True) for row, b in zip(A_ub, b_ub)]
    rows += [([Q(a) for a in row], Q(b), False) for row, b in zip(A_eq, b_eq)]
    m = len(rows)
    n_slack = sum(1 for _, _, ub in rows if ub)
    width = n + n_slack + m  # structural, slack, artificial
    T = []
    basis = []
    s = 0
    for r, (coeffs, b, ub) in enumerate(rows):
        line = coeffs + [_Q(0)] * (n_slack + m) + [b]
        if ub:
            line[n + s] = _Q(1)
            s += 1
        if b < 0:
            line = [-v for v in line]
        line[n + n_slack + r] = _Q(1)
        T.append(line)
        basis.append(n + n_slack + r)

    # Phase 1: maximise -sum(artificials).
    phase1 = [_Q(0)] * (width + 1)
    for line in T:
        for j in range(n + n_slack):
            phase1[j] -= line[j]
        phase1[-1] -= line[-1]
    T.append(phase1)
    _run(T, basis, n + n_slack)
    if T[-1][-1] != 0:
        return LpResult(INFEASIBLE)
    T.pop()
    # Drive remaining (zero-level) artificials out of the basis.
    for r in range(len(T) - 1, -1, -1):
        if basis[r] >= n + n_slack:
            col = next((j for j in range(n + n_slack) if T[r][j] != 0), None)
            if col is None:
                del T[r]
                del basis[r]
            else:
                _pivot(T, basis, r, col)
    T = [line[:n + n_slack] + [line[-1]] for line in T]

    objective = [-Q(v) for v in c] + [_Q(0)] * n_slack + [_Q(0)]
    for r, b in enumerate(basis):
        f = objective[b]
        if f:
            objective = [o - f * v for o, v in zip(objective, T[r])]
    T.append(objective)
    status = _run(T, basis, n + n_slack)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)
    x = [_Q(0)] * (n + n_slack)
    for r, b in enumerate(basis):
        x[b] = T[r][-1]
    xs = tuple(Fraction(int(v.numerator), int(v.denominator)) for v in x[:n])
    return LpResult(OPTIMAL, xs, sum((Fraction(ci) * xi for ci, xi in zip(c, xs)), Fraction(0)))
