"""Exact Gaussian elimination over the rationals.

Rows are sparse ``{column: Fraction}`` dicts; the systems built by the
client solver are block-sparse, so elimination only touches nonzeros.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SingularSystemError(ArithmeticError):
    pass


def solve_sparse(rows: Sequence[dict], rhs: Sequence[Fraction], size: int) -> list[Fraction]:
    """Solve ``A x = b`` exactly for square ``A`` given as sparse rows."""
    if len(rows) != size or len(rhs) != size:
        raise ValueError("system must be square")
    rows = [dict(r) for r in rows]
    rhs = list(rhs)
    # column -> rows that still have a nonzero there
    occurs: list[set] = [set() for _ in range(size)]
    for r, row in enumerate(rows):
        for c in row:
            occurs[c].add(r)
    done = [False] * size
    pivot_of = [-1] * size
    for col in range(size):
        candidates = [r for r in occurs[col] if not done[r]]
        if not candidates:
            raise SingularSystemError(f"no pivot in column {col}")
        # sparsest row limits fill-in
        p = min(candidates, key=lambda r: (len(rows[r]), r))
        done[p] = True
        pivot_of[col] = p
        prow = rows[p]
        pval = prow[col]
        for r in candidates:
            if r == p:
                continue
            row = rows[r]
            factor = row[col] / pval
            for c, v in prow.items():
                new = row.get(c, 0) - factor * v
                if new:
                    if c not in row:
                        occurs[c].add(r)
                    row[c] = new
                elif c in row:
                    del row[c]
                    occurs[c].discard(r)
            rhs[r] -= factor * rhs[p]
    x = [Fraction(0)] * size
    for col in reversed(range(size)):
        p = pivot_of[col]
        row = rows[p]
        acc = rhs[p]
        for c, v in row.items():
            if c != col:
                acc -= v * x[c]
        x[col] = acc / row[col]
    return x


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Dense convenience wrapper; entries are converted to Fraction."""
    size = len(matrix)
    rows = [{c: Fraction(v) for c, v in enumerate(row) if v} for row in matrix]
    return solve_sparse(rows, [Fraction(b) for b in rhs], size)
