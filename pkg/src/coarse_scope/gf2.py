"""Sparse linear algebra over GF(2) with columns stored as int bitsets."""

from __future__ import annotations

from typing import Iterable


class ColumnBasis:
    """Incrementally reduced column space, keyed by lowest set bit."""

    def __init__(self):
        self.pivots: dict[int, int] = {}

    def reduce(self, col: int) -> int:
        piv = self.pivots
        while col:
            low = col & -col
            p = piv.get(low)
            if p is None:
                return col
            col ^= p
        return 0

    def add(self, col: int) -> bool:
        """Insert a column; True if it was independent."""
        col = self.reduce(col)
        if not col:
            return False
        self.pivots[col & -col] = col
        return True

    def __len__(self):
        return len(self.pivots)

    def contains(self, col: int) -> bool:
        return self.reduce(col) == 0


def rank(columns: Iterable[int]) -> int:
    basis = ColumnBasis()
    for c in columns:
        basis.add(c)
    return len(basis)


def dense_rank(rows: list[list[int]]) -> int:
    """Plain row-echelon rank of a 0/1 matrix; used as an independent check."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] & 1), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] & 1:
                m[i] = [(a ^ b) & 1 for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def bits(col: int) -> list[int]:
    out = []
    while col:
        low = col & -col
        out.append(low.bit_length() - 1)
        col ^= low
    return out
