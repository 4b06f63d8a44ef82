"""Exact rational matrices and Hermite-normal-form lattice bases.

Vectors are plain tuples of ``int`` (lattice points) or ``Fraction``.
Matrices act on column vectors.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatch, SingularMatrix

Vector = tuple[int, ...]


class RationalMatrix:
    """Immutable square matrix with ``Fraction`` entries."""

    __slots__ = ("n", "rows", "_num", "_den", "_hash")

    def __init__(self, rows: Iterable[Iterable], den: int = 1):
        if den <= 0:
            raise DimensionMismatch(f"denominator must be positive, got {den}")
        rows = tuple(tuple(Fraction(x) / den for x in r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch("matrix must be square and non-empty")
        self.n = n
        self.rows = rows
        d = reduce(lcm, (x.denominator for r in rows for x in r), 1)
        self._den = d
        self._num = tuple(tuple(int(x * d) for x in r) for r in rows)
        self._hash = hash(rows)

    @classmethod
    def identity(cls, n: int) -> RationalMatrix:
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def scalar(cls, n: int, c) -> RationalMatrix:
        return cls([[c if i == j else 0 for j in range(n)] for i in range(n)])

    # -- integer view used by the hot paths
    @property
    def numerator(self) -> tuple[tuple[int, ...], ...]:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    def __eq__(self, other):
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"RationalMatrix([{body}])"

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: RationalMatrix) -> RationalMatrix:
        if other.n != self.n:
            raise DimensionMismatch("matrix sizes differ")
        cols = list(zip(*other.rows))
        return RationalMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows])

    def apply(self, v: Sequence) -> tuple[Fraction, ...]:
        return tuple(sum(a * x for a, x in zip(r, v)) for r in self.rows)

    def apply_int(self, v: Sequence[int]) -> Vector:
        """Image of an integer vector that is known to land in Z^n."""
        d = self._den
        out = []
        for r in self._num:
            s = sum(a * x for a, x in zip(r, v))
            q, rem = divmod(s, d)
            if rem:
                raise ValueError(f"{tuple(v)} does not map into Z^{self.n}")
            out.append(q)
        return tuple(out)

    def apply_floor(self, v: Sequence[int]) -> Vector:
        d = self._den
        return tuple(sum(a * x for a, x in zip(r, v)) // d for r in self._num)

    def transpose(self) -> RationalMatrix:
        return RationalMatrix(zip(*self.rows))

    def det(self) -> Fraction:
        a = [list(r) for r in self.rows]
        n = self.n
        det = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                det = -det
            det *= a[c][c]
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return det

    def inverse(self) -> RationalMatrix:
        n = self.n
        a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                raise SingularMatrix(f"{self!r} is singular")
            a[c], a[p] = a[p], a[c]
            piv = a[c][c]
            a[c] = [x / piv for x in a[c]]
            for r in range(n):
                if r != c and a[r][c]:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return RationalMatrix([r[n:] for r in a])

    def norm1(self) -> Fraction:
        """Operator norm induced by l1: maximum absolute column sum."""
        return max(sum(abs(r[j]) for r in self.rows) for j in range(self.n))

    def is_identity(self) -> bool:
        return all(x == (i == j) for i, r in enumerate(self.rows) for j, x in enumerate(r))

    def to_json(self) -> dict:
        return {
            "num": [list(r) for r in self._num],
            "den": self._den,
            "entries": [[str(x) for x in r] for r in self.rows],
        }


# ---------------------------------------------------------------------------
# Hermite normal form


def hnf_rows(generators: Iterable[Sequence[int]], n: int) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``generators``.

    Result is upper triangular with positive pivots and every entry above a
    pivot reduced into ``[0, pivot)``. Generators must span a rank-n lattice.
    """
    rows = [list(g) for g in generators if any(g)]
    if any(len(r) != n for r in rows):
        raise DimensionMismatch(f"generator length differs from {n}")
    out: list[list[int]] = []
    for col in range(n):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            p = active[0]
            nxt = [p]
            for r in active[1:]:
                q = r[col] // p[col]
                r = [x - q * y for x, y in zip(r, p)]
                (nxt if r[col] else rest).append(r)
            active = nxt
        if not active:
            raise SingularMatrix("generators do not span a full-rank lattice")
        p = active[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        rows = [r for r in rest if any(r)]
    for i in range(n):
        piv = out[i][i]
        for k in range(i):
            q = out[k][i] // piv
            if q:
                out[k] = [x - q * y for x, y in zip(out[k], out[i])]
    return out


class LatticeBasis:
    """Full-rank sublattice of Z^n held in Hermite normal form."""

    __slots__ = ("n", "basis", "index", "_pivots")

    def __init__(self, generators: Iterable[Sequence[int]], n: int):
        self.n = n
        self.basis: tuple[Vector, ...] = tuple(tuple(r) for r in hnf_rows(generators, n))
        self._pivots = tuple(self.basis[i][i] for i in range(n))
        self.index = 1
        for p in self._pivots:
            self.index *= p

    @classmethod
    def full(cls, n: int) -> LatticeBasis:
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    def __eq__(self, other):
        return isinstance(other, LatticeBasis) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return f"LatticeBasis({[list(r) for r in self.basis]}, index={self.index})"

    def split(self, v: Sequence[int]) -> tuple[Vector, Vector]:
        """Return ``(lattice part, transversal residue)`` with v = part + residue."""
        r = list(v)
        for i, row in enumerate(self.basis):
            q = r[i] // row[i]
            if q:
                for j in range(i, self.n):
                    r[j] -= q * row[j]
        res = tuple(r)
        return tuple(a - b for a, b in zip(v, res)), res

    def reduce(self, v: Sequence[int]) -> Vector:
        return self.split(v)[1]

    def __contains__(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def transversal(self) -> Iterator[Vector]:
        """Canonical coset representatives, in lexicographic order."""
        # reduced vectors are exactly those with 0 <= v[i] < pivot[i]
        return itertools.product(*(range(p) for p in self._pivots))

    def to_json(self) -> dict:
        return {"basis": [list(r) for r in self.basis], "index": self.index}


def integral_preimage(maps: Sequence[RationalMatrix], n: int) -> LatticeBasis:
    """The lattice {v in Z^n : M v in Z^n for every M in maps}.

    Computed through the dual lattice, which is spanned by Z^n together with
    the rows of every map; scaling by a common denominator makes that integral.
    """
    rows: list[Sequence[Fraction]] = [r for m in maps for r in m.rows]
    d = reduce(lcm, (x.denominator for r in rows for x in r), 1)
    gens = [[d * int(i == j) for j in range(n)] for i in range(n)]
    gens += [[int(x * d) for x in r] for r in rows]
    dual = RationalMatrix(hnf_rows(gens, n))  # basis of d * dual, as rows
    primal = dual.inverse()  # columns of d * dual^{-1} span the lattice (scaled by 1/d)
    cols = [[primal.rows[i][j] * d for i in range(n)] for j in range(n)]
    ints = []
    for c in cols:
        if any(x.denominator != 1 for x in c):
            raise ArithmeticError("dual inversion produced a non-integral basis")
        ints.append([int(x) for x in c])
    return LatticeBasis(ints, n)


def image_lattice(m: RationalMatrix, lat: LatticeBasis) -> LatticeBasis:
    """M(L) for a lattice L whose image is integral."""
    return LatticeBasis([m.apply_int(b) for b in lat.basis], lat.n)

