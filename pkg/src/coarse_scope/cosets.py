"""The quotient space G/H for the fibre H = Z^n.

A left coset gH is named by the syllables of g's normal form (the tail is
dropped). Its canonical representative is the tail-zero element. The
quotient metric is the path metric of the rough Cayley graph; Hausdorff
distances between cosets are only bounded from below.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .cayley import ExceedsCap, Snapshot, default_budget, default_threads, distance, layered_bfs
from .errors import BudgetExceeded
from .presentation import FibredPresentation, GroupElement, Syllables, matrix_A


class CosetKey:
    """Canonical name of a left coset gH."""

    __slots__ = ("group", "syllables")

    def __init__(self, group: FibredPresentation, syllables: Syllables):
        self.group = group
        self.syllables = syllables

    def __eq__(self, other):
        return isinstance(other, CosetKey) and self.group is other.group and self.syllables == other.syllables

    def __hash__(self):
        return hash(self.syllables)

    def __lt__(self, other: CosetKey):
        return self.syllables < other.syllables

    def rep(self) -> GroupElement:
        return GroupElement(self.group, self.syllables, self.group.zero)

    def depth(self) -> int:
        return len(self.syllables)

    def label(self) -> str:
        return coset_label(self.group, self.syllables)

    def __repr__(self):
        return f"<{self.label()}>"

    def to_json(self) -> dict:
        return {"label": self.label(), "syllables": [[self.group.letters[i].name, e, list(r)] for i, e, r in self.syllables]}


def coset_label(group: FibredPresentation, syllables: Syllables) -> str:
    if not syllables:
        return "H"
    return GroupElement(group, syllables, group.zero).word() + " H"


def coset_key(g: GroupElement) -> CosetKey:
    return CosetKey(g.group, g.syllables)


def base_key(group: FibredPresentation) -> CosetKey:
    return CosetKey(group, ())


def _transversals(group: FibredPresentation) -> list[tuple[list, list]]:
    cached = getattr(group, "_transversal_cache", None)
    if cached is None:
        cached = [
            ([tuple(r) for r in L.image.transversal()], [tuple(r) for r in L.source.transversal()])
            for L in group.letters
        ]
        group._transversal_cache = cached
    return cached


def _neighbor_items(group: FibredPresentation, syl: Syllables) -> list[tuple[Syllables, int, int, tuple]]:
    """Cosets r t_i^eps applied to ``syl`` for r in the transversal of C_i (eps = 1)
    or B_i (eps = -1).

    Transversal vectors are already reduced, so appending ``(i, eps, r)`` is the
    normal form unless r = 0 follows ``(i, -eps)``, which pinches back to the parent.
    """
    out = []
    last = syl[-1] if syl else None
    for i, (trans_c, trans_b) in enumerate(_transversals(group)):
        for eps, trans in ((1, trans_c), (-1, trans_b)):
            pinch = last is not None and last[0] == i and last[1] == -eps
            for r in trans:
                if pinch and not any(r):
                    out.append((syl[:-1], i, eps, r))
                else:
                    out.append((syl + ((i, eps, r),), i, eps, r))
    return out


def quotient_neighbors(key: CosetKey) -> list[tuple[CosetKey, str]]:
    """Neighbors of a coset in the rough Cayley graph, labelled by r t_i^±1."""
    group = key.group
    out = []
    for nsyl, i, eps, r in _neighbor_items(group, key.syllables):
        name = group.letters[i].name
        word = GroupElement(group, (), r).word()
        letter = name if eps == 1 else f"{name}^-1"
        out.append((CosetKey(group, nsyl), letter if word == "1" else f"{word} {letter}"))
    return out


def quotient_ball(group: FibredPresentation, R: int, budget: int | None = None, threads: int | None = None) -> Snapshot:
    """Ball of radius R about H in the rough Cayley graph (exact distances)."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    budget = default_budget() if budget is None else budget
    threads = default_threads() if threads is None else threads
    items = _neighbor_items
    keys, dist, edges = layered_bfs(
        (), lambda syl: [n[0] for n in items(group, syl)], R, budget, threads, "quotient ball"
    )
    return Snapshot(
        "quotient", keys, dist, edges, R, [d < R for d in dist], group, lambda k: coset_label(group, k)
    )


class CosetDistanceOracle:
    """Lazily grown BFS ball from the identity recording, for every coset,
    the smallest word length of one of its elements.

    ``d(x, gH) = query(coset_key(x^-1 g))`` by left invariance.
    """

    def __init__(self, group: FibredPresentation, cap: int, budget: int | None = None):
        self.group = group
        self.cap = cap
        self.budget = default_budget() if budget is None else budget
        start = ((), group.zero)
        self._seen = {start}
        self._frontier = [start]
        self._level = 0
        self.best: dict[Syllables, int] = {(): 0}
        gens = [(k, p) for _, k, p in group.generators()]
        nb = group.neighbor_raw
        self._nbrs = lambda key: [nb(key, k, p) for k, p in gens]

    def _grow(self) -> bool:
        if self._level >= self.cap or not self._frontier:
            return False
        nxt = []
        lvl = self._level + 1
        for u in self._frontier:
            for w in self._nbrs(u):
                if w not in self._seen:
                    self._seen.add(w)
                    nxt.append(w)
                    self.best.setdefault(w[0], lvl)
        if len(self._seen) > self.budget:
            raise BudgetExceeded("coset distance search", self.budget)
        self._frontier = nxt
        self._level = lvl
        return True

    def query(self, syllables: Syllables):
        while syllables not in self.best:
            if not self._grow():
                return ExceedsCap
        return self.best[syllables]

    def point_to_coset(self, x: GroupElement, key: CosetKey):
        g = self.group
        return self.query(g.rmul_raw(g.invert_raw(x.key), (key.syllables, g.zero))[0])


@dataclass
class HausdorffBound:
    """Lower bounds on d_Haus(H, gH) from a finite sample of each coset.

    ``None`` in a numeric field means Unknown (a point found no member of the
    other coset within the search cap).
    """

    to_coset: int | None  # sup over h in H with |h| <= R of d(h, gH)
    from_coset: int | None  # sup over x in g(H ∩ B_R) of d(x, H)
    value: int | None
    stabilized_at: int | None
    per_radius: list[int | None] = field(default_factory=list)
    unknown: bool = False

    def to_json(self) -> dict:
        return {
            "to_coset": self.to_coset,
            "from_coset": self.from_coset,
            "value": self.value,
            "stabilized_at": self.stabilized_at,
            "per_radius": self.per_radius,
            "unknown": self.unknown,
        }


def fibre_ball(group: FibredPresentation, R: int, budget: int | None = None) -> list[tuple[GroupElement, int]]:
    """Elements of H with word length <= R, with their lengths."""
    from .cayley import ball

    snap = ball(group, R, budget, edges=False)
    return [(group.wrap(k), d) for k, d in zip(snap.keys, snap.dist) if not k[0]]


def coset_hausdorff_lb(key: CosetKey, sample_R: int, search_cap: int, budget: int | None = None) -> HausdorffBound:
    """Sampled lower bounds on the Hausdorff distance between H and gH."""
    if sample_R > search_cap:
        raise ValueError("sample_R must not exceed search_cap")
    group = key.group
    oracle = CosetDistanceOracle(group, search_cap, budget)
    g = key.rep()
    g_inv_key = CosetKey(group, g.inverse().syllables)
    to_r = [0] * (sample_R + 1)
    from_r = [0] * (sample_R + 1)
    unk_to = [False] * (sample_R + 1)
    unk_from = [False] * (sample_R + 1)
    for h, d in fibre_ball(group, sample_R, budget):
        a = oracle.point_to_coset(h, key)
        # d(g h, H) = d(h, g^-1 H)
        b = oracle.point_to_coset(h, g_inv_key)
        if a is ExceedsCap:
            unk_to[d] = True
        else:
            to_r[d] = max(to_r[d], a)
        if b is ExceedsCap:
            unk_from[d] = True
        else:
            from_r[d] = max(from_r[d], b)
    per_radius: list[int | None] = []
    run_to = run_from = 0
    unk = False
    for r in range(sample_R + 1):
        run_to = max(run_to, to_r[r])
        run_from = max(run_from, from_r[r])
        unk = unk or unk_to[r] or unk_from[r]
        per_radius.append(None if unk else max(run_to, run_from))
    stab = None
    if not unk:
        stab = sample_R
        while stab > 0 and per_radius[stab - 1] == per_radius[sample_R]:
            stab -= 1
    return HausdorffBound(
        None if any(unk_to) else run_to,
        None if any(unk_from) else run_from,
        per_radius[-1],
        stab,
        per_radius,
        unk,
    )


def projection_approx(key: CosetKey, v) -> GroupElement:
    """g . floor(A_g v) for the tail-zero representative g of the coset."""
    g = key.rep()
    A = matrix_A(g)
    return GroupElement(key.group, key.syllables, A.apply_floor(v))


def l1_sphere_points(n: int, radius: int) -> Iterator[tuple[int, ...]]:
    """All integer points of Z^n with l1 norm at most ``radius``, sorted."""
    for v in itertools.product(range(-radius, radius + 1), repeat=n):
        if sum(abs(x) for x in v) <= radius:
            yield v


@dataclass
class ProjectionQuality:
    gap: int | None  # None: Unknown
    worst_point: tuple[int, ...] | None
    points: int
    unknown_points: int

    def to_json(self) -> dict:
        return {
            "gap": self.gap,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
            "points": self.points,
            "unknown_points": self.unknown_points,
        }


def projection_quality(key: CosetKey, range_: int, cap: int, budget: int | None = None) -> ProjectionQuality:
    """Max over |v|_1 <= range of d(v, g floor(A_g v)) - d(v, gH)."""
    group = key.group
    oracle = CosetDistanceOracle(group, cap, budget)
    worst = None
    gap = 0
    unknown = 0
    count = 0
    for v in l1_sphere_points(group.rank, range_):
        count += 1
        x = group.vector(v)
        p = projection_approx(key, v)
        near = oracle.point_to_coset(x, key)
        dp = distance(x, p, cap, budget)
        if near is ExceedsCap or dp is ExceedsCap:
            unknown += 1
            continue
        if worst is None or dp - near > gap:
            gap, worst = max(gap, dp - near), v
    return ProjectionQuality(None if unknown else gap, worst, count, unknown)

