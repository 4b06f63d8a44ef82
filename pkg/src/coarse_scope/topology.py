"""Rips complexes over GF(2), ends at scale, and the fibre/base probes."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from . import gf2
from .cayley import Snapshot, ball, default_budget
from .cosets import CosetKey, _neighbor_items, coset_key, quotient_ball
from .errors import BudgetExceeded
from .presentation import FibredPresentation, GroupElement

DEFAULT_TRIANGLE_BUDGET = 2_000_000


def _scale_neighbors(snap: Snapshot, r: int) -> list[set[int]]:
    """For each vertex, the other snapshot vertices within distance r.

    Group snapshots use the word metric of the whole group, quotient
    snapshots the metric of the whole rough Cayley graph, abstract ones
    their own path metric.
    """
    n = len(snap)
    out: list[set[int]] = [set() for _ in range(n)]
    if r <= 0 or n == 0:
        return out
    if snap.kind == "group":
        group = snap.group
        offsets = [k for k in ball(group, r, edges=False).keys if k != ((), group.zero)]
        rmul = group.rmul_raw
        for a, key in enumerate(snap.keys):
            for w in offsets:
                b = snap.index.get(rmul(key, w))
                if b is not None:
                    out[a].add(b)
        return out
    if snap.kind == "quotient":
        group = snap.group

        def step(syl):
            return [x[0] for x in _neighbor_items(group, syl)]
    else:
        adj = snap.adjacency()

        def step(v):
            return adj[v]

    for a, key in enumerate(snap.keys):
        seen = {key}
        frontier = [key]
        for _ in range(r):
            nxt = []
            for u in frontier:
                for w in step(u):
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        for w in seen:
            b = snap.index.get(w)
            if b is not None and b != a:
                out[a].add(b)
    return out


@dataclass
class RipsComplex2:
    base: Snapshot
    scale: int
    edges: list[tuple[int, int]]
    triangles: list[tuple[int, int, int]]
    excluded_unknown: int = 0
    edge_index: dict[tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self):
        self.edge_index = {e: i for i, e in enumerate(self.edges)}

    @property
    def n_vertices(self) -> int:
        return len(self.base)

    def boundary1(self) -> list[int]:
        return [(1 << a) | (1 << b) for a, b in self.edges]

    def boundary2(self) -> list[int]:
        ei = self.edge_index
        return [(1 << ei[(a, b)]) | (1 << ei[(a, c)]) | (1 << ei[(b, c)]) for a, b, c in self.triangles]

    def sparse_triplets(self, dim: int) -> str:
        """Boundary matrix as text: header ``rows cols nnz``, then ``row col`` lines."""
        if dim == 1:
            rows, cols = self.n_vertices, self.boundary1()
        elif dim == 2:
            rows, cols = len(self.edges), self.boundary2()
        else:
            raise ValueError("dim must be 1 or 2")
        entries = [(r, c) for c, col in enumerate(cols) for r in gf2.bits(col)]
        entries.sort()
        lines = [f"{rows} {len(cols)} {len(entries)}"] + [f"{r} {c}" for r, c in entries]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "scale": self.scale,
            "vertices": self.n_vertices,
            "edges": len(self.edges),
            "triangles": len(self.triangles),
            "excluded_unknown": self.excluded_unknown,
        }


def rips(snap: Snapshot, r: int, triangle_budget: int = DEFAULT_TRIANGLE_BUDGET) -> RipsComplex2:
    """2-skeleton of the Rips complex of the snapshot at scale r."""
    if r < 0:
        raise ValueError("scale must be nonnegative")
    nbrs = _scale_neighbors(snap, r)
    edges = sorted((a, b) for a in range(len(snap)) for b in nbrs[a] if a < b)
    triangles = []
    for a, b in edges:
        for c in sorted(nbrs[a] & nbrs[b]):
            if c > b:
                triangles.append((a, b, c))
                if len(triangles) > triangle_budget:
                    raise BudgetExceeded("Rips triangle count", triangle_budget)
    return RipsComplex2(snap, r, edges, triangles)


def betti_z2(cx: RipsComplex2) -> tuple[int, int]:
    r1 = gf2.rank(cx.boundary1())
    r2 = gf2.rank(cx.boundary2())
    return cx.n_vertices - r1, len(cx.edges) - r1 - r2


def cycle_basis(cx: RipsComplex2) -> list[list[tuple[int, int]]]:
    """Fundamental cycles of the 1-skeleton w.r.t. a BFS spanning forest."""
    n = cx.n_vertices
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in cx.edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = [-1] * n
    depth = [-1] * n
    tree = set()
    for s in range(n):
        if depth[s] >= 0:
            continue
        depth[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if depth[w] < 0:
                    depth[w] = depth[u] + 1
                    parent[w] = u
                    tree.add((min(u, w), max(u, w)))
                    q.append(w)

    def path_up(u, v):
        left, right = [], []
        while u != v:
            if depth[u] >= depth[v]:
                left.append((min(u, parent[u]), max(u, parent[u])))
                u = parent[u]
            else:
                right.append((min(v, parent[v]), max(v, parent[v])))
                v = parent[v]
        return left + right[::-1]

    cycles = []
    for a, b in cx.edges:
        if (a, b) not in tree:
            cycles.append([(a, b)] + path_up(a, b))
    return cycles


@dataclass
class AcyclicityResult:
    holds: bool
    cycles_checked: int
    witness: list[tuple[str, str]] | None = None

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "cycles_checked": self.cycles_checked,
            "witness": [list(e) for e in self.witness] if self.witness else None,
        }


def relative_acyclicity(inner: tuple[Snapshot, int], outer: tuple[Snapshot, int]) -> AcyclicityResult:
    """Does every 1-cycle of rips(inner) bound in rips(outer)?"""
    snap_in, r = inner
    snap_out, r_out = outer
    if r > r_out:
        raise ValueError("inner scale must not exceed outer scale")
    cx_in = rips(snap_in, r)
    cx_out = cx_in if (snap_out is snap_in and r_out == r) else rips(snap_out, r_out)
    vmap = []
    for k in snap_in.keys:
        j = snap_out.index.get(k)
        if j is None:
            raise ValueError("inner snapshot is not contained in the outer one")
        vmap.append(j)
    fill = gf2.ColumnBasis()
    for col in cx_out.boundary2():
        fill.add(col)
    cycles = cycle_basis(cx_in)
    for cyc in cycles:
        col = 0
        for a, b in cyc:
            x, y = sorted((vmap[a], vmap[b]))
            col ^= 1 << cx_out.edge_index[(x, y)]
        if not fill.contains(col):
            witness = [(snap_in.label(a), snap_in.label(b)) for a, b in cyc]
            return AcyclicityResult(False, len(cycles), witness)
    return AcyclicityResult(True, len(cycles))


# ---------------------------------------------------------------------------
# Ends


@dataclass
class Component:
    size: int
    deep: bool
    representative: str


@dataclass
class ComponentReport:
    """Components of the snapshot with the open r-ball about the basepoint
    removed; deep ones reach the outer sphere."""

    r: int
    radius: int
    components: list[Component]

    @property
    def deep_count(self) -> int:
        return sum(c.deep for c in self.components)

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "radius": self.radius,
            "components": len(self.components),
            "deep": self.deep_count,
            "sizes": [c.size for c in self.components],
            "deep_flags": [c.deep for c in self.components],
            "representatives": [c.representative for c in self.components],
            "hopf": hopf_class(self.deep_count),
        }


def hopf_class(deep: int) -> str:
    return "inf" if deep >= 3 else str(deep)


def _components(snap: Snapshot, keep: list[bool], with_members: bool = False) -> list:
    adj = snap.adjacency()
    seen = [False] * len(snap)
    comps = []
    for s in range(len(snap)):
        if not keep[s] or seen[s]:
            continue
        seen[s] = True
        stack = [s]
        members = []
        while stack:
            u = stack.pop()
            members.append(u)
            for w in adj[u]:
                if keep[w] and not seen[w]:
                    seen[w] = True
                    stack.append(w)
        deep = any(snap.dist[u] == snap.radius for u in members)
        comp = Component(len(members), deep, snap.label(min(members)))
        comps.append((comp, members) if with_members else comp)
    return comps


def ends_at_scale(snap: Snapshot, r: int) -> ComponentReport:
    """Components of {v : dist(v) >= r}."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    keep = [d >= r for d in snap.dist]
    return ComponentReport(r, snap.radius, _components(snap, keep))


def ends_table(snap: Snapshot, r_max: int | None = None) -> list[ComponentReport]:
    top = snap.radius - 1 if r_max is None else r_max
    return [ends_at_scale(snap, r) for r in range(0, top + 1)]


@dataclass
class CCCResult:
    total_deep: int
    quotient_deep: int
    total_components: int
    quotient_components: int
    total_touching_sphere: int  # naive count: components meeting the outer group sphere

    @property
    def match(self) -> bool:
        return self.total_deep == self.quotient_deep

    def to_json(self) -> dict:
        return {
            "total_deep": self.total_deep,
            "quotient_deep": self.quotient_deep,
            "total_components": self.total_components,
            "quotient_components": self.quotient_components,
            "total_touching_sphere": self.total_touching_sphere,
            "match": self.match,
        }


def ccc_correspondence(
    group: FibredPresentation, R_total: int, A: int, R_quotient: int, budget: int | None = None
) -> CCCResult:
    """Compare complementary components of H in G and of the base coset in G/H.

    Total side: ball(R_total) minus the open A-neighbourhood {x : d(x, H) < A}
    of H; a component is deep when it reaches a coset at quotient distance
    >= R_quotient. Fibre fragments that meet the outer group sphere only
    because H itself is distorted never leave the first few quotient levels,
    so they are not counted. Quotient side: quotient_ball(R_quotient) minus
    the open A-ball, deep meaning it meets the outer sphere.
    """
    if R_quotient > R_total:
        raise ValueError("R_quotient must not exceed R_total")
    budget = default_budget() if budget is None else budget
    snap = ball(group, R_total, budget)
    removed = [False] * len(snap)
    if A > 0:
        offsets = ball(group, A - 1, budget, edges=False).keys
        rmul = group.rmul_raw
        for key in snap.keys:
            if key[0]:
                continue
            for w in offsets:
                j = snap.index.get(rmul(key, w))
                if j is not None:
                    removed[j] = True
    total = _components(snap, [not x for x in removed], with_members=True)
    deep = sum(1 for c, mem in total if any(len(snap.keys[u][0]) >= R_quotient for u in mem))
    qsnap = quotient_ball(group, R_quotient, budget)
    quot = ends_at_scale(qsnap, A).components
    return CCCResult(deep, sum(c.deep for c in quot), len(total), len(quot), sum(c.deep for c, _ in total))


def quotient_distance(a: CosetKey, b: CosetKey) -> int:
    """Distance in the rough Cayley graph, which is the Bass-Serre tree:
    a coset's parent is obtained by dropping its last syllable."""
    x, y = a.syllables, b.syllables
    k = 0
    while k < min(len(x), len(y)) and x[k] == y[k]:
        k += 1
    return len(x) + len(y) - 2 * k


@dataclass
class SimplicialImage:
    raw: list[tuple[CosetKey, ...]]  # vertexwise images, repeats kept
    simplices: list[tuple[CosetKey, ...]]  # repeats collapsed, order kept
    scale: int

    def to_json(self) -> dict:
        return {
            "scale": self.scale,
            "raw": [[k.label() for k in s] for s in self.raw],
            "simplices": [[k.label() for k in s] for s in self.simplices],
        }


def quotient_simplicial_image(simplices: Sequence[Sequence[GroupElement]]) -> SimplicialImage:
    """Push simplices of P_r(G) to G/H vertex by vertex; repeated cosets collapse."""
    raw, out = [], []
    scale = 0
    for simplex in simplices:
        keys = tuple(coset_key(g) for g in simplex)
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                scale = max(scale, quotient_distance(keys[i], keys[j]))
        raw.append(keys)
        out.append(tuple(dict.fromkeys(keys)))
    return SimplicialImage(raw, out, scale)


def tree_certificate(snap: Snapshot) -> dict:
    """beta_1 at scale 1 and the set of interior degrees of a quotient ball."""
    cx = rips(snap, 1)
    b0, b1 = betti_z2(cx)
    deg = [0] * len(snap)
    for a, b in snap.edges:
        deg[a] += 1
        deg[b] += 1
    interior = sorted({deg[i] for i in range(len(snap)) if snap.complete[i]})
    return {
        "beta0": b0,
        "beta1": b1,
        "interior_degrees": interior,
        "regular": len(interior) == 1,
        "tree": b1 == 0 and b0 == 1,
    }

