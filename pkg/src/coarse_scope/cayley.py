"""Word-metric geometry: balls, distances, growth and t-chains.

The generating set is fixed to ``{±e_1..±e_n} ∪ {t_i^±1}``.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

from .errors import BudgetExceeded
from .presentation import FibredPresentation, GroupElement, RawKey

DEFAULT_BUDGET = 5_000_000


class _ExceedsCap:
    """Marker returned when a distance is larger than the search cap."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "ExceedsCap"

    def __bool__(self):
        return False


ExceedsCap = _ExceedsCap()


def default_budget() -> int:
    env = os.environ.get("COARSE_SCOPE_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def default_threads() -> int:
    env = os.environ.get("COARSE_SCOPE_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class Snapshot:
    """A finite metric graph with distances from a basepoint (index 0).

    ``kind`` is ``"group"`` (keys are raw normal forms), ``"quotient"``
    (keys are syllable tuples naming cosets) or ``"abstract"``.
    """

    kind: str
    keys: list[Hashable]
    dist: list[int]
    edges: list[tuple[int, int]]
    radius: int
    complete: list[bool]
    group: FibredPresentation | None = None
    labeler: Callable[[Hashable], str] | None = None
    index: dict[Hashable, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {k: i for i, k in enumerate(self.keys)}

    def __len__(self):
        return len(self.keys)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.keys]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for d in self.dist:
            sizes[d] += 1
        return sizes

    def label(self, i: int) -> str:
        k = self.keys[i]
        return self.labeler(k) if self.labeler else str(k)

    def elements(self) -> list[GroupElement]:
        assert self.kind == "group"
        return [self.group.wrap(k) for k in self.keys]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "radius": self.radius,
            "vertices": [self.label(i) for i in range(len(self))],
            "dist": list(self.dist),
            "edges": [list(e) for e in self.edges],
        }

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        for i in range(len(self)):
            lab = self.label(i).replace('"', '\\"')
            lines.append(f'  {i} [label="{lab}", dist={self.dist[i]}];')
        for a, b in self.edges:
            lines.append(f"  {a} -- {b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def abstract(cls, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None) -> Snapshot:
        """Graph snapshot with its own path metric; basepoint is vertex 0."""
        edges = sorted({(min(a, b), max(a, b)) for a, b in edges if a != b})
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        dist = _bfs_dist(adj, 0)
        radius = max((d for d in dist if d >= 0), default=0)
        labs = list(labels) if labels else [str(i) for i in range(n)]
        snap = cls("abstract", list(range(n)), dist, edges, radius, [True] * n, labeler=lambda k: labs[k])
        return snap


def _bfs_dist(adj: list[list[int]], src: int) -> list[int]:
    dist = [-1] * len(adj)
    if not adj:
        return dist
    dist[src] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def word_labeler(group: FibredPresentation) -> Callable[[RawKey], str]:
    return lambda k: group.wrap(k).word()


def layered_bfs(
    start: Hashable,
    neighbors: Callable[[Hashable], list[Hashable]],
    radius: int,
    budget: int,
    threads: int = 1,
    what: str = "ball",
    want_edges: bool = True,
) -> tuple[list[Hashable], list[int], list[tuple[int, int]]]:
    """Breadth-first ball around ``start`` with deterministic output.

    Frontier expansion may be split across threads; results are merged in
    frontier order, and the final vertex list is sorted by (distance, key).
    """
    dist = {start: 0}
    frontier = [start]
    nbrs: dict[Hashable, list[Hashable]] = {}
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for r in range(radius + 1):
            if r == radius and not want_edges:
                break
            expanded = _expand(frontier, neighbors, pool, threads)
            nxt = []
            for u, ns in zip(frontier, expanded):
                if want_edges:
                    nbrs[u] = ns
                if r == radius:
                    continue
                for w in ns:
                    if w not in dist:
                        dist[w] = r + 1
                        nxt.append(w)
            if len(dist) > budget:
                raise BudgetExceeded(f"{what} vertex count", budget)
            frontier = nxt
            if not frontier:
                break
    finally:
        if pool:
            pool.shutdown()
    keys = sorted(dist, key=lambda k: (dist[k], k))
    index = {k: i for i, k in enumerate(keys)}
    edges: list[tuple[int, int]] = []
    if want_edges:
        seen = set()
        for k in keys:
            a = index[k]
            for w in nbrs[k]:
                b = index.get(w)
                if b is None or b == a:
                    continue
                e = (a, b) if a < b else (b, a)
                if e not in seen:
                    seen.add(e)
                    edges.append(e)
        edges.sort()
    return keys, [dist[k] for k in keys], edges


def _expand(frontier, neighbors, pool, threads):
    if pool is None or len(frontier) < 256:
        return [neighbors(u) for u in frontier]
    size = -(-len(frontier) // threads)
    chunks = [frontier[i:i + size] for i in range(0, len(frontier), size)]
    out = []
    for part in pool.map(lambda ch: [neighbors(u) for u in ch], chunks):
        out.extend(part)
    return out


def _group_neighbor_fn(group: FibredPresentation) -> Callable[[RawKey], list[RawKey]]:
    gens = [(kind, payload) for _, kind, payload in group.generators()]
    nb = group.neighbor_raw
    return lambda key: [nb(key, kind, payload) for kind, payload in gens]


def ball(
    group: FibredPresentation,
    R: int,
    budget: int | None = None,
    threads: int | None = None,
    edges: bool = True,
) -> Snapshot:
    """Ball of radius R about the identity in the Cayley graph."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    budget = default_budget() if budget is None else budget
    threads = default_threads() if threads is None else threads
    keys, dist, edge_list = layered_bfs(
        ((), group.zero), _group_neighbor_fn(group), R, budget, threads, "ball", edges
    )
    return Snapshot("group", keys, dist, edge_list, R, [d < R for d in dist], group, word_labeler(group))


def growth(group: FibredPresentation, R: int, budget: int | None = None, threads: int | None = None) -> list[int]:
    """Sphere sizes |S(0)|, ..., |S(R)|."""
    return ball(group, R, budget, threads, edges=False).sphere_sizes()


def _bidirectional(group: FibredPresentation, target: RawKey, cap: int, budget: int) -> list[RawKey] | None:
    """Geodesic identity -> target as a list of keys, or None if longer than cap."""
    start = ((), group.zero)
    if target == start:
        return [start]
    nbrs = _group_neighbor_fn(group)
    parent = [{start: None}, {target: None}]
    depth = [{start: 0}, {target: 0}]
    front = [[start], [target]]
    level = [0, 0]
    while level[0] + level[1] < cap:
        side = 0 if len(front[0]) <= len(front[1]) else 1
        other = 1 - side
        nxt = []
        best = None
        for u in front[side]:
            for w in nbrs(u):
                if w in depth[side]:
                    continue
                depth[side][w] = level[side] + 1
                parent[side][w] = u
                nxt.append(w)
                if w in depth[other]:
                    tot = level[side] + 1 + depth[other][w]
                    if best is None or tot < best[0]:
                        best = (tot, w)
        level[side] += 1
        front[side] = nxt
        if len(depth[0]) + len(depth[1]) > budget:
            raise BudgetExceeded("distance search vertex count", budget)
        if best is not None:
            if best[0] > cap:
                return None
            mid = best[1]
            path = []
            u = mid
            while u is not None:
                path.append(u)
                u = parent[0][u]
            path.reverse()
            u = parent[1][mid]
            while u is not None:
                path.append(u)
                u = parent[1][u]
            return path
        if not nxt:
            return None
    return None


def distance(g: GroupElement, h: GroupElement, cap: int, budget: int | None = None):
    """Exact word distance d(g, h) if it is at most ``cap``, else ``ExceedsCap``."""
    group = g.group
    budget = default_budget() if budget is None else budget
    path = _bidirectional(group, group.rmul_raw(group.invert_raw(g.key), h.key), cap, budget)
    return ExceedsCap if path is None else len(path) - 1


def geodesic(g: GroupElement, h: GroupElement, cap: int, budget: int | None = None) -> list[GroupElement] | None:
    """A discrete geodesic from g to h, or None beyond ``cap``."""
    group = g.group
    budget = default_budget() if budget is None else budget
    path = _bidirectional(group, group.rmul_raw(group.invert_raw(g.key), h.key), cap, budget)
    if path is None:
        return None
    return [group.wrap(group.rmul_raw(g.key, k)) for k in path]


def t_chain(g: GroupElement, h: GroupElement, t_step: int, cap: int, budget: int | None = None) -> list[GroupElement] | None:
    """Chain g = x_0, ..., x_m = h with d(x_{j-1}, x_j) <= t_step, m <= d(g, h).

    Built by subsampling a geodesic; ``None`` when d(g, h) exceeds ``cap``.
    """
    if t_step < 1:
        raise ValueError("t_step must be at least 1")
    path = geodesic(g, h, cap, budget)
    if path is None:
        return None
    chain = path[::t_step]
    if chain[-1] != path[-1]:
        chain.append(path[-1])
    return chain


def element_snapshot(group: FibredPresentation, elements: Sequence[GroupElement], cap: int = 64) -> Snapshot:
    """Snapshot on an explicit finite set of group elements.

    The basepoint is the first element; distances are word distances from it
    and edges join elements one generator apart.
    """
    base = elements[0]
    uniq = list(dict.fromkeys(e.key for e in elements))
    dist = []
    for k in uniq:
        d = distance(base, group.wrap(k), cap)
        dist.append(d if d is not ExceedsCap else cap + 1)
    dmap = dict(zip(uniq, dist))
    order = [uniq[0]] + sorted(uniq[1:], key=lambda k: (dmap[k], k))
    index = {k: i for i, k in enumerate(order)}
    nb = _group_neighbor_fn(group)
    edges = sorted(
        {(min(index[k], index[w]), max(index[k], index[w])) for k in order for w in nb(k) if w in index and w != k}
    )
    return Snapshot(
        "group", order, [dmap[k] for k in order], edges, max(dist), [False] * len(order), group, word_labeler(group)
    )

