from __future__ import annotations

from collections import Counter, deque

import pytest
from hypothesis import given, settings, strategies as st

from coarse_scope.cayley import ball, distance
from coarse_scope.cosets import (
    CosetDistanceOracle,
    CosetKey,
    base_key,
    coset_hausdorff_lb,
    coset_key,
    projection_approx,
    projection_quality,
    quotient_ball,
    quotient_neighbors,
)
from coarse_scope.invariants import coset_patterns
from coarse_scope.presentation import load, normalize

from conftest import PRESETS
from oracles import Affine, FreeTimesZn, hausdorff_sample


def tree_ball_size(d, R):
    """Vertices of the radius-R ball in the d-regular tree."""
    return 1 + sum(d * (d - 1) ** (r - 1) for r in range(1, R + 1))


def test_bs13_neighbors(bs13):
    labels = sorted(lab for _, lab in quotient_neighbors(base_key(bs13)))
    assert labels == ["t", "t^-1", "x1 t", "x1^2 t"]
    assert sorted(k.label() for k, _ in quotient_neighbors(base_key(bs13))) == ["t H", "t^-1 H", "x1 t H", "x1^2 t H"]


def test_f2z_neighbors(f2z):
    assert sorted(lab for _, lab in quotient_neighbors(base_key(f2z))) == ["s", "s^-1", "t", "t^-1"]


@pytest.mark.parametrize("name", PRESETS)
def test_neighbors_are_symmetric_and_degree_matches_bound(name):
    group = load(name)
    snap = quotient_ball(group, 2)
    deg = group.quotient_degree_bound()
    for k in snap.keys[: 40]:
        nbrs = [n.syllables for n, _ in quotient_neighbors(CosetKey(group, k))]
        assert len(nbrs) == len(set(nbrs)) == deg
        for n in nbrs:
            back = [m.syllables for m, _ in quotient_neighbors(CosetKey(group, n))]
            assert k in back


@pytest.mark.parametrize(
    "name,R,d", [("bs(1,3)", 3, 4), ("bs(1,3)", 6, 4), ("f2xZ", 5, 4), ("bs(2,3)", 3, 5), ("leary-minasyan", 2, 26), ("zxz", 4, 2)]
)
def test_quotient_ball_is_a_regular_tree_ball(name, R, d):
    snap = quotient_ball(load(name), R)
    assert len(snap) == tree_ball_size(d, R)
    assert len(snap.edges) == len(snap) - 1


def test_quotient_ball_frozen_sizes(bs13):
    assert [len(quotient_ball(bs13, r)) for r in (1, 3, 6)] == [5, 53, 1457]
    assert quotient_ball(bs13, 3).sphere_sizes() == [1, 4, 12, 36]
    assert len(quotient_ball(load("z^2"), 5)) == 1


@pytest.mark.parametrize("name,R_group,R_q", [("bs(1,3)", 8, 2), ("f2xZ", 6, 3), ("bs(2,3)", 8, 2)])
def test_quotient_ball_matches_projected_group_ball(name, R_group, R_q):
    """0-1 BFS on a group ball, where fibre steps cost 0 and letters cost 1."""
    group = load(name)
    snap = ball(group, R_group)
    adj = snap.adjacency()
    # vector steps keep the syllables, letter steps change them
    cost = [[int(snap.keys[a][0] != snap.keys[b][0]) for b in adj[a]] for a in range(len(snap))]
    best = [None] * len(snap)
    best[0] = 0
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for v, c in zip(adj[u], cost[u]):
            nd = best[u] + c
            if best[v] is None or nd < best[v]:
                best[v] = nd
                (dq.appendleft if c == 0 else dq.append)(v)
    projected = {}
    for i, k in enumerate(snap.keys):
        projected[k[0]] = min(projected.get(k[0], 99), best[i])
    expected = {k: d for k, d in projected.items() if d <= R_q}
    q = quotient_ball(group, R_q)
    assert dict(zip(q.keys, q.dist)) == expected


@pytest.mark.parametrize("name", PRESETS)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_coset_key_is_right_fibre_invariant(name, data):
    group = load(name)
    n, m = group.rank, len(group.letters)
    items = data.draw(
        st.lists(
            st.one_of(
                st.tuples(st.just("v"), st.lists(st.integers(-3, 3), min_size=n, max_size=n).map(tuple)),
                *([st.tuples(st.just("t"), st.integers(0, m - 1), st.sampled_from([1, -1]))] if m else []),
            ),
            max_size=10,
        )
    )
    g = normalize(group, items)
    h = group.vector(data.draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n)))
    assert coset_key(g * h) == coset_key(g)
    assert coset_key(g).rep() * (coset_key(g).rep().inverse() * g) == g
    assert (coset_key(g).rep().inverse() * g).in_fibre()


@pytest.mark.parametrize("name,R", [("bs(1,3)", 6), ("bs(2,3)", 4), ("leary-minasyan", 3), ("f2xZ^2", 4)])
def test_pattern_counts_match_quotient_spheres(name, R):
    group = load(name)
    snap = quotient_ball(group, R)
    hist = Counter(tuple((i, e) for i, e, _ in k) for k in snap.keys)
    pats = {p.letters: p.count for p in coset_patterns(group, R)}
    assert pats == dict(hist)


def test_coset_distance_oracle(bs13):
    oracle = CosetDistanceOracle(bs13, 8)
    snap = ball(bs13, 6)
    best = {}
    for k, d in zip(snap.keys, snap.dist):
        best[k[0]] = min(best.get(k[0], 99), d)
    for syl, d in best.items():
        if d <= 4:  # cosets first met deep inside the ball are exact
            assert oracle.query(syl) == d


BS_MODEL = Affine(1, [[[3]]])
F2_MODEL = FreeTimesZn(2, 1)


@pytest.mark.parametrize("S", [0, 1, 2, 3, 4])
def test_hausdorff_bs13_matches_oracle(bs13, S):
    key = coset_key(bs13.parse("t"))
    res = coset_hausdorff_lb(key, S, 12)
    to_c, from_c = hausdorff_sample(BS_MODEL, BS_MODEL.word([("t", 0, 1)]), S, 7)
    assert (res.to_coset, res.from_coset) == (to_c, from_c)
    assert res.value == max(to_c, from_c)


@pytest.mark.parametrize("S", [0, 1, 2, 3])
def test_hausdorff_f2z_matches_oracle(f2z, S):
    key = coset_key(f2z.parse("t"))
    res = coset_hausdorff_lb(key, S, 10)
    assert (res.to_coset, res.from_coset) == hausdorff_sample(F2_MODEL, F2_MODEL.word([("t", 0, 1)]), S, 5)
    assert res.value == 1


def test_hausdorff_stabilisation(bs13, f2z):
    r = coset_hausdorff_lb(coset_key(bs13.parse("t")), 6, 20)
    assert r.value == 2 and r.stabilized_at == 1 and not r.unknown
    assert r.per_radius == [1, 2, 2, 2, 2, 2, 2]
    r = coset_hausdorff_lb(coset_key(f2z.parse("t")), 2, 20)
    assert r.value == 1 and r.stabilized_at == 0


def test_projection(bs13, f2z):
    key = coset_key(bs13.parse("t"))
    assert projection_approx(key, (9,)) == bs13.parse("t x1^3")
    assert projection_approx(key, (10,)) == bs13.parse("t x1^3")
    q = projection_quality(key, 30, 30)
    assert q.gap == 1 and q.unknown_points == 0 and q.points == 61
    assert projection_quality(coset_key(f2z.parse("t")), 30, 30).gap == 0


def test_projection_gap_definition(bs13):
    """gap(v) = d(v, g floor(A_g v)) - d(v, gH), recomputed point by point."""
    key = coset_key(bs13.parse("t^-1"))
    oracle = CosetDistanceOracle(bs13, 20)
    worst = 0
    for v in range(-12, 13):
        x = bs13.vector((v,))
        worst = max(worst, distance(x, projection_approx(key, (v,)), 20) - oracle.point_to_coset(x, key))
    assert projection_quality(key, 12, 20).gap == worst
