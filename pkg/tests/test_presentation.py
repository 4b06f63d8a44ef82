from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coarse_scope.errors import (
    ConfigError,
    DimensionMismatch,
    DuplicateName,
    ExponentOutOfRange,
    MalformedVector,
    PresentationMismatch,
    SingularMatrix,
    UnknownToken,
)
from coarse_scope.lattice import RationalMatrix
from coarse_scope.presentation import (
    commensuration_indices,
    load,
    matrix_A,
    normalize,
    preset_document,
)

from conftest import PRESETS
from oracles import Affine, FreeTimesZn, mat_inv

GROUPS = {name: load(name) for name in PRESETS}


def affine_model(group):
    return Affine(group.rank, [[[L.matrix[i, j] for j in range(group.rank)] for i in range(group.rank)] for L in group.letters])


def raw_items(group, max_len=12, coord=4):
    n, m = group.rank, len(group.letters)
    vec = st.tuples(st.just("v"), st.lists(st.integers(-coord, coord), min_size=n, max_size=n).map(tuple))
    if m == 0:
        return st.lists(vec, max_size=max_len)
    let = st.tuples(st.just("t"), st.integers(0, m - 1), st.sampled_from([1, -1]))
    return st.lists(st.one_of(vec, let), max_size=max_len)


def relator(group, i, v):
    """t_i v t_i^-1 (M_i v)^-1 for v in the source lattice: trivial in G."""
    L = group.letters[i]
    w = L.matrix.apply_int(v)
    return [("t", i, 1), ("v", v), ("t", i, -1), ("v", tuple(-x for x in w))]


# -- normal forms -------------------------------------------------------------

FAITHFUL = {
    "bs(1,3)": lambda g: affine_model(g),
    "bs(1,2)": lambda g: affine_model(g),
    "f2xZ": lambda g: FreeTimesZn(2, 1),
    "f2xZ^2": lambda g: FreeTimesZn(2, 2),
    "zxz": lambda g: FreeTimesZn(1, 1),
    "zn-semidirect(2,1,1,1)": lambda g: affine_model(g),
    "z^2": lambda g: affine_model(g),
}


@pytest.mark.parametrize("name", sorted(FAITHFUL))
@settings(max_examples=120, deadline=None)
@given(data=st.data())
def test_normal_form_is_a_complete_invariant(name, data):
    """Two words have the same normal form iff their faithful images agree."""
    group = GROUPS[name]
    model = FAITHFUL[name](group)
    a = data.draw(raw_items(group))
    b = data.draw(raw_items(group))
    na, nb = normalize(group, a), normalize(group, b)
    assert (na == nb) == (model.word(a) == model.word(b))
    # the normal form spells the same element
    assert model.word(na.raw_sequence()) == model.word(a)


@pytest.mark.parametrize("name", PRESETS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_relator_insertion_does_not_change_normal_form(name, data):
    group = GROUPS[name]
    seq = data.draw(raw_items(group))
    if not group.letters:
        return
    pos = data.draw(st.integers(0, len(seq)))
    i = data.draw(st.integers(0, len(group.letters) - 1))
    coeffs = data.draw(st.lists(st.integers(-3, 3), min_size=group.rank, max_size=group.rank))
    basis = group.letters[i].source.basis
    v = tuple(sum(c * b[k] for c, b in zip(coeffs, basis)) for k in range(group.rank))
    noisy = seq[:pos] + relator(group, i, v) + seq[pos:]
    assert normalize(group, noisy) == normalize(group, seq)


@pytest.mark.parametrize("name", PRESETS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_laws(name, data):
    group = GROUPS[name]
    a, b, c = (normalize(group, data.draw(raw_items(group, 8))) for _ in range(3))
    e = group.identity()
    assert (a * b) * c == a * (b * c)
    assert a * e == a == e * a
    assert (a * a.inverse()).is_identity()
    assert (a.inverse() * a).is_identity()
    assert (a * b).inverse() == b.inverse() * a.inverse()
    assert normalize(group, a.raw_sequence() + b.raw_sequence()) == a * b


@pytest.mark.parametrize("name", PRESETS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_word_round_trips(name, data):
    group = GROUPS[name]
    g = normalize(group, data.draw(raw_items(group)))
    assert group.parse(g.word()) == g
    assert json.loads(json.dumps(g.to_json()))["word"] == g.word()


def test_bs13_spot_values(bs13):
    p = bs13.parse
    assert p("t x1 t^-1") == p("x1^3")
    assert p("t^-1 x1^3 t") == p("x1")
    assert p("x1^7 t").word() == "x1 t x1^2"
    assert p("t x1") == p("x1^3 t")
    assert p("t^-1 x1 t").word() == "t^-1 x1 t"
    assert p("1").is_identity() and p("t t^-1").is_identity()


def test_leary_minasyan_letter(lm):
    t = lm.letters[0]
    assert t.source.index == 13 and t.image.index == 13
    A = matrix_A(lm.parse("t"))
    assert A == RationalMatrix([[5, -12], [12, 5]], 13)
    assert A.norm1() == Fraction(17, 13)


# -- A-matrix ---------------------------------------------------------------

@pytest.mark.parametrize("name", PRESETS)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_A_is_inverse_linear_part_and_anti_homomorphic(name, data):
    group = GROUPS[name]
    model = affine_model(group)
    a = normalize(group, data.draw(raw_items(group)))
    b = normalize(group, data.draw(raw_items(group)))
    for g in (a, b):
        L, _ = model.word(g.raw_sequence())
        A = matrix_A(g)
        assert tuple(tuple(A[i, j] for j in range(group.rank)) for i in range(group.rank)) == mat_inv(L)
    assert matrix_A(a * b) == matrix_A(b) @ matrix_A(a)
    # A depends on the coset only
    h = group.vector(data.draw(st.lists(st.integers(-5, 5), min_size=group.rank, max_size=group.rank)))
    assert matrix_A(a * h) == matrix_A(a)


def test_A_on_bs13(bs13):
    assert matrix_A(bs13.parse("t"))[0, 0] == Fraction(1, 3)
    assert matrix_A(bs13.parse("t^-2 x1 t"))[0, 0] == 3


# -- commensuration indices ---------------------------------------------------

@pytest.mark.parametrize(
    "name,word,expected",
    [("bs(1,3)", "t", (1, 3)), ("bs(1,3)", "t^-1", (3, 1)), ("bs(1,3)", "x1 t^2", (1, 9)),
     ("leary-minasyan", "t", (13, 13)), ("f2xZ", "t s^-1", (1, 1)), ("bs(2,3)", "t", (2, 3))],
)
def test_commensuration_indices(name, word, expected):
    assert commensuration_indices(GROUPS[name].parse(word)) == expected


def test_commensuration_domain_brute_force():
    """{v : g v g^-1 in Z^n} checked directly for a two-letter word."""
    group = load({"rank": 1, "letters": [{"name": "t", "num": [[2]]}, {"name": "s", "num": [[2]]}]})
    g = group.parse("t s^-1")
    inside = [v for v in range(-20, 21) if (g * group.vector((v,)) * g.inverse()).in_fibre()]
    assert inside == list(range(-20, 21, 2))
    assert commensuration_indices(g) == (2, 2)


# -- documents ----------------------------------------------------------------

def test_presets_expand():
    assert preset_document("bs(1,3)") == {"rank": 1, "letters": [{"name": "t", "num": [[3]], "den": 1}]}
    assert [L.name for L in load("f2xZ^2").letters] == ["t", "s"]
    assert load("f2xZ^2").rank == 2
    assert not load("z^3").letters
    assert load("zxz").hash == load("f1xZ").hash


def test_hash_is_canonical(tmp_path):
    doc = {"rank": 1, "letters": [{"name": "t", "num": [[3]], "den": 1}]}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc, indent=3))
    assert load(str(path)).hash == load("bs(1,3)").hash
    assert load("bs(1,3)").hash != load("bs(1,2)").hash
    assert len(load("bs(1,3)").hash) == 16


@pytest.mark.parametrize(
    "doc,exc",
    [
        ({"rank": 1, "letters": [{"name": "t", "num": [[0]]}]}, SingularMatrix),
        ({"rank": 2, "letters": [{"name": "t", "num": [[1]]}]}, DimensionMismatch),
        ({"rank": 1, "letters": [{"name": "t", "num": [[2]]}, {"name": "t", "num": [[3]]}]}, DuplicateName),
        ({"rank": 1, "letters": [{"name": "x1", "num": [[2]]}]}, ConfigError),
        ({"rank": 1, "letters": [{"name": "t", "num": [[2]], "den": 0}]}, DimensionMismatch),
        ({"letters": []}, ConfigError),
    ],
)
def test_invalid_documents(doc, exc):
    with pytest.raises(exc):
        load(doc)


def test_parse_errors(bs13, lm):
    with pytest.raises(UnknownToken):
        bs13.parse("q")
    with pytest.raises(UnknownToken):
        bs13.parse("x2")
    with pytest.raises(MalformedVector):
        lm.parse("v[1]")
    with pytest.raises(ExponentOutOfRange):
        bs13.parse("t^10000000")
    assert lm.parse("v[2,-1]") == lm.parse("x1^2 x2^-1")
    with pytest.raises(PresentationMismatch):
        bs13.parse("t") * lm.parse("t")


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load("no-such-group")
