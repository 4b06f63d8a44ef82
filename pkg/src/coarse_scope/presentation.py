"""Multiple HNN extensions of Z^n by rational matrices.

A presentation has vector generators ``x1 .. xn`` spanning the fibre Z^n and
stable letters ``t_i`` with ``t_i v t_i^-1 = M_i v`` for v in the source
lattice ``B_i = {v : M_i v in Z^n}``; the image lattice is ``C_i = M_i(B_i)``.

Elements are kept in right-pushed normal form::

    r_1 t_{i1}^{e1} r_2 t_{i2}^{e2} ... r_k t_{ik}^{ek} w

where each residue ``r_j`` is the HNF transversal representative modulo
``C`` (e = +1) or ``B`` (e = -1) and no pinch survives. Right
multiplication by a vector only touches the tail ``w``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import (
    ConfigError,
    DimensionMismatch,
    DuplicateName,
    ExponentOutOfRange,
    MalformedVector,
    PresentationMismatch,
    SingularMatrix,
    UnknownToken,
)
from .lattice import LatticeBasis, RationalMatrix, Vector, image_lattice, integral_preimage

Syllable = tuple[int, int, Vector]  # (letter index, sign, residue left of the letter)
Syllables = tuple[Syllable, ...]
RawKey = tuple[Syllables, Vector]

DEFAULT_EXPONENT_LIMIT = 10**6

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_VECGEN_RE = re.compile(r"x(\d+)\Z")


@dataclass(frozen=True)
class Letter:
    name: str
    matrix: RationalMatrix  # t v t^-1 = matrix . v
    inverse: RationalMatrix
    source: LatticeBasis  # B
    image: LatticeBasis  # C
    source_test: RationalMatrix  # (B^T)^-1: u in B  <=>  source_test . u integral
    image_test: RationalMatrix


def _vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def _vneg(a: Vector) -> Vector:
    return tuple(-x for x in a)


class FibredPresentation:
    """Validated group datum. Build with :func:`validate` or :func:`load`."""

    def __init__(self, rank: int, letters: Sequence[tuple[str, RationalMatrix]], document: dict | None = None):
        if rank < 1:
            raise DimensionMismatch("rank must be at least 1")
        self.rank = rank
        seen = set()
        built = []
        for name, m in letters:
            if not _NAME_RE.match(name) or name == "v":
                raise ConfigError(f"invalid letter name {name!r}")
            if _VECGEN_RE.match(name):
                raise DuplicateName(f"letter {name!r} clashes with a vector generator name")
            if name in seen:
                raise DuplicateName(f"letter {name!r} given twice")
            seen.add(name)
            if m.n != rank:
                raise DimensionMismatch(f"letter {name!r}: matrix is {m.n}x{m.n}, rank is {rank}")
            if m.det() == 0:
                raise SingularMatrix(f"letter {name!r} has a singular matrix")
            minv = m.inverse()
            source = integral_preimage([m], rank)
            image = image_lattice(m, source)
            if image != integral_preimage([minv], rank):
                raise ArithmeticError(f"letter {name!r}: C != M(B)")
            built.append(
                Letter(
                    name, m, minv, source, image,
                    RationalMatrix(source.basis).transpose().inverse(),
                    RationalMatrix(image.basis).transpose().inverse(),
                )
            )
        self.letters: tuple[Letter, ...] = tuple(built)
        self.letter_index = {L.name: i for i, L in enumerate(self.letters)}
        self.document = document if document is not None else self._make_document()
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        self.hash = hashlib.sha256(canon.encode()).hexdigest()[:16]
        self.zero: Vector = (0,) * rank
        self._identity = GroupElement(self, (), self.zero)

    def _make_document(self) -> dict:
        return {
            "rank": self.rank,
            "letters": [
                {"name": L.name, "num": [list(r) for r in L.matrix.numerator], "den": L.matrix.denominator}
                for L in self.letters
            ],
        }

    def __repr__(self):
        return f"FibredPresentation(rank={self.rank}, letters={[L.name for L in self.letters]})"

    # -- derived data

    def indices(self) -> list[dict]:
        return [
            {"name": L.name, "source_index": L.source.index, "image_index": L.image.index}
            for L in self.letters
        ]

    def quotient_degree_bound(self) -> int:
        return sum(L.source.index + L.image.index for L in self.letters)

    def generators(self) -> list[tuple[str, int, int]]:
        """The fixed symmetric generating set as ``(label, kind, payload)``.

        ``kind`` 0 is a vector step (payload = signed coordinate, 1-based);
        ``kind`` 1 is a letter (payload = signed letter index, 1-based).
        """
        out = []
        for j in range(self.rank):
            out.append((f"x{j + 1}", 0, j + 1))
            out.append((f"x{j + 1}^-1", 0, -(j + 1)))
        for i, L in enumerate(self.letters):
            out.append((L.name, 1, i + 1))
            out.append((f"{L.name}^-1", 1, -(i + 1)))
        return out

    # -- raw normal-form engine on (syllables, tail) pairs

    def rmul_letter(self, syl: Syllables, tail: Vector, i: int, eps: int) -> RawKey:
        L = self.letters[i]
        if eps == 1:
            c, r = L.image.split(tail)
            if syl and not any(r):
                li, le, prev = syl[-1]
                if li == i and le == -1:
                    return syl[:-1], _vadd(prev, L.inverse.apply_int(tail))
            return syl + ((i, 1, r),), L.inverse.apply_int(c)
        b, r = L.source.split(tail)
        if syl and not any(r):
            li, le, prev = syl[-1]
            if li == i and le == 1:
                return syl[:-1], _vadd(prev, L.matrix.apply_int(tail))
        return syl + ((i, -1, r),), L.matrix.apply_int(b)

    def rmul_raw(self, key: RawKey, other: RawKey) -> RawKey:
        syl, tail = key
        for i, eps, r in other[0]:
            syl, tail = self.rmul_letter(syl, _vadd(tail, r), i, eps)
        return syl, _vadd(tail, other[1])

    def invert_raw(self, key: RawKey) -> RawKey:
        syl, tail = key
        out_syl: Syllables = ()
        acc = _vneg(tail)
        for i, eps, r in reversed(syl):
            out_syl, acc = self.rmul_letter(out_syl, acc, i, -eps)
            acc = _vadd(acc, _vneg(r))
        return out_syl, acc

    def neighbor_raw(self, key: RawKey, kind: int, payload: int) -> RawKey:
        syl, tail = key
        if kind == 0:
            j = abs(payload) - 1
            t = list(tail)
            t[j] += 1 if payload > 0 else -1
            return syl, tuple(t)
        return self.rmul_letter(syl, tail, abs(payload) - 1, 1 if payload > 0 else -1)

    # -- public constructors

    def identity(self) -> GroupElement:
        return self._identity

    def element(self, syllables: Iterable[Sequence] = (), tail: Sequence[int] | None = None) -> GroupElement:
        """Wrap an already-normal (syllables, tail) pair (validated)."""
        syl = tuple((int(i), int(e), tuple(r)) for i, e, r in syllables)
        g = GroupElement(self, syl, tuple(tail) if tail is not None else self.zero)
        if normalize(self, g.raw_sequence()) != g:
            raise ValueError("given syllables/tail are not in normal form")
        return g

    def vector(self, v: Sequence[int]) -> GroupElement:
        if len(v) != self.rank:
            raise MalformedVector(f"expected {self.rank} coordinates, got {len(v)}")
        return GroupElement(self, (), tuple(int(x) for x in v))

    def letter(self, name_or_index: Union[str, int], power: int = 1) -> GroupElement:
        i = self.letter_index[name_or_index] if isinstance(name_or_index, str) else name_or_index
        eps = 1 if power >= 0 else -1
        return normalize(self, [("t", i, eps)] * abs(power))

    def wrap(self, key: RawKey) -> GroupElement:
        return GroupElement(self, key[0], key[1])

    def parse(self, text: str, exponent_limit: int = DEFAULT_EXPONENT_LIMIT) -> GroupElement:
        return parse_word(text, self, exponent_limit)


RawItem = tuple  # ("v", vector) or ("t", letter index, sign)


class GroupElement:
    """Canonical group element. Equality is equality of normal forms."""

    __slots__ = ("group", "syllables", "tail")

    def __init__(self, group: FibredPresentation, syllables: Syllables, tail: Vector):
        self.group = group
        self.syllables = syllables
        self.tail = tail

    @property
    def key(self) -> RawKey:
        return (self.syllables, self.tail)

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and self.group is other.group
            and self.syllables == other.syllables
            and self.tail == other.tail
        )

    def __hash__(self):
        return hash((self.syllables, self.tail))

    def __lt__(self, other: GroupElement):
        return self.key < other.key

    def __mul__(self, other: GroupElement) -> GroupElement:
        return multiply(self, other)

    def inverse(self) -> GroupElement:
        return invert(self)

    def is_identity(self) -> bool:
        return not self.syllables and not any(self.tail)

    def in_fibre(self) -> bool:
        return not self.syllables

    def raw_sequence(self) -> list[RawItem]:
        seq: list[RawItem] = []
        for i, e, r in self.syllables:
            seq.append(("v", r))
            seq.append(("t", i, e))
        seq.append(("v", self.tail))
        return seq

    def word(self) -> str:
        """Canonical word; parses back to the same element."""
        parts = []
        for i, e, r in self.syllables:
            parts.extend(_vector_tokens(r))
            name = self.group.letters[i].name
            parts.append(name if e == 1 else f"{name}^-1")
        parts.extend(_vector_tokens(self.tail))
        return " ".join(parts) if parts else "1"

    def __repr__(self):
        return f"<{self.word()}>"

    def __str__(self):
        return self.word()

    def to_json(self) -> dict:
        return {
            "word": self.word(),
            "syllables": [[self.group.letters[i].name, e, list(r)] for i, e, r in self.syllables],
            "tail": list(self.tail),
        }


def _vector_tokens(v: Vector) -> list[str]:
    if not any(v):
        return []
    if len(v) == 1 or sum(1 for x in v if x) == 1:
        j = next(j for j, x in enumerate(v) if x)
        return [f"x{j + 1}" if v[j] == 1 else f"x{j + 1}^{v[j]}"]
    return ["v[" + ",".join(str(x) for x in v) + "]"]


# ---------------------------------------------------------------------------
# Operations


def normalize(group: FibredPresentation, seq: Iterable[RawItem]) -> GroupElement:
    """Normal form of a raw product of vectors and letters, read left to right.

    Items are ``("v", vector)`` or ``("t", letter_index, sign)``.
    """
    syl: Syllables = ()
    tail = group.zero
    for item in seq:
        if item[0] == "v":
            v = tuple(item[1])
            if len(v) != group.rank:
                raise MalformedVector(f"vector {v} has wrong length")
            tail = _vadd(tail, v)
        else:
            _, i, e = item
            syl, tail = group.rmul_letter(syl, tail, i, e)
    return GroupElement(group, syl, tail)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.group is not b.group:
        raise PresentationMismatch("elements belong to different presentations")
    return a.group.wrap(a.group.rmul_raw(a.key, b.key))


def invert(a: GroupElement) -> GroupElement:
    return a.group.wrap(a.group.invert_raw(a.key))


_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<vec>v\[(?P<coords>[^\]]*)\])
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    )(?:\^(?P<exp>[+-]?\d+))?\s*""",
    re.VERBOSE,
)


def parse_word(text: str, group: FibredPresentation, exponent_limit: int = DEFAULT_EXPONENT_LIMIT) -> GroupElement:
    """Parse a whitespace- or ``*``-separated word into its normal form.

    Tokens: letter names, ``x1 .. xn``, explicit vectors ``v[1,-2]``, each with
    an optional integer exponent ``^k``. ``1`` alone is the identity.
    """
    seq: list[RawItem] = []
    s = text.replace("*", " ").replace("·", " ").strip()
    if s in ("", "1", "e"):
        return group.identity()
    pos = 0
    while pos < len(s):
        m = _TOKEN_RE.match(s, pos)
        if not m or m.end() == pos:
            raise UnknownToken(f"cannot parse {s[pos:]!r}")
        pos = m.end()
        exp = int(m.group("exp")) if m.group("exp") is not None else 1
        if abs(exp) > exponent_limit:
            raise ExponentOutOfRange(f"|{exp}| exceeds limit {exponent_limit}")
        if m.group("vec") is not None:
            try:
                coords = [int(c) for c in m.group("coords").split(",")]
            except ValueError:
                raise MalformedVector(f"bad vector {m.group('vec')!r}") from None
            if len(coords) != group.rank:
                raise MalformedVector(f"{m.group('vec')!r} needs {group.rank} coordinates")
            seq.append(("v", tuple(exp * c for c in coords)))
            continue
        name = m.group("name")
        vm = _VECGEN_RE.match(name)
        if vm:
            j = int(vm.group(1))
            if not 1 <= j <= group.rank:
                raise UnknownToken(f"{name!r}: rank is {group.rank}")
            v = [0] * group.rank
            v[j - 1] = exp
            seq.append(("v", tuple(v)))
        elif name in group.letter_index:
            i = group.letter_index[name]
            eps = 1 if exp >= 0 else -1
            seq.extend([("t", i, eps)] * abs(exp))
        else:
            raise UnknownToken(f"unknown generator {name!r}")
    return normalize(group, seq)


def matrix_A(g: GroupElement) -> RationalMatrix:
    """The commensuration matrix: ``A_{gk} = A_k A_g``, ``A_t = M_t^{-1}``."""
    return syllable_matrix(g.group, g.syllables)


def syllable_matrix(group: FibredPresentation, syllables: Iterable[Sequence]) -> RationalMatrix:
    acc = RationalMatrix.identity(group.rank)
    for s in syllables:
        L = group.letters[s[0]]
        acc = (L.inverse if s[1] == 1 else L.matrix) @ acc
    return acc


def conjugation_domain(g: GroupElement) -> tuple[LatticeBasis, RationalMatrix]:
    """The lattice {v : g v g^-1 in Z^n} and the conjugation map on it.

    Iterates Britton's condition from the innermost syllable outwards: each
    letter may only be crossed by vectors in its source (or image) lattice.
    """
    group = g.group
    n = group.rank
    phi = RationalMatrix.identity(n)
    tests: list[RationalMatrix] = []
    for i, e, _ in reversed(g.syllables):
        L = group.letters[i]
        tests.append((L.source_test if e == 1 else L.image_test) @ phi)
        phi = (L.matrix if e == 1 else L.inverse) @ phi
    return integral_preimage(tests, n), phi


def commensuration_indices(g: GroupElement) -> tuple[int, int]:
    """``([Z^n : L_g], [Z^n : g L_g g^-1])`` for L_g the conjugation domain."""
    dom, phi = conjugation_domain(g)
    image = dom.index * abs(phi.det())
    assert image.denominator == 1, "conjugate of the domain must be integral"
    return dom.index, int(image)


# ---------------------------------------------------------------------------
# Documents and presets


def validate(doc: dict) -> FibredPresentation:
    """Build a presentation from a JSON-style document."""
    if not isinstance(doc, dict):
        raise ConfigError("presentation document must be an object")
    try:
        rank = int(doc["rank"])
        raw_letters = doc.get("letters", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad presentation document: {exc}") from None
    letters = []
    for entry in raw_letters:
        try:
            name = str(entry["name"])
            num = entry["num"]
            den = int(entry.get("den", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad letter entry {entry!r}: {exc}") from None
        if den <= 0:
            raise DimensionMismatch(f"letter {name!r}: denominator must be positive")
        if len(num) != rank or any(len(r) != rank for r in num):
            raise DimensionMismatch(f"letter {name!r}: matrix must be {rank}x{rank}")
        try:
            rows = [[Fraction(x) for x in r] for r in num]
        except (TypeError, ValueError):
            raise ConfigError(f"letter {name!r}: non-numeric entry") from None
        letters.append((name, RationalMatrix(rows, den)))
    group = FibredPresentation(rank, letters)
    return group


def _identity_rows(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def preset_document(name: str) -> dict:
    """Expand a named preset into a presentation document.

    Presets: ``bs(m,k)`` (``bs(1,k)`` in particular), ``f<m>xZ^<n>``
    (free group of rank m times Z^n; ``zxz`` = ``f1xZ``),
    ``leary-minasyan``, ``zn-semidirect(a11,a12,...)`` (one letter acting
    by the given integer n x n matrix), and ``z^<n>`` (no letters).
    """
    key = name.strip().lower().replace(" ", "")
    if m := re.fullmatch(r"bs\((-?\d+),(-?\d+)\)", key):
        p, q = int(m.group(1)), int(m.group(2))
        if p == 0 or q == 0:
            raise ConfigError("bs(m,k) needs nonzero m and k")
        if p < 0:
            p, q = -p, -q
        return {"rank": 1, "letters": [{"name": "t", "num": [[q]], "den": p}]}
    if key == "zxz":
        key = "f1xz"
    if m := re.fullmatch(r"f(\d+)xz(?:\^(\d+))?", key):
        k, n = int(m.group(1)), int(m.group(2) or 1)
        if n < 1:
            raise ConfigError("fibre rank must be at least 1")
        names = ["t"] if k == 1 else ["t", "s"] if k == 2 else [f"t{i + 1}" for i in range(k)]
        return {"rank": n, "letters": [{"name": s, "num": _identity_rows(n), "den": 1} for s in names]}
    if key in ("leary-minasyan", "learyminasyan", "lm"):
        return {"rank": 2, "letters": [{"name": "t", "num": [[5, 12], [-12, 5]], "den": 13}]}
    if m := re.fullmatch(r"zn-semidirect\(([-\d,]+)\)", key):
        vals = [int(x) for x in m.group(1).split(",") if x]
        n = round(len(vals) ** 0.5)
        if n * n != len(vals) or n == 0:
            raise DimensionMismatch("zn-semidirect needs n*n integer entries")
        rows = [vals[i * n:(i + 1) * n] for i in range(n)]
        return {"rank": n, "letters": [{"name": "t", "num": rows, "den": 1}]}
    if m := re.fullmatch(r"z(?:\^(\d+))?", key):
        n = int(m.group(1) or 1)
        return {"rank": n, "letters": []}
    raise ConfigError(f"unknown preset {name!r}")


def load(source: str | Path | dict) -> FibredPresentation:
    """Presentation from a document, a JSON file path, or a preset name."""
    if isinstance(source, dict):
        return validate(source)
    p = Path(source)
    if p.suffix == ".json" or p.is_file():
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read {p}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON ({exc})") from None
        return validate(doc)
    return validate(preset_document(str(source)))
