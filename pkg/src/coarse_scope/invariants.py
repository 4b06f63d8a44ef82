"""Height, fibre distortion and their profiles over quotient balls.

Everything exact is a ``Fraction``; logarithms are for display and for the
scale-qualified verdicts only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .cosets import CosetKey, coset_key
from .errors import RankNotOne
from .lattice import RationalMatrix
from .presentation import FibredPresentation, GroupElement, Syllables, matrix_A, syllable_matrix


def flog(x: Fraction) -> float:
    # log of a positive rational without overflowing float conversion
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass(frozen=True)
class HeightValue:
    ratio: Fraction
    log_value: float

    def to_json(self) -> dict:
        return {"ratio_num": self.ratio.numerator, "ratio_den": self.ratio.denominator, "log": self.log_value}


@dataclass(frozen=True)
class DistortionValue:
    """F = |log ||A_g||_1| together with the symmetrised variant
    ``log max(||A_g||_1, ||A_g^-1||_1)``."""

    norm: Fraction
    inverse_norm: Fraction
    F: float
    symmetric_F: float

    def to_json(self) -> dict:
        return {
            "norm_num": self.norm.numerator,
            "norm_den": self.norm.denominator,
            "F": self.F,
            "inverse_norm_num": self.inverse_norm.numerator,
            "inverse_norm_den": self.inverse_norm.denominator,
            "symmetric_F": self.symmetric_F,
        }


def height(g: GroupElement) -> HeightValue:
    """Height for a rank-1 fibre: |p/q| where a^q = g a^p g^-1."""
    if g.group.rank != 1:
        raise RankNotOne(f"height needs a rank-1 fibre, rank is {g.group.rank}")
    ratio = abs(matrix_A(g)[0, 0])
    return HeightValue(ratio, flog(ratio))


def distortion_of_matrix(A: RationalMatrix) -> DistortionValue:
    norm = A.norm1()
    inv = A.inverse().norm1()
    return DistortionValue(norm, inv, abs(flog(norm)), flog(max(norm, inv)))


def fibre_distortion(key: CosetKey | GroupElement) -> DistortionValue:
    """Fibre distortion of a coset (a group element stands for its coset)."""
    if isinstance(key, GroupElement):
        key = coset_key(key)
    return distortion_of_matrix(syllable_matrix(key.group, key.syllables))


# ---------------------------------------------------------------------------
# Syllable patterns: F depends only on the letter/sign sequence of a coset, so
# quotient spheres can be summarised pattern by pattern with exact multiplicity.


@dataclass(frozen=True)
class Pattern:
    letters: tuple[tuple[int, int], ...]  # (letter index, sign)
    count: int  # number of cosets in the quotient sphere with this pattern
    matrix: RationalMatrix


def coset_patterns(group: FibredPresentation, R: int) -> Iterator[Pattern]:
    """Every realisable syllable pattern of length <= R, depth-first.

    A syllable ``(i, e)`` contributes ``[Z^n : C_i]`` (e = +1) or
    ``[Z^n : B_i]`` (e = -1) residues, one fewer right after ``(i, -e)``
    because a zero residue there would pinch.
    """
    n = group.rank
    sizes = [(L.image.index, L.source.index) for L in group.letters]
    factors = [(L.inverse, L.matrix) for L in group.letters]

    def rec(prefix, count, A):
        yield Pattern(prefix, count, A)
        if len(prefix) == R:
            return
        for i in range(len(group.letters)):
            for e in (1, -1):
                k = sizes[i][0] if e == 1 else sizes[i][1]
                if prefix and prefix[-1] == (i, -e):
                    k -= 1
                if k <= 0:
                    continue
                f = factors[i][0] if e == 1 else factors[i][1]
                yield from rec(prefix + ((i, e),), count * k, f @ A)

    yield from rec((), 1, RationalMatrix.identity(n))


def pattern_witness(group: FibredPresentation, letters: tuple[tuple[int, int], ...]) -> CosetKey:
    """Lexicographically first coset realising a pattern."""
    syl: Syllables = ()
    for pos, (i, e) in enumerate(letters):
        L = group.letters[i]
        trans = L.image.transversal() if e == 1 else L.source.transversal()
        need_nonzero = pos > 0 and letters[pos - 1] == (i, -e)
        r = next(v for v in trans if not need_nonzero or any(v))
        syl = syl + ((i, e, tuple(r)),)
    return CosetKey(group, syl)


@dataclass
class RadiusRow:
    radius: int
    cosets: int
    max_F: float
    min_F: float
    max_norm: Fraction  # norm attaining max_F
    max_symmetric_F: float
    below_threshold: int
    histogram: list[tuple[float, float, int]]

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "cosets": self.cosets,
            "maxF_num": self.max_norm.numerator,
            "maxF_den": self.max_norm.denominator,
            "maxF_log": self.max_F,
            "minF_log": self.min_F,
            "max_symmetric_F": self.max_symmetric_F,
            "below_threshold": self.below_threshold,
            "histogram": [[lo, hi, c] for lo, hi, c in self.histogram],
        }


@dataclass
class Verdict:
    kind: str  # ZeroAtScale | BoundedAtScale | GrowingAtScale
    scale: int
    bound: float | None = None
    slope: float | None = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "at_scale": self.scale}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.slope is not None:
            out["slope"] = self.slope
        return out

    def __str__(self):
        if self.kind == "BoundedAtScale":
            return f"BoundedAtScale({self.bound:.6g}) at scale {self.scale}"
        if self.kind == "GrowingAtScale":
            return f"GrowingAtScale({self.slope:.6g}) at scale {self.scale}"
        return f"{self.kind} at scale {self.scale}"


@dataclass
class DistortionProfile:
    rows: list[RadiusRow]
    verdict: Verdict
    threshold: float
    max_F_overall: float = field(default=0.0)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "rows": [r.to_json() for r in self.rows],
            "verdict": self.verdict.to_json(),
            "max_F": self.max_F_overall,
        }


def distortion_profile(
    group: FibredPresentation,
    R: int,
    threshold: float = 1.0,
    bucket_width: float = 0.25,
    growth_slope: float = 0.25,
) -> DistortionProfile:
    """Per-radius F statistics over the quotient ball of radius R.

    Verdict: ZeroAtScale if every norm is exactly 1; otherwise
    GrowingAtScale when max F gains at least ``growth_slope`` per radius step
    over the second half of the range, else BoundedAtScale(max F).
    """
    stats: dict[int, dict] = {}
    for p in coset_patterns(group, R):
        d = distortion_of_matrix(p.matrix)
        r = len(p.letters)
        s = stats.setdefault(r, {"cosets": 0, "max": None, "min": None, "sym": 0.0, "below": 0, "hist": {}, "zero": True})
        s["cosets"] += p.count
        if s["max"] is None or d.F > s["max"][0]:
            s["max"] = (d.F, d.norm)
        if s["min"] is None or d.F < s["min"]:
            s["min"] = d.F
        s["sym"] = max(s["sym"], d.symmetric_F)
        if d.F <= threshold:
            s["below"] += p.count
        b = int(d.F // bucket_width)
        s["hist"][b] = s["hist"].get(b, 0) + p.count
        if d.norm != 1:
            s["zero"] = False
    rows = []
    for r in sorted(stats):
        s = stats[r]
        hist = [(b * bucket_width, (b + 1) * bucket_width, c) for b, c in sorted(s["hist"].items())]
        rows.append(RadiusRow(r, s["cosets"], s["max"][0], s["min"], s["max"][1], s["sym"], s["below"], hist))
    overall = max(row.max_F for row in rows)
    top = rows[-1].radius
    if all(stats[r]["zero"] for r in stats):
        verdict = Verdict("ZeroAtScale", R)
    else:
        half = top // 2
        by_r = {row.radius: row.max_F for row in rows}
        slope = (by_r[top] - by_r[half]) / (top - half) if top > half else 0.0
        if slope >= growth_slope:
            verdict = Verdict("GrowingAtScale", R, slope=slope)
        else:
            verdict = Verdict("BoundedAtScale", R, bound=overall)
    return DistortionProfile(rows, verdict, threshold, overall)


@dataclass
class StabilityCheck:
    observed: float
    bound: float  # max(|log||A_k||_1|, |log||A_k^-1||_1|) + |log(||A_k||_1 ||A_k^-1||_1)|
    sharp_bound: float  # max(|log||A_k||_1|, |log||A_k^-1||_1|)
    worst_coset: CosetKey | None

    @property
    def holds(self) -> bool:
        return self.observed <= self.bound + 1e-12

    def to_json(self) -> dict:
        return {
            "observed": self.observed,
            "bound": self.bound,
            "sharp_bound": self.sharp_bound,
            "holds": self.holds,
            "worst_coset": self.worst_coset.label() if self.worst_coset is not None else None,
        }


def qi_stability_check(k: GroupElement, R: int) -> StabilityCheck:
    """How far left translation by k moves F over the quotient ball of radius R.

    Uses A_{kg} = A_g A_k and checks the observed change against the norm
    bound for A_k.
    """
    group = k.group
    Ak = matrix_A(k)
    a = flog(Ak.norm1())
    b = flog(Ak.inverse().norm1())
    sharp = max(abs(a), abs(b))
    bound = sharp + abs(a + b)
    observed = 0.0
    worst = None
    for p in coset_patterns(group, R):
        before = distortion_of_matrix(p.matrix).F
        after = distortion_of_matrix(p.matrix @ Ak).F
        delta = abs(after - before)
        if delta > observed + 1e-15:
            observed, worst = delta, p
    result = StabilityCheck(observed, bound, sharp, pattern_witness(group, worst.letters) if worst else None)
    assert result.holds, "left translation moved F beyond the norm bound"
    return result


def aiq_kernel_search(group: FibredPresentation, R: int) -> CosetKey | None:
    """First nontrivial coset within quotient radius R whose A-matrix is I.

    ``None`` is evidence (at scale R only) that the action on the fibre is
    almost injective.
    """
    best = None
    for p in coset_patterns(group, R):
        if p.letters and p.matrix.is_identity():
            if best is None or (len(p.letters), p.letters) < (len(best), best):
                best = p.letters
    return None if best is None else pattern_witness(group, best)
