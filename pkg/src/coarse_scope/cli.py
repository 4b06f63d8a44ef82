"""Command-line front end; every command prints a JSON-lines record stream.

Exit status: 0 success, 2 configuration error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import ExitStack

from . import __version__
from .cayley import ball, default_budget
from .cosets import coset_hausdorff_lb, coset_key, projection_quality, quotient_ball
from .errors import CoarseScopeError, ConfigError
from .invariants import aiq_kernel_search, distortion_profile, fibre_distortion, height
from .presentation import FibredPresentation, commensuration_indices, load, matrix_A
from .records import RecordWriter
from .topology import (
    betti_z2,
    ccc_correspondence,
    ends_at_scale,
    relative_acyclicity,
    rips,
    tree_certificate,
)


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError("value must be nonnegative")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--radius", type=_nonneg)
    common.add_argument("--inner", type=_nonneg)
    common.add_argument("--scale", type=_nonneg)
    common.add_argument("--outer-scale", type=_nonneg)
    common.add_argument("--outer-radius", type=_nonneg)
    common.add_argument("--cap", type=_nonneg)
    common.add_argument("--sample", type=_nonneg)
    common.add_argument("--range", type=_nonneg, dest="range_")
    common.add_argument("--word")
    common.add_argument("--coset-word")
    common.add_argument("--json", metavar="PATH")
    common.add_argument("--dot", metavar="PATH")
    common.add_argument("--budget", type=_nonneg, metavar="VERTICES")

    p = _Parser(prog="coarse-scope", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "info": "validated presentation, lattice indices, quotient degree bound",
        "ball": "ball in the Cayley graph",
        "quotient": "ball in the rough Cayley graph of G/H",
        "element": "normal form, A-matrix, height and fibre distortion of a word",
        "ends": "deep components of quotient balls minus inner balls",
        "distortion": "fibre distortion profile over a quotient ball",
        "hausdorff": "lower bounds on the Hausdorff distance from H to a coset",
        "projection": "quality of the floor(A_g v) projection formula",
        "rips": "Z/2 Betti numbers or relative 1-acyclicity of Rips complexes",
        "ccc": "complementary components of H in G versus in G/H",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("group", help="preset name or presentation JSON path")
        if name == "rips":
            sp.add_argument("space", nargs="?", choices=["ball", "quotient"], default="ball")
    sp = sub.add_parser("compare", parents=[common], help="side-by-side invariants of two groups")
    sp.add_argument("group")
    sp.add_argument("other")
    return p


def _need(args, name: str, default=None):
    v = getattr(args, name)
    if v is None:
        if default is None:
            raise ConfigError(f"--{name.rstrip('_').replace('_', '-')} is required for {args.command}")
        return default
    return v


def _summary(group: FibredPresentation) -> dict:
    return {
        "rank": group.rank,
        "letters": [
            {
                "name": L.name,
                "matrix": L.matrix.to_json(),
                "source_basis": L.source.to_json(),
                "image_basis": L.image.to_json(),
            }
            for L in group.letters
        ],
        "indices": group.indices(),
        "quotient_degree_bound": group.quotient_degree_bound(),
    }


def _write_dot(path: str | None, snap) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(snap.to_dot())


def _group_profile(out: RecordWriter, group: FibredPresentation, name: str, R: int, budget: int) -> dict:
    q = quotient_ball(group, R, budget)
    cert = tree_certificate(q)
    ends = [ends_at_scale(q, r).deep_count for r in range(1, R)] if R > 1 else []
    prof = distortion_profile(group, R)
    rec = {
        "name": name,
        "quotient_degree_bound": group.quotient_degree_bound(),
        "quotient_vertices": len(q),
        "tree_certificate": cert,
        "ends_deep_counts": ends,
        "hopf_evidence": "inf" if ends and ends[-1] >= 3 else (str(ends[-1]) if ends else "0"),
        "distortion_verdict": prof.verdict,
        "F_spectrum": [
            {"radius": row.radius, "maxF_log": row.max_F, "maxF_num": row.max_norm.numerator, "maxF_den": row.max_norm.denominator}
            for row in prof.rows
        ],
    }
    out.emit("compare_side", group.hash, **rec)
    return rec


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    with ExitStack() as stack:
        out = RecordWriter(stdout)
        try:
            args = build_parser().parse_args(argv)
            if args.json:
                out.sinks.append(stack.enter_context(open(args.json, "w", encoding="utf-8")))
            budget = args.budget if args.budget is not None else default_budget()
            _dispatch(args, out, budget)
            code = 0
        except CoarseScopeError as exc:
            out.emit("error", kind=exc.kind, message=str(exc))
            code = exc.code
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        out.emit("meta", version=__version__, elapsed_s=round(time.perf_counter() - t0, 6), exit_code=code)
        return code


def _dispatch(args, out: RecordWriter, budget: int) -> None:
    group = load(args.group)
    h = group.hash
    cmd = args.command
    if cmd == "info":
        out.emit("info", h, **_summary(group))
    elif cmd == "ball":
        R = _need(args, "radius")
        snap = ball(group, R, budget)
        out.emit("ball", h, radius=R, vertices=len(snap), edges=len(snap.edges), sphere_sizes=snap.sphere_sizes())
        if args.json:
            RecordWriter(out.sinks[-1]).emit("snapshot", h, **snap.to_json())
        _write_dot(args.dot, snap)
    elif cmd == "quotient":
        R = _need(args, "radius")
        snap = quotient_ball(group, R, budget)
        out.emit(
            "quotient", h, radius=R, vertices=len(snap), edges=len(snap.edges),
            sphere_sizes=snap.sphere_sizes(), tree_certificate=tree_certificate(snap) if R <= 8 else None,
        )
        if args.json:
            RecordWriter(out.sinks[-1]).emit("snapshot", h, **snap.to_json())
        _write_dot(args.dot, snap)
    elif cmd == "element":
        g = group.parse(_need(args, "word"))
        rec = {
            "element": g.to_json(),
            "coset": coset_key(g).to_json(),
            "A": matrix_A(g).to_json(),
            "commensuration_indices": list(commensuration_indices(g)),
            "fibre_distortion": fibre_distortion(g),
        }
        if group.rank == 1:
            rec["height"] = height(g)
        out.emit("element", h, **rec)
    elif cmd == "ends":
        R = _need(args, "radius")
        snap = quotient_ball(group, R, budget)
        top = args.inner if args.inner is not None else max(R - 1, 0)
        for r in range(0, min(top, max(R - 1, 0)) + 1):
            out.emit("ends", h, **ends_at_scale(snap, r).to_json())
    elif cmd == "distortion":
        R = _need(args, "radius")
        prof = distortion_profile(group, R)
        for row in prof.rows:
            out.emit("distortion_row", h, **row.to_json())
        kernel = aiq_kernel_search(group, R)
        out.emit(
            "distortion", h, verdict=prof.verdict, max_F=prof.max_F_overall, threshold=prof.threshold,
            aiq_kernel_witness=kernel.label() if kernel is not None else None,
        )
    elif cmd == "hausdorff":
        key = coset_key(group.parse(_need(args, "coset_word")))
        S = _need(args, "sample", 4)
        cap = _need(args, "cap", max(S, 20))
        out.emit("hausdorff", h, coset=key.label(), sample=S, cap=cap, **coset_hausdorff_lb(key, S, cap, budget).to_json())
    elif cmd == "projection":
        key = coset_key(group.parse(_need(args, "coset_word")))
        rng = _need(args, "range_", 10)
        cap = _need(args, "cap", 30)
        out.emit("projection", h, coset=key.label(), range=rng, cap=cap, **projection_quality(key, rng, cap, budget).to_json())
    elif cmd == "rips":
        make = quotient_ball if args.space == "quotient" else ball
        R = _need(args, "radius")
        r = _need(args, "scale", 1)
        inner = make(group, R, budget)
        cx = rips(inner, r)
        b0, b1 = betti_z2(cx)
        out.emit("rips", h, space=args.space, radius=R, beta0=b0, beta1=b1, **cx.to_json())
        if args.outer_radius is not None or args.outer_scale is not None:
            R2 = _need(args, "outer_radius", R)
            r2 = _need(args, "outer_scale", r)
            outer = inner if R2 == R else make(group, R2, budget)
            res = relative_acyclicity((inner, r), (outer, r2))
            out.emit("relative_acyclicity", h, space=args.space, inner=[R, r], outer=[R2, r2], **res.to_json())
    elif cmd == "ccc":
        R = _need(args, "radius")
        A = _need(args, "scale", 1)
        Rq = _need(args, "outer_radius", max(R - 1, 0))
        if Rq > R:
            raise ConfigError("--outer-radius (quotient radius) must not exceed --radius")
        out.emit("ccc", h, radius=R, A=A, quotient_radius=Rq, **ccc_correspondence(group, R, A, Rq, budget).to_json())
    elif cmd == "compare":
        other = load(args.other)
        R = _need(args, "radius")
        a = _group_profile(out, group, args.group, R, budget)
        b = _group_profile(out, other, args.other, R, budget)
        same_shape = (
            a["tree_certificate"]["interior_degrees"] == b["tree_certificate"]["interior_degrees"]
            and a["tree_certificate"]["beta1"] == b["tree_certificate"]["beta1"] == 0
            and a["quotient_vertices"] == b["quotient_vertices"]
        )
        va, vb = a["distortion_verdict"].kind, b["distortion_verdict"].kind
        out.emit(
            "compare", None, groups=[args.group, args.other], presentations=[group.hash, other.hash],
            radius=R, same_quotient_shape=same_shape, verdicts=[va, vb], distinguished=va != vb,
        )
    else:  # pragma: no cover - argparse enforces choices
        raise ConfigError(f"unknown command {cmd}")


def main() -> None:
    sys.exit(run())

