"""Command line entry point.

Subcommands: ``diagnose``, ``operator``, ``certify``, ``counterexample`` and
``verify-bounds``.  Reports are JSON documents with a fixed key order and
17 significant digits per float; identical inputs give byte-identical output.

Exit status: 0 on success, 1 when a check fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any

import numpy as np

from .battery import verify_bounds
from .compactness import (
    CertificateError,
    build_net_certificate,
    make_family,
    unit_ball_sample,
    verify_certificate,
)
from .counterexample import dichotomy_sweep, verify_separation, witness_family
from .operator import assemble, operator_norm, parse_p, write_triplets
from .regularity import DEFAULT_GRID, regularity_report
from .space import SpaceError, ball, read_space, triangle_violation

log = logging.getLogger("avgcompact")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad flag or input file; the message names the offending field."""


# -- report serialization --------------------------------------------------------


def _encode(obj: Any, level: int, out: list[str]) -> None:
    pad = "  " * level
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format(x, ".17g") if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}  {json.dumps(str(key))}: ")
            _encode(val, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
        elif all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items):
            out.append("[")
            for k, v in enumerate(items):
                if k:
                    out.append(", ")
                _encode(v, level + 1, out)
            out.append("]")
        else:
            out.append("[\n")
            for k, v in enumerate(items):
                out.append(pad + "  ")
                _encode(v, level + 1, out)
                out.append(",\n" if k < len(items) - 1 else "\n")
            out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    out: list[str] = []
    _encode(obj, 0, out)
    return "".join(out) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- argument helpers -----------------------------------------------------------------


def _floats(text: str, flag: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"{flag}: expected comma separated numbers, got {text!r}") from None
    if not vals:
        raise InputError(f"{flag}: empty list")
    return vals


def _positive(value: float | None, flag: str) -> float:
    if value is None:
        raise InputError(f"{flag}: required")
    if not (math.isfinite(value) and value > 0):
        raise InputError(f"{flag}: must be a positive number, got {value}")
    return value


def _space(args):
    if not args.space:
        raise InputError("--space: required")
    try:
        space = read_space(args.space)
    except FileNotFoundError:
        raise InputError(f"--space: no such file {args.space!r}") from None
    except OSError as exc:
        raise InputError(f"--space: cannot read {args.space!r} ({exc})") from None
    except SpaceError as exc:
        raise InputError(f"space file {args.space}: {exc}") from None
    if getattr(args, "validate_triangle", False):
        bad = triangle_violation(space)
        if bad is not None:
            i, j, k = bad
            raise InputError(f"distance_matrix: triangle inequality fails for ({i}, {j}) via {k}")
    return space


def _family(space, spec: str, p: float):
    if spec.startswith("sample:"):
        parts = spec.split(":")
        try:
            count, seed = int(parts[1]), int(parts[2])
        except (IndexError, ValueError):
            raise InputError(f"--family: expected sample:count:seed, got {spec!r}") from None
        if count < 1:
            raise InputError("--family: sample count must be positive")
        return unit_ball_sample(space, p, count, seed)
    try:
        with open(spec, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"--family: no such file {spec!r}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"--family: {spec} is not valid JSON ({exc})") from None
    rows = doc.get("functions") if isinstance(doc, dict) else doc
    if not isinstance(rows, list) or not rows:
        raise InputError("functions: expected a nonempty list of functions")
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != space.n:
            raise InputError(f"functions[{k}]: expected {space.n} values")
    try:
        return make_family(space, rows, p)
    except (TypeError, ValueError) as exc:
        raise InputError(f"functions: {exc}") from None


def _subset(space, spec: str):
    if spec == "all":
        return space.all()
    parts = spec.split(":")
    if len(parts) == 3 and parts[0] == "ball":
        try:
            center, radius = int(parts[1]), float(parts[2])
        except ValueError:
            raise InputError(f"--subset: expected ball:center:radius, got {spec!r}") from None
        if not 0 <= center < space.n or radius < 0:
            raise InputError(f"--subset: center or radius out of range in {spec!r}")
        return ball(space, center, radius)
    raise InputError(f"--subset: expected 'all' or ball:center:radius, got {spec!r}")


def _p(text: str) -> float:
    try:
        return parse_p(text)
    except ValueError:
        raise InputError(f"--p: must be a number >= 1 or 'inf', got {text!r}") from None


# -- subcommands -------------------------------------------------------------------------


def cmd_diagnose(args) -> tuple[int, Any, str | None]:
    space = _space(args)
    scales = [_positive(s, "--s") for s in _floats(args.s, "--s")]
    if args.grid < 2:
        raise InputError("--grid: must be at least 2")
    sections, rows = [], []
    for s in scales:
        rep = regularity_report(space, s, resolution=args.grid)
        sections.append({
            "s": rep.s,
            "gamma": rep.gamma,
            "gamma_argmax": rep.gamma_argmax,
            "inf_ball": rep.inf_ball,
            "star_modulus": [{"delta": m.delta, "value": m.value, "argmax": m.argmax} for m in rep.star_modulus],
            "symdiff_modulus": [{"delta": m.delta, "value": m.value, "pair": list(m.pair)} for m in rep.symdiff_modulus],
            "prop32": {
                "net_size": rep.prop32.net_size,
                "inf_ball_on_E": rep.prop32.inf_ball_on_E,
                "doubling_on_E": rep.prop32.doubling_on_E,
            },
        })
        rows += [[rep.s, "star", m.delta, m.value, m.argmax] for m in rep.star_modulus]
        rows += [[rep.s, "symdiff", m.delta, m.value, f"{m.pair[0]}-{m.pair[1]}"] for m in rep.symdiff_modulus]
    doc = {"command": "diagnose", "n": space.n, "total_mass": space.total_mass,
           "diameter": space.diameter, "grid": args.grid, "scales": sections}
    table = _csv(["s", "modulus", "delta", "value", "argmax"], rows)
    return EXIT_OK, doc, table


def cmd_operator(args):
    space = _space(args)
    r = _positive(args.r, "--r")
    op = assemble(space, r)
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            write_triplets(op, fh)
    doc = {
        "command": "operator",
        "n": space.n,
        "r": r,
        "nnz": op.nnz,
        "norm_1": operator_norm(space, op, 1),
        "norm_inf": operator_norm(space, op, math.inf),
        "min_ball_mass": float(op.ball_mass.min()),
        "max_ball_mass": float(op.ball_mass.max()),
        "export": args.export,
    }
    table = _csv(["i", "ball_size", "ball_mass"],
                 [[i, len(op.members(i)), float(op.ball_mass[i])] for i in range(op.n)])
    return EXIT_OK, doc, table


def cmd_certify(args):
    space = _space(args)
    r = _positive(args.r, "--r")
    eps = _positive(args.epsilon, "--epsilon")
    p = _p(args.p)
    family = _family(space, args.family, p)
    E = _subset(space, args.subset)
    if len(E) == 0:
        raise InputError("--subset: selects no points")
    doc: dict[str, Any] = {"command": "certify", "r": r, "p": args.p, "epsilon": eps,
                           "family_size": len(family), "subset_size": len(E)}
    try:
        cert = build_net_certificate(space, r, family, eps, E, resolution=args.grid)
    except CertificateError as exc:
        doc.update({"status": "fail", "reason": str(exc), "threshold": exc.threshold})
        return EXIT_FAIL, doc, None
    check = verify_certificate(space, assemble(space, r), cert, family)
    doc.update({
        "status": "pass" if check.passed else "fail",
        "delta": cert.delta,
        "num_centers": len(cert.centers),
        "grid_step": cert.grid_step,
        "K": cert.size,
        "achieved_radius": cert.achieved_radius,
        "verified_radius": check.achieved_radius,
        "worst_member": check.worst_member,
    })
    if args.full:
        doc["certificate"] = {
            "centers": cert.centers,
            "grids": [g.tolist() for g in cert.grids],
            "occupied": [list(a) for a in cert.occupied],
            "representatives": cert.representative_indices(),
        }
    table = _csv(["key", "value"], [[k, v] for k, v in doc.items() if not isinstance(v, dict)])
    return (EXIT_OK if check.passed else EXIT_FAIL), doc, table


def cmd_counterexample(args):
    s = _positive(args.s, "--s")
    if args.sweep:
        lengths = [_positive(L, "--sweep") for L in _floats(args.sweep, "--sweep")]
        rows = dichotomy_sweep(lengths, s, args.mode)
        ok = all(row.min_pairwise >= row.bound - 1e-10 for row in rows)
        doc = {"command": "counterexample", "mode": args.mode, "s": s, "sweep": [
            {"L": row.length, "num_centers": row.num_centers, "min_pairwise": row.min_pairwise,
             "covering_number": row.covering_number, "bound": row.bound} for row in rows]}
        table = _csv(["L", "num_centers", "min_pairwise", "covering_number", "bound"],
                     [[row.length, row.num_centers, row.min_pairwise, row.covering_number, row.bound] for row in rows])
        return (EXIT_OK if ok else EXIT_FAIL), doc, table
    space = _space(args)
    fam = witness_family(space, s, args.mode)
    sep = verify_separation(space, fam)
    doc = {
        "command": "counterexample", "mode": args.mode, "s": s, "n": space.n,
        "num_centers": len(fam), "centers": fam.centers, "c_bound": fam.c_bound,
        "bound": sep.bound, "min_pairwise": sep.min_pairwise,
        "min_pair": None if sep.pair is None else list(sep.pair),
        "status": "pass" if sep.passed else "fail",
    }
    if args.full:
        doc["separation_matrix"] = fam.separation_matrix
    table = _csv(["center", "index"], [[k, c] for k, c in enumerate(fam.centers)])
    return (EXIT_OK if sep.passed else EXIT_FAIL), doc, table


def cmd_verify_bounds(args):
    space = _space(args)
    r = None if args.r is None else _positive(args.r, "--r")
    if args.functions < 1:
        raise InputError("--functions: must be positive")
    rep = verify_bounds(space, r, seed=args.seed, functions=args.functions)
    doc = {"command": "verify-bounds", "r": rep.radius, "seed": rep.seed,
           "status": "pass" if rep.passed else "fail", "checks": [
               {"name": c.name, "cases": c.cases, "violations": c.violations,
                "witness": c.witness, "note": c.note} for c in rep.checks]}
    table = _csv(["check", "cases", "violations"], [[c.name, c.cases, c.violations] for c in rep.checks])
    return (EXIT_OK if rep.passed else EXIT_FAIL), doc, table


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space file (JSON)")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--csv", action="store_true", help="emit a flat CSV table instead of JSON")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--validate-triangle", action="store_true",
                        help="check the triangle inequality of matrix spaces (O(n^3))")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="avgcompact",
        description="Averaging operators on finite metric measure spaces: regularity, certificates, witnesses.",
        epilog="Exit status: 0 on success, 1 when a check fails, 2 on bad input.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagnose", parents=[common], help="doubling constants and regularity moduli")
    p.add_argument("--s", required=True, help="scale or comma separated scales")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="delta grid resolution")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("operator", parents=[common], help="assemble the averaging operator")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--export", help="write sparse triplets 'i j value' to this path")
    p.set_defaults(func=cmd_operator)

    p = sub.add_parser("certify", parents=[common], help="build and verify an epsilon-net certificate")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--p", default="1", help="norm exponent, a number >= 1 or 'inf'")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--family", default="sample:50:0", help="JSON file or sample:count:seed")
    p.add_argument("--subset", default="all", help="'all' or ball:center:radius")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--full", action="store_true", help="include the full certificate")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("counterexample", parents=[common], help="separated witness families")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--mode", choices=["l1", "linf"], default="l1")
    p.add_argument("--sweep", help="comma separated lengths L; uses unit-spacing grids on [0, L]")
    p.add_argument("--full", action="store_true", help="include the separation matrix")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("verify-bounds", parents=[common], help="randomized inequality battery")
    p.add_argument("--r", type=float)
    p.add_argument("--functions", type=int, default=20)
    p.set_defaults(func=cmd_verify_bounds)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=stderr,
                        format="%(levelname)s %(message)s")
    try:
        status, doc, table = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    text = table if args.csv and table is not None else dumps(doc)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: --output: {exc}", file=stderr)
            return EXIT_INPUT
    else:
        stdout.write(text)
    log.info("%s finished with status %d", args.command, status)
    return status


def main() -> None:
    sys.exit(run())
