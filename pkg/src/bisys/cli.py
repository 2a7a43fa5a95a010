"""Command line front end.  Every document written carries its schema and the
sha256 of the input files it was computed from.  Exit codes: 0 ran, 2 input
error, 3 internal invariant violation."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys

from . import bisystem as bsm
from . import subshift as ssm
from .afinv import afinv_report, compare_invariants, dim_group, verify_ladder
from .bisystem import to_dot, validate_axioms
from .canonical import build_canonical, detect_stabilization
from .configuration import (extend_rectangle, extract_zigzag, fill_triangle, rectangle_from_zigzag,
                            window_from_dict, zigzag_from_dict)
from .dynamics import condition_I, essential_freeness_probe, groupoid_dump, irreducibility, pi_condition_I_probe
from .errors import BisysError, InputError
from .tower import Tower


def _read(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return doc, raw


def _hash(*raws: bytes) -> str:
    h = hashlib.sha256()
    for r in raws:
        h.update(hashlib.sha256(r).digest())
    return h.hexdigest()


def _load_system(path: str, levels: int):
    """Subshift spec or bisystem file -> (bisystem, presentation or None, raw bytes)."""
    doc, raw = _read(path)
    if isinstance(doc, dict) and doc.get("schema") == bsm.SCHEMA:
        return bsm.from_dict(doc), None, raw
    p = ssm.from_dict(doc)
    return build_canonical(p, levels), p, raw


def _emit(doc: dict, args) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _vertex(B, spec: str):
    """``LEVEL:INDEX``, a vertex name ``v3_1``, or a vertex id."""
    if ":" in spec:
        l, i = spec.split(":", 1)
        return int(l), int(i)
    if spec.startswith("v") and "_" in spec:
        l, i = spec[1:].split("_", 1)
        return int(l), int(i)
    for l, ids in enumerate(B.levels):
        if spec in ids:
            return l, ids.index(spec)
    raise InputError(f"unknown vertex {spec!r}")


def _word(alphabet, text: str):
    idx = {s: i for i, s in enumerate(alphabet)}
    items = text.split(".") if "." in text else list(text)
    try:
        return tuple(idx[s] for s in items if s != "")
    except KeyError as exc:
        raise InputError(f"symbol {exc.args[0]!r} not in alphabet") from None


# commands

def cmd_ingest(args):
    doc, raw = _read(args.spec)
    p = ssm.from_dict(doc)
    ess = ssm.essentialize(p)
    out = p.to_dict()
    out.update({"input_hash": _hash(raw), "essential": ssm.is_essential(p),
                "graph_states": ess.graph.nstates, "graph_edges": len(ess.graph.edges)})
    _emit(out, args)
    return 0


def cmd_build(args):
    doc, raw = _read(args.spec)
    p = ssm.from_dict(doc)
    B = build_canonical(p, args.levels)
    rep = validate_axioms(B)
    out = bsm.to_dict(B, _hash(raw))
    out["validation"] = rep.to_dict()
    st = detect_stabilization(B)
    out["stabilization"] = st.to_dict() if st else None
    _emit(out, args)
    return 0 if rep.ok else 3


def cmd_validate(args):
    B, _, raw = _load_system(args.input, args.levels)
    rep = validate_axioms(B)
    out = {"schema": "validation/1", "input_hash": _hash(raw), **rep.to_dict()}
    _emit(out, args)
    return 0 if rep.ok else 2


def cmd_render(args):
    B, _, raw = _load_system(args.input, args.levels)
    if args.format == "dot":
        text = to_dot(B)
    elif args.format == "table":
        rows = [f"# input_hash {_hash(raw)}", "level\tvertex\tP-size\tE- out\tE+ out"]
        T = Tower(B, stab=None)
        for l in range(B.top + 1):
            for i in range(B.m(l)):
                dn = ",".join(f"{B.alphabet[a]}>{B.name(l - 1, t)}" for s, t, a in B.minus[l - 1] if s == i) if l else ""
                up = ",".join(f"{B.alphabet[a]}>{B.name(l + 1, t)}" for s, t, a in B.plus[l] if s == i) if l < B.top else ""
                rows.append(f"{l}\t{B.name(l, i)}\t{T.psize(l, i)}\t{dn}\t{up}")
        text = "\n".join(rows) + "\n"
    else:
        _emit(bsm.to_dict(B, _hash(raw)), args)
        return 0
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_analyze(args):
    B, _, raw = _load_system(args.input, args.levels)
    T = Tower(B)
    which = args.which
    if which == "condition-i":
        res = condition_I(T, args.bound, args.depth).to_dict()
    elif which == "irreducibility":
        res = irreducibility(T, args.bound, args.depth).to_dict()
    elif which == "essential-freeness":
        res = {str(n): v.to_dict() for n, v in essential_freeness_probe(T, args.bound, args.depth).items()}
    else:
        res = pi_condition_I_probe(T, args.depth, seed=args.seed).to_dict()
    out = {"schema": "verdict/1", "input_hash": _hash(raw), "check": which,
           "bounds": {"bound": args.bound, "depth": args.depth, "levels": B.top, "seed": args.seed},
           "stabilized": T.stable, "result": res}
    _emit(out, args)
    return 0


def cmd_patch(args):
    B, _, raw = _load_system(args.input, args.levels)
    T = Tower(B)
    raws = [raw]
    if args.op == "fill-triangle":
        l, v = _vertex(B, args.vertex)
        mu = _word(B.alphabet, args.word)
        if len(mu) != l:
            raise InputError(f"word length {len(mu)} does not match vertex level {l}")
        w = fill_triangle(T, v, mu, args.p)
        body = w.to_dict(B.alphabet)
    elif args.op == "from-zigzag":
        doc, zraw = _read(args.patch)
        raws.append(zraw)
        zd = doc.get("zigzag", doc)
        z = zigzag_from_dict(zd, B.alphabet)
        z.validate(T)
        p, q = args.corner
        H, W = args.extents
        w = rectangle_from_zigzag(T, z, p, q, H, W)
        body = w.to_dict(B.alphabet)
        body["zigzag_roundtrip"] = extract_zigzag(w, p, q, max(H, W)).take(max(H, W)) == z.take(max(H, W))
    else:
        doc, wraw = _read(args.patch)
        raws.append(wraw)
        R = window_from_dict(doc.get("patch", doc), B.alphabet)
        if R.corner is None or R.extents is None:
            raise InputError("extension needs a rectangle patch with corner and extents")
        mu = _word(B.alphabet, args.word)
        left = extend_rectangle(T, R, mu, "left")
        right = extend_rectangle(T, R, mu, "right")
        if left.cells != right.cells or left.labels != right.labels:
            raise BisysError("extension orders disagree")
        body = left.to_dict(B.alphabet)
        body["orders_agree"] = True
        body["restriction_matches"] = R.agrees_with(left)
    out = {"schema": "patch/1", "input_hash": _hash(*raws), "patch": body}
    _emit(out, args)
    return 0


def cmd_invariants(args):
    B, _, raw = _load_system(args.input, args.levels)
    T = Tower(B)
    doc = afinv_report(T, args.stages, {"input_hash": _hash(raw)})
    _emit(doc, args)
    return 0


def cmd_compare(args):
    docA, rawA = _read(args.spec_a)
    pA = ssm.from_dict(docA)
    raws = [rawA]
    if args.self_recode:
        pB = ssm.higher_block(pA, args.self_recode)
        labelB = f"{args.self_recode}-block recoding"
    elif args.spec_b:
        docB, rawB = _read(args.spec_b)
        raws.append(rawB)
        pB = ssm.from_dict(docB)
        labelB = "second input"
    else:
        raise InputError("compare needs a second spec or --self-recode")
    TA, TB = Tower(build_canonical(pA, args.levels)), Tower(build_canonical(pB, args.levels))
    n = args.stages + 3
    GA, GB = dim_group(TA, stages=n), dim_group(TB, stages=n)
    res = compare_invariants(GA, GB, args.stages)
    out = {"schema": "afinv/1", "input_hash": _hash(*raws), "comparison": res.to_dict(),
           "second": labelB,
           "systems": [GA.to_dict(), GB.to_dict()]}
    if res.ladder:
        out["comparison"]["ladder_verified"] = verify_ladder(GA, GB, res)
    if args.self_recode:
        out["recoding"] = {"k": args.self_recode,
                           "m": [[TA.m(l) for l in range(args.levels + 1)], [TB.m(l) for l in range(args.levels + 1)]],
                           "stabilization_onsets": [TA.stab.onset if TA.stab else None, TB.stab.onset if TB.stab else None]}
    _emit(out, args)
    return 0


def cmd_groupoid(args):
    B, _, raw = _load_system(args.input, args.levels)
    T = Tower(B)
    n = args.bound
    dump = groupoid_dump(T, samples=args.samples, n_range=tuple(range(-n, n + 1)), M=args.window, seed=args.seed)
    out = {"schema": "groupoid/1", "input_hash": _hash(raw), "seed": args.seed, **dump}
    _emit(out, args)
    return 0 if dump["laws"]["failures"] == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bisys", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, levels=6):
        p.add_argument("--levels", "-L", type=int, default=levels, help="top level L of the canonical bisystem")
        p.add_argument("--output", "-o", help="write to this file instead of stdout")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("ingest", help="parse and normalize a subshift spec")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-canonical", help="build the canonical bisystem")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("validate", help="check the bisystem axioms")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("render", help="DOT, table or JSON dump of a bisystem")
    p.add_argument("input")
    p.add_argument("--format", choices=("json", "dot", "table"), default="dot")
    common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("analyze", help="dynamical verdicts")
    p.add_argument("which", choices=("condition-i", "irreducibility", "essential-freeness", "pi-condition-i"))
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--bound", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("patch", help="patch operations")
    p.add_argument("op", choices=("fill-triangle", "extend", "from-zigzag"))
    p.add_argument("input", help="subshift spec or bisystem file")
    p.add_argument("--vertex", help="LEVEL:INDEX or vertex name (fill-triangle)")
    p.add_argument("--word", help="symbols, one character each or dot separated")
    p.add_argument("--p", type=int, default=0, help="row of the triangle corner")
    p.add_argument("--patch", help="patch/1 file (extend, from-zigzag)")
    p.add_argument("--corner", type=int, nargs=2, default=(0, 2))
    p.add_argument("--extents", type=int, nargs=2, default=(2, 2))
    common(p)
    p.set_defaults(func=cmd_patch)

    p = sub.add_parser("invariants", help="stage dimension-group system")
    p.add_argument("input")
    p.add_argument("--stages", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("compare", help="compare stage systems of two subshifts")
    p.add_argument("spec_a")
    p.add_argument("spec_b", nargs="?")
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--self-recode", type=int, default=0, metavar="K")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("groupoid-dump", help="sampled groupoid elements with law checks")
    p.add_argument("input")
    p.add_argument("--bound", type=int, default=1, help="largest |n|")
    p.add_argument("--window", type=int, default=2, help="corner (-M, M) for class members")
    p.add_argument("--samples", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_groupoid)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("levels", "depth", "bound", "stages", "samples", "window"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            print(f"error: --{name} must be positive", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except BisysError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except RecursionError:
        print("error: recursion limit reached", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
