"""Leveled vertex sets with downward (E-) and upward (E+) labeled edges.

Vertices are addressed as ``(level, index)``.  ``minus[l]`` holds the E- edges
from level ``l+1`` down to level ``l`` and ``plus[l]`` the E+ edges from level
``l`` up to level ``l+1``; each edge is ``(src_index, tgt_index, label)``.
"""
from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousSquares, InvalidPresentation

SCHEMA = "bisystem/1"


def vertex_id(level: int, words) -> str:
    """Stable id derived from the sorted word set of a canonical vertex."""
    text = f"{level}:" + ";".join(",".join(map(str, w)) for w in sorted(words))
    return "h" + hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass
class LambdaBiSystem:
    alphabet: tuple
    levels: list                      # list of lists of vertex ids
    minus: list                       # minus[l]: edges V_{l+1} -> V_l
    plus: list                        # plus[l]: edges V_l -> V_{l+1}
    phi: dict | None = None           # (l, u, v, b, alpha, beta) -> d
    profiles: dict | None = None      # canonical provenance, see canonical.py
    words: list | None = None         # optional canonical word sets per vertex
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def m(self, l: int) -> int:
        return len(self.levels[l])

    def name(self, l: int, i: int) -> str:
        return f"v{l}_{i}"

    def _lookup(self):
        c = self._cache.get("lookup")
        if c is not None:
            return c
        L = self.top
        down = [dict() for _ in range(L + 1)]       # down[l][(i, a)] -> [j] at l-1
        back = [dict() for _ in range(L + 1)]       # back[l][(i, a)] -> [j] at l-1
        pout = [dict() for _ in range(L + 1)]       # pout[l][i] -> [(a, j)] at l+1
        min_in = [dict() for _ in range(L + 1)]     # min_in[l][i] -> [(a, j)] from l+1
        for l in range(L):
            for s, t, a in self.minus[l]:
                down[l + 1].setdefault((s, a), []).append(t)
                min_in[l].setdefault(t, []).append((a, s))
            for s, t, a in self.plus[l]:
                back[l + 1].setdefault((t, a), []).append(s)
                pout[l].setdefault(s, []).append((a, t))
        for tab in (pout, min_in):
            for d in tab:
                for k in d:
                    d[k].sort()
        c = (down, back, pout, min_in)
        self._cache["lookup"] = c
        return c

    def down(self, l: int, i: int, a: int):
        """Target at level ``l-1`` of the E- edge from ``(l, i)`` labeled ``a``."""
        r = self._lookup()[0][l].get((i, a))
        return r[0] if r else None

    def back(self, l: int, i: int, a: int):
        """Source at level ``l-1`` of the E+ edge into ``(l, i)`` labeled ``a``."""
        r = self._lookup()[1][l].get((i, a))
        return r[0] if r else None

    def plus_out(self, l: int, i: int) -> list:
        return self._lookup()[2][l].get(i, [])

    def minus_in(self, l: int, i: int) -> list:
        return self._lookup()[3][l].get(i, [])

    def edge_count(self) -> tuple:
        return sum(len(e) for e in self.minus), sum(len(e) for e in self.plus)


# Word sets

def follower_set(B: LambdaBiSystem, l: int, i: int) -> set:
    """Label words of descending E- paths from ``(l, i)`` to level 0."""
    memo = B._cache.setdefault("F", {})

    def rec(l, i):
        key = (l, i)
        if key in memo:
            return memo[key]
        if l == 0:
            r = frozenset({()})
        else:
            r = frozenset((a,) + w for s, t, a in _edges_from(B, l) if s == i for w in rec(l - 1, t))
        memo[key] = r
        return r

    return set(rec(l, i))


def _edges_from(B, l):
    idx = B._cache.setdefault("minus_by_level", {})
    if l not in idx:
        idx[l] = sorted(B.minus[l - 1])
    return idx[l]


def predecessor_set(B: LambdaBiSystem, l: int, i: int) -> set:
    """Label words of ascending E+ paths from level 0 ending at ``(l, i)``."""
    memo = B._cache.setdefault("P", {})

    def rec(l, i):
        key = (l, i)
        if key in memo:
            return memo[key]
        if l == 0:
            r = frozenset({()})
        else:
            r = frozenset(w + (a,) for s, t, a in B.plus[l - 1] if t == i for w in rec(l - 1, s))
        memo[key] = r
        return r

    return set(rec(l, i))


# Validation

def _corner_sets(B: LambdaBiSystem, l: int):
    """Outer and inner corners between levels ``l`` and ``l+2``.

    Outer corner: f+ from u (level l) to b, f- from v (level l+2) to b.
    Inner corner: e- from d to u, e+ from d to v.  Keys are ``(u, v)``.
    """
    outer, inner = {}, {}
    into_b = {}
    for s, t, a in B.minus[l + 1]:
        into_b.setdefault(t, []).append((s, a))
    for u, b, alpha in B.plus[l]:
        for v, beta in into_b.get(b, ()):
            outer.setdefault((u, v), []).append((b, alpha, beta))
    up_from_d = {}
    for d, v, alpha in B.plus[l + 1]:
        up_from_d.setdefault(d, []).append((v, alpha))
    for d, u, beta in B.minus[l]:
        for v, alpha in up_from_d.get(d, ()):
            inner.setdefault((u, v), []).append((d, alpha, beta))
    return outer, inner


def square_map(B: LambdaBiSystem) -> dict:
    """The square bijection: explicit ``phi`` if given, else reconstructed from labels."""
    if B.phi is not None:
        return dict(B.phi)
    cached = B._cache.get("phi")
    if cached is not None:
        return cached
    phi = {}
    for l in range(B.top - 1):
        outer, inner = _corner_sets(B, l)
        for (u, v), corners in outer.items():
            ins = Counter((alpha, beta) for _, alpha, beta in inner.get((u, v), []))
            for b, alpha, beta in corners:
                if ins[(alpha, beta)] > 1 or Counter((x, y) for _, x, y in corners)[(alpha, beta)] > 1:
                    raise AmbiguousSquares(f"labels do not determine squares at level {l}, corner {(u, v)}")
                ds = [d for d, x, y in inner.get((u, v), []) if (x, y) == (alpha, beta)]
                if ds:
                    phi[(l, u, v, b, alpha, beta)] = ds[0]
    B._cache["phi"] = phi
    return phi


@dataclass
class ValidationReport:
    level: int
    results: dict

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.results.values())

    def to_dict(self) -> dict:
        return {"verified_to_level": self.level, "ok": self.ok, "axioms": self.results}


def _res(ok, witness=None, detail=""):
    return {"ok": ok, "witness": witness, "detail": detail}


def validate_axioms(B: LambdaBiSystem) -> ValidationReport:
    """Check every axiom up to the top level; failures carry a witness."""
    L = B.top
    res = {}
    res["top-singleton"] = _res(B.m(0) == 1, None if B.m(0) == 1 else {"level": 0, "count": B.m(0)},
                                "V_0 is a singleton")

    w = None
    for l in range(L):
        seen = {}
        for s, t, a in sorted(B.minus[l]):
            if (s, a) in seen:
                w = {"level": l + 1, "vertex": B.name(l + 1, s), "label": B.alphabet[a],
                     "edges": [[B.name(l + 1, s), B.name(l, x), B.alphabet[a]] for x in (seen[(s, a)], t)]}
                break
            seen[(s, a)] = t
        if w:
            break
    res["right-resolving"] = _res(w is None, w, "E- labels distinct per source")

    w = None
    for l in range(L):
        seen = {}
        for s, t, a in sorted(B.plus[l], key=lambda e: (e[1], e[2], e[0])):
            if (t, a) in seen:
                w = {"level": l + 1, "vertex": B.name(l + 1, t), "label": B.alphabet[a],
                     "edges": [[B.name(l, x), B.name(l + 1, t), B.alphabet[a]] for x in (seen[(t, a)], s)]}
                break
            seen[(t, a)] = s
        if w:
            break
    res["left-resolving"] = _res(w is None, w, "E+ labels distinct per target")

    w = None
    ambiguous = None
    for l in range(L - 1):
        outer, inner = _corner_sets(B, l)
        for key in sorted(set(outer) | set(inner)):
            co = Counter((a, b) for _, a, b in outer.get(key, []))
            ci = Counter((a, b) for _, a, b in inner.get(key, []))
            if co != ci:
                w = {"level": l, "u": B.name(l, key[0]), "v": B.name(l + 2, key[1]),
                     "outer": sorted(co.elements()), "inner": sorted(ci.elements())}
                break
            if B.phi is None and ambiguous is None and any(c > 1 for c in co.values()):
                ambiguous = {"level": l, "u": B.name(l, key[0]), "v": B.name(l + 2, key[1])}
        if w:
            break
    detail = "corner label multisets agree"
    ok = w is None
    if ok and ambiguous is not None:
        ok, w, detail = False, ambiguous, "AmbiguousSquares: explicit phi required"
    if ok and B.phi is not None:
        bad = _check_phi(B)
        if bad:
            ok, w, detail = False, bad, "phi is not a label-preserving bijection"
    res["local-property"] = _res(ok, w, detail)

    w = None
    for l in range(L + 1):
        for i in range(B.m(l)):
            F, P = follower_set(B, l, i), predecessor_set(B, l, i)
            if F != P:
                diff = sorted(F ^ P)[0]
                w = {"vertex": B.name(l, i), "word": "".join(B.alphabet[a] for a in diff),
                     "in_follower": diff in F}
                break
        if w:
            break
    res["fpcc"] = _res(w is None, w, "F(v) = P(v)")

    w = None
    for l in range(L + 1):
        for i in range(B.m(l)):
            missing = []
            if l < L:
                if not B.plus_out(l, i):
                    missing.append("outgoing E+")
                if not B.minus_in(l, i):
                    missing.append("incoming E-")
            if l > 0:
                if not any(s == i for s, _, _ in B.minus[l - 1]):
                    missing.append("outgoing E-")
                if not any(t == i for _, t, _ in B.plus[l - 1]):
                    missing.append("incoming E+")
            if missing:
                w = {"vertex": B.name(l, i), "missing": missing}
                break
        if w:
            break
    res["essential"] = _res(w is None, w, "every vertex has the required edges")
    return ValidationReport(L, res)


def _check_phi(B: LambdaBiSystem):
    for l in range(B.top - 1):
        outer, inner = _corner_sets(B, l)
        for key, corners in outer.items():
            targets = []
            for b, alpha, beta in corners:
                d = B.phi.get((l, key[0], key[1], b, alpha, beta))
                if d is None or (d, alpha, beta) not in inner.get(key, []):
                    return {"level": l, "corner": [B.name(l, key[0]), B.name(l + 2, key[1])], "middle": b}
                targets.append((d, alpha, beta))
            if len(set(targets)) != len(targets):
                return {"level": l, "corner": [B.name(l, key[0]), B.name(l + 2, key[1])], "duplicate": True}
    return None


# Incidence

@dataclass
class IncidenceMatrices:
    minus: list          # minus[l]: m(l+1) x m(l)
    plus: list           # plus[l]: m(l) x m(l+1)
    minus_slices: list   # minus_slices[l][a]
    plus_slices: list


def incidence(B: LambdaBiSystem) -> IncidenceMatrices:
    k = len(B.alphabet)
    mm, pp, ms, ps = [], [], [], []
    for l in range(B.top):
        sl = np.zeros((k, B.m(l + 1), B.m(l)), dtype=np.int64)
        for s, t, a in B.minus[l]:
            sl[a, s, t] += 1
        ms.append(list(sl))
        mm.append(sl.sum(axis=0))
        sp = np.zeros((k, B.m(l), B.m(l + 1)), dtype=np.int64)
        for s, t, a in B.plus[l]:
            sp[a, s, t] += 1
        ps.append(list(sp))
        pp.append(sp.sum(axis=0))
    return IncidenceMatrices(mm, pp, ms, ps)


# Serialization

def to_dict(B: LambdaBiSystem, input_hash: str | None = None) -> dict:
    levels = []
    for l, ids in enumerate(B.levels):
        row = []
        for i, vid in enumerate(ids):
            entry = {"id": vid, "name": B.name(l, i)}
            if B.words is not None:
                entry["words"] = ["".join(B.alphabet[a] for a in w) if _short(B) else
                                  [B.alphabet[a] for a in w] for w in sorted(B.words[l][i])]
            row.append(entry)
        levels.append(row)
    edges = []
    for l in range(B.top):
        for s, t, a in sorted(B.minus[l]):
            edges.append({"src": B.levels[l + 1][s], "tgt": B.levels[l][t], "label": B.alphabet[a], "kind": "-"})
        for s, t, a in sorted(B.plus[l]):
            edges.append({"src": B.levels[l][s], "tgt": B.levels[l + 1][t], "label": B.alphabet[a], "kind": "+"})
    d = {"schema": SCHEMA, "alphabet": list(B.alphabet), "m": [B.m(l) for l in range(B.top + 1)],
         "levels": levels, "edges": edges}
    if input_hash is not None:
        d["input_hash"] = input_hash
    if B.phi is not None:
        d["phi"] = [{"level": l, "u": B.levels[l][u], "v": B.levels[l + 2][v], "outer_middle": B.levels[l + 1][b],
                     "alpha": B.alphabet[al], "beta": B.alphabet[be], "inner_middle": B.levels[l + 1][dd]}
                    for (l, u, v, b, al, be), dd in sorted(B.phi.items())]
    if B.profiles is not None:
        d["profiles"] = B.profiles
    return d


def _short(B):
    return all(len(s) == 1 for s in B.alphabet)


def from_dict(d: dict) -> LambdaBiSystem:
    if not isinstance(d, dict) or d.get("schema") != SCHEMA:
        raise InvalidPresentation(f"expected a {SCHEMA} document")
    try:
        alphabet = tuple(str(s) for s in d["alphabet"])
        aidx = {s: i for i, s in enumerate(alphabet)}
        levels, where, words = [], {}, []
        has_words = True
        for l, row in enumerate(d["levels"]):
            ids, wl = [], []
            for i, v in enumerate(row):
                vid = v["id"] if isinstance(v, dict) else str(v)
                if vid in where:
                    raise InvalidPresentation(f"duplicate vertex id {vid!r}")
                where[vid] = (l, i)
                ids.append(vid)
                if isinstance(v, dict) and "words" in v:
                    wl.append(frozenset(tuple(aidx[str(s)] for s in w) for w in v["words"]))
                else:
                    has_words = False
            levels.append(ids)
            words.append(wl)
        L = len(levels) - 1
        minus = [[] for _ in range(L)]
        plus = [[] for _ in range(L)]
        for e in d["edges"]:
            (ls, s), (lt, t) = where[e["src"]], where[e["tgt"]]
            a = aidx[str(e["label"])]
            if e["kind"] == "-":
                if ls != lt + 1:
                    raise InvalidPresentation(f"E- edge {e} must go down one level")
                minus[lt].append((s, t, a))
            elif e["kind"] == "+":
                if lt != ls + 1:
                    raise InvalidPresentation(f"E+ edge {e} must go up one level")
                plus[ls].append((s, t, a))
            else:
                raise InvalidPresentation(f"unknown edge kind {e['kind']!r}")
        phi = None
        if "phi" in d:
            phi = {}
            for r in d["phi"]:
                l = int(r["level"])
                key = (l, where[r["u"]][1], where[r["v"]][1], where[r["outer_middle"]][1],
                       aidx[r["alpha"]], aidx[r["beta"]])
                phi[key] = where[r["inner_middle"]][1]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPresentation(f"malformed bisystem document: {exc!r}") from None
    return LambdaBiSystem(alphabet, levels, [sorted(x) for x in minus], [sorted(x) for x in plus],
                          phi=phi, profiles=d.get("profiles"), words=words if has_words else None)


def dumps(B: LambdaBiSystem, input_hash: str | None = None) -> str:
    return json.dumps(to_dict(B, input_hash), indent=1, sort_keys=False) + "\n"


def to_dot(B: LambdaBiSystem) -> str:
    """E- edges solid, E+ edges dashed, one rank group per level."""
    lines = ["digraph bisystem {", "  rankdir=TB;", "  node [shape=circle, fontsize=10];"]
    for l in range(B.top + 1):
        names = " ".join(f'"{B.name(l, i)}";' for i in range(B.m(l)))
        lines.append(f"  {{ rank=same; {names} }}")
    for l in range(B.top):
        for s, t, a in sorted(B.minus[l]):
            lines.append(f'  "{B.name(l + 1, s)}" -> "{B.name(l, t)}" [label="{B.alphabet[a]}", style=solid];')
        for s, t, a in sorted(B.plus[l]):
            lines.append(f'  "{B.name(l, s)}" -> "{B.name(l + 1, t)}" [label="{B.alphabet[a]}", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
