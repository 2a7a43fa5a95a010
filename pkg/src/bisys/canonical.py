"""Canonical bisystem of a subshift: vertices are central word sets, edges are
prefix and suffix derivatives."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .bisystem import LambdaBiSystem, predecessor_set, vertex_id
from .errors import ExactnessUnavailable, InconsistentBisystem
from .subshift import (KINDS, CentralTable, SubshiftPresentation, admissible_words,
                       essentialize, realizable_pairs)


def prefix_derivative(W, a) -> frozenset:
    return frozenset(w[1:] for w in W if w[0] == a)


def suffix_derivative(W, a) -> frozenset:
    return frozenset(w[:-1] for w in W if w[-1] == a)


def build_canonical(p: SubshiftPresentation, L: int) -> LambdaBiSystem:
    """Canonical bisystem up to level ``L``, with profile provenance attached."""
    if p.kind not in KINDS:
        raise ExactnessUnavailable(f"no exact construction for kind {p.kind!r}")
    if L < 1:
        raise ValueError("L must be >= 1")
    p = essentialize(p)
    table = CentralTable(p)
    pairs = realizable_pairs(p)
    k = p.k
    levels, words, class_of = [], [], []
    for l in range(L + 1):
        groups = {}
        for pi, pair in enumerate(pairs):
            W = table.words(pair.left, pair.right, l)
            if W:
                groups.setdefault(W, []).append(pi)
        order = sorted(groups, key=lambda W: (-len(W), sorted(W)))
        pos = {W: i for i, W in enumerate(order)}
        row = [-1] * len(pairs)
        for W, pis in groups.items():
            for pi in pis:
                row[pi] = pos[W]
        class_of.append(row)
        words.append(order)
        levels.append([vertex_id(l, W) for W in order])

    minus, plus, phi = [], [], {}
    for l in range(L):
        below = {W: i for i, W in enumerate(words[l])}
        me, pe = [], []
        for i, W in enumerate(words[l + 1]):
            for a in range(k):
                D = prefix_derivative(W, a)
                if D:
                    if D not in below:
                        raise InconsistentBisystem(f"prefix derivative of a level-{l + 1} class is not a class")
                    me.append((i, below[D], a))
                D = suffix_derivative(W, a)
                if D:
                    if D not in below:
                        raise InconsistentBisystem(f"suffix derivative of a level-{l + 1} class is not a class")
                    pe.append((below[D], i, a))
        minus.append(sorted(me))
        plus.append(sorted(pe))
    for l in range(L - 1):
        mid = {W: i for i, W in enumerate(words[l + 1])}
        for v, Wv in enumerate(words[l + 2]):
            for alpha, beta in itertools.product(range(k), repeat=2):
                b = prefix_derivative(Wv, beta)          # f-: v -> b, label beta
                d = suffix_derivative(Wv, alpha)         # e+: d -> v, label alpha
                if not b or not d:
                    continue
                u1 = suffix_derivative(b, alpha)         # f+: u -> b, label alpha
                u2 = prefix_derivative(d, beta)          # e-: d -> u, label beta
                if u1 != u2:
                    raise InconsistentBisystem("prefix and suffix derivatives do not commute")
                if u1:
                    u = {W: i for i, W in enumerate(words[l])}[u1]
                    phi[(l, u, v, mid[b], alpha, beta)] = mid[d]
    profiles = {
        "pairs": [[sorted(pr.left), sorted(pr.right)] for pr in pairs],
        "class_of": class_of,
    }
    return LambdaBiSystem(tuple(p.alphabet), levels, minus, plus, phi=phi, profiles=profiles, words=words)


@dataclass(frozen=True)
class Stabilization:
    onset: int
    iota: dict        # level l -> tuple mapping V_l indices to V_{l+1} indices (l >= onset)

    def to_dict(self) -> dict:
        return {"onset": self.onset, "iota": {str(l): list(m) for l, m in sorted(self.iota.items())}}


def _partition(row):
    blocks = {}
    for pi, c in enumerate(row):
        blocks.setdefault(c, []).append(pi)
    return {(c == -1, tuple(b)) for c, b in blocks.items()}


def detect_stabilization(B: LambdaBiSystem):
    """Smallest level after which the class structure repeats forever, or ``None``.

    Uses the profile provenance of a canonical bisystem: the partition of
    realizable profile pairs by central set at level ``n+1`` is a fixed function
    of the partition at level ``n`` (together with which block is empty), so two
    equal consecutive partitions repeat at every later level.
    """
    prof = B.profiles
    if not prof or "class_of" not in prof:
        return None
    rows = prof["class_of"]
    for l0 in range(len(rows) - 1):
        if _partition(rows[l0]) == _partition(rows[l0 + 1]):
            iota = {}
            for l in range(l0, len(rows) - 1):
                m = [None] * B.m(l)
                for c, c2 in zip(rows[l], rows[l + 1]):
                    if c >= 0:
                        m[c] = c2
                iota[l] = tuple(m)
            return Stabilization(l0, iota)
    return None


# Point-based verification

def _periodic_words(p: SubshiftPresentation, max_period: int):
    """Primitive words ``u`` (up to rotation) such that ``u`` repeated forever is a point."""
    g = essentialize(p).graph
    n = g.nstates
    out = g.out_map()

    def cyclic(u):
        # a closed path labeled by some power of u exists iff u^(n+1) is readable
        S = set(range(n))
        for a in u * (n + 1):
            S = {t for s in S for t in out[s].get(a, ())}
            if not S:
                return False
        return True

    seen = set()
    for per in range(1, max_period + 1):
        for u in itertools.product(range(p.k), repeat=per):
            rots = {u[i:] + u[:i] for i in range(per)}
            if any(r in seen for r in rots):
                continue
            if any(per % d == 0 and u == u[:d] * (per // d) for d in range(1, per)):
                continue
            if cyclic(u):
                seen.add(min(rots))
                yield min(rots)


def verify_point_semantics(p: SubshiftPresentation, B: LambdaBiSystem, max_period: int = 6) -> dict:
    """Recompute classes and edges from periodic points using finite contexts.

    For a periodic point the left and right contexts are replaced by long finite
    blocks; admissibility is decided by direct path search.
    """
    p = essentialize(p)
    g = p.graph
    out = g.out_map()
    memo = {}

    def admissible(w):
        r = memo.get(w)
        if r is None:
            S = set(range(g.nstates))
            for a in w:
                S = {t for s in S for t in out[s].get(a, ())}
                if not S:
                    break
            r = memo[w] = bool(S)
        return r

    L = B.top
    P_of = [{frozenset(predecessor_set(B, l, i)): i for i in range(B.m(l))} for l in range(L + 1)]
    checked = failed = 0
    failures = []

    def central(left, right, n):
        return frozenset(w for w in itertools.product(range(p.k), repeat=n) if admissible(left + w + right))

    for u in _periodic_words(p, max_period):
        per = len(u)
        c = per * (g.nstates + 2) + 2
        point = u * (2 * c // per + L + 4)
        for start in range(per):
            for n in range(L):
                k0 = c + start
                left = point[k0 - c:k0]
                right = point[k0 + n + 1:k0 + n + 1 + c]
                big = central(left, right, n + 1)          # class of level n+1
                u_idx = P_of[n + 1].get(big)
                checked += 1
                if u_idx is None:
                    failed += 1
                    failures.append({"point": p.show(u), "level": n + 1, "issue": "class missing"})
                    continue
                for beta in range(p.k):
                    checked += 1
                    small = central(left + (beta,), right, n)
                    tgt = B.down(n + 1, u_idx, beta)
                    if small:
                        ok = tgt is not None and P_of[n].get(small) == tgt
                    else:
                        ok = tgt is None
                    if not ok:
                        failed += 1
                        failures.append({"point": p.show(u), "level": n + 1, "edge": "-", "label": p.alphabet[beta]})
                for alpha in range(p.k):
                    checked += 1
                    small = central(left, (alpha,) + right, n)
                    src = B.back(n + 1, u_idx, alpha)
                    if small:
                        ok = src is not None and P_of[n].get(small) == src
                    else:
                        ok = src is None
                    if not ok:
                        failed += 1
                        failures.append({"point": p.show(u), "level": n + 1, "edge": "+", "label": p.alphabet[alpha]})
    lang_ok = True
    for n in range(L + 1):
        union = set()
        for i in range(B.m(n)):
            union |= predecessor_set(B, n, i)
        if union != set(admissible_words(p, n)):
            lang_ok = False
    return {"checked": checked, "failed": failed, "failures": failures[:10], "language_matches": lang_ok}
