"""Finite-stage shadows of the AF algebra of the configuration relation.

Stage ``(N, D)`` groups configurations by their rectangle at the corner
``(-N, N)`` read to zigzag depth ``D``: a component is a vertex ``v`` at level
``2N-1`` together with a depth-``D`` zigzag from it, and each class has
``|P(v)|`` members.  Matrices are integer ``numpy`` object arrays with rows
indexed by target components and columns by source components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy
from sympy.matrices.normalforms import smith_normal_form

from .configuration import Window, extend_rectangle, rectangle_from_zigzag, Zigzag
from .errors import DepthExhausted, InconsistentBisystem, PartitionViolation, ScheduleNotChained
from .tower import Tower


@dataclass(frozen=True, order=True)
class StageIndex:
    N: int
    D: int

    def __post_init__(self):
        if self.N < 1 or self.D < 0:
            raise ValueError("stage index needs N >= 1 and D >= 0")


@dataclass
class StageAlgebra:
    index: StageIndex
    components: list        # (v, zeta) pairs, sorted
    sizes: list

    @property
    def dimension(self) -> int:
        return sum(s * s for s in self.sizes)

    def position(self) -> dict:
        return {c: i for i, c in enumerate(self.components)}


@dataclass
class InclusionMatrix:
    source: StageIndex
    target: StageIndex
    matrix: np.ndarray

    def __matmul__(self, other: "InclusionMatrix") -> "InclusionMatrix":
        if other.target != self.source:
            raise ScheduleNotChained("matrices are not composable")
        return InclusionMatrix(other.source, self.target, self.matrix.dot(other.matrix))


def _zero(r, c):
    return np.zeros((r, c), dtype=object)


class StageCalculator:
    """Caches stage algebras and matrices for one tower."""

    def __init__(self, tower: Tower, enum_cap: int = 512):
        self.T = tower
        self.enum_cap = enum_cap
        self._stages = {}
        self._steps = {}

    def stage(self, s: StageIndex) -> StageAlgebra:
        got = self._stages.get(s)
        if got is not None:
            return got
        T = self.T
        lv = 2 * s.N - 1
        comps = []

        def rec(v0, l, i, zeta):
            if len(zeta) == s.D:
                comps.append((v0, zeta))
                return
            for st in T.steps(l, i):
                rec(v0, l + 2, st[3], zeta + (st,))

        for v in range(T.m(lv)):
            rec(v, lv, v, ())
        comps.sort()
        alg = StageAlgebra(s, comps, [T.psize(lv, v) for v, _ in comps])
        self._stages[s] = alg
        return alg

    def refine_depth(self, s: StageIndex) -> InclusionMatrix:
        got = self._steps.get(("refine", s))
        if got is not None:
            return got
        t = StageIndex(s.N, s.D + 1)
        A, B = self.stage(s), self.stage(t)
        pos = A.position()
        M = _zero(len(B.components), len(A.components))
        for r, (v, zeta) in enumerate(B.components):
            M[r, pos[(v, zeta[:-1])]] = 1
        out = self._steps[("refine", s)] = InclusionMatrix(s, t, M)
        return out

    def widen_window(self, s: StageIndex) -> InclusionMatrix:
        """Inclusion of stage ``(N, D)`` into ``(N+1, D-1)``, with the partition law enforced."""
        if s.D < 1:
            raise DepthExhausted("widening needs zigzag depth at least 1")
        got = self._steps.get(("widen", s))
        if got is not None:
            return got
        T = self.T
        N = s.N
        t = StageIndex(N + 1, s.D - 1)
        A, B = self.stage(s), self.stage(t)
        pos = A.position()
        M = _zero(len(B.components), len(A.components))
        for r, (v2, zeta2) in enumerate(B.components):
            groups = {}
            for comp, key, count in self._widen_groups(v2, zeta2, N):
                groups.setdefault(key, [comp, 0])[1] += count
            total = 0
            for comp, count in groups.values():
                size = T.psize(2 * N - 1, comp[0])
                if count != size:
                    raise PartitionViolation(f"class piece of size {count} where {size} was expected")
                M[r, pos[comp]] += 1
                total += size
            if total != B.sizes[r]:
                raise PartitionViolation("class pieces do not add up to the class size")
        out = self._steps[("widen", s)] = InclusionMatrix(s, t, M)
        return out

    def _member(self, v2, mu, N):
        """Corner vertices ``(-N, N)`` and ``(-N, N+1)`` of the class member with inner word ``mu``."""
        T = self.T
        lv = 2 * N + 1
        p, q = -N - 1, N + 1
        R = Window({(p, q): v2}, {}, "rectangle", (p, q), (0, 0))
        win = extend_rectangle(T, R, mu, "right")
        u, w = win.cells[(-N, N + 1)], win.cells[(-N, N)]
        if T.down(lv, v2, mu[0]) != u or T.back(lv - 1, u, mu[-1]) != w:
            raise InconsistentBisystem("extension disagrees with direct moves")
        return w, u

    def _widen_groups(self, v2, zeta2, N):
        """``(component, (first, last), count)`` over the members of a target class.

        Small classes are enumerated word by word; larger ones are counted by
        first and last symbol with one representative word per group.
        """
        T = self.T
        lv = 2 * N + 1
        if T.psize(lv, v2) <= self.enum_cap:
            for mu in T.P_words(lv, v2):
                w, u = self._member(v2, mu, N)
                yield (w, ((mu[-1], u, mu[0], v2),) + zeta2), (mu[0], mu[-1]), 1
            return
        for b in range(T.k):
            s = T.back(lv, v2, b)
            if s is None:
                continue
            for a, cnt in sorted(T.first_symbol_counts(lv - 1, s).items()):
                mu = T.least_word(lv - 1, s, a) + (b,)
                w, u = self._member(v2, mu, N)
                yield (w, ((b, u, a, v2),) + zeta2), (a, b), cnt

    def _shift_groups(self, v2, n, lv2):
        """``(word, multiplicity)`` over class members, grouped by their last ``2n`` symbols
        once the class is large (the shifted corner data only sees those symbols)."""
        T = self.T
        if T.psize(lv2, v2) <= self.enum_cap:
            for mu in T.P_words(lv2, v2):
                yield mu, 1
            return

        def rec(l, i, suffix):
            if len(suffix) == 2 * n:
                yield T.least_word(l, i) + suffix, T.psize(l, i)
                return
            for a in range(T.k):
                s = T.back(l, i, a)
                if s is not None:
                    yield from rec(l - 1, s, (a,) + suffix)

        yield from rec(lv2, v2, ())

    def shift_on_stages(self, s: StageIndex, n: int = 1) -> InclusionMatrix:
        """Shift image of stage ``(N, D)`` classes inside stage ``(N+n, D)``.

        A class at ``(-N-n, N+n)`` of ``x'`` is split by the rectangle at
        ``(-N, N)`` of ``x = sigma^-n x'``; the entry counts the pieces of each type.
        """
        if n < 1:
            raise ValueError("n must be positive")
        T = self.T
        N, D = s.N, s.D
        t = StageIndex(N + n, D)
        A, B = self.stage(s), self.stage(t)
        pos = A.position()
        M = _zero(len(B.components), len(A.components))
        lv2 = 2 * (N + n) - 1
        p, q = -N - n, N + n
        for r, (v2, zeta2) in enumerate(B.components):
            R = rectangle_from_zigzag(T, Zigzag(lv2, v2, zeta2), p, q, D, 0)
            counts = {}
            for mu, mult in self._shift_groups(v2, n, lv2):
                win = extend_rectangle(T, R, mu, "left")
                lab = win.labels

                def cell(k, l):
                    return win.cells[(k - n, l - n)]

                def label(m):
                    return lab[m - n]

                w = cell(-N, N)
                zeta = tuple((label(N + j), cell(-N - j, N + j + 1), label(-N - j), cell(-N - j - 1, N + j + 1))
                             for j in range(D))
                key = (w, zeta)
                counts[key] = counts.get(key, 0) + mult
            total = 0
            for comp, count in counts.items():
                size = T.psize(2 * N - 1, comp[0])
                if count % size:
                    raise PartitionViolation("shifted classes do not tile the larger class")
                M[r, pos[comp]] = count // size
                total += count
            if total != B.sizes[r]:
                raise PartitionViolation("shifted pieces do not add up to the class size")
        return InclusionMatrix(s, t, M)

    def connect(self, s: StageIndex, t: StageIndex) -> InclusionMatrix:
        """Composite inclusion from ``s`` to ``t``: refinements first, then widenings."""
        widen = t.N - s.N
        refine = t.D - s.D + widen
        if widen < 0 or refine < 0:
            raise ScheduleNotChained(f"stage {t} does not refine stage {s}")
        M = InclusionMatrix(s, s, np.identity(len(self.stage(s).components), dtype=object))
        cur = s
        for _ in range(refine):
            step = self.refine_depth(cur)
            M, cur = step @ M, step.target
        for _ in range(widen):
            step = self.widen_window(cur)
            M, cur = step @ M, step.target
        return M


@dataclass
class DimGroupSystem:
    """Inductive system ``Z^r0 -> Z^r1 -> ...`` with order units."""

    stages: list                 # StageIndex
    ranks: list
    matrices: list               # connecting matrices, len = len(stages) - 1
    units: list                  # order-unit vectors (component sizes)
    stable_matrix: np.ndarray | None = None
    stable_from: int | None = None   # matrices[i] == stable_matrix for i >= stable_from

    def composite(self, i: int, j: int) -> np.ndarray:
        M = np.identity(self.ranks[i], dtype=object)
        for k in range(i, j):
            M = self.matrices[k].dot(M)
        return M

    def matrix(self, k: int) -> np.ndarray:
        """Connecting matrix ``k -> k+1``, continuing with the stable matrix past the computed range."""
        if k < len(self.matrices):
            return self.matrices[k]
        if self.stable_matrix is None:
            raise DepthExhausted("stage system is not known to be stationary")
        return self.stable_matrix

    def unit_growth(self) -> list:
        return [int(sum(u)) for u in self.units]

    def to_dict(self) -> dict:
        return {"stages": [[s.N, s.D] for s in self.stages], "ranks": self.ranks,
                "units": [[int(a) for a in u] for u in self.units],
                "matrices": [[[int(a) for a in row] for row in M] for M in self.matrices],
                "unit_growth": self.unit_growth(),
                "smith": [smith_invariants(self.composite(0, k)) for k in range(1, len(self.stages))],
                "stationary_from": self.stable_from}


def default_schedule(S: int) -> list:
    return [StageIndex(N, 0) for N in range(1, S + 2)]


def dim_group(tower: Tower, schedule=None, stages: int = 4, calc: StageCalculator | None = None) -> DimGroupSystem:
    calc = calc or StageCalculator(tower)
    schedule = list(schedule) if schedule is not None else default_schedule(stages)
    mats, units, ranks = [], [], []
    for s in schedule:
        alg = calc.stage(s)
        ranks.append(len(alg.components))
        units.append(np.array(alg.sizes, dtype=object))
    for a, b in zip(schedule, schedule[1:]):
        mats.append(calc.connect(a, b).matrix)
    for k, M in enumerate(mats):
        if any(list(M.dot(units[k])) != list(units[k + 1]) for _ in [0]):
            raise PartitionViolation("order unit is not carried forward")
    system = DimGroupSystem(schedule, ranks, mats, units)
    # the (N,0) -> (N+1,0) matrix is constant once level 2N-1 reaches the stabilized range
    if tower.stable and all(s == StageIndex(i + 1, 0) for i, s in enumerate(schedule)):
        first = max(1, (tower.L + 2) // 2)
        if first + 1 <= len(schedule):
            system.stable_from = first - 1
            system.stable_matrix = calc.connect(StageIndex(first, 0), StageIndex(first + 1, 0)).matrix
    return system


def smith_invariants(M: np.ndarray) -> list:
    """Nonzero invariant factors of an integer matrix."""
    if M.size == 0:
        return []
    S = smith_normal_form(sympy.Matrix(M.tolist()), domain=sympy.ZZ)
    return [abs(int(S[i, i])) for i in range(min(S.shape)) if S[i, i] != 0]


def eventual_rank(system: DimGroupSystem) -> int | None:
    if system.stable_matrix is None:
        return None
    M = sympy.Matrix(system.stable_matrix.tolist())
    return (M ** M.shape[0]).rank()


def unit_divisible(system: DimGroupSystem, p: int):
    """Whether the order unit becomes divisible by ``p`` at some stage (exact for stationary systems)."""
    for k, u in enumerate(system.units):
        if all(int(a) % p == 0 for a in u):
            return True, k
    if system.stable_matrix is None:
        return None, len(system.units) - 1
    k = len(system.units) - 1
    u = tuple(int(a) % p for a in system.units[k])
    seen = set()
    while u not in seen:
        seen.add(u)
        k += 1
        u = tuple(int(a) % p for a in system.matrix(k - 1).dot(np.array(u, dtype=object)))
        if all(a == 0 for a in u):
            return True, k
    return False, k


# Comparison

@dataclass
class Comparison:
    outcome: str                     # IntertwinedUpTo | Obstructed | Inconclusive
    S: int
    ladder: list = field(default_factory=list)
    invariant: str | None = None
    values: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        d = {"outcome": self.outcome, "S": self.S}
        if self.outcome == "IntertwinedUpTo":
            d["ladder"] = [{"kind": k, "from": list(a), "to": list(b), "matrix": [[int(x) for x in row] for row in M]}
                           for k, a, b, M in self.ladder]
        if self.invariant:
            d["invariant"] = self.invariant
            d["values"] = self.values
        if self.note:
            d["note"] = self.note
        return d


def _prime_factors(n: int) -> list:
    return sorted(sympy.factorint(n)) if n > 1 else []


def _row_solutions(weights, target, budget):
    """Nonnegative integer vectors ``x`` with ``x . weights = target`` (vector targets)."""
    weights = [tuple(int(a) for a in w) for w in weights]
    ncols = len(target)
    out = []

    def rec(j, rem, acc):
        budget[0] -= 1
        if budget[0] < 0:
            raise _Budget
        if j == len(weights):
            if all(r == 0 for r in rem):
                out.append(tuple(acc))
            return
        w = weights[j]
        if all(a == 0 for a in w):
            rec(j + 1, rem, acc + [0])
            return
        top = min(rem[c] // w[c] for c in range(ncols) if w[c] > 0)
        for x in range(top, -1, -1):
            rec(j + 1, [rem[c] - x * w[c] for c in range(ncols)], acc + [x])

    rec(0, [int(a) for a in target], [])
    return out


class _Budget(Exception):
    pass


def _solve_left(known: np.ndarray, rhs: np.ndarray, extra_w, extra_t, budget):
    """All nonnegative ``X`` with ``X @ known = rhs`` and ``X @ extra_w = extra_t``, row by row."""
    per_row = []
    weights = [list(known[j]) + [extra_w[j]] for j in range(known.shape[0])]
    for i in range(rhs.shape[0]):
        sols = _row_solutions(weights, list(rhs[i]) + [extra_t[i]], budget)
        if not sols:
            return None
        per_row.append(sols)
    return per_row


def _ladder_search(G1: DimGroupSystem, G2: DimGroupSystem, S: int, a0: int, b0: int, stride: int, budget):
    """Ladder ``A_i: G1[a0+i*stride] -> G2[b0+i*stride]``, ``B_i: G2[b_i] -> G1[a_{i+1}]``."""
    def comp(G, i, j):
        M = np.identity(G.ranks[i] if i < len(G.ranks) else G.stable_matrix.shape[0], dtype=object)
        for k in range(i, j):
            M = G.matrix(k).dot(M)
        return M

    def unit(G, i):
        if i < len(G.units):
            return G.units[i]
        u = G.units[-1]
        for k in range(len(G.units) - 1, i):
            u = G.matrix(k).dot(u)
        return u

    a = [a0 + i * stride for i in range(S + 1)]
    b = [b0 + i * stride for i in range(S + 1)]
    u1, u2 = unit(G1, a[0]), unit(G2, b[0])
    # first rung: only the unit constraint
    rows = []
    for i in range(len(u2)):
        sols = _row_solutions([[int(x)] for x in u1], [int(u2[i])], budget)
        if not sols:
            return None
        rows.append(sols)

    def choices(per_row):
        # deterministic product in order, limited by the budget
        idx = [0] * len(per_row)
        while True:
            budget[0] -= 1
            if budget[0] < 0:
                raise _Budget
            yield np.array([per_row[r][idx[r]] for r in range(len(per_row))], dtype=object)
            r = len(per_row) - 1
            while r >= 0 and idx[r] + 1 == len(per_row[r]):
                idx[r] = 0
                r -= 1
            if r < 0:
                return
            idx[r] += 1

    def go(i, A, ladder):
        if i == S:
            return ladder
        M1 = comp(G1, a[i], a[i + 1])
        B_rows = _solve_left(A, M1, list(unit(G2, b[i])), list(unit(G1, a[i + 1])), budget)
        if B_rows is None:
            return None
        for B in choices(B_rows):
            M2 = comp(G2, b[i], b[i + 1])
            A_rows = _solve_left(B, M2, list(unit(G1, a[i + 1])), list(unit(G2, b[i + 1])), budget)
            if A_rows is None:
                continue
            for A2 in choices(A_rows):
                got = go(i + 1, A2, ladder + [("B", (b[i],), (a[i + 1],), B), ("A", (a[i + 1],), (b[i + 1],), A2)])
                if got is not None:
                    return got
        return None

    for A in choices(rows):
        got = go(0, A, [("A", (a[0],), (b[0],), A)])
        if got is not None:
            return got
    return None


def compare_invariants(G1: DimGroupSystem, G2: DimGroupSystem, S: int = 3, budget: int = 200000) -> Comparison:
    """Obstruction by cheap invariants, else a bounded search for an intertwining ladder."""
    same = (G1.ranks == G2.ranks and all(list(map(list, a)) == list(map(list, b)) for a, b in zip(G1.matrices, G2.matrices))
            and all(list(a) == list(b) for a, b in zip(G1.units, G2.units)))
    if same and len(G1.stages) >= S + 1:
        ladder = []
        for i in range(S):
            I = np.identity(G1.ranks[i], dtype=object)
            ladder.append(("A", (i,), (i,), I))
            ladder.append(("B", (i,), (i + 1,), G1.matrices[i]))
        return Comparison("IntertwinedUpTo", S, ladder, note="identical systems: identity ladder")

    r1, r2 = eventual_rank(G1), eventual_rank(G2)
    if r1 is not None and r2 is not None and r1 != r2:
        return Comparison("Obstructed", S, invariant="eventual rank", values={"ranks": [r1, r2]})

    primes = set()
    for G in (G1, G2):
        for u in G.units:
            primes.update(_prime_factors(math.gcd(*[int(a) for a in u])))
    for p in sorted(primes):
        d1, d2 = unit_divisible(G1, p), unit_divisible(G2, p)
        if d1[0] is not None and d2[0] is not None and d1[0] != d2[0]:
            return Comparison("Obstructed", S, invariant="order-unit growth",
                              values={"prime": p, "unit_divisible": [d1[0], d2[0]],
                                      "growth": [G1.unit_growth(), G2.unit_growth()]})

    left = [budget]
    tries = []
    for stride in (1, 2):
        for off in (0, 1, -1, 2, -2):
            for flip in (False, True):
                X, Y = (G2, G1) if flip else (G1, G2)
                a0, b0 = (0, off) if off >= 0 else (-off, 0)
                need = max(a0, b0) + S * stride
                if need >= len(X.units) + (100 if X.stable_matrix is not None else 0) or \
                        need >= len(Y.units) + (100 if Y.stable_matrix is not None else 0):
                    continue
                tries.append((stride, off, flip, X, Y, a0, b0))
    for stride, off, flip, X, Y, a0, b0 in tries:
        try:
            lad = _ladder_search(X, Y, S, a0, b0, stride, left)
        except _Budget:
            return Comparison("Inconclusive", S, note="search budget exhausted")
        if lad is not None:
            if flip:
                lad = [("B" if k == "A" else "A", x, y, M) for k, x, y, M in lad]
            return Comparison("IntertwinedUpTo", S, lad,
                              note=f"offset {off}, stride {stride}, starting from the {'second' if flip else 'first'} system")
    return Comparison("Inconclusive", S, note="no ladder within the searched offsets and strides")


def verify_ladder(G1: DimGroupSystem, G2: DimGroupSystem, comp: Comparison) -> bool:
    """Replay the commuting-triangle and unit equations of a ladder."""
    def composite(G, i, j):
        M = np.identity(G.ranks[i] if i < len(G.ranks) else G.stable_matrix.shape[0], dtype=object)
        for k in range(i, j):
            M = G.matrix(k).dot(M)
        return M

    lad = comp.ladder
    sys_of = {"A": (G1, G2), "B": (G2, G1)}
    for (k1, s1, t1, M1), (k2, s2, t2, M2) in zip(lad, lad[1:]):
        src_sys, _ = sys_of[k1]
        _, tgt_sys = sys_of[k2]
        if src_sys is not tgt_sys:
            return False
        if not (M2.dot(M1) == composite(src_sys, s1[0], t2[0])).all():
            return False
    return True


def afinv_report(tower: Tower, stages: int, extra: dict | None = None) -> dict:
    G = dim_group(tower, stages=stages)
    calc = StageCalculator(tower)
    doc = {"schema": "afinv/1", "label": "stage K0 approximation of the configuration relation algebra",
           "system": G.to_dict(),
           "components": [],
           "eventual_rank": eventual_rank(G)}
    for s in G.stages:
        alg = calc.stage(s)
        doc["components"].append({"stage": [s.N, s.D], "vertices": [tower.B.name(min(2 * s.N - 1, tower.L), v) for v, _ in alg.components],
                                  "sizes": [int(x) for x in alg.sizes], "dimension": alg.dimension})
    if extra:
        doc.update(extra)
    return doc
