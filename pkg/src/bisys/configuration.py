"""Points of the configuration space and the finite patches that describe them.

Grid conventions: the cell ``(k, l)`` with ``k < l`` holds a vertex at level
``l - k - 1``.  The E- edge from ``(k-1, l)`` to ``(k, l)`` carries the label
``x_k`` and the E+ edge from ``(k, l)`` to ``(k, l+1)`` carries ``x_l``.  Moving
one row down (``k+1``) is a unique E- step; moving one column left is a
unique E+ trace-back.

A zigzag step from the vertex at ``(p-j, q+j)`` is ``(alpha, u, beta, w)``: the
E+ edge labeled ``alpha = x_{q+j}`` into ``u`` at ``(p-j, q+j+1)`` and the E- edge
labeled ``beta = x_{p-j}`` from ``w`` at ``(p-j-1, q+j+1)`` into ``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import AmbiguousSquares, DepthExhausted, InconsistentBisystem, NoSquare, WordNotInP
from .tower import Tower


def level(k: int, l: int) -> int:
    return l - k - 1


# Patches

@dataclass
class Window:
    """Finite patch: vertex indices on cells and labels on positions."""

    cells: dict
    labels: dict
    kind: str = "window"
    corner: tuple | None = None
    extents: tuple | None = None

    def restrict(self, keep) -> "Window":
        cells = {c: v for c, v in self.cells.items() if keep(*c)}
        used = set()
        for k, l in cells:
            used.update(range(k + 1, l))
        for k, l in cells:
            if (k - 1, l) in cells:
                used.add(k)
            if (k, l + 1) in cells:
                used.add(l)
        labels = {n: a for n, a in self.labels.items() if n in used}
        return Window(cells, labels, self.kind, self.corner, self.extents)

    def agrees_with(self, other: "Window") -> bool:
        """True if every cell and label of ``self`` appears identically in ``other``."""
        return all(other.cells.get(c) == v for c, v in self.cells.items()) and \
            all(other.labels.get(n) == a for n, a in self.labels.items())

    def to_dict(self, alphabet) -> dict:
        d = {"kind": self.kind,
             "cells": [[k, l, level(k, l), v] for (k, l), v in sorted(self.cells.items())],
             "labels": [[n, alphabet[a]] for n, a in sorted(self.labels.items())]}
        if self.corner is not None:
            d["corner"] = list(self.corner)
        if self.extents is not None:
            d["extents"] = list(self.extents)
        return d


def window_from_dict(d: dict, alphabet) -> Window:
    aidx = {s: i for i, s in enumerate(alphabet)}
    cells = {(int(k), int(l)): int(v) for k, l, _, v in d["cells"]}
    labels = {int(n): aidx[str(a)] for n, a in d["labels"]}
    return Window(cells, labels, d.get("kind", "window"),
                  tuple(d["corner"]) if d.get("corner") is not None else None,
                  tuple(d["extents"]) if d.get("extents") is not None else None)


def check_window(tower: Tower, w: Window) -> list:
    """Adjacent cells whose connecting edge is missing (unit squares that fail)."""
    bad = []
    for (k, l), v in sorted(w.cells.items()):
        if (k + 1, l) in w.cells and (k + 1) in w.labels and l - k - 1 >= 1:
            if tower.down(level(k, l), v, w.labels[k + 1]) != w.cells[(k + 1, l)]:
                bad.append(("-", (k, l), (k + 1, l)))
        if (k, l + 1) in w.cells and l in w.labels:
            if tower.back(level(k, l + 1), w.cells[(k, l + 1)], w.labels[l]) != v:
                bad.append(("+", (k, l), (k, l + 1)))
    return bad


@dataclass(frozen=True)
class Zigzag:
    """Zigzag path from a vertex at ``level``: finite, or prefix then repeating cycle."""

    level: int
    start: int
    prefix: tuple
    cycle: tuple = ()

    @property
    def infinite(self) -> bool:
        return bool(self.cycle)

    @property
    def depth(self):
        return math.inf if self.cycle else len(self.prefix)

    def step(self, j: int):
        if j < len(self.prefix):
            return self.prefix[j]
        if self.cycle:
            return self.cycle[(j - len(self.prefix)) % len(self.cycle)]
        raise DepthExhausted(f"zigzag has only {len(self.prefix)} steps, step {j} requested")

    def source(self, j: int) -> int:
        return self.start if j == 0 else self.step(j - 1)[3]

    def take(self, n: int) -> tuple:
        return tuple(self.step(j) for j in range(n))

    def truncate(self, n: int) -> "Zigzag":
        return Zigzag(self.level, self.start, self.take(n))

    def validate(self, tower: Tower) -> None:
        n = len(self.prefix) + len(self.cycle)
        for j in range(n):
            src = self.source(j)
            st = self.step(j)
            if st not in tower.steps(self.level + 2 * j, src):
                raise InconsistentBisystem(f"step {j} of the zigzag is not a zigzag step")
        if self.cycle:
            lv = self.level + 2 * len(self.prefix)
            if not tower.stable or lv < tower.L:
                raise DepthExhausted("a repeating cycle is only legal at stabilized levels")
            if self.cycle[-1][3] != self.source(len(self.prefix)):
                raise InconsistentBisystem("zigzag cycle does not close up")

    def normalize(self, tower: Tower) -> "Zigzag":
        if not self.cycle:
            return self
        cyc = self.cycle
        n = len(cyc)
        for d in range(1, n + 1):
            if n % d == 0 and cyc == cyc[:d] * (n // d):
                cyc = cyc[:d]
                break
        pre = self.prefix
        while pre and pre[-1] == cyc[-1] and self.level + 2 * (len(pre) - 1) >= tower.L:
            cyc = (pre[-1],) + cyc[:-1]
            pre = pre[:-1]
        return Zigzag(self.level, self.start, pre, cyc)

    def to_dict(self, alphabet) -> dict:
        def enc(s):
            return [alphabet[s[0]], s[1], alphabet[s[2]], s[3]]

        return {"level": self.level, "start": self.start, "prefix": [enc(s) for s in self.prefix],
                "cycle": [enc(s) for s in self.cycle]}


def zigzag_from_dict(d: dict, alphabet) -> Zigzag:
    aidx = {s: i for i, s in enumerate(alphabet)}

    def dec(s):
        return (aidx[str(s[0])], int(s[1]), aidx[str(s[2])], int(s[3]))

    return Zigzag(int(d["level"]), int(d["start"]), tuple(dec(s) for s in d.get("prefix", [])),
                  tuple(dec(s) for s in d.get("cycle", [])))


# Triangles and squares

def fill_triangle(tower: Tower, v: int, mu, p: int = 0) -> Window:
    """The triangle below the corner ``(p, q)``, ``q = p + len(mu) + 1``, holding ``v``."""
    mu = tuple(mu)
    n = len(mu)
    q = p + n + 1
    if tower.back_path(n, v, mu) is None:
        raise WordNotInP(f"word is not in the predecessor set of vertex {v} at level {n}")
    labels = {p + 1 + i: a for i, a in enumerate(mu)}
    cells = {(p, q): v}
    for k in range(p, q - 1):
        t = tower.down(level(k, q), cells[(k, q)], labels[k + 1])
        if t is None:
            raise InconsistentBisystem("descending path for a predecessor word is missing")
        cells[(k + 1, q)] = t
    for k in range(p, q - 1):
        for l in range(q - 1, k, -1):
            s = tower.back(level(k, l + 1), cells[(k, l + 1)], labels[l])
            if s is None:
                raise InconsistentBisystem("row trace-back is missing")
            cells[(k, l)] = s
    return Window(cells, labels, "triangle", (p, q), (0, 0))


class Edge(NamedTuple):
    """``kind`` '+' goes from ``level`` to ``level+1``; '-' from ``level`` to ``level-1``."""

    kind: str
    level: int
    src: int
    tgt: int
    label: int


def _phi_lookup(tower, l, u, v, b, alpha, beta):
    B = tower.B
    if B.phi is not None and l + 2 <= B.top:
        return B.phi.get((l, u, v, b, alpha, beta), "missing")
    return None


def _unique(tower, l, i, a, table):
    lk = tower.B._lookup()[table]
    if l <= tower.L and len(lk[l].get((i, a), ())) > 1:
        raise AmbiguousSquares(f"more than one edge with label {a} at vertex {i} of level {l}")


def complete_square_out(tower: Tower, fp: Edge, fm: Edge):
    """Outer corner (f+ then f- into a common vertex) to the matching inner corner."""
    if fp.kind != "+" or fm.kind != "-" or fm.level != fp.level + 2 or fp.tgt != fm.tgt:
        raise NoSquare("not an outer corner")
    l, u, b, alpha, v, beta = fp.level, fp.src, fp.tgt, fp.label, fm.src, fm.label
    if tower.back(l + 1, b, alpha) != u or tower.down(l + 2, v, beta) != b:
        raise NoSquare("corner edges are not in the bisystem")
    d = _phi_lookup(tower, l, u, v, b, alpha, beta)
    if d is None:
        _unique(tower, l + 2, v, alpha, 1)
        d = tower.back(l + 2, v, alpha)
    if d is None or d == "missing" or tower.down(l + 1, d, beta) != u:
        raise InconsistentBisystem("local property fails at this corner")
    return Edge("-", l + 1, d, u, beta), Edge("+", l + 1, d, v, alpha)


def complete_square_in(tower: Tower, em: Edge, ep: Edge):
    """Inner corner (e- and e+ out of a common vertex) to the matching outer corner."""
    if em.kind != "-" or ep.kind != "+" or em.level != ep.level or em.src != ep.src:
        raise NoSquare("not an inner corner")
    l1, d, u, beta, v, alpha = em.level, em.src, em.tgt, em.label, ep.tgt, ep.label
    if tower.down(l1, d, beta) != u or tower.back(l1 + 1, v, alpha) != d:
        raise NoSquare("corner edges are not in the bisystem")
    _unique(tower, l1 + 1, v, beta, 0)
    b = tower.down(l1 + 1, v, beta)
    if b is None or tower.back(l1, b, alpha) != u:
        raise InconsistentBisystem("local property fails at this corner")
    return Edge("+", l1 - 1, u, b, alpha), Edge("-", l1 + 1, v, b, beta)


# Rectangles

def staircase_labels(zig: Zigzag, p: int, q: int, n: int) -> dict:
    labels = {}
    for j in range(n):
        a, _, b, _ = zig.step(j)
        labels[q + j] = a
        labels[p - j] = b
    return labels


def rectangle_from_zigzag(tower: Tower, zig: Zigzag, p: int, q: int, H: int, W: int) -> Window:
    """Fatten a zigzag from the corner ``(p, q)`` into the window ``p-H..p`` x ``q..q+W``.

    Cells above the staircase come from completing inner corners, cells below
    it from completing outer corners.  Needs ``max(H, W)`` zigzag steps.
    """
    if level(p, q) != zig.level:
        raise ValueError("zigzag level does not match the corner")
    need = max(H, W)
    if zig.depth < need:
        raise DepthExhausted(f"zigzag depth {zig.depth} is below the required {need}")
    labels = staircase_labels(zig, p, q, need)
    known = {(p, q): zig.start}
    for j in range(need):
        _, u, _, w = zig.step(j)
        known[(p - j, q + j + 1)] = u
        known[(p - j - 1, q + j + 1)] = w

    def cell(r, s):
        if (r, s) in known:
            return known[(r, s)]
        if r + s > p + q + 1:
            d, a, c = cell(r - 1, s - 1), cell(r, s - 1), cell(r - 1, s)
            em = Edge("-", level(r - 1, s - 1), d, a, labels[r])
            ep = Edge("+", level(r - 1, s - 1), d, c, labels[s - 1])
            fp, fm = complete_square_in(tower, em, ep)
            val = fm.tgt
        else:
            a, b, c = cell(r + 1, s), cell(r + 1, s + 1), cell(r, s + 1)
            fp = Edge("+", level(r + 1, s), a, b, labels[s])
            fm = Edge("-", level(r, s + 1), c, b, labels[r + 1])
            em, ep = complete_square_out(tower, fp, fm)
            val = em.src
        known[(r, s)] = val
        return val

    cells = {(r, s): cell(r, s) for r in range(p - H, p + 1) for s in range(q, q + W + 1)}
    keep = {n: a for n, a in labels.items() if p - H < n <= p or q <= n < q + W}
    return Window(cells, keep, "rectangle", (p, q), (H, W))


def extract_zigzag(w: Window, p: int, q: int, n: int) -> Zigzag:
    """Read ``n`` zigzag steps from the corner ``(p, q)`` of a patch."""
    try:
        steps = tuple((w.labels[q + j], w.cells[(p - j, q + j + 1)], w.labels[p - j], w.cells[(p - j - 1, q + j + 1)])
                      for j in range(n))
        return Zigzag(level(p, q), w.cells[(p, q)], steps)
    except KeyError as exc:
        raise DepthExhausted(f"patch does not contain {exc.args[0]!r}") from None


def extend_rectangle(tower: Tower, R: Window, mu, order: str = "left") -> Window:
    """Extend a rectangle patch and a word of the corner's predecessor set to a window.

    The result covers every cell ``(k, l)`` with ``p-H <= k < l <= q+W``.  With
    ``order="left"`` the rows are traced back first and the remaining cells are
    reached by descending columns; with ``order="right"`` the columns are
    descended first, the inner triangle is filled from the corner, and the rows
    are traced back last.
    """
    p, q = R.corner
    H, W = R.extents
    mu = tuple(mu)
    if len(mu) != q - p - 1:
        raise WordNotInP("word length does not match the corner level")
    v = R.cells[(p, q)]
    if not tower.in_P(q - p - 1, v, mu):
        raise WordNotInP("word is not in the predecessor set of the corner vertex")
    labels = dict(R.labels)
    for i, a in enumerate(mu):
        labels[p + 1 + i] = a
    cells = dict(R.cells)
    lo, hi = p - H, q + W

    def need_label(n):
        if n not in labels:
            raise DepthExhausted(f"label x_{n} is not available")
        return labels[n]

    def put(c, val):
        if val is None:
            raise InconsistentBisystem(f"extension step into cell {c} is missing")
        old = cells.get(c)
        if old is not None and old != val:
            raise InconsistentBisystem(f"extension orders disagree at cell {c}")
        cells[c] = val

    def rows():
        for r in range(p, lo - 1, -1):
            for s in range(q - 1, r, -1):
                put((r, s), tower.back(level(r, s + 1), cells[(r, s + 1)], need_label(s)))

    def columns(stop):
        for s in range(hi, p + 1, -1):
            if s < stop:
                break
            for r in range(p + 1, s):
                put((r, s), tower.down(level(r - 1, s), cells[(r - 1, s)], need_label(r)))

    if order == "left":
        rows()
        columns(p + 2)
    elif order == "right":
        columns(q)
        tri = fill_triangle(tower, v, mu, p)
        for c, val in tri.cells.items():
            put(c, val)
        rows()
    else:
        raise ValueError("order must be 'left' or 'right'")
    out = {c: val for c, val in cells.items() if lo <= c[0] < c[1] <= hi}
    lab = {n: a for n, a in labels.items() if lo < n < hi or n in R.labels}
    return Window(out, lab, "window", (lo, hi), None)


# Points

@dataclass(frozen=True)
class Dyadic:
    """Exact distance ``num * 2**-exp``; ``num`` is 0 or 1."""

    num: int
    exp: int

    def value(self) -> Fraction:
        return Fraction(self.num, 2 ** self.exp)


@dataclass(frozen=True)
class Bracket:
    lower: Dyadic
    upper: Dyadic


class ConfigurationRep:
    """A point given by its head symbol ``x_0`` and a zigzag from ``v_(-1,1)``."""

    def __init__(self, tower: Tower, head: int, zig: Zigzag, check: bool = True):
        if zig.level != 1:
            raise ValueError("configuration zigzags start at level 1")
        self.tower = tower
        self.head = head
        self.zig = zig.normalize(tower) if zig.infinite else zig
        self._cells = {}
        if check:
            if tower.back(1, zig.start, head) is None:
                raise WordNotInP("head symbol is not in the predecessor set of the level-1 vertex")
            self.zig.validate(tower)

    # data access
    def label(self, n: int) -> int:
        if n == 0:
            return self.head
        if n > 0:
            return self.zig.step(n - 1)[0]
        return self.zig.step(-n - 1)[2]

    def cell(self, k: int, l: int) -> int:
        if k >= l:
            raise ValueError("cells need k < l")
        got = self._cells.get((k, l))
        if got is not None:
            return got
        T = self.tower
        s = k + l
        if l - k == 1:
            val = 0
        elif s == 0:
            val = self.zig.start if k == -1 else self.zig.step(-k - 2)[3]
        elif s == 1:
            val = self.zig.step(-k - 1)[1]
        elif s > 1:
            # descend the column from the staircase
            r0 = 1 - l
            val = self.cell(r0, l)
            for r in range(r0 + 1, k + 1):
                val = T.down(level(r - 1, l), val, self.label(r))
                if val is None:
                    raise InconsistentBisystem("column descent failed")
        else:
            c0 = -k
            val = self.cell(k, c0)
            for c in range(c0 - 1, l - 1, -1):
                val = T.back(level(k, c + 1), val, self.label(c))
                if val is None:
                    raise InconsistentBisystem("row trace-back failed")
        self._cells[(k, l)] = val
        return val

    @property
    def infinite(self) -> bool:
        return self.zig.infinite

    def window(self, N: int) -> Window:
        """The triangle of cells ``-N <= k < l <= N`` with labels ``x_{-N+1}..x_{N-1}``."""
        cells = {(k, l): self.cell(k, l) for k in range(-N, N) for l in range(k + 1, N + 1)}
        labels = {n: self.label(n) for n in range(-N + 1, N)}
        return Window(cells, labels, "triangle", (-N, N), (0, 0))

    def corner_zigzag(self, p: int, q: int, n: int) -> tuple:
        """``n`` zigzag steps from the cell ``(p, q)``."""
        return tuple((self.label(q + j), self.cell(p - j, q + j + 1), self.label(p - j), self.cell(p - j - 1, q + j + 1))
                     for j in range(n))

    def pi(self, a: int, b: int) -> tuple:
        """Labels ``x_a..x_b``."""
        return tuple(self.label(n) for n in range(a, b + 1))

    def key(self) -> tuple:
        z = self.zig
        return (self.head, z.start, z.prefix, z.cycle)

    def __eq__(self, other):
        return isinstance(other, ConfigurationRep) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def period_data(self):
        return len(self.zig.prefix), len(self.zig.cycle)

    def to_dict(self) -> dict:
        return {"head": self.tower.alphabet[self.head], "zigzag": self.zig.to_dict(self.tower.alphabet)}


def rep_from_dict(tower: Tower, d: dict) -> ConfigurationRep:
    aidx = {s: i for i, s in enumerate(tower.alphabet)}
    return ConfigurationRep(tower, aidx[str(d["head"])], zigzag_from_dict(d["zigzag"], tower.alphabet))


def rep_from_window(tower: Tower, w: Window, N: int) -> ConfigurationRep:
    """Head and zigzag read from a patch covering the triangle at ``(-N, N)``."""
    zig = extract_zigzag(w, -1, 1, N - 1)
    try:
        head = w.labels[0]
    except KeyError:
        raise DepthExhausted("patch has no head label") from None
    return ConfigurationRep(tower, head, zig)


def shift(c: ConfigurationRep, n: int = 1) -> ConfigurationRep:
    """``(sigma^n x)_(k,l) = x_(k+n, l+n)``, re-anchored at the level-1 cell."""
    head = c.label(n)
    start = c.cell(n - 1, n + 1)

    def step(j):
        return (c.label(1 + j + n), c.cell(-1 - j + n, 2 + j + n), c.label(-1 - j + n), c.cell(-2 - j + n, 2 + j + n))

    if c.infinite:
        P, C = c.period_data()
        K0 = P + abs(n) + c.tower.L + 3
        steps = [step(j) for j in range(K0 + 2 * C)]
        if steps[K0:K0 + C] != steps[K0 + C:K0 + 2 * C]:
            raise InconsistentBisystem("shifted zigzag is not periodic where expected")
        zig = Zigzag(1, start, tuple(steps[:K0]), tuple(steps[K0:K0 + C]))
    else:
        steps = []
        while True:
            try:
                steps.append(step(len(steps)))
            except DepthExhausted:
                break
        zig = Zigzag(1, start, tuple(steps))
    return ConfigurationRep(c.tower, head, zig, check=False)


def unshift(c: ConfigurationRep, n: int = 1) -> ConfigurationRep:
    return shift(c, -n)


def shift_window(w: Window, n: int = 1) -> Window:
    """Shift a patch: the content at ``(k+n, l+n)`` moves to ``(k, l)``."""
    cells = {(k - n, l - n): v for (k, l), v in w.cells.items()}
    labels = {m - n: a for m, a in w.labels.items()}
    corner = (w.corner[0] - n, w.corner[1] - n) if w.corner else None
    return Window(cells, labels, w.kind, corner, w.extents)


def _horizon(x: ConfigurationRep, z: ConfigurationRep, extra: int = 0) -> int:
    Px, Cx = x.period_data()
    Pz, Cz = z.period_data()
    return max(Px, Pz) + extra + x.tower.L + 3 + 2 * math.lcm(Cx, Cz)


def distance(x: ConfigurationRep, z: ConfigurationRep):
    """``1`` if the triangles at ``(-1,1)`` differ, else ``2**-p`` for the largest
    ``p`` with equal triangles at ``(-p,p)``.  Returns a ``Bracket`` when finite
    data runs out before a difference is seen."""
    if (x.head, x.zig.start) != (z.head, z.zig.start):
        return Dyadic(1, 0)
    if x.infinite and z.infinite:
        horizon = _horizon(x, z)
    else:
        horizon = min(x.zig.depth, z.zig.depth)
    j = 0
    while j < horizon:
        if x.zig.step(j) != z.zig.step(j):
            return Dyadic(1, j + 1)
        j += 1
    if x.infinite and z.infinite:
        return Dyadic(0, 0)
    return Bracket(Dyadic(0, 0), Dyadic(1, j + 1))


EQUAL, DISTINCT, UNKNOWN = "Equal", "Distinct", "UnknownAtDepth"


def equivalent_at(x: ConfigurationRep, z: ConfigurationRep, corner, depth: int | None = None):
    """Compare the rectangles at ``corner``: ``(status, depth examined)``."""
    p, q = corner
    exact = x.infinite and z.infinite
    limit = _horizon(x, z, abs(p) + abs(q)) if exact else (depth if depth is not None else 10 ** 9)
    try:
        if x.cell(p, q) != z.cell(p, q):
            return DISTINCT, 0
    except DepthExhausted:
        return UNKNOWN, 0
    j = 0
    while j < limit:
        try:
            sx = (x.label(q + j), x.cell(p - j, q + j + 1), x.label(p - j), x.cell(p - j - 1, q + j + 1))
            sz = (z.label(q + j), z.cell(p - j, q + j + 1), z.label(p - j), z.cell(p - j - 1, q + j + 1))
        except DepthExhausted:
            return UNKNOWN, j
        if sx != sz:
            return DISTINCT, j
        j += 1
    return (EQUAL, j) if exact else (UNKNOWN, j)


def agreement_corner(x: ConfigurationRep, z: ConfigurationRep, max_M: int | None = None):
    """Smallest ``M`` with equal rectangles at ``(-M, M)``, or ``None`` if there is none."""
    if not (x.infinite and z.infinite):
        raise DepthExhausted("agreement search needs eventually periodic points")
    top = max_M if max_M is not None else _horizon(x, z) + 2
    for M in range(1, top + 1):
        if equivalent_at(x, z, (-M, M))[0] == EQUAL:
            return M
    return None


# Factor map fibers

@dataclass(frozen=True)
class LabelSequence:
    """Eventually periodic bi-infinite label sequence.

    ``right_prefix``/``right_cycle`` give ``y_0, y_1, ...``; ``left_prefix``/
    ``left_cycle`` give ``y_{-1}, y_{-2}, ...``.
    """

    right_prefix: tuple
    right_cycle: tuple
    left_prefix: tuple
    left_cycle: tuple

    @staticmethod
    def _get(pre, cyc, i):
        return pre[i] if i < len(pre) else cyc[(i - len(pre)) % len(cyc)]

    @staticmethod
    def _phase(pre, cyc, i):
        return i if i < len(pre) else len(pre) + (i - len(pre)) % len(cyc)

    def __call__(self, n: int) -> int:
        if n >= 0:
            return self._get(self.right_prefix, self.right_cycle, n)
        return self._get(self.left_prefix, self.left_cycle, -n - 1)

    def phase(self, n: int):
        if n >= 0:
            return ("r", self._phase(self.right_prefix, self.right_cycle, n))
        return ("l", self._phase(self.left_prefix, self.left_cycle, -n - 1))

    @classmethod
    def periodic(cls, word):
        """The point ``...www.www...`` with ``y_0 = word[0]``."""
        w = tuple(word)
        return cls((), w, (), tuple(reversed(w)))


def pi_fiber(tower: Tower, y: LabelSequence, N: int, depth: int | None = None) -> list:
    """Vertices ``v`` at level ``2N-1`` whose triangle at ``(-N, N)`` occurs in a
    configuration carrying the labels ``y``.

    With a stabilized bisystem and ``depth=None`` the answer is exact (an
    infinite zigzag with the prescribed labels must exist); otherwise zigzags are
    only required to reach ``depth`` steps.
    """
    lv = 2 * N - 1
    mu = tuple(y(n) for n in range(-N + 1, N))
    cands = [v for v in range(tower.m(lv)) if tower.in_P(lv, v, mu)]
    if depth is not None:
        def ok(v):
            frontier = {v}
            for j in range(depth):
                a, b = y(N + j), y(-N - j)
                frontier = {s[3] for x in frontier for s in tower.steps(lv + 2 * j, x) if s[0] == a and s[2] == b}
                if not frontier:
                    return False
            return True

        return [v for v in cands if ok(v)]
    if not tower.stable:
        raise DepthExhausted("exact fibers need a stabilized bisystem; pass a depth")

    def node(j, v):
        return (tower.key(lv + 2 * j, v), y.phase(N + j), y.phase(-N - j))

    # explore the finite product graph, remembering one j per node
    succ, rep_j, todo = {}, {}, []
    for v in cands:
        n0 = node(0, v)
        if n0 not in rep_j:
            rep_j[n0] = (0, v)
            todo.append(n0)
    while todo:
        nd = todo.pop()
        j, v = rep_j[nd]
        a, b = y(N + j), y(-N - j)
        out = []
        for s in tower.steps(lv + 2 * j, v):
            if s[0] == a and s[2] == b:
                n2 = node(j + 1, s[3])
                out.append(n2)
                if n2 not in rep_j:
                    rep_j[n2] = (j + 1, s[3])
                    todo.append(n2)
        succ[nd] = out
    alive = set(succ)
    while True:
        nxt = {nd for nd in alive if any(s in alive for s in succ[nd])}
        if nxt == alive:
            break
        alive = nxt
    return [v for v in cands if node(0, v) in alive]


def replace_triangle(c: ConfigurationRep, M: int, mu) -> ConfigurationRep:
    """The configuration agreeing with ``c`` on its rectangle at ``(-M, M)`` whose
    labels ``x_{-M+1}..x_{M-1}`` are ``mu`` (a member of the same class)."""
    mu = tuple(mu)
    if len(mu) != 2 * M - 1:
        raise ValueError("word length must be 2M-1")
    T = c.tower
    tri = fill_triangle(T, c.cell(-M, M), mu, -M)
    head = tri.labels[0]
    steps = [(tri.labels[1 + j], tri.cells[(-1 - j, 2 + j)], tri.labels[-1 - j], tri.cells[(-2 - j, 2 + j)])
             for j in range(M - 1)]
    z = c.zig
    if z.infinite:
        K = max(len(z.prefix), M - 1)
        zig = Zigzag(1, tri.cells[(-1, 1)], tuple(steps) + tuple(z.step(j) for j in range(M - 1, K)),
                     tuple(z.step(j) for j in range(K, K + len(z.cycle))))
    else:
        if z.depth < M - 1:
            raise DepthExhausted("configuration data does not reach the corner")
        zig = Zigzag(1, tri.cells[(-1, 1)], tuple(steps) + z.prefix[M - 1:])
    return ConfigurationRep(T, head, zig, check=False)


def label_distance(x: ConfigurationRep, z: ConfigurationRep, r=Fraction(1, 2)):
    """Metric on label sequences: 1 if ``x_0`` differs, else ``r**m`` for the largest
    ``m`` with ``x_k = z_k`` whenever ``|k| < m``; 0 for equal sequences."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError("base must lie strictly between 0 and 1")
    if x.label(0) != z.label(0):
        return Fraction(1)
    exact = x.infinite and z.infinite
    horizon = _horizon(x, z) + 2 if exact else min(x.zig.depth, z.zig.depth) + 1
    for m in range(1, horizon + 1):
        try:
            if x.label(m) != z.label(m) or x.label(-m) != z.label(-m):
                return r ** m
        except DepthExhausted:
            break
    return Fraction(0) if exact else None


def pi_equal(x: ConfigurationRep, z: ConfigurationRep) -> bool:
    """Equality of label sequences for eventually periodic points."""
    return label_distance(x, z) == 0


def random_periodic_rep(tower: Tower, rng, min_steps: int = 0) -> ConfigurationRep:
    """Random eventually periodic point: a random zigzag walk closed up at the
    first repeated node past the stabilized level (and past ``min_steps``)."""
    if not tower.stable:
        raise DepthExhausted("periodic points need a stabilized bisystem")
    start = rng.randrange(tower.m(1))
    heads = [a for a in range(tower.k) if tower.back(1, start, a) is not None]
    head = rng.choice(heads)
    steps, seen, lv, cur = [], {}, 1, start
    while True:
        key = tower.key(lv, cur)
        if lv >= tower.L and len(steps) >= min_steps:
            if key in seen:
                break
            seen[key] = len(steps)
        st = rng.choice(tower.steps(lv, cur))
        steps.append(st)
        cur, lv = st[3], lv + 2
    j = seen[key]
    return ConfigurationRep(tower, head, Zigzag(1, start, tuple(steps[:j]), tuple(steps[j:])))


def random_finite_rep(tower: Tower, rng, depth: int) -> ConfigurationRep:
    start = rng.randrange(tower.m(1))
    head = rng.choice([a for a in range(tower.k) if tower.back(1, start, a) is not None])
    steps, lv, cur = [], 1, start
    for _ in range(depth):
        st = rng.choice(tower.steps(lv, cur))
        steps.append(st)
        cur, lv = st[3], lv + 2
    return ConfigurationRep(tower, head, Zigzag(1, start, tuple(steps)))
