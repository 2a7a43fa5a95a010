"""Finite presentations of subshifts, their languages and central word sets.

Every presentation is compiled to a right-resolving labeled graph.  Words are
tuples of symbol indices into the alphabet; the alphabet order is the order
used for all deterministic output.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import EmptySubshift, InvalidPresentation

Word = tuple

KINDS = ("sft-matrix", "forbidden-words", "sofic-graph")


@dataclass(frozen=True)
class LabeledGraph:
    """States ``0..n-1`` and edges ``(src, tgt, label)`` with integer labels."""

    nstates: int
    edges: tuple
    state_names: tuple = ()

    def out_map(self):
        out = [dict() for _ in range(self.nstates)]
        for s, t, a in self.edges:
            out[s].setdefault(a, []).append(t)
        return out

    def reversed(self) -> "LabeledGraph":
        return LabeledGraph(self.nstates, tuple((t, s, a) for s, t, a in self.edges), self.state_names)


@dataclass(frozen=True)
class SubshiftPresentation:
    alphabet: tuple
    kind: str
    matrix: tuple = ()
    memory: int = 0
    forbidden: tuple = ()
    states: tuple = ()
    edges: tuple = ()
    graph: LabeledGraph = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.alphabet:
            raise InvalidPresentation("alphabet must be non-empty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InvalidPresentation("alphabet has duplicate symbols")
        if self.kind not in KINDS:
            raise InvalidPresentation(f"unknown presentation kind {self.kind!r}")
        if self.graph is None:
            object.__setattr__(self, "graph", _compile(self))

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def word(self, text) -> Word:
        """Parse a word given as a list of symbols or a string of one-char symbols."""
        idx = {s: i for i, s in enumerate(self.alphabet)}
        items = list(text) if isinstance(text, str) else list(text)
        try:
            return tuple(idx[str(s)] for s in items)
        except KeyError as exc:
            raise InvalidPresentation(f"symbol {exc.args[0]!r} not in alphabet") from None

    def show(self, w: Word) -> str:
        sep = "" if all(len(s) == 1 for s in self.alphabet) else "."
        return sep.join(self.alphabet[a] for a in w)

    def to_dict(self) -> dict:
        d = {"schema": "subshift/1", "alphabet": list(self.alphabet), "kind": self.kind}
        if self.kind == "sft-matrix":
            d["matrix"] = [list(r) for r in self.matrix]
        elif self.kind == "forbidden-words":
            d["memory"] = self.memory
            d["forbidden"] = [[self.alphabet[a] for a in w] for w in self.forbidden]
        else:
            d["states"] = list(self.states)
            d["edges"] = [[self.states[s], self.states[t], self.alphabet[a]] for s, t, a in self.edges]
        return d


def _compile(p: SubshiftPresentation) -> LabeledGraph:
    k = len(p.alphabet)
    if p.kind == "sft-matrix":
        m = p.matrix
        if len(m) != k or any(len(r) != k for r in m):
            raise InvalidPresentation("sft-matrix must be square with one row per symbol")
        if any(v not in (0, 1) for r in m for v in r):
            raise InvalidPresentation("sft-matrix entries must be 0 or 1")
        edges = tuple((i, j, j) for i in range(k) for j in range(k) if m[i][j])
        return LabeledGraph(k, edges, tuple(p.alphabet))
    if p.kind == "forbidden-words":
        mem = p.memory
        if mem < 0:
            raise InvalidPresentation("memory must be non-negative")
        for w in p.forbidden:
            if not 1 <= len(w) <= mem + 1:
                raise InvalidPresentation("forbidden words must have length 1..memory+1")
        bad = set(p.forbidden)

        def clean(w):
            return not any(w[i:j] in bad for i in range(len(w)) for j in range(i + 1, len(w) + 1))

        states = [w for w in itertools.product(range(k), repeat=mem) if clean(w)]
        index = {w: i for i, w in enumerate(states)}
        edges = []
        for w in states:
            for a in range(k):
                ext = w + (a,)
                if clean(ext):
                    edges.append((index[w], index[ext[1:]], a))
        names = tuple(p.show(w) or "e" for w in states)
        return LabeledGraph(len(states), tuple(edges), names)
    n = len(p.states)
    seen = set()
    for s, t, a in p.edges:
        if not (0 <= s < n and 0 <= t < n and 0 <= a < k):
            raise InvalidPresentation("sofic-graph edge out of range")
        if (s, a) in seen:
            raise InvalidPresentation(
                f"sofic-graph is not right-resolving at state {p.states[s]!r}, label {p.alphabet[a]!r}")
        seen.add((s, a))
    return LabeledGraph(n, tuple(p.edges), tuple(p.states))


def from_dict(d: dict) -> SubshiftPresentation:
    """Build a presentation from its ``subshift/1`` JSON form."""
    if not isinstance(d, dict):
        raise InvalidPresentation("subshift document must be a JSON object")
    schema = d.get("schema", "subshift/1")
    if schema != "subshift/1":
        raise InvalidPresentation(f"unsupported schema {schema!r}")
    try:
        alphabet = tuple(str(s) for s in d["alphabet"])
        kind = d["kind"]
    except KeyError as exc:
        raise InvalidPresentation(f"missing field {exc.args[0]!r}") from None
    if kind not in KINDS:
        raise InvalidPresentation(f"unknown presentation kind {kind!r}")
    idx = {s: i for i, s in enumerate(alphabet)}

    def sym(s):
        try:
            return idx[str(s)]
        except KeyError:
            raise InvalidPresentation(f"symbol {s!r} not in alphabet") from None

    try:
        if kind == "sft-matrix":
            return SubshiftPresentation(alphabet, kind, matrix=tuple(tuple(int(v) for v in r) for r in d["matrix"]))
        if kind == "forbidden-words":
            words = tuple(tuple(sym(s) for s in w) for w in d.get("forbidden", []))
            return SubshiftPresentation(alphabet, kind, memory=int(d["memory"]), forbidden=words)
        states = tuple(str(s) for s in d["states"])
        sidx = {s: i for i, s in enumerate(states)}
        edges = []
        for e in d["edges"]:
            if isinstance(e, dict):
                e = (e["src"], e["tgt"], e["label"])
            s, t, a = e
            if str(s) not in sidx or str(t) not in sidx:
                raise InvalidPresentation(f"edge {e!r} references an unknown state")
            edges.append((sidx[str(s)], sidx[str(t)], sym(a)))
        return SubshiftPresentation(alphabet, kind, states=states, edges=tuple(edges))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidPresentation(f"malformed {kind} presentation: {exc}") from None


# Convenience constructors used by tests and demos.

def full_shift(k: int = 2) -> SubshiftPresentation:
    return SubshiftPresentation(tuple(str(i) for i in range(k)), "sofic-graph",
                                states=("q0",), edges=tuple((0, 0, a) for a in range(k)))


def golden_mean() -> SubshiftPresentation:
    return SubshiftPresentation(("0", "1"), "sft-matrix", matrix=((1, 1), (1, 0)))


def even_shift() -> SubshiftPresentation:
    return SubshiftPresentation(("0", "1"), "sofic-graph", states=("A", "B"),
                                edges=((0, 0, 0), (0, 1, 1), (1, 0, 1)))


def one_point() -> SubshiftPresentation:
    return full_shift(1)


def two_full_shifts() -> SubshiftPresentation:
    """Disjoint union of the full shifts on {a,b} and {c,d}."""
    return SubshiftPresentation(("a", "b", "c", "d"), "sofic-graph", states=("A", "B"),
                                edges=((0, 0, 0), (0, 0, 1), (1, 1, 2), (1, 1, 3)))


# Graph level operations

def _essential_states(g: LabeledGraph) -> list:
    alive = set(range(g.nstates))
    while True:
        outs = {s for s, t, _ in g.edges if s in alive and t in alive}
        ins = {t for s, t, _ in g.edges if s in alive and t in alive}
        nxt = alive & outs & ins
        if nxt == alive:
            return sorted(alive)
        alive = nxt


def essentialize(p: SubshiftPresentation) -> SubshiftPresentation:
    """Remove stranded states so every finite path extends bi-infinitely."""
    keep = _essential_states(p.graph)
    if not keep:
        raise EmptySubshift("presentation defines the empty subshift")
    if p.kind == "sft-matrix":
        if len(keep) == p.k:
            return p
        alphabet = tuple(p.alphabet[i] for i in keep)
        matrix = tuple(tuple(p.matrix[i][j] for j in keep) for i in keep)
        return SubshiftPresentation(alphabet, "sft-matrix", matrix=matrix)
    if p.kind == "forbidden-words":
        if len(keep) == p.graph.nstates:
            return p
        g = p.graph
        pos = {s: i for i, s in enumerate(keep)}
        edges = tuple((pos[s], pos[t], a) for s, t, a in g.edges if s in pos and t in pos)
        graph = LabeledGraph(len(keep), edges, tuple(g.state_names[s] for s in keep))
        return SubshiftPresentation(p.alphabet, p.kind, memory=p.memory, forbidden=p.forbidden, graph=graph)
    if len(keep) == len(p.states):
        return p
    pos = {s: i for i, s in enumerate(keep)}
    edges = tuple((pos[s], pos[t], a) for s, t, a in p.edges if s in pos and t in pos)
    return SubshiftPresentation(p.alphabet, "sofic-graph", states=tuple(p.states[s] for s in keep), edges=edges)


def is_essential(p: SubshiftPresentation) -> bool:
    return len(_essential_states(p.graph)) == p.graph.nstates


class Automaton:
    """Subset dynamics of an essential presentation, with memoized transitions."""

    def __init__(self, p: SubshiftPresentation):
        if not is_essential(p):
            p = essentialize(p)
        self.p = p
        self.g = p.graph
        self.k = p.k
        self.all = frozenset(range(self.g.nstates))
        fwd = [[set() for _ in range(self.k)] for _ in range(self.g.nstates)]
        bwd = [[set() for _ in range(self.k)] for _ in range(self.g.nstates)]
        for s, t, a in self.g.edges:
            fwd[s][a].add(t)
            bwd[t][a].add(s)
        self._fwd = fwd
        self._bwd = bwd
        self._memo = {}

    def step(self, S: frozenset, a: int) -> frozenset:
        key = (0, S, a)
        r = self._memo.get(key)
        if r is None:
            r = frozenset(t for s in S for t in self._fwd[s][a])
            self._memo[key] = r
        return r

    def back(self, S: frozenset, a: int) -> frozenset:
        key = (1, S, a)
        r = self._memo.get(key)
        if r is None:
            r = frozenset(s for t in S for s in self._bwd[t][a])
            self._memo[key] = r
        return r

    def run(self, S, w) -> frozenset:
        for a in w:
            S = self.step(S, a)
            if not S:
                break
        return S

    def admissible(self, w) -> bool:
        return bool(self.run(self.all, w))


def admissible_words(p: SubshiftPresentation, n: int) -> list:
    """Length-``n`` factors of the subshift in lexicographic order."""
    if n < 0:
        raise ValueError("n must be non-negative")
    aut = Automaton(p)
    out = []

    def walk(prefix, S):
        if len(prefix) == n:
            out.append(prefix)
            return
        for a in range(aut.k):
            T = aut.step(S, a)
            if T:
                walk(prefix + (a,), T)

    walk((), aut.all)
    return out


# Profiles

@dataclass(frozen=True, order=True)
class ProfilePair:
    left: frozenset
    right: frozenset

    def key(self):
        return (tuple(sorted(self.left)), tuple(sorted(self.right)))


def _relation_profiles(g: LabeledGraph) -> list:
    """Exact left profiles of left-infinite rays.

    The profile of a ray is the set of end states of infinite paths carrying
    its labels.  Reading the ray right to left, the relation ``R_s`` of its
    suffix ``s`` evolves by ``R_{as} = R_a ; R_s``; a set ``S`` is a profile iff
    some reachable relation with image ``S`` starts an infinite walk whose
    images stay equal to ``S``.
    """
    gens = {}
    for s, t, a in g.edges:
        gens.setdefault(a, set()).add((s, t))
    gens = {a: frozenset(r) for a, r in gens.items()}

    def compose(r1, r2):
        by_src = {}
        for m, t in r2:
            by_src.setdefault(m, []).append(t)
        return frozenset((s, t) for s, m in r1 for t in by_src.get(m, ()))

    seen = set(gens.values())
    frontier = list(gens.values())
    succ = {}
    while frontier:
        nxt = []
        for r in frontier:
            out = []
            for a in sorted(gens):
                r2 = compose(gens[a], r)
                if r2:
                    out.append(r2)
                    if r2 not in seen:
                        seen.add(r2)
                        nxt.append(r2)
            succ[r] = out
        frontier = nxt

    def image(r):
        return frozenset(t for _, t in r)

    by_image = {}
    for r in seen:
        by_image.setdefault(image(r), set()).add(r)
    result = []
    for S, nodes in by_image.items():
        # keep nodes that have a successor inside the same image class, repeatedly
        alive = set(nodes)
        while True:
            nxt = {r for r in alive if any(r2 in alive for r2 in succ[r])}
            if nxt == alive:
                break
            alive = nxt
        if alive:
            result.append(S)
    return sorted(result, key=lambda S: (-len(S), sorted(S)))


def realizable_profiles(p: SubshiftPresentation):
    """Return ``(left family, right family)`` as sorted lists of frozensets."""
    aut = Automaton(p)
    left = _relation_profiles(aut.g)
    right = _relation_profiles(aut.g.reversed())
    return left, right


def eventual_image(p: SubshiftPresentation, reverse: bool = False) -> list:
    """Subsets reached from the full state set by arbitrarily long words."""
    aut = Automaton(p)
    move = aut.back if reverse else aut.step
    # sets reachable by words of length exactly n, iterate until the family repeats
    fam = {aut.all}
    history = []
    while fam not in history:
        history.append(fam)
        fam = {T for S in fam for a in range(aut.k) for T in [move(S, a)] if T}
    start = history.index(fam)
    cyc = history[start:]
    out = set().union(*cyc)
    return sorted(out, key=lambda S: (-len(S), sorted(S)))


@dataclass(frozen=True)
class CentralSet:
    length: int
    words: frozenset

    def sorted_words(self) -> list:
        return sorted(self.words)

    def key(self):
        return (-len(self.words), tuple(sorted(self.words)))


class CentralTable:
    """Memoized central word sets ``W_n(L, R)``."""

    def __init__(self, p: SubshiftPresentation):
        self.aut = Automaton(p)
        self.p = self.aut.p
        self._memo = {}

    def words(self, L: frozenset, R: frozenset, n: int) -> frozenset:
        key = (L, R, n)
        r = self._memo.get(key)
        if r is not None:
            return r
        if n == 0:
            r = frozenset({()}) if L & R else frozenset()
        else:
            acc = []
            for a in range(self.aut.k):
                L2 = self.aut.step(L, a)
                if L2:
                    acc.extend((a,) + w for w in self.words(L2, R, n - 1))
            r = frozenset(acc)
        self._memo[key] = r
        return r


def central_set(p: SubshiftPresentation, prof: ProfilePair, n: int) -> CentralSet:
    return CentralSet(n, CentralTable(p).words(prof.left, prof.right, n))


def realizable_pairs(p: SubshiftPresentation) -> list:
    left, right = realizable_profiles(p)
    return [ProfilePair(L, R) for L in left for R in right]


def central_classes(p: SubshiftPresentation, n: int, table: CentralTable | None = None) -> list:
    """Distinct non-empty central sets of length ``n`` with their profile pairs."""
    table = table or CentralTable(p)
    groups = {}
    for pair in realizable_pairs(p):
        W = table.words(pair.left, pair.right, n)
        if W:
            groups.setdefault(W, []).append(pair)
    classes = [(CentralSet(n, W), pairs) for W, pairs in groups.items()]
    classes.sort(key=lambda c: c[0].key())
    return classes


# Brute-force oracles (finite contexts, path existence only)

def admissible_bruteforce(p: SubshiftPresentation, w) -> bool:
    """Path-existence check by depth-first search, independent of ``Automaton``."""
    g = essentialize(p).graph
    out = g.out_map()

    def dfs(state, i):
        if i == len(w):
            return True
        return any(dfs(t, i + 1) for t in out[state].get(w[i], ()))

    return any(dfs(s, 0) for s in range(g.nstates))


def bruteforce_classes(p: SubshiftPresentation, n: int, c: int) -> list:
    """Distinct sets ``{w : a w b admissible}`` over admissible contexts of length ``c``."""
    sigma_n = list(itertools.product(range(p.k), repeat=n))
    ctx = [w for w in itertools.product(range(p.k), repeat=c) if admissible_bruteforce(p, w)]
    found = set()
    for a in ctx:
        for b in ctx:
            W = frozenset(w for w in sigma_n if admissible_bruteforce(p, a + w + b))
            if W:
                found.add(W)
    return sorted(found, key=lambda W: (-len(W), sorted(W)))


# Recoding

def higher_block(p: SubshiftPresentation, k: int) -> SubshiftPresentation:
    """The ``k``-block recoding, presented as a right-resolving labeled graph."""
    if k < 1:
        raise ValueError("block length must be >= 1")
    p = essentialize(p)
    g = p.graph
    if k == 1:
        return p
    out = [[] for _ in range(g.nstates)]
    for e in g.edges:
        out[e[0]].append(e)
    paths = []

    def extend(path, length):
        if len(path) == length:
            paths.append(tuple(path))
            return
        for e in out[path[-1][1]]:
            extend(path + [e], length)

    for e in g.edges:
        extend([e], k - 1)
    paths.sort()
    sidx = {q: i for i, q in enumerate(paths)}
    edges = []
    for q in paths:
        for e in out[q[-1][1]]:
            word = tuple(x[2] for x in q) + (e[2],)
            edges.append((q, q[1:] + (e,), word))
    words = sorted({w for _, _, w in edges})
    widx = {w: i for i, w in enumerate(words)}
    alphabet = tuple(p.show(w) for w in words)
    if len(set(alphabet)) != len(alphabet):
        alphabet = tuple(".".join(p.alphabet[a] for a in w) for w in words)
    names = tuple("|".join(f"{g.state_names[s] if g.state_names else s}-{p.alphabet[a]}" for s, _, a in q)
                  for q in paths)
    e2 = tuple(sorted((sidx[s], sidx[t], widx[w]) for s, t, w in edges))
    return SubshiftPresentation(alphabet, "sofic-graph", states=names, edges=e2)
