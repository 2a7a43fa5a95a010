"""Level access beyond the stored top level.

Once a canonical bisystem has stabilized, the edge structure between levels
``m`` and ``m+1`` is the same for every ``m`` past the onset.  ``Tower`` serves
levels above the top ``L`` by reusing the ``(L-1, L)`` structure with level
``L`` indexing for every virtual level.
"""
from __future__ import annotations


from .bisystem import LambdaBiSystem
from .canonical import detect_stabilization
from .errors import DepthExhausted


class Tower:
    def __init__(self, B: LambdaBiSystem, stab="auto"):
        self.B = B
        self.L = L = B.top
        if stab == "auto":
            stab = detect_stabilization(B)
        self.stab = stab
        self.stable = stab is not None and stab.onset <= L - 1 and L >= 1
        self.alphabet = B.alphabet
        self.k = len(B.alphabet)
        self._psize = {}
        if self.stable:
            iota = stab.iota[L - 1]
            inv = [None] * B.m(L)
            for i, j in enumerate(iota):
                inv[j] = i
            self.iota, self.inv = iota, inv
            self._f_down = {}
            self._f_back = {}
            for i in range(B.m(L)):
                for a in range(self.k):
                    t = B.down(L, i, a)
                    if t is not None:
                        self._f_down[(i, a)] = iota[t]
                    s = B.back(L, i, a)
                    if s is not None:
                        self._f_back[(i, a)] = iota[s]

    def _need(self, l):
        if l > self.L and not self.stable:
            raise DepthExhausted(f"level {l} is above the top level {self.L} and the bisystem has not stabilized")
        if l < 0:
            raise ValueError("negative level")

    def m(self, l: int) -> int:
        self._need(l)
        return self.B.m(min(l, self.L))

    def key(self, l: int, i: int) -> tuple:
        """Node identity: all levels at or above the top share the top's nodes."""
        return (l, i) if l < self.L else (self.L, i)

    def down(self, l: int, i: int, a: int):
        self._need(l)
        if l <= self.L:
            return self.B.down(l, i, a)
        return self._f_down.get((i, a))

    def back(self, l: int, i: int, a: int):
        self._need(l)
        if l <= self.L:
            return self.B.back(l, i, a)
        return self._f_back.get((i, a))

    def plus_out(self, l: int, i: int) -> list:
        """``(label, target)`` pairs of E+ edges from ``(l, i)`` to level ``l+1``."""
        self._need(l + 1)
        if l < self.L:
            return self.B.plus_out(l, i)
        return self.B.plus_out(self.L - 1, self.inv[i])

    def minus_in(self, l: int, i: int) -> list:
        """``(label, source)`` pairs of E- edges into ``(l, i)`` from level ``l+1``."""
        self._need(l + 1)
        if l < self.L:
            return self.B.minus_in(l, i)
        return self.B.minus_in(self.L - 1, self.inv[i])

    def steps(self, l: int, i: int) -> list:
        """Zigzag steps ``(alpha, u, beta, w)`` from ``(l, i)``; ``w`` lies at level ``l+2``."""
        out = []
        for alpha, u in self.plus_out(l, i):
            for beta, w in self.minus_in(l + 1, u):
                out.append((alpha, u, beta, w))
        return sorted(out)

    def psize(self, l: int, i: int) -> int:
        """``|P(v)|`` by the recursion over incoming E+ edges."""
        key = (l, i)
        r = self._psize.get(key)
        if r is not None:
            return r
        if l == 0:
            r = 1
        else:
            # iterate upward to avoid deep recursion
            for lv in range(1, l):
                for j in range(self.m(lv)):
                    if (lv, j) not in self._psize:
                        self._psize[(lv, j)] = self._psum(lv, j)
            r = self._psum(l, i)
        self._psize[key] = r
        return r

    def _psum(self, l, i):
        tot = 0
        for a in range(self.k):
            s = self.back(l, i, a)
            if s is not None:
                tot += 1 if l == 1 else self._psize[(l - 1, s)]
        return tot

    def back_path(self, l: int, i: int, word) -> list | None:
        """Vertices of the ascending E+ path spelling ``word`` into ``(l, i)``, or None."""
        path = [i]
        for a in reversed(word):
            i = self.back(l, i, a)
            if i is None:
                return None
            l -= 1
            path.append(i)
        return path[::-1]

    def in_P(self, l: int, i: int, word) -> bool:
        return len(word) == l and self.back_path(l, i, word) is not None

    def first_symbol_counts(self, l: int, i: int) -> dict:
        """Number of words of ``P(v)`` by first symbol (a count independent of ``psize``)."""
        memo = self.__dict__.setdefault("_first", {})
        for lv in range(1, l + 1):
            for j in (range(self.m(lv)) if lv < l else [i]):
                if (lv, j) in memo:
                    continue
                acc = {}
                for a in range(self.k):
                    s = self.back(lv, j, a)
                    if s is None:
                        continue
                    if lv == 1:
                        acc[a] = acc.get(a, 0) + 1
                    else:
                        for b, c in memo[(lv - 1, s)].items():
                            acc[b] = acc.get(b, 0) + c
                memo[(lv, j)] = acc
        return memo[(l, i)] if l else {}

    def least_word(self, l: int, i: int, first: int | None = None):
        """Lexicographically least word of ``P(v)``, optionally with a given first symbol."""
        if l == 0:
            return ()
        memo = self.__dict__.setdefault("_least", {})
        if (l, i, first) in memo:
            return memo[(l, i, first)]
        best = None
        for a in range(self.k):
            s = self.back(l, i, a)
            if s is None:
                continue
            if l == 1:
                if first is None or a == first:
                    w = (a,)
                else:
                    continue
            else:
                if first is not None and not self.first_symbol_counts(l - 1, s).get(first):
                    continue
                w = self.least_word(l - 1, s, first) + (a,)
            if best is None or w < best:
                best = w
        memo[(l, i, first)] = best
        return best

    def P_words(self, l: int, i: int) -> list:
        """``P(v)`` enumerated by backward search (sorted)."""
        out = []

        def rec(l, i, suffix):
            if l == 0:
                out.append(suffix)
                return
            for a in range(self.k):
                s = self.back(l, i, a)
                if s is not None:
                    rec(l - 1, s, (a,) + suffix)

        rec(l, i, ())
        return sorted(out)

    def graph(self) -> dict:
        """Quotient zigzag graph: node key -> list of (step, successor key).

        Requires stabilization; nodes at or above the top level are merged.
        """
        if not self.stable:
            raise DepthExhausted("the quotient zigzag graph needs a stabilized bisystem")
        g = {}
        for l in range(self.L + 1):
            for i in range(self.m(l)):
                g[(l, i)] = [(s, self.key(l + 2, s[3])) for s in self.steps(l, i)]
        return g
