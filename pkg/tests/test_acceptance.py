"""Acceptance suite.  Each criterion prints one PASS/FAIL line; the lines are
repeated in the terminal summary.  Runnable directly: ``python tests/test_acceptance.py``."""
import copy
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from bisys import subshift as ss
from bisys.afinv import StageCalculator, StageIndex, compare_invariants, dim_group, verify_ladder
from bisys.bisystem import LambdaBiSystem, validate_axioms
from bisys.configuration import (EQUAL, ConfigurationRep, LabelSequence, Zigzag, distance, extend_rectangle,
                                 extract_zigzag, level, pi_fiber, random_periodic_rep, rectangle_from_zigzag,
                                 rep_from_window, shift)
from bisys.dynamics import CERTIFIED, REFUTED, condition_I, irreducibility

from conftest import canonical, presentation, tower

DATA = Path(__file__).resolve().parent.parent / "data"
RESULTS = {}
SYSTEMS = ["full2", "golden", "even", "two"]
TIME_LIMIT = 60.0


def check(cond, msg):
    if not cond:
        raise AssertionError(msg)


def branch(T, rng, x, j):
    """A point sharing the head and first ``j`` zigzag steps with ``x``."""
    steps = list(x.zig.take(j))
    lv, cur, seen = 1 + 2 * j, x.zig.source(j), {}
    while True:
        key = T.key(lv, cur)
        if lv >= T.L:
            if key in seen:
                break
            seen[key] = len(steps)
        st = rng.choice(T.steps(lv, cur))
        steps.append(st)
        lv, cur = lv + 2, st[3]
    k = seen[key]
    return ConfigurationRep(T, x.head, Zigzag(1, x.zig.start, tuple(steps[:k]), tuple(steps[k:])))


def label_seq(c):
    z = c.zig
    return LabelSequence((c.head,) + tuple(s[0] for s in z.prefix), tuple(s[0] for s in z.cycle),
                         tuple(s[2] for s in z.prefix), tuple(s[2] for s in z.cycle))


# criteria

def criterion_1():
    p = ss.golden_mean()
    B = canonical("golden")
    check((B.m(1), B.m(2)) == (2, 4), f"m(1), m(2) = {B.m(1)}, {B.m(2)}")
    show = lambda ws: frozenset(p.show(w) for w in ws)
    check(set(map(show, B.words[1])) == {frozenset({"0", "1"}), frozenset({"0"})}, "level-1 classes differ")
    check(set(map(show, B.words[2])) == {frozenset({"00", "01", "10"}), frozenset({"00", "10"}),
                                         frozenset({"00", "01"}), frozenset({"00"})}, "level-2 classes differ")
    for c in range(1, 5):
        for n in (1, 2):
            oracle = set(ss.bruteforce_classes(p, n, c))
            check(oracle == set(map(frozenset, B.words[n])), f"oracle with contexts of length {c} disagrees at n={n}")
    return "m(1)=2, m(2)=4, classes match the oracle for context lengths 1-4"


def _mutations():
    """(axiom, mutated bisystem, expected witness vertex or None)."""
    out = []
    B = canonical("golden", 3)
    minus = copy.deepcopy(B.minus)
    s, t, a = minus[1][0]
    minus[1].append((s, next(j for j in range(B.m(1)) if j != t), a))
    out.append(("right-resolving", LambdaBiSystem(B.alphabet, B.levels, minus, B.plus), B.name(2, s)))
    plus = copy.deepcopy(B.plus)
    s, t, a = plus[1][0]
    plus[1].append((next(j for j in range(B.m(1)) if j != s), t, a))
    out.append(("left-resolving", LambdaBiSystem(B.alphabet, B.levels, B.minus, plus), B.name(2, t)))
    plus = copy.deepcopy(B.plus)
    plus[1].pop(0)
    out.append(("local-property", LambdaBiSystem(B.alphabet, B.levels, B.minus, plus), None))
    F = canonical("full2", 2)
    minus = copy.deepcopy(F.minus)
    minus[0] = [(0, 0, 0)]
    out.append(("fpcc", LambdaBiSystem(F.alphabet, F.levels, minus, F.plus), "v1_0"))
    levels = copy.deepcopy(B.levels)
    levels[3].append("orphan")
    out.append(("essential", LambdaBiSystem(B.alphabet, levels, B.minus, B.plus), B.name(3, B.m(3))))
    levels = copy.deepcopy(B.levels)
    levels[0].append("extra")
    out.append(("top-singleton", LambdaBiSystem(B.alphabet, levels, B.minus, B.plus), None))
    return out


def criterion_2():
    for name in ("full2", "full3", "golden", "even"):
        rep = validate_axioms(canonical(name, 6))
        check(rep.ok and rep.level == 6, f"{name} fails the axiom suite: {rep.to_dict()}")
    seen = set()
    for axiom, M, vertex in _mutations():
        r = validate_axioms(M).results[axiom]
        check(not r["ok"], f"mutation for {axiom} was not detected")
        check(r["witness"], f"no witness for {axiom}")
        if vertex is not None:
            check(r["witness"].get("vertex") == vertex, f"{axiom} witness {r['witness']} is not the mutated vertex")
        seen.add(axiom)
    check(len(seen) == 6, "some axiom has no counterexample")
    return "4 systems valid at L=6; 6 mutations each fail with a located witness"


def _random_zigzag(T, rng, lv, v, n):
    steps, cur = [], v
    for j in range(n):
        st = rng.choice(T.steps(lv + 2 * j, cur))
        steps.append(st)
        cur = st[3]
    return Zigzag(lv, v, tuple(steps))


def criterion_3():
    rng = random.Random(3)
    for name in SYSTEMS:
        T = tower(name)
        for _ in range(200):
            p = -rng.randint(0, 3)
            q = p + rng.randint(1, 5)
            H, W = rng.randint(0, 3), rng.randint(0, 3)
            lv = level(p, q)
            v = rng.randrange(T.m(lv))
            R = rectangle_from_zigzag(T, _random_zigzag(T, rng, lv, v, max(H, W)), p, q, H, W)
            mu = rng.choice(T.P_words(lv, v))
            left = extend_rectangle(T, R, mu, "left")
            right = extend_rectangle(T, R, mu, "right")
            check(left.cells == right.cells and left.labels == right.labels, f"{name}: orders differ")
            check(R.agrees_with(left), f"{name}: restriction differs from the input")
            check(tuple(left.labels[k] for k in range(p + 1, q)) == mu, f"{name}: word not reproduced")
    return f"200 random inputs on each of {', '.join(SYSTEMS)}"


def criterion_4():
    rng = random.Random(4)
    for name in SYSTEMS:
        T = tower(name)
        for _ in range(200):
            x = random_periodic_rep(T, rng)
            P, C = x.period_data()
            n = P + 2 * C + 1
            zig = Zigzag(1, x.zig.start, x.zig.take(n))
            R = rectangle_from_zigzag(T, zig, -1, 1, n, n)
            check(extract_zigzag(R, -1, 1, n) == zig, f"{name}: zigzag -> rectangle -> zigzag differs")
            N = P + C + 1
            y = rep_from_window(T, x.window(N), N)
            back = ConfigurationRep(T, y.head, Zigzag(1, y.zig.start, y.zig.prefix[:P], y.zig.prefix[P:P + C]))
            check(back == x, f"{name}: window round trip differs")
    return f"200 eventually periodic points on each of {', '.join(SYSTEMS)}"


def criterion_5():
    rng = random.Random(5)
    triples = 0
    for name in SYSTEMS:
        T = tower(name)
        for _ in range(250):
            x = random_periodic_rep(T, rng)
            y = branch(T, rng, x, rng.randint(0, 5))
            z = branch(T, rng, y if rng.random() < 0.5 else x, rng.randint(0, 5))
            d = [distance(a, b).value() for a, b in ((x, y), (y, z), (x, z))]
            check(d[2] <= max(d[0], d[1]), f"{name}: ultrametric inequality fails")
            triples += 1
            for a, b, dab in ((x, y, d[0]), (x, z, d[2])):
                for p in range(1, 7):
                    wa, wb = a.window(p), b.window(p)
                    agree = wa.cells == wb.cells and wa.labels == wb.labels
                    check((dab <= Fraction(1, 2 ** p)) == agree, f"{name}: d vs triangle agreement fails at p={p}")
    check(triples >= 1000, "too few triples")
    return f"{triples} triples, p <= 6"


def criterion_6():
    rng = random.Random(6)
    for name in SYSTEMS:
        T = tower(name)
        for _ in range(50):
            x = random_periodic_rep(T, rng)
            n = rng.randint(-3, 3)
            check(shift(x, n).pi(-6, 6) == x.pi(-6 + n, 6 + n), f"{name}: pi does not intertwine the shift")
    T = tower("golden")
    for _ in range(40):
        y = label_seq(random_periodic_rep(T, rng))
        for N in (1, 2, 3):
            check(len(pi_fiber(T, y, N)) == 1, "golden mean fiber is not a singleton")
    T = tower("even")
    big = 0
    for word in [(0,), (1,), (0, 1, 1), (0, 1, 1, 0, 1, 1, 1)]:
        for N in (1, 2, 3):
            fib = pi_fiber(T, LabelSequence.periodic(word), N)
            check(len(fib) <= T.m(2 * N - 1), "fiber larger than the vertex set")
            big = max(big, len(fib))
    for _ in range(40):
        y = label_seq(random_periodic_rep(T, rng))
        for N in (1, 2, 3):
            big = max(big, len(pi_fiber(T, y, N)))
    check(big >= 2, "even shift fibers are all singletons")
    return f"shift intertwined; golden mean fibers singletons; even shift largest fiber {big}"


def criterion_7():
    full = tower("full2")
    c, i = condition_I(full), irreducibility(full)
    check(c.status == CERTIFIED and i.status == CERTIFIED, "full shift verdicts")
    c = condition_I(tower("point"))
    check(c.status == REFUTED and c.exact, "one-point condition (I) verdict")
    i = irreducibility(tower("two"))
    check(i.status == REFUTED, "two-component irreducibility verdict")
    return "full shift Certified/Certified; one-point (I) Refuted exactly; two-component Refuted"


def criterion_8():
    for name in ("full2", "golden", "even"):
        calc = StageCalculator(tower(name))
        for N in range(1, 4):
            for D in range(1, 5):
                s = StageIndex(N, D)
                W = calc.widen_window(s)
                A, B = calc.stage(s), calc.stage(W.target)
                check(list(W.matrix.dot(np.array(A.sizes, dtype=object))) == list(B.sizes),
                      f"{name}: partition law fails at {s}")
        for N in range(1, 4):
            for D in range(1, 4):
                s = StageIndex(N, D)
                a = calc.widen_window(StageIndex(N, D + 1)) @ calc.refine_depth(s)
                b = calc.refine_depth(StageIndex(N + 1, D - 1)) @ calc.widen_window(s)
                check((a.matrix == b.matrix).all(), f"{name}: refine and widen do not commute at {s}")
    return "partition law and commutation on full2, golden mean, even for N <= 3, D <= 3"


def criterion_9():
    G = dim_group(tower("golden"), stages=6)
    for k in (2, 3):
        H = dim_group(tower(f"golden{k}"), stages=6)
        c = compare_invariants(G, H, S=3)
        check(c.outcome == "IntertwinedUpTo" and c.S == 3, f"{k}-block recoding: {c.outcome}")
        check(verify_ladder(G, H, c), f"{k}-block ladder does not replay")
    c = compare_invariants(dim_group(tower("full2"), stages=6), dim_group(tower("full3"), stages=6), S=3)
    check(c.outcome == "Obstructed" and c.invariant == "order-unit growth", f"full2 vs full3: {c.outcome}")
    return f"recodings IntertwinedUpTo(S=3); full2 vs full3 Obstructed at prime {c.values['prime']}"


def criterion_10():
    gm, f2, f3 = (str(DATA / f) for f in ("golden_mean.json", "full2.json", "full3.json"))
    runs = [["groupoid-dump", gm, "--seed", "11"],
            ["analyze", "pi-condition-i", gm, "--seed", "5"],
            ["invariants", gm, "--stages", "3"],
            ["compare", f2, f3],
            ["build-canonical", gm]]
    for argv in runs:
        outs = [subprocess.run([sys.executable, "-m", "bisys.cli", *argv], capture_output=True, check=True).stdout
                for _ in range(3)]
        check(outs[0] and outs[0] == outs[1] == outs[2], f"{argv[0]} output varies between runs")
    return f"{len(runs)} commands, 3 runs each, byte-identical"


CRITERIA = {1: ("golden mean classes", criterion_1), 2: ("axiom suite", criterion_2),
            3: ("rectangle extension", criterion_3), 4: ("round trips", criterion_4),
            5: ("metric", criterion_5), 6: ("factor map", criterion_6), 7: ("dynamics verdicts", criterion_7),
            8: ("partition law", criterion_8), 9: ("invariant comparison", criterion_9),
            10: ("CLI determinism", criterion_10)}


def run_criterion(k):
    title, fn = CRITERIA[k]
    t0 = time.perf_counter()
    try:
        detail, ok = fn(), True
    except AssertionError as exc:
        detail, ok = str(exc), False
    dt = time.perf_counter() - t0
    if ok and dt > TIME_LIMIT:
        ok, detail = False, f"took {dt:.1f}s (limit {TIME_LIMIT:.0f}s); {detail}"
    line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d} ({title}, {dt:.1f}s): {detail}"
    RESULTS[k] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k):
    ok, line = run_criterion(k)
    assert ok, line


if __name__ == "__main__":
    bad = [k for k in sorted(CRITERIA) if not run_criterion(k)[0]]
    sys.exit(1 if bad else 0)
