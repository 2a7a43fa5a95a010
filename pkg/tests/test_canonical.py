import pytest

from bisys import build_canonical, detect_stabilization, golden_mean
from bisys.bisystem import predecessor_set, validate_axioms
from bisys.canonical import prefix_derivative, suffix_derivative, verify_point_semantics
from bisys.tower import Tower

from conftest import canonical, presentation, tower

# class counts per level, frozen from the brute-force builder
M_SEQ = {
    "full2": [1] * 7,
    "full3": [1] * 7,
    "golden": [1, 2, 4, 4, 4, 4, 4],
    "even": [1, 3, 9, 9, 9, 9, 9],
    "point": [1] * 7,
    "two": [1, 2, 2, 2, 2, 2, 2],
    "golden2": [1, 3, 4, 4, 4, 4, 4],
    "golden3": [1, 5, 8, 9, 9, 9, 9],
}
ONSET = {"full2": 0, "full3": 0, "golden": 2, "even": 2, "point": 0, "two": 1, "golden2": 2, "golden3": 3}


@pytest.mark.parametrize("name", sorted(M_SEQ))
def test_class_counts(name):
    B = canonical(name)
    assert [B.m(l) for l in range(7)] == M_SEQ[name]


@pytest.mark.parametrize("name", sorted(ONSET))
def test_stabilization_onset(name):
    assert detect_stabilization(canonical(name)).onset == ONSET[name]


def test_golden_mean_classes():
    B = canonical("golden", 3)
    show = lambda ws: frozenset("".join(map(str, w)) for w in ws)
    assert set(map(show, B.words[1])) == {frozenset({"0", "1"}), frozenset({"0"})}
    assert set(map(show, B.words[2])) == {frozenset({"00", "01", "10"}), frozenset({"00", "10"}),
                                          frozenset({"00", "01"}), frozenset({"00"})}


def test_derivatives():
    W = frozenset({(0, 1), (0, 0), (1, 0)})
    assert prefix_derivative(W, 0) == {(1,), (0,)}
    assert suffix_derivative(W, 0) == {(0,), (1,)}
    assert prefix_derivative(W, 1) == {(0,)}


@pytest.mark.parametrize("name", ["full2", "golden", "even", "two", "point"])
def test_point_semantics(name):
    r = verify_point_semantics(presentation(name), canonical(name, 4), max_period=4)
    assert r["failed"] == 0, r["failures"]
    assert r["language_matches"]
    assert r["checked"] > 0


def test_unstable_tower_refuses_high_levels():
    from bisys.errors import DepthExhausted
    T = Tower(build_canonical(golden_mean(), 2))
    assert not T.stable
    with pytest.raises(DepthExhausted):
        T.m(3)


@pytest.mark.parametrize("name", ["golden", "even", "two", "golden2"])
def test_tower_frame_matches_larger_build(name):
    """Levels above the top of a stable build reproduce a taller build exactly."""
    T = tower(name, 6)
    big = canonical(name, 9)
    for l in range(10):
        assert T.m(l) == big.m(l)
        fam = {frozenset(T.P_words(l, i)) for i in range(T.m(l))}
        assert fam == {frozenset(predecessor_set(big, l, i)) for i in range(big.m(l))}
        for i in range(T.m(l)):
            assert T.psize(l, i) == len(T.P_words(l, i))


def test_built_systems_validate_at_many_levels():
    for L in range(1, 6):
        assert validate_axioms(build_canonical(golden_mean(), L)).ok


def test_first_symbol_counts_and_least_word():
    T = tower("even")
    for l in range(1, 8):
        for i in range(T.m(l)):
            ws = T.P_words(l, i)
            counts = T.first_symbol_counts(l, i)
            for a, c in counts.items():
                assert c == sum(1 for w in ws if w[0] == a)
            assert T.least_word(l, i) == min(ws)
            for a in counts:
                assert T.least_word(l, i, a) == min(w for w in ws if w[0] == a)


def test_tower_steps_are_derivatives():
    T = tower("golden")
    for l in range(1, 9):
        for i in range(T.m(l)):
            ws = T.P_words(l, i)
            for a in range(T.k):
                t = T.down(l, i, a)
                tail = {w[1:] for w in ws if w[0] == a}
                assert (t is None) == (not tail)
                if t is not None:
                    assert set(T.P_words(l - 1, t)) == tail
                s = T.back(l, i, a)
                head = {w[:-1] for w in ws if w[-1] == a}
                assert (s is None) == (not head)
                if s is not None:
                    assert set(T.P_words(l - 1, s)) == head
    assert all(T.in_P(5, i, w) for i in range(T.m(5)) for w in T.P_words(5, i))
    assert not any(T.in_P(3, i, (1, 1, 0)) for i in range(T.m(3)))
