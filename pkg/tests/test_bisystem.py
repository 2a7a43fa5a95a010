import copy
import json

import numpy as np
import pytest

from bisys import bisystem as bs
from bisys.bisystem import LambdaBiSystem, validate_axioms
from bisys.errors import InvalidPresentation

from conftest import canonical

AXIOMS = ["top-singleton", "right-resolving", "left-resolving", "local-property", "fpcc", "essential"]


def mutate(B, minus=None, plus=None, levels=None):
    return LambdaBiSystem(B.alphabet, levels or copy.deepcopy(B.levels),
                          minus if minus is not None else copy.deepcopy(B.minus),
                          plus if plus is not None else copy.deepcopy(B.plus))


@pytest.mark.parametrize("name", ["full2", "full3", "golden", "even", "point", "two", "golden2"])
def test_canonical_passes_all_axioms(name):
    rep = validate_axioms(canonical(name))
    assert rep.ok, rep.to_dict()
    assert set(rep.results) == set(AXIOMS)
    assert rep.level == 6


def test_right_resolving_violation():
    B = canonical("golden", 3)
    minus = copy.deepcopy(B.minus)
    s, t, a = minus[1][0]
    other = next(j for j in range(B.m(1)) if j != t)
    minus[1].append((s, other, a))
    rep = validate_axioms(mutate(B, minus=minus))
    r = rep.results["right-resolving"]
    assert not r["ok"]
    assert r["witness"]["vertex"] == B.name(2, s) and r["witness"]["level"] == 2


def test_left_resolving_violation():
    B = canonical("golden", 3)
    plus = copy.deepcopy(B.plus)
    s, t, a = plus[1][0]
    other = next(j for j in range(B.m(1)) if j != s)
    plus[1].append((other, t, a))
    r = validate_axioms(mutate(B, plus=plus)).results["left-resolving"]
    assert not r["ok"]
    assert r["witness"]["vertex"] == B.name(2, t)


def test_local_property_violation():
    B = canonical("golden", 3)
    plus = copy.deepcopy(B.plus)
    removed = plus[1].pop(0)
    r = validate_axioms(mutate(B, plus=plus)).results["local-property"]
    assert not r["ok"]
    assert r["witness"]["outer"] != r["witness"]["inner"]


def test_fpcc_violation():
    # relabel one E- edge on the full 2-shift: follower sets change, predecessor sets do not
    B = canonical("full2", 2)
    minus = copy.deepcopy(B.minus)
    minus[0] = [(0, 0, 0)]
    r = validate_axioms(mutate(B, minus=minus)).results["fpcc"]
    assert not r["ok"]
    assert r["witness"]["vertex"] == "v1_0"


def test_essentiality_violation():
    B = canonical("golden", 3)
    levels = copy.deepcopy(B.levels)
    levels[3].append("orphan")
    r = validate_axioms(mutate(B, levels=levels)).results["essential"]
    assert not r["ok"]
    assert r["witness"]["vertex"] == B.name(3, B.m(3))


def test_top_singleton_violation():
    B = canonical("golden", 2)
    levels = copy.deepcopy(B.levels)
    levels[0].append("extra")
    assert not validate_axioms(mutate(B, levels=levels)).results["top-singleton"]["ok"]


def test_ambiguous_squares_flagged():
    # two parallel squares with identical labels and no explicit phi
    B = LambdaBiSystem(("a",), [["r"], ["x", "y"], ["z"]],
                       minus=[[(0, 0, 0), (1, 0, 0)], [(0, 0, 0), (0, 1, 0)]],
                       plus=[[(0, 0, 0), (0, 1, 0)], [(0, 0, 0), (1, 0, 0)]])
    r = validate_axioms(B).results
    assert not r["right-resolving"]["ok"] or not r["local-property"]["ok"]


def test_follower_equals_predecessor_on_golden():
    B = canonical("golden", 5)
    for l in range(6):
        for i in range(B.m(l)):
            assert bs.follower_set(B, l, i) == bs.predecessor_set(B, l, i) == set(B.words[l][i])


@pytest.mark.parametrize("name", ["golden", "even", "two"])
def test_json_roundtrip(name):
    B = canonical(name, 4)
    d = bs.to_dict(B, "abc")
    text = json.dumps(d)
    C = bs.from_dict(json.loads(text))
    assert C.levels == B.levels and C.minus == B.minus and C.plus == B.plus
    assert C.phi == B.phi
    assert validate_axioms(C).ok
    assert bs.dumps(C, "abc") == bs.dumps(B, "abc")


@pytest.mark.parametrize("doc", [{}, {"schema": "bisystem/1"}, {"schema": "other"},
                                 {"schema": "bisystem/1", "alphabet": ["a"], "levels": [["x"], ["y"]],
                                  "edges": [{"src": "x", "tgt": "y", "label": "a", "kind": "-"}]}])
def test_bad_bisystem_documents(doc):
    with pytest.raises(InvalidPresentation):
        bs.from_dict(doc)


def test_square_map_is_label_determined():
    B = canonical("golden", 5)
    explicit = bs.square_map(B)
    B2 = mutate(B)
    assert bs.square_map(B2) == explicit


def test_incidence_shapes_and_slices():
    B = canonical("golden", 4)
    inc = bs.incidence(B)
    for l in range(B.top):
        assert inc.minus[l].shape == (B.m(l + 1), B.m(l))
        assert inc.plus[l].shape == (B.m(l), B.m(l + 1))
        assert np.array_equal(sum(inc.minus_slices[l]), inc.minus[l])
        # right-resolving: each slice has at most one 1 per row
        assert all(s.sum(axis=1).max() <= 1 for s in inc.minus_slices[l])
        assert all(s.sum(axis=0).max() <= 1 for s in inc.plus_slices[l])


def test_dot_output():
    text = bs.to_dot(canonical("golden", 2))
    assert text.startswith("digraph")
    assert "dashed" in text and "rank=same" in text
