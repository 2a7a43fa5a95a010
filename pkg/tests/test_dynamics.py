import pytest

from bisys import build_canonical, golden_mean
from bisys.configuration import agreement_corner, shift
from bisys.dynamics import (CERTIFIED, REFUTED, UNKNOWN, condition_I, essential_freeness_probe, groupoid_dump,
                            irreducibility, pi_condition_I_probe, point_from_cylinder)
from bisys.tower import Tower

from conftest import tower

# exact verdicts on stabilized towers
EXPECTED = {
    "full2": (CERTIFIED, CERTIFIED),
    "full3": (CERTIFIED, CERTIFIED),
    "golden": (CERTIFIED, CERTIFIED),
    "golden2": (CERTIFIED, CERTIFIED),
    "point": (REFUTED, CERTIFIED),
    "two": (CERTIFIED, REFUTED),
    # the class of all words at level 2 has a single context pair, giving an isolated point
    "even": (REFUTED, REFUTED),
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_exact_verdicts(name):
    T = tower(name)
    c, i = condition_I(T), irreducibility(T)
    assert (c.status, i.status) == EXPECTED[name]
    assert c.exact and i.exact


def test_condition_I_witness_on_one_point():
    v = condition_I(tower("point"))
    assert v.witness["reason"] == "exactly one infinite zigzag"
    assert v.witness["forced_path"]


def test_irreducibility_witness_on_two_components():
    v = irreducibility(tower("two"))
    assert v.witness["level"] == 1 and v.witness["vertex"] != v.witness["path_vertex"]


def test_bounded_mode_on_unstable_tower():
    T = Tower(build_canonical(golden_mean(), 2))
    assert not T.stable
    for v in (condition_I(T, bound=1, depth=1), irreducibility(T, bound=1, depth=1)):
        assert not v.exact
        assert v.status in (CERTIFIED, UNKNOWN)
    probe = essential_freeness_probe(T, n_max=2)
    assert all(v.status == UNKNOWN for v in probe.values())
    assert pi_condition_I_probe(T).status == UNKNOWN


def test_essential_freeness_refuted_on_one_point():
    probe = essential_freeness_probe(tower("point"), n_max=3)
    assert [probe[n].status for n in (1, 2, 3)] == [REFUTED] * 3
    assert probe[1].witness["corner"][0] < 0


@pytest.mark.parametrize("name", ["full2", "golden", "two"])
def test_essential_freeness_unknown_without_isolated_points(name):
    probe = essential_freeness_probe(tower(name), n_max=2, depth=3)
    assert all(v.status == UNKNOWN and "no obstruction found" in v.note for v in probe.values())


def test_point_from_cylinder_is_fixed_on_one_point():
    T = tower("point")
    from bisys.dynamics import _forced_zigzag
    pre, cyc = _forced_zigzag(T, 1, 0)
    x = point_from_cylinder(T, 1, 0, T.P_words(1, 0)[0], pre, cyc)
    assert agreement_corner(shift(x, 1), x) is not None


def test_pi_condition_I():
    assert pi_condition_I_probe(tower("golden"), depth=3, samples=4).status == CERTIFIED
    v = pi_condition_I_probe(tower("point"))
    assert v.status == CERTIFIED and "vacuous" in v.note


@pytest.mark.parametrize("name", ["golden", "even", "two"])
def test_groupoid_laws(name):
    dump = groupoid_dump(tower(name), samples=3)
    assert dump["laws"]["failures"] == 0
    assert dump["laws"]["composition"] > 0
    for row in dump["elements"]:
        assert row["range"] in dump["points"] and row["source"] in dump["points"]


def test_groupoid_dump_is_deterministic():
    assert groupoid_dump(tower("golden"), seed=4) == groupoid_dump(tower("golden"), seed=4)
