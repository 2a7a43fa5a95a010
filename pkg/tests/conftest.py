import functools
import sys

import pytest
from hypothesis import HealthCheck, settings

from bisys import build_canonical, even_shift, full_shift, golden_mean, higher_block, one_point, two_full_shifts
from bisys.tower import Tower

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

SYSTEMS = {
    "full2": lambda: full_shift(2),
    "full3": lambda: full_shift(3),
    "golden": golden_mean,
    "even": even_shift,
    "point": one_point,
    "two": two_full_shifts,
    "golden2": lambda: higher_block(golden_mean(), 2),
    "golden3": lambda: higher_block(golden_mean(), 3),
}


@functools.lru_cache(maxsize=None)
def presentation(name):
    return SYSTEMS[name]()


@functools.lru_cache(maxsize=None)
def canonical(name, L=6):
    return build_canonical(presentation(name), L)


@functools.lru_cache(maxsize=None)
def tower(name, L=6):
    return Tower(canonical(name, L))


@pytest.fixture(params=["full2", "full3", "golden", "even"])
def core_name(request):
    return request.param


@pytest.fixture(params=["full2", "golden", "even", "two", "golden2"])
def periodic_name(request):
    """Systems used for random-point tests (all stabilize by L = 6)."""
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
