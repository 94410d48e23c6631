import sys

import numpy as np
import pytest

from lofu.algebra import parse_group_spec
from lofu.nerve import Cochain
from lofu.paths import PathSpace
from lofu.spaces import BaseSpace, fixture

Z = parse_group_spec("Z")
Z2 = parse_group_spec("Z/2")
Z6 = parse_group_spec("Z/6")

_spaces = {}


def path_space(name: str, L: int, basepoint: int = 0) -> PathSpace:
    key = (name, L, basepoint)
    if key not in _spaces:
        _spaces[key] = PathSpace(BaseSpace(fixture(name), basepoint), L)
    return _spaces[key]


def circle_generator(space_or_base, group=Z, sign=1) -> Cochain:
    """α(0,1) = 1, α(1,0) = -1, zero elsewhere."""
    base = getattr(space_or_base, "base", space_or_base)
    vals = {(0, 1): sign, (1, 0): -sign}
    return Cochain.from_function(base.star.nerve, 1, group, lambda t: vals.get(t, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def circle2():
    return path_space("circle", 2)


@pytest.fixture(scope="session")
def circle3():
    return path_space("circle", 3)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
