import sys

import pytest

sys.setrecursionlimit(100_000)


from cutrestrict.formulas import parse_formula, parse_sequent  # noqa: E402


@pytest.fixture
def F():
    return parse_formula


@pytest.fixture
def S():
    return parse_sequent
