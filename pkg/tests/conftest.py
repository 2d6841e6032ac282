import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xfree import arithmetic_progression, corner, solve_rx_exact
from xfree.patterns import Pattern


@pytest.fixture(scope="session")
def ap3():
    return arithmetic_progression(3)


@pytest.fixture(scope="session")
def corner2():
    return corner(2)


@pytest.fixture(scope="session")
def battery():
    """The standing pattern battery used across equivalence tests."""
    return {
        "ap3": arithmetic_progression(3),
        "spread13": Pattern(d=1, points=((0,), (1,), (3,)), primitive=True),
        "spread23": Pattern(d=1, points=((0,), (2,), (3,)), primitive=True),
        "corner2": corner(2),
        "corner3": corner(3),
        "ap4": arithmetic_progression(4),
    }


@pytest.fixture(scope="session")
def ap3_exact_table(ap3):
    """Exact extremal values for 3-term progressions, n = 1..20."""
    return {n: solve_rx_exact(ap3, n).lower for n in range(1, 21)}
