import numpy as np
import pytest
from hypothesis import settings

from tailtrees import Discrete, HuslerReiss, TailTreeModel, Tree

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def star():
    # node 2 is the hub
    return Tree(["1", "2", "3", "4"], [("1", "2"), ("2", "3"), ("2", "4")])


@pytest.fixture
def seven():
    return Tree(
        [str(k) for k in range(1, 8)],
        [("1", "4"), ("2", "4"), ("3", "4"), ("4", "5"), ("5", "6"), ("5", "7")],
    )


@pytest.fixture
def six():
    return Tree([str(k) for k in range(1, 7)], [("1", "2"), ("2", "3"), ("2", "5"), ("4", "5"), ("5", "6")])


@pytest.fixture
def hr_chain():
    tree = Tree(["1", "2", "3"], [("1", "2"), ("2", "3")])
    return TailTreeModel(tree, 1.0, {v: 1.0 for v in tree.nodes}, {("1", "2"): HuslerReiss(1.0), ("2", "3"): HuslerReiss(1.0)})


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def degenerate_model(tree, values, alpha=1.0, c=None):
    """Model whose stored increments are point masses ``values[(a, b)]``."""
    incs = {e: Discrete.degenerate(v) for e, v in values.items()}
    return TailTreeModel(tree, alpha, c or {v: 1.0 for v in tree.nodes}, incs)


#: one line per acceptance criterion, filled by test_acceptance and echoed in the summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
