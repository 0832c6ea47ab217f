import pytest

from stratcheck import PairAtPoint, catalog, graph_set

ORIGIN = (0.0, 0.0, 0.0)


@pytest.fixture(scope="session")
def sg():
    return catalog("Sg")


@pytest.fixture(scope="session")
def sg_pair(sg):
    return PairAtPoint(sg, ("W", "X"), ORIGIN)


@pytest.fixture(scope="session")
def sf_pair():
    return PairAtPoint(catalog("Sf"), ("Y", "X"), ORIGIN)


@pytest.fixture(scope="session")
def halfplane_pair():
    return PairAtPoint(catalog("halfplane"), ("Y", "X"), ORIGIN)


@pytest.fixture(scope="session")
def z3_pair():
    return PairAtPoint(graph_set("z3", "z^3"), ("Y", "X"), ORIGIN)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[n] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
