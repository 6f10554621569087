import pytest

from graphpde.presets import paper_graph


@pytest.fixture
def mixed_net():
    return paper_graph(neumann=False)


@pytest.fixture
def neumann_net():
    return paper_graph(neumann=True)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
