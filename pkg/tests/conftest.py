import pytest

from cascadenet.graph import KIND_CODE, EdgeRecord, Graph, NodeMeta

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def plain(n, pairs):
    return Graph.from_edge_list(n, pairs)


def path_graph(n):
    return plain(n, [(i + 1, i) for i in range(n - 1)])


def complete_graph(n):
    return plain(n, [(i, j) for i in range(n) for j in range(i)])


def star_graph(leaves):
    return plain(leaves + 1, [(i, 0) for i in range(1, leaves + 1)])


def colored_graph(nodes, edges, model="security"):
    """nodes: list of (is_seed, colors); edges: list of (u, v, kind)."""
    metas = [NodeMeta(i + 1, seed, tuple(colors)) for i, (seed, colors) in enumerate(nodes)]
    recs = [EdgeRecord(max(u, v), min(u, v), kind, max(u, v) + 1) for u, v, kind in edges]
    return Graph.from_records(metas, recs, f"{model}:toy")
