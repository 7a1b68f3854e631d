import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gamecomonads.structures import Graph, graph_structure  # noqa: E402


def atlas_graphs(max_n=6, connected_only=False):
    """Non-isomorphic graphs with 1..max_n vertices."""
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g
    out = []
    for g in graph_atlas_g():
        n = g.number_of_nodes()
        if n == 0 or n > max_n:
            continue
        if connected_only and not nx.is_connected(g):
            continue
        out.append(Graph(n, [tuple(sorted(e)) for e in g.edges()]))
    return out


@pytest.fixture(scope="session")
def graphs6():
    return atlas_graphs(6)


@pytest.fixture(scope="session")
def digraphs3():
    from gamecomonads.samples import digraphs_up_to
    return digraphs_up_to(3)


def as_structure(g):
    return graph_structure(g)
