import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from cascade_dtw.prnet import Arc, PropagationNetwork, WeightVector  # noqa: E402

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)
weight_vectors = st.builds(WeightVector, unit, unit, unit)
sequences = st.lists(weight_vectors, min_size=1, max_size=6)


def W(*xs):
    return WeightVector(*map(float, xs))


def chain(*weights, label=None):
    """s -> n1 -> n2 ... with the given arc weights."""
    nodes = ["s"] + [f"n{i}" for i in range(1, len(weights) + 1)]
    arcs = tuple(Arc(nodes[i], nodes[i + 1], W(*w), i + 1) for i, w in enumerate(weights))
    return PropagationNetwork("s", arcs, label)


def star(*weights, label=None):
    """s -> leaf_i for each weight: one single-arc dipath per weight."""
    arcs = tuple(Arc("s", f"l{i}", W(*w), 1) for i, w in enumerate(weights))
    return PropagationNetwork("s", arcs, label)


def random_dag(rng: random.Random, n_nodes: int, p: float = 0.35) -> PropagationNetwork:
    """Random single-source DAG over a topological order; rank = longest depth of the head."""
    nodes = [f"v{i}" for i in range(n_nodes)]
    arcs = []
    for j in range(1, n_nodes):
        parents = [i for i in range(j) if rng.random() < p] or [rng.randrange(j)]
        arcs.extend((i, j) for i in parents)
    depth = [0] * n_nodes
    for i, j in sorted(arcs, key=lambda a: a[1]):
        depth[j] = max(depth[j], depth[i] + 1)
    return PropagationNetwork(
        nodes[0],
        tuple(Arc(nodes[i], nodes[j], W(rng.random(), rng.random(), rng.random()), depth[j]) for i, j in arcs),
    )


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
