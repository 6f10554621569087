import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphpde.network import (
    GraphFormatError,
    Network,
    degree,
    dump_network,
    load_network,
    parse_network,
    serialize_network,
    validate,
)
from helpers import random_network


def test_paper_graph_degrees(mixed_net):
    assert degree(mixed_net, "x1") == 5.0
    assert degree(mixed_net, "x2") == 4.0
    assert degree(mixed_net, "x3") == 3.0
    assert degree(mixed_net, "x4") == 5.0
    assert max(degree(mixed_net, x) for x in mixed_net.interior) == 5.0


def test_paper_graph_is_valid(mixed_net, neumann_net):
    assert validate(mixed_net) == []
    assert validate(neumann_net) == []
    assert not mixed_net.sigma_vanishes
    assert neumann_net.sigma_vanishes


def test_gamma_set(mixed_net):
    assert "x5" in mixed_net.gamma and "x6" in mixed_net.gamma
    assert "x1" not in mixed_net.gamma
    net = Network.from_edges(["a"], ["d", "r"], [("a", "d", 1), ("a", "r", 1)], {"d": (0, 1), "r": (1, 1)})
    assert list(net.gamma) == ["r"]
    assert len(net.gamma) == 1


def test_boundary_boundary_edges_are_ignored():
    net = Network.from_edges(["a"], ["y", "z"], [("a", "y", 1), ("a", "z", 1), ("y", "z", 5)],
                             {"y": (1, 0), "z": (1, 0)})
    assert net.weights[1, 2] == 5
    assert net.w[1, 2] == 0
    assert degree(net, "y") == 1


def test_vector_from_mapping_and_sequence(mixed_net):
    u = mixed_net.vector({"x1": 2.0, "x4": 1.0})
    np.testing.assert_array_equal(u, [2, 0, 0, 1, 0, 0])
    np.testing.assert_array_equal(mixed_net.vector([1, 2, 3, 4, 5, 6]), [1, 2, 3, 4, 5, 6])
    with pytest.raises(ValueError):
        mixed_net.vector([1, 2])
    with pytest.raises(KeyError, match="unknown vertex"):
        mixed_net.vector({"nope": 1.0})


def test_validate_reports_every_problem():
    W = np.zeros((4, 4))
    W[0, 1], W[1, 0] = 1.0, 2.0  # asymmetric
    W[2, 2] = 1.0  # self-loop
    net = Network(("a", "b", "c", "z"), W, ("z",), {"z": 0.0}, {"z": 0.0})
    msgs = "\n".join(validate(net))
    assert "asymmetric" in msgs
    assert "self-loop" in msgs
    assert "disconnected" in msgs
    assert "no interior neighbor" in msgs
    assert "degenerate boundary coefficient" in msgs


def test_validate_negative_and_empty():
    W = np.array([[0.0, -1.0], [-1.0, 0.0]])
    assert any("negative" in m for m in validate(Network(("a", "z"), W, ("z",), {"z": 1.0}, {"z": 0.0})))
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    net = Network(("y", "z"), W, ("y", "z"), {"y": 1.0, "z": 1.0}, {"y": 0.0, "z": 0.0})
    assert "no interior vertices" in validate(net)


def test_constructor_rejects_inconsistent_labels():
    with pytest.raises(ValueError, match="duplicate"):
        Network(("a", "a"), np.zeros((2, 2)), (), {}, {})
    with pytest.raises(ValueError, match="shape"):
        Network(("a", "b"), np.zeros((3, 3)), (), {}, {})
    with pytest.raises(ValueError, match="unknown boundary"):
        Network(("a",), np.zeros((1, 1)), ("q",), {}, {})


PAPER_TEXT = """
# six-vertex example
[vertices]
x1 interior
x2 interior
x3 interior
x4 interior
x5 boundary
x6 boundary
[edges]
x1 x2 2
x1 x3 2
x2 x4 2
x3 x4 1
x1 x5 1
x4 x6 2
[boundary]
x5 1 1
x6 1 0
"""


def test_parse_matches_preset(mixed_net):
    assert parse_network(PAPER_TEXT) == mixed_net


@pytest.mark.parametrize("text, msg", [
    ("[vertices]\na interior\nz boundary\n[edges]\na a 1\n[boundary]\nz 1 0\n", "self-loop"),
    ("[vertices]\na interior\nz boundary\n[edges]\na z 1\na z 2\n[boundary]\nz 1 0\n", "duplicate edge"),
    ("[vertices]\na interior\nz boundary\n[edges]\na q 1\n[boundary]\nz 1 0\n", "unknown vertex"),
    ("[vertices]\na interior\nz boundary\n[edges]\na z 1\n", "no boundary coefficients"),
    ("[vertices]\na inside\n", "interior|boundary"),
    ("[nodes]\n", "unknown section"),
    ("a interior\n", "outside of a section"),
    ("[vertices]\na interior\nz boundary\n[edges]\na z one\n[boundary]\nz 1 0\n", "line"),
])
def test_parse_errors(text, msg):
    with pytest.raises(GraphFormatError, match=msg):
        parse_network(text)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), ni=st.integers(1, 8), nb=st.integers(1, 4))
def test_serialize_round_trip(seed, ni, nb):
    net = random_network(np.random.default_rng(seed), ni, nb)
    assert validate(net) == []
    assert parse_network(serialize_network(net)) == net


def test_file_round_trip(tmp_path, mixed_net):
    path = tmp_path / "g.graph"
    dump_network(mixed_net, path)
    assert load_network(path) == mixed_net
