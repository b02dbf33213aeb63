import pytest

from ttforge.graphs import GraphMap, SerreGraph, rose
from ttforge.randmaps import corpus

CORPUS_SEED = 20260817
CORPUS_SIZE = 100


def rose2_map(images):
    g = rose(["a", "b"])
    return GraphMap(g, g, {"v": "v"}, images)


@pytest.fixture(scope="session")
def sigma():
    """Non-injective on the fundamental group; both generators hit a b."""
    return rose2_map({"a": "a b", "b": "a b"})


@pytest.fixture(scope="session")
def fib():
    """The golden-ratio substitution; a homotopy equivalence."""
    return rose2_map({"a": "b", "b": "a b"})


@pytest.fixture(scope="session")
def cyc2():
    """Period-two vertices: no fixed point, promotion needs the square."""
    g = SerreGraph(["u", "w"], [("c1", "u", "w"), ("c2", "w", "u")])
    return GraphMap(g, g, {"u": "w", "w": "u"},
                    {"c1": "c2", "c2": "c1 c2 c1"})


@pytest.fixture(scope="session")
def nilp():
    """Kills the whole group in three steps; not a train track map."""
    g = rose(["a", "b", "c"])
    return GraphMap(g, g, {"v": "v"}, {"a": "c", "b": "c", "c": "a -b"})


# maps frozen from generator sweeps: promotion constants beyond the common
# n = 1, preperiod 0 profile

@pytest.fixture(scope="session")
def stab2():
    """Kernel stabilizes at 2, so the image subgroup of the square is core."""
    g = rose(["e0", "e1", "e2", "e3", "e4"])
    return GraphMap(g, g, {"v": "v"}, {
        "e0": "-e1 -e3", "e1": "e2", "e2": "e0 -e2 -e2 e4",
        "e3": "e2", "e4": "-e3"})


@pytest.fixture(scope="session")
def stab3():
    g = rose(["e0", "e1", "e2", "e3", "e4"])
    return GraphMap(g, g, {"v": "v"}, {
        "e0": "e1 e3", "e1": "e4", "e2": "-e4", "e3": "-e0",
        "e4": "-e3 e2"})


@pytest.fixture(scope="session")
def pre1_r2():
    """Period-two vertex whose basepoint orbit upstairs has a preperiod."""
    g = SerreGraph(["v0", "v1", "v2"],
                   [("e0", "v0", "v1"), ("e1", "v2", "v1"),
                    ("e2", "v0", "v2")])
    return GraphMap(g, g, {"v0": "v2", "v1": "v0", "v2": "v0"}, {
        "e0": "e1 -e0", "e1": "e0 -e1 -e2", "e2": "-e2 e0 -e1 -e2"})


@pytest.fixture(scope="session")
def pre1_r3():
    g = SerreGraph(["v0", "v1", "v2"],
                   [("e0", "v0", "v1"), ("e1", "v2", "v0"),
                    ("e2", "v2", "v1")])
    return GraphMap(g, g, {"v0": "v1", "v1": "v2", "v2": "v0"}, {
        "e0": "-e2", "e1": "e0", "e2": "-e1 e2 -e0 -e1"})


@pytest.fixture(scope="session")
def corpus100():
    return corpus(CORPUS_SIZE, CORPUS_SEED)


@pytest.fixture(scope="session")
def named_fixture_maps(sigma, fib, cyc2, stab2, stab3, pre1_r2, pre1_r3):
    return {"sigma": sigma, "fib": fib, "cyc2": cyc2, "stab2": stab2,
            "stab3": stab3, "pre1_r2": pre1_r2, "pre1_r3": pre1_r3}
