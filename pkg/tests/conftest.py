"""Shared fixtures: small handwritten networks and one reusable synthetic run."""

import pytest

from sparsemfd.network import DetectorSite, Link, Network
from sparsemfd.synth import SyntheticScenario, generate_scenario


@pytest.fixture
def chain_network():
    # a --1.0km-- b --2.0km-- c
    return Network((
        Link("A", "a", "b", 1.0, 1),
        Link("B", "b", "c", 2.0, 2),
    ))


@pytest.fixture
def quad_network():
    """Four links of 1..4 km in a single hierarchy."""
    return Network(tuple(
        Link(f"L{i}", f"n{i}", f"n{i + 1}", float(i + 1), 1) for i in range(4)
    ))


def make_tiered_sites(counts=(39, 75, 28)):
    """A chain network with ``counts[h-1]`` links per hierarchy h and one
    detector per link. Mirrors the detector census used by the bundled
    synthetic study."""
    links = []
    sites = []
    node = 0
    for hierarchy, count in enumerate(counts, start=1):
        for i in range(count):
            link_id = f"h{hierarchy}_{i}"
            links.append(Link(link_id, f"n{node}", f"n{node + 1}", 0.4, hierarchy))
            sites.append(DetectorSite(f"d_{link_id}", link_id))
            node += 1
    return Network(tuple(links)), tuple(sites)


@pytest.fixture
def tiered_sites():
    return make_tiered_sites()


@pytest.fixture(scope="session")
def default_truth():
    """Generated data for the default scenario, shared across slow tests."""
    scenario = SyntheticScenario()
    return scenario, generate_scenario(scenario)
