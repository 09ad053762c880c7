import numpy as np
import pytest

from mwconsensus import (
    RunSetup,
    Topology,
    build_ortho_set,
    sample_coefficients,
)

SEC6_EDGES = [(1, 2), (2, 3), (1, 3), (2, 5), (3, 4), (4, 5)]

# Lifted initial states: virtual block first, then the real block.
SEC6_INITIAL = np.array(
    [
        [0.20, 0.30, 0.25, 0.60, 0.32, 0.65],
        [0.60, 0.72, 0.57, 0.24, 0.91, 0.95],
        [0.52, 0.71, 0.80, 0.20, 0.12, 0.62],
        [0.02, 0.04, 0.12, 0.82, 0.38, 0.23],
        [0.37, 0.17, 0.77, 0.33, 0.32, 0.72],
    ]
)


@pytest.fixture(scope="session")
def sec6_topology():
    return Topology.build(5, SEC6_EDGES, adversaries=[1])


@pytest.fixture(scope="session")
def vectors6():
    return build_ortho_set(3, 3)


@pytest.fixture(scope="session")
def sec6_schedule(sec6_topology, vectors6):
    return sample_coefficients(sec6_topology, 2.0, vectors6.d_star, seed=7)


@pytest.fixture(scope="session")
def sec6_setup(sec6_topology, vectors6, sec6_schedule):
    return RunSetup(
        topology=sec6_topology,
        vectors=vectors6,
        schedule=sec6_schedule,
        initial_states=SEC6_INITIAL.copy(),
    )
