#!/usr/bin/env python3
"""Why the weights must switch: a static rank-deficient weight stalls.

A single positive semi-definite matrix on every edge keeps the network
connected, yet the Laplacian kernel is much larger than the consensus
space, and the protocol freezes the extra components: agents settle on
different limits (cluster consensus), even though the average is still
conserved.
"""

import numpy as np

from mwconsensus import (
    StaticWeights,
    Topology,
    assemble_laplacian,
    characterize_H,
    consensus_subspace,
    run_provider,
)

EDGES = [(1, 2), (2, 3), (1, 3), (2, 5), (3, 4), (4, 5)]


def main() -> None:
    topo = Topology.build(5, EDGES)
    D = 6
    u = np.zeros(D)
    u[:2] = 1.0  # the weight only couples the first two coordinates
    W = np.outer(u, u)

    L = assemble_laplacian(topo, {e: W for e in topo.edges})
    kernel = characterize_H(topo, {e: W for e in topo.edges})
    R = consensus_subspace(5, D)
    print(f"Laplacian kernel dimension: {kernel.dim}")
    print(f"consensus space dimension:  {R.dim}")
    print("=> every kernel direction beyond the consensus space is a frozen")
    print("   disagreement pattern the dynamics can never remove.\n")

    rng = np.random.default_rng(11)
    start = rng.uniform(size=(5, D))
    trajectory = run_provider(start, StaticWeights(topo, W), sigma=0.1, steps=10_000)
    print(f"after {trajectory.steps} steps:")
    for agent in range(5):
        print(f"  agent {agent + 1}:", np.round(trajectory.final[agent], 4))
    print("\ninter-agent spread:", f"{trajectory.spread()[-1]:.4f}",
          "(never fell below", f"{trajectory.spread().min():.4f})")
    print("mean drift:", f"{trajectory.conservation_residual():.2e}",
          "- the average is conserved, it is just never reached")


if __name__ == "__main__":
    main()
