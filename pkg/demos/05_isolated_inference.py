#!/usr/bin/env python3
"""Where the privacy guarantee ends: a victim surrounded by adversaries.

If every neighbor of an agent is adversarial, the adversaries can sum the
observed edge flows and, once consensus is reached, substitute their own
state for the victim's — recovering the victim's initial state exactly in
the limit.  One legitimate neighbor breaks this: the same estimator stays
biased, and the two-world construction proves no better estimator exists.
"""

import numpy as np

from mwconsensus import (
    RunSetup,
    Topology,
    build_ortho_set,
    build_setup,
    capture_run,
    construct_alternative_world,
    infer_isolated,
    load_config,
    sample_coefficients,
    verify_indistinguishability,
)
from pathlib import Path

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "two_node_attack.json"


def main() -> None:
    # Case A: two agents, the victim's only neighbor is the adversary.
    setup = build_setup(load_config(CONFIG))
    trajectory, log = capture_run(setup, steps=20_000, epsilon=1e-7)
    horizon = int(np.nonzero(trajectory.residuals < 1e-7)[0][0])
    result = infer_isolated(log, setup.topology, a=1, b=2, horizon=horizon)
    error = np.max(np.abs(result.estimate - setup.initial_states[1]))
    print("case A: adversary 1 -- victim 2 (no other neighbors)")
    print(f"  consensus residual {trajectory.residuals[horizon]:.2e} at step {horizon}")
    print(f"  estimate error: {error:.2e}  (conclusive: {result.conclusive})")
    print("  true start:", np.round(setup.initial_states[1], 4))
    print("  estimate:  ", np.round(result.estimate, 4))

    # Case B: a triangle with one legitimate neighbor.
    topo = Topology.build(3, [(1, 2), (2, 3), (1, 3)], adversaries=[1])
    vectors = build_ortho_set(3, 3)
    schedule = sample_coefficients(topo, 2.0, vectors.d_star, seed=9)
    initial = np.random.default_rng(4).uniform(size=(3, 6))
    setup3 = RunSetup(topo, vectors, schedule, initial)
    trajectory3, log3 = capture_run(setup3, steps=4000)
    result3 = infer_isolated(log3, topo, a=1, b=2, horizon=trajectory3.steps)
    error3 = np.max(np.abs(result3.estimate - initial[1]))
    print("\ncase B: triangle, victim 2 keeps legitimate neighbor 3")
    print(f"  same estimator error: {error3:.2e}  (conclusive: {result3.conclusive})")

    shift = np.array([0.35, -0.25, 0.2])
    world = construct_alternative_world(setup3, 2, 3, initial[1][3:] + shift, seed=0)
    report = verify_indistinguishability(setup3, world, steps=400)
    gap = np.linalg.norm(world.initial_states[1] - initial[1])
    print(f"  two-world check: log residual {report.log_residual:.2e} while the")
    print(f"  victim starts differ by {gap:.3f} — the log cannot identify the start.")


if __name__ == "__main__":
    main()
