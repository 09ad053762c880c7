"""Command-line harness: configuration in, trajectory CSV + summary JSON out.

Exit status: 0 when every assertion of the selected experiment passed,
1 when an assertion failed, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis
from .adversary import (
    capture_run,
    construct_alternative_world,
    infer_isolated,
    verify_indistinguishability,
)
from .config import RunConfig, _validate_semantics, build_setup, load_config
from .engine import StaticWeights, average, run_provider, write_trajectory_csv
from .engine import run as engine_run
from .errors import ConfigError, PrivacyViolation
from .linalg import assemble_laplacian, consensus_subspace, null_space


def _write_summary(out_dir: Path, summary: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _cmd_run(config: RunConfig, out_dir: Path) -> int:
    setup = build_setup(config)
    trajectory = engine_run(
        setup.initial(),
        setup.schedule,
        setup.vectors,
        steps=config.steps,
        epsilon=config.epsilon,
        early_stop=True,
    )
    target = average(setup.initial_states)
    limit = trajectory.final.mean(axis=0)
    conservation = trajectory.conservation_residual()
    deviation = float(np.max(np.abs(trajectory.final - target)))
    converged = trajectory.converged_at is not None
    passed = converged and conservation < 1e-10
    summary = {
        "kind": "run",
        "limit": [float(x) for x in limit],
        "virtual_limit": [float(x) for x in limit[: config.d_virtual]],
        "real_limit": [float(x) for x in limit[config.d_virtual :]],
        "target_average": [float(x) for x in target],
        "iterations_to_epsilon": trajectory.converged_at,
        "epsilon": config.epsilon,
        "conservation_residual": conservation,
        "max_deviation_from_average": deviation,
        "passed": passed,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(trajectory, out_dir / "trajectory.csv")
    _write_summary(out_dir, summary)
    print(
        f"run: {'converged' if converged else 'NOT converged'} "
        f"after {trajectory.steps} steps; conservation {conservation:.2e}"
    )
    return 0 if passed else 1


def _cmd_verify(config: RunConfig, out_dir: Path) -> int:
    topo = config.topology()
    seeds = list(range(config.schedule_trials))
    reports = [
        analysis.nullspace_union_suite(instances=config.instances, seed=config.seed),
        analysis.mu_equivalence_suite(instances=config.instances, seed=config.seed),
        analysis.period_nullspace_suite(
            topo, config.d, config.d_virtual, config.sigma, seeds
        ),
        analysis.step_size_bound_suite(
            topo, config.d, config.d_virtual, config.sigma, seeds
        ),
    ]
    passed = all(r.passed for r in reports)
    summary = {
        "kind": "verify",
        "suites": {r.name: r.as_dict() for r in reports},
        "passed": passed,
    }
    _write_summary(out_dir, summary)
    for r in reports:
        print(f"verify[{r.name}]: {'PASS' if r.passed else 'FAIL'} ({r.total} cases)")
    return 0 if passed else 1


def _cmd_privacy(config: RunConfig, out_dir: Path) -> int:
    setup = build_setup(config)
    b, m = config.victim, config.helper
    rng = np.random.default_rng(config.sub_seeds()["perturbations"])
    base_real = setup.initial_states[b - 1][config.d_virtual :]
    trials = []
    passed = True
    for t in range(config.trials):
        perturbation = rng.normal(scale=config.perturbation_scale, size=config.d)
        try:
            world = construct_alternative_world(
                setup, b, m, base_real + perturbation, seed=int(rng.integers(2**31))
            )
            report = verify_indistinguishability(setup, world, steps=config.steps)
            trials.append(
                {
                    "trial": t,
                    "log_residual": report.log_residual,
                    "step1_residual": report.step1_residual,
                    "limit_residual": report.limit_residual,
                    "average_residual": report.average_residual,
                    "passed": True,
                }
            )
        except PrivacyViolation as exc:
            passed = False
            trials.append({"trial": t, "passed": False, "violation": str(exc)})
    summary = {
        "kind": "privacy",
        "victim": b,
        "helper": m,
        "trials": trials,
        "passed": passed,
    }
    _write_summary(out_dir, summary)
    worst = max((t.get("log_residual", 0.0) for t in trials), default=0.0)
    print(
        f"privacy: {'PASS' if passed else 'FAIL'} over {config.trials} trials "
        f"(worst log residual {worst:.2e})"
    )
    return 0 if passed else 1


def _cmd_attack(config: RunConfig, out_dir: Path) -> int:
    setup = build_setup(config)
    b = config.victim
    adversaries = sorted(setup.topology.adversaries())
    a = next(x for x in adversaries if b in setup.topology.neighbors(x))
    trajectory, log = capture_run(setup, config.steps, epsilon=config.epsilon)
    below = np.nonzero(trajectory.residuals < config.epsilon)[0]
    horizon = int(below[0]) if below.size else trajectory.steps
    result = infer_isolated(log, setup.topology, a, b, horizon)
    truth = setup.initial_states[b - 1]
    error = float(np.max(np.abs(result.estimate - truth)))
    residual = float(trajectory.residuals[horizon])
    passed = (not result.conclusive) or error < 1e-6
    summary = {
        "kind": "attack",
        "adversary": a,
        "victim": b,
        "horizon": horizon,
        "consensus_residual_at_horizon": residual,
        "estimate": [float(x) for x in result.estimate],
        "true_initial": [float(x) for x in truth],
        "estimate_error": error,
        "conclusive": result.conclusive,
        "passed": passed,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(trajectory, out_dir / "trajectory.csv")
    _write_summary(out_dir, summary)
    print(
        f"attack: estimate error {error:.2e} at horizon {horizon} "
        f"({'conclusive' if result.conclusive else 'non-conclusive'})"
    )
    return 0 if passed else 1


def _cmd_cluster_demo(config: RunConfig, out_dir: Path) -> int:
    setup = build_setup(config)
    D = config.d + config.d_virtual
    u = np.zeros(D)
    u[: len(config.static_weight_vector)] = config.static_weight_vector
    W = np.outer(u, u)
    provider = StaticWeights(setup.topology, W)
    trajectory = run_provider(
        setup.initial_states, provider, config.sigma, config.steps, config.epsilon
    )
    L = assemble_laplacian(setup.topology, {e: W for e in setup.topology.edges})
    kernel = null_space(L, config.tol)
    R = consensus_subspace(setup.topology.n, D)
    spread = trajectory.spread()
    conservation = trajectory.conservation_residual()
    kernel_exceeds = kernel.dim > R.dim
    spread_floor = float(spread.min())
    passed = kernel_exceeds and spread_floor >= 1e-3 and conservation < 1e-10
    summary = {
        "kind": "cluster-demo",
        "kernel_dim": kernel.dim,
        "consensus_dim": R.dim,
        "kernel_exceeds_consensus": kernel_exceeds,
        "min_spread": spread_floor,
        "final_spread": float(spread[-1]),
        "conservation_residual": conservation,
        "global_consensus": trajectory.converged_at is not None,
        "passed": passed,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(trajectory, out_dir / "trajectory.csv")
    _write_summary(out_dir, summary)
    print(
        f"cluster-demo: kernel dim {kernel.dim} vs consensus dim {R.dim}; "
        f"spread stayed above {spread_floor:.2e}"
    )
    return 0 if passed else 1


_COMMANDS = {
    "run": _cmd_run,
    "verify": _cmd_verify,
    "privacy": _cmd_privacy,
    "attack": _cmd_attack,
    "cluster-demo": _cmd_cluster_demo,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mwconsensus",
        description="Privacy-preserving average consensus simulation lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"{name} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out-dir", default="out", help="artifact output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--steps", type=int, default=None, help="override the step budget")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if config.kind != args.command:
            config = replace(config, kind=args.command)
            _validate_semantics(config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.steps is not None:
            config = replace(config, steps=args.steps)
        return _COMMANDS[args.command](config, Path(args.out_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
