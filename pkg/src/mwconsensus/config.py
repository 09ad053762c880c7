"""Run configuration: JSON ingestion, validation, deterministic setup.

A config file fully determines an experiment: the graph and roles, the
state dimensions, the step size, the seed, and the experiment kind.  All
randomness (coefficient tables, missing initial states, perturbations)
derives from the single seed through fixed substreams, so identical
configs produce identical artifacts byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .engine import RunSetup, lift
from .errors import ConfigError, ConsensusLabError
from .topology import LEGITIMATE, Topology
from .weights import build_ortho_set, sample_coefficients

KINDS = ("run", "verify", "privacy", "attack", "cluster-demo")

DEFAULT_STEPS = {
    "run": 5000,
    "verify": 0,
    "privacy": 400,
    "attack": 20000,
    "cluster-demo": 10000,
}


@dataclass
class RunConfig:
    """Validated experiment description."""

    kind: str
    n: int
    edges: list[tuple[int, int]]
    adversaries: list[int]
    d: int
    d_virtual: int
    sigma: float
    seed: int
    steps: int
    epsilon: float = 1e-8
    tol: float = 1e-9
    initial_real: list[list[float]] | None = None
    initial_virtual: list[list[float]] | None = None
    victim: int | None = None
    helper: int | None = None
    trials: int = 50
    instances: int = 200
    schedule_trials: int = 100
    perturbation_scale: float = 1.0
    static_weight_vector: list[float] = field(default_factory=lambda: [1.0, 1.0, 0.0])

    def topology(self) -> Topology:
        return Topology.build(self.n, self.edges, self.adversaries)

    def sub_seeds(self) -> dict[str, int]:
        """Named substreams derived from the run seed."""
        state = np.random.SeedSequence(self.seed).generate_state(4)
        return {
            "coefficients": int(state[0]),
            "virtual": int(state[1]),
            "real": int(state[2]),
            "perturbations": int(state[3]),
        }


def _require(raw: dict, key: str, kind: type, where: str = "") -> Any:
    path = f"{where}{key}"
    if key not in raw:
        raise ConfigError(f"{path}: missing required field")
    value = raw[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_config(raw: dict) -> RunConfig:
    """Validate a parsed JSON object into a RunConfig.

    Raises ``ConfigError`` naming the offending field.
    """
    kind = _require(raw, "kind", str)
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {KINDS}, got {kind!r}")
    n = _require(raw, "n", int)
    if n < 2:
        raise ConfigError(f"n: need at least two agents, got {n}")
    edges_raw = _require(raw, "edges", list)
    edges: list[tuple[int, int]] = []
    for idx, pair in enumerate(edges_raw):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"edges[{idx}]: expected a pair of agent ids")
        i, j = pair
        if not (isinstance(i, int) and isinstance(j, int)):
            raise ConfigError(f"edges[{idx}]: agent ids must be integers")
        if i == j:
            raise ConfigError(f"edges[{idx}]: self-loop on agent {i}")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ConfigError(f"edges[{idx}]: agent out of range 1..{n}")
        edges.append((i, j))
    adversaries = raw.get("adversaries", [])
    if not isinstance(adversaries, list):
        raise ConfigError("adversaries: expected a list of agent ids")
    for a in adversaries:
        if not isinstance(a, int) or not (1 <= a <= n):
            raise ConfigError(f"adversaries: agent {a!r} out of range 1..{n}")
    d = _require(raw, "d", int)
    if d < 1:
        raise ConfigError(f"d: real state dimension must be >= 1, got {d}")
    d_virtual = _require(raw, "d_virtual", int)
    if d_virtual < 3:
        raise ConfigError(f"d_virtual: virtual dimension must be >= 3, got {d_virtual}")
    sigma = _require(raw, "sigma", float)
    if sigma <= 0:
        raise ConfigError(f"sigma: step size must be positive, got {sigma}")
    seed = _require(raw, "seed", int)
    steps = raw.get("steps", DEFAULT_STEPS[kind])
    if not isinstance(steps, int) or (steps < 1 and kind != "verify"):
        raise ConfigError(f"steps: need a positive integer, got {steps!r}")
    epsilon = raw.get("epsilon", 1e-8)
    if not isinstance(epsilon, (int, float)) or epsilon <= 0:
        raise ConfigError(f"epsilon: need a positive number, got {epsilon!r}")
    tol = raw.get("tol", 1e-9)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise ConfigError(f"tol: need a positive number, got {tol!r}")

    def _states(key: str, width: int) -> list[list[float]] | None:
        if key not in raw or raw[key] is None:
            return None
        value = raw[key]
        if not (isinstance(value, list) and len(value) == n):
            raise ConfigError(f"{key}: expected {n} rows")
        out = []
        for idx, row in enumerate(value):
            if not (isinstance(row, list) and len(row) == width):
                raise ConfigError(f"{key}[{idx}]: expected {width} numbers")
            try:
                out.append([float(x) for x in row])
            except (TypeError, ValueError):
                raise ConfigError(f"{key}[{idx}]: entries must be numbers")
        return out

    config = RunConfig(
        kind=kind,
        n=n,
        edges=edges,
        adversaries=list(adversaries),
        d=d,
        d_virtual=d_virtual,
        sigma=float(sigma),
        seed=seed,
        steps=int(steps),
        epsilon=float(epsilon),
        tol=float(tol),
        initial_real=_states("initial_real", d),
        initial_virtual=_states("initial_virtual", d_virtual),
        victim=raw.get("victim"),
        helper=raw.get("helper"),
        trials=int(raw.get("trials", 50)),
        instances=int(raw.get("instances", 200)),
        schedule_trials=int(raw.get("schedule_trials", 100)),
        perturbation_scale=float(raw.get("perturbation_scale", 1.0)),
        static_weight_vector=[float(x) for x in raw.get("static_weight_vector", [1.0, 1.0, 0.0])],
    )
    _validate_semantics(config)
    return config


def _validate_semantics(config: RunConfig) -> None:
    try:
        topo = config.topology()
    except ConsensusLabError as exc:
        raise ConfigError(f"edges: {exc}") from exc
    if config.kind in ("run", "privacy", "attack", "cluster-demo") and not topo.is_connected():
        raise ConfigError("edges: the communication graph must be connected")
    if config.kind == "privacy":
        victim = config.victim if config.victim is not None else _default_victim(topo)
        if victim is None:
            raise ConfigError("victim: no legitimate agent with a legitimate neighbor exists")
        if topo.role(victim) != LEGITIMATE:
            raise ConfigError(f"victim: agent {victim} is not legitimate")
        helper = config.helper if config.helper is not None else _default_helper(topo, victim)
        if helper is None:
            raise ConfigError(f"helper: victim {victim} has no legitimate neighbor")
        if topo.role(helper) != LEGITIMATE or helper not in topo.neighbors(victim):
            raise ConfigError(f"helper: agent {helper} is not a legitimate neighbor of {victim}")
        config.victim, config.helper = victim, helper
    if config.kind == "attack":
        victim = config.victim if config.victim is not None else _default_attack_victim(topo)
        if victim is None:
            raise ConfigError("victim: no legitimate agent adjacent to an adversary exists")
        if topo.role(victim) != LEGITIMATE:
            raise ConfigError(f"victim: agent {victim} is not legitimate")
        if not any(j in topo.adversaries() for j in topo.neighbors(victim)):
            raise ConfigError(f"victim: agent {victim} has no adversarial neighbor")
        config.victim = victim
    if config.kind == "cluster-demo":
        if len(config.static_weight_vector) > config.d + config.d_virtual:
            raise ConfigError("static_weight_vector: longer than the lifted dimension")
        if not any(config.static_weight_vector):
            raise ConfigError("static_weight_vector: must be nonzero")


def _default_victim(topo: Topology) -> int | None:
    for b in sorted(topo.legitimate_agents()):
        if topo.legitimate_neighbor_exists(b):
            return b
    return None


def _default_helper(topo: Topology, victim: int) -> int | None:
    for m in sorted(topo.neighbors(victim)):
        if topo.role(m) == LEGITIMATE:
            return m
    return None


def _default_attack_victim(topo: Topology) -> int | None:
    adv = topo.adversaries()
    fully_surrounded = [
        b for b in sorted(topo.legitimate_agents()) if topo.neighbors(b) <= adv
    ]
    if fully_surrounded:
        return fully_surrounded[0]
    for b in sorted(topo.legitimate_agents()):
        if topo.neighbors(b) & adv:
            return b
    return None


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw)


def build_setup(config: RunConfig) -> RunSetup:
    """Materialize the topology, direction set, schedule, and initial states."""
    topology = config.topology()
    vectors = build_ortho_set(config.d, config.d_virtual)
    seeds = config.sub_seeds()
    schedule = sample_coefficients(
        topology, config.sigma, vectors.d_star, seeds["coefficients"]
    )
    if config.initial_real is not None:
        real = np.asarray(config.initial_real, dtype=float)
    else:
        real = np.random.default_rng(seeds["real"]).uniform(size=(config.n, config.d))
    if config.initial_virtual is not None:
        virtual = np.asarray(config.initial_virtual, dtype=float)
    else:
        virtual = np.random.default_rng(seeds["virtual"]).uniform(
            size=(config.n, config.d_virtual)
        )
    initial = np.stack([lift(real[i], virtual[i]) for i in range(config.n)])
    return RunSetup(
        topology=topology,
        vectors=vectors,
        schedule=schedule,
        initial_states=initial,
    )
