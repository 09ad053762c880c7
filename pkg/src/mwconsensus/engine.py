"""The synchronous consensus protocol: lifting, messages, updates, runs.

Agents never transmit raw states.  At step ``k`` the sender ``j`` on edge
``(i, j)`` sends only ``W_ij(k) @ x_j(k)``; the receiver combines received
payloads with its own state,

    x_i(k+1) = x_i(k) + sigma * sum_j (y_{j->i}(k) - W_ij(k) @ x_i(k)),

which in stacked form is one linear map per step.  Both endpoints of an
edge apply the same weight matrix, so the state sum — and hence the agent
average — is conserved exactly, whatever the matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DimensionError, NumericalError
from .topology import Topology, canonical_edge
from .weights import OrthoVectorSet, WeightSchedule, edge_weight, rho


def lift(real_state: np.ndarray, virtual_state: np.ndarray) -> np.ndarray:
    """Lifted agent state: virtual coordinates first, then the real ones."""
    real = np.asarray(real_state, dtype=float).ravel()
    virtual = np.asarray(virtual_state, dtype=float).ravel()
    return np.concatenate([virtual, real])


def virtual_block(x: np.ndarray, d_virtual: int) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., :d_virtual]


def real_block(x: np.ndarray, d_virtual: int) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., d_virtual:]


@dataclass(frozen=True)
class Message:
    """One transmitted payload: ``payload = W(k) @ x_sender(k)``."""

    sender: int
    receiver: int
    k: int
    payload: np.ndarray


@dataclass
class NetworkState:
    """Stacked agent states at one step; ``states`` has shape (n, D)."""

    k: int
    states: np.ndarray

    @property
    def n(self) -> int:
        return int(self.states.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])


def average(states: np.ndarray | NetworkState) -> np.ndarray:
    """Arithmetic mean of the agent states, one vector in R^D."""
    if isinstance(states, NetworkState):
        states = states.states
    return np.asarray(states, dtype=float).mean(axis=0)


def make_message(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    edge: tuple[int, int],
    x_sender: np.ndarray,
    k: int,
) -> Message:
    """Payload sent along ``edge = (sender, receiver)`` at step ``k``."""
    sender, receiver = edge
    W = edge_weight(schedule, vectors, edge, k)
    return Message(sender=sender, receiver=receiver, k=k, payload=W @ np.asarray(x_sender, float))


def apply_step(
    states: np.ndarray,
    weight_map: Mapping[tuple[int, int], np.ndarray],
    sigma: float,
) -> np.ndarray:
    """One synchronous update of all agents under a per-edge weight map."""
    new = np.array(states, dtype=float, copy=True)
    for (i, j), W in weight_map.items():
        flow = W @ (states[j - 1] - states[i - 1])
        new[i - 1] += sigma * flow
        new[j - 1] -= sigma * flow
    return new


class WeightProvider:
    """Serves the per-edge weight map and the stacked update matrix per step."""

    topology: Topology
    block_dim: int

    def weight_map(self, k: int) -> Mapping[tuple[int, int], np.ndarray]:
        raise NotImplementedError

    def update_matrix(self, k: int, sigma: float) -> np.ndarray:
        return stacked_update_matrix(
            self.weight_map(k), self.topology.n, self.block_dim, sigma
        )


def stacked_update_matrix(
    weight_map: Mapping[tuple[int, int], np.ndarray],
    n: int,
    block_dim: int,
    sigma: float,
) -> np.ndarray:
    """The linear map sending the flat state x(k) to x(k+1).

    Valid for arbitrary (even asymmetric) shared edge matrices, because
    both endpoints apply the same block.
    """
    D = block_dim
    M = np.eye(n * D)
    for (i, j), W in weight_map.items():
        si, sj = (i - 1) * D, (j - 1) * D
        M[si : si + D, sj : sj + D] += sigma * W
        M[si : si + D, si : si + D] -= sigma * W
        M[sj : sj + D, si : si + D] += sigma * W
        M[sj : sj + D, sj : sj + D] -= sigma * W
    return M


class ScheduledWeights(WeightProvider):
    """Weights from a sampled schedule, with optional step-0 replacements.

    Step-0 replacements exist so that a replayed world can substitute its
    constructed initial-round weights; from step 1 on the schedule is always
    used unchanged.
    """

    def __init__(
        self,
        schedule: WeightSchedule,
        vectors: OrthoVectorSet,
        k0_overrides: Mapping[tuple[int, int], np.ndarray] | None = None,
    ):
        self.schedule = schedule
        self.vectors = vectors
        self.topology = schedule.topology
        self.block_dim = vectors.dim
        self._overrides = (
            {canonical_edge(e): np.asarray(W, float) for e, W in k0_overrides.items()}
            if k0_overrides
            else {}
        )
        self._maps: dict[int, dict[tuple[int, int], np.ndarray]] = {}
        self._matrices: dict[int, np.ndarray] = {}

    def _slot(self, k: int) -> int:
        return 0 if k == 0 else rho(k, self.schedule.d_star)

    def weight_map(self, k: int) -> Mapping[tuple[int, int], np.ndarray]:
        slot = self._slot(k)
        if slot not in self._maps:
            wmap = {
                edge: edge_weight(self.schedule, self.vectors, edge, k)
                for edge in self.topology.edges
            }
            if slot == 0:
                wmap.update(self._overrides)
            self._maps[slot] = wmap
        return self._maps[slot]

    def update_matrix(self, k: int, sigma: float) -> np.ndarray:
        slot = self._slot(k)
        if slot not in self._matrices:
            self._matrices[slot] = stacked_update_matrix(
                self.weight_map(k), self.topology.n, self.block_dim, sigma
            )
        return self._matrices[slot]


class StaticWeights(WeightProvider):
    """The same weight matrix on every edge at every step."""

    def __init__(self, topology: Topology, matrix: np.ndarray):
        self.topology = topology
        self.matrix = np.asarray(matrix, dtype=float)
        self.block_dim = int(self.matrix.shape[0])
        self._map = {edge: self.matrix for edge in topology.edges}
        self._matrix_cache: dict[float, np.ndarray] = {}

    def weight_map(self, k: int) -> Mapping[tuple[int, int], np.ndarray]:
        return self._map

    def update_matrix(self, k: int, sigma: float) -> np.ndarray:
        if sigma not in self._matrix_cache:
            self._matrix_cache[sigma] = stacked_update_matrix(
                self._map, self.topology.n, self.block_dim, sigma
            )
        return self._matrix_cache[sigma]


def step(
    state: NetworkState,
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    k0_overrides: Mapping[tuple[int, int], np.ndarray] | None = None,
) -> NetworkState:
    """Advance the network one step, consuming the weights of ``state.k``."""
    provider = ScheduledWeights(schedule, vectors, k0_overrides)
    new = apply_step(state.states, provider.weight_map(state.k), schedule.sigma)
    return NetworkState(k=state.k + 1, states=new)


@dataclass
class Trajectory:
    """Recorded run: ``states[k]`` is the (n, D) snapshot at step k."""

    states: np.ndarray
    residuals: np.ndarray
    converged_at: int | None
    epsilon: float

    @property
    def steps(self) -> int:
        return int(self.states.shape[0]) - 1

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def initial_average(self) -> np.ndarray:
        return average(self.states[0])

    def conservation_residual(self) -> float:
        """Worst per-coordinate drift of the agent mean across all steps."""
        means = self.states.mean(axis=1)
        return float(np.max(np.abs(means - means[0])))

    def spread(self) -> np.ndarray:
        """Per-step max inter-agent coordinate gap."""
        return (self.states.max(axis=1) - self.states.min(axis=1)).max(axis=1)


def run_provider(
    initial_states: np.ndarray,
    provider: WeightProvider,
    sigma: float,
    steps: int,
    epsilon: float = 1e-8,
    early_stop: bool = False,
) -> Trajectory:
    """Run the protocol for ``steps`` updates (fewer if it converges early).

    The convergence residual is ``max_i ||x_i(k) - Avg(x(0))||_inf``; a run
    converges when it falls below ``epsilon``.  Non-finite states abort the
    run.
    """
    x = np.array(initial_states, dtype=float, copy=True)
    n, D = x.shape
    target = average(x)
    history = [x.copy()]
    residuals = [float(np.max(np.abs(x - target)))]
    converged_at = None
    flat = x.reshape(-1)
    for k in range(steps):
        flat = provider.update_matrix(k, sigma) @ flat
        if not np.all(np.isfinite(flat)):
            raise NumericalError(f"non-finite state at step {k + 1}")
        snapshot = flat.reshape(n, D)
        history.append(snapshot.copy())
        residuals.append(float(np.max(np.abs(snapshot - target))))
        if converged_at is None and residuals[-1] < epsilon:
            converged_at = k + 1
            if early_stop:
                break
    return Trajectory(
        states=np.stack(history),
        residuals=np.array(residuals),
        converged_at=converged_at,
        epsilon=epsilon,
    )


def run(
    initial: NetworkState,
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    steps: int,
    epsilon: float = 1e-8,
    early_stop: bool = False,
    k0_overrides: Mapping[tuple[int, int], np.ndarray] | None = None,
) -> Trajectory:
    """Run the scheduled protocol from ``initial`` for ``steps`` updates."""
    if initial.dim != vectors.dim:
        raise DimensionError(
            f"state dimension {initial.dim} does not match lift dimension {vectors.dim}"
        )
    provider = ScheduledWeights(schedule, vectors, k0_overrides)
    return run_provider(
        initial.states, provider, schedule.sigma, steps, epsilon, early_stop
    )


@dataclass(frozen=True)
class RunSetup:
    """Everything needed to replay one experiment deterministically."""

    topology: Topology
    vectors: OrthoVectorSet
    schedule: WeightSchedule
    initial_states: np.ndarray

    @property
    def sigma(self) -> float:
        return self.schedule.sigma

    def initial(self) -> NetworkState:
        return NetworkState(k=0, states=np.array(self.initial_states, copy=True))


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    """Write the run as rows of ``step, agent, coord_index, value``.

    Deterministic byte-for-byte for identical runs: values are rendered
    with ``repr``, which round-trips doubles exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "agent", "coord_index", "value"])
        for k in range(trajectory.states.shape[0]):
            snap = trajectory.states[k]
            for agent in range(snap.shape[0]):
                for coord in range(snap.shape[1]):
                    writer.writerow([k, agent + 1, coord + 1, repr(float(snap[agent, coord]))])
