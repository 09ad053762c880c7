"""Honest-but-curious observation capture and the two-world privacy check.

An adversarial agent follows the protocol but records everything it can
see: the public parameters, its own states, the weights on its incident
edges, and the payloads it receives.  Raw neighbor states never appear.

The privacy argument is constructive.  Given a victim with at least one
legitimate neighbor, any change of the victim's real initial state can be
absorbed by (a) a compensating virtual-state adjustment that keeps the two
step-0 functionals fixed, (b) the helper neighbor taking the opposite
state change, and (c) replacement step-0 weights on the helper's
legitimate edges.  The resulting world produces byte-for-byte the same
adversary observations and the same consensus limit, so the true initial
state is indistinguishable from the altered one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    DegenerateWeight,
    InvalidAgent,
    InvalidQuery,
    InvalidStep,
    NumericalError,
    PrivacyViolation,
)
from .engine import (
    RunSetup,
    ScheduledWeights,
    Trajectory,
    average,
    real_block,
    run_provider,
    virtual_block,
)
from .linalg import null_space
from .topology import ADVERSARIAL, LEGITIMATE, Topology, canonical_edge
from .weights import OrthoVectorSet, edge_weight, rho


@dataclass(frozen=True)
class PublicParameters:
    """Knowledge shared with every agent at initialization."""

    sigma: float
    d: int
    d_virtual: int
    vectors: OrthoVectorSet


@dataclass
class AdversaryView:
    """One adversary's observation stream.

    ``weights[(j, k)]`` is the matrix on the edge to neighbor ``j`` at step
    ``k`` — incoming and outgoing coincide because both endpoints share one
    matrix per edge.  ``payloads[(j, k)]`` is the masked vector received
    from ``j``.  ``own_states[k]`` is the adversary's own trajectory.
    """

    agent: int
    neighbors: frozenset[int]
    own_states: list[np.ndarray] = field(default_factory=list)
    weights: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    payloads: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)


@dataclass
class ObservationLog:
    """Everything the adversarial agents jointly observe during a run."""

    public: PublicParameters
    views: dict[int, AdversaryView]
    steps_recorded: int = 0

    def record(
        self,
        k: int,
        states: np.ndarray,
        weight_map: Mapping[tuple[int, int], np.ndarray],
    ) -> None:
        """Append step ``k``: own states, incident weights, received payloads."""
        for a, view in self.views.items():
            view.own_states.append(np.array(states[a - 1], copy=True))
            for j in view.neighbors:
                W = np.asarray(weight_map[canonical_edge((a, j))], dtype=float)
                view.weights[(j, k)] = W
                view.payloads[(j, k)] = W @ states[j - 1]
        self.steps_recorded = k + 1

    def finalize(self, states: np.ndarray) -> None:
        """Append the post-run own states (no transmissions happen there)."""
        for a, view in self.views.items():
            view.own_states.append(np.array(states[a - 1], copy=True))


def capture_run(
    setup: RunSetup,
    steps: int,
    initial_states: np.ndarray | None = None,
    k0_overrides: Mapping[tuple[int, int], np.ndarray] | None = None,
    epsilon: float = 1e-8,
) -> tuple[Trajectory, ObservationLog]:
    """Run the protocol and capture the adversaries' observation log."""
    provider = ScheduledWeights(setup.schedule, setup.vectors, k0_overrides)
    start = setup.initial_states if initial_states is None else initial_states
    trajectory = run_provider(start, provider, setup.sigma, steps, epsilon)
    log = ObservationLog(
        public=PublicParameters(
            sigma=setup.sigma,
            d=setup.vectors.d,
            d_virtual=setup.vectors.d_virtual,
            vectors=setup.vectors,
        ),
        views={
            a: AdversaryView(agent=a, neighbors=setup.topology.neighbors(a))
            for a in sorted(setup.topology.adversaries())
        },
    )
    for k in range(trajectory.steps):
        log.record(k, trajectory.states[k], provider.weight_map(k))
    log.finalize(trajectory.states[-1])
    return trajectory, log


def recover_functionals(
    log: ObservationLog,
    a: int,
    j: int,
    k: int,
) -> tuple[float, float]:
    """The two linear functionals of a neighbor's state exposed at step ``k``.

    From the received payload and the known edge weight the adversary can
    reconstruct ``v_rho(k) . x_j(k)`` and ``v_D . x_j(k)`` — and nothing
    more: the payload lives in a two-dimensional span however large the
    state is.
    """
    if k < 1:
        raise InvalidStep("functional recovery applies to steps k >= 1")
    if a not in log.views:
        raise InvalidAgent(f"agent {a} is not an adversary in this log")
    view = log.views[a]
    if (j, k) not in view.payloads:
        raise InvalidQuery(f"no payload from {j} at step {k} in the log")
    W = view.weights[(j, k)]
    y = view.payloads[(j, k)]
    vecs = log.public.vectors
    v_step = vecs.vector(rho(k, vecs.d_star))
    v_mask = vecs.masking_vector
    gamma = float(v_step @ W @ v_step) / float(v_step @ v_step)
    zeta = float(v_mask @ W @ v_mask) / float(v_mask @ v_mask)
    if abs(gamma) < 1e-14 or abs(zeta) < 1e-14:
        raise DegenerateWeight(f"edge ({a}, {j}) carries a numerically zero coefficient")
    s1 = float(v_step @ y) / gamma
    s2 = float(v_mask @ y) / zeta
    return s1, s2


@dataclass
class InferenceResult:
    """Outcome of the accumulated-flow reconstruction of a victim's start."""

    estimate: np.ndarray
    conclusive: bool
    horizon: int


def infer_isolated(
    log: ObservationLog,
    topology: Topology,
    a: int,
    b: int,
    horizon: int,
) -> InferenceResult:
    """Reconstruct ``x_b(0)`` from adversary observations up to ``horizon``.

    The victim's trajectory is its start plus the accumulated edge flows;
    every flow term on an adversary-incident edge is observable, and at
    consensus the adversary's own state stands in for the victim's.  The
    streams of all adversarial neighbors of ``b`` are pooled.  The result
    converges to the truth only when ``b`` has no legitimate neighbor;
    otherwise it is emitted anyway but flagged non-conclusive.
    """
    if a not in log.views:
        raise InvalidAgent(f"agent {a} is not an adversary in this log")
    view_a = log.views[a]
    if b not in view_a.neighbors:
        raise InvalidQuery(f"victim {b} is not a neighbor of adversary {a}")
    if horizon >= len(view_a.own_states):
        raise InvalidStep(f"horizon {horizon} exceeds the recorded run")
    sigma = log.public.sigma
    estimate = np.array(view_a.own_states[horizon], copy=True)
    for view in log.views.values():
        if b not in view.neighbors:
            continue
        for k in range(horizon):
            estimate -= sigma * (view.weights[(b, k)] @ view.own_states[k])
            estimate += sigma * view.payloads[(b, k)]
    conclusive = all(topology.role(j) == ADVERSARIAL for j in topology.neighbors(b))
    return InferenceResult(estimate=estimate, conclusive=conclusive, horizon=horizon)


@dataclass(frozen=True)
class AlternativeWorld:
    """A replacement start and step-0 weights that replay identically.

    From step 1 on, the original schedule is used unchanged.
    """

    initial_states: np.ndarray
    k0_overrides: dict[tuple[int, int], np.ndarray]
    victim: int
    helper: int
    real_shift: np.ndarray


def _matrix_with_prescribed_action(
    A: np.ndarray,
    directions: list[np.ndarray],
    targets: list[np.ndarray],
) -> np.ndarray:
    """The matrix acting like ``A`` off ``span(directions)`` and as prescribed on it.

    Well-defined whenever the directions are linearly independent; the
    choice is reproducible because the off-span behavior is pinned to
    ``A`` rather than left free.
    """
    B = np.column_stack(directions)
    T = np.column_stack(targets)
    G = B.T @ B
    G_inv = np.linalg.inv(G)
    P = B @ G_inv @ B.T
    return A @ (np.eye(A.shape[0]) - P) + T @ G_inv @ B.T


def construct_alternative_world(
    setup: RunSetup,
    b: int,
    m: int,
    xbar_real: np.ndarray,
    seed: int = 0,
) -> AlternativeWorld:
    """Build the world in which victim ``b`` started from ``xbar_real``.

    * The victim's virtual block shifts so that the two step-0 functionals
      of its state are unchanged (minimum-norm solution plus a seeded
      component in the constraint kernel, re-drawn if the two prescribed
      directions come out linearly dependent).
    * Helper ``m`` absorbs the opposite shift, so the pair sum — and hence
      the network average — is untouched.
    * The (b, m) edge gets a step-0 matrix with prescribed action on the
      original difference and on the shift; every other edge of ``m``
      toward a legitimate agent gets a rank-1 correction matching its
      original flow; all remaining weights stay as sampled.

    Requires ``b`` and ``m`` legitimate and adjacent.
    """
    topo = setup.topology
    vecs = setup.vectors
    if topo.role(b) != LEGITIMATE:
        raise InvalidQuery(f"victim {b} must be legitimate")
    if topo.role(m) != LEGITIMATE:
        raise InvalidQuery(f"helper {m} must be legitimate")
    if m not in topo.neighbors(b):
        raise InvalidQuery(f"helper {m} is not a neighbor of victim {b}")
    x0 = np.array(setup.initial_states, dtype=float, copy=True)
    d_v = vecs.d_virtual
    xbar_real = np.asarray(xbar_real, dtype=float).ravel()
    if xbar_real.shape != (vecs.d,):
        raise InvalidQuery(f"replacement real state must have dimension {vecs.d}")
    delta_real = xbar_real - real_block(x0[b - 1], d_v)
    if not np.any(delta_real):
        return AlternativeWorld(
            initial_states=x0,
            k0_overrides={},
            victim=b,
            helper=m,
            real_shift=delta_real,
        )

    # Virtual shift: keep the step-0 functionals of the victim's state
    # fixed.  Two constraints on d_virtual >= 3 unknowns; the kernel is at
    # least one-dimensional, so independence below is generically free.
    a1 = virtual_block(vecs.vector(1), d_v)
    a2 = virtual_block(vecs.masking_vector, d_v)
    rhs = np.array([0.0, -float(real_block(vecs.masking_vector, d_v) @ delta_real)])
    C = np.stack([a1, a2])
    base, *_ = np.linalg.lstsq(C, rhs, rcond=None)
    kernel = _constraint_kernel(C)
    u1 = x0[m - 1] - x0[b - 1]
    rng = np.random.default_rng(seed)
    scale = max(float(np.linalg.norm(delta_real)), 1e-2)
    delta_virtual = None
    for _ in range(64):
        candidate = base + kernel @ rng.normal(scale=scale, size=kernel.shape[1])
        shift = np.concatenate([candidate, delta_real])
        if np.linalg.norm(u1) < 1e-14 or _independent(u1, -shift):
            delta_virtual = candidate
            break
    if delta_virtual is None:
        raise NumericalError("could not find an independent virtual shift")
    shift = np.concatenate([delta_virtual, delta_real])

    xbar = x0.copy()
    xbar[b - 1] = x0[b - 1] + shift
    xbar[m - 1] = x0[m - 1] - shift
    u2 = x0[b - 1] - xbar[b - 1]

    overrides: dict[tuple[int, int], np.ndarray] = {}
    sigma = setup.sigma
    edge_bm = canonical_edge((b, m))
    A_bm = edge_weight(setup.schedule, vecs, edge_bm, 0)
    if np.linalg.norm(u1) < 1e-14:
        replacement = _matrix_with_prescribed_action(A_bm, [u2], [u2 / (2.0 * sigma)])
    else:
        replacement = _matrix_with_prescribed_action(
            A_bm, [u1, u2], [A_bm @ u1, u2 / (2.0 * sigma)]
        )
    _require_action(replacement, u2, u2 / (2.0 * sigma))
    if np.linalg.norm(u1) >= 1e-14:
        _require_action(replacement, u1, A_bm @ u1)
    overrides[edge_bm] = replacement

    # Legitimate edges of the helper other than (b, m): a rank-1 correction
    # reproduces the original step-0 flow toward each such neighbor.
    for p in topo.neighbors(m):
        if p in (b, m) or topo.role(p) != LEGITIMATE:
            continue
        edge_pm = canonical_edge((p, m))
        A_pm = edge_weight(setup.schedule, vecs, edge_pm, 0)
        w = xbar[m - 1] - x0[p - 1]
        r = A_pm @ (x0[m - 1] - x0[p - 1])
        if np.linalg.norm(w) < 1e-14:
            if np.linalg.norm(r) > 1e-12:
                raise NumericalError(
                    f"degenerate correction on edge {edge_pm}: flow cannot be matched"
                )
            continue
        corrected = A_pm + np.outer(r - A_pm @ w, w) / float(w @ w)
        _require_action(corrected, w, r)
        overrides[edge_pm] = corrected

    return AlternativeWorld(
        initial_states=xbar,
        k0_overrides=overrides,
        victim=b,
        helper=m,
        real_shift=delta_real,
    )


def _constraint_kernel(C: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``{t : C t = 0}`` via the Gram matrix kernel."""
    return null_space(C.T @ C, 1e-12).basis


def _independent(u: np.ndarray, v: np.ndarray, threshold: float = 1e-6) -> bool:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return False
    cos = float(u @ v) / (nu * nv)
    return 1.0 - cos * cos > threshold**2


def _require_action(M: np.ndarray, x: np.ndarray, want: np.ndarray) -> None:
    scale = max(float(np.linalg.norm(want)), 1.0)
    if float(np.linalg.norm(M @ x - want)) > 1e-10 * scale:
        raise NumericalError("prescribed matrix action verification failed")


@dataclass
class PrivacyReport:
    """Residuals of the two-world comparison (all must sit at round-off)."""

    log_residual: float
    step1_residual: float
    limit_residual: float
    average_residual: float
    base_convergence: float
    alt_convergence: float
    steps: int

    @property
    def passed(self) -> bool:
        return True  # mismatches raise instead of reporting


def _compare_views(base: ObservationLog, alt: ObservationLog, tol: float) -> float:
    if set(base.views) != set(alt.views):
        raise PrivacyViolation("adversary sets differ between worlds")
    worst = 0.0
    for agent in sorted(base.views):
        u, v = base.views[agent], alt.views[agent]
        if u.neighbors != v.neighbors:
            raise PrivacyViolation(f"adversary {agent}: neighbor sets differ")
        if len(u.own_states) != len(v.own_states):
            raise PrivacyViolation(f"adversary {agent}: stream lengths differ")
        for k, (su, sv) in enumerate(zip(u.own_states, v.own_states)):
            gap = float(np.max(np.abs(su - sv)))
            worst = max(worst, gap)
            if gap > tol:
                raise PrivacyViolation(
                    f"adversary {agent}: own state differs at step {k} by {gap:.3e}"
                )
        for key in u.weights:
            gap = float(np.max(np.abs(u.weights[key] - v.weights[key])))
            worst = max(worst, gap)
            if gap > tol:
                raise PrivacyViolation(
                    f"adversary {agent}: weight to {key[0]} differs at step {key[1]} by {gap:.3e}"
                )
        for key in u.payloads:
            gap = float(np.max(np.abs(u.payloads[key] - v.payloads[key])))
            worst = max(worst, gap)
            if gap > tol:
                raise PrivacyViolation(
                    f"adversary {agent}: payload from {key[0]} differs at step {key[1]} by {gap:.3e}"
                )
    return worst


def verify_indistinguishability(
    setup: RunSetup,
    world: AlternativeWorld,
    steps: int,
    tol: float = 1e-10,
) -> PrivacyReport:
    """Replay both worlds and insist the adversaries cannot tell them apart.

    Checks, in order: every observation log entry matches within ``tol``;
    the full network states already coincide at step 1 (so the worlds are
    identical from then on); and both runs share the original average as
    their limit.  The first mismatch raises ``PrivacyViolation``.
    """
    base_traj, base_log = capture_run(setup, steps)
    alt_traj, alt_log = capture_run(
        setup,
        steps,
        initial_states=world.initial_states,
        k0_overrides=world.k0_overrides,
    )
    log_residual = _compare_views(base_log, alt_log, tol)
    step1 = float(np.max(np.abs(base_traj.states[1] - alt_traj.states[1])))
    if step1 > tol:
        raise PrivacyViolation(f"network states differ at step 1 by {step1:.3e}")
    limit_gap = float(np.max(np.abs(base_traj.final - alt_traj.final)))
    if limit_gap > tol:
        raise PrivacyViolation(f"final states differ by {limit_gap:.3e}")
    avg_gap = float(
        np.max(np.abs(average(base_traj.states[0]) - average(alt_traj.states[0])))
    )
    if avg_gap > tol:
        raise PrivacyViolation(f"initial averages differ by {avg_gap:.3e}")
    return PrivacyReport(
        log_residual=log_residual,
        step1_residual=step1,
        limit_residual=limit_gap,
        average_residual=avg_gap,
        base_convergence=float(base_traj.residuals[-1]),
        alt_convergence=float(alt_traj.residuals[-1]),
        steps=steps,
    )
