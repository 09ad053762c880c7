"""Spectral certificates for the switching consensus dynamics.

The machinery that makes the protocol converge is checkable:

* the kernel of a PSD block-Laplacian sum equals the intersection of the
  individual kernels, and either one collapsing to the block-constant
  space is equivalent to the other;
* that collapse is in turn equivalent to the deflated top eigenvalue of
  the squared transition product dropping strictly below one;
* the coefficient interval caps every step's Laplacian spectrum below
  ``1/sigma``, so each update is a contraction on the error.

This module computes those certificates for concrete schedules and runs
randomized suites over synthetic switching instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInput, InvalidStep, NumericalError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    assemble_laplacian,
    consensus_subspace,
    is_psd,
    null_space,
    subspace_equal,
    subspace_intersection,
    subspace_mismatch,
    sym_eigen,
)
from .engine import ScheduledWeights, Trajectory
from .topology import Topology
from .weights import (
    OrthoVectorSet,
    WeightSchedule,
    build_ortho_set,
    laplacian_at,
    sample_coefficients,
)


@dataclass(frozen=True)
class TransitionProduct:
    """Product of per-step update matrices over ``[k_from, k_to)``."""

    matrix: np.ndarray
    k_from: int
    k_to: int


def transition(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    k_from: int,
    k_to: int,
    k0_overrides: Mapping[tuple[int, int], np.ndarray] | None = None,
) -> TransitionProduct:
    """State transition matrix: applying it to x(k_from) yields x(k_to)."""
    if k_from >= k_to:
        raise InvalidStep(f"need k_from < k_to, got [{k_from}, {k_to})")
    provider = ScheduledWeights(schedule, vectors, k0_overrides)
    size = schedule.topology.n * vectors.dim
    phi = np.eye(size)
    for k in range(k_from, k_to):
        phi = provider.update_matrix(k, schedule.sigma) @ phi
    return TransitionProduct(matrix=phi, k_from=k_from, k_to=k_to)


@dataclass
class ErrorTrace:
    """Deviation of the stacked state from the conserved average, per step."""

    omega: np.ndarray
    norms: np.ndarray


def error_trace(trajectory: Trajectory) -> ErrorTrace:
    steps, n, D = trajectory.states.shape
    target = np.tile(trajectory.initial_average(), n)
    omega = trajectory.states.reshape(steps, n * D) - target
    return ErrorTrace(omega=omega, norms=np.linalg.norm(omega, axis=1))


def consensus_deflated_mu(
    phi: np.ndarray,
    n: int,
    block_dim: int,
    tol: float = DEFAULT_TOL,
) -> float:
    """Top eigenvalue of ``Φ^T Φ`` after removing the consensus directions.

    The block-constant space is invariant under every update factor, so
    ``Φ^T Φ`` carries exactly ``block_dim`` structural unit eigenvalues
    there.  With finite precision those are only near one, and sorting
    alone can misattribute them, so the matrix is compressed onto the
    orthogonal complement before taking the maximum eigenvalue.
    """
    R = consensus_subspace(n, block_dim, tol)
    comp = R.complement().basis
    M = phi.T @ phi
    C = comp.T @ M @ comp
    w, _ = sym_eigen(0.5 * (C + C.T), tol)
    return float(w[-1]) if w.size else 0.0


@dataclass
class NullspaceUnionCheck:
    """Kernel comparison between a Laplacian sum and its summands."""

    lhs_is_R: bool
    rhs_is_R: bool
    spaces_equal: bool
    mismatch: float
    sum_null: Subspace
    intersection: Subspace


def check_nullspace_union(
    laplacians: Sequence[np.ndarray],
    n: int,
    tol: float = DEFAULT_TOL,
) -> NullspaceUnionCheck:
    """Compare ``null(Σ L_i)`` with ``∩ null(L_i)`` and with the consensus space.

    The two kernels are computed along independent routes: the left side
    eigendecomposes the sum, the right side intersects the individual
    kernels through complement projectors.  For PSD inputs the spans must
    coincide, and either one equals the block-constant space exactly when
    the other does.

    Raises
    ------
    InvalidInput
        If any input fails the symmetry or PSD requirement.
    """
    if not laplacians:
        raise InvalidInput("need at least one Laplacian")
    size = laplacians[0].shape[0]
    if size % n != 0:
        raise InvalidInput(f"matrix size {size} is not a multiple of n={n}")
    block_dim = size // n
    for idx, L in enumerate(laplacians):
        if not is_psd(L, tol):
            raise InvalidInput(f"input {idx} is not positive semi-definite")
    total = np.zeros_like(laplacians[0])
    for L in laplacians:
        total = total + L
    sum_null = null_space(total, tol)
    parts = [null_space(L, tol) for L in laplacians]
    intersection = subspace_intersection(parts, tol)
    R = consensus_subspace(n, block_dim, tol)
    return NullspaceUnionCheck(
        lhs_is_R=subspace_equal(sum_null, R, tol=max(tol, 1e-8)),
        rhs_is_R=subspace_equal(intersection, R, tol=max(tol, 1e-8)),
        spaces_equal=subspace_equal(sum_null, intersection, tol=max(tol, 1e-8)),
        mismatch=(
            subspace_mismatch(sum_null, intersection)
            if sum_null.dim == intersection.dim
            else 1.0
        ),
        sum_null=sum_null,
        intersection=intersection,
    )


@dataclass
class MuCheck:
    """Deflated contraction factor of a transition product."""

    mu: float
    union_null_is_R: bool
    lambda_max: float
    sigma: float


def mu_contraction_check(
    laplacians: Sequence[np.ndarray],
    sigma: float,
    n: int,
    tol: float = DEFAULT_TOL,
) -> MuCheck:
    """Certify ``mu < 1  ⇔  null(Σ L_i) = R`` for one switching interval.

    Preconditions: every Laplacian is symmetric PSD with
    ``λ_max < 1/sigma`` (so each factor is a contraction); violations
    raise ``PreconditionError``.
    """
    if not laplacians:
        raise InvalidInput("need at least one Laplacian")
    size = laplacians[0].shape[0]
    block_dim = size // n
    lam_max = 0.0
    for L in laplacians:
        w, _ = sym_eigen(L, tol)
        lam_max = max(lam_max, float(w[-1]))
    if lam_max >= 1.0 / sigma:
        raise PreconditionError(
            f"step size too large: lambda_max={lam_max} >= 1/sigma={1.0 / sigma}"
        )
    phi = np.eye(size)
    for L in laplacians:
        phi = (np.eye(size) - sigma * L) @ phi
    mu = consensus_deflated_mu(phi, n, block_dim, tol)
    total = np.zeros_like(laplacians[0])
    for L in laplacians:
        total = total + L
    R = consensus_subspace(n, block_dim, tol)
    union_is_R = subspace_equal(null_space(total, tol), R, tol=max(tol, 1e-8))
    return MuCheck(mu=mu, union_null_is_R=union_is_R, lambda_max=lam_max, sigma=sigma)


def check_mu_criterion(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    k_from: int,
    k_to: int,
    tol: float = DEFAULT_TOL,
) -> MuCheck:
    """Contraction certificate for the scheduled weights over ``[k_from, k_to)``."""
    if k_from >= k_to:
        raise InvalidStep(f"need k_from < k_to, got [{k_from}, {k_to})")
    laplacians = [laplacian_at(schedule, vectors, k) for k in range(k_from, k_to)]
    return mu_contraction_check(
        laplacians, schedule.sigma, schedule.topology.n, tol
    )


def check_lambda_bound(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    k: int,
) -> tuple[float, float]:
    """Largest Laplacian eigenvalue at step ``k`` and its bound ``1/sigma``."""
    L = laplacian_at(schedule, vectors, k)
    w, _ = sym_eigen(L)
    return float(w[-1]), 1.0 / schedule.sigma


def characterize_H(
    topology: Topology,
    static_weights: Mapping[tuple[int, int], np.ndarray],
    tol: float = DEFAULT_TOL,
) -> Subspace:
    """Kernel of a static-weight Laplacian, verified edge by edge.

    Every kernel vector must have per-edge differences inside the edge
    weight's kernel; together with the block-constant directions that is
    the whole story of why rank-deficient static weights allow cluster
    consensus.  A violation raises ``NumericalError``.
    """
    L = assemble_laplacian(topology, static_weights, tol)
    kernel = null_space(L, tol)
    some_edge = next(iter(topology.edges), None)
    if some_edge is None:
        return kernel
    D = np.asarray(static_weights[some_edge]).shape[0]
    scale = max(float(np.max(np.abs(W))) for W in static_weights.values())
    limit = max(tol * max(scale, 1.0), 1e-12)
    for col in range(kernel.dim):
        u = kernel.basis[:, col].reshape(topology.n, D)
        for (i, j) in topology.edges:
            residual = np.asarray(static_weights[(i, j)]) @ (u[i - 1] - u[j - 1])
            if float(np.max(np.abs(residual))) > limit:
                raise NumericalError(
                    f"kernel vector violates the edge condition on {(i, j)}"
                )
    R = consensus_subspace(topology.n, D, tol)
    for col in range(R.dim):
        if kernel.residual(R.basis[:, col]) > max(tol, 1e-8):
            raise NumericalError("kernel does not contain the consensus space")
    return kernel


# ---------------------------------------------------------------------------
# Randomized verification suites
# ---------------------------------------------------------------------------


@dataclass
class SuiteReport:
    """Outcome of one randomized property suite."""

    name: str
    total: int
    failures: list[str] = field(default_factory=list)
    worst: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "total": self.total,
            "passed": self.passed,
            "failures": self.failures,
            "worst": self.worst,
            "counts": self.counts,
        }


@dataclass(frozen=True)
class SwitchingInstance:
    """One synthetic switching network: n agents, a few PSD Laplacians."""

    n: int
    block_dim: int
    laplacians: tuple[np.ndarray, ...]


def random_switching_instance(rng: np.random.Generator) -> SwitchingInstance:
    """Random instance with rank-1..full-rank projector weights.

    Mixing ranks exercises both collapsed kernels (equal to the consensus
    space) and enlarged ones.
    """
    n = int(rng.integers(2, 6))
    D = int(rng.integers(2, 7))
    count = int(rng.integers(1, 5))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    laplacians = []
    for _ in range(count):
        keep = [p for p in pairs if rng.random() < 0.6]
        if not keep:
            keep = [pairs[int(rng.integers(0, len(pairs)))]]
        weights = {}
        for edge in keep:
            r = int(rng.integers(1, D + 1))
            Q, _ = np.linalg.qr(rng.normal(size=(D, D)))
            coeffs = rng.uniform(0.5, 2.0, size=r)
            weights[edge] = (Q[:, :r] * coeffs) @ Q[:, :r].T
        topo = Topology.build(n, keep)
        laplacians.append(assemble_laplacian(topo, weights))
    return SwitchingInstance(n=n, block_dim=D, laplacians=tuple(laplacians))


def nullspace_union_suite(
    instances: int = 200,
    seed: int = 0,
    tol: float = 1e-8,
) -> SuiteReport:
    """Kernel-of-sum vs intersection-of-kernels over random instances."""
    rng = np.random.default_rng(seed)
    report = SuiteReport(name="nullspace_union", total=instances)
    worst_mismatch = 0.0
    both_R = 0
    neither_R = 0
    for idx in range(instances):
        inst = random_switching_instance(rng)
        res = check_nullspace_union(list(inst.laplacians), inst.n, tol=DEFAULT_TOL)
        if not res.spaces_equal or res.mismatch > tol:
            report.failures.append(f"instance {idx}: kernels differ ({res.mismatch:.3e})")
        if res.lhs_is_R != res.rhs_is_R:
            report.failures.append(
                f"instance {idx}: equivalence broken (sum={res.lhs_is_R}, inter={res.rhs_is_R})"
            )
        worst_mismatch = max(worst_mismatch, res.mismatch)
        if res.lhs_is_R:
            both_R += 1
        else:
            neither_R += 1
    report.worst["kernel_mismatch"] = worst_mismatch
    report.counts["collapsed_to_R"] = both_R
    report.counts["enlarged_kernel"] = neither_R
    if both_R == 0 or neither_R == 0:
        report.failures.append("suite did not exercise both kernel outcomes")
    return report


def mu_equivalence_suite(
    instances: int = 200,
    seed: int = 0,
    tol: float = 1e-8,
) -> SuiteReport:
    """``mu < 1`` iff the union kernel collapses, over random instances.

    The step size is rescaled per instance to keep every factor a
    contraction, as the equivalence requires.
    """
    rng = np.random.default_rng(seed)
    report = SuiteReport(name="mu_equivalence", total=instances)
    closest = 1.0
    contracting = 0
    stalled = 0
    for idx in range(instances):
        inst = random_switching_instance(rng)
        lam = 0.0
        for L in inst.laplacians:
            w, _ = sym_eigen(L)
            lam = max(lam, float(w[-1]))
        sigma = 0.8 / lam if lam > 0 else 1.0
        res = mu_contraction_check(list(inst.laplacians), sigma, inst.n)
        mu_small = res.mu < 1.0 - tol
        if mu_small != res.union_null_is_R:
            report.failures.append(
                f"instance {idx}: mu={res.mu:.12f} vs union_is_R={res.union_null_is_R}"
            )
        if res.union_null_is_R:
            contracting += 1
            closest = min(closest, 1.0 - res.mu)
        else:
            stalled += 1
    report.worst["smallest_contraction_margin"] = closest
    report.counts["contracting"] = contracting
    report.counts["stalled"] = stalled
    if contracting == 0 or stalled == 0:
        report.failures.append("suite did not exercise both contraction outcomes")
    return report


def period_nullspace_suite(
    topology: Topology,
    d: int,
    d_virtual: int,
    sigma: float,
    seeds: Sequence[int],
    tol: float = 1e-8,
) -> SuiteReport:
    """One-period Laplacian sums collapse to the consensus space, per seed."""
    vectors = build_ortho_set(d, d_virtual)
    report = SuiteReport(name="period_nullspace", total=len(seeds))
    worst = 0.0
    for seed in seeds:
        schedule = sample_coefficients(topology, sigma, vectors.d_star, seed)
        total = np.zeros((topology.n * vectors.dim, topology.n * vectors.dim))
        for k in range(1, vectors.d_star + 1):
            total += laplacian_at(schedule, vectors, k)
        kernel = null_space(total)
        R = consensus_subspace(topology.n, vectors.dim)
        if not subspace_equal(kernel, R, tol=tol):
            report.failures.append(f"seed {seed}: period kernel is not the consensus space")
        else:
            worst = max(worst, subspace_mismatch(kernel, R))
    report.worst["kernel_mismatch"] = worst
    return report


def step_size_bound_suite(
    topology: Topology,
    d: int,
    d_virtual: int,
    sigma: float,
    seeds: Sequence[int],
    margin: float = 1e-10,
) -> SuiteReport:
    """Every in-period Laplacian stays below ``1/sigma``, per seed."""
    vectors = build_ortho_set(d, d_virtual)
    report = SuiteReport(name="step_size_bound", total=len(seeds))
    worst = 0.0
    for seed in seeds:
        schedule = sample_coefficients(topology, sigma, vectors.d_star, seed)
        for k in range(1, vectors.d_star + 1):
            lam, bound = check_lambda_bound(schedule, vectors, k)
            worst = max(worst, lam)
            if lam >= bound - margin:
                report.failures.append(f"seed {seed}, step {k}: lambda_max={lam} vs {bound}")
    report.worst["lambda_max"] = worst
    report.worst["bound"] = 1.0 / sigma
    return report
