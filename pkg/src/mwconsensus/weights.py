"""Orthogonal masking directions and periodic rank-2 edge weight tables.

Each agent state is lifted to dimension ``D = d + d_virtual`` (virtual
coordinates first).  All edge weights are sums of two scaled line
projectors drawn from one mutually orthogonal direction set
``v_1 .. v_D``:

* at step 0 every edge uses the pair ``(v_1, v_D)``,
* at step ``k ≥ 1`` every edge uses ``(v_{rho(k)}, v_D)``, where ``rho``
  cycles through ``1 .. d_star`` with period ``d_star = D - 1``.

A transmitted payload therefore never exposes more than two linear
functionals of the sender's state, while over one full period the weight
sum on every edge becomes positive definite, which is what drives the
network to the exact average.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, InvalidInput, InvalidStep, NumericalError
from .linalg import assemble_laplacian, projector
from .topology import Topology, canonical_edge

# Fraction of the open coefficient interval kept clear at both endpoints.
# Keeps sampled coefficients strictly interior and bounded away from the
# degenerate-zero corner that would break payload inversion.
_INTERVAL_MARGIN = 1e-3


@dataclass(frozen=True)
class OrthoVectorSet:
    """The mutually orthogonal directions driving every edge weight.

    ``vectors`` holds ``v_1 .. v_D`` as rows, each in R^D.  Conditions
    enforced at construction:

    1. pairwise orthogonal,
    2. every direction has at least two nonzero entries,
    3. ``v_1`` has fewer than ``d_virtual`` nonzero entries, all of them
       inside the virtual block (coordinates 1..d_virtual),
    4. the last direction has no zero entry at all.

    Condition 3's support restriction is what lets a virtual-state
    adjustment absorb any real-state change without altering the two
    functionals exposed at step 0.
    """

    d: int
    d_virtual: int
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.d + self.d_virtual

    @property
    def d_star(self) -> int:
        return self.dim - 1

    def vector(self, index: int) -> np.ndarray:
        """Direction ``v_index`` for 1-based ``index``."""
        if not (1 <= index <= self.dim):
            raise InvalidInput(f"direction index {index} out of range 1..{self.dim}")
        return self.vectors[index - 1]

    @property
    def masking_vector(self) -> np.ndarray:
        """The all-nonzero direction paired into every weight."""
        return self.vectors[-1]

    def validate(self, tol: float = 1e-10) -> None:
        D = self.dim
        if self.vectors.shape != (D, D):
            raise NumericalError(f"expected {D} directions in R^{D}")
        gram = self.vectors @ self.vectors.T
        off = gram - np.diag(np.diag(gram))
        if float(np.max(np.abs(off))) > tol:
            raise NumericalError("directions are not mutually orthogonal")
        nonzero = np.abs(self.vectors) > tol
        if np.any(nonzero.sum(axis=1) < 2):
            raise NumericalError("every direction needs at least two nonzero entries")
        v1 = nonzero[0]
        if v1.sum() >= self.d_virtual:
            raise NumericalError(
                "the first direction must have fewer nonzero entries than d_virtual"
            )
        if np.any(v1[self.d_virtual :]):
            raise NumericalError(
                "the first direction must be supported on the virtual block"
            )
        if not np.all(nonzero[-1]):
            raise NumericalError("the last direction must have no zero entry")


def _pattern_vector(index: int, dim: int) -> np.ndarray:
    """Closed-form direction: ``(1/i, -1/i, .., -1/i, 1, 0, ..)``.

    Entry 0 is ``1/i``, entries 1..i-1 are ``-1/i``, entry i (when it
    exists) is 1, and the remainder is zero.  Any two such vectors are
    orthogonal by telescoping of the leading block.
    """
    v = np.zeros(dim)
    v[0] = 1.0 / index
    v[1:index] = -1.0 / index
    if index < dim:
        v[index] = 1.0
    return v


def build_ortho_set(d: int, d_virtual: int) -> OrthoVectorSet:
    """Construct the direction set for real dimension ``d`` and ``d_virtual ≥ 3``.

    For ``d_virtual == 3`` the closed-form pattern is used verbatim; for
    larger virtual blocks the same pattern is re-orthogonalized by a
    Gram-Schmidt sweep to clear accumulated round-off, and all structural
    conditions are re-validated either way.
    """
    if d < 1:
        raise ConfigError(f"d: real state dimension must be >= 1, got {d}")
    if d_virtual < 3:
        raise ConfigError(f"d_virtual: virtual dimension must be >= 3, got {d_virtual}")
    dim = d + d_virtual
    vectors = np.stack([_pattern_vector(i, dim) for i in range(1, dim + 1)])
    if d_virtual > 3:
        for i in range(1, dim):
            for j in range(i):
                prev = vectors[j]
                vectors[i] -= (vectors[i] @ prev) / (prev @ prev) * prev
    out = OrthoVectorSet(d=d, d_virtual=d_virtual, vectors=vectors)
    out.validate()
    return out


def rho(k: int, d_star: int) -> int:
    """Periodic direction selector for steps ``k ≥ 1``: cycles 1..d_star."""
    if k < 1:
        raise InvalidStep(f"the periodic selector is defined for k >= 1, got k={k}")
    r = k % d_star
    return d_star if r == 0 else r


@dataclass(frozen=True)
class WeightSchedule:
    """Per-edge positive coefficients for the periodic two-projector weights.

    ``gamma[edge][s]`` and ``zeta[edge][s]`` for ``s = 1..d_star`` scale the
    step-dependent and the masking projector at steps with ``rho(k) == s``;
    ``alpha[edge]`` and ``beta[edge]`` play the same roles at step 0.  All
    coefficients lie strictly inside ``(0, 1/(4 (n-1) sigma))``, which caps
    the Laplacian spectrum at ``1/sigma``.
    """

    topology: Topology
    sigma: float
    d_star: int
    gamma: Mapping[tuple[int, int], np.ndarray]
    zeta: Mapping[tuple[int, int], np.ndarray]
    alpha: Mapping[tuple[int, int], float]
    beta: Mapping[tuple[int, int], float]
    rng_seed: int

    @property
    def coefficient_bound(self) -> float:
        return 1.0 / (4.0 * (self.topology.n - 1) * self.sigma)


def sample_coefficients(
    topology: Topology,
    sigma: float,
    d_star: int,
    seed: int,
) -> WeightSchedule:
    """Draw one coefficient table per edge, deterministically from ``seed``.

    Coefficients are uniform over the admissible open interval with a tiny
    relative margin kept clear at both endpoints; the same seed always
    yields the same schedule.
    """
    if sigma <= 0:
        raise ConfigError(f"sigma: step size must be positive, got {sigma}")
    if d_star < 1:
        raise ConfigError(f"d_star: period must be >= 1, got {d_star}")
    bound = 1.0 / (4.0 * (topology.n - 1) * sigma)
    lo, hi = _INTERVAL_MARGIN * bound, (1.0 - _INTERVAL_MARGIN) * bound
    rng = np.random.default_rng(seed)
    gamma: dict[tuple[int, int], np.ndarray] = {}
    zeta: dict[tuple[int, int], np.ndarray] = {}
    alpha: dict[tuple[int, int], float] = {}
    beta: dict[tuple[int, int], float] = {}
    for edge in sorted(topology.edges):
        gamma[edge] = rng.uniform(lo, hi, size=d_star)
        zeta[edge] = rng.uniform(lo, hi, size=d_star)
        alpha[edge] = float(rng.uniform(lo, hi))
        beta[edge] = float(rng.uniform(lo, hi))
    return WeightSchedule(
        topology=topology,
        sigma=sigma,
        d_star=d_star,
        gamma=gamma,
        zeta=zeta,
        alpha=alpha,
        beta=beta,
        rng_seed=seed,
    )


def edge_weight(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    edge: tuple[int, int],
    k: int,
) -> np.ndarray:
    """Weight matrix on ``edge`` at step ``k`` (shared by both endpoints).

    Rank 2 for every k: a scaled projector onto the step's direction plus a
    scaled projector onto the masking direction.
    """
    edge = canonical_edge(edge)
    if edge not in schedule.topology.edges:
        raise InvalidInput(f"edge {edge} is not in the topology")
    mask = projector(vectors.masking_vector)
    if k == 0:
        return schedule.alpha[edge] * projector(vectors.vector(1)) + schedule.beta[edge] * mask
    s = rho(k, schedule.d_star)
    return (
        schedule.gamma[edge][s - 1] * projector(vectors.vector(s))
        + schedule.zeta[edge][s - 1] * mask
    )


def union_weight(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    edge: tuple[int, int],
    k_from: int,
    k_to: int,
) -> np.ndarray:
    """Sum of ``edge``'s weights over steps ``[k_from, k_to)``.

    Over one full period starting at k=1 the sum is positive definite: the
    step directions and the masking direction jointly span R^D.
    """
    if k_from >= k_to:
        raise InvalidStep(f"need k_from < k_to, got [{k_from}, {k_to})")
    total = np.zeros((vectors.dim, vectors.dim))
    for k in range(k_from, k_to):
        total += edge_weight(schedule, vectors, edge, k)
    return total


def laplacian_at(
    schedule: WeightSchedule,
    vectors: OrthoVectorSet,
    k: int,
) -> np.ndarray:
    """Block Laplacian of the network under the step-``k`` weights."""
    weight_map = {
        edge: edge_weight(schedule, vectors, edge, k) for edge in schedule.topology.edges
    }
    return assemble_laplacian(schedule.topology, weight_map)
