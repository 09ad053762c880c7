"""Small dense symmetric linear algebra for block-Laplacian analysis.

Everything operates on plain numpy arrays at desk scale (a few tens of
rows).  Rank decisions use a threshold relative to the largest eigenvalue
magnitude; the subspaces built from them carry that threshold along so
downstream comparisons stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateInput, DimensionError, InvalidInput, InvalidWeight

# Numerical-zero threshold, relative to the largest eigenvalue magnitude.
DEFAULT_TOL = 1e-9


def projector(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Orthogonal projector ``v v^T / (v^T v)`` onto the line spanned by ``v``.

    Symmetric, idempotent, rank one, and invariant under rescaling of ``v``.

    Raises
    ------
    DegenerateInput
        If ``v`` is the zero vector.
    """
    v = np.asarray(v, dtype=float).ravel()
    norm_sq = float(v @ v)
    if norm_sq == 0.0:
        raise DegenerateInput("cannot project onto the zero vector")
    return np.outer(v, v) / norm_sq


def _asymmetry(M: np.ndarray) -> float:
    """Max absolute deviation from symmetry, relative to the largest entry."""
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(M - M.T))) / scale


def sym_eigen(M: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    M : square symmetric array
    tol : relative tolerance for the symmetry check

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending; eigenvectors as orthonormal columns, so that
        ``M @ V[:, i] == w[i] * V[:, i]``.

    Raises
    ------
    InvalidInput
        If ``M`` deviates from symmetry by more than ``tol`` relative to its
        largest entry.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if _asymmetry(M) > max(tol, 1e-12):
        raise InvalidInput("matrix is not symmetric within tolerance")
    # Symmetrize before factoring so round-off in the input cannot leak
    # into complex arithmetic paths.
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return w, V


def rank_of(M: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank: eigenvalues with ``|λ| > tol * max|λ|``."""
    w, _ = sym_eigen(M, tol)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return int(np.sum(np.abs(w) > tol * scale)) if scale > 0.0 else 0


def is_psd(M: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff the smallest eigenvalue is above ``-tol * max|λ|``."""
    w, _ = sym_eigen(M, tol)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return bool(w.min() >= -tol * scale) if w.size else True


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by an orthonormal basis.

    ``basis`` has shape ``(ambient_dim, dim)``; columns are orthonormal
    within ``tol``.  ``tol`` records the numerical-zero threshold used when
    the subspace was extracted.
    """

    basis: np.ndarray
    tol: float = DEFAULT_TOL

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``v`` onto the subspace."""
        return self.basis @ (self.basis.T @ v)

    def residual(self, v: np.ndarray) -> float:
        """Relative distance of ``v`` from the subspace, in [0, 1]."""
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(v - self.project(v))) / norm

    def contains(self, v: np.ndarray, tol: float | None = None) -> bool:
        return self.residual(v) <= (self.tol if tol is None else tol)

    def projector_matrix(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def complement(self) -> "Subspace":
        """Orthogonal complement, extracted from the projector's kernel."""
        return null_space(self.projector_matrix(), self.tol)


def null_space(M: np.ndarray, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``{v : |λ| ≤ tol * max|λ| directions of M}``.

    The input must be symmetric (PSD in all intended uses); for the zero
    matrix the full ambient space is returned.
    """
    w, V = sym_eigen(M, tol)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    keep = np.abs(w) <= tol * scale
    return Subspace(basis=np.ascontiguousarray(V[:, keep]), tol=tol)


def assemble_laplacian(
    topology,
    weights: Mapping[tuple[int, int], np.ndarray],
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Block Laplacian ``L = D - A`` of a matrix-weighted graph.

    ``weights`` maps each canonical edge ``(i, j)`` with ``i < j`` (1-based
    agents) to a symmetric block of a common square size.  The result is
    symmetric, PSD for PSD blocks, and annihilates every block-constant
    vector (block row sums vanish), which is what conserves the average
    under the consensus update.

    Raises
    ------
    DimensionError
        If block sizes disagree or a block is not square.
    InvalidWeight
        If an edge weight is missing or asymmetric beyond ``tol``.
    """
    n = topology.n
    blocks: dict[tuple[int, int], np.ndarray] = {}
    dim: int | None = None
    for edge in topology.edges:
        if edge not in weights:
            raise InvalidWeight(f"missing weight for edge {edge}")
        W = np.asarray(weights[edge], dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionError(f"weight for edge {edge} is not square: {W.shape}")
        if dim is None:
            dim = W.shape[0]
        elif W.shape[0] != dim:
            raise DimensionError(
                f"weight for edge {edge} has size {W.shape[0]}, expected {dim}"
            )
        if _asymmetry(W) > max(tol, 1e-12):
            raise InvalidWeight(f"weight for edge {edge} is not symmetric")
        blocks[edge] = W
    if dim is None:
        # Empty edge set: the Laplacian needs an ambient block size to be
        # meaningful; fall back to the topology's declared block size if any.
        dim = getattr(topology, "block_dim", 1)
    L = np.zeros((n * dim, n * dim))
    for (i, j), W in blocks.items():
        si, sj = (i - 1) * dim, (j - 1) * dim
        L[si : si + dim, si : si + dim] += W
        L[sj : sj + dim, sj : sj + dim] += W
        L[si : si + dim, sj : sj + dim] -= W
        L[sj : sj + dim, si : si + dim] -= W
    return L


def consensus_subspace(n: int, block_dim: int, tol: float = DEFAULT_TOL) -> Subspace:
    """Span of the block-constant directions ``1_n ⊗ e_c`` (orthonormalized)."""
    basis = np.zeros((n * block_dim, block_dim))
    for c in range(block_dim):
        basis[c::block_dim, c] = 1.0 / np.sqrt(n)
    return Subspace(basis=basis, tol=tol)


def subspace_mismatch(a: Subspace, b: Subspace) -> float:
    """Worst relative projection residual between two subspaces' bases.

    Zero (up to round-off) iff the spans coincide; bases themselves are
    never compared because they are not unique.
    """
    worst = 0.0
    for space, other in ((a, b), (b, a)):
        for col in range(space.dim):
            worst = max(worst, other.residual(space.basis[:, col]))
    return worst


def subspace_equal(a: Subspace, b: Subspace, tol: float | None = None) -> bool:
    """Spans coincide: equal dimension and mutual residuals within ``tol``."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    if a.dim != b.dim:
        return False
    limit = max(a.tol, b.tol) if tol is None else tol
    return subspace_mismatch(a, b) <= limit


def subspace_intersection(spaces: Iterable[Subspace], tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection of subspaces via the kernel of summed complement projectors.

    A vector lies in every subspace iff it is annihilated by the PSD matrix
    ``Σ (I - P_i)``, so the intersection is that matrix's null space.
    """
    spaces = list(spaces)
    if not spaces:
        raise DegenerateInput("intersection of an empty collection is undefined")
    ambient = spaces[0].ambient_dim
    M = np.zeros((ambient, ambient))
    for s in spaces:
        if s.ambient_dim != ambient:
            raise DimensionError("subspaces live in different ambient spaces")
        M += np.eye(ambient) - s.projector_matrix()
    return null_space(M, tol)
