import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwconsensus import (
    Subspace,
    Topology,
    assemble_laplacian,
    consensus_subspace,
    is_psd,
    null_space,
    projector,
    rank_of,
    subspace_equal,
    subspace_intersection,
    sym_eigen,
)
from mwconsensus.errors import DegenerateInput, DimensionError, InvalidInput, InvalidWeight

# The rank-1 static weight used by the cluster-consensus counterexample:
# the outer product of (1, 1, 0) with itself.
RANK1_WEIGHT = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])


class TestProjector:
    def test_axis_aligned(self):
        np.testing.assert_allclose(projector([1.0, 0.0]), [[1.0, 0.0], [0.0, 0.0]])

    def test_hand_evaluated(self):
        # v = (1,1,0,0,0,0): v v^T has ones in the top-left 2x2 block and
        # v^T v = 2, so the projector carries 1/2 there and zero elsewhere.
        v = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
        expected = np.zeros((6, 6))
        expected[:2, :2] = 0.5
        np.testing.assert_allclose(projector(v), expected)

    def test_scale_invariance(self):
        np.testing.assert_allclose(projector([1.0, 1.0]), projector([2.0, 2.0]))

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInput):
            projector(np.zeros(4))

    @given(
        st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False),
            min_size=2,
            max_size=8,
        ).filter(lambda v: sum(abs(x) for x in v) > 1e-3)
    )
    def test_projector_properties(self, v):
        P = projector(v)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_allclose(np.trace(P), 1.0, atol=1e-12)
        np.testing.assert_allclose(P @ np.asarray(v), np.asarray(v), atol=1e-9)
        assert rank_of(P) == 1


class TestSymEigen:
    def test_identity(self):
        w, _ = sym_eigen(np.eye(3))
        np.testing.assert_allclose(w, [1.0, 1.0, 1.0])

    def test_projector_spectrum(self):
        w, _ = sym_eigen(projector([3.0, -1.0, 2.0, 0.5]))
        np.testing.assert_allclose(w, [0.0, 0.0, 0.0, 1.0], atol=1e-12)

    def test_rank1_weight_spectrum(self):
        # Trace 2, determinant 0 of the 2x2 live block: eigenvalues (0, 0, 2).
        w, V = sym_eigen(RANK1_WEIGHT)
        np.testing.assert_allclose(w, [0.0, 0.0, 2.0], atol=1e-12)
        for i in range(3):
            np.testing.assert_allclose(
                RANK1_WEIGHT @ V[:, i], w[i] * V[:, i], atol=1e-12
            )

    def test_eigenpairs_and_order(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(7, 7))
        M = A + A.T
        w, V = sym_eigen(M)
        assert np.all(np.diff(w) >= 0)
        np.testing.assert_allclose(M @ V, V @ np.diag(w), atol=1e-10)
        np.testing.assert_allclose(V.T @ V, np.eye(7), atol=1e-12)

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidInput):
            sym_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestRankPsd:
    def test_identity_rank(self):
        assert rank_of(np.eye(4)) == 4

    def test_rank1_weight(self):
        assert rank_of(RANK1_WEIGHT) == 1
        assert is_psd(RANK1_WEIGHT)

    def test_indefinite(self):
        assert not is_psd(np.diag([1.0, -1.0]))

    def test_zero_matrix(self):
        assert rank_of(np.zeros((3, 3))) == 0
        assert is_psd(np.zeros((3, 3)))


class TestNullSpace:
    def test_zero_matrix_full_space(self):
        space = null_space(np.zeros((3, 3)))
        assert space.dim == 3

    def test_projector_complement(self):
        v = np.array([1.0, 2.0])
        space = null_space(projector(v))
        assert space.dim == 1
        assert abs(space.basis[:, 0] @ v) < 1e-12

    def test_orthogonal_to_range(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(6, 3))
        M = A @ A.T  # PSD, rank 3
        space = null_space(M)
        assert space.dim == 3
        for col in range(space.dim):
            u = space.basis[:, col]
            assert np.max(np.abs(M @ u)) < 1e-9 * np.max(np.abs(M))

    def test_connected_pd_graph_kernel_is_consensus_space(self):
        # With positive definite weights on a connected graph the kernel
        # contains exactly the block-constant directions.
        rng = np.random.default_rng(8)
        topo = Topology.build(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
        weights = {}
        for edge in topo.edges:
            A = rng.normal(size=(3, 3))
            weights[edge] = A @ A.T + 0.5 * np.eye(3)
        L = assemble_laplacian(topo, weights)
        kernel = null_space(L)
        assert subspace_equal(kernel, consensus_subspace(4, 3), tol=1e-8)


class TestAssembleLaplacian:
    def test_single_identity_edge(self):
        topo = Topology.build(2, [(1, 2)])
        L = assemble_laplacian(topo, {(1, 2): np.eye(2)})
        I2 = np.eye(2)
        expected = np.block([[I2, -I2], [-I2, I2]])
        np.testing.assert_allclose(L, expected)

    def test_block_row_sums_vanish(self, sec6_topology):
        rng = np.random.default_rng(2)
        weights = {}
        for edge in sec6_topology.edges:
            A = rng.normal(size=(4, 4))
            weights[edge] = A @ A.T
        L = assemble_laplacian(sec6_topology, weights)
        np.testing.assert_allclose(L, L.T, atol=1e-12)
        assert is_psd(L)
        ones = np.tile(np.eye(4), (5, 1))  # columns span the consensus space
        np.testing.assert_allclose(L @ ones, 0.0, atol=1e-10)

    def test_rank1_weight_kernel_exceeds_consensus_space(self, sec6_topology):
        # Every edge shares the rank-1 weight (zero-padded to the lifted
        # dimension); the kernel is then far larger than the consensus
        # space.  Counting oracle: the Laplacian is a Kronecker product of
        # the scalar graph Laplacian (one zero eigenvalue on a connected
        # graph) with a rank-1 projector, so exactly (n-1) * 1 eigenvalues
        # are nonzero: kernel dim = n*D - (n-1) = 26 > 6.
        W = np.zeros((6, 6))
        W[:3, :3] = RANK1_WEIGHT
        L = assemble_laplacian(sec6_topology, {e: W for e in sec6_topology.edges})
        kernel = null_space(L)
        assert kernel.dim == 26
        assert kernel.dim > consensus_subspace(5, 6).dim

    def test_empty_edge_set(self):
        topo = Topology.build(2, [])
        L = assemble_laplacian(topo, {})
        np.testing.assert_allclose(L, np.zeros((2, 2)))

    def test_size_mismatch_rejected(self):
        topo = Topology.build(3, [(1, 2), (2, 3)])
        with pytest.raises(DimensionError):
            assemble_laplacian(topo, {(1, 2): np.eye(2), (2, 3): np.eye(3)})

    def test_asymmetric_weight_rejected(self):
        topo = Topology.build(2, [(1, 2)])
        with pytest.raises(InvalidWeight):
            assemble_laplacian(topo, {(1, 2): np.array([[1.0, 0.5], [0.0, 1.0]])})

    def test_missing_weight_rejected(self):
        topo = Topology.build(3, [(1, 2), (2, 3)])
        with pytest.raises(InvalidWeight):
            assemble_laplacian(topo, {(1, 2): np.eye(2)})


class TestSubspaces:
    def test_equality_ignores_basis_choice(self):
        b1 = np.eye(4)[:, :2]
        theta = 0.7
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        b2 = b1 @ rot
        assert subspace_equal(Subspace(b1), Subspace(b2))

    def test_different_dims_not_equal(self):
        assert not subspace_equal(Subspace(np.eye(3)[:, :1]), Subspace(np.eye(3)[:, :2]))

    def test_intersection(self):
        # span{e1, e2} ∩ span{e2, e3} = span{e2}
        s1 = Subspace(np.eye(4)[:, [0, 1]])
        s2 = Subspace(np.eye(4)[:, [1, 2]])
        inter = subspace_intersection([s1, s2])
        assert inter.dim == 1
        np.testing.assert_allclose(np.abs(inter.basis[:, 0]), [0, 1, 0, 0], atol=1e-10)

    def test_complement(self):
        s = Subspace(np.eye(5)[:, :2])
        comp = s.complement()
        assert comp.dim == 3
        np.testing.assert_allclose(comp.basis.T @ s.basis, 0.0, atol=1e-12)
