import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwconsensus import (
    Subspace,
    build_ortho_set,
    edge_weight,
    laplacian_at,
    null_space,
    projector,
    rank_of,
    rho,
    sample_coefficients,
    subspace_intersection,
    sym_eigen,
    union_weight,
)
from mwconsensus.errors import ConfigError, InvalidStep


class TestOrthoSet:
    def test_first_direction(self, vectors6):
        np.testing.assert_allclose(vectors6.vector(1), [1, 1, 0, 0, 0, 0])

    def test_masking_direction(self, vectors6):
        sixth = 1.0 / 6.0
        np.testing.assert_allclose(
            vectors6.masking_vector, [sixth, -sixth, -sixth, -sixth, -sixth, -sixth]
        )

    def test_pairwise_orthogonal(self, vectors6):
        gram = vectors6.vectors @ vectors6.vectors.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 1e-12

    def test_d_virtual_floor(self):
        with pytest.raises(ConfigError):
            build_ortho_set(3, 2)

    @given(d=st.integers(1, 6), d_virtual=st.integers(3, 6))
    @settings(max_examples=30, deadline=None)
    def test_structural_conditions(self, d, d_virtual):
        vecs = build_ortho_set(d, d_virtual)
        D = d + d_virtual
        assert vecs.vectors.shape == (D, D)
        gram = vecs.vectors @ vecs.vectors.T
        assert np.max(np.abs(gram - np.diag(np.diag(gram)))) < 1e-12
        nonzero = np.abs(vecs.vectors) > 1e-12
        assert np.all(nonzero.sum(axis=1) >= 2)
        assert nonzero[0].sum() < d_virtual
        assert not nonzero[0][d_virtual:].any()
        assert nonzero[-1].all()


class TestRho:
    def test_period_boundary_examples(self):
        assert rho(1, 5) == 1
        assert rho(5, 5) == 5
        assert rho(6, 5) == 1

    def test_boundary_is_period(self):
        for d_star in (1, 2, 5, 9):
            assert rho(d_star, d_star) == d_star

    def test_periodicity(self):
        assert rho(2 * 5 + 3, 5) == 3

    @given(k=st.integers(1, 10_000), d_star=st.integers(1, 50))
    def test_range_and_period(self, k, d_star):
        r = rho(k, d_star)
        assert 1 <= r <= d_star
        assert rho(k + d_star, d_star) == r

    def test_step_zero_rejected(self):
        with pytest.raises(InvalidStep):
            rho(0, 5)


class TestSampling:
    def test_open_interval(self, sec6_topology, vectors6):
        # n=5, sigma=2: every coefficient sits strictly inside (0, 1/32).
        schedule = sample_coefficients(sec6_topology, 2.0, vectors6.d_star, seed=0)
        bound = 1.0 / 32.0
        assert schedule.coefficient_bound == bound
        for table in (schedule.gamma, schedule.zeta):
            for edge, coeffs in table.items():
                assert np.all(coeffs > 0.0) and np.all(coeffs < bound)
        for table in (schedule.alpha, schedule.beta):
            for edge, value in table.items():
                assert 0.0 < value < bound

    def test_deterministic(self, sec6_topology, vectors6):
        a = sample_coefficients(sec6_topology, 2.0, vectors6.d_star, seed=42)
        b = sample_coefficients(sec6_topology, 2.0, vectors6.d_star, seed=42)
        for edge in sec6_topology.edges:
            np.testing.assert_array_equal(a.gamma[edge], b.gamma[edge])
            np.testing.assert_array_equal(a.zeta[edge], b.zeta[edge])
            assert a.alpha[edge] == b.alpha[edge]
            assert a.beta[edge] == b.beta[edge]

    def test_interval_shrinks_with_sigma(self, sec6_topology, vectors6):
        schedule = sample_coefficients(sec6_topology, 2000.0, vectors6.d_star, seed=0)
        bound = 1.0 / (4 * 4 * 2000.0)
        for edge, coeffs in schedule.gamma.items():
            assert np.all(coeffs > 0.0) and np.all(coeffs < bound)


class TestEdgeWeight:
    def test_rank_two_every_step(self, sec6_schedule, vectors6):
        for k in range(1, 1 + vectors6.d_star):
            for edge in sec6_schedule.topology.edges:
                W = edge_weight(sec6_schedule, vectors6, edge, k)
                assert rank_of(W) == 2

    def test_eigen_relation(self, sec6_schedule, vectors6):
        edge = (1, 2)
        for k in (1, 3, 7):
            W = edge_weight(sec6_schedule, vectors6, edge, k)
            s = rho(k, vectors6.d_star)
            v = vectors6.vector(s)
            gamma = sec6_schedule.gamma[edge][s - 1]
            np.testing.assert_allclose(W @ v, gamma * v, atol=1e-14)
            mask = vectors6.masking_vector
            zeta = sec6_schedule.zeta[edge][s - 1]
            np.testing.assert_allclose(W @ mask, zeta * mask, atol=1e-14)

    def test_other_directions_annihilated(self, sec6_schedule, vectors6):
        edge = (3, 4)
        k = 2
        s = rho(k, vectors6.d_star)
        W = edge_weight(sec6_schedule, vectors6, edge, k)
        for idx in range(1, vectors6.dim + 1):
            if idx in (s, vectors6.dim):
                continue
            np.testing.assert_allclose(W @ vectors6.vector(idx), 0.0, atol=1e-14)

    def test_step_zero_uses_anchor_pair(self, sec6_schedule, vectors6):
        edge = (1, 2)
        W = edge_weight(sec6_schedule, vectors6, edge, 0)
        expected = sec6_schedule.alpha[edge] * projector(
            vectors6.vector(1)
        ) + sec6_schedule.beta[edge] * projector(vectors6.masking_vector)
        np.testing.assert_allclose(W, expected)

    def test_symmetric_in_edge_orientation(self, sec6_schedule, vectors6):
        W_ij = edge_weight(sec6_schedule, vectors6, (2, 5), 4)
        W_ji = edge_weight(sec6_schedule, vectors6, (5, 2), 4)
        np.testing.assert_array_equal(W_ij, W_ji)


class TestUnionWeight:
    def test_full_period_positive_definite(self, sec6_schedule, vectors6):
        for edge in sec6_schedule.topology.edges:
            U = union_weight(sec6_schedule, vectors6, edge, 1, 1 + vectors6.d_star)
            w, _ = sym_eigen(U)
            assert w[0] > 0.0

    def test_single_term(self, sec6_schedule, vectors6):
        U = union_weight(sec6_schedule, vectors6, (1, 2), 1, 2)
        assert rank_of(U) == 2

    def test_periodicity_doubles(self, sec6_schedule, vectors6):
        edge = (2, 3)
        k = 2
        single = edge_weight(sec6_schedule, vectors6, edge, k)
        double = union_weight(
            sec6_schedule, vectors6, edge, k, k + 1
        ) + union_weight(
            sec6_schedule, vectors6, edge, k + vectors6.d_star, k + vectors6.d_star + 1
        )
        np.testing.assert_allclose(double, 2.0 * single, atol=1e-15)

    def test_empty_interval_rejected(self, sec6_schedule, vectors6):
        with pytest.raises(InvalidStep):
            union_weight(sec6_schedule, vectors6, (1, 2), 3, 3)


class TestScheduleInvariants:
    def test_period_weight_kernels_intersect_trivially(self, sec6_schedule, vectors6):
        for edge in sec6_schedule.topology.edges:
            kernels = [
                null_space(edge_weight(sec6_schedule, vectors6, edge, k))
                for k in range(1, 1 + vectors6.d_star)
            ]
            assert subspace_intersection(kernels).dim == 0

    def test_laplacian_spectrum_below_sigma_inverse(self, sec6_schedule, vectors6):
        for k in range(1, 1 + vectors6.d_star):
            L = laplacian_at(sec6_schedule, vectors6, k)
            w, _ = sym_eigen(L)
            assert w[-1] < 1.0 / sec6_schedule.sigma
