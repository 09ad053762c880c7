import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwconsensus import (
    NetworkState,
    StaticWeights,
    Topology,
    average,
    build_ortho_set,
    lift,
    make_message,
    real_block,
    rho,
    run,
    run_provider,
    sample_coefficients,
    step,
    virtual_block,
    write_trajectory_csv,
)
from mwconsensus.engine import apply_step
from mwconsensus.errors import NumericalError
from tests.conftest import SEC6_INITIAL


class TestLift:
    def test_ordering(self):
        x = lift([1.0, 2.0, 3.0], [9.0, 8.0, 7.0])
        np.testing.assert_array_equal(x, [9, 8, 7, 1, 2, 3])

    def test_round_trip(self):
        real = np.array([0.4, -1.2])
        virtual = np.array([5.0, 6.0, 7.0])
        x = lift(real, virtual)
        np.testing.assert_array_equal(real_block(x, 3), real)
        np.testing.assert_array_equal(virtual_block(x, 3), virtual)

    def test_reference_agent_one(self):
        x = lift([0.60, 0.32, 0.65], [0.20, 0.30, 0.25])
        np.testing.assert_allclose(x, [0.20, 0.30, 0.25, 0.60, 0.32, 0.65])


class TestAverage:
    def test_reference_initial_states(self):
        np.testing.assert_allclose(
            np.round(average(SEC6_INITIAL), 2), [0.34, 0.39, 0.50, 0.44, 0.41, 0.63]
        )

    def test_identical_states(self):
        states = np.tile([1.0, 2.0], (4, 1))
        np.testing.assert_array_equal(average(states), [1.0, 2.0])

    def test_opposite_pair(self):
        u = np.array([3.0, -1.0, 2.0])
        np.testing.assert_allclose(average(np.stack([u, -u])), 0.0, atol=1e-15)


class TestMakeMessage:
    def test_zero_state(self, sec6_schedule, vectors6):
        msg = make_message(sec6_schedule, vectors6, (2, 1), np.zeros(6), 3)
        np.testing.assert_array_equal(msg.payload, np.zeros(6))
        assert (msg.sender, msg.receiver, msg.k) == (2, 1, 3)

    def test_kernel_state_masked(self, sec6_schedule, vectors6):
        # A state inside the weight's kernel produces a zero payload.
        k = 2
        s = rho(k, vectors6.d_star)
        hidden = vectors6.vector(s + 1 if s + 1 < vectors6.dim else 1)
        msg = make_message(sec6_schedule, vectors6, (2, 1), hidden, k)
        np.testing.assert_allclose(msg.payload, 0.0, atol=1e-14)

    def test_payload_matches_projector_expansion(self, sec6_schedule, vectors6):
        # Independent reconstruction of the payload from the two projector
        # terms: gamma (v.x/|v|^2) v + zeta (m.x/|m|^2) m at k=3.
        rng = np.random.default_rng(0)
        x = rng.normal(size=6)
        edge = (2, 1)
        k = 3
        msg = make_message(sec6_schedule, vectors6, edge, x, k)
        v = vectors6.vector(3)
        m = vectors6.masking_vector
        gamma = sec6_schedule.gamma[(1, 2)][2]
        zeta = sec6_schedule.zeta[(1, 2)][2]
        expected = gamma * (v @ x) / (v @ v) * v + zeta * (m @ x) / (m @ m) * m
        np.testing.assert_allclose(msg.payload, expected, atol=1e-14)

    def test_payload_in_two_dimensional_span(self, sec6_schedule, vectors6):
        rng = np.random.default_rng(1)
        for k in (1, 2, 5, 6, 11):
            x = rng.normal(size=6)
            msg = make_message(sec6_schedule, vectors6, (3, 4), x, k)
            v = vectors6.vector(rho(k, vectors6.d_star))
            m = vectors6.masking_vector
            basis = np.stack([v / np.linalg.norm(v), m / np.linalg.norm(m)]).T
            out_of_plane = msg.payload - basis @ (basis.T @ msg.payload)
            assert np.max(np.abs(out_of_plane)) < 1e-10


class TestStep:
    def test_consensus_is_fixed_point(self, sec6_schedule, vectors6):
        states = np.tile([0.3, 0.1, 0.8, 0.5, 0.2, 0.9], (5, 1))
        state = NetworkState(k=1, states=states.copy())
        after = step(state, sec6_schedule, vectors6)
        np.testing.assert_allclose(after.states, states, atol=1e-15)
        assert after.k == 2

    def test_scalar_two_agent_reduction(self):
        # One edge, one-dimensional weight (a): the update must reduce to
        # x_i <- x_i + sigma * a * (x_other - x_i).
        states = np.array([[1.0], [3.0]])
        weight = np.array([[0.25]])
        sigma = 0.5
        new = apply_step(states, {(1, 2): weight}, sigma)
        np.testing.assert_allclose(new[0, 0], 1.0 + 0.5 * 0.25 * (3.0 - 1.0))
        np.testing.assert_allclose(new[1, 0], 3.0 + 0.5 * 0.25 * (1.0 - 3.0))

    def test_mean_preserved_each_step(self, sec6_schedule, vectors6):
        state = NetworkState(k=0, states=SEC6_INITIAL.copy())
        for _ in range(12):
            nxt = step(state, sec6_schedule, vectors6)
            np.testing.assert_allclose(
                average(nxt.states), average(state.states), atol=1e-12
            )
            state = nxt

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_mean_preserved_under_random_symmetric_weights(self, seed):
        rng = np.random.default_rng(seed)
        n, D = 4, 3
        topo = Topology.build(n, [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])
        weights = {}
        for e in topo.edges:
            A = rng.normal(size=(D, D))
            weights[e] = A @ A.T
        states = rng.normal(size=(n, D))
        new = apply_step(states, weights, 0.07)
        np.testing.assert_allclose(average(new), average(states), atol=1e-12)


class TestRun:
    def test_reference_run_reaches_average(self, sec6_setup):
        traj = run(
            sec6_setup.initial(),
            sec6_setup.schedule,
            sec6_setup.vectors,
            steps=5000,
            epsilon=1e-6,
            early_stop=True,
        )
        assert traj.converged_at is not None
        target = average(SEC6_INITIAL)
        np.testing.assert_allclose(traj.final, np.tile(target, (5, 1)), atol=1e-5)
        # matches the published rounded average within half a unit in the
        # second decimal place
        np.testing.assert_allclose(
            traj.final[0], [0.34, 0.39, 0.50, 0.44, 0.41, 0.63], atol=0.005
        )

    def test_consensus_start_stays_constant(self, sec6_setup):
        c = np.array([0.4, 0.2, 0.9, 0.1, 0.7, 0.3])
        initial = NetworkState(k=0, states=np.tile(c, (5, 1)))
        traj = run(initial, sec6_setup.schedule, sec6_setup.vectors, steps=30)
        np.testing.assert_allclose(traj.states[-1], traj.states[0], atol=1e-14)
        assert traj.converged_at == 1

    def test_error_norm_monotone_from_step_one(self, sec6_setup):
        traj = run(sec6_setup.initial(), sec6_setup.schedule, sec6_setup.vectors, steps=200)
        target = np.tile(average(SEC6_INITIAL), 5)
        norms = np.linalg.norm(traj.states.reshape(201, -1) - target, axis=1)
        diffs = np.diff(norms[1:])
        assert np.all(diffs <= 1e-14)

    def test_conservation_across_run(self, sec6_setup):
        traj = run(sec6_setup.initial(), sec6_setup.schedule, sec6_setup.vectors, steps=500)
        assert traj.conservation_residual() < 1e-10 * 5

    def test_static_rank_deficient_weights_stall(self, sec6_setup):
        # The cluster counterexample: one shared rank-1 weight, no global
        # consensus, but the mean still conserved.
        u = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
        provider = StaticWeights(sec6_setup.topology, np.outer(u, u))
        rng = np.random.default_rng(123)
        states = rng.uniform(size=(5, 6))
        traj = run_provider(states, provider, sigma=0.1, steps=2000, epsilon=1e-8)
        assert traj.converged_at is None
        assert traj.spread()[-1] > 1e-3
        assert traj.conservation_residual() < 1e-12

    def test_divergence_detected(self):
        topo = Topology.build(2, [(1, 2)])
        provider = StaticWeights(topo, np.eye(2) * 100.0)
        states = np.array([[1.0, 0.0], [0.0, 1.0]])
        with np.errstate(over="ignore"), pytest.raises(NumericalError):
            run_provider(states, provider, sigma=1e150, steps=10)


class TestTrajectoryExport:
    def test_csv_layout_and_determinism(self, sec6_setup, tmp_path):
        traj = run(sec6_setup.initial(), sec6_setup.schedule, sec6_setup.vectors, steps=3)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trajectory_csv(traj, p1)
        write_trajectory_csv(traj, p2)
        assert p1.read_bytes() == p2.read_bytes()
        lines = p1.read_text().strip().splitlines()
        assert lines[0] == "step,agent,coord_index,value"
        assert len(lines) == 1 + 4 * 5 * 6
        first = lines[1].split(",")
        assert first[:3] == ["0", "1", "1"]
        assert float(first[3]) == SEC6_INITIAL[0, 0]
