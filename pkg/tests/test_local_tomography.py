"""Tests for the three-direction tomography strategy."""
import math

import numpy as np
import pytest

from entmeter.local_tomography import (
    DegenerateGeometryError,
    DirectionTriple,
    LocalProbabilities,
    analytic_uncertainty,
    average_uncertainty,
    delta_batch,
    detrho_partials,
    ensemble_bloch,
    estimate_entanglement_local,
    estimate_from_probabilities,
    outcome_probabilities,
    reconstruct_bloch,
    simulate_local_counts,
    split_budget,
)
from entmeter.sampling import CountVector, SeededStream, derive_seed, sample_states
from entmeter.states import bell_state, basis_state, concurrence_sq, normalize, reduced_density


def random_triple(rng, max_condition=1e4):
    """Generic non-degenerate triple with isotropically random free directions."""
    while True:
        d_m, d_n = rng.standard_normal((2, 3))
        triple = DirectionTriple.from_directions(d_m, d_n)
        if triple.condition_number < max_condition:
            return triple


def state_with_bloch_z(radius: float):
    """Schmidt-form state whose first-qubit Bloch vector is (0, 0, radius)."""
    lam = (1.0 + radius) / 2.0
    return normalize(np.array([math.sqrt(lam), 0.0, 0.0, math.sqrt(1.0 - lam)]))


class TestDirectionTriple:
    def test_orthogonal_condition(self):
        assert DirectionTriple.orthogonal().condition_number == pytest.approx(1.0, abs=1e-12)

    def test_rows_unit_norm(self):
        triple = DirectionTriple.from_angles(0.3, 2.1, 4.0)
        assert np.allclose(np.linalg.norm(triple.matrix, axis=1), 1.0, atol=1e-12)

    def test_angles_round_trip(self):
        theta_m, theta_n, phi = 0.7, 1.9, 2.4
        triple = DirectionTriple.from_angles(theta_m, theta_n, phi)
        back = triple.angles
        assert back[0] == pytest.approx(theta_m, abs=1e-12)
        assert back[1] == pytest.approx(theta_n, abs=1e-12)
        assert back[2] == pytest.approx(phi, abs=1e-12)

    def test_theta_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            DirectionTriple.from_angles(3.5, 1.0, 1.0)

    def test_first_row_fixed_to_z(self):
        with pytest.raises(ValueError):
            DirectionTriple(np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]]))

    def test_coplanar_triple_is_ill_conditioned(self):
        triple = DirectionTriple.from_angles(math.pi / 2, math.pi / 2, 1e-12)
        assert triple.condition_number > 1e8


class TestOutcomeProbabilities:
    def test_bell_is_unbiased_everywhere(self):
        probs = outcome_probabilities(bell_state(), DirectionTriple.from_angles(0.4, 1.3, 2.2))
        assert np.allclose(probs.p, 0.5, atol=1e-12)

    def test_zero_state_on_orthogonal_axes(self):
        probs = outcome_probabilities(basis_state(0), DirectionTriple.orthogonal())
        assert np.allclose(probs.p, [1.0, 0.5, 0.5], atol=1e-12)

    def test_half_radius_along_z(self):
        probs = outcome_probabilities(state_with_bloch_z(0.5), DirectionTriple.orthogonal())
        assert probs.p[0] == pytest.approx(0.75, abs=1e-12)


class TestReconstructBloch:
    def test_pure_state_reconstruction(self):
        probs = LocalProbabilities(p=np.array([1.0, 0.5, 0.5]))
        s = reconstruct_bloch(probs, DirectionTriple.orthogonal())
        assert np.allclose(s, [0, 0, 1], atol=1e-12)

    def test_exact_round_trip(self):
        rng = SeededStream(51, 0).generator()
        for state in sample_states(52, 100):
            triple = random_triple(rng)
            probs = outcome_probabilities(state, triple)
            s = reconstruct_bloch(probs, triple)
            assert np.max(np.abs(s - reduced_density(state, "A").bloch)) <= 1e-12

    def test_coplanar_rejected(self):
        probs = LocalProbabilities(p=np.array([0.5, 0.5, 0.5]))
        with pytest.raises(DegenerateGeometryError):
            reconstruct_bloch(probs, DirectionTriple.from_angles(math.pi / 2, math.pi / 2, 1e-12))


class TestEstimator:
    def test_exact_probabilities_exact_values(self):
        rng = SeededStream(53, 0).generator()
        for state in sample_states(54, 200):
            triple = random_triple(rng)
            est = estimate_from_probabilities(outcome_probabilities(state, triple), triple)
            assert est.values.concurrence_sq == pytest.approx(concurrence_sq(state), abs=1e-12)
            assert not est.clamped

    def test_counts_for_product_state(self):
        n = 1000
        counts = [
            CountVector(counts=np.array([n, 0]), shots=n),
            CountVector(counts=np.array([n // 2, n // 2]), shots=n),
            CountVector(counts=np.array([n // 2, n // 2]), shots=n),
        ]
        est = estimate_entanglement_local(counts, DirectionTriple.orthogonal())
        assert est.values.entropy == 0.0
        assert est.values.concurrence_sq == 0.0

    def test_unphysical_bloch_clamped_and_flagged(self):
        n = 100
        counts = [CountVector(counts=np.array([n, 0]), shots=n) for _ in range(3)]
        est = estimate_entanglement_local(counts, DirectionTriple.orthogonal())
        assert est.det_raw < 0.0
        assert est.values.det_reduced == 0.0
        assert est.clamped
        assert est.clamp_events == 1

    def test_wrong_count_arity(self):
        with pytest.raises(ValueError):
            estimate_entanglement_local([], DirectionTriple.orthogonal())


class TestPartials:
    def test_orthogonal_partials_are_minus_bloch(self):
        for state in sample_states(55, 20):
            grad = detrho_partials(state, DirectionTriple.orthogonal())
            bloch = reduced_density(state, "A").bloch
            # orthogonal rows (z, y, x): component k couples to direction row k
            expected = -DirectionTriple.orthogonal().matrix @ bloch
            assert np.allclose(grad, expected, atol=1e-12)

    def test_finite_difference_oracle(self):
        rng = SeededStream(56, 0).generator()
        step = 1e-6
        for state in sample_states(57, 1000):
            triple = random_triple(rng)
            grad = detrho_partials(state, triple)
            p0 = outcome_probabilities(state, triple).p
            fd = np.zeros(3)
            for k in range(3):
                up, down = p0.copy(), p0.copy()
                up[k] += step
                down[k] -= step
                det_up = estimate_from_probabilities(
                    LocalProbabilities(p=np.clip(up, 0, 1)), triple
                ).det_raw
                det_dn = estimate_from_probabilities(
                    LocalProbabilities(p=np.clip(down, 0, 1)), triple
                ).det_raw
                fd[k] = (det_up - det_dn) / (2 * step)
            assert np.max(np.abs(fd - grad)) <= 1e-6 * max(np.max(np.abs(grad)), 1.0)


class TestAnalyticUncertainty:
    def test_pure_state_zero(self):
        # transverse components vanish and the z probability has no variance
        assert analytic_uncertainty(basis_state(0), DirectionTriple.orthogonal(), 100) == 0.0

    def test_bell_state_zero(self):
        triple = DirectionTriple.from_angles(0.5, 1.1, 0.7)
        assert analytic_uncertainty(bell_state(), triple, 100) == 0.0

    def test_half_radius_value(self):
        # single surviving term: (1/2)^2 * (3/4)(1/4) / 100
        delta = analytic_uncertainty(state_with_bloch_z(0.5), DirectionTriple.orthogonal(), 100)
        assert delta == pytest.approx(math.sqrt(3) / 80, abs=1e-12)

    def test_per_direction_budgets(self):
        state = state_with_bloch_z(0.5)
        triple = DirectionTriple.orthogonal()
        mixed = analytic_uncertainty(state, triple, [100, 50, 50])
        assert mixed == pytest.approx(math.sqrt(3) / 80, abs=1e-12)

    def test_batch_matches_scalar(self):
        rng = SeededStream(58, 0).generator()
        states = sample_states(59, 50)
        triple = random_triple(rng)
        bloch = np.array([reduced_density(s, "A").bloch for s in states])
        batch = delta_batch(bloch, triple, 37)
        for i, state in enumerate(states):
            assert batch[i] == pytest.approx(analytic_uncertainty(state, triple, 37), abs=1e-13)


class TestAverageUncertainty:
    def test_single_state_matches_pointwise(self):
        stream = SeededStream(60, 0)
        report = average_uncertainty(DirectionTriple.orthogonal(), 1, 100, stream)
        state = sample_states(60, 1)[0]
        assert report.delta_av == pytest.approx(
            analytic_uncertainty(state, DirectionTriple.orthogonal(), 100), abs=1e-13
        )

    def test_exact_inverse_sqrt_scaling(self):
        stream = SeededStream(61, 0)
        triple = DirectionTriple.orthogonal()
        at_one = average_uncertainty(triple, 2000, 1, stream).delta_av
        at_hundred = average_uncertainty(triple, 2000, 100, stream).delta_av
        assert at_one == pytest.approx(10.0 * at_hundred, rel=1e-12)

    def test_minimum_on_equatorial_slice(self):
        bloch = ensemble_bloch(derive_seed(62, "slice:states"), 4000)
        phis = np.linspace(1e-3, math.pi - 1e-3, 21)
        deltas = [
            float(
                np.mean(
                    delta_batch(
                        bloch, DirectionTriple.from_angles(math.pi / 2, math.pi / 2, phi), 1
                    )
                )
            )
            for phi in phis
        ]
        assert int(np.argmin(deltas)) == 10  # the exact midpoint, phi = pi/2

    def test_negating_free_direction_is_exact_per_state(self):
        # negating the azimuth-carrying direction relabels spin-up/down:
        # each state's uncertainty is unchanged exactly
        bloch = ensemble_bloch(derive_seed(63, "flip:states"), 500)
        theta_m, theta_n, phi = 1.1, 0.7, 0.9
        base = delta_batch(bloch, DirectionTriple.from_angles(theta_m, theta_n, phi), 1)
        flip_m = delta_batch(
            bloch, DirectionTriple.from_angles(math.pi - theta_m, theta_n, phi - math.pi), 1
        )
        assert np.max(np.abs(base - flip_m)) <= 1e-12

    @pytest.mark.parametrize(
        "variant",
        [
            lambda tm, tn, phi: (tm, math.pi - tn, math.pi - phi),
            lambda tm, tn, phi: (math.pi - tm, math.pi - tn, phi),
        ],
        ids=["flip_n_reflect", "flip_both"],
    )
    def test_statistical_symmetries_within_ensemble_error(self, variant):
        # the remaining direction-flip equalities involve a rotation of the
        # whole triple, so they hold for the isotropic ensemble average
        bloch = ensemble_bloch(derive_seed(64, "reflect:states"), 10_000)
        theta_m, theta_n, phi = 1.1, 0.7, 0.9
        base = delta_batch(bloch, DirectionTriple.from_angles(theta_m, theta_n, phi), 1)
        mirrored = delta_batch(bloch, DirectionTriple.from_angles(*variant(theta_m, theta_n, phi)), 1)
        diff = base - mirrored
        se = np.std(diff, ddof=1) / math.sqrt(diff.size)
        assert abs(float(np.mean(diff))) <= 3 * se + 1e-12


class TestBudgetSplit:
    def test_round_robin_remainders(self):
        assert np.array_equal(split_budget(10, 3), [4, 3, 3])
        assert np.array_equal(split_budget(9, 3), [3, 3, 3])
        assert np.array_equal(split_budget(11, 3), [4, 4, 3])

    def test_too_small_budget(self):
        with pytest.raises(ValueError):
            split_budget(2, 3)


class TestEmpiricalAgainstAnalytic:
    def test_rms_matches_propagation(self):
        # fixed mid-entangled states, 1000 simulated runs each
        candidates = sample_states(65, 200)
        chosen = [s for s in candidates if 0.1 < concurrence_sq(s) < 0.9][:5]
        assert len(chosen) == 5
        triple = DirectionTriple.orthogonal()
        pairs = 9000
        for i, state in enumerate(chosen):
            det_true = concurrence_sq(state) / 4.0
            errors = []
            for t in range(1000):
                counts = simulate_local_counts(
                    state, triple, pairs, SeededStream(derive_seed(66, "trials"), i * 1000 + t)
                )
                est = estimate_entanglement_local(counts, triple)
                errors.append(est.values.det_reduced - det_true)
            rms = float(np.sqrt(np.mean(np.square(errors))))
            delta = analytic_uncertainty(state, triple, split_budget(pairs, 3))
            assert abs(rms / delta - 1.0) <= 0.10
