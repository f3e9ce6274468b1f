"""Tests for the correlated-rounds strategy with classical communication."""
import math

import numpy as np
import pytest

from entmeter.local_cc import (
    PhaseCosines,
    RoundOneProbs,
    RoundTwoProbs,
    analytic_uncertainty_cc,
    cc_det_estimate,
    cc_det_gradients,
    combined_cosine,
    concurrence_sq_cc,
    delta_cc_batch,
    estimate_entanglement_cc,
    phase_cosines,
    round1_probabilities,
    round2_probabilities,
    simulate_cc_counts,
    true_branch_sign,
)
from entmeter.sampling import SeededStream, derive_seed, sample_amplitudes, sample_states
from entmeter.states import PureState, basis_state, bell_state, concurrence_sq, normalize


def state_from_polar(moduli, phases):
    m = np.asarray(moduli, dtype=float)
    return normalize(m * np.exp(1j * np.asarray(phases, dtype=float)))


FLAT = (0.5, 0.5, 0.5, 0.5)


class TestRoundOne:
    def test_product_state(self):
        assert np.allclose(round1_probabilities(basis_state(0)).p, [1, 0, 0, 0], atol=1e-15)

    def test_bell_state(self):
        assert np.allclose(round1_probabilities(bell_state()).p, [0.5, 0, 0, 0.5], atol=1e-15)

    def test_flat_moduli(self):
        st = state_from_polar(FLAT, (0.3, 1.0, 2.0, 4.0))
        assert np.allclose(round1_probabilities(st).p, 0.25, atol=1e-15)


class TestRoundTwo:
    def test_flat_moduli_opposite_phases(self):
        st = state_from_polar(FLAT, (0.0, 0.0, 0.0, math.pi))
        assert np.allclose(round2_probabilities(st).p, [0.5, 0.0, 0.0, 0.5], atol=1e-15)

    def test_aligned_real_pair(self):
        st = normalize(np.array([1.0, 1.0, 0.0, 0.0]))
        assert round2_probabilities(st).p[0] == pytest.approx(1.0, abs=1e-15)

    def test_cosine_form_oracle(self):
        # the amplitude route must reproduce the explicit cosine expressions
        for state in sample_states(71, 200):
            p = round1_probabilities(state).p
            phi = np.angle(state.amplitudes)
            cos01 = math.cos(phi[0] - phi[1])
            cos23 = math.cos(phi[2] - phi[3])
            expected = np.array(
                [
                    (p[0] + p[1] + 2 * math.sqrt(p[0] * p[1]) * cos01) / 2,
                    (p[0] + p[1] - 2 * math.sqrt(p[0] * p[1]) * cos01) / 2,
                    (1 - p[0] - p[1] + 2 * math.sqrt(p[2] * p[3]) * cos23) / 2,
                    (1 - p[0] - p[1] - 2 * math.sqrt(p[2] * p[3]) * cos23) / 2,
                ]
            )
            assert np.max(np.abs(round2_probabilities(state).p - expected)) <= 1e-12

    def test_marginal_identities(self):
        for state in sample_states(72, 200):
            r1 = round1_probabilities(state).p
            r2 = round2_probabilities(state).p
            assert r2[0] + r2[1] == pytest.approx(r1[0] + r1[1], abs=1e-12)
            assert r2[2] + r2[3] == pytest.approx(1 - r1[0] - r1[1], abs=1e-12)


class TestPhaseCosines:
    def test_inversion_of_flat_state(self):
        st = state_from_polar(FLAT, (0.0, 0.0, 0.0, math.pi))
        cos = phase_cosines(round1_probabilities(st), round2_probabilities(st))
        assert cos.cos01 == pytest.approx(1.0, abs=1e-12)
        assert cos.cos23 == pytest.approx(-1.0, abs=1e-12)

    def test_degenerate_flagged_undefined(self):
        st = basis_state(0)  # P1 = 0 and P2 P3 = 0
        cos = phase_cosines(round1_probabilities(st), round2_probabilities(st))
        assert not cos.defined01
        assert not cos.defined23

    def test_noisy_input_clamped(self):
        r1 = RoundOneProbs(p=np.array([0.4, 0.1, 0.3, 0.2]))
        # P_++ larger than the marginal allows: raw cosine ratio above 1
        r2 = RoundTwoProbs(p=np.array([0.95, 0.0, 0.05, 0.0]))
        cos = phase_cosines(r1, r2)
        assert cos.cos01 == 1.0
        assert cos.clamped01

    def test_exact_inversion_random_states(self):
        for state in sample_states(73, 200):
            phi = np.angle(state.amplitudes)
            cos = phase_cosines(round1_probabilities(state), round2_probabilities(state))
            if cos.defined01:
                assert cos.cos01 == pytest.approx(math.cos(phi[0] - phi[1]), abs=1e-10)
            if cos.defined23:
                assert cos.cos23 == pytest.approx(math.cos(phi[2] - phi[3]), abs=1e-10)


class TestConcurrenceCC:
    def test_flat_state_maximal_branch_irrelevant(self):
        st = state_from_polar(FLAT, (0.0, 0.0, 0.0, math.pi))
        r1 = round1_probabilities(st)
        cos = phase_cosines(r1, round2_probabilities(st))
        assert concurrence_sq_cc(r1, cos, +1) == pytest.approx(1.0, abs=1e-12)
        assert concurrence_sq_cc(r1, cos, -1) == pytest.approx(1.0, abs=1e-12)

    def test_vanishing_cross_term(self):
        st = normalize(np.array([1 / math.sqrt(2), 0.5, 0.5, 0.0]))
        r1 = round1_probabilities(st)
        cos = phase_cosines(r1, round2_probabilities(st))
        # P3 = 0 kills the cross term: C^2 = 4 P1 P2 = 4 * (1/4) * (1/4)
        assert concurrence_sq_cc(r1, cos, +1) == pytest.approx(0.25, abs=1e-12)

    def test_product_state_zero(self):
        st = normalize(np.array([1.0, 1.0, 0.0, 0.0]))
        r1 = round1_probabilities(st)
        cos = phase_cosines(r1, round2_probabilities(st))
        assert concurrence_sq_cc(r1, cos, +1) == 0.0

    def test_chain_exactness_random_states(self):
        for state in sample_states(74, 1000):
            r1 = round1_probabilities(state)
            cos = phase_cosines(r1, round2_probabilities(state))
            c2 = concurrence_sq_cc(r1, cos, true_branch_sign(state))
            assert c2 == pytest.approx(concurrence_sq(state), abs=1e-10)

    def test_wrong_branch_differs_generically(self):
        state = sample_states(75, 1)[0]
        r1 = round1_probabilities(state)
        cos = phase_cosines(r1, round2_probabilities(state))
        s = true_branch_sign(state)
        right = concurrence_sq_cc(r1, cos, s)
        wrong = concurrence_sq_cc(r1, cos, -s)
        assert abs(right - wrong) > 1e-6


class TestBranchAmbiguity:
    def test_conjugate_state_indistinguishable(self):
        state = sample_states(76, 1)[0]
        twin = PureState(state.amplitudes.conj())
        assert np.max(np.abs(round1_probabilities(state).p - round1_probabilities(twin).p)) <= 1e-15
        assert np.max(np.abs(round2_probabilities(state).p - round2_probabilities(twin).p)) <= 1e-15
        overlap = abs(np.vdot(state.amplitudes, twin.amplitudes))
        assert overlap < 0.999  # genuinely different states

    def test_single_pair_phase_flip_also_indistinguishable(self):
        # flipping sin(phi0 - phi1) alone preserves every measured
        # probability but changes C^2: the branch carries real information
        state = sample_states(77, 1)[0]
        m, phi = state.polar()
        flipped = state_from_polar(m, [-phi[0], -phi[1], phi[2], phi[3]])
        assert np.max(np.abs(round1_probabilities(state).p - round1_probabilities(flipped).p)) <= 1e-12
        assert np.max(np.abs(round2_probabilities(state).p - round2_probabilities(flipped).p)) <= 1e-12
        assert abs(concurrence_sq(state) - concurrence_sq(flipped)) > 1e-6


class TestEstimator:
    def test_estimate_from_simulated_counts(self):
        state = sample_states(78, 1)[0]
        counts1, counts2 = simulate_cc_counts(state, 200_000, SeededStream(79, 0))
        est = estimate_entanglement_cc(counts1, counts2)
        chosen = est.values(true_branch_sign(state))
        assert chosen.concurrence_sq == pytest.approx(concurrence_sq(state), abs=0.05)

    def test_budget_split_between_rounds(self):
        state = sample_states(80, 0 + 1)[0]
        counts1, counts2 = simulate_cc_counts(state, 101, SeededStream(80, 0))
        assert counts1.shots == 51
        assert counts2.shots == 50

    def test_minimum_budget(self):
        with pytest.raises(ValueError):
            simulate_cc_counts(bell_state(), 1, SeededStream(81, 0))


class TestGradients:
    def test_finite_difference_oracle(self):
        # checked away from the singular configurations, where the central
        # difference itself is dominated by curvature rather than slope
        step = 1e-7
        checked = 0
        for state in sample_states(82, 2000):
            q = round1_probabilities(state).p.copy()
            phi = np.angle(state.amplitudes)
            if np.min(q) < 2e-2:
                continue
            if min(abs(math.sin(phi[0] - phi[1])), abs(math.sin(phi[2] - phi[3]))) < 5e-2:
                continue
            r = round2_probabilities(state).p.copy()
            s = true_branch_sign(state)
            value, g_q, g_r = cc_det_gradients(q, r, s)
            assert value == pytest.approx(concurrence_sq(state) / 4.0, abs=1e-10)
            fd_q = np.zeros(4)
            fd_r = np.zeros(4)
            for k in range(4):
                qp, qm = q.copy(), q.copy()
                qp[k] += step
                qm[k] -= step
                fd_q[k] = (cc_det_estimate(qp, r, s) - cc_det_estimate(qm, r, s)) / (2 * step)
                rp, rm = r.copy(), r.copy()
                rp[k] += step
                rm[k] -= step
                fd_r[k] = (cc_det_estimate(q, rp, s) - cc_det_estimate(q, rm, s)) / (2 * step)
            scale = max(np.max(np.abs(g_q)), np.max(np.abs(g_r)), 1.0)
            assert np.max(np.abs(fd_q - g_q)) <= 1e-6 * scale
            assert np.max(np.abs(fd_r - g_r)) <= 1e-6 * scale
            checked += 1
            if checked == 1000:
                break
        assert checked == 1000


class TestAnalyticUncertainty:
    def test_exact_inverse_sqrt_scaling(self):
        state = sample_states(83, 1)[0]
        d1 = analytic_uncertainty_cc(state, 100)
        d4 = analytic_uncertainty_cc(state, 400)
        assert d1 == pytest.approx(2.0 * d4, rel=1e-12)

    def test_degenerate_moduli_use_polynomial_gradient(self):
        st = normalize(np.array([1 / math.sqrt(2), 0.5, 0.5, 0.0]))
        delta = analytic_uncertainty_cc(st, 1000)
        assert math.isfinite(delta) and delta > 0.0

    def test_real_amplitudes_have_no_first_order_uncertainty(self):
        # positive real amplitudes sit exactly on the cosine boundary, where
        # the arccos response is infinitely steep at first order
        st = normalize(np.array([0.6, 0.5, 0.4, 0.3]))
        assert analytic_uncertainty_cc(st, 1000) == math.inf

    def test_bell_state_zero(self):
        # polynomial-path gradient is tangent to the simplex at the maximum
        assert analytic_uncertainty_cc(bell_state(), 1000) == pytest.approx(0.0, abs=1e-9)

    def test_covariance_conventions_differ(self):
        state = sample_states(84, 1)[0]
        d_cov = analytic_uncertainty_cc(state, 500, covariance="multinomial")
        d_ind = analytic_uncertainty_cc(state, 500, covariance="independent")
        assert d_cov != pytest.approx(d_ind, rel=1e-6)

    def test_batch_matches_scalar(self):
        amps = sample_amplitudes(85, 100)
        for conv in ("multinomial", "independent"):
            batch = delta_cc_batch(amps, 250, conv)
            for i in range(100):
                scalar = analytic_uncertainty_cc(PureState(amps[i]), 250, conv)
                assert batch[i] == pytest.approx(scalar, rel=1e-10)

    def test_unknown_convention_rejected(self):
        with pytest.raises(ValueError):
            analytic_uncertainty_cc(bell_state(), 10, covariance="bogus")


class TestEmpiricalAgainstAnalytic:
    def test_rms_matches_propagation_for_tame_states(self):
        # states kept well clear of the degenerate configurations, where
        # first-order propagation is accurate at this budget
        chosen = []
        for state in sample_states(86, 3000):
            q = round1_probabilities(state).p
            phi = np.angle(state.amplitudes)
            if (
                0.1 < concurrence_sq(state) < 0.9
                and np.all(q > 0.05)
                and abs(math.cos(phi[0] - phi[1])) < 0.7
                and abs(math.cos(phi[2] - phi[3])) < 0.7
            ):
                chosen.append(state)
            if len(chosen) == 5:
                break
        assert len(chosen) == 5
        pairs = 10_000
        for i, state in enumerate(chosen):
            det_true = concurrence_sq(state) / 4.0
            branch = true_branch_sign(state)
            errors = []
            for t in range(1000):
                c1, c2 = simulate_cc_counts(
                    state, pairs, SeededStream(derive_seed(87, "trials"), i * 1000 + t)
                )
                est = estimate_entanglement_cc(c1, c2)
                errors.append(est.values(branch).det_reduced - det_true)
            rms = float(np.sqrt(np.mean(np.square(errors))))
            delta = analytic_uncertainty_cc(state, (pairs // 2 + pairs % 2, pairs // 2))
            assert abs(rms / delta - 1.0) <= 0.10


class TestCombinedCosine:
    def test_matches_true_phase_combination(self):
        for state in sample_states(88, 200):
            phi = np.angle(state.amplitudes)
            cos = phase_cosines(round1_probabilities(state), round2_probabilities(state))
            if not (cos.defined01 and cos.defined23):
                continue
            expected = math.cos(phi[0] - phi[1] + phi[3] - phi[2])
            got = combined_cosine(cos, true_branch_sign(state))
            assert got == pytest.approx(expected, abs=1e-9)

    def test_branch_flips_sine_product(self):
        cos = PhaseCosines(cos01=0.6, cos23=0.3)
        plus = combined_cosine(cos, +1)
        minus = combined_cosine(cos, -1)
        assert plus + minus == pytest.approx(2 * 0.6 * 0.3, abs=1e-12)
