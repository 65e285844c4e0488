import math

import numpy as np
import pytest

from telesim.ensembles import (
    RhoEnsemble,
    b92_demo,
    b92_state,
    ensemble_density,
    epr_basis_choice_demo,
    generate_at_distance,
)
from telesim.measure import outcome_distribution, random_povm, telepovm_elements, z_basis
from telesim.qcore import DensityMatrix, StateVector, equal_up_to_global_phase, ket, random_state, singlet, tensor


class TestRhoEnsemble:
    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            RhoEnsemble(((0.5, ket(1, 0)), (0.4, ket(0, 1))))
        with pytest.raises(ValueError):
            RhoEnsemble(((1.5, ket(1, 0)), (-0.5, ket(0, 1))))

    def test_density(self):
        e = RhoEnsemble(((0.5, ket(1, 0)), (0.5, ket(0, 1))))
        np.testing.assert_allclose(ensemble_density(e).matrix, np.eye(2) / 2)

    def test_residual_needs_target(self):
        with pytest.raises(ValueError):
            RhoEnsemble(((1.0, ket(1, 0)),)).residual()


class TestSingletTelepovm:
    @pytest.mark.parametrize("theta", [0.2, 0.7, 1.1, 2.5, 4.0])
    def test_members(self, theta):
        c, s = math.cos(theta), math.sin(theta)
        ens = generate_at_distance(singlet(), telepovm_elements(theta))
        want = [(s, -c), (s, c), (c, -s), (c, s)]
        assert ens.probabilities == pytest.approx([0.25] * 4, abs=1e-12)
        for state, w in zip(ens.states, want):
            assert equal_up_to_global_phase(state, ket(*w), tol=1e-10)
        assert ens.residual() < 1e-12
        np.testing.assert_allclose(ens.target.matrix, np.eye(2) / 2, atol=1e-15)

    def test_labels_follow_povm(self):
        ens = generate_at_distance(singlet(), telepovm_elements(0.3))
        assert ens.labels == ("A1", "A2", "A3", "A4")


class TestEprDemo:
    def test_z_anticorrelated(self):
        ens = epr_basis_choice_demo("z")
        assert ens.probabilities == pytest.approx([0.5, 0.5])
        np.testing.assert_allclose(np.abs(ens.states[0].amplitudes), [0, 1], atol=1e-12)
        np.testing.assert_allclose(np.abs(ens.states[1].amplitudes), [1, 0], atol=1e-12)

    def test_x_anticorrelated(self):
        ens = epr_basis_choice_demo("x")
        r = 1 / math.sqrt(2)
        assert equal_up_to_global_phase(ens.states[0], ket(r, -r))
        assert equal_up_to_global_phase(ens.states[1], ket(r, r))

    def test_same_density(self):
        z, x = epr_basis_choice_demo("z"), epr_basis_choice_demo("x")
        np.testing.assert_allclose(ensemble_density(z).matrix, ensemble_density(x).matrix, atol=1e-12)
        np.testing.assert_allclose(ensemble_density(z).matrix, np.eye(2) / 2, atol=1e-12)

    def test_bad_basis(self):
        with pytest.raises(ValueError):
            epr_basis_choice_demo("y")


class TestB92:
    def test_product_limit(self):
        ens = b92_demo(1.0, 0.0)
        r = 1 / math.sqrt(2)
        for st in ens.states:
            np.testing.assert_allclose(st.amplitudes, [r, r], atol=1e-12)

    def test_maximal_gives_basis_states(self):
        r = 1 / math.sqrt(2)
        ens = b92_demo(r, r)
        np.testing.assert_allclose(np.abs(ens.states[0].amplitudes), [1, 0], atol=1e-12)
        np.testing.assert_allclose(np.abs(ens.states[1].amplitudes), [0, 1], atol=1e-12)

    def test_overlap_alpha2_08(self):
        a, b = math.sqrt(0.8), math.sqrt(0.2)
        ens = b92_demo(a, b)
        u, v = ens.states
        assert abs(np.vdot(u.amplitudes, v.amplitudes)) == pytest.approx(0.6, abs=1e-12)
        assert ens.probabilities == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_members_are_alpha_plus_minus_beta(self, gen):
        for _ in range(100):
            t = gen.uniform(0, math.pi / 2)
            a, b = math.cos(t), math.sin(t)
            ens = b92_demo(a, b)
            r = 1 / math.sqrt(2)
            assert equal_up_to_global_phase(ens.states[0], ket((a + b) * r, (a - b) * r), tol=1e-10)
            assert equal_up_to_global_phase(ens.states[1], ket((a - b) * r, (a + b) * r), tol=1e-10)
            assert ens.residual() < 1e-10

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            b92_state(0.9, 0.9)


class TestGenerateAtDistance:
    def test_random_pairs(self, gen):
        for _ in range(1000):
            psi = random_state((2, 2), gen, ("A", "B"))
            povm = random_povm(int(gen.integers(2, 7)), 2, gen)
            ens = generate_at_distance(psi, povm)
            assert ens.residual() < 1e-10

    def test_probabilities_match_born(self, gen):
        for _ in range(50):
            psi = random_state((2, 2), gen, ("A", "B"))
            povm = random_povm(4, 2, gen)
            ens = generate_at_distance(psi, povm)
            np.testing.assert_allclose(ens.probabilities, outcome_distribution(psi, povm, "A"), atol=1e-12)

    def test_rank_one_elements_give_pure_members(self, gen):
        psi = random_state((2, 2), gen, ("A", "B"))
        ens = generate_at_distance(psi, telepovm_elements(0.8))
        assert all(isinstance(s, StateVector) for s in ens.states)

    def test_mixed_member(self, gen):
        psi = random_state((2, 2), gen, ("A", "B"))
        ens = generate_at_distance(psi, random_povm(2, 2, gen, rank=2))
        assert any(isinstance(s, DensityMatrix) for s in ens.states)
        assert ens.residual() < 1e-10

    def test_impossible_outcome_kept(self):
        psi = tensor(ket(1, 0, label="A"), ket(0.6, 0.8, label="B"))
        ens = generate_at_distance(psi, z_basis().as_povm())
        assert ens.members[1] == (0.0, None)
        assert ens.probabilities == pytest.approx([1.0, 0.0])

    def test_bob_side_measurement(self, gen):
        psi = random_state((2, 2), gen, ("A", "B"))
        ens = generate_at_distance(psi, telepovm_elements(0.3), alice="B")
        assert ens.residual() < 1e-10
        assert ens.states[0].labels == ("A",)

    def test_bad_inputs(self, gen):
        with pytest.raises(ValueError):
            generate_at_distance(random_state((2, 2, 2), gen), telepovm_elements(0.1))
        with pytest.raises(KeyError):
            generate_at_distance(singlet(), telepovm_elements(0.1), alice="Q")
        with pytest.raises(ValueError):
            generate_at_distance(random_state((3, 2), gen, ("A", "B")), telepovm_elements(0.1))
