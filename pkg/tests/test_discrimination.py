import math

import numpy as np
import pytest

from telesim.discrimination import (
    USD_LABELS,
    IndistinguishableStatesError,
    branch_states,
    conclusive_probability,
    conclusive_rate_sigma,
    discriminate,
    discriminate_many,
    overlap_for,
    usd_povm,
)
from telesim.measure import validate_povm
from telesim.qcore import StateVector, ket, random_state
from telesim.rng import SplitMix64


def pair_with_overlap(s):
    t = math.acos(s) / 2
    return StateVector([math.cos(t), math.sin(t)], (2,)), StateVector([math.cos(t), -math.sin(t)], (2,))


class TestUsdPovm:
    def test_orthogonal_limit_is_projective(self):
        setup = usd_povm(ket(1, 0), ket(0, 1))
        assert setup.overlap == 0
        np.testing.assert_allclose(setup.povm.elements[0], np.diag([1, 0]), atol=1e-15)
        np.testing.assert_allclose(setup.povm.elements[1], np.diag([0, 1]), atol=1e-15)
        np.testing.assert_allclose(setup.povm.elements[2], 0, atol=1e-15)

    def test_alpha2_08(self):
        a, b = math.sqrt(0.8), math.sqrt(0.2)
        setup = usd_povm(*branch_states(a, b))
        assert setup.overlap == pytest.approx(0.6, abs=1e-12)
        p = setup.outcome_probabilities(setup.u)
        assert p[0] == pytest.approx(0.4, abs=1e-12)
        assert p[1] == pytest.approx(0.0, abs=1e-12)

    def test_identical_raise(self):
        with pytest.raises(IndistinguishableStatesError):
            usd_povm(ket(0.6, 0.8), ket(0.6, 0.8))
        with pytest.raises(IndistinguishableStatesError):
            usd_povm(ket(0.6, 0.8), ket(0.6j, 0.8j))

    def test_complex_overlap_phase_aligned(self, gen):
        u, v = random_state((2,), gen), random_state((2,), gen)
        setup = usd_povm(u, v)
        assert np.vdot(setup.u.amplitudes, setup.v.amplitudes).imag == pytest.approx(0, abs=1e-12)
        assert max(setup.misidentification()) < 1e-12

    def test_qubits_only(self, gen):
        with pytest.raises(ValueError):
            usd_povm(random_state((3,), gen), random_state((3,), gen))

    def test_random_pairs_validate(self, gen):
        for _ in range(1000):
            u, v = random_state((2,), gen), random_state((2,), gen)
            setup = usd_povm(u, v)
            assert validate_povm(setup.povm).passed
            assert max(map(abs, setup.misidentification())) < 1e-10
            pu = setup.outcome_probabilities(setup.u)
            assert pu[0] == pytest.approx(1 - setup.overlap, abs=1e-10)


class TestConclusiveProbability:
    @pytest.mark.parametrize("alpha2,want", [(0.5, 1.0), (0.6, 0.8), (0.75, 0.5), (0.8, 0.4), (0.9, 0.2), (1.0, 0.0)])
    def test_values(self, alpha2, want):
        assert conclusive_probability(math.sqrt(alpha2), math.sqrt(1 - alpha2)) == pytest.approx(want, abs=1e-12)

    def test_equals_one_minus_overlap(self):
        a, b = math.sqrt(0.7), math.sqrt(0.3)
        assert conclusive_probability(a, b) == pytest.approx(1 - overlap_for(a, b))

    def test_ordering(self):
        with pytest.raises(ValueError):
            conclusive_probability(math.sqrt(0.2), math.sqrt(0.8))
        with pytest.raises(ValueError):
            conclusive_probability(0.9, 0.9)


class TestSampling:
    def test_discriminate_label(self):
        setup = usd_povm(*pair_with_overlap(0.5))
        assert discriminate(setup.u, setup, SplitMix64(1)) in USD_LABELS

    @pytest.mark.parametrize("s", [0.0, 0.3, 0.6, 0.9])
    def test_no_misidentification(self, s):
        n = 100_000
        setup = usd_povm(*pair_with_overlap(s))
        rng = SplitMix64(int(s * 100) + 7)
        ru = discriminate_many(setup.u, setup, n, rng)
        rv = discriminate_many(setup.v, setup, n, rng)
        assert np.count_nonzero(ru == 1) == 0
        assert np.count_nonzero(rv == 0) == 0
        p = 1 - s
        sigma = conclusive_rate_sigma(p, n)
        for hits in (np.count_nonzero(ru == 0), np.count_nonzero(rv == 1)):
            if sigma == 0:
                assert hits == n
            else:
                assert abs(hits / n - p) <= 4 * sigma

    def test_many_matches_single(self):
        setup = usd_povm(*pair_with_overlap(0.4))
        many = discriminate_many(setup.u, setup, 50, SplitMix64(3))
        rng = SplitMix64(3)
        single = [USD_LABELS.index(discriminate(setup.u, setup, rng)) for _ in range(50)]
        assert list(many) == single

    def test_sigma(self):
        assert conclusive_rate_sigma(0.4, 100) == pytest.approx(math.sqrt(0.24 / 100))
        assert conclusive_rate_sigma(1.0, 100) == 0
