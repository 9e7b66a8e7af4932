import math

import numpy as np
import pytest

from qubitmd import Ensemble, dual_socp, helstrom_two, primal_sampler, solve
from qubitmd.bloch import HermitianOperator2
from qubitmd.errors import WrongNError
from qubitmd.oracle import random_povm

from conftest import random_ensemble, random_rotation, rotate_ensemble


class TestDualReformulation:
    def test_domination_matches_eigenvalue_criterion(self, rng):
        """2a >= q + |2k - q v|  must coincide with  K - q rho  being PSD.

        The dual objective relies on this equivalence; here both sides are
        evaluated independently, the right-hand one by explicit 2x2
        eigenvalues.
        """
        for _ in range(500):
            a = rng.uniform(0.0, 1.0)
            k = rng.normal(size=3) * 0.5
            q = rng.uniform(0.05, 1.0)
            v = rng.normal(size=3)
            v /= max(1.0, np.linalg.norm(v))
            K = HermitianOperator2(2.0 * a, k / a if a > 0 else k * 0).matrix()
            rho = HermitianOperator2(1.0, v).matrix() / 1.0
            eigs = np.linalg.eigvalsh(K - q * rho)
            lhs = 2.0 * a - (q + np.linalg.norm(2.0 * k - q * v))
            if abs(lhs) > 1e-9:
                assert (lhs > 0) == (eigs.min() > -1e-12)

    def test_value_lower_bounded_by_weights(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 5))
            ens = random_ensemble(rng, n)
            assert dual_socp(ens).value >= float(ens.weights.max()) - 1e-12


class TestDualSocp:
    def test_single_member(self, rng):
        ens = Ensemble.from_lists([0.7], [[0.3, -0.2, 0.1]])
        point = dual_socp(ens)
        assert point.value == pytest.approx(0.7, abs=1e-9)
        assert np.linalg.norm(point.m - 0.7 * np.array([0.3, -0.2, 0.1])) < 1e-6

    def test_orthogonal_pair(self):
        ens = Ensemble.from_lists([0.5, 0.5], [[0, 0, 1], [0, 0, -1]])
        assert dual_socp(ens).value == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_family_value(self):
        from qubitmd.family import skewed_tetrahedron_ensemble

        point = dual_socp(skewed_tetrahedron_ensemble(0.0))
        assert point.value == pytest.approx(0.25 + 1.0 / (4.0 * math.sqrt(2.0)), abs=1e-7)

    def test_rotation_invariance(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            ens = random_ensemble(rng, n)
            rotated = rotate_ensemble(ens, random_rotation(rng))
            assert abs(dual_socp(ens).value - dual_socp(rotated).value) < 1e-8

    def test_restart_stability_via_relabeling(self, rng):
        # permuting the members changes every internal starting point but
        # must not change the minimum
        for _ in range(20):
            n = int(rng.integers(2, 5))
            ens = random_ensemble(rng, n)
            perm = rng.permutation(n)
            permuted = Ensemble(tuple(ens.members[i] for i in perm))
            assert abs(dual_socp(ens).value - dual_socp(permuted).value) < 2e-9

    def test_gap_estimate_reported(self, rng):
        point = dual_socp(random_ensemble(rng, 4))
        assert point.gap_estimate >= 0.0
        assert point.iterations >= 0


class TestHelstromTwo:
    def test_identical_states(self):
        v = np.array([0.4, 0.0, 0.0])
        assert helstrom_two(Ensemble.from_lists([0.7, 0.3], [v, v])) == pytest.approx(0.7)

    def test_x_z_pure_pair(self):
        ens = Ensemble.from_lists([0.5, 0.5], [[1, 0, 0], [0, 0, 1]])
        assert helstrom_two(ens) == pytest.approx(0.5 + math.sqrt(2.0) / 4.0, abs=1e-12)

    def test_orthogonal(self):
        ens = Ensemble.from_lists([0.5, 0.5], [[0, 0, 1], [0, 0, -1]])
        assert helstrom_two(ens) == pytest.approx(1.0)

    def test_wrong_n(self):
        with pytest.raises(WrongNError):
            helstrom_two(Ensemble.from_lists([1.0], [[0, 0, 0]]))

    def test_matches_dual(self, rng):
        for _ in range(100):
            ens = random_ensemble(rng, 2)
            assert abs(helstrom_two(ens) - dual_socp(ens).value) < 1e-7


class TestPrimalSampler:
    def test_random_povms_are_valid(self, rng):
        from qubitmd import validate_povm

        for _ in range(200):
            n = int(rng.integers(1, 5))
            assert validate_povm(random_povm(rng, n)).ok

    def test_weak_duality(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            ens = random_ensemble(rng, n)
            dual_value = dual_socp(ens).value
            report = primal_sampler(ens, dual_value, trials=200, seed=1)
            assert report.best_value <= dual_value + 1e-9
            assert not report.violation

    def test_deterministic_given_seed(self, rng):
        ens = random_ensemble(rng, 3)
        r1 = primal_sampler(ens, 1.0, trials=100, seed=42)
        r2 = primal_sampler(ens, 1.0, trials=100, seed=42)
        assert r1.best_value == r2.best_value

    def test_no_sample_beats_the_optimum(self, rng):
        for _ in range(10):
            ens = random_ensemble(rng, 4)
            sol = solve(ens)
            report = primal_sampler(ens, sol.p_guess, trials=500, seed=7)
            assert not report.violation
