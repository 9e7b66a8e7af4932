import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubitmd import (
    Ensemble,
    PovmElement,
    from_density_matrix,
    success_probability,
    validate_povm,
)
from qubitmd.bloch import HermitianOperator2, WeightedState, clamped_bloch
from qubitmd.errors import (
    InvalidEnsembleError,
    LengthMismatchError,
    NonHermitianError,
    NonPositiveTraceError,
)

from conftest import random_rotation

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])


unit_vectors = st.lists(
    st.floats(-1.0, 1.0, allow_nan=False), min_size=3, max_size=3
).filter(lambda v: 1e-3 < np.linalg.norm(v) <= 1.0)


class TestFromDensityMatrix:
    def test_round_trip(self, rng):
        for _ in range(50):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v) * rng.uniform(1.0, 3.0)
            t = rng.uniform(0.1, 2.0)
            op = HermitianOperator2(t, v)
            t2, v2 = from_density_matrix(op.matrix())
            assert abs(t2 - t) < 1e-12
            rebuilt = HermitianOperator2(t2, v2).matrix()
            assert np.abs(rebuilt - op.matrix()).max() < 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianError):
            from_density_matrix(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_rejects_non_positive_trace(self):
        with pytest.raises(NonPositiveTraceError):
            from_density_matrix(np.array([[0.5, 0.0], [0.0, -0.5]]))


class TestValidation:
    def test_clamped_bloch_pulls_rounding_back(self):
        v = clamped_bloch([1.0 + 5e-10, 0.0, 0.0])
        assert abs(np.linalg.norm(v) - 1.0) < 1e-15

    def test_clamped_bloch_rejects_unphysical(self):
        with pytest.raises(InvalidEnsembleError):
            clamped_bloch([1.1, 0.0, 0.0])

    def test_negative_weight_rejected(self):
        with pytest.raises(InvalidEnsembleError):
            WeightedState(-0.1, Z)

    @pytest.mark.parametrize("count", [0, 5])
    def test_ensemble_size_bounds(self, count):
        with pytest.raises(InvalidEnsembleError):
            Ensemble.from_lists([0.1] * count, [Z] * count)

    def test_validate_povm_accepts_projective_pair(self):
        report = validate_povm([PovmElement(0.5, Z), PovmElement(0.5, -Z)])
        assert report.ok
        assert max(report.residuals.values()) < 1e-15

    def test_validate_povm_flags_incomplete(self):
        report = validate_povm([PovmElement(0.5, Z), PovmElement(0.5, Z)])
        assert not report.ok
        assert report.residuals["completeness"] > 0.9


class TestSuccessProbability:
    def test_orthogonal_pure_states_matched_projectors(self):
        ens = Ensemble.from_lists([0.5, 0.5], [Z, -Z])
        povm = [PovmElement(0.5, Z), PovmElement(0.5, -Z)]
        assert success_probability(ens, povm) == pytest.approx(1.0, abs=1e-15)

    def test_always_guess_first(self, rng):
        ens = Ensemble.from_lists([0.3, 0.7], [rng.normal(size=3) * 0.1] * 2)
        povm = [PovmElement(1.0, np.zeros(3)), PovmElement(0.0, np.zeros(3))]
        assert success_probability(ens, povm) == pytest.approx(0.3, abs=1e-15)

    def test_orthogonal_measurement_axis(self):
        ens = Ensemble.from_lists([0.5, 0.5], [X, -X])
        povm = [PovmElement(0.5, Z), PovmElement(0.5, -Z)]
        assert success_probability(ens, povm) == pytest.approx(0.5, abs=1e-15)

    def test_length_mismatch(self):
        ens = Ensemble.from_lists([1.0], [Z])
        with pytest.raises(LengthMismatchError):
            success_probability(ens, [])

    @settings(max_examples=50, deadline=None)
    @given(v1=unit_vectors, v2=unit_vectors, lam=st.floats(0.1, 10.0))
    def test_linear_in_weights(self, v1, v2, lam):
        povm = [PovmElement(0.5, Z), PovmElement(0.5, -Z)]
        base = success_probability(Ensemble.from_lists([0.4, 0.6], [v1, v2]), povm)
        scaled = success_probability(
            Ensemble.from_lists([0.4 * lam, 0.6 * lam], [v1, v2]), povm
        )
        assert scaled == pytest.approx(lam * base, rel=1e-12, abs=1e-12)

    def test_rotation_invariance(self, rng):
        for _ in range(20):
            v = rng.normal(size=(3, 3))
            v *= rng.uniform(0.1, 1.0, size=3)[:, None] / np.linalg.norm(v, axis=1)[:, None]
            ens = Ensemble.from_lists(rng.dirichlet([1, 1, 1]), v)
            povm = [PovmElement(1 / 3, u / np.linalg.norm(u))
                    for u in rng.normal(size=(3, 3))]
            # recenter so the POVM stays complete
            shift = sum(el.p * el.u for el in povm)
            povm = [PovmElement(el.p, el.u - shift) for el in povm]
            rot = random_rotation(rng)
            rotated_povm = [PovmElement(el.p, rot @ el.u) for el in povm]
            rotated_ens = Ensemble.from_lists(
                ens.weights, [rot @ m.bloch for m in ens.members]
            )
            assert success_probability(rotated_ens, rotated_povm) == pytest.approx(
                success_probability(ens, povm), abs=1e-12
            )

    def test_bounded_by_weight_sum(self, rng):
        from qubitmd.oracle import random_povm

        for _ in range(50):
            n = int(rng.integers(1, 5))
            weights = rng.dirichlet(np.ones(n)) * rng.uniform(0.5, 2.0)
            v = rng.normal(size=(n, 3))
            v *= rng.uniform(0.0, 1.0, size=n)[:, None] / np.linalg.norm(v, axis=1)[:, None]
            ens = Ensemble.from_lists(weights, v)
            value = success_probability(ens, random_povm(rng, n))
            assert -1e-12 <= value <= ens.weight_sum + 1e-12
