import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from eigsketch.bench import SpectrumSpec, generate_matrix
from eigsketch.matrix import ResourceLimitError, SymmetricMatrix, haar_orthogonal, rng_from_seed
from eigsketch.sketch import (
    SpectrumEstimate,
    baseline_gah,
    bias_probe,
    estimate_spectrum,
    negation_conjugate,
    singular_value_concentration,
    sketch_size,
)

from conftest import random_symmetric

# Frozen from scripts/pilot.py (pilot seeds >= 10_000, about 2x the pilot 95% quantile).
C_RANK_ONE = 6.0


def max_error(est, lam):
    return np.max(np.abs(est.values - lam))


class TestEstimateSpectrum:
    def test_zero_matrix(self):
        est = estimate_spectrum(np.zeros((10, 10)), 4, seed=0)
        assert np.array_equal(est.values, np.zeros(10))

    @pytest.mark.parametrize("k", [8, 64, 200])
    def test_doubling_is_exact(self, power_law_64, k):
        A, _ = power_law_64
        a, b = estimate_spectrum(A, k, 3), estimate_spectrum(2 * A, k, 3)
        assert np.array_equal(b.values, 2 * a.values)

    @settings(max_examples=25, deadline=None)
    @given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 2**32 - 1))
    def test_scale_equivariance(self, c, seed):
        A = random_symmetric(12, 0)
        a, b = estimate_spectrum(A, 6, seed), estimate_spectrum(c * A, 6, seed)
        assert np.allclose(b.values, c * a.values, rtol=1e-11, atol=1e-12 * c)

    @pytest.mark.parametrize("k", [5, 16, 40])
    def test_negation_equivariance(self, k):
        A = random_symmetric(16, 4) / 10
        neg = estimate_spectrum(-A, k, 9)
        conj = negation_conjugate(estimate_spectrum(A, k, 9))
        assert np.allclose(neg.values, conj.values, rtol=0, atol=1e-12)

    def test_deterministic(self, power_law_64):
        A, _ = power_law_64
        assert np.array_equal(estimate_spectrum(A, 32, 5).values, estimate_spectrum(A, 32, 5).values)

    def test_structure(self, power_law_64):
        A, _ = power_law_64
        est = estimate_spectrum(A, 10, 1)
        assert est.values.shape == (64,)
        assert np.all(np.diff(est.values) <= 0)
        assert np.count_nonzero(est.values) <= 10
        # the k corrected values sum to zero
        assert abs(est.values.sum()) <= 1e-12
        out = est.outcome
        assert abs(out.trace_S - out.raw_eigs.sum()) <= 1e-8 * max(1.0, np.abs(out.raw_eigs).sum())
        S = out.S.to_dense()
        assert np.array_equal(S, S.T)

    def test_median_error_power_law_d64(self, power_law_64):
        A, lam = power_law_64
        errs = [max_error(estimate_spectrum(A, 256, s), lam) for s in range(50)]
        assert np.median(errs) <= 0.15

    def test_k_larger_than_d_keeps_d_values(self):
        lam = np.array([0.6, 0.2, -0.3, -0.5])
        Q = haar_orthogonal(4, rng_from_seed(3))
        A = (Q * lam) @ Q.T
        est = estimate_spectrum(A, 4000, 2)
        assert est.values.shape == (4,)
        assert np.max(np.abs(est.values - lam)) <= 0.1

    def test_input_validation(self):
        with pytest.raises(ValueError):
            estimate_spectrum(np.eye(3), 0, 0)
        with pytest.raises(ResourceLimitError):
            estimate_spectrum(np.eye(3), 2**16 + 1, 0)
        with pytest.raises(ResourceLimitError):
            estimate_spectrum(np.eye(3), 50, 0, max_k=10)
        with pytest.raises(ValueError):
            estimate_spectrum(np.zeros((0, 0)), 3, 0)

    def test_sparse_input_matches_dense(self, power_law_64):
        A, _ = power_law_64
        sparse = SymmetricMatrix.from_scipy(A.sparse)
        a, b = estimate_spectrum(A, 16, 7), estimate_spectrum(sparse, 16, 7)
        assert np.allclose(a.values, b.values, atol=1e-12)

    def test_orthogonal_invariance_in_distribution(self):
        spec = SpectrumSpec("signed-mix", 32)
        A1, A2 = generate_matrix(spec, 100), generate_matrix(spec, 200)
        lam = spec.spectrum()
        e1 = [max_error(estimate_spectrum(A1, 16, s), lam) for s in range(200)]
        e2 = [max_error(estimate_spectrum(A2, 16, 1000 + s), lam) for s in range(200)]
        assert stats.ks_2samp(e1, e2).pvalue > 0.01


def test_sketch_size():
    assert sketch_size(0.25) == 64
    assert sketch_size(0.5) == 16
    assert sketch_size(0.1, constant=1) == 100
    with pytest.raises(ValueError):
        sketch_size(0)


class TestNegationConjugate:
    def est(self, values):
        return SpectrumEstimate(np.array(values, dtype=float), 1, 0, "corrected")

    def test_example(self):
        assert np.array_equal(negation_conjugate(self.est([3, 1, 0, -2])).values, [2, 0, -1, -3])

    def test_zeros(self):
        assert np.array_equal(negation_conjugate(self.est([0, 0, 0])).values, [0, 0, 0])

    def test_involution(self):
        e = self.est([5, 2, -1])
        assert np.array_equal(negation_conjugate(negation_conjugate(e)).values, e.values)


class TestBaseline:
    def test_zero(self):
        assert np.array_equal(baseline_gah(np.zeros((6, 6)), 3, 0).values, np.zeros(6))

    @pytest.mark.parametrize("k", [4, 32, 100])
    def test_sign_blind_exact(self, power_law_64, k):
        A, _ = power_law_64
        assert np.array_equal(baseline_gah(-A, k, 1).values, baseline_gah(A, k, 1).values)

    def test_nonnegative_sorted_length_d(self, power_law_64):
        A, _ = power_law_64
        for k in (8, 128):
            v = baseline_gah(A, k, 2).values
            assert v.shape == (64,) and np.all(v >= 0) and np.all(np.diff(v) <= 0)

    def test_rank_one_top(self):
        A = generate_matrix(SpectrumSpec("rank-one", 256), 0)
        tops = np.array([baseline_gah(A, 400, s).values[0] for s in range(50)])
        assert np.mean(np.abs(tops - 1) <= 0.2) >= 0.9

    def test_cannot_see_sign(self):
        lam = SpectrumSpec("signed-mix", 64).spectrum()
        A = generate_matrix(SpectrumSpec("signed-mix", 64), 0)
        assert lam[-1] < 0
        assert np.all(baseline_gah(A, 16, 0).values >= 0)


class TestBiasProbe:
    A = SymmetricMatrix.from_dense(np.eye(256) / 16)

    def test_predicted_bias(self):
        assert bias_probe(self.A, 64, 0).predicted_bias == pytest.approx(0.25)

    def test_traceless(self):
        A = np.diag([1.0, -1.0]) / np.sqrt(2)
        assert bias_probe(A, 4, 0).predicted_bias == 0

    def test_raw_top_sits_at_marchenko_pastur_edge(self):
        # S = (1/16) G G^T with G 64 x 256: the eigenvalues of S fill
        # (1/16)(d/k)[(1 - sqrt(k/d))^2, (1 + sqrt(k/d))^2] = [0.0625, 0.5625].
        probes = [bias_probe(self.A, 64, s) for s in range(50)]
        raw = np.median([p.raw_top for p in probes])
        corrected = np.median([p.corrected_top for p in probes])
        assert raw == pytest.approx(0.5625, rel=0.06)
        # the shift removes the 0.25 bias, leaving only the edge spread
        assert corrected == pytest.approx(0.3125, rel=0.1)
        assert raw > 0.17

    def test_stated_pilot_example(self):
        """Bounds as written for this probe; see the acceptance module for why they fail."""
        probes = [bias_probe(self.A, 64, s) for s in range(50)]
        raw = np.median([p.raw_top for p in probes])
        corrected_err = np.median([abs(p.corrected_top - 0.0625) for p in probes])
        assert 0.25 * 0.7 <= raw <= 0.25 * 1.5
        assert corrected_err <= 0.15


class TestSingularValueConcentration:
    e1 = np.zeros((256, 256))
    e1[0, 0] = 1.0

    def test_rank_one_deviation(self):
        rec = singular_value_concentration(self.e1, 400, 1, 50, seed=0)
        assert rec.max_abs_dev <= C_RANK_ONE / np.sqrt(400)

    def test_sign_invariance(self, power_law_64):
        B = power_law_64[0].to_dense()
        a = singular_value_concentration(B, 50, 3, 5, seed=1)
        b = singular_value_concentration(-B, 50, 3, 5, seed=1)
        assert np.array_equal(a.deviations, b.deviations)

    def test_sqrt_k_scaling(self):
        small = singular_value_concentration(self.e1, 400, 1, 50, seed=2)
        large = singular_value_concentration(self.e1, 1600, 1, 50, seed=3)
        ratio = np.median(small.per_trial) / np.median(large.per_trial)
        assert 1.4 <= ratio <= 2.9

    def test_preconditions(self):
        with pytest.raises(ValueError, match="Frobenius"):
            singular_value_concentration(2 * self.e1, 10, 1, 1, 0)
        with pytest.raises(ValueError):
            singular_value_concentration(self.e1, 10, 11, 1, 0)
        with pytest.raises(ValueError):
            singular_value_concentration(np.eye(3) / np.sqrt(3), 10, 4, 1, 0)
