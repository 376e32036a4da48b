import json
import math

import numpy as np
import pytest
from conftest import brute_relu_coeff, brute_threshold_coeff

from paritylab.hypercube import CubePoint, SubsetMask, walsh_hadamard
from paritylab.threshold_fourier import (
    EstimateReport,
    ThresholdFn,
    arccos_coeff,
    discrete_derivative,
    fourier_coeff_threshold,
    gaussian_avg_sq_coeff,
    hemisphere_overlap,
    hemisphere_overlap_mc,
    relu_sum_parity_coeff,
    threshold_spectrum,
)


class TestThresholdFn:
    def test_call_is_indicator(self):
        f = ThresholdFn(w=np.array([1.0, -2.0]), b=0.5)
        assert f(CubePoint.from_vector([1, -1])) == 1.0  # 1 + 2 + 0.5
        assert f(CubePoint.from_vector([-1, 1])) == 0.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ThresholdFn(w=np.array([np.inf]), b=0.0)


class TestFourierCoeffThreshold:
    def test_constant_indicator_zero_coeff(self):
        # w=0, b=1: indicator is identically 1; parity at S={0} has mean 0
        f = ThresholdFn(w=np.zeros(3), b=1.0)
        assert fourier_coeff_threshold(f, SubsetMask(0b001, 3)) == 0.0

    def test_one_dim_half(self):
        f = ThresholdFn(w=np.array([1.0]), b=0.0)
        assert fourier_coeff_threshold(f, SubsetMask(1, 1)) == 0.5

    def test_majority_of_four_frozen(self):
        # exhaustive value at d=4, w=1, b=0, S=all: only #(+1) in {3, 4}
        # activates; parities -1 (x4 points) and +1 -> (-4 + 1)/16
        f = ThresholdFn(w=np.ones(4), b=0.0)
        s = SubsetMask.first_k(4, 4)
        assert fourier_coeff_threshold(f, s) == -3.0 / 16.0

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_brute(self, seed):
        g = np.random.default_rng(seed)
        d = int(g.integers(1, 9))
        w = g.standard_normal(d)
        b = float(g.standard_normal())
        s = SubsetMask(int(g.integers(0, 1 << d)), d)
        got = fourier_coeff_threshold(ThresholdFn(w=w, b=b), s)
        assert got == pytest.approx(brute_threshold_coeff(w, b, s.bits), abs=1e-12)

    def test_scale_invariance_exact(self):
        g = np.random.default_rng(17)
        for _ in range(20):
            d = int(g.integers(1, 10))
            w = g.standard_normal(d)
            b = float(g.standard_normal())
            c = float(g.uniform(0.1, 50.0))
            s = SubsetMask(int(g.integers(0, 1 << d)), d)
            a = fourier_coeff_threshold(ThresholdFn(w=w, b=b), s)
            scaled = fourier_coeff_threshold(ThresholdFn(w=c * w, b=c * b), s)
            assert a == scaled

    def test_bounded_by_one(self):
        g = np.random.default_rng(23)
        for _ in range(30):
            d = int(g.integers(1, 11))
            f = ThresholdFn(w=g.standard_normal(d), b=float(g.standard_normal()))
            s = SubsetMask(int(g.integers(0, 1 << d)), d)
            assert abs(fourier_coeff_threshold(f, s)) <= 1.0

    def test_permutation_equivariance(self):
        g = np.random.default_rng(29)
        for _ in range(20):
            d = int(g.integers(2, 10))
            w = g.standard_normal(d)
            b = float(g.standard_normal())
            perm = g.permutation(d)
            s_idx = [int(i) for i in range(d) if g.random() < 0.5]
            s = SubsetMask.from_indices(s_idx, d)
            s_perm = SubsetMask.from_indices([int(perm[i]) for i in s_idx], d)
            w_perm = np.empty(d)
            w_perm[perm] = w
            a = fourier_coeff_threshold(ThresholdFn(w=w, b=b), s)
            b2 = fourier_coeff_threshold(ThresholdFn(w=w_perm, b=b), s_perm)
            assert a == pytest.approx(b2, abs=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            fourier_coeff_threshold(ThresholdFn(w=np.ones(3), b=0.0), SubsetMask(1, 4))


class TestThresholdSpectrum:
    def test_always_on(self):
        spec = threshold_spectrum(ThresholdFn(w=np.zeros(3), b=1.0))
        assert spec.coeffs[0] == 1.0
        assert np.all(spec.coeffs[1:] == 0.0)

    def test_always_off(self):
        spec = threshold_spectrum(ThresholdFn(w=np.zeros(3), b=-1.0))
        assert np.all(spec.coeffs == 0.0)

    def test_two_dim_corner(self):
        # w=(1,1), b=0: only x=(+1,+1) activates, every parity is +1 there
        spec = threshold_spectrum(ThresholdFn(w=np.array([1.0, 1.0]), b=0.0))
        np.testing.assert_array_equal(spec.coeffs, [0.25, 0.25, 0.25, 0.25])

    def test_consistent_with_single_coeff(self):
        g = np.random.default_rng(31)
        d = 7
        f = ThresholdFn(w=g.standard_normal(d), b=0.3)
        spec = threshold_spectrum(f)
        for bits in (0, 1, 0b1010101, (1 << d) - 1):
            s = SubsetMask(bits, d)
            assert spec.coeff(s) == pytest.approx(
                fourier_coeff_threshold(f, s), abs=1e-12
            )


class TestGaussianAvgSqCoeff:
    def test_small_subset_bound_trivial(self):
        # 6 e^{-1/2} > 1 >= f_S^2, so the bound check cannot fail at |S|=2
        rep = gaussian_avg_sq_coeff(6, SubsetMask.first_k(2, 6), 1.0, False, 50, 0)
        assert rep.bound_value == pytest.approx(6.0 * math.exp(-0.5), rel=1e-12)
        assert rep.bound_value > 1.0
        assert rep.bound_satisfied

    def test_sigma_scale_invariance(self):
        # f_S(w, 0) is invariant to scaling w, and per-sample substreams make
        # the sigma=1 and sigma=7 draws share directions: identical estimates
        s = SubsetMask.first_k(3, 7)
        a = gaussian_avg_sq_coeff(7, s, 1.0, False, 100, 12)
        b = gaussian_avg_sq_coeff(7, s, 7.0, False, 100, 12)
        assert a.estimate == b.estimate
        assert a.std_error == b.std_error

    def test_even_subset_unbiased_is_exactly_zero(self):
        # without bias the indicator is (1 + sign(w.x))/2 with sign odd in x,
        # so nonempty even-size coefficients vanish for almost every w
        rep = gaussian_avg_sq_coeff(8, SubsetMask.first_k(4, 8), 1.0, False, 60, 3)
        assert rep.estimate == 0.0
        assert rep.std_error == 0.0

    def test_odd_subset_unbiased_is_positive(self):
        rep = gaussian_avg_sq_coeff(7, SubsetMask.first_k(3, 7), 1.0, False, 100, 5)
        assert rep.estimate > 0.0

    def test_full_acceptance_point_d16(self):
        rep = gaussian_avg_sq_coeff(16, SubsetMask.first_k(16, 16), 1.0, False, 200, 0)
        assert rep.bound_value == pytest.approx(6.0 * math.exp(-4.0), rel=1e-12)
        assert rep.estimate - 3.0 * rep.std_error <= rep.bound_value
        assert rep.bound_satisfied

    def test_biased_bound_constant(self):
        rep = gaussian_avg_sq_coeff(6, SubsetMask.first_k(3, 6), 1.0, True, 50, 1)
        assert rep.bound_value == pytest.approx(8.0 * math.exp(-0.75), rel=1e-12)
        assert rep.parameters["include_bias"] is True

    def test_report_json_roundtrip(self):
        rep = gaussian_avg_sq_coeff(5, SubsetMask.first_k(3, 5), 2.0, True, 40, 9)
        blob = json.dumps(rep.to_json_dict())
        back = EstimateReport.from_json_dict(json.loads(blob))
        assert back == rep


class TestHemisphereOverlap:
    def test_identical_points(self):
        x = CubePoint(0b10110, 5)
        assert hemisphere_overlap(x, x) == 0.5

    def test_antipodal_points(self):
        x = CubePoint(0b10110, 5)
        y = CubePoint(0b01001, 5)
        assert hemisphere_overlap(x, y) == 0.0

    def test_orthogonal_points(self):
        x = CubePoint(0b1100, 4)
        y = CubePoint(0b1010, 4)
        assert hemisphere_overlap(x, y) == 0.25

    def test_general_formula(self):
        x = CubePoint(0b11111, 5)
        y = CubePoint(0b11110, 5)  # inner product 3
        want = (math.pi - math.acos(3.0 / 5.0)) / (2.0 * math.pi)
        assert hemisphere_overlap(x, y) == pytest.approx(want, rel=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            hemisphere_overlap(CubePoint(0, 3), CubePoint(0, 4))


class TestHemisphereOverlapMc:
    def test_identical_within_4se(self):
        x = CubePoint(0b101, 3)
        rep = hemisphere_overlap_mc(x, x, 4000, 0)
        assert abs(rep.estimate - 0.5) <= 4.0 * rep.std_error
        assert rep.bound_satisfied

    def test_antipodal_exactly_zero(self):
        x = CubePoint(0b111, 3)
        y = CubePoint(0b000, 3)
        rep = hemisphere_overlap_mc(x, y, 2000, 1)
        assert rep.estimate == 0.0
        assert rep.bound_satisfied

    def test_inner_product_two_at_d10(self):
        x = CubePoint((1 << 10) - 1, 10)
        y = CubePoint((1 << 6) - 1, 10)  # agree on 6, disagree on 4: x.y = 2
        rep = hemisphere_overlap_mc(x, y, 20000, 2)
        want = (math.pi - math.acos(0.2)) / (2.0 * math.pi)
        assert rep.bound_value == pytest.approx(want, rel=1e-15)
        assert abs(rep.estimate - want) <= 4.0 * rep.std_error

    @pytest.mark.parametrize("d", [5, 10, 20])
    def test_random_pairs_within_4se(self, d):
        g = np.random.default_rng(d)
        for i in range(5):
            x = CubePoint(int(g.integers(0, 1 << d)), d)
            y = CubePoint(int(g.integers(0, 1 << d)), d)
            rep = hemisphere_overlap_mc(x, y, 8000, 40 + i)
            assert rep.bound_satisfied, (d, x.bits, y.bits, rep.estimate)


class TestArccosCoeff:
    def test_leading_terms(self):
        assert arccos_coeff(1) == 1.0
        assert arccos_coeff(2) == 0.0

    def test_alpha3(self):
        assert arccos_coeff(3) == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_alpha3_matches_numeric_derivative(self):
        # third derivative of pi/2 - arccos at 0 via a 4-point stencil
        h = 1e-2
        f = lambda u: math.pi / 2.0 - math.acos(u)
        d3 = (f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h)) / (2 * h**3)
        assert arccos_coeff(3) == pytest.approx(d3 / 6.0, abs=1e-3)

    def test_alpha5(self):
        assert arccos_coeff(5) == pytest.approx(3.0 / 40.0, abs=1e-15)

    def test_even_terms_vanish(self):
        assert all(arccos_coeff(j) == 0.0 for j in range(2, 101, 2))

    def test_tail_bound(self):
        c = math.sqrt(2.0 / math.pi) * 2.0 * math.e
        for j in range(3, 201):
            assert arccos_coeff(j) < c / j**1.5

    def test_reconstructs_arccos(self):
        for u in (0.5, -0.5):
            total = math.fsum(arccos_coeff(j) * u**j for j in range(1, 120, 2))
            assert math.pi / 2.0 - total == pytest.approx(math.acos(u), abs=1e-6)

    def test_rejects_bad_j(self):
        with pytest.raises(ValueError):
            arccos_coeff(0)
        with pytest.raises(TypeError):
            arccos_coeff(2.0)


class TestReluSumParityCoeff:
    def test_k4_frozen(self):
        assert relu_sum_parity_coeff(4) == pytest.approx(-0.25, abs=1e-14)

    def test_k6_frozen(self):
        assert relu_sum_parity_coeff(6) == pytest.approx(6.0 / 32.0, abs=1e-14)

    @pytest.mark.parametrize("k", [4, 6, 8, 10, 12])
    def test_matches_enumeration(self, k):
        want = brute_relu_coeff([1.0] * k, 0.0, (1 << k) - 1)
        assert relu_sum_parity_coeff(k) == pytest.approx(want, abs=1e-10)

    def test_magnitude_lower_bound(self):
        for k in range(4, 41, 2):
            assert abs(relu_sum_parity_coeff(k)) >= 1.0 / (4.0 * math.sqrt(k))

    def test_rejects_out_of_range(self):
        for bad in (2, 5, 42):
            with pytest.raises(ValueError):
                relu_sum_parity_coeff(bad)
        with pytest.raises(TypeError):
            relu_sum_parity_coeff("4")


class TestDiscreteDerivative:
    def test_parity_containing_i(self):
        d = 5
        from paritylab.backend import K

        s_bits = 0b10110
        table = K.parity_table(s_bits, d)
        got = discrete_derivative(table, 1)
        np.testing.assert_array_equal(got, K.parity_table(s_bits ^ 0b10, d))

    def test_parity_missing_i(self):
        d = 4
        from paritylab.backend import K

        table = K.parity_table(0b1010, d)
        got = discrete_derivative(table, 0)
        np.testing.assert_array_equal(got, np.zeros(1 << d))

    def test_relu_sum_gives_shifted_majority(self):
        # D_i [sum_S x]_+ = (Maj_{S minus i} + 1)/2 pointwise, sign(0) = 0
        d = 5
        from paritylab.backend import K

        w = np.ones(d)
        table = np.maximum(K.dot_table(w), 0.0)
        got = discrete_derivative(table, 2)
        rest = [i for i in range(d) if i != 2]
        want = np.empty(1 << d)
        for bits in range(1 << d):
            ssum = sum(1 if (bits >> i) & 1 else -1 for i in rest)
            want[bits] = (np.sign(ssum) + 1.0) / 2.0
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_coefficient_shift(self):
        # coefficient of D_i g at S minus {i} equals that of g at S
        g = np.random.default_rng(7)
        for _ in range(10):
            d = int(g.integers(2, 10))
            table = g.standard_normal(1 << d)
            i = int(g.integers(0, d))
            s_bits = int(g.integers(0, 1 << d)) | (1 << i)
            spec_g = walsh_hadamard(table)
            spec_d = walsh_hadamard(discrete_derivative(table, i))
            assert spec_d.coeffs[s_bits ^ (1 << i)] == pytest.approx(
                spec_g.coeffs[s_bits], abs=1e-10
            )

    def test_bad_index(self):
        with pytest.raises(ValueError):
            discrete_derivative(np.ones(8), 3)
