"""
Unit tests for the analytic coverage evaluator.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import integrate
from scipy.special import factorial

from tilt_coverage.analytic import (
    alternating_binomial_sum,
    coverage_probability,
    eta,
    gain_ratio,
    height_quadrature_rule,
    inner_expectation_F,
    pgfl_exponent,
)
from tilt_coverage.exceptions import DomainError, NumericalError
from tilt_coverage.geometry import db_to_linear, height_mean, height_sample
from tilt_coverage.models import HeightModel, NetworkConfig, PathLossModel, QuadratureSpec

# loose enough to keep the suite quick, tight enough for the property checks
FAST_QUAD = QuadratureSpec(rel_tol=1e-5, abs_tol=1e-8, height_nodes=24, panel_order=10)


class TestEta:
    """Test cases for eta."""

    @pytest.mark.parametrize("order", [1, 2, 5, 8, 20])
    def test_closed_form(self, order):
        assert eta(order) == pytest.approx(order * factorial(order) ** (-1.0 / order), rel=1e-12)

    def test_first_order_is_one(self):
        assert eta(1) == pytest.approx(1.0)

    @pytest.mark.parametrize("order", [0, -1, 2.5])
    def test_invalid_order(self, order):
        with pytest.raises(DomainError):
            eta(order)

    def test_large_order_is_finite(self):
        assert math.isfinite(eta(500))


class TestAlternatingBinomialSum:
    """Test cases for alternating_binomial_sum."""

    @pytest.mark.parametrize("order", range(1, 9))
    @pytest.mark.parametrize("s", [0.01, 0.1, 1.0, 10.0])
    def test_identity(self, order, s):
        """Test sum (-1)^(n+1) C(N, n) exp(-n s) = 1 - (1 - exp(-s))^N."""
        values = [math.exp(-n * s) for n in range(1, order + 1)]
        total, terms = alternating_binomial_sum(values, order)
        expected = 1.0 - (-math.expm1(-s)) ** order
        assert abs(total - expected) <= 1e-12
        assert len(terms) == order

    def test_signs_alternate(self):
        _, terms = alternating_binomial_sum([1.0] * 4, 4)
        assert terms == [4.0, -6.0, 4.0, -1.0]

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            alternating_binomial_sum([1.0, 1.0], 3)


class TestHeightQuadratureRule:
    """Test cases for the merged height rule."""

    def test_weights_sum_to_one(self):
        for a in (0.0, 0.3, 1.0):
            _, weights = height_quadrature_rule(HeightModel(a=a), 32)
            assert weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_atom_only_leaves_single_node(self):
        nodes, weights = height_quadrature_rule(HeightModel(a=0.0), 64)
        np.testing.assert_array_equal(nodes, [30.5])
        np.testing.assert_array_equal(weights, [1.0])

    def test_linear_only_drops_atom(self):
        nodes, _ = height_quadrature_rule(HeightModel(a=1.0), 16)
        assert nodes.size == 16

    def test_rule_reproduces_mean(self):
        model = HeightModel(a=0.4)
        nodes, weights = height_quadrature_rule(model, 16)
        assert float(np.dot(nodes, weights)) == pytest.approx(height_mean(model), rel=1e-12)


class TestGainRatio:
    """Test cases for gain_ratio."""

    def test_same_geometry_gives_one(self):
        cfg = NetworkConfig()
        assert gain_ratio(cfg, 20.0, 150.0, 20.0, 150.0) == pytest.approx(1.0)

    def test_disabled_pattern_gives_one(self):
        cfg = NetworkConfig().with_pattern_disabled()
        assert gain_ratio(cfg, 10.0, 5000.0, 30.5, 40.0) == 1.0

    def test_ratio_bounded_by_side_lobe_level(self):
        cfg = NetworkConfig()
        ratio = gain_ratio(cfg, 10.0, np.linspace(1.0, 1e4, 200), 30.5, 120.0)
        assert np.all(ratio <= 1.0 / cfg.pattern.gain_floor + 1e-9)
        assert np.all(ratio >= cfg.pattern.gain_floor - 1e-12)


class TestInnerExpectation:
    """Test cases for inner_expectation_F."""

    def test_equidistant_interferer(self):
        """Test that an interferer mirroring the serving link gives exp(-eta tau n)."""
        cfg = NetworkConfig(height_model=HeightModel(a=0.0)).with_pattern_disabled()
        tau = db_to_linear(4.0)
        value = inner_expectation_F(cfg, 30.5, 300.0, 300.0, 2, tau)
        assert value == pytest.approx(math.exp(-eta(5) * tau * 2), rel=1e-9)

    def test_value_is_a_probability(self):
        cfg = NetworkConfig()
        for r in (10.0, 500.0, 1e5):
            value = inner_expectation_F(cfg, 10.0, r, 200.0, 3, 2.5)
            assert 0.0 <= value <= 1.0

    def test_matches_sampled_heights(self):
        """Test the quadrature over heights against a plain average over drawn heights."""
        cfg = NetworkConfig(h0=10.0)
        x, r, n = 300.0, 600.0, 2
        tau = db_to_linear(4.0)
        rng = np.random.default_rng(17)
        means = []
        for _ in range(10):
            h = height_sample(cfg.height_model, rng, 1_000_000)
            distance = ((r * r + h * h) / (x * x + cfg.h0 ** 2)) ** (-0.5 * cfg.path_loss.exponent_v)
            ratio = gain_ratio(cfg, h, r, cfg.h0, x) * distance
            means.append(np.exp(-n * eta(cfg.approx_order) * tau * ratio).mean())
        assert inner_expectation_F(cfg, cfg.h0, r, x, n, tau) == pytest.approx(np.mean(means), abs=1e-4)

    def test_far_interferer_is_harmless(self):
        cfg = NetworkConfig()
        assert inner_expectation_F(cfg, 30.5, 1e7, 100.0, 1, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_invalid_arguments(self):
        cfg = NetworkConfig()
        with pytest.raises(DomainError):
            inner_expectation_F(cfg, 30.5, 100.0, 0.0, 1, 1.0)
        with pytest.raises(DomainError):
            inner_expectation_F(cfg, 30.5, 100.0, 50.0, 6, 1.0)
        with pytest.raises(DomainError):
            inner_expectation_F(cfg, 30.5, -1.0, 50.0, 1, 1.0)


class TestPgflExponent:
    """Test cases for pgfl_exponent."""

    def test_matches_scipy_quad_for_atom_and_omni_pattern(self):
        """Test the radial integral against scipy quad with a = 0, no pattern and v = 4."""
        cfg = NetworkConfig(lambda_bs=1e-5, path_loss=PathLossModel(exponent_v=4.0),
                            height_model=HeightModel(a=0.0), h0=30.5).with_pattern_disabled()
        x, n = 100.0, 2
        tau = db_to_linear(4.0)
        k = eta(cfg.approx_order) * tau * n
        d0_sq = x * x + 30.5 ** 2

        def kernel(r):
            ratio = ((r * r + 30.5 ** 2) / d0_sq) ** -2.0
            return r * -math.expm1(-k * ratio)

        reference, _ = integrate.quad(kernel, cfg.resolved_exclusion_radius, np.inf,
                                      epsabs=1e-13, epsrel=1e-11, limit=500)
        reference *= 2.0 * math.pi * cfg.lambda_bs

        quad = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-12)
        assert pgfl_exponent(cfg, x, n, tau, quad) == pytest.approx(reference, rel=1e-6)

    def test_increasing_in_n(self):
        cfg = NetworkConfig(lambda_bs=5e-5)
        values = [pgfl_exponent(cfg, 80.0, n, 2.0, FAST_QUAD) for n in range(1, 6)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_invalid_n(self):
        with pytest.raises(DomainError):
            pgfl_exponent(NetworkConfig(), 100.0, 0, 1.0)


class TestCoverageProbability:
    """Test cases for coverage_probability."""

    def setup_method(self):
        self.cfg = NetworkConfig(lambda_bs=5e-5, h0=10.0)

    def test_result_is_a_probability(self):
        result = coverage_probability(self.cfg, FAST_QUAD)
        assert 0.0 <= result.p_cov <= 1.0
        assert len(result.terms) == self.cfg.approx_order
        assert result.err_estimate > 0.0
        assert result.evals > 0
        assert result.unclamped == pytest.approx(sum(result.terms))

    @pytest.mark.parametrize("lambda_bs", [1e-6, 5e-5])
    def test_threshold_limits(self, lambda_bs):
        """Test coverage tends to 1 at -60 dB and to 0 at +60 dB."""
        cfg = NetworkConfig(lambda_bs=lambda_bs)
        assert coverage_probability(cfg.with_threshold(-60.0), FAST_QUAD).p_cov >= 0.999
        assert coverage_probability(cfg.with_threshold(60.0), FAST_QUAD).p_cov <= 0.001

    def test_approximation_order_converges(self):
        """Test that raising the order from 1 to 5 moves coverage by ever smaller steps."""
        values = [coverage_probability(replace(self.cfg, approx_order=n), FAST_QUAD).p_cov
                  for n in range(1, 6)]
        steps = [abs(b - a) for a, b in zip(values, values[1:])]
        assert all(later < earlier for earlier, later in zip(steps, steps[1:]))
        assert steps[-1] < 0.01

    def test_decreasing_in_threshold(self):
        values = [coverage_probability(self.cfg.with_threshold(t), FAST_QUAD).p_cov
                  for t in (-5.0, 0.0, 5.0, 10.0)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_path_loss_scale_cancels(self):
        """Test that the path-loss scale C leaves coverage unchanged."""
        scaled = NetworkConfig(lambda_bs=5e-5, h0=10.0, path_loss=PathLossModel(scale_c=1e3))
        base = coverage_probability(self.cfg, FAST_QUAD).p_cov
        assert abs(coverage_probability(scaled, FAST_QUAD).p_cov - base) <= 1e-12

    def test_disabled_pattern_ignores_tilt(self):
        omni = self.cfg.with_pattern_disabled()
        low = coverage_probability(omni.with_tilt(0.0), FAST_QUAD).p_cov
        high = coverage_probability(omni.with_tilt(60.0), FAST_QUAD).p_cov
        assert low == high

    def test_tilt_changes_coverage(self):
        low = coverage_probability(self.cfg.with_tilt(2.0), FAST_QUAD).p_cov
        high = coverage_probability(self.cfg.with_tilt(60.0), FAST_QUAD).p_cov
        assert low != pytest.approx(high, abs=1e-3)

    def test_tolerance_refinement_converges(self):
        """Test that tightening the tolerances moves the value by less than the loose estimate."""
        loose = coverage_probability(self.cfg, FAST_QUAD)
        tight = coverage_probability(self.cfg, QuadratureSpec(rel_tol=1e-8, abs_tol=1e-11))
        assert abs(loose.p_cov - tight.p_cov) <= max(loose.err_estimate, 1e-3)

    def test_budget_exhaustion_is_tagged(self):
        """Test that a starved quadrature raises NumericalError naming the operating point."""
        starved = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_panels=4)
        with pytest.raises(NumericalError) as exc_info:
            coverage_probability(self.cfg, starved)
        assert exc_info.value.details["beta_deg"] == self.cfg.pattern.tilt_deg
        assert exc_info.value.details["sir_threshold_db"] == self.cfg.sir_threshold_db

    def test_small_exclusion_radius(self):
        cfg = NetworkConfig(lambda_bs=5e-5, exclusion_radius=1.0)
        result = coverage_probability(cfg, FAST_QUAD)
        assert 0.0 <= result.p_cov <= 1.0
        assert result.p_cov < coverage_probability(NetworkConfig(lambda_bs=5e-5), FAST_QUAD).p_cov
