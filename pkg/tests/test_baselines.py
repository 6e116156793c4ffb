"""Tests for baselines.py — Full-PCE regression and MC/LHS reference statistics."""

from unittest.mock import patch

import numpy as np
import pytest

from baselines import (
    legendre_design,
    pce_evaluate,
    pce_fit,
    pce_statistics,
    reference_statistics,
    total_degree_indices,
)
from exceptions import NumericalError
from sampling import SampleSet, UncertainInput, UncertainParameter
from tests.conftest import unit_inputs


def _symmetric_inputs(m: int) -> UncertainInput:
    return UncertainInput(tuple(
        UncertainParameter(name=f"xi{i + 1}", lower=-1.0, upper=1.0) for i in range(m)
    ))


def _field(values, n_nodes=2, n_times=3):
    return lambda eta: np.full((n_nodes, n_times), values(eta))


# ---------------------------------------------------------------------------
# TestLegendreBasis
# ---------------------------------------------------------------------------

class TestLegendreBasis:
    """Tests for the total-degree multi-index set and design matrix."""

    @pytest.mark.parametrize("m, order, size", [(1, 6, 7), (2, 3, 10), (3, 13, 560)])
    def test_basis_size(self, m, order, size):
        """Should hold (p + m)! / (p! m!) terms."""
        assert total_degree_indices(m, order).shape == (size, m)

    def test_ordering(self):
        """Constant first, then linear terms in dimension order."""
        indices = total_degree_indices(2, 2)
        assert indices[0].tolist() == [0, 0]
        assert indices[1].tolist() == [1, 0]
        assert indices[2].tolist() == [0, 1]
        assert np.all(np.diff(indices.sum(axis=1)) >= 0)

    def test_rejects_negative_order(self):
        """Should refuse a negative order."""
        with pytest.raises(ValueError, match="order >= 0"):
            total_degree_indices(2, -1)

    def test_empirical_orthogonality(self):
        """Gram matrix over 10^5 uniform points should be nearly diagonal."""
        indices = total_degree_indices(2, 3)
        zeta = np.random.default_rng(5).uniform(-1.0, 1.0, size=(100_000, 2))
        design = legendre_design(indices, zeta)
        gram = design.T @ design / zeta.shape[0]
        off_diagonal = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off_diagonal)) <= 0.02
        expected_norms = np.prod(1.0 / (2.0 * indices + 1.0), axis=1)
        np.testing.assert_allclose(np.diag(gram), expected_norms, atol=0.02)


# ---------------------------------------------------------------------------
# TestPceFit
# ---------------------------------------------------------------------------

class TestPceFit:
    """Tests for pce_fit() and pce_statistics()."""

    def test_linear_model(self):
        """u = xi_1 should put 1 on P_1 and nothing elsewhere."""
        expansion = pce_fit(_field(lambda eta: eta[0]), _symmetric_inputs(1), 3, 2, seed=1)
        coefficients = expansion.coefficients[:, 0, 0]
        assert coefficients[1] == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(np.delete(coefficients, 1))) <= 1e-10
        stats = pce_statistics(expansion)
        np.testing.assert_allclose(stats.mean, 0.0, atol=1e-10)
        np.testing.assert_allclose(stats.std, 1.0 / np.sqrt(3.0), atol=1e-10)

    def test_constant_model(self):
        """A constant should land on P_0 only with zero spread."""
        expansion = pce_fit(_field(lambda eta: 4.0), _symmetric_inputs(2), 2, 2, seed=3)
        np.testing.assert_allclose(expansion.coefficients[0], 4.0, atol=1e-10)
        np.testing.assert_allclose(expansion.coefficients[1:], 0.0, atol=1e-10)
        np.testing.assert_allclose(pce_statistics(expansion).std, 0.0, atol=1e-8)

    def test_quadratic_model(self):
        """xi^2 = 1/3 + 2/3 P_2(xi); std is sqrt(4/45)."""
        expansion = pce_fit(_field(lambda eta: eta[0] ** 2), _symmetric_inputs(1), 2, 2, seed=2)
        coefficients = expansion.coefficients[:, 1, 2]
        np.testing.assert_allclose(coefficients, [1.0 / 3.0, 0.0, 2.0 / 3.0], atol=1e-10)
        stats = pce_statistics(expansion)
        np.testing.assert_allclose(stats.mean, 1.0 / 3.0, atol=1e-10)
        np.testing.assert_allclose(stats.std, 0.29814, atol=1e-5)

    def test_recovers_polynomial_at_random_points(self, rng):
        """A degree-3 model should be reproduced at 100 points."""
        inputs = UncertainInput((
            UncertainParameter(name="a", lower=0.0, upper=2.0),
            UncertainParameter(name="b", lower=-3.0, upper=1.0),
        ))

        def model(eta):
            value = eta[0] * eta[1] ** 2 - 2.0 * eta[0] + 0.5
            return np.array([[value, 2.0 * value]])

        expansion = pce_fit(model, inputs, 3, 2, seed=4, threads=2)
        unit = rng.random((100, 2))
        physical = np.column_stack([2.0 * unit[:, 0], -3.0 + 4.0 * unit[:, 1]])
        expected = np.array([model(eta) for eta in physical])
        np.testing.assert_allclose(pce_evaluate(expansion, unit), expected, atol=1e-10)
        np.testing.assert_allclose(
            pce_evaluate(expansion, unit, probe=(0, 1)), expected[:, 0, 1], atol=1e-10
        )

    def test_sample_count(self):
        """Should run n_p * M_pce model evaluations."""
        calls = []

        def model(eta):
            calls.append(eta)
            return np.zeros((1, 1)) + eta.sum()

        expansion = pce_fit(model, _symmetric_inputs(2), 2, 3, seed=0)
        assert expansion.n_samples == len(calls) == 18

    @patch("baselines.lhs_sample")
    def test_rank_deficient_design(self, mock_lhs):
        """Repeated regression points should raise NumericalError."""
        points = np.full((6, 1), 0.25)
        mock_lhs.return_value = SampleSet(
            unit_points=points, physical_points=points, seed=0, scheme="lhs"
        )
        with pytest.raises(NumericalError, match="oversampling"):
            pce_fit(_field(lambda eta: eta[0]), unit_inputs(1), 2, 2, seed=0)

    def test_rejects_bad_arguments(self):
        """Should refuse oversampling below one."""
        with pytest.raises(ValueError, match="oversampling >= 1"):
            pce_fit(_field(lambda eta: eta[0]), unit_inputs(1), 2, 0, seed=0)


# ---------------------------------------------------------------------------
# TestReferenceStatistics
# ---------------------------------------------------------------------------

class TestReferenceStatistics:
    """Tests for reference_statistics()."""

    def test_constant_has_zero_std(self):
        """A constant model should have exactly zero spread."""
        result = reference_statistics(_field(lambda eta: 7.0), unit_inputs(2), 2500, "mc", 1)
        np.testing.assert_allclose(result.mean, 7.0)
        assert np.all(result.std == 0.0)

    def test_uniform_moments(self):
        """u = xi_1 on [0, 1] should give mean 0.5 and std 0.2887 within 0.003."""
        result = reference_statistics(
            _field(lambda eta: eta[0]), unit_inputs(1), 100_000, "mc", seed=11
        )
        np.testing.assert_allclose(result.mean, 0.5, atol=0.003)
        np.testing.assert_allclose(result.std, 1.0 / np.sqrt(12.0), atol=0.003)

    def test_population_denominator(self):
        """Should match numpy's ddof = 0 std over the same draws."""
        model = _field(lambda eta: np.sin(3.0 * eta[0]) + eta[1])
        result = reference_statistics(model, unit_inputs(2), 2345, "lhs", seed=8, probes=((1, 2),))
        values = result.probe_values[:, 0]
        assert result.mean[1, 2] == pytest.approx(values.mean(), abs=1e-12)
        assert result.std[1, 2] == pytest.approx(values.std(ddof=0), abs=1e-12)

    def test_identical_seeds(self):
        """Same seed should give identical statistics."""
        model = _field(lambda eta: eta[0] * eta[1])
        first = reference_statistics(model, unit_inputs(2), 3000, "lhs", seed=5)
        second = reference_statistics(model, unit_inputs(2), 3000, "lhs", seed=5)
        np.testing.assert_array_equal(first.mean, second.mean)
        np.testing.assert_array_equal(first.std, second.std)

    def test_thread_count_invariance(self):
        """Chunks merge in order, so threads must not change the bits."""
        model = _field(lambda eta: np.exp(eta[0]) - eta[1] ** 2)
        single = reference_statistics(model, unit_inputs(2), 4321, "mc", seed=2, threads=1)
        pooled = reference_statistics(model, unit_inputs(2), 4321, "mc", seed=2, threads=4)
        np.testing.assert_array_equal(single.mean, pooled.mean)
        np.testing.assert_array_equal(single.std, pooled.std)

    def test_probe_values_follow_sample_order(self):
        """Row i of probe_values should come from sample i."""
        result = reference_statistics(
            _field(lambda eta: eta[0]), unit_inputs(1), 1500, "mc", seed=3, probes=((0, 0),)
        )
        assert result.probe_values.shape == (1500, 1)
        assert result.n_samples == 1500
        assert result.scheme == "mc"

    def test_rejects_single_sample(self):
        """Should refuse n < 2."""
        with pytest.raises(ValueError, match="n >= 2"):
            reference_statistics(_field(lambda eta: eta[0]), unit_inputs(1), 1, "mc", 0)

    def test_rejects_unknown_scheme(self):
        """Should list the supported schemes."""
        with pytest.raises(ValueError, match="Unknown sampling scheme"):
            reference_statistics(_field(lambda eta: eta[0]), unit_inputs(1), 10, "sobol", 0)
