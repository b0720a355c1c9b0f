import math

import numpy as np
import pytest

from errors import DomainError, InvalidInputError
from lanczos import QuadratureRule, lanczos
from operators import DenseOperator, DiagonalOperator, SpectralOperator
from quadrature import (AffineMap, ScalarFunction, SpectralMeasure, exact_rs_integral, get_function,
                        measure_cdf, measure_from_vector, measure_grid, monomial, pushforward_measure,
                        pushforward_rule, quadrature_error, quadrature_eval)


def unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


class TestMeasureFromVector:
    def test_basis_vector_puts_all_mass_on_one_point(self):
        mu = measure_from_vector(DiagonalOperator([2.0, 1.0, 3.0]), np.array([1.0, 0.0, 0.0]))
        np.testing.assert_array_equal(mu.points, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(mu.masses, [0.0, 1.0, 0.0])

    def test_uniform_vector_on_diagonal(self):
        mu = measure_from_vector(DiagonalOperator([1.0, 2.0, 3.0, 4.0]), np.full(4, 0.5))
        np.testing.assert_allclose(mu.masses, np.full(4, 0.25))

    def test_spectral_form_matches_dense(self, rng):
        lam = rng.uniform(0.1, 1.0, size=15)
        v = unit(rng, 15)
        implicit = measure_from_vector(SpectralOperator(lam), v)
        dense = measure_from_vector(DenseOperator(SpectralOperator(lam).to_dense()), v)
        np.testing.assert_allclose(implicit.points, dense.points, atol=1e-13)
        np.testing.assert_allclose(implicit.masses, dense.masses, atol=1e-12)

    def test_masses_sum_to_one(self, random_spd, rng):
        mu = measure_from_vector(DenseOperator(random_spd(30)), unit(rng, 30))
        assert mu.total_mass == pytest.approx(1.0, abs=1e-12)

    def test_bridge_to_quadratic_form(self, random_spd, rng):
        M = random_spd(25)
        v = unit(rng, 25)
        values, Q = np.linalg.eigh(M)
        quadratic_form = v @ (Q * np.log(values)) @ Q.T @ v
        mu = measure_from_vector(DenseOperator(M), v)
        assert exact_rs_integral(mu, 'log') == pytest.approx(quadratic_form, rel=1e-10)


class TestMeasureCdf:
    mu = SpectralMeasure(points=[1.0, 2.0], masses=[0.3, 0.7])

    def test_below_support(self):
        assert measure_cdf(self.mu, 0.5) == 0.0

    def test_between_points(self):
        assert measure_cdf(self.mu, 1.5) == pytest.approx(0.3)

    def test_right_continuous_at_points(self):
        assert measure_cdf(self.mu, 1.0) == pytest.approx(0.3)
        assert measure_cdf(self.mu, 2.0) == pytest.approx(1.0)
        assert measure_cdf(self.mu, 10.0) == pytest.approx(1.0)

    def test_step_function_on_grid(self, rng):
        points = np.sort(rng.uniform(0, 1, size=10))
        masses = rng.dirichlet(np.ones(10))
        mu = SpectralMeasure(points, masses)
        t, values = measure_grid(mu, 1000, points[0] - 0.1, points[-1] + 0.1)
        assert np.all(np.diff(values) >= 0)
        assert values[0] == 0.0 and values[-1] == pytest.approx(1.0)
        jumps = [measure_cdf(mu, p) - measure_cdf(mu, p - 1e-12) for p in points]
        np.testing.assert_allclose(jumps, masses, atol=1e-12)

    def test_default_grid_spans_support(self):
        t, values = measure_grid(self.mu, 5)
        np.testing.assert_allclose(t, [1.0, 1.25, 1.5, 1.75, 2.0])
        np.testing.assert_allclose(values, [0.3, 0.3, 0.3, 0.3, 1.0])


class TestIntegrals:
    def test_uniform_masses_give_logdet_over_n(self):
        lam = np.array([0.5, 1.0, 2.0, 4.0])
        mu = SpectralMeasure(lam, np.full(4, 0.25))
        assert exact_rs_integral(mu, 'log') == pytest.approx(np.sum(np.log(lam)) / 4)

    def test_single_point(self):
        mu = SpectralMeasure([3.0], [1.0])
        assert exact_rs_integral(mu, 'exp') == pytest.approx(math.exp(3.0))

    def test_two_point_log(self):
        mu = SpectralMeasure([1.0, 2.0], [0.5, 0.5])
        assert exact_rs_integral(mu, 'log') == pytest.approx(0.5 * math.log(2))

    def test_rule_examples(self):
        assert quadrature_eval(QuadratureRule(np.array([2.0]), np.array([1.0])), 'log') == pytest.approx(math.log(2))
        rule = QuadratureRule(np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        assert quadrature_eval(rule, 'log') == pytest.approx(0.5 * math.log(2))
        assert quadrature_eval(rule, monomial(0)) == 1.0

    def test_log_outside_domain(self):
        rule = QuadratureRule(np.array([-0.5, 2.0]), np.array([0.5, 0.5]))
        with pytest.raises(DomainError) as excinfo:
            quadrature_eval(rule, 'log')
        assert excinfo.value.index == 0

    def test_custom_callable(self):
        mu = SpectralMeasure([1.0, 3.0], [0.5, 0.5])
        assert exact_rs_integral(mu, lambda x: x ** 2) == pytest.approx(5.0)

    def test_unknown_function(self):
        with pytest.raises(InvalidInputError):
            get_function('cosh')

    def test_domain_predicate(self):
        f = ScalarFunction('sqrt', np.sqrt, lambda x: x >= 0)
        with pytest.raises(DomainError):
            f.evaluate([4.0, -1.0])


class TestAffineMaps:
    def test_from_interval(self):
        h = AffineMap.from_interval(0.02, 1.0)
        np.testing.assert_allclose(h.apply([-1.0, 1.0]), [0.02, 1.0])
        np.testing.assert_allclose(h.inverse(h.apply([0.3, -0.7])), [0.3, -0.7])

    def test_zero_slope_rejected(self):
        with pytest.raises(InvalidInputError):
            AffineMap(0.0, 1.0)

    def test_identity_pushforward(self):
        mu = SpectralMeasure([1.0, 2.0], [0.4, 0.6])
        pushed = pushforward_measure(mu, AffineMap(1.0, 0.0))
        np.testing.assert_array_equal(pushed.points, mu.points)
        np.testing.assert_array_equal(pushed.masses, mu.masses)

    def test_reflection_reverses_order(self):
        mu = SpectralMeasure([1.0, 2.0, 4.0], [0.2, 0.3, 0.5])
        pushed = pushforward_measure(mu, AffineMap(-1.0, 0.0))
        np.testing.assert_array_equal(pushed.points, [-4.0, -2.0, -1.0])
        np.testing.assert_array_equal(pushed.masses, [0.5, 0.3, 0.2])

    def test_quadrature_error_is_affine_invariant(self, rng):
        for _ in range(20):
            n = int(rng.integers(10, 40))
            A = DiagonalOperator(rng.uniform(0.05, 3.0, size=n))
            v = unit(rng, n)
            m = int(rng.integers(1, n // 2))
            mu = measure_from_vector(A, v)
            rule = lanczos(A, v, m).rule
            h = AffineMap.from_interval(mu.points[0], mu.points[-1])
            physical = quadrature_error(mu, rule, 'log')

            composed = ScalarFunction('log_h', lambda t: np.log(h.apply(t)), lambda t: h.apply(t) > 0)
            reference = quadrature_error(pushforward_measure(mu, h), pushforward_rule(rule, h), composed)
            assert abs(physical - reference) <= 1e-12

    def test_pushforward_keeps_weights(self, rng):
        rule = QuadratureRule(np.array([0.2, 0.5, 0.9]), np.array([0.3, 0.3, 0.4]))
        pushed = pushforward_rule(rule, AffineMap.from_interval(0.1, 1.0))
        np.testing.assert_array_equal(pushed.weights, rule.weights)
        assert np.all(np.abs(pushed.nodes) <= 1.0)
