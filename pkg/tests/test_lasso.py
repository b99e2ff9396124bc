"""Mode solvers: objective, FISTA baseline, and the polar sweep."""

import numpy as np
import pytest

import polarlasso as pl


@pytest.fixture(scope="module")
def noisy_instance():
    """4x7 design with an observation large enough for a nonzero mode."""
    base = pl.gen_bernoulli_matrix(4, 7, 11)
    rng = np.random.default_rng(3)
    y = rng.standard_normal(4)
    y *= 3.0 / np.linalg.norm(y)
    return pl.make_problem(base.A, y)


class TestObjective:
    def test_zero_point(self, noisy_instance):
        assert pl.objective(noisy_instance, np.zeros(7)) == pytest.approx(
            0.5 * noisy_instance.y_norm**2
        )

    def test_basis_vector_zero_observation(self, desk_instance):
        x = np.eye(7)[0]
        assert pl.objective(desk_instance, x) == pytest.approx(1.5)  # unit column

    def test_dimension_mismatch(self, desk_instance):
        with pytest.raises(ValueError):
            pl.objective(desk_instance, np.zeros(5))


class TestFista:
    def test_zero_observation_returns_zero(self, desk_instance):
        sol = pl.solve_fista(desk_instance)
        np.testing.assert_array_equal(sol.x, np.zeros(7))
        assert sol.meta["converged"]

    def test_identity_design_soft_threshold(self):
        y = np.array([2.5, -0.4, 0.0, 1.2])
        prob = pl.make_problem(np.eye(4), y)
        sol = pl.solve_fista(prob)
        expected = np.sign(y) * np.maximum(np.abs(y) - 1.0, 0.0)
        np.testing.assert_allclose(sol.x, expected, atol=1e-8)

    def test_optimality_certificate(self, noisy_instance):
        sol = pl.solve_fista(noisy_instance)
        grad = noisy_instance.A.T @ (noisy_instance.A @ sol.x - noisy_instance.y)
        assert np.all(np.abs(grad) <= 1.0 + 1e-6)
        nz = np.abs(sol.x) > 1e-9
        np.testing.assert_allclose(grad[nz], -np.sign(sol.x[nz]), atol=1e-6)

    def test_objective_field_consistency(self, noisy_instance):
        sol = pl.solve_fista(noisy_instance)
        assert sol.objective == pl.objective(noisy_instance, sol.x)

    def test_beats_random_points(self, noisy_instance):
        sol = pl.solve_fista(noisy_instance)
        rng = np.random.default_rng(4)
        for _ in range(200):
            x = rng.standard_normal(7)
            assert pl.objective(noisy_instance, x) >= sol.objective - 1e-8


class TestPolar:
    def test_zero_observation_returns_zero(self, desk_instance):
        sol = pl.solve_polar(desk_instance, 1000, 0)
        np.testing.assert_array_equal(sol.x, np.zeros(7))
        assert sol.meta["best_beta"] is None

    def test_small_observation_returns_zero(self, desk_instance):
        y = np.zeros(4)
        y[0] = 0.9 / desk_instance.op_norm
        prob = pl.make_problem(desk_instance.A, y)
        assert pl.zero_lasso_sufficient(prob)
        sol = pl.solve_polar(prob, 5000, 1)
        np.testing.assert_array_equal(sol.x, np.zeros(7))

    def test_nonzero_observation(self, noisy_instance):
        fista = pl.solve_fista(noisy_instance)
        polar = pl.solve_polar(noisy_instance, 100000, 2)
        assert np.any(polar.x != 0)
        # finite sweep approximates the argmin from above
        assert polar.objective >= fista.objective - 1e-6

    def test_objective_improves_with_samples(self, noisy_instance):
        small = pl.solve_polar(noisy_instance, 1000, 5)
        big = pl.solve_polar(noisy_instance, 200000, 5)
        assert big.objective <= small.objective + 1e-12

    def test_determinism(self, noisy_instance):
        a = pl.solve_polar(noisy_instance, 20000, 7)
        b = pl.solve_polar(noisy_instance, 20000, 7)
        np.testing.assert_array_equal(a.x, b.x)


class TestSolverAgreement:
    def test_objective_gap_stochastic_improvement(self):
        # larger sweeps should not do worse on a majority of seeded instances
        wins = 0
        for seed in range(10):
            base = pl.gen_bernoulli_matrix(4, 7, 300 + seed)
            rng = np.random.default_rng(seed)
            y = rng.standard_normal(4)
            y *= 2.5 / np.linalg.norm(y)
            prob = pl.make_problem(base.A, y)
            small = pl.solve_polar(prob, 1000, seed)
            big = pl.solve_polar(prob, 100000, seed)
            if big.objective <= small.objective + 1e-12:
                wins += 1
        assert wins >= 9
