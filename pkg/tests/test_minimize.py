import numpy as np

from anibound.exponents import INF, Exponents
from anibound.fields import GridFunction
from anibound.integrand import ModelIntegrand, WeightField
from anibound.minimize import (
    SolveConfig,
    random_perturbations,
    solve,
    verify_quasiminimality,
)
from conftest import coordinate_field, simple_model, unit_grid


def weighted_1d_model():
    e = Exponents(1, (2.0,), 2.0, 2.0, (INF,), INF)
    lam = WeightField("power", amplitude=1.0, center=(0.0,), exponent=0.5)
    return ModelIntegrand(e, (lam,), WeightField("constant"), 0.0)


class TestSolve:
    def test_1d_affine(self):
        m = simple_model(1)
        g = unit_grid(1, 1 / 256)
        res = solve(m, g, coordinate_field(g), SolveConfig())
        assert res.converged
        x = g.node_points()[:, 0]
        assert np.max(np.abs(res.u.values - x)) <= 1e-8

    def test_1d_weighted_sqrt(self):
        m = weighted_1d_model()
        g = unit_grid(1, 1 / 256)
        res = solve(m, g, coordinate_field(g), SolveConfig(max_iters=30_000, grad_tol=1e-5))
        assert res.converged
        x = g.node_points()[:, 0]
        assert np.max(np.abs(res.u.values - np.sqrt(x))) <= 5.0 * g.h

    def test_2d_harmonic_affine(self):
        m = simple_model(2)
        g = unit_grid(2, 1 / 16)
        res = solve(m, g, coordinate_field(g), SolveConfig())
        assert res.converged
        x = g.node_points()[:, 0].reshape(g.shape)
        assert np.max(np.abs(res.u.values - x)) <= 1e-8

    def test_energy_decreases(self):
        m = simple_model(2, u_coeff=1.0)
        g = unit_grid(2, 1 / 8)
        rng = np.random.default_rng(7)
        init = GridFunction(g, rng.standard_normal(g.shape))
        res = solve(m, g, init, SolveConfig(max_iters=50))
        from anibound.integrand import energy

        assert res.final_energy <= energy(m, init) + 1e-12

    def test_non_convergence_flag(self):
        m = weighted_1d_model()
        g = unit_grid(1, 1 / 64)
        cfg = SolveConfig(max_iters=1, grad_tol=1e-14)
        res = solve(m, g, coordinate_field(g), cfg)
        assert not res.converged

    def test_deterministic(self):
        m = simple_model(2, u_coeff=1.0, gamma=3.0)
        g = unit_grid(2, 1 / 8)
        init = coordinate_field(g)
        r1 = solve(m, g, init, SolveConfig(max_iters=200))
        r2 = solve(m, g, init, SolveConfig(max_iters=200))
        assert np.array_equal(r1.u.values, r2.u.values)
        assert r1.final_energy == r2.final_energy


class TestQuasiMinimality:
    def test_minimizer_passes(self):
        m = simple_model(2)
        g = unit_grid(2, 1 / 16)
        res = solve(m, g, coordinate_field(g), SolveConfig())
        phis = random_perturbations(g, 100, seed=1)
        rep = verify_quasiminimality(m, res.u, 1.0, phis)
        assert rep.all_pass
        assert rep.empirical_Q <= 1.0 + 1e-9

    def test_zero_perturbation(self):
        m = simple_model(2)
        g = unit_grid(2, 1 / 8)
        u = coordinate_field(g)
        phi = GridFunction(g, np.zeros(g.shape))
        rep = verify_quasiminimality(m, u, 1.0, [phi])
        assert rep.all_pass

    def test_non_minimizer_fails(self):
        m = simple_model(2)
        g = unit_grid(2, 1 / 16)
        res = solve(m, g, coordinate_field(g), SolveConfig())
        bump = random_perturbations(g, 1, seed=2, amplitude=0.5)[0]
        bad = GridFunction(g, res.u.values + bump.values)
        correction = GridFunction(g, res.u.values - bad.values)
        rep = verify_quasiminimality(m, bad, 1.0, [correction])
        assert not rep.all_pass

    def test_perturbations_seeded(self):
        g = unit_grid(2, 1 / 8)
        a = random_perturbations(g, 5, seed=3)
        b = random_perturbations(g, 5, seed=3)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.values, pb.values)
