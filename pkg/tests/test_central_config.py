import math

import numpy as np
import pytest
from scipy.optimize import brentq

from carousel.central_config import (
    amended_potential,
    binary_config,
    lagrange_config,
    mass_beta,
    polygon_config,
    rotation_mode,
    rotation_symmetry_order,
    solve_central_config,
)
from carousel.core import Alpha, CollisionError, rot


def grad_norm(cc):
    return float(np.linalg.norm(amended_potential(cc.positions, cc.masses, cc.alpha, order=1).gradient))


class TestAmendedPotential:
    def test_hessian_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        u = rng.normal(size=(4, 2)) * 1.5
        m = rng.uniform(0.5, 2.0, 4)
        alpha = Alpha.parse(2.0)
        ev = amended_potential(u, m, alpha, order=2)
        h = 1e-5
        fd = np.zeros_like(ev.hessian)
        for c in range(8):
            du = np.zeros(8)
            du[c] = h
            gp = amended_potential(u + du.reshape(4, 2), m, alpha, order=1).gradient
            gm = amended_potential(u - du.reshape(4, 2), m, alpha, order=1).gradient
            fd[:, c] = (gp - gm) / (2 * h)
        scale = np.linalg.norm(ev.hessian)
        assert np.linalg.norm(fd - ev.hessian) / scale < 1e-6

    def test_hessian_symmetric(self):
        cc = lagrange_config(1, 2, 3, 1.5)
        H = amended_potential(cc.positions, cc.masses, cc.alpha, order=2).hessian
        assert np.max(np.abs(H - H.T)) < 1e-12 * np.max(np.abs(H))

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
    def test_two_body_kepler_radius(self, alpha):
        # gradient vanishes at separation r solving mu r = m1 m2 r^-alpha,
        # located independently by bisection
        m1 = m2 = 1.0
        mu = m1 * m2 / (m1 + m2)
        f = lambda r: mu * r - m1 * m2 * r ** (-alpha)
        r_star = brentq(f, 0.1, 10.0, xtol=1e-14)
        pos = np.array([[r_star / 2, 0.0], [-r_star / 2, 0.0]])
        g = amended_potential(pos, np.array([m1, m2]), Alpha.parse(alpha), order=1).gradient
        assert np.linalg.norm(g) < 1e-12
        # and does not vanish elsewhere
        pos_off = pos * 1.1
        g_off = amended_potential(pos_off, np.array([m1, m2]), Alpha.parse(alpha), order=1).gradient
        assert np.linalg.norm(g_off) > 1e-3

    def test_collision_raises(self):
        pos = np.array([[0.0, 0.0], [1e-14, 0.0], [1.0, 0.0]])
        with pytest.raises(CollisionError):
            amended_potential(pos, np.ones(3), Alpha.parse(2.0), order=0)

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(2)
        u = rng.normal(size=(5, 2))
        m = rng.uniform(0.5, 2.0, 5)
        alpha = Alpha.parse(1.5)
        for th in rng.uniform(0, 2 * math.pi, 4):
            R = rot(th)
            g1 = amended_potential(u @ R.T, m, alpha, order=1).gradient.reshape(5, 2)
            g2 = amended_potential(u, m, alpha, order=1).gradient.reshape(5, 2) @ R.T
            assert np.max(np.abs(g1 - g2)) < 1e-12

    def test_scaling_property(self):
        # grad Vt(r u; r^-(alpha+1) w) = r^-alpha grad Vt(u; w)
        rng = np.random.default_rng(8)
        u = rng.normal(size=(4, 2))
        m = rng.uniform(0.5, 2.0, 4)
        a = 1.5
        alpha = Alpha.parse(a)

        def grad_tilde(pos, w):
            ev = amended_potential(pos, m, alpha, order=1)
            mu = (m[:, None] * pos).reshape(-1)
            return (w - 1.0) * mu + ev.gradient

        w = 1.3
        for r in rng.uniform(0.5, 2.0, 5):
            lhs = grad_tilde(r * u, r ** (-(a + 1.0)) * w)
            rhs = r ** (-a) * grad_tilde(u, w)
            assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


class TestPolygon:
    def test_k3_newtonian_radius(self):
        cc = polygon_config(3, 2.0)
        s1 = sum(math.sin(j * math.pi / 3) ** (-1.0) for j in (1, 2)) / 4.0
        assert s1 == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-15)
        assert np.linalg.norm(cc.positions[0]) == pytest.approx(3.0 ** (-1 / 6), rel=1e-14)

    def test_k2_radius(self):
        cc = polygon_config(2, 2.0)
        assert np.linalg.norm(cc.positions[0]) == pytest.approx(0.25 ** (1 / 3), rel=1e-14)

    @pytest.mark.parametrize("k", [2, 3, 5, 8, 12])
    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0, 2.5])
    def test_is_critical(self, k, alpha):
        cc = polygon_config(k, alpha)
        assert cc.residual < 1e-11

    def test_scaled_mass(self):
        cc = polygon_config(3, 2.0, mass=0.5)
        assert cc.residual < 1e-12
        assert cc.total_mass == pytest.approx(1.5)

    def test_matches_solver_from_perturbation(self):
        rng = np.random.default_rng(1)
        ref = polygon_config(5, 1.5)
        seed = ref.positions + 0.02 * rng.normal(size=ref.positions.shape)
        solved = solve_central_config(seed, ref.masses, ref.alpha, tol=1e-13)
        # align the rotational phase before comparison
        z_ref = ref.positions[:, 0] + 1j * ref.positions[:, 1]
        z_sol = solved.positions[:, 0] + 1j * solved.positions[:, 1]
        th = np.angle(np.sum(np.conj(z_sol) * z_ref))
        aligned = z_sol * np.exp(1j * th)
        assert np.max(np.abs(aligned - z_ref)) < 1e-9


class TestSolver:
    def test_perturbed_equilateral_circumradius(self):
        rng = np.random.default_rng(0)
        ref = lagrange_config(1, 1, 1, 2.0)
        seed = ref.positions + 0.05 * rng.normal(size=(3, 2))
        cc = solve_central_config(seed, ref.masses, 2.0, tol=1e-13)
        radii = np.linalg.norm(cc.positions, axis=1)
        # closed form: circumradius R with R^3 = 1/sqrt(3)
        assert np.allclose(radii, (1.0 / math.sqrt(3.0)) ** (1 / 3), atol=1e-9)

    def test_exact_polygon_unchanged(self):
        ref = polygon_config(4, 2.0)
        cc = solve_central_config(ref.positions, ref.masses, 2.0, tol=1e-11)
        assert np.array_equal(cc.positions, ref.positions)
        assert cc.residual < 1e-11

    def test_collinear_euler(self):
        # equal masses on a line: distances from the independent scalar
        # root of the force-balance equation d^(alpha+1) (d a) = ...
        alpha = 2.0
        f = lambda d: d - (1.0 / (2 * d) ** 2 + 1.0 / d**2)
        d_star = brentq(f, 0.5, 3.0, xtol=1e-14)
        seed = np.array([[-d_star, 0.0], [0.0, 0.0], [d_star, 0.01]])
        cc = solve_central_config(seed, np.ones(3), alpha, tol=1e-13)
        assert cc.residual < 1e-12
        d_sol = np.max(np.linalg.norm(cc.positions, axis=1))
        assert d_sol == pytest.approx(d_star, abs=1e-9)

    def test_rotational_zero_mode(self):
        for cc in (polygon_config(5, 1.5), lagrange_config(1, 2, 3, 2.0)):
            H = amended_potential(cc.positions, cc.masses, cc.alpha, order=2).hessian
            v = rotation_mode(cc.positions)
            assert np.linalg.norm(H @ v) < 1e-9


class TestLagrange:
    def test_equal_masses_circumradius(self):
        cc = lagrange_config(1, 1, 1, 2.0)
        assert np.allclose(np.linalg.norm(cc.positions, axis=1), 3.0 ** (-1 / 6), atol=1e-14)

    def test_unequal_masses_equilateral_and_critical(self):
        cc = lagrange_config(1, 2, 3, 2.0)
        assert cc.residual < 1e-12
        d = [np.linalg.norm(cc.positions[i] - cc.positions[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
        assert np.ptp(d) < 1e-14
        assert d[0] == pytest.approx(6.0 ** (1 / 3), rel=1e-14)

    def test_permutation_congruence(self):
        a = lagrange_config(1, 2, 3, 1.5)
        b = lagrange_config(3, 1, 2, 1.5)
        da = np.linalg.norm(a.positions[0] - a.positions[1])
        db = np.linalg.norm(b.positions[0] - b.positions[1])
        assert da == pytest.approx(db, rel=1e-14)

    def test_binary_config(self):
        cc = binary_config(0.5, 0.5, 1.5)
        assert cc.residual < 1e-13
        assert np.linalg.norm(cc.positions[0] - cc.positions[1]) == pytest.approx(1.0)


class TestMassBeta:
    def test_equal_masses(self):
        assert mass_beta(1, 1, 1) == 9.0

    def test_vanishing_third_mass_limit(self):
        vals = [mass_beta(1, 1, eps) for eps in (1e-4, 1e-6, 1e-8)]
        assert vals[-1] == pytest.approx(27.0 / 4.0, abs=1e-6)
        assert abs(vals[2] - 27.0 / 4.0) < abs(vals[0] - 27.0 / 4.0)

    def test_one_two_three(self):
        assert mass_beta(1, 2, 3) == pytest.approx(8.25, abs=1e-15)

    def test_upper_bound(self):
        rng = np.random.default_rng(9)
        for m in rng.uniform(0.1, 5.0, size=(50, 3)):
            assert mass_beta(*m) <= 9.0 + 1e-12


class TestSymmetryOrder:
    def test_polygon(self):
        cc = polygon_config(5, 2.0)
        assert rotation_symmetry_order(cc.positions, cc.masses) == 5

    def test_equal_binary(self):
        cc = binary_config(0.5, 0.5, 1.5)
        assert rotation_symmetry_order(cc.positions, cc.masses) == 2

    def test_unequal_binary(self):
        cc = binary_config(0.3, 0.7, 1.5)
        assert rotation_symmetry_order(cc.positions, cc.masses) == 1
