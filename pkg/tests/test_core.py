import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from carousel.core import (
    Alpha,
    ClusterConfig,
    ClusterIndex,
    I2,
    J2,
    R2,
    as_complex,
    as_real,
    center_of_mass_project,
    dphi,
    flat_index,
    multi_index,
    phi,
    rot,
)


class TestPhi:
    def test_newtonian_at_one(self):
        assert phi(1.0, 2.0) == 1.0

    def test_logarithmic_at_one(self):
        assert phi(1.0, 1.0) == 0.0

    def test_alpha3_against_quadrature(self):
        # normalization phi(inf) = 0 for alpha > 1: phi(r) = int_r^inf s^-alpha ds
        expected, err = quad(lambda s: s**-3.0, 2.0, np.inf)
        assert err < 1e-12
        assert phi(2.0, 3.0) == pytest.approx(expected, abs=1e-13)
        assert phi(2.0, 3.0) == pytest.approx(1.0 / 8.0, abs=1e-15)

    @pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0, 2.5])
    def test_monotone_decreasing(self, alpha):
        rs = np.linspace(0.2, 5.0, 40)
        vals = [phi(r, alpha) for r in rs]
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize(
        "r,alpha",
        [(1.0, 1.0), (1.0, 1.7), (2.0, 1.0), (2.0, 2.0), (4.0, 1.5), (4.0, 2.5), (0.5, 2.0)],
    )
    def test_dphi_product_exact(self, r, alpha):
        # r**alpha is a power of two for these pairs, so the identity is exact
        assert dphi(r, alpha) * r**alpha == -1.0

    def test_derivative_contract(self):
        h = 1e-6
        for alpha in (1.0, 1.5, 2.0, 3.0):
            fd = (phi(2.0 + h, alpha) - phi(2.0 - h, alpha)) / (2 * h)
            assert fd == pytest.approx(dphi(2.0, alpha), rel=1e-8)

    def test_nonpositive_r_rejected(self):
        with pytest.raises(ValueError):
            phi(0.0, 2.0)
        with pytest.raises(ValueError):
            dphi(-1.0, 2.0)


class TestAlpha:
    def test_parse_tags(self):
        assert Alpha.parse("log").is_logarithmic
        assert Alpha.parse("newton").is_gravitational
        assert Alpha.parse("3/2").exact == Fraction(3, 2)
        assert Alpha.parse(2.5).value == 2.5

    def test_below_one_rejected(self):
        with pytest.raises(ValueError):
            Alpha.parse(0.5)

    def test_flags(self):
        a = Alpha.parse(1.5)
        assert not a.is_logarithmic and not a.is_gravitational


class TestGenerators:
    def test_j_squared(self):
        assert np.array_equal(J2 @ J2, -I2)

    def test_r_squared(self):
        assert np.array_equal(R2 @ R2, I2)

    def test_anticommute(self):
        assert np.array_equal(J2 @ R2, -(R2 @ J2))

    def test_rot_matches_j_exponential(self):
        th = 0.7
        R = rot(th)
        z = as_complex(np.array([0.3, -1.2]))
        assert np.exp(1j * th) * z == pytest.approx(as_complex(R @ np.array([0.3, -1.2])))

    def test_complex_roundtrip(self):
        pts = np.random.default_rng(0).normal(size=(5, 2))
        assert np.array_equal(as_real(as_complex(pts)), pts)


class TestClusterIndex:
    def test_multi_index_examples(self):
        idx = ClusterIndex((2, 1))
        assert multi_index(0, idx) == (1, 1)
        assert multi_index(1, idx) == (1, 2)
        assert multi_index(2, idx) == (2, 1)

    def test_roundtrip(self):
        idx = ClusterIndex((3, 2, 1, 1))
        for flat in range(idx.total):
            j, k = multi_index(flat, idx)
            assert flat_index(j, k, idx) == flat

    def test_out_of_range(self):
        idx = ClusterIndex((2, 1))
        with pytest.raises(IndexError):
            multi_index(3, idx)
        with pytest.raises(IndexError):
            flat_index(2, 2, idx)

    def test_ordering_convention_enforced(self):
        with pytest.raises(ValueError):
            ClusterIndex((1, 2))
        idx = ClusterIndex((2, 2, 1))
        assert idx.n0 == 2 and idx.total == 5


class TestCenterOfMass:
    def test_mean_removal(self):
        idx = ClusterIndex((2,))
        cfg = ClusterConfig(np.array([[1.0, 0.0], [3.0, 0.0]]), np.array([1.0, 1.0]), idx)
        out = center_of_mass_project(cfg)
        assert np.allclose(out.positions, [[-1.0, 0.0], [1.0, 0.0]])

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        idx = ClusterIndex((3, 2, 1))
        cfg = ClusterConfig(rng.normal(size=(6, 2)), rng.uniform(0.5, 2.0, 6), idx)
        once = center_of_mass_project(cfg)
        twice = center_of_mass_project(once)
        assert np.max(np.abs(once.positions - twice.positions)) < 1e-14

    def test_weighted_sum_vanishes(self):
        rng = np.random.default_rng(4)
        idx = ClusterIndex((3, 2, 1, 1))
        cfg = ClusterConfig(10 * rng.normal(size=(7, 2)), rng.uniform(0.5, 4.0, 7), idx)
        out = center_of_mass_project(cfg)
        total = (out.masses[:, None] * out.positions).sum(axis=0)
        assert np.max(np.abs(total)) < 1e-14

    def test_already_centered_unchanged(self):
        idx = ClusterIndex((2,))
        cfg = ClusterConfig(np.array([[-1.0, 0.0], [1.0, 0.0]]), np.array([1.0, 1.0]), idx)
        out = center_of_mass_project(cfg)
        assert np.array_equal(out.positions, cfg.positions)

    def test_cluster_centers_satisfy_reduction(self):
        rng = np.random.default_rng(5)
        idx = ClusterIndex((3, 2, 1))
        cfg = ClusterConfig(rng.normal(size=(6, 2)), rng.uniform(0.5, 2.0, 6), idx)
        out = center_of_mass_project(cfg)
        masses_j = [out.cluster_mass(j) for j in range(1, 4)]
        centers = out.centers()
        assert np.max(np.abs((np.array(masses_j)[:, None] * centers).sum(axis=0))) < 1e-14


class TestClusterConfig:
    def test_positive_masses_required(self):
        idx = ClusterIndex((2,))
        with pytest.raises(ValueError):
            ClusterConfig(np.zeros((2, 2)), np.array([1.0, 0.0]), idx)

    def test_immutability(self):
        idx = ClusterIndex((2,))
        cfg = ClusterConfig(np.zeros((2, 2)), np.ones(2), idx)
        with pytest.raises(ValueError):
            cfg.positions[0, 0] = 1.0
