"""Weighted sets, Karcher means, sample (cross-)covariances."""

import numpy as np
import pytest

from manifold_ukf.errors import ContractViolationError, ConvergenceError
from manifold_ukf.manifolds import Euclidean, ManifoldPoint, Sphere
from manifold_ukf.stats import (
    RandomPointEstimate,
    WeightedSet,
    karcher_mean,
    sample_covariance,
    sample_cross_covariance,
)


def slerp(a, b, t):
    """Independent geodesic interpolation oracle on the sphere."""
    theta = np.arccos(np.clip(a @ b, -1.0, 1.0))
    if theta < 1e-12:
        return a
    return (np.sin((1.0 - t) * theta) * a + np.sin(t * theta) * b) / np.sin(theta)


def sphere_point(rng, n):
    v = rng.standard_normal(n + 1)
    return v / np.linalg.norm(v)


class TestRandomPointEstimate:
    def test_validates_and_freezes(self):
        est = RandomPointEstimate(
            ManifoldPoint(Euclidean(2), np.zeros(2)), np.eye(2)
        )
        with pytest.raises(ValueError):
            est.cov[0, 0] = 5.0
        assert est.manifold == Euclidean(2)

    def test_rejects_bad_cov(self):
        p = ManifoldPoint(Euclidean(2), np.zeros(2))
        with pytest.raises(ContractViolationError):
            RandomPointEstimate(p, np.eye(3))
        with pytest.raises(ContractViolationError):
            RandomPointEstimate(p, np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestWeightedSet:
    def test_default_families_equal_mean_weights(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        w = np.array([0.5, 0.25, 0.25])
        ws = WeightedSet(Euclidean(2), pts, w)
        assert np.array_equal(ws.w_cov, w)
        assert np.array_equal(ws.w_cross, w)
        assert ws.size == 3
        assert ws.is_normalized

    def test_distinct_families_kept(self):
        pts = np.zeros((2, 1))
        ws = WeightedSet(
            Euclidean(1), pts, np.array([0.5, 0.5]), w_cov=np.array([0.9, 0.1])
        )
        assert np.array_equal(ws.w_cov, [0.9, 0.1])
        assert np.array_equal(ws.w_cross, [0.5, 0.5])

    def test_not_normalized(self):
        ws = WeightedSet(Euclidean(1), np.zeros((2, 1)), np.array([1.0, 1.0]))
        assert not ws.is_normalized

    def test_validation_errors(self):
        pts = np.zeros((2, 1))
        with pytest.raises(ContractViolationError):
            WeightedSet(Euclidean(1), pts, np.array([1.0, 0.0]))  # zero weight
        with pytest.raises(ContractViolationError):
            WeightedSet(Euclidean(1), pts, np.array([1.0]))  # wrong length
        with pytest.raises(ContractViolationError):
            WeightedSet(Euclidean(1), np.zeros((0, 1)), np.zeros(0))
        with pytest.raises(ContractViolationError):
            WeightedSet(Sphere(1), np.array([[2.0, 0.0]]), np.array([1.0]))

    def test_point_accessor(self):
        pts = np.array([[1.0, 0.0], [0.0, 1.0]])
        ws = WeightedSet(Sphere(1), pts, np.array([0.5, 0.5]))
        p = ws.point(1)
        assert isinstance(p, ManifoldPoint)
        assert np.array_equal(p.coords, [0.0, 1.0])


class TestKarcherMean:
    def test_euclidean_equals_weighted_average(self):
        rng = np.random.default_rng(12)
        pts = rng.standard_normal((7, 3))
        w = rng.uniform(0.1, 1.0, 7)
        w /= w.sum()
        ws = WeightedSet(Euclidean(3), pts, w)
        mu = karcher_mean(ws, tol=1e-14)
        assert np.allclose(mu.coords, np.average(pts, axis=0, weights=w), atol=1e-13)

    def test_sphere_two_points_equal_weights(self):
        rng = np.random.default_rng(13)
        a = sphere_point(rng, 2)
        b = sphere_point(rng, 2)
        ws = WeightedSet(Sphere(2), np.stack([a, b]), np.array([0.5, 0.5]))
        mu = karcher_mean(ws, tol=1e-12)
        assert np.allclose(mu.coords, slerp(a, b, 0.5), atol=1e-10)

    def test_sphere_two_points_weighted(self):
        # The weighted mean of {a, b} sits at the geodesic parameter equal
        # to b's normalized weight.
        rng = np.random.default_rng(14)
        a = sphere_point(rng, 2)
        b = sphere_point(rng, 2)
        for wb in (0.2, 0.7):
            ws = WeightedSet(Sphere(2), np.stack([a, b]), np.array([1.0 - wb, wb]))
            mu = karcher_mean(ws, tol=1e-12)
            assert np.allclose(mu.coords, slerp(a, b, wb), atol=1e-10)

    def test_init_already_optimal_returned_unchanged(self):
        man = Sphere(2)
        pole = np.array([0.0, 0.0, 1.0])
        delta = np.array([0.3, 0.0, 0.0])
        pts = np.stack([man.exp(pole, delta), man.exp(pole, -delta)])
        ws = WeightedSet(man, pts, np.array([0.5, 0.5]))
        mu = karcher_mean(ws, init=ManifoldPoint(man, pole))
        assert np.array_equal(mu.coords, pole)

    def test_init_manifold_mismatch(self):
        ws = WeightedSet(Euclidean(2), np.zeros((2, 2)), np.array([0.5, 0.5]))
        with pytest.raises(ContractViolationError):
            karcher_mean(ws, init=ManifoldPoint(Euclidean(3), np.zeros(3)))

    def test_convergence_error_carries_state(self):
        ws = WeightedSet(
            Euclidean(1), np.array([[0.0], [10.0]]), np.array([0.5, 0.5])
        )
        with pytest.raises(ConvergenceError) as exc:
            karcher_mean(ws, init=ManifoldPoint(Euclidean(1), np.array([100.0])),
                         max_iter=0)
        assert exc.value.iterations == 0
        assert exc.value.gradient_norm > 0.0


class TestSampleCovariance:
    def test_euclidean_oracle(self):
        rng = np.random.default_rng(15)
        pts = rng.standard_normal((9, 2))
        w = np.full(9, 1.0 / 9)
        ws = WeightedSet(Euclidean(2), pts, w)
        mu = pts.mean(axis=0)
        got = sample_covariance(ws, ManifoldPoint(Euclidean(2), mu))
        centered = pts - mu
        want = (centered.T * w) @ centered
        assert np.allclose(got, want, atol=1e-14)

    def test_uses_cov_weight_family(self):
        pts = np.array([[1.0], [-1.0]])
        ws = WeightedSet(
            Euclidean(1), pts, np.array([0.5, 0.5]), w_cov=np.array([2.0, 2.0])
        )
        got = sample_covariance(ws, ManifoldPoint(Euclidean(1), np.zeros(1)))
        assert got[0, 0] == pytest.approx(4.0)

    def test_centering_at_foreign_base(self):
        # Evaluating at a base other than the mean but centering on the mean
        # must reproduce the scatter about the mean (flat case: exactly).
        rng = np.random.default_rng(16)
        pts = rng.standard_normal((6, 2))
        w = np.full(6, 1.0 / 6)
        ws = WeightedSet(Euclidean(2), pts, w)
        mu = ManifoldPoint(Euclidean(2), pts.mean(axis=0))
        at = ManifoldPoint(Euclidean(2), np.array([5.0, -3.0]))
        got = sample_covariance(ws, at, center=mu)
        want = sample_covariance(ws, mu)
        assert np.allclose(got, want, atol=1e-13)

    def test_sphere_small_spread_matches_tangent_scatter(self):
        man = Sphere(2)
        pole = np.array([0.0, 0.0, 1.0])
        frame = man.frame(pole)
        rng = np.random.default_rng(17)
        coords = 1e-3 * rng.standard_normal((40, 2))
        coords -= coords.mean(axis=0)
        pts = man.exp(pole, coords @ frame)
        w = np.full(40, 1.0 / 40)
        ws = WeightedSet(man, pts, w)
        got = sample_covariance(ws, ManifoldPoint(man, pole))
        want = (coords.T * w) @ coords
        assert np.allclose(got, want, atol=1e-12)


class TestCrossCovariance:
    def test_euclidean_oracle(self):
        rng = np.random.default_rng(18)
        x = rng.standard_normal((8, 2))
        y = rng.standard_normal((8, 3))
        w = np.full(8, 1.0 / 8)
        wx = WeightedSet(Euclidean(2), x, w)
        wy = WeightedSet(Euclidean(3), y, w)
        mx = ManifoldPoint(Euclidean(2), x.mean(axis=0))
        my = ManifoldPoint(Euclidean(3), y.mean(axis=0))
        got = sample_cross_covariance(wx, mx, wy, my)
        want = ((x - mx.coords).T * w) @ (y - my.coords)
        assert got.shape == (2, 3)
        assert np.allclose(got, want, atol=1e-14)

    def test_size_mismatch_rejected(self):
        w2 = WeightedSet(Euclidean(1), np.zeros((2, 1)), np.full(2, 0.5))
        w3 = WeightedSet(Euclidean(1), np.zeros((3, 1)), np.full(3, 1 / 3))
        mu = ManifoldPoint(Euclidean(1), np.zeros(1))
        with pytest.raises(ContractViolationError):
            sample_cross_covariance(w2, mu, w3, mu)

    def test_uses_cross_weight_family(self):
        x = np.array([[1.0], [-1.0]])
        wx = WeightedSet(
            Euclidean(1), x, np.array([0.5, 0.5]), w_cross=np.array([3.0, 3.0])
        )
        wy = WeightedSet(Euclidean(1), x, np.array([0.5, 0.5]))
        mu = ManifoldPoint(Euclidean(1), np.zeros(1))
        got = sample_cross_covariance(wx, mu, wy, mu)
        assert got[0, 0] == pytest.approx(6.0)
