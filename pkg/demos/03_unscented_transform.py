"""Unscented transform for maps between manifolds.

Two cases on the sphere: a rotation (an isometry, so the transform should
move the mean exactly and leave the covariance spectrum alone) and a
genuinely nonlinear map into a different space.
"""

import numpy as np

from manifold_ukf import (
    Euclidean,
    ManifoldPoint,
    MinimumSymmetric,
    RandomPointEstimate,
    Sphere,
    unscented_transform,
)

sphere = Sphere(2)
base = ManifoldPoint(sphere, np.array([0.0, 0.6, 0.8]))
cov = np.array([[0.04, -0.01], [-0.01, 0.02]])
est = RandomPointEstimate(base, cov)

print("== rotation: an isometry of the sphere ==")
angle = 0.9
R = np.array(
    [
        [np.cos(angle), -np.sin(angle), 0.0],
        [np.sin(angle), np.cos(angle), 0.0],
        [0.0, 0.0, 1.0],
    ]
)

ut = unscented_transform(lambda p: ManifoldPoint(sphere, R @ p.coords), est, MinimumSymmetric())
print(f"distance(mean', R @ mean) = {sphere.dist(ut.mean.coords, R @ base.coords):.2e}")
print(f"covariance eigenvalues before {np.linalg.eigvalsh(cov)}")
print(f"covariance eigenvalues after  {np.linalg.eigvalsh(ut.cov)}")

print()
print("== nonlinear map into the plane, with cross-covariance ==")
plane = Euclidean(2)

def stereographic(p: ManifoldPoint) -> ManifoldPoint:
    x, y, z = p.coords
    return ManifoldPoint(plane, np.array([x, y]) / (1.0 + z))

ut = unscented_transform(stereographic, est, MinimumSymmetric(), cross=True)
print(f"projected mean       {ut.mean.coords}")
print(f"projected covariance\n{ut.cov}")
print(f"cross-covariance (state tangent x projected)\n{ut.cross_cov}")
