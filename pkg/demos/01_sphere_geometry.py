"""Geodesic geometry on the unit sphere.

Walks through the primitive operations every other piece of the package is
built from: exponential and logarithm maps, geodesic distance, parallel
transport and deterministic tangent frames.
"""

import numpy as np

from manifold_ukf import (
    ManifoldPoint,
    Sphere,
    distance,
    exp_map,
    from_coords,
    log_map,
    parallel_transport_cov,
    parallel_transport_vec,
    tangent_basis,
    to_coords,
)

man = Sphere(2)  # intrinsic dim 2, ambient dim 3
pole = ManifoldPoint(man, np.array([0.0, 0.0, 1.0]))

print("== exp / log round trip ==")
v = from_coords(pole, np.array([0.4, -0.3]))
q = exp_map(pole, v)
back = log_map(pole, q)
print(f"pole                 {pole.coords}")
print(f"exp_pole(v)          {q.coords}")
print(f"|log(exp(v)) - v|    {np.linalg.norm(back.ambient - v.ambient):.2e}")
print(f"distance(pole, q)    {distance(pole, q):.6f}  (= |v| = {v.norm:.6f})")

print()
print("== parallel transport is an isometry ==")
rng = np.random.default_rng(7)
b = rng.standard_normal(3)
target = ManifoldPoint(man, b / np.linalg.norm(b))
w = from_coords(pole, np.array([0.2, 0.5]))
moved = parallel_transport_vec(w, target)
print(f"|w| before transport {w.norm:.12f}")
print(f"|w| after transport  {moved.norm:.12f}")

# Covariances transport the same way: eigenvalues survive, axes rotate.
P = np.array([[0.05, 0.01], [0.01, 0.02]])
Pt = parallel_transport_cov(P, pole, target)
print(f"eigvals before       {np.linalg.eigvalsh(P)}")
print(f"eigvals after        {np.linalg.eigvalsh(Pt)}")

print()
print("== tangent frames ==")
basis = tangent_basis(target)
print(f"frame rows are orthonormal: frame @ frame.T =\n{basis.vectors @ basis.vectors.T}")
coords = to_coords(moved, basis)
print(f"transported w in the target frame: {coords}")
