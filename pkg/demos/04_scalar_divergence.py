"""A one-dimensional problem that breaks the noise-blind baseline.

Identity dynamics, measurement y = 1 - x, unit process and measurement
noise, and the measurement pinned at 1. On this affine system the
additive-noise filter reproduces the linear Kalman filter digit for digit.
The noise-blind baseline has no mechanism to re-inflate its covariance, so
its variance collapses to zero after one update and the second update
destroys positive definiteness.
"""

import numpy as np

from manifold_ukf import (
    AdditiveSystem,
    Euclidean,
    FilterState,
    ManifoldPoint,
    NoiseSpec,
    PositivenessLossError,
    additive_step,
    linear_kf_step,
    noise_blind_step,
)

line = Euclidean(1)
unit = np.eye(1)

def f(x, k):
    return x

def h(x, k):
    return ManifoldPoint(line, 1.0 - x.coords)

system = AdditiveSystem(line, line, f, h, NoiseSpec(unit), NoiseSpec(unit))
y = ManifoldPoint(line, np.array([1.0]))
prior = FilterState(ManifoldPoint(line, np.array([1.0])), unit)

kf, ukf, blind = prior, prior, prior
blind_txt = None
print(f"{'step':>4s} {'KF x':>12s} {'UKF x':>12s} {'|diff|':>9s} {'blind x':>12s}")
for k in range(1, 9):
    kf = linear_kf_step(kf, unit, -unit, unit, unit, y, h_offset=np.array([1.0]))
    ukf = additive_step(ukf, system, y)
    diff = abs(kf.point.coords[0] - ukf.point.coords[0])
    if blind_txt is None:
        try:
            blind = noise_blind_step(blind, f, h, y)
            row = f"{blind.point.coords[0]:12.8f}"
        except PositivenessLossError as err:
            blind_txt = row = f"lost PSD at step {err.step}"
    else:
        row = ""
    print(f"{k:4d} {kf.point.coords[0]:12.8f} {ukf.point.coords[0]:12.8f} "
          f"{diff:9.1e} {row}")

print()
print(f"step 1 corrects the prior (1, 1) to (1/3, 2/3); both filters report "
      f"variance {ukf.cov[0, 0]:.6f} by step 8")
