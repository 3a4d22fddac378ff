"""Unit-quaternion helpers for attitude dynamics.

Quaternions are plain length-4 arrays in scalar-first order
``[eta, ex, ey, ez]``. The Hamilton product is left unnormalized so it can
act on non-unit arguments (e.g. the rate quaternion ``[0, omega]`` inside an
ODE right-hand side); callers renormalize where a unit result is required.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ContractViolationError

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def quat_mul(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product q1 * q2 (scalar-first, right-handed)."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != (4,) or q2.shape != (4,):
        raise ContractViolationError("quaternions must be length-4 vectors")
    eta1, eps1 = q1[0], q1[1:]
    eta2, eps2 = q2[0], q2[1:]
    out = np.empty(4)
    out[0] = eta1 * eta2 - eps1 @ eps2
    out[1:] = eta1 * eps2 + eta2 * eps1 + np.cross(eps1, eps2)
    return out


def quat_conj(q: np.ndarray) -> np.ndarray:
    """Conjugate (the inverse, for unit quaternions)."""
    q = np.asarray(q, dtype=float)
    return np.concatenate([q[:1], -q[1:]])


def left_product_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix L with ``L @ p == quat_mul(q, p)`` for every quaternion p.

    Orthogonal when ``q`` is unit, so repeated products reduce to matrix
    - vector multiplies.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ContractViolationError("quaternions must be length-4 vectors")
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def normalize(q: np.ndarray) -> np.ndarray:
    """Rescale to unit norm."""
    q = np.asarray(q, dtype=float)
    sq = float(q @ q)
    if sq == 0.0 or not math.isfinite(sq):
        raise ContractViolationError("cannot normalize a zero or non-finite quaternion")
    return q / math.sqrt(sq)


def rotation_quaternion(omega: np.ndarray, dt: float) -> np.ndarray:
    """Unit quaternion rotating by angular velocity ``omega`` held for ``dt``.

    Returns ``[cos(theta), sin(theta) * omega_hat]`` with
    ``theta = |omega| * dt / 2``; the identity when ``omega`` vanishes.
    """
    omega = np.asarray(omega, dtype=float)
    speed = float(np.linalg.norm(omega))
    if speed == 0.0:
        return IDENTITY.copy()
    theta = speed * dt / 2.0
    out = np.empty(4)
    out[0] = np.cos(theta)
    out[1:] = np.sin(theta) * (omega / speed)
    return out


def integrate_attitude(
    omega: Callable[[float], np.ndarray],
    q0: np.ndarray,
    dt: float,
    steps: int,
) -> np.ndarray:
    """Integrate dq/dt = (1/2) [0, omega(t)] * q with classical RK4.

    Returns a ``(steps + 1, 4)`` array starting at ``q0``; each step's result
    is renormalized so accumulated drift never leaves the unit sphere.
    """
    if dt <= 0.0:
        raise ContractViolationError("dt must be positive")
    if steps < 0:
        raise ContractViolationError("steps must be nonnegative")

    def deriv(t: float, q: np.ndarray) -> np.ndarray:
        rate = np.concatenate([[0.0], np.asarray(omega(t), dtype=float)])
        return 0.5 * quat_mul(rate, q)

    out = np.empty((steps + 1, 4))
    out[0] = normalize(q0)
    q = out[0]
    for i in range(steps):
        t = i * dt
        k1 = deriv(t, q)
        k2 = deriv(t + dt / 2.0, q + (dt / 2.0) * k1)
        k3 = deriv(t + dt / 2.0, q + (dt / 2.0) * k2)
        k4 = deriv(t + dt, q + dt * k3)
        q = normalize(q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        out[i + 1] = q
    return out
