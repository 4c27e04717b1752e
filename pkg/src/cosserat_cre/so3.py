"""Rotation-vector algebra on SO(3).

Rotation vectors ``phi`` map to rotation matrices through the Rodrigues form of
the exponential map; :func:`log_rotmat` inverts it on the canonical branch
``|phi| <= pi``.
"""

import numpy as np

__all__ = ["spin", "exp_rotvec", "rot_angle", "log_rotmat", "exp_series"]

SMALL_ANGLE = 1e-4
NEAR_PI = 1e-3


def spin(a) -> np.ndarray:
    """Skew matrix ``S(a)`` with ``S(a) @ b == cross(a, b)``."""
    a1, a2, a3 = a
    return np.array([[0.0, -a3, a2], [a3, 0.0, -a1], [-a2, a1, 0.0]])


def exp_rotvec(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    th = float(np.linalg.norm(phi))
    S = spin(phi)
    if th < SMALL_ANGLE:
        t2 = th * th
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        a = np.sin(th) / th
        b = (1.0 - np.cos(th)) / (th * th)
    return np.eye(3) + a * S + b * (S @ S)


def exp_series(phi, nterms: int = 20) -> np.ndarray:
    """Partial sum of the matrix exponential series of ``S(phi)``."""
    S = spin(np.asarray(phi, dtype=float))
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, nterms):
        term = term @ S / k
        out = out + term
    return out


def _vee_antisym(R) -> np.ndarray:
    # (R - R^T) = 2 sin(th) S(n); returns 2 sin(th) n
    A = R - R.T
    return np.array([-A[1, 2], A[0, 2], -A[0, 1]])


def rot_angle(R) -> float:
    R = np.asarray(R, dtype=float)
    c = 0.5 * (np.trace(R) - 1.0)
    # atan2 keeps full precision near 0 and pi, where arccos does not
    return float(np.arctan2(0.5 * np.linalg.norm(_vee_antisym(R)), c))


def log_rotmat(R) -> np.ndarray:
    """Rotation vector of ``R`` with norm in ``[0, pi]``."""
    R = np.asarray(R, dtype=float)
    th = rot_angle(R)
    w = _vee_antisym(R)
    if th < SMALL_ANGLE:
        return 0.5 * (1.0 + th * th / 6.0) * w
    if th < np.pi - NEAR_PI:
        return th / (2.0 * np.sin(th)) * w

    # near pi: the symmetric part gives (1 - cos th) n n^T; take the axis from
    # its largest diagonal entry and the sign from the antisymmetric part
    B = 0.5 * (R + R.T) - np.cos(th) * np.eye(3)
    k = int(np.argmax(np.diag(B)))
    n = B[:, k] / np.linalg.norm(B[:, k])
    if np.dot(w, n) < 0.0:
        n = -n
    return th * n
