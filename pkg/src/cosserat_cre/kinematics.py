"""Director frames, rotation-parameter maps and strain measures.

The polynomial maps (:func:`cubic_directors`, :func:`phi_from_nu`,
:func:`nu_from_phi`, :func:`strain_components`) only use ``+``, ``-`` and
``*``, so they accept floats, numpy arrays, :class:`~cosserat_cre.jets.Jet` and
:class:`~cosserat_cre.jets.PolyJet` alike. The exact frame uses trigonometry and
is numeric only.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import jets

__all__ = [
    "DegenerateAxisError",
    "DirectorState",
    "Frame",
    "RotParams",
    "angular_strain",
    "cross",
    "cubic_directors",
    "dot",
    "frame_cubic",
    "frame_exact",
    "nu_from_phi",
    "phi_from_nu",
    "strain_components",
    "tangent_nu",
    "tangent_params",
]

AMPLITUDE_GUARD = 0.5


class DegenerateAxisError(ValueError):
    """The rod axis tangent has zero length."""


@dataclass(frozen=True)
class DirectorState:
    nu1: float
    nu2: float
    nu3: float
    varphi: float = 0.0


@dataclass(frozen=True)
class RotParams:
    phix: float
    phiy: float
    phiz: float


@dataclass(frozen=True)
class Frame:
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Rotation matrix with the directors as columns."""
        return np.column_stack([self.d1, self.d2, self.d3])


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a, b):
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]


def _warn_amplitude(*vals):
    if max(abs(float(v)) for v in vals) > AMPLITUDE_GUARD:
        warnings.warn(
            f"amplitude above {AMPLITUDE_GUARD}: third-order maps lose accuracy",
            RuntimeWarning,
            stacklevel=3,
        )


def frame_exact(st: DirectorState) -> Frame:
    """Directors from ``R_b(nu) @ R_a(varphi)`` applied to the inertial basis."""
    n1, n2, n3, ph = st.nu1, st.nu2, st.nu3, st.varphi
    c, s = np.cos(ph), np.sin(ph)
    Ra = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    q = n1 * n1 + n2 * n2
    if q < 1e-14:
        Rb = np.eye(3)
    else:
        # ratio = (nu3 - 1) / (nu1^2 + nu2^2); removable singularity at q = 0
        if q < 1e-6:
            ratio = -0.5 - q / 8.0 - q * q / 16.0
        else:
            ratio = (n3 - 1.0) / q
        off = n1 * n2 * ratio
        Rb = np.array(
            [
                [1.0 + n1 * n1 * ratio, off, n1],
                [off, 1.0 + n2 * n2 * ratio, n2],
                [-n1, -n2, n3],
            ]
        )
    R = Rb @ Ra
    return Frame(R[:, 0].copy(), R[:, 1].copy(), R[:, 2].copy())


def cubic_directors(nu1, nu2, vp):
    """Third-order polynomial directors; returns ``(d1, d2, d3)`` as 3-lists."""
    n11, n22, n12, vp2 = nu1 * nu1, nu2 * nu2, nu1 * nu2, vp * vp
    d1 = [
        1.0 - 0.5 * vp2 - 0.5 * n11 - 0.5 * n12 * vp,
        vp - 0.5 * n12 - 0.5 * n22 * vp - (1.0 / 6.0) * vp2 * vp,
        -nu1 - nu2 * vp + 0.5 * nu1 * vp2,
    ]
    d2 = [
        -vp - 0.5 * n12 + 0.5 * n11 * vp + (1.0 / 6.0) * vp2 * vp,
        1.0 - 0.5 * vp2 - 0.5 * n22 + 0.5 * n12 * vp,
        -nu2 + nu1 * vp + 0.5 * nu2 * vp2,
    ]
    d3 = [nu1, nu2, 1.0 - 0.5 * n11 - 0.5 * n22]
    return d1, d2, d3


def frame_cubic(st: DirectorState) -> Frame:
    _warn_amplitude(st.nu1, st.nu2, st.varphi)
    d1, d2, d3 = cubic_directors(st.nu1, st.nu2, st.varphi)
    return Frame(np.array(d1, dtype=float), np.array(d2, dtype=float), np.array(d3, dtype=float))


def phi_from_nu(*args):
    """Rotation-vector components through third order.

    Called with a :class:`DirectorState` it returns :class:`RotParams`; called
    with ``(nu1, nu2, varphi)`` of any scalar type it returns a tuple.
    """
    if len(args) == 1 and isinstance(args[0], DirectorState):
        st = args[0]
        _warn_amplitude(st.nu1, st.nu2, st.varphi)
        return RotParams(*(float(v) for v in phi_from_nu(st.nu1, st.nu2, st.varphi)))
    nu1, nu2, vp = args
    b = (1.0 / 6.0) * (nu1 * nu1 + nu2 * nu2 - 0.5 * vp * vp)
    phix = -nu2 + 0.5 * vp * nu1 - b * nu2
    phiy = nu1 + 0.5 * vp * nu2 + b * nu1
    phiz = vp - (1.0 / 12.0) * (nu1 * nu1 + nu2 * nu2) * vp
    return phix, phiy, phiz


def nu_from_phi(*args):
    """``(nu1, nu2, varphi)`` from rotation-vector components through third order.

    Called with :class:`RotParams` it returns a :class:`DirectorState` whose
    ``nu3`` completes the unit vector.
    """
    if len(args) == 1 and isinstance(args[0], RotParams):
        p = args[0]
        _warn_amplitude(p.phix, p.phiy, p.phiz)
        n1, n2, vp = (float(v) for v in nu_from_phi(p.phix, p.phiy, p.phiz))
        return DirectorState(n1, n2, float(np.sqrt(1.0 - n1 * n1 - n2 * n2)), vp)
    phix, phiy, phiz = args
    b = (1.0 / 6.0) * (phix * phix + phiy * phiy + phiz * phiz)
    nu1 = phiy + 0.5 * phix * phiz - b * phiy
    nu2 = -phix + 0.5 * phiy * phiz + b * phix
    vp = phiz + (1.0 / 12.0) * (phix * phix + phiy * phiy) * phiz
    return nu1, nu2, vp


def strain_components(d, dprime):
    """Components ``u_i = u . d_i`` of ``u = 1/2 sum_i d_i x d_i'``.

    ``d`` and ``dprime`` are sequences of three 3-vectors (any scalar type).
    """
    u = [0.0, 0.0, 0.0]
    for di, dpi in zip(d, dprime):
        c = cross(di, dpi)
        u = [u[k] + c[k] for k in range(3)]
    u = [0.5 * uk for uk in u]
    return [dot(u, di) for di in d]


def angular_strain(frame_field, sigma: float, h: float = 1e-3) -> np.ndarray:
    """Angular strain components in the moving basis at ``sigma``.

    ``frame_field`` maps ``sigma`` to a :class:`Frame`. If it provides a
    ``derivative`` attribute (a callable with the same signature returning the
    sigma-derivative of each director) that is used; otherwise the derivative
    is taken by a fourth-order central difference with step ``h``.
    """
    f0 = frame_field(sigma)
    d = [f0.d1, f0.d2, f0.d3]
    if hasattr(frame_field, "derivative"):
        fd = frame_field.derivative(sigma)
        dp = [np.asarray(fd.d1), np.asarray(fd.d2), np.asarray(fd.d3)]
    else:
        fp1, fm1 = frame_field(sigma + h), frame_field(sigma - h)
        fp2, fm2 = frame_field(sigma + 2 * h), frame_field(sigma - 2 * h)
        dp = []
        for name in ("d1", "d2", "d3"):
            a1, b1 = getattr(fp1, name), getattr(fm1, name)
            a2, b2 = getattr(fp2, name), getattr(fm2, name)
            dp.append((8.0 * (a1 - b1) - (a2 - b2)) / (12.0 * h))
    return np.array(strain_components(d, dp), dtype=float)


def tangent_nu(xp, yp, zp):
    """``(nu1, nu2, nu3, v3)`` from the tangent components; generic over scalar type."""
    v3 = jets.sqrt(xp * xp + yp * yp + zp * zp)
    inv = jets.recip(v3)
    return xp * inv, yp * inv, zp * inv, v3


def tangent_params(r_prime):
    """Direction cosines of the unit tangent and the stretch ``|r'|``."""
    r_prime = np.asarray(r_prime, dtype=float)
    v3 = float(np.linalg.norm(r_prime))
    if not v3 > 0.0:
        raise DegenerateAxisError("rod axis tangent has zero length")
    nu = r_prime / v3
    return DirectorState(float(nu[0]), float(nu[1]), float(nu[2]), 0.0), v3
