"""Element operators from jet-valued energies.

The strain energy of one element is integrated by Gauss-Legendre quadrature
with every field carried as a jet in the 12 nodal displacements ``q^e``; its
Hessian at ``q^e = 0`` is the stiffness matrix and its higher gradient terms
give the quadratic and cubic internal-force tensors. The kinetic energy uses
the order-1 shape fields only, with the jet variables read as nodal rates,
which yields a constant consistent mass matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .jets import Jet, jet_space
from .kinematics import cross, cubic_directors, strain_components, tangent_nu
from .section import SectionProperties
from .shapefn import FIELDS, ShapeSolution, jet_shape

__all__ = [
    "DEFAULT_QUADRATURE",
    "ElementBuildError",
    "ElementOperators",
    "build_element",
    "equivalent_nodal_loads",
    "kinetic_energy_density",
    "nonlinear_force",
    "nonlinear_jacobian",
    "nonlinear_potential",
    "strain_energy_density",
]

DEFAULT_QUADRATURE = 8
# monomials of degree 2 and 3 in JetSpace(12, 3)
_G_SPACE = jet_space(12, 3)
_G_SLICE = slice(_G_SPACE.degree_start[2], _G_SPACE.degree_start[4])


class ElementBuildError(ValueError):
    """Raised when the assembled element mass matrix is not positive definite."""


@dataclass(frozen=True)
class ElementOperators:
    """Linear and nonlinear operators of one 12-DOF element.

    ``G`` holds the same information as ``Q`` and ``C`` in compact form: row
    ``i`` lists the coefficient of every degree-2 and degree-3 monomial of
    ``q^e`` in ``g_i``, in the monomial order of ``JetSpace(12, 3)``.
    """

    M: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    G: np.ndarray
    l: float
    section: SectionProperties

    def __post_init__(self):
        for name in ("M", "K", "Q", "C", "G"):
            getattr(self, name).setflags(write=False)


def _gauss(n: int, l: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * l * (x + 1.0), 0.5 * l * w


# ---------------------------------------------------------------------------
# energy densities


def _lifted(sh: ShapeSolution, degree: int):
    space = jet_space(12, degree)
    return space, [sh.poly(f).lift(space) for f in FIELDS]


def strain_energy_density(sh: ShapeSolution, sec: SectionProperties, sigma: float, _fields=None) -> Jet:
    """Strain energy per unit length at ``sigma`` as a degree-4 jet in ``q^e``."""
    if _fields is None:
        _, _fields = _lifted(sh, 4)
    # a second-order local expansion is enough for curvature at the point
    x, y, z, vp = (p.taylor(sigma, 3) for p in _fields)
    nu1, nu2, _, v3 = tangent_nu(x.deriv(), y.deriv(), z.deriv())
    d = cubic_directors(nu1, nu2, vp)
    dp = [[c.deriv() for c in di] for di in d]
    u1, u2, u3 = (u.at(0.0) for u in strain_components(d, dp))
    e = v3.at(0.0) - 1.0
    return 0.5 * (sec.J11 * u1 * u1 + sec.J22 * u2 * u2 + sec.J33 * u3 * u3 + sec.K33 * e * e)


def _order1_rate_fields(sh: ShapeSolution):
    """Order-1 fields with the jet variables reinterpreted as nodal rates."""
    space = jet_space(12, 2)
    return space, [sh.orders[f][0].lift(space) for f in FIELDS]


def kinetic_energy_density(sh: ShapeSolution, sec: SectionProperties, sigma: float, _fields=None) -> Jet:
    """Kinetic energy per unit length at ``sigma`` as a quadratic jet in the nodal rates."""
    if _fields is None:
        _, _fields = _order1_rate_fields(sh)
    xd, yd, zd, vpd = (p.at(sigma) for p in _fields)
    xp, yp = _fields[0].deriv().at(sigma), _fields[1].deriv().at(sigma)
    # rates of the directors at the reference state
    d = cubic_directors(xp, yp, vpd)
    e = np.eye(3)
    w = [0.0, 0.0, 0.0]
    for i in range(3):
        ddot = [c.degree_part(1) for c in d[i]]
        c = cross(list(e[i]), ddot)
        w = [w[k] + c[k] for k in range(3)]
    w1, w2, w3 = (0.5 * wk for wk in w)
    return 0.5 * (
        sec.mu * (xd * xd + yd * yd + zd * zd)
        + sec.I11 * w1 * w1
        + sec.I22 * w2 * w2
        + sec.I33 * w3 * w3
    )


# ---------------------------------------------------------------------------
# coefficient extraction


def _hessian(U: Jet) -> np.ndarray:
    n = U.space.nvars
    H = np.zeros((n, n))
    sp = U.space
    for m in range(sp.degree_start[2], sp.degree_start[3]):
        i, j = sp.combos[m]
        if i == j:
            H[i, i] = 2.0 * U.c[m]
        else:
            H[i, j] = H[j, i] = U.c[m]
    return H


def _symmetric_tensor(grads, degree: int) -> np.ndarray:
    """``T[i, j1..jd]`` symmetric in the trailing indices with ``g_i = sum T q_j1..q_jd``."""
    n = len(grads)
    sp = grads[0].space
    T = np.zeros((n,) + (n,) * degree)
    for m in range(sp.degree_start[degree], sp.degree_start[degree + 1]):
        combo = sp.combos[m]
        perms = set(itertools.permutations(combo))
        for i, g in enumerate(grads):
            v = g.c[m]
            if v == 0.0:
                continue
            share = v / len(perms)
            for p in perms:
                T[(i,) + p] = share
    return T


def build_element(sec: SectionProperties, l: float, quadrature_points: int = DEFAULT_QUADRATURE) -> ElementOperators:
    """Consistent mass, stiffness and cubic internal-force operators of one element."""
    if not l > 0.0:
        raise ValueError("element length must be positive")
    if quadrature_points < 2:
        raise ValueError("need at least 2 quadrature points")
    sh = jet_shape(sec, float(l), 3)
    pts, wts = _gauss(int(quadrature_points), float(l))

    space4, f4 = _lifted(sh, 4)
    U = space4.zero()
    for s, w in zip(pts, wts):
        U = U + strain_energy_density(sh, sec, s, f4) * w

    space2, f1 = _order1_rate_fields(sh)
    T = space2.zero()
    for s, w in zip(pts, wts):
        T = T + kinetic_energy_density(sh, sec, s, f1) * w

    M = _hessian(T)
    K = _hessian(U)
    # gradient jets truncated at degree 3; lifting down is a prefix copy
    grads = [Jet(_G_SPACE, g.c[: _G_SPACE.size]) for g in U.gradient()]
    Q = _symmetric_tensor(grads, 2)
    C = _symmetric_tensor(grads, 3)
    G = np.stack([g.c[_G_SLICE] for g in grads])

    try:
        np.linalg.cholesky(M + 1e-300 * np.eye(12))
    except np.linalg.LinAlgError as exc:
        raise ElementBuildError("element mass matrix is not positive definite") from exc
    return ElementOperators(M=M, K=K, Q=Q, C=C, G=G, l=float(l), section=sec)


# ---------------------------------------------------------------------------
# nonlinear internal force


def monomials23(q) -> np.ndarray:
    """Degree-2 and degree-3 monomials of a 12-vector, in the order used by ``G``."""
    return _G_SPACE.monomial_values(q)[_G_SLICE]


def nonlinear_force(ops: ElementOperators, q) -> np.ndarray:
    """``g(q) = Q:qq + C:qqq``."""
    return ops.G @ monomials23(np.asarray(q, dtype=float))


def nonlinear_jacobian(ops: ElementOperators, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return 2.0 * np.einsum("ijk,k->ij", ops.Q, q) + 3.0 * np.einsum("ijkl,k,l->ij", ops.C, q, q)


def nonlinear_potential(ops: ElementOperators, q) -> float:
    """Cubic plus quartic part of the strain energy, whose gradient is ``g``."""
    q = np.asarray(q, dtype=float)
    g2 = np.einsum("ijk,j,k->i", ops.Q, q, q)
    g3 = np.einsum("ijkl,j,k,l->i", ops.C, q, q, q)
    return float(q @ g2 / 3.0 + q @ g3 / 4.0)


# ---------------------------------------------------------------------------
# distributed loads


def equivalent_nodal_loads(sh: ShapeSolution, xi_d=None, eta_d=None, quadrature_points: int = DEFAULT_QUADRATURE):
    """Consistent nodal loads of distributed force ``xi_d`` and torque ``eta_d``.

    ``xi_d(sigma, t)`` and ``eta_d(sigma, t)`` return 3-vectors in the inertial
    basis (either may be ``None``). Returns ``f(t) -> 12-vector``. Displacement
    and rotation sensitivities are those of the order-1 shape at ``q^e = 0``;
    the rotation vector is ``(-y', x', varphi)`` at that order.
    """
    if not sh.is_symbolic:
        raise TypeError("equivalent_nodal_loads needs a jet_shape solution")
    pts, wts = _gauss(int(quadrature_points), sh.l)
    lin = slice(1, 13)
    x, y, z, vp = (sh.orders[f][0] for f in FIELDS)

    def sens(p, s):
        return p.at(s).c[lin]

    Sr = np.stack([np.stack([sens(x, s), sens(y, s), sens(z, s)]) for s in pts])
    Sp = np.stack([np.stack([-sens(y.deriv(), s), sens(x.deriv(), s), sens(vp, s)]) for s in pts])

    def f(t: float) -> np.ndarray:
        out = np.zeros(12)
        for g, (s, w) in enumerate(zip(pts, wts)):
            if xi_d is not None:
                out += w * (Sr[g].T @ np.asarray(xi_d(s, t), dtype=float))
            if eta_d is not None:
                out += w * (Sp[g].T @ np.asarray(eta_d(s, t), dtype=float))
        return out

    return f


from .appendix import CantileverOracle, appendix_oracle, compare_with_oracle  # noqa: E402

__all__ += ["CantileverOracle", "appendix_oracle", "compare_with_oracle"]
