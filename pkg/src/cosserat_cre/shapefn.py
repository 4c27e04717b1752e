"""Perturbation shape functions of a straight, shear-free rod element.

The element occupies ``0 <= sigma <= l`` along ``e3``. Its quasi-static
deformation under prescribed end displacements and rotation vectors is
expanded in the nodal amplitude, ``field = sum_k field_k``, where ``field_k`` is
homogeneous of degree ``k`` in the 12 nodal values and polynomial in
``sigma``. Each order is found by undetermined coefficients: the static
balance laws are expanded with jets, the order-``k`` residual is collected
sigma-power by sigma-power, and the resulting linear system (the linearized
rod operator plus boundary rows) is solved for the order-``k`` coefficients.

Two carriers share that code path:

* :func:`solve_shape` works in a one-variable jet space whose variable is the
  perturbation parameter; nodal values are numbers.
* :func:`jet_shape` keeps the 12 nodal values symbolic, so every coefficient is
  a polynomial in ``q^e``. This is what the element operators are built from.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet, JetSpace, PolyJet, jet_space
from .kinematics import cubic_directors, nu_from_phi, strain_components, tangent_nu
from .section import SectionProperties

__all__ = [
    "DOF_NAMES",
    "FIELDS",
    "NodalDisplacement",
    "ShapeSolution",
    "ShapeSolveError",
    "eval_shape",
    "jet_shape",
    "solve_shape",
    "static_residual",
]

FIELDS = ("x", "y", "z", "phi")
DOF_NAMES = ("X", "Y", "Z", "PhiX", "PhiY", "PhiZ")
MAX_ANSATZ_DEGREE = 11
SNAP = 1e-13


class ShapeSolveError(RuntimeError):
    """The order-by-order system stayed inconsistent up to the ansatz degree cap."""


@dataclass(frozen=True)
class NodalDisplacement:
    X: float = 0.0
    Y: float = 0.0
    Z: float = 0.0
    PhiX: float = 0.0
    PhiY: float = 0.0
    PhiZ: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z, self.PhiX, self.PhiY, self.PhiZ], dtype=float)

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))


@dataclass
class ShapeSolution:
    """Per-field, per-order sigma-polynomials of an element shape.

    ``orders[f][k - 1]`` is the order-``k`` part of field ``f``: a float array of
    sigma-coefficients (numeric solution) or a :class:`PolyJet` whose jet
    coefficients are homogeneous of degree ``k`` in ``q^e`` (symbolic
    solution). The reference term ``sigma`` of ``z`` is not stored.
    """

    l: float
    order: int
    section: SectionProperties
    orders: dict
    space: JetSpace = None
    residuals: list = field(default_factory=list)

    @property
    def is_symbolic(self) -> bool:
        return self.space is not None

    def poly(self, f: str, upto: int = None):
        """Sum of orders ``1..upto`` of field ``f`` (plus ``sigma`` for ``z``)."""
        upto = self.order if upto is None else upto
        if self.is_symbolic:
            out = PolyJet.sigma(self.space) if f == "z" else PolyJet.const(self.space, 0.0)
            for k in range(upto):
                out = out + self.orders[f][k]
            return out
        n = max(len(c) for c in self.orders[f][:upto]) if upto else 1
        out = np.zeros(max(n, 2))
        if f == "z":
            out[1] = 1.0
        for c in self.orders[f][:upto]:
            out[: len(c)] += c
        return out

    def specialize(self, qe) -> "ShapeSolution":
        """Numeric shape at the nodal vector ``qe`` (symbolic solutions only)."""
        if not self.is_symbolic:
            raise TypeError("solution is already numeric")
        vals = self.space.monomial_values(np.asarray(qe, dtype=float))
        orders = {f: [pj.c @ vals for pj in self.orders[f]] for f in FIELDS}
        return ShapeSolution(self.l, self.order, self.section, orders)

    def coefficient_table(self, snap: float = SNAP):
        """Rows ``(field, order, sigma_power, monomial, coefficient)`` of nonzero terms.

        Within each sigma-polynomial (one field, order and monomial) entries
        below ``snap`` times its largest coefficient are dropped.
        """
        rows = []
        for f in FIELDS:
            for k, part in enumerate(self.orders[f], start=1):
                if self.is_symbolic:
                    for i in range(self.space.degree_start[k], self.space.degree_start[k + 1]):
                        col = part.c[:, i]
                        big = np.abs(col).max(initial=0.0)
                        for s in np.nonzero(np.abs(col) > snap * big)[0]:
                            rows.append((f, k, int(s), tuple(int(e) for e in self.space.exponents[i]), float(col[s])))
                else:
                    big = np.abs(part).max(initial=0.0)
                    for s in np.nonzero(np.abs(part) > snap * big)[0]:
                        rows.append((f, k, int(s), None, float(part[s])))
        return rows


# ---------------------------------------------------------------------------
# static balance laws


def static_residual(x, y, z, vp, sec: SectionProperties):
    """Residuals of the shear-free static equations for sigma-polynomial fields.

    Returns ``(force, torque)``: the three inertial components of ``n'`` and the
    twisting-moment balance ``m3' + u1 m2 - u2 m1``. The bending balances are
    used to eliminate the transverse contact forces ``n1`` and ``n2``.
    """
    xp, yp, zp = x.deriv(), y.deriv(), z.deriv()
    nu1, nu2, _, v3 = tangent_nu(xp, yp, zp)
    d = cubic_directors(nu1, nu2, vp)
    dp = [[c.deriv() for c in di] for di in d]
    u1, u2, u3 = strain_components(d, dp)
    m1, m2, m3 = sec.J11 * u1, sec.J22 * u2, sec.J33 * u3
    inv = v3.recip()
    n1 = -(m2.deriv() + u3 * m1 - u1 * m3) * inv
    n2 = (m1.deriv() + u2 * m3 - u3 * m2) * inv
    n3 = sec.K33 * (v3 - 1.0)
    d1, d2, d3 = d
    force = [(n1 * d1[i] + n2 * d2[i] + n3 * d3[i]).deriv() for i in range(3)]
    torque = m3.deriv() + u1 * m2 - u2 * m1
    return force + [torque]


def _boundary_values(x, y, z, vp, l):
    """Values constrained at the ends, in the order of :func:`_boundary_targets`."""
    xp, yp, zp = x.deriv(), y.deriv(), z.deriv()
    nu1, nu2, _, _ = tangent_nu(xp, yp, zp)
    out = []
    for s in (0.0, l):
        out += [x.at(s), y.at(s), z.at(s)]
    for s in (0.0, l):
        out += [nu1.at(s), nu2.at(s), vp.at(s)]
    return out


def _boundary_targets(space, qa, qb, l):
    """Prescribed end values: positions, then (nu1, nu2, varphi) from nodal rotation vectors."""
    out = [qa[0], qa[1], qa[2], qb[0], qb[1], qb[2] + l]
    for q in (qa, qb):
        out += list(nu_from_phi(q[3], q[4], q[5]))
    return out


def _reference_fields(space):
    zero = PolyJet.const(space, 0.0)
    return [zero, zero, PolyJet.sigma(space), zero]


# ---------------------------------------------------------------------------
# linearized operator by probing


def _basis_count(N):
    return 4 * (N + 1)


@functools.lru_cache(maxsize=64)
def _linear_operator(sec: SectionProperties, l: float, N: int):
    """Linearization of the residual rows about the straight reference state.

    Columns are the sigma-coefficients (powers ``0..N``) of the order-``k``
    corrections of x, y, z, varphi; rows are the sigma-coefficients of the four
    balance laws followed by the 12 boundary rows. Obtained by evaluating the
    residual on a degree-1 jet space with one variable per basis polynomial,
    so it is exactly the operator the full residual uses.
    """
    nb = _basis_count(N)
    sp = jet_space(nb, 1)
    ref = _reference_fields(sp)
    pert = []
    for f in range(4):
        c = np.zeros((N + 1, sp.size))
        for s in range(N + 1):
            c[s, 1 + f * (N + 1) + s] = 1.0
        pert.append(ref[f] + PolyJet(sp, c))
    eqs = static_residual(*pert, sec)
    bcs = _boundary_values(*pert, l)
    eq_blocks = [e.c[:, 1:] for e in eqs]
    bc_rows = np.stack([b.c[1:] for b in bcs])
    return eq_blocks, bc_rows


def _assemble_rows(eq_blocks, bc_rows, eq_rhs, bc_rhs):
    """Stack operator and right-hand side with matching sigma rows, scaled per row."""
    A_parts, B_parts = [], []
    for blk, rhs in zip(eq_blocks, eq_rhs):
        n = max(blk.shape[0], rhs.shape[0])
        a = np.zeros((n, blk.shape[1]))
        a[: blk.shape[0]] = blk
        b = np.zeros((n, rhs.shape[1]))
        b[: rhs.shape[0]] = rhs
        A_parts.append(a)
        B_parts.append(b)
    A_parts.append(bc_rows)
    B_parts.append(bc_rhs)
    A = np.vstack(A_parts)
    B = np.vstack(B_parts)
    scale = np.abs(A).max(axis=1)
    scale[scale == 0.0] = 1.0
    return A / scale[:, None], B / scale[:, None]


def _solve_orders(space: JetSpace, qa, qb, sec: SectionProperties, l: float, order: int):
    fields = _reference_fields(space)
    targets = _boundary_targets(space, qa, qb, l)
    parts = {f: [] for f in FIELDS}
    residuals = []
    for k in range(1, order + 1):
        sk = space.degree_slice(k)
        # degree <= k coefficients are a prefix of the full space, so order k
        # is solved and checked in the cheaper degree-k space
        sub = jet_space(space.nvars, k)
        sub_fields = [f.lift(sub) for f in fields]
        sub_targets = [t.lift(sub) if isinstance(t, Jet) else t for t in targets]
        eqs = static_residual(*sub_fields, sec)
        bvals = _boundary_values(*sub_fields, l)
        eq_rhs = [-e.c[:, sk] for e in eqs]
        bc_rhs = np.stack([-(b - t).c[sk] for b, t in zip(bvals, sub_targets)])
        bnorm = max(max(np.abs(r).max(initial=0.0) for r in eq_rhs), np.abs(bc_rhs).max(initial=0.0))

        N = 2 * k + 1
        report = []
        while True:
            eq_blocks, bc_rows = _linear_operator(sec, l, N)
            A, B = _assemble_rows(eq_blocks, bc_rows, eq_rhs, bc_rhs)
            C, *_ = np.linalg.lstsq(A, B, rcond=None)
            res = np.abs(A @ C - B).max(initial=0.0)
            report.append((N, res))
            if res <= 1e-10 * max(np.abs(B).max(initial=0.0), 1e-300) or bnorm == 0.0:
                break
            N += 2
            if N > MAX_ANSATZ_DEGREE:
                raise ShapeSolveError(
                    f"order {k}: residual system inconsistent up to sigma-degree {MAX_ANSATZ_DEGREE}; "
                    f"(degree, residual) trail: {report}"
                )

        for f_i, f in enumerate(FIELDS):
            coef = np.zeros((N + 1, space.size))
            coef[:, sk] = C[f_i * (N + 1) : (f_i + 1) * (N + 1)]
            pj = PolyJet(space, coef).trimmed()
            parts[f].append(pj)
            fields[f_i] = fields[f_i] + pj

        # verify: residual of orders <= k must vanish identically
        sub_fields = [f.lift(sub) for f in fields]
        eqs = static_residual(*sub_fields, sec)
        bvals = _boundary_values(*sub_fields, l)
        eq_res = max(np.abs(e.c).max(initial=0.0) for e in eqs)
        bc_res = max(np.abs((b - t).c).max(initial=0.0) for b, t in zip(bvals, sub_targets))
        residuals.append(
            {
                "order": k,
                "ansatz_degree": N,
                "equation": float(eq_res),
                "boundary": float(bc_res),
                "initial": float(bnorm),
                "relative": float(max(eq_res, bc_res) / bnorm) if bnorm > 0.0 else 0.0,
            }
        )
    return parts, residuals


def _nodal_jets_numeric(space, qa, qb):
    eps = space.var(0)
    return [eps * float(v) for v in qa], [eps * float(v) for v in qb]


def solve_shape(qa, qb, sec: SectionProperties, l: float, order: int = 3) -> ShapeSolution:
    """Numeric shape for given nodal displacements (``NodalDisplacement`` or 6-arrays)."""
    if not l > 0.0:
        raise ValueError("element length must be positive")
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    qa = qa.as_array() if isinstance(qa, NodalDisplacement) else np.asarray(qa, dtype=float)
    qb = qb.as_array() if isinstance(qb, NodalDisplacement) else np.asarray(qb, dtype=float)
    space = jet_space(1, order)
    ja, jb = _nodal_jets_numeric(space, qa, qb)
    parts, residuals = _solve_orders(space, ja, jb, sec, float(l), order)
    orders = {}
    for f in FIELDS:
        # the order-k part sits on the eps^k column
        orders[f] = [pj.c[:, space.degree_start[k]].copy() for k, pj in enumerate(parts[f], start=1)]
    return ShapeSolution(float(l), order, sec, orders, residuals=residuals)


@functools.lru_cache(maxsize=32)
def jet_shape(sec: SectionProperties, l: float, order: int = 3) -> ShapeSolution:
    """Shape with the 12 nodal values ``q^e = (q_a, q_b)`` kept as jet variables."""
    if not l > 0.0:
        raise ValueError("element length must be positive")
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    space = jet_space(12, order)
    q = space.variables()
    parts, residuals = _solve_orders(space, q[:6], q[6:], sec, float(l), order)
    return ShapeSolution(float(l), order, sec, parts, space=space, residuals=residuals)


def _polyval(c, s):
    return float(np.polynomial.polynomial.polyval(s, c))


def eval_shape(sh: ShapeSolution, sigma: float):
    """Values and sigma-derivatives of ``(x, y, z, varphi)`` at ``sigma``.

    Returns two tuples ``(values, derivatives)``. Symbolic solutions return jets.
    """
    tol = 1e-12 * max(1.0, sh.l)
    if sigma < -tol or sigma > sh.l + tol:
        raise ValueError(f"sigma={sigma} outside [0, {sh.l}]")
    vals, ders = [], []
    for f in FIELDS:
        p = sh.poly(f)
        if sh.is_symbolic:
            vals.append(p.at(sigma))
            ders.append(p.deriv().at(sigma))
        else:
            vals.append(_polyval(p, sigma))
            ders.append(_polyval(np.polynomial.polynomial.polyder(p), sigma))
    return tuple(vals), tuple(ders)
