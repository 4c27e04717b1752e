"""Global assembly, modal analysis and nonlinear time integration.

Global DOFs are numbered ``6 * node + k`` with ``k`` running over
``(X, Y, Z, PhiX, PhiY, PhiZ)``. Element interaction forces cancel on
assembly and are never formed. The equations of motion restricted to the
free DOFs read

    M_ff q'' + K_ff q + g_f(q) = f_f(t),

and the support actions follow from the restrained rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from ._accel import USE_NUMBA, njit
from .element import build_element, equivalent_nodal_loads, monomials23
from .jets import jet_space
from .section import SectionProperties
from .shapefn import jet_shape

__all__ = [
    "DistributedLoad",
    "GlobalSystem",
    "IntegratorError",
    "Mesh",
    "ModalResult",
    "PointLoad",
    "SingularMassError",
    "TimeSeries",
    "assemble",
    "build_system",
    "cbt_frequencies",
    "cbt_roots",
    "integrate",
    "modal",
    "partition",
]

PLANES = ("e1-e3", "e2-e3", "axial", "torsion")
# DOF families (offsets within a node) that carry each kind of motion
_FAMILIES = ((0, 4), (1, 3), (2,), (5,))
DOMINANCE_MARGIN = 0.10


class SingularMassError(ValueError):
    """The free-DOF mass matrix is not positive definite."""


class IntegratorError(RuntimeError):
    """The adaptive step size collapsed."""

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


# ---------------------------------------------------------------------------
# mesh and loads


@dataclass(frozen=True)
class Mesh:
    """Straight rod along ``e3``: node coordinates, element node pairs, sections, restraints."""

    nodes: tuple
    elements: tuple
    sections: tuple
    restrained: frozenset = frozenset()

    def __post_init__(self):
        n = len(self.nodes)
        if len(self.elements) != len(self.sections):
            raise ValueError("one section per element is required")
        used = set()
        for a, b in self.elements:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"element ({a}, {b}) refers to a missing node")
            if not self.nodes[b] > self.nodes[a]:
                raise ValueError(f"element ({a}, {b}) has non-positive length")
            span = (self.nodes[a], self.nodes[b])
            for lo, hi in used:
                if span[0] < hi and lo < span[1]:
                    raise ValueError(f"element ({a}, {b}) overlaps another element")
            used.add(span)
        for d in self.restrained:
            if not 0 <= d < 6 * n:
                raise ValueError(f"restrained DOF {d} does not exist")

    @classmethod
    def uniform(cls, length: float, n_elements: int, section: SectionProperties, clamp_base: bool = True):
        if n_elements < 1:
            raise ValueError("need at least one element")
        z = tuple(float(v) for v in np.linspace(0.0, length, n_elements + 1))
        elems = tuple((i, i + 1) for i in range(n_elements))
        restrained = frozenset(range(6)) if clamp_base else frozenset()
        return cls(z, elems, (section,) * n_elements, restrained)

    @property
    def ndof(self) -> int:
        return 6 * len(self.nodes)

    @property
    def lengths(self) -> tuple:
        return tuple(self.nodes[b] - self.nodes[a] for a, b in self.elements)

    def element_dofs(self, e: int) -> np.ndarray:
        a, b = self.elements[e]
        return np.r_[6 * a : 6 * a + 6, 6 * b : 6 * b + 6]


@dataclass(frozen=True)
class PointLoad:
    """Concentrated harmonic load ``amplitude * cos|sin(frequency * t + phase)``."""

    node: int
    dof: int
    amplitude: float
    frequency: float = 0.0
    phase: float = 0.0
    kind: str = "cos"

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise ValueError("kind must be 'cos' or 'sin'")
        if not 0 <= self.dof < 6:
            raise ValueError("dof must lie in 0..5")


@dataclass(frozen=True)
class DistributedLoad:
    """Uniform, time-constant distributed force along the whole rod (N/m)."""

    component: int
    amplitude: float

    def __post_init__(self):
        if self.component not in (0, 1, 2):
            raise ValueError("component must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# global system


@dataclass(frozen=True)
class GlobalSystem:
    mesh: Mesh
    M: np.ndarray
    K: np.ndarray
    element_ops: tuple
    point_loads: tuple = ()
    f_const: np.ndarray = None
    free: np.ndarray = field(default=None)
    restrained: np.ndarray = field(default=None)

    @property
    def ndof(self) -> int:
        return self.M.shape[0]

    def nonlinear_force(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        out = np.zeros(self.ndof)
        for e, ops in enumerate(self.element_ops):
            dofs = self.mesh.element_dofs(e)
            out[dofs] += ops.G @ monomials23(q[dofs])
        return out

    def nonlinear_potential(self, q) -> float:
        """Cubic plus quartic strain energy; by homogeneity ``q.g2/3 + q.g3/4``."""
        q = np.asarray(q, dtype=float)
        total = 0.0
        for e, ops in enumerate(self.element_ops):
            qe = q[self.mesh.element_dofs(e)]
            m = monomials23(qe)
            n2 = jet_space(12, 3).degree_start[3] - jet_space(12, 3).degree_start[2]
            total += qe @ (ops.G[:, :n2] @ m[:n2]) / 3.0 + qe @ (ops.G[:, n2:] @ m[n2:]) / 4.0
        return float(total)

    def load(self, t: float) -> np.ndarray:
        f = np.array(self.f_const, dtype=float)
        for p in self.point_loads:
            arg = p.frequency * t + p.phase
            f[6 * p.node + p.dof] += p.amplitude * (np.cos(arg) if p.kind == "cos" else np.sin(arg))
        return f

    def energy(self, q, v) -> float:
        """Kinetic plus strain energy for full-size displacement and rate vectors."""
        q, v = np.asarray(q, dtype=float), np.asarray(v, dtype=float)
        return float(0.5 * v @ self.M @ v + 0.5 * q @ self.K @ q + self.nonlinear_potential(q))


def assemble(mesh: Mesh, element_ops, point_loads=(), distributed=()) -> GlobalSystem:
    """Scatter element operators into global matrices and restrict loads."""
    n = mesh.ndof
    M = np.zeros((n, n))
    K = np.zeros((n, n))
    f_const = np.zeros(n)
    element_ops = tuple(element_ops)
    if len(element_ops) != len(mesh.elements):
        raise ValueError("one ElementOperators per element is required")
    for e, ops in enumerate(element_ops):
        dofs = mesh.element_dofs(e)
        M[np.ix_(dofs, dofs)] += ops.M
        K[np.ix_(dofs, dofs)] += ops.K
        for dl in distributed:
            sh = jet_shape(ops.section, ops.l, 3)
            xi = np.zeros(3)
            xi[dl.component] = dl.amplitude
            f_const[dofs] += equivalent_nodal_loads(sh, lambda s, t, xi=xi: xi)(0.0)
    for p in point_loads:
        if not 0 <= p.node < len(mesh.nodes):
            raise ValueError(f"load on missing node {p.node}")
    restrained = np.array(sorted(mesh.restrained), dtype=np.int64)
    free = np.array([d for d in range(n) if d not in mesh.restrained], dtype=np.int64)
    if free.size == 0:
        raise SingularMassError("no free DOFs")
    try:
        np.linalg.cholesky(M[np.ix_(free, free)])
    except np.linalg.LinAlgError as exc:
        raise SingularMassError("free-DOF mass matrix is not positive definite (insufficient constraints?)") from exc
    for a in (M, K, f_const):
        a.setflags(write=False)
    return GlobalSystem(mesh, M, K, element_ops, tuple(point_loads), f_const, free, restrained)


def build_system(mesh: Mesh, point_loads=(), distributed=(), quadrature_points: int = 8) -> GlobalSystem:
    """Build element operators (shared between identical elements) and assemble."""
    cache = {}
    ops = []
    for sec, l in zip(mesh.sections, mesh.lengths):
        key = (sec, round(l, 15))
        if key not in cache:
            cache[key] = build_element(sec, l, quadrature_points)
        ops.append(cache[key])
    return assemble(mesh, ops, point_loads, distributed)


@dataclass(frozen=True)
class FreeSystem:
    M: np.ndarray
    K: np.ndarray
    free: np.ndarray
    system: GlobalSystem

    def full(self, q_f) -> np.ndarray:
        q = np.zeros(self.system.ndof)
        q[self.free] = q_f
        return q

    def nonlinear_force(self, q_f) -> np.ndarray:
        return self.system.nonlinear_force(self.full(q_f))[self.free]

    def load(self, t: float) -> np.ndarray:
        return self.system.load(t)[self.free]


def partition(sys: GlobalSystem):
    """Free-DOF system and the support-reaction evaluator.

    The evaluator ``reactions(t, q_f, qdd_f)`` returns the actions the supports
    exert on the restrained DOFs with zero support motion.
    """
    f, r = sys.free, sys.restrained
    free_sys = FreeSystem(sys.M[np.ix_(f, f)], sys.K[np.ix_(f, f)], f, sys)
    M_rf, K_rf = sys.M[np.ix_(r, f)], sys.K[np.ix_(r, f)]

    def reactions(t, q_f, qdd_f):
        q = free_sys.full(q_f)
        return M_rf @ qdd_f + K_rf @ q_f + sys.nonlinear_force(q)[r] - sys.load(t)[r]

    return free_sys, reactions


# ---------------------------------------------------------------------------
# modal analysis


@dataclass(frozen=True)
class ModalResult:
    omega: np.ndarray
    shapes: np.ndarray
    planes: tuple
    fractions: np.ndarray

    def plane(self, name: str, count: int = None) -> np.ndarray:
        """Frequencies of the modes classified as ``name``, ascending."""
        w = np.array([o for o, p in zip(self.omega, self.planes) if p == name])
        return w if count is None else w[:count]


def _classify(fr: np.ndarray) -> str:
    order = np.argsort(fr)[::-1]
    if fr[order[0]] - fr[order[1]] < DOMINANCE_MARGIN:
        return "coupled"
    return PLANES[order[0]]


def modal(sys: GlobalSystem) -> ModalResult:
    """Natural frequencies (rad/s) of the linearized free system, ascending."""
    f = sys.free
    Mff, Kff = sys.M[np.ix_(f, f)], sys.K[np.ix_(f, f)]
    try:
        L = np.linalg.cholesky(Mff)
    except np.linalg.LinAlgError as exc:
        raise SingularMassError("free-DOF mass matrix is not positive definite") from exc
    Linv = scipy.linalg.solve_triangular(L, np.eye(len(f)), lower=True)
    A = Linv @ Kff @ Linv.T
    lam, Y = np.linalg.eigh(0.5 * (A + A.T))
    X = Linv.T @ Y
    omega = np.sqrt(np.clip(lam, 0.0, None))
    shapes = np.zeros((sys.ndof, len(f)))
    shapes[f] = X
    offsets = f % 6
    fractions = np.zeros((len(f), len(PLANES)))
    for k in range(len(f)):
        x = X[:, k]
        ke = x * (Mff @ x)
        tot = ke.sum()
        for p, fam in enumerate(_FAMILIES):
            fractions[k, p] = ke[np.isin(offsets, fam)].sum() / tot
    planes = tuple(_classify(fr) for fr in fractions)
    return ModalResult(omega, shapes, planes, fractions)


def _cbt_char(x: float) -> float:
    # cos(x) cosh(x) + 1 = 0 rescaled by 1/cosh to stay finite
    return np.cos(x) + 1.0 / np.cosh(x)


def cbt_roots(count: int, xtol: float = 1e-12) -> np.ndarray:
    """Ascending roots ``beta_n L`` of ``cos(x) cosh(x) = -1``."""
    out = []
    for n in range(1, count + 1):
        out.append(scipy.optimize.bisect(_cbt_char, (n - 1) * np.pi + 1e-9, n * np.pi, xtol=xtol, maxiter=200))
    return np.array(out)


def cbt_frequencies(Lt: float, EI: float, rhoA: float, count: int) -> np.ndarray:
    """Clamped-free Euler-Bernoulli frequencies (rad/s)."""
    if not (Lt > 0 and EI > 0 and rhoA > 0):
        raise ValueError("arguments must be positive")
    b = cbt_roots(count)
    return b**2 * np.sqrt(EI / (rhoA * Lt**4))


# ---------------------------------------------------------------------------
# time integration


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    free: np.ndarray
    ndof: int
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0

    def full(self, k: int):
        q = np.zeros(self.ndof)
        v = np.zeros(self.ndof)
        q[self.free] = self.q[k]
        v[self.free] = self.v[k]
        return q, v

    def dof(self, node: int, dof: int, rates: bool = False) -> np.ndarray:
        g = 6 * node + dof
        hit = np.nonzero(self.free == g)[0]
        if hit.size == 0:
            return np.zeros(len(self.t))
        return (self.v if rates else self.q)[:, hit[0]]

    def node_history(self, node: int) -> np.ndarray:
        return np.column_stack([self.dof(node, k) for k in range(6)])


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_E = _A[6] - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


# nonlinear internal force of all elements, subtracted from f in place


@njit
def _nonlinear_loops(q, f, edofs, grow, gcol, gval, gptr, parent, pvar):
    nm = parent.shape[0]
    mono = np.empty(nm)
    ge = np.empty(12)
    mono[0] = 1.0
    for e in range(edofs.shape[0]):
        for j in range(12):
            d = edofs[e, j]
            mono[1 + j] = q[d] if d >= 0 else 0.0
        for m in range(13, nm):
            mono[m] = mono[parent[m]] * mono[1 + pvar[m]]
        ge[:] = 0.0
        for p in range(gptr[e], gptr[e + 1]):
            ge[grow[p]] += gval[p] * mono[gcol[p]]
        for j in range(12):
            d = edofs[e, j]
            if d >= 0:
                f[d] -= ge[j]


def _nonlinear_numpy(q, f, edofs, grow, gcol, gval, gptr, parent, pvar):
    ne = edofs.shape[0]
    qx = np.append(q, 0.0)
    mono = np.ones((ne, parent.shape[0]))
    mono[:, 1:13] = qx[edofs]
    for lo, hi in ((13, 91), (91, parent.shape[0])):
        mono[:, lo:hi] = mono[:, parent[lo:hi]] * mono[:, 1 + pvar[lo:hi]]
    elem = np.repeat(np.arange(ne), np.diff(gptr))
    target = edofs[elem, grow]
    keep = target >= 0
    contrib = gval[keep] * mono[elem[keep], gcol[keep]]
    f -= np.bincount(target[keep], weights=contrib, minlength=f.shape[0])


_nonlinear = _nonlinear_loops if USE_NUMBA else _nonlinear_numpy


@njit
def _rhs(t, y, nf, Minv, MinvK, fconst, hdof, hamp, hom, hph, hkind, edofs, grow, gcol, gval, gptr, parent, pvar, nonlinear):
    q = y[:nf]
    v = y[nf:]
    f = fconst.copy()
    for k in range(hdof.shape[0]):
        arg = hom[k] * t + hph[k]
        f[hdof[k]] += hamp[k] * (np.cos(arg) if hkind[k] == 0 else np.sin(arg))
    if nonlinear:
        _nonlinear(q, f, edofs, grow, gcol, gval, gptr, parent, pvar)
    out = np.empty(2 * nf)
    out[:nf] = v
    out[nf:] = Minv @ f - MinvK @ q
    return out


@njit
def _energy2(y, nf, Mff, Kff):
    q = y[:nf]
    v = y[nf:]
    return q @ (Kff @ q) + v @ (Mff @ v)


@njit
def _dopri(y0, t0, t_end, out_dt, nout, tol, nf, Mff, Kff, Minv, MinvK, fconst, hdof, hamp, hom, hph, hkind,
           edofs, grow, gcol, gval, gptr, parent, pvar, nonlinear, C, A, E):
    n = y0.shape[0]
    Y = np.zeros((nout, n))
    Y[0] = y0
    y = y0.copy()
    t = t0
    span = t_end - t0
    h = min(out_dt, span) * 0.01
    k = np.zeros((7, n))
    stats = np.zeros(3, dtype=np.int64)  # accepted, rejected, rhs evaluations
    e_old = _energy2(y, nf, Mff, Kff)
    k[0] = _rhs(t, y, nf, Minv, MinvK, fconst, hdof, hamp, hom, hph, hkind, edofs, grow, gcol, gval, gptr, parent, pvar, nonlinear)
    stats[2] += 1
    iout = 1
    while iout < nout:
        t_next = t0 + iout * out_dt
        if t_next > t_end:
            t_next = t_end
        hh = min(h, t_next - t)
        if hh < 1e-12 * span:
            return Y, iout, t, False, stats
        for s in range(1, 7):
            ys = y.copy()
            for r in range(s):
                if A[s, r] != 0.0:
                    ys += (hh * A[s, r]) * k[r]
            k[s] = _rhs(t + C[s] * hh, ys, nf, Minv, MinvK, fconst, hdof, hamp, hom, hph, hkind, edofs, grow, gcol, gval, gptr, parent, pvar, nonlinear)
            stats[2] += 1
        ynew = ys  # the last stage is evaluated at the 5th-order solution
        delta = hh * (E @ k)
        # absolute part scaled by the current size of each half of the state
        # (displacements, rates), so step control does not depend on amplitude
        big = np.maximum(np.abs(y), np.abs(ynew))
        sq = big[:nf].max()
        sv = big[nf:].max()
        scale = np.empty(n)
        scale[:nf] = sq if sq > 0.0 else 1.0
        scale[nf:] = sv if sv > 0.0 else 1.0
        err = np.sqrt(np.mean((delta / (tol * (scale + big))) ** 2))
        # the same estimate in the linear energy norm weights each mode by its
        # frequency, which keeps small stiff components from leaking energy
        e_new = _energy2(ynew, nf, Mff, Kff)
        if e_new > 0.0:
            err = max(err, np.sqrt(_energy2(delta, nf, Mff, Kff) / max(e_new, e_old)) / tol)
        if not np.isfinite(err):
            stats[1] += 1
            h = hh * 0.2
            continue
        if err > 1.0:
            stats[1] += 1
            h = hh * max(0.2, 0.9 * err**-0.2)
            continue
        stats[0] += 1
        t = t + hh
        y = ynew
        e_old = e_new
        k[0] = k[6]
        if abs(t - t_next) <= 1e-12 * span:
            t = t_next
            Y[iout] = y
            iout += 1
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
        # a step shortened to land on the output grid does not limit the next one
        h = max(h, hh * fac) if hh < h else hh * fac
    return Y, iout, t, True, stats


def _element_tables(sys: GlobalSystem):
    pos = -np.ones(sys.ndof, dtype=np.int64)
    pos[sys.free] = np.arange(len(sys.free))
    ne = len(sys.element_ops)
    edofs = np.zeros((ne, 12), dtype=np.int64)
    rows, cols, vals, ptr = [], [], [], [0]
    off = jet_space(12, 3).degree_start[2]
    for e, ops in enumerate(sys.element_ops):
        edofs[e] = pos[sys.mesh.element_dofs(e)]
        r, c = np.nonzero(ops.G)
        # column-major order keeps consecutive updates on different rows
        o = np.lexsort((r, c))
        r, c = r[o], c[o]
        rows.append(r)
        cols.append(c + off)
        vals.append(ops.G[r, c])
        ptr.append(ptr[-1] + len(r))
    return (edofs, np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64),
            np.concatenate(vals), np.array(ptr, dtype=np.int64))


def integrate(sys: GlobalSystem, t_end: float, tol: float = 1e-8, output_dt: float = 1e-3,
              q0=None, v0=None, nonlinear: bool = True) -> TimeSeries:
    """Integrate the free-DOF equations of motion from ``t = 0`` to ``t_end``.

    ``q0`` and ``v0`` are free-DOF initial displacements and rates (zero by
    default). Outputs are taken on the grid ``k * output_dt``.
    """
    if not (t_end > 0 and tol > 0 and output_dt > 0):
        raise ValueError("t_end, tol and output_dt must be positive")
    f = sys.free
    nf = len(f)
    Mff, Kff = sys.M[np.ix_(f, f)], sys.K[np.ix_(f, f)]
    cho = scipy.linalg.cho_factor(Mff)
    Minv = scipy.linalg.cho_solve(cho, np.eye(nf))
    MinvK = scipy.linalg.cho_solve(cho, Kff)
    pos = -np.ones(sys.ndof, dtype=np.int64)
    pos[f] = np.arange(nf)
    fconst = np.array(sys.f_const[f])
    loads = [p for p in sys.point_loads if pos[6 * p.node + p.dof] >= 0]
    hdof = np.array([pos[6 * p.node + p.dof] for p in loads], dtype=np.int64)
    hamp = np.array([p.amplitude for p in loads], dtype=float)
    hom = np.array([p.frequency for p in loads], dtype=float)
    hph = np.array([p.phase for p in loads], dtype=float)
    hkind = np.array([0 if p.kind == "cos" else 1 for p in loads], dtype=np.int64)
    edofs, grow, gcol, gval, gptr = _element_tables(sys)
    sp = jet_space(12, 3)
    y0 = np.zeros(2 * nf)
    if q0 is not None:
        y0[:nf] = q0
    if v0 is not None:
        y0[nf:] = v0
    nout = int(np.floor(t_end / output_dt + 1e-9)) + 1
    Y, iout, t_last, ok, stats = _dopri(y0, 0.0, float(t_end), float(output_dt), nout, float(tol), nf, Mff, Kff, Minv, MinvK,
                                 fconst, hdof, hamp, hom, hph, hkind, edofs, grow, gcol, gval, gptr,
                                 sp.parent, sp.pvar, bool(nonlinear), _C, _A, _E)
    if not ok:
        raise IntegratorError(f"step size collapsed at t = {t_last!r}", float(t_last))
    times = np.arange(nout) * output_dt
    return TimeSeries(times, Y[:, :nf].copy(), Y[:, nf:].copy(), f.copy(), sys.ndof,
                      int(stats[0]), int(stats[1]), int(stats[2]))
