"""Truncated multivariate polynomial ("jet") arithmetic.

A :class:`Jet` is a polynomial in ``nvars`` variables truncated at total degree
``max_degree``. Coefficients live in a dense vector indexed by the monomials of
a :class:`JetSpace`, in graded lexicographic order (degree first, then the
sorted variable tuple). A :class:`PolyJet` is a polynomial in the arc-length
coordinate ``sigma`` whose coefficients are jets; it is the carrier for the
perturbation expansion of the rod fields.

The degree-``d`` monomials of a space occupy a contiguous slice, and the
monomials of ``JetSpace(n, d)`` are a prefix of those of ``JetSpace(n, d + 1)``,
so lifting between truncation orders is zero padding.
"""

from __future__ import annotations

import functools
import itertools
from math import factorial

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "JetDomainError",
    "JetSpace",
    "Jet",
    "PolyJet",
    "jet_space",
    "jet_add",
    "jet_mul",
    "jet_sqrt",
    "jet_recip",
    "jet_gradient_coeffs",
    "sqrt",
    "recip",
]


class JetDomainError(ValueError):
    """Raised when sqrt/recip is taken of a jet whose constant term is not positive."""


class JetSpace:
    """Monomial basis and multiplication tables for ``(nvars, max_degree)``.

    Use :func:`jet_space` to obtain instances; spaces are cached and compared by
    identity.
    """

    def __init__(self, nvars: int, max_degree: int):
        if nvars < 1 or max_degree < 0:
            raise ValueError("need nvars >= 1 and max_degree >= 0")
        self.nvars = nvars
        self.max_degree = max_degree

        combos = []
        starts = []
        for d in range(max_degree + 1):
            starts.append(len(combos))
            combos.extend(itertools.combinations_with_replacement(range(nvars), d))
        starts.append(len(combos))
        self.size = len(combos)
        self.degree_start = tuple(starts)
        self.combos = combos
        self._index = {c: i for i, c in enumerate(combos)}

        exps = np.zeros((self.size, nvars), dtype=np.int64)
        for i, c in enumerate(combos):
            for v in c:
                exps[i, v] += 1
        self.exponents = exps
        self.degrees = exps.sum(axis=1)

        parent = np.zeros(self.size, dtype=np.int64)
        pvar = np.zeros(self.size, dtype=np.int64)
        for i, c in enumerate(combos[1:], start=1):
            parent[i] = self._index[c[:-1]]
            pvar[i] = c[-1]
        self.parent = parent
        self.pvar = pvar

        ia, ib, ic = [], [], []
        for i, ci in enumerate(combos):
            for j in range(self.degree_start[max_degree - len(ci) + 1]):
                ia.append(i)
                ib.append(j)
                ic.append(self._index[tuple(sorted(ci + combos[j]))])
        self.mul_a = np.asarray(ia, dtype=np.int64)
        self.mul_b = np.asarray(ib, dtype=np.int64)
        self.mul_c = np.asarray(ic, dtype=np.int64)

        self._deriv = []
        for v in range(nvars):
            src = np.nonzero(exps[:, v] > 0)[0]
            dst = np.empty_like(src)
            for k, i in enumerate(src):
                c = list(combos[i])
                c.remove(v)
                dst[k] = self._index[tuple(c)]
            self._deriv.append((src, dst, exps[src, v].astype(float)))

    @functools.cached_property
    def product_table(self) -> np.ndarray:
        """``ptab[i, j]`` is the index of monomial i times monomial j (-1 past the truncation)."""
        t = np.full((self.size, self.size), -1, dtype=np.int64)
        t[self.mul_a, self.mul_b] = self.mul_c
        return t

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, max_degree={self.max_degree})"

    def index(self, exponents) -> int:
        """Position of the monomial with the given exponent tuple."""
        combo = tuple(v for v, e in enumerate(exponents) for _ in range(int(e)))
        if len(exponents) != self.nvars or combo not in self._index:
            raise KeyError(f"monomial {tuple(exponents)} not in {self!r}")
        return self._index[combo]

    def degree_slice(self, d: int) -> slice:
        return slice(self.degree_start[d], self.degree_start[d + 1])

    def monomial_values(self, x) -> np.ndarray:
        """Values of every basis monomial at the point ``x``."""
        x = np.asarray(x, dtype=float)
        vals = np.empty(self.size)
        vals[0] = 1.0
        for d in range(1, self.max_degree + 1):
            s = self.degree_slice(d)
            vals[s] = vals[self.parent[s]] * x[self.pvar[s]]
        return vals

    def zero(self) -> "Jet":
        return Jet(self, np.zeros(self.size))

    def const(self, value: float) -> "Jet":
        c = np.zeros(self.size)
        c[0] = value
        return Jet(self, c)

    def var(self, i: int, value: float = 0.0) -> "Jet":
        """The jet ``value + x_i``."""
        if self.max_degree < 1:
            return self.const(value)
        c = np.zeros(self.size)
        c[0] = value
        c[1 + i] = 1.0
        return Jet(self, c)

    def variables(self):
        return [self.var(i) for i in range(self.nvars)]


@functools.lru_cache(maxsize=None)
def jet_space(nvars: int, max_degree: int) -> JetSpace:
    return JetSpace(nvars, max_degree)


# ---------------------------------------------------------------------------
# product kernels: out[s1 + s2, ptab[i, j]] += a[s1, i] * b[s2, j]
# Only nonzero coefficients are visited; monomials are in graded order, so the
# inner loop stops once the degree budget is exhausted.


@njit
def _nonzero_rows(a):
    idx = np.empty(a.shape, dtype=np.int64)
    cnt = np.zeros(a.shape[0], dtype=np.int64)
    for s in range(a.shape[0]):
        for i in range(a.shape[1]):
            if a[s, i] != 0.0:
                idx[s, cnt[s]] = i
                cnt[s] += 1
    return idx, cnt


@njit
def _polymul_loops(a, b, ptab, degrees, max_degree, nrows):
    out = np.zeros((nrows, a.shape[1]))
    ia, ca = _nonzero_rows(a)
    ib, cb = _nonzero_rows(b)
    for s1 in range(a.shape[0]):
        for s2 in range(b.shape[0]):
            s = s1 + s2
            if s >= nrows:
                break
            for p in range(ca[s1]):
                i = ia[s1, p]
                x = a[s1, i]
                lim = max_degree - degrees[i]
                for q in range(cb[s2]):
                    j = ib[s2, q]
                    if degrees[j] > lim:
                        break
                    out[s, ptab[i, j]] += x * b[s2, j]
    return out


def _polymul_numpy(a, b, ptab, degrees, max_degree, nrows):
    n = a.shape[1]
    out = np.zeros((nrows, n))
    # graded order: monomials of degree <= d are the prefix [0, end[d])
    end = np.searchsorted(degrees, np.arange(max_degree + 1), side="right")
    nzb = [np.nonzero(r)[0] for r in b]
    for s1 in range(min(a.shape[0], nrows)):
        ia = np.nonzero(a[s1])[0]
        if ia.size == 0:
            continue
        blocks = [(d, ia[degrees[ia] == d]) for d in np.unique(degrees[ia])]
        for s2 in range(min(b.shape[0], nrows - s1)):
            ib = nzb[s2]
            for d, sa in blocks:
                sb = ib[ib < end[max_degree - d]]
                if sb.size == 0:
                    continue
                k = ptab[sa[:, None], sb[None, :]].ravel()
                v = np.outer(a[s1, sa], b[s2, sb]).ravel()
                out[s1 + s2] += np.bincount(k, weights=v, minlength=n)
    return out


_polymul = _polymul_loops if USE_NUMBA else _polymul_numpy


def polymul_kernel(a, b, space, nrows):
    """Truncated product of two coefficient blocks of shape ``(S, space.size)``."""
    return _polymul(a, b, space.product_table, space.degrees, space.max_degree, nrows)


def _check_space(a, b):
    if a.space is not b.space:
        raise ValueError(f"jet spaces differ: {a.space!r} vs {b.space!r}")


def _binom_half(k: int) -> float:
    # binomial(1/2, k)
    out = 1.0
    for i in range(k):
        out *= (0.5 - i) / (i + 1)
    return out


class Jet:
    """Truncated polynomial in the variables of ``space``."""

    __slots__ = ("space", "c")
    __array_ufunc__ = None

    def __init__(self, space: JetSpace, coeffs):
        self.space = space
        self.c = np.asarray(coeffs, dtype=float)
        if self.c.shape != (space.size,):
            raise ValueError(f"expected {space.size} coefficients, got {self.c.shape}")

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            _check_space(self, other)
            return other
        if isinstance(other, PolyJet):
            return NotImplemented
        return self.space.const(float(other))

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Jet(self.space, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return Jet(self.space, self.c - o.c)

    def __rsub__(self, other):
        return Jet(self.space, self._coerce(other).c - self.c)

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            _check_space(self, other)
            sp = self.space
            out = polymul_kernel(self.c[None, :], other.c[None, :], sp, 1)
            return Jet(sp, out[0])
        if isinstance(other, PolyJet):
            return NotImplemented
        return Jet(self.space, self.c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.recip()
        return Jet(self.space, self.c / float(other))

    def __rtruediv__(self, other):
        return self.recip() * other

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers")
        out = self.space.const(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    # -- queries -------------------------------------------------------------
    @property
    def constant(self) -> float:
        return float(self.c[0])

    def degree_part(self, d: int) -> "Jet":
        c = np.zeros_like(self.c)
        if d <= self.space.max_degree:
            s = self.space.degree_slice(d)
            c[s] = self.c[s]
        return Jet(self.space, c)

    def coeff(self, exponents) -> float:
        return float(self.c[self.space.index(exponents)])

    @property
    def terms(self) -> dict:
        """Nonzero terms as ``{exponent tuple: coefficient}`` in graded lex order."""
        nz = np.nonzero(self.c)[0]
        return {tuple(int(e) for e in self.space.exponents[i]): float(self.c[i]) for i in nz}

    def evaluate(self, x) -> float:
        return float(self.c @ self.space.monomial_values(x))

    def lift(self, space: JetSpace) -> "Jet":
        """Re-express in a space with the same variables and another truncation degree."""
        if space.nvars != self.space.nvars:
            raise ValueError("cannot lift between different variable counts")
        c = np.zeros(space.size)
        n = min(space.size, self.space.size)
        c[:n] = self.c[:n]
        return Jet(space, c)

    def allclose(self, other, rtol=1e-12, atol=0.0) -> bool:
        return np.allclose(self.c, self._coerce(other).c, rtol=rtol, atol=atol)

    # -- elementary functions -------------------------------------------------
    def _series(self, head: float, coefs) -> "Jet":
        # head * sum_k coefs[k] * (nilpotent / c0)^k
        c0 = self.c[0]
        nil = Jet(self.space, self.c.copy())
        nil.c[0] = 0.0
        nil = nil * (1.0 / c0)
        out = self.space.const(coefs[0])
        power = self.space.const(1.0)
        for k in range(1, self.space.max_degree + 1):
            power = power * nil
            out = out + power * coefs[k]
        return out * head

    def recip(self) -> "Jet":
        c0 = self.c[0]
        if not c0 > 0.0:
            raise JetDomainError(f"recip needs a positive constant term, got {c0!r}")
        return self._series(1.0 / c0, [(-1.0) ** k for k in range(self.space.max_degree + 1)])

    def sqrt(self) -> "Jet":
        c0 = self.c[0]
        if not c0 > 0.0:
            raise JetDomainError(f"sqrt needs a positive constant term, got {c0!r}")
        return self._series(np.sqrt(c0), [_binom_half(k) for k in range(self.space.max_degree + 1)])

    def gradient(self) -> list:
        """Formal partial derivatives with respect to every variable."""
        out = []
        for src, dst, fac in self.space._deriv:
            c = np.zeros(self.space.size)
            np.add.at(c, dst, self.c[src] * fac)
            out.append(Jet(self.space, c))
        return out

    def __repr__(self):
        t = self.terms
        if not t:
            return "Jet(0)"
        return "Jet(" + " + ".join(f"{v:.6g}*{k}" for k, v in list(t.items())[:8]) + (" + ..." if len(t) > 8 else "") + ")"


class PolyJet:
    """Polynomial in ``sigma`` with :class:`Jet` coefficients.

    ``c[s]`` holds the jet coefficient of ``sigma**s``. When ``trunc`` is an
    integer the object is a local Taylor series truncated at that power of
    ``sigma`` (used for pointwise evaluation of derivatives).
    """

    __slots__ = ("space", "c", "trunc")
    __array_ufunc__ = None

    def __init__(self, space: JetSpace, coeffs, trunc=None):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != space.size:
            raise ValueError(f"expected shape (S, {space.size}), got {c.shape}")
        if trunc is not None and c.shape[0] > trunc + 1:
            c = c[: trunc + 1]
        self.space = space
        self.c = c
        self.trunc = trunc

    @classmethod
    def from_jets(cls, jets, trunc=None):
        jets = list(jets)
        return cls(jets[0].space, np.stack([j.c for j in jets]), trunc)

    @classmethod
    def const(cls, space, value, trunc=None):
        if isinstance(value, Jet):
            return cls(space, value.c[None, :].copy(), trunc)
        c = np.zeros((1, space.size))
        c[0, 0] = value
        return cls(space, c, trunc)

    @classmethod
    def sigma(cls, space, trunc=None):
        c = np.zeros((2, space.size))
        c[1, 0] = 1.0
        return cls(space, c, trunc)

    def _merge_trunc(self, other):
        ta = self.trunc
        tb = other.trunc if isinstance(other, PolyJet) else None
        if ta is None:
            return tb
        if tb is None:
            return ta
        return min(ta, tb)

    def _coerce(self, other):
        if isinstance(other, PolyJet):
            _check_space(self, other)
            return other
        if isinstance(other, Jet):
            _check_space(self, other)
            return PolyJet(self.space, other.c[None, :], None)
        return PolyJet.const(self.space, float(other))

    def _addsub(self, other, sign):
        o = self._coerce(other)
        tr = self._merge_trunc(o)
        na, nb = self.c.shape[0], o.c.shape[0]
        if na >= nb:
            c = self.c.copy()
            c[:nb] += sign * o.c
        else:
            c = sign * o.c
            c[:na] += self.c
        return PolyJet(self.space, c, tr)

    def __add__(self, other):
        return self._addsub(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._addsub(other, -1.0)

    def __rsub__(self, other):
        return (-self)._addsub(other, 1.0)

    def __neg__(self):
        return PolyJet(self.space, -self.c, self.trunc)

    def __mul__(self, other):
        if isinstance(other, (PolyJet, Jet)):
            o = self._coerce(other)
            tr = self._merge_trunc(o)
            nrows = self.c.shape[0] + o.c.shape[0] - 1
            if tr is not None:
                nrows = min(nrows, tr + 1)
            sp = self.space
            out = polymul_kernel(self.c, o.c, sp, nrows)
            return PolyJet(sp, out, tr)
        return PolyJet(self.space, self.c * float(other), self.trunc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (PolyJet, Jet)):
            return self * other.recip()
        return PolyJet(self.space, self.c / float(other), self.trunc)

    # -- calculus in sigma ----------------------------------------------------
    def deriv(self) -> "PolyJet":
        n = self.c.shape[0]
        if n == 1:
            return PolyJet(self.space, np.zeros((1, self.space.size)), self.trunc)
        c = self.c[1:] * np.arange(1, n)[:, None]
        tr = None if self.trunc is None else max(self.trunc - 1, 0)
        return PolyJet(self.space, c, tr)

    def at(self, sigma: float) -> Jet:
        p = sigma ** np.arange(self.c.shape[0])
        return Jet(self.space, p @ self.c)

    def taylor(self, s0: float, nterms: int) -> "PolyJet":
        """Local expansion about ``s0`` in the shifted coordinate, ``nterms`` powers kept."""
        n = self.c.shape[0]
        rows = []
        for k in range(nterms):
            if k >= n:
                rows.append(np.zeros(self.space.size))
                continue
            j = np.arange(k, n)
            w = np.array([factorial(int(i)) / (factorial(k) * factorial(int(i) - k)) for i in j]) * s0 ** (j - k)
            rows.append(w @ self.c[k:])
        return PolyJet(self.space, np.stack(rows), nterms - 1)

    # -- queries ------------------------------------------------------------
    def sigma_degree(self, tol=0.0) -> int:
        nz = np.nonzero(np.any(np.abs(self.c) > tol, axis=1))[0]
        return int(nz[-1]) if nz.size else 0

    def trimmed(self, tol=0.0) -> "PolyJet":
        return PolyJet(self.space, self.c[: self.sigma_degree(tol) + 1].copy(), self.trunc)

    def degree_part(self, d: int) -> "PolyJet":
        c = np.zeros_like(self.c)
        if d <= self.space.max_degree:
            s = self.space.degree_slice(d)
            c[:, s] = self.c[:, s]
        return PolyJet(self.space, c, self.trunc)

    def lift(self, space: JetSpace) -> "PolyJet":
        c = np.zeros((self.c.shape[0], space.size))
        n = min(space.size, self.space.size)
        c[:, :n] = self.c[:, :n]
        return PolyJet(space, c, self.trunc)

    def specialize(self, x) -> np.ndarray:
        """Numeric sigma-polynomial coefficients at the variable point ``x``."""
        return self.c @ self.space.monomial_values(x)

    def _const_head(self):
        col = self.c[:, 0]
        if np.any(np.abs(col[1:]) > 1e-14 * max(1.0, abs(col[0]))):
            raise ValueError("sqrt/recip of a PolyJet needs a sigma-independent constant term")
        return Jet(self.space, self.c[0])

    def _series(self, head, coefs):
        c0 = self.c[0, 0]
        nil = PolyJet(self.space, self.c.copy(), self.trunc)
        nil.c[0, 0] = 0.0
        nil = nil * (1.0 / c0)
        out = PolyJet.const(self.space, coefs[0], self.trunc)
        power = PolyJet.const(self.space, 1.0, self.trunc)
        for k in range(1, self.space.max_degree + 1):
            power = power * nil
            out = out + power * coefs[k]
        return out * head

    def recip(self) -> "PolyJet":
        c0 = self._const_head().c[0]
        if not c0 > 0.0:
            raise JetDomainError(f"recip needs a positive constant term, got {c0!r}")
        return self._series(1.0 / c0, [(-1.0) ** k for k in range(self.space.max_degree + 1)])

    def sqrt(self) -> "PolyJet":
        c0 = self._const_head().c[0]
        if not c0 > 0.0:
            raise JetDomainError(f"sqrt needs a positive constant term, got {c0!r}")
        return self._series(np.sqrt(c0), [_binom_half(k) for k in range(self.space.max_degree + 1)])

    def __repr__(self):
        return f"PolyJet({self.space!r}, sigma_degree={self.sigma_degree()}, trunc={self.trunc})"


# ---------------------------------------------------------------------------
# functional spellings


def jet_add(a: Jet, b: Jet) -> Jet:
    _check_space(a, b)
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    _check_space(a, b)
    return a * b


def jet_sqrt(a: Jet) -> Jet:
    return a.sqrt()


def jet_recip(a: Jet) -> Jet:
    return a.recip()


def jet_gradient_coeffs(a: Jet) -> list:
    return a.gradient()


def sqrt(x):
    """sqrt for floats, arrays, jets and jet polynomials."""
    if isinstance(x, (Jet, PolyJet)):
        return x.sqrt()
    return np.sqrt(x)


def recip(x):
    if isinstance(x, (Jet, PolyJet)):
        return x.recip()
    return 1.0 / x
