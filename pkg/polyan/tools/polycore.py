"""Exact representation and Wirtinger calculus for alpha-analytic functions.

A polyanalytic function of order alpha in n variables is stored as

    f(z) = sum_beta a_beta(z) * conj(z)^beta,   beta_j < alpha_j,

with every a_beta a ratio of two dense complex polynomials. Polynomials are
dicts keyed by exponent tuples; arithmetic prunes coefficients that fall below
a relative threshold of the operand scale, so exact inputs cancel exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .. import config
from ..errors import NotRepresentable, PreconditionViolation, SingularPoint

MultiIndex = Tuple[int, ...]


def _zero_index(n: int) -> MultiIndex:
    return (0,) * n


def _unit_index(n: int, j: int) -> MultiIndex:
    return tuple(1 if k == j else 0 for k in range(n))


def _add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def graded_lex_key(m: MultiIndex) -> Tuple[int, MultiIndex]:
    return (sum(m), m)


def _prune(terms: Dict[MultiIndex, complex], scale: float) -> Dict[MultiIndex, complex]:
    if not terms:
        return {}
    cutoff = config.DEFAULTS.symbolic_zero * scale
    return {m: complex(c) for m, c in terms.items() if abs(c) > cutoff}


def _as_points(z, n: int) -> np.ndarray:
    """Coerce z to a (N, n) complex array; a single point becomes N = 1."""
    pts = np.asarray(z, dtype=complex)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.shape[0] == n else pts.reshape(-1, 1)
    if pts.shape[-1] != n:
        raise PreconditionViolation(
            "point dimension mismatch", {"expected": n, "got": int(pts.shape[-1])}
        )
    return pts


# --- CPoly -------------------------------------------------------------------


@dataclass(frozen=True)
class CPoly:
    """Dense complex polynomial in n variables."""

    n: int
    terms: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionViolation("polynomial dimension must be >= 1", {"n": self.n})
        clean: Dict[MultiIndex, complex] = {}
        for m, c in dict(self.terms).items():
            m = tuple(int(x) for x in m)
            if len(m) != self.n or any(x < 0 for x in m):
                raise PreconditionViolation("bad exponent", {"pow": list(m), "n": self.n})
            if c != 0:
                clean[m] = complex(c)
        object.__setattr__(self, "terms", clean)

    # constructors
    @classmethod
    def zero(cls, n: int) -> "CPoly":
        return cls(n, {})

    @classmethod
    def constant(cls, c: complex, n: int) -> "CPoly":
        return cls(n, {_zero_index(n): c})

    @classmethod
    def var(cls, j: int, n: int) -> "CPoly":
        """z_j, with j zero-based."""
        return cls(n, {_unit_index(n, j): 1.0})

    @classmethod
    def monomial(cls, m: Sequence[int], c: complex = 1.0) -> "CPoly":
        return cls(len(m), {tuple(m): c})

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.terms)

    def scale(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree(self, j: int) -> int:
        return max((m[j] for m in self.terms), default=0)

    def degrees(self) -> MultiIndex:
        return tuple(self.degree(j) for j in range(self.n))

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def leading(self) -> Tuple[MultiIndex, complex]:
        """Leading term under graded lexicographic order."""
        if not self.terms:
            raise PreconditionViolation("zero polynomial has no leading term")
        m = max(self.terms, key=graded_lex_key)
        return m, self.terms[m]

    def coefficient(self, m: MultiIndex) -> complex:
        return self.terms.get(tuple(m), 0j)

    # arithmetic
    def __add__(self, other: "CPoly") -> "CPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0j) + c
        return CPoly(self.n, _prune(out, max(self.scale(), other.scale())))

    def __neg__(self) -> "CPoly":
        return CPoly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "CPoly") -> "CPoly":
        return self + (-other)

    def __mul__(self, other) -> "CPoly":
        if not isinstance(other, CPoly):
            return self.scaled(other)
        out: Dict[MultiIndex, complex] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _add_index(m1, m2)
                out[m] = out.get(m, 0j) + c1 * c2
        return CPoly(self.n, _prune(out, self.scale() * other.scale()))

    __rmul__ = __mul__

    def scaled(self, c: complex) -> "CPoly":
        c = complex(c)
        if c == 0:
            return CPoly.zero(self.n)
        return CPoly(self.n, {m: c * v for m, v in self.terms.items()})

    def power(self, k: int) -> "CPoly":
        out = CPoly.constant(1.0, self.n)
        for _ in range(k):
            out = out * self
        return out

    def deriv(self, j: int) -> "CPoly":
        out: Dict[MultiIndex, complex] = {}
        for m, c in self.terms.items():
            if m[j] > 0:
                dm = tuple(x - 1 if k == j else x for k, x in enumerate(m))
                out[dm] = c * m[j]
        return CPoly(self.n, out)

    def conj_coefficients(self) -> "CPoly":
        """P* with conj(P(z)) = P*(conj z)."""
        return CPoly(self.n, {m: c.conjugate() for m, c in self.terms.items()})

    def compose_linear(self, A: np.ndarray) -> "CPoly":
        """P(A z) expanded as a polynomial in z."""
        A = np.asarray(A, dtype=complex)
        forms = [
            CPoly(self.n, {_unit_index(self.n, k): A[j, k] for k in range(self.n)})
            for j in range(self.n)
        ]
        out = CPoly.zero(self.n)
        for m, c in self.terms.items():
            term = CPoly.constant(c, self.n)
            for j, e in enumerate(m):
                term = term * forms[j].power(e)
            out = out + term
        return out

    def embed(self, n_total: int, offset: int = 0) -> "CPoly":
        """Same polynomial viewed in a larger variable set."""
        pad_l, pad_r = offset, n_total - offset - self.n
        return CPoly(n_total, {(0,) * pad_l + m + (0,) * pad_r: c for m, c in self.terms.items()})

    def eval(self, z) -> np.ndarray:
        pts = _as_points(z, self.n)
        out = np.zeros(pts.shape[0], dtype=complex)
        for m, c in self.terms.items():
            out += c * np.prod(pts ** np.asarray(m), axis=-1)
        return out

    def __call__(self, z) -> np.ndarray:
        return self.eval(z)

    def equals(self, other: "CPoly") -> bool:
        return (self - other).is_zero()

    def __repr__(self) -> str:
        if not self.terms:
            return "CPoly(0)"
        parts = [f"({c:.6g})*z^{list(m)}" for m, c in sorted(self.terms.items())]
        return "CPoly(" + " + ".join(parts) + ")"


# --- RationalHolo ------------------------------------------------------------


@dataclass(frozen=True)
class RationalHolo:
    """num/den with den normalized to unit leading coefficient (graded lex)."""

    num: CPoly
    den: CPoly

    def __post_init__(self):
        if self.num.n != self.den.n:
            raise PreconditionViolation("numerator/denominator dimension mismatch")
        if self.den.is_zero():
            raise PreconditionViolation("denominator is the zero polynomial")
        _, lead = self.den.leading()
        if lead != 1:
            object.__setattr__(self, "num", self.num.scaled(1 / lead))
            object.__setattr__(self, "den", self.den.scaled(1 / lead))
        if self.num.is_zero() and not self.den.is_constant():
            object.__setattr__(self, "den", CPoly.constant(1.0, self.num.n))

    @property
    def n(self) -> int:
        return self.num.n

    @classmethod
    def poly(cls, p: CPoly) -> "RationalHolo":
        return cls(p, CPoly.constant(1.0, p.n))

    @classmethod
    def constant(cls, c: complex, n: int) -> "RationalHolo":
        return cls.poly(CPoly.constant(c, n))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> CPoly:
        if not self.is_polynomial():
            raise NotRepresentable("coefficient is not a polynomial", {"den": repr(self.den)})
        return self.num.scaled(1 / self.den.coefficient(_zero_index(self.n)))

    def _same_den(self, other: "RationalHolo") -> bool:
        return self.den.terms == other.den.terms

    def __add__(self, other: "RationalHolo") -> "RationalHolo":
        if self._same_den(other):
            return RationalHolo(self.num + other.num, self.den)
        return RationalHolo(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RationalHolo":
        return RationalHolo(-self.num, self.den)

    def __sub__(self, other: "RationalHolo") -> "RationalHolo":
        return self + (-other)

    def __mul__(self, other) -> "RationalHolo":
        if isinstance(other, RationalHolo):
            if other.is_polynomial():
                return RationalHolo(self.num * other.as_poly(), self.den)
            if self.is_polynomial():
                return RationalHolo(self.as_poly() * other.num, other.den)
            return RationalHolo(self.num * other.num, self.den * other.den)
        if isinstance(other, CPoly):
            return RationalHolo(self.num * other, self.den)
        return RationalHolo(self.num.scaled(other), self.den)

    __rmul__ = __mul__

    def deriv(self, j: int) -> "RationalHolo":
        if self.is_polynomial():
            return RationalHolo.poly(self.as_poly().deriv(j))
        top = self.num.deriv(j) * self.den - self.num * self.den.deriv(j)
        return RationalHolo(top, self.den * self.den)

    def equals(self, other: "RationalHolo") -> bool:
        return (self.num * other.den).equals(other.num * self.den)

    def eval_parts(self, z) -> Tuple[np.ndarray, np.ndarray]:
        return self.num.eval(z), self.den.eval(z)

    def singular_mask(self, z) -> np.ndarray:
        top, bottom = self.eval_parts(z)
        return np.abs(bottom) < config.DEFAULTS.eval_singularity * (1 + np.abs(top))

    def eval(self, z) -> np.ndarray:
        top, bottom = self.eval_parts(z)
        bad = np.abs(bottom) < config.DEFAULTS.eval_singularity * (1 + np.abs(top))
        if bad.any():
            raise SingularPoint(
                "denominator vanishes", {"points": int(bad.sum()), "first": int(np.argmax(bad))}
            )
        return top / bottom


# --- PolyAnalytic ------------------------------------------------------------


@dataclass(frozen=True)
class PolyAnalytic:
    """sum_beta a_beta(z) conj(z)^beta with beta < order componentwise."""

    n: int
    order: MultiIndex
    coeffs: Mapping[MultiIndex, RationalHolo] = field(default_factory=dict)

    def __post_init__(self):
        order = tuple(int(a) for a in self.order)
        if len(order) != self.n:
            raise PreconditionViolation("order length must equal n", {"n": self.n})
        clean: Dict[MultiIndex, RationalHolo] = {}
        for beta, a in dict(self.coeffs).items():
            beta = tuple(int(b) for b in beta)
            if len(beta) != self.n or any(b < 0 for b in beta):
                raise PreconditionViolation("bad conj-power", {"beta": list(beta)})
            if any(b >= o for b, o in zip(beta, order)):
                raise PreconditionViolation(
                    "conj-power not below order", {"beta": list(beta), "order": list(order)}
                )
            if a.n != self.n:
                raise PreconditionViolation("coefficient dimension mismatch")
            if not a.is_zero():
                clean[beta] = a
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", clean)

    # constructors
    @classmethod
    def zero(cls, n: int = 1) -> "PolyAnalytic":
        return cls(n, (1,) * n, {})

    @classmethod
    def holomorphic(cls, a, n: Optional[int] = None) -> "PolyAnalytic":
        if isinstance(a, CPoly):
            a = RationalHolo.poly(a)
        return cls(a.n, (1,) * a.n, {_zero_index(a.n): a})

    @classmethod
    def constant(cls, c: complex, n: int = 1) -> "PolyAnalytic":
        return cls.holomorphic(CPoly.constant(c, n))

    @classmethod
    def z(cls, j: int = 0, n: int = 1) -> "PolyAnalytic":
        return cls.holomorphic(CPoly.var(j, n))

    @classmethod
    def zbar(cls, j: int = 0, n: int = 1, power: int = 1) -> "PolyAnalytic":
        beta = tuple(power if k == j else 0 for k in range(n))
        order = tuple(b + 1 for b in beta)
        return cls(n, order, {beta: RationalHolo.constant(1.0, n)})

    @classmethod
    def from_polys(cls, polys: Mapping[MultiIndex, CPoly], order: Optional[MultiIndex] = None):
        """Build from {beta: polynomial coefficient}; order defaults to exact."""
        items = {tuple(b): RationalHolo.poly(p) for b, p in polys.items()}
        n = next(iter(items.values())).n if items else len(order or (1,))
        if order is None:
            order = tuple(max((b[j] for b in items), default=0) + 1 for j in range(n))
        return cls(n, tuple(order), items)

    # queries
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, beta: MultiIndex) -> RationalHolo:
        return self.coeffs.get(tuple(beta), RationalHolo.constant(0.0, self.n))

    def has_polynomial_coefficients(self) -> bool:
        return all(a.is_polynomial() for a in self.coeffs.values())

    def equals(self, other: "PolyAnalytic") -> bool:
        """Symbolic equality via cross-multiplied coefficient comparison."""
        if self.n != other.n:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coefficient(b).equals(other.coefficient(b)) for b in keys)

    def singular_mask(self, z) -> np.ndarray:
        pts = _as_points(z, self.n)
        bad = np.zeros(pts.shape[0], dtype=bool)
        for a in self.coeffs.values():
            if not a.is_polynomial():
                bad |= a.singular_mask(pts)
        return bad

    # evaluation
    def eval(self, z, singular: str = "raise") -> np.ndarray:
        """Evaluate at one point or a (N, n) batch.

        `singular="nan"` returns NaN at poles instead of raising SingularPoint.
        """
        pts = _as_points(z, self.n)
        bad = self.singular_mask(pts)
        if bad.any() and singular == "raise":
            raise SingularPoint(
                "a coefficient denominator vanishes",
                {"points": int(bad.sum()), "first": repr(pts[int(np.argmax(bad))].tolist())},
            )
        conj = np.conj(pts)
        out = np.zeros(pts.shape[0], dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for beta, a in self.coeffs.items():
                top, bottom = a.eval_parts(pts)
                out += top / bottom * np.prod(conj ** np.asarray(beta), axis=-1)
        if bad.any():
            out[bad] = np.nan
        return out

    def __call__(self, z) -> np.ndarray:
        return self.eval(z)

    # arithmetic
    def __add__(self, other: "PolyAnalytic") -> "PolyAnalytic":
        order = tuple(max(a, b) for a, b in zip(self.order, other.order))
        out = dict(self.coeffs)
        for beta, a in other.coeffs.items():
            out[beta] = out[beta] + a if beta in out else a
        return PolyAnalytic(self.n, order, out)

    def __neg__(self) -> "PolyAnalytic":
        return PolyAnalytic(self.n, self.order, {b: -a for b, a in self.coeffs.items()})

    def __sub__(self, other: "PolyAnalytic") -> "PolyAnalytic":
        return self + (-other)

    def __mul__(self, other) -> "PolyAnalytic":
        if not isinstance(other, PolyAnalytic):
            return PolyAnalytic(self.n, self.order, {b: a * other for b, a in self.coeffs.items()})
        order = tuple(max(a + b - 1, 1) for a, b in zip(self.order, other.order))
        out: Dict[MultiIndex, RationalHolo] = {}
        for b1, a1 in self.coeffs.items():
            for b2, a2 in other.coeffs.items():
                beta = _add_index(b1, b2)
                term = a1 * a2
                out[beta] = out[beta] + term if beta in out else term
        return PolyAnalytic(self.n, order, out)

    __rmul__ = __mul__

    def scale(self, c: complex) -> "PolyAnalytic":
        return self * complex(c)

    def with_order(self, order: MultiIndex) -> "PolyAnalytic":
        return PolyAnalytic(self.n, tuple(order), self.coeffs)

    def __repr__(self) -> str:
        return f"PolyAnalytic(n={self.n}, order={self.order}, terms={len(self.coeffs)})"


# --- Wirtinger calculus ------------------------------------------------------


def _check_var(f: PolyAnalytic, j: int) -> int:
    """Variable indices are 1-based on the public surface."""
    if not 1 <= j <= f.n:
        raise PreconditionViolation("variable index out of range", {"j": j, "n": f.n})
    return j - 1


def dbar(f: PolyAnalytic, j: int, m: int = 1) -> PolyAnalytic:
    """m-th derivative in conj(z_j); only the conj-powers move."""
    k = _check_var(f, j)
    if m < 1:
        raise PreconditionViolation("repetition count must be >= 1", {"m": m})
    order = tuple(max(a - m, 1) if i == k else a for i, a in enumerate(f.order))
    out: Dict[MultiIndex, RationalHolo] = {}
    for beta, a in f.coeffs.items():
        if beta[k] < m:
            continue
        factor = math.factorial(beta[k]) // math.factorial(beta[k] - m)
        nb = tuple(b - m if i == k else b for i, b in enumerate(beta))
        out[nb] = a * float(factor)
    return PolyAnalytic(f.n, order, out)


def dz(f: PolyAnalytic, j: int) -> PolyAnalytic:
    k = _check_var(f, j)
    return PolyAnalytic(f.n, f.order, {b: a.deriv(k) for b, a in f.coeffs.items()})


def exact_order(f: PolyAnalytic) -> MultiIndex:
    """Minimal alpha annihilating f; the zero function maps to all zeros."""
    if f.is_zero():
        return _zero_index(f.n)
    return tuple(max(beta[j] for beta in f.coeffs) + 1 for j in range(f.n))


def conj_polyanalytic(f: PolyAnalytic) -> Dict[MultiIndex, CPoly]:
    """conj(f) regrouped by conj-power, as {gamma: polynomial in z}.

    Only defined for polynomial coefficients: conj(sum c z^m conj(z)^beta)
    = sum conj(c) z^beta conj(z)^m.
    """
    bad = [list(b) for b, a in f.coeffs.items() if not a.is_polynomial()]
    if bad:
        raise NotRepresentable("conjugate of a rational coefficient leaves the class", {"beta": bad})
    out: Dict[MultiIndex, CPoly] = {}
    for beta, a in f.coeffs.items():
        for m, c in a.as_poly().terms.items():
            piece = CPoly.monomial(beta, c.conjugate())
            out[m] = out[m] + piece if m in out else piece
    return out


def conj_mul(f: PolyAnalytic, g: PolyAnalytic) -> PolyAnalytic:
    """Representation of conj(f)*g; f must have polynomial coefficients."""
    if f.n != g.n:
        raise PreconditionViolation("dimension mismatch", {"f": f.n, "g": g.n})
    conj_f = conj_polyanalytic(f)
    zdeg = tuple(
        max((a.as_poly().degree(j) for a in f.coeffs.values()), default=0) for j in range(f.n)
    )
    order = tuple(d + 1 + (a - 1) for d, a in zip(zdeg, g.order))
    out: Dict[MultiIndex, RationalHolo] = {}
    for gamma, p in conj_f.items():
        for beta, a in g.coeffs.items():
            key = _add_index(gamma, beta)
            term = a * p
            out[key] = out[key] + term if key in out else term
    return PolyAnalytic(f.n, order, out)


# --- limits and coordinate changes -------------------------------------------


def _aitken(x0: complex, x1: complex, x2: complex) -> complex:
    d1, d2 = x1 - x0, x2 - x1
    second = d2 - d1
    scale = max(abs(x0), abs(x1), abs(x2), 1e-300)
    if abs(second) <= config.DEFAULTS.symbolic_zero * scale:
        return x2
    return x2 - d2 * d2 / second


def uniform_limit(sequence: Sequence[PolyAnalytic]) -> PolyAnalytic:
    """Coefficientwise limit of same-order functions.

    Uses Aitken extrapolation on the last three terms (exact for geometric
    convergence); a shorter sequence returns its last term. Coefficients with
    the same conj-power must share a denominator across the sequence.
    """
    seq = list(sequence)
    if not seq:
        raise PreconditionViolation("empty sequence")
    n, order = seq[0].n, seq[0].order
    if any(f.n != n or f.order != order for f in seq):
        raise PreconditionViolation("sequence members must share dimension and order")
    if len(seq) < 3:
        return seq[-1]
    tail = seq[-3:]
    betas = set().union(*(f.coeffs for f in tail))
    out: Dict[MultiIndex, RationalHolo] = {}
    for beta in betas:
        parts = [f.coefficient(beta) for f in tail]
        dens = [p.den for p in parts if not p.is_zero()]
        den = dens[-1]
        if any(d.terms != den.terms for d in dens):
            raise PreconditionViolation(
                "denominators must agree along the sequence", {"beta": list(beta)}
            )
        monos = set().union(*(p.num.terms for p in parts))
        num = {m: _aitken(*(p.num.coefficient(m) for p in parts)) for m in monos}
        scale = max((abs(c) for c in num.values()), default=0.0)
        out[beta] = RationalHolo(CPoly(n, _prune(num, scale)), den)
    return PolyAnalytic(n, order, out)


def linear_change(f: PolyAnalytic, U) -> PolyAnalytic:
    """f(U z) rewritten in the new coordinates.

    conj(U z)^beta expands into conj-powers of total degree |beta|, so orders
    spread across variables; the returned order is the exact one.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (f.n, f.n):
        raise PreconditionViolation("matrix shape must be (n, n)", {"shape": list(U.shape)})
    out: Dict[MultiIndex, RationalHolo] = {}
    conj_U = np.conj(U)
    for beta, a in f.coeffs.items():
        moved = RationalHolo(a.num.compose_linear(U), a.den.compose_linear(U))
        spread = CPoly.monomial(beta).compose_linear(conj_U)
        for gamma, c in spread.terms.items():
            term = moved * c
            out[gamma] = out[gamma] + term if gamma in out else term
    if not out:
        return PolyAnalytic.zero(f.n)
    order = tuple(max((g[j] for g in out), default=0) + 1 for j in range(f.n))
    return PolyAnalytic(f.n, order, out)


def changed_order_bound(f: PolyAnalytic) -> MultiIndex:
    """Worst-case order after a general linear change of variables."""
    total = sum(a - 1 for a in f.order) + 1
    return (total,) * f.n


# --- (z, conj z) bookkeeping ---------------------------------------------------


def to_bipoly(f: PolyAnalytic) -> CPoly:
    """Polynomial-coefficient f as a polynomial in 2n variables (z, conj z)."""
    out = CPoly.zero(2 * f.n)
    for beta, a in f.coeffs.items():
        p = a.as_poly()
        out = out + CPoly(2 * f.n, {m + beta: c for m, c in p.terms.items()})
    return out


def bipoly_conj(P: CPoly) -> CPoly:
    """conj(P(z, conj z)) in the same (z, conj z) variables."""
    n = P.n // 2
    return CPoly(P.n, {m[n:] + m[:n]: c.conjugate() for m, c in P.terms.items()})


def from_bipoly(P: CPoly) -> PolyAnalytic:
    n = P.n // 2
    polys: Dict[MultiIndex, Dict[MultiIndex, complex]] = {}
    for m, c in P.terms.items():
        polys.setdefault(m[n:], {})[m[:n]] = c
    if not polys:
        return PolyAnalytic.zero(n)
    return PolyAnalytic.from_polys({b: CPoly(n, t) for b, t in polys.items()})


def iter_terms(f: PolyAnalytic) -> Iterable[Tuple[MultiIndex, RationalHolo]]:
    return sorted(f.coeffs.items(), key=lambda kv: graded_lex_key(kv[0]))


def max_abs_coefficient(f: PolyAnalytic) -> float:
    return max((max(a.num.scale(), a.den.scale()) for a in f.coeffs.values()), default=0.0)


def coefficient_list(f: PolyAnalytic) -> List[Tuple[MultiIndex, CPoly, CPoly]]:
    return [(b, a.num, a.den) for b, a in iter_terms(f)]
