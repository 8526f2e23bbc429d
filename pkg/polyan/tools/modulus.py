"""Constant-modulus decision and recovery of the form lambda*conj(Q)/Q."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.linalg import null_space

from .. import config
from ..errors import NoSolution, PreconditionViolation, RankDeficient, SingularEverywhere
from .polycore import (
    CPoly,
    MultiIndex,
    PolyAnalytic,
    RationalHolo,
    bipoly_conj,
    conj_mul,
    exact_order,
    graded_lex_key,
)

_SAMPLE_POINTS = 32
_KERNEL_RCOND = 1e-9


@dataclass(frozen=True)
class BalkForm:
    lam: complex
    Q: CPoly

    @property
    def n(self) -> int:
        return self.Q.n

    @property
    def modulus(self) -> float:
        return abs(self.lam)

    def order(self) -> MultiIndex:
        return tuple(d + 1 for d in self.Q.degrees())

    def eval(self, z) -> np.ndarray:
        q = self.Q.eval(z)
        return self.lam * np.conj(q) / q

    def to_polyanalytic(self) -> PolyAnalytic:
        if self.lam == 0:
            return PolyAnalytic.zero(self.n)
        coeffs = {
            m: RationalHolo(CPoly.constant(self.lam * c.conjugate(), self.n), self.Q)
            for m, c in self.Q.terms.items()
        }
        return PolyAnalytic(self.n, self.order(), coeffs)


# --- helpers ---------------------------------------------------------------------


def _sample_points(n: int) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    return rng.uniform(-0.9, 0.9, (_SAMPLE_POINTS, n)) + 1j * rng.uniform(-0.9, 0.9, (_SAMPLE_POINTS, n))


def _cleared(f: PolyAnalytic) -> Tuple[CPoly, CPoly]:
    """(N, D) over (z, conj z) with f = N / D and D holomorphic."""
    n = f.n
    dens: List[CPoly] = []
    for a in f.coeffs.values():
        if not any(a.den.terms == d.terms for d in dens):
            dens.append(a.den)
    D = CPoly.constant(1.0, n)
    for d in dens:
        D = D * d
    N = CPoly.zero(2 * n)
    for beta, a in f.coeffs.items():
        mult = CPoly.constant(1.0, n)
        for d in dens:
            if d.terms != a.den.terms:
                mult = mult * d
        top = a.num * mult
        N = N + CPoly(2 * n, {m + beta: c for m, c in top.terms.items()})
    return N, D.embed(2 * n)


def _constant_square(f: PolyAnalytic) -> float:
    pts = _sample_points(f.n)
    good = ~f.singular_mask(pts)
    if not good.any():
        raise SingularEverywhere("no nonsingular sample point", {"tried": _SAMPLE_POINTS})
    value = f.eval(pts[np.argmax(good)])[0]
    return float(abs(value) ** 2)


# --- public operations -----------------------------------------------------------


def modulus_squared(f: Union[PolyAnalytic, BalkForm]) -> PolyAnalytic:
    """|f|^2 as a polyanalytic function."""
    if isinstance(f, BalkForm):
        return PolyAnalytic.constant(abs(f.lam) ** 2, f.n)
    return conj_mul(f, f)


def is_constant_modulus(f: PolyAnalytic, tol: Optional[float] = None) -> Optional[float]:
    """Return C when |f| == C off the singular set, else None.

    Decided on N*conj(N) - C^2 * D*conj(D) after clearing denominators, with
    C^2 read at a nonsingular sample point.
    """
    tol = config.DEFAULTS.modulus_tol if tol is None else tol
    if f.is_zero():
        return 0.0
    c2 = _constant_square(f)
    N, D = _cleared(f)
    nn = N * bipoly_conj(N)
    dd = (D * bipoly_conj(D)).scaled(c2)
    residual = nn - dd
    scale = max(nn.scale(), dd.scale())
    defect = residual.scale()
    logger.debug("constancy check C^2={} defect={:.3e} scale={:.3e}", c2, defect, scale)
    if defect <= tol * scale:
        return float(np.sqrt(c2))
    return None


def _q_support(alpha: MultiIndex) -> List[MultiIndex]:
    support = [tuple(g) for g in itertools.product(*(range(a) for a in alpha))]
    return sorted(support, key=graded_lex_key, reverse=True)


def _balk_system(f: PolyAnalytic, C: float, support: List[MultiIndex]) -> np.ndarray:
    """Real matrix of N_beta*Q - C*conj(q_beta)*D_beta == 0, unknowns (Re q, Im q)."""
    K = len(support)
    col = {g: k for k, g in enumerate(support)}
    rows: List[np.ndarray] = []
    for beta in support:
        a = f.coefficient(beta)
        # linear map q -> A q + B conj(q) per output monomial
        A: Dict[MultiIndex, np.ndarray] = {}
        B: Dict[MultiIndex, np.ndarray] = {}
        for m, c in a.num.terms.items():
            for g in support:
                key = tuple(x + y for x, y in zip(m, g))
                A.setdefault(key, np.zeros(K, dtype=complex))[col[g]] += c
        for m, c in a.den.terms.items():
            B.setdefault(m, np.zeros(K, dtype=complex))[col[beta]] -= C * c
        for key in set(A) | set(B):
            a_row = A.get(key, np.zeros(K, dtype=complex))
            b_row = B.get(key, np.zeros(K, dtype=complex))
            plus, minus = a_row + b_row, a_row - b_row
            rows.append(np.concatenate([plus.real, -minus.imag]))
            rows.append(np.concatenate([plus.imag, minus.real]))
    return np.vstack(rows) if rows else np.zeros((0, 2 * K))


def _smallest_support(kernel: np.ndarray, K: int) -> np.ndarray:
    """Kernel vector whose Q has the smallest graded-lex leading monomial."""
    # columns are ordered leading-monomial first; the last echelon row wins
    basis = kernel.T.copy()
    order = [i for k in range(K) for i in (k, K + k)]
    work = basis[:, order]
    r = 0
    for c in range(work.shape[1]):
        if r == work.shape[0]:
            break
        p = r + int(np.argmax(np.abs(work[r:, c])))
        if abs(work[p, c]) < 1e-12:
            continue
        work[[r, p]] = work[[p, r]]
        work[r] /= work[r, c]
        for i in range(work.shape[0]):
            if i != r:
                work[i] -= work[i, c] * work[r]
        r += 1
    vec = np.zeros(2 * K)
    vec[order] = work[r - 1]
    return vec


def balk_decompose(f: PolyAnalytic, tol: Optional[float] = None) -> BalkForm:
    """Recover (lambda, Q) with f == lambda*conj(Q)/Q and Q monic."""
    C = is_constant_modulus(f, tol)
    if C is None:
        raise NoSolution("modulus is not constant", {"constant_modulus": False})
    if C == 0:
        return BalkForm(0j, CPoly.constant(1.0, f.n))
    alpha = exact_order(f)
    support = _q_support(alpha)
    K = len(support)
    M = _balk_system(f, C, support)
    kernel = null_space(M, rcond=_KERNEL_RCOND)
    dim = kernel.shape[1]
    logger.debug("balk system {}x{} kernel dim {}", M.shape[0], M.shape[1], dim)
    if dim == 0:
        raise NoSolution("only the trivial kernel", {"C": C, "unknowns": K})
    vec = kernel[:, 0] if dim == 1 else _smallest_support(kernel, K)
    q = vec[:K] + 1j * vec[K:]
    Q = CPoly(f.n, {g: c for g, c in zip(support, q) if abs(c) > 1e-9 * np.abs(q).max()})
    _, lead = Q.leading()
    form = BalkForm(C * lead.conjugate() / lead, Q.scaled(1 / lead))
    if dim > 1:
        logger.warning("balk kernel has dimension {}; using smallest-support candidate", dim)
        worst = _sample_defect(f, form)
        if worst > 1e-9 * (1 + C):
            raise RankDeficient(
                "kernel dimension exceeds one", {"kernel_dim": dim, "defect": worst}
            )
    return form


def _sample_defect(f: PolyAnalytic, form: BalkForm, count: int = 100) -> float:
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, (count, f.n)) + 1j * rng.uniform(-1, 1, (count, f.n))
    keep = ~f.singular_mask(pts) & (np.abs(form.Q.eval(pts)) > 1e-8)
    if not keep.any():
        return 0.0
    pts = pts[keep]
    return float(np.max(np.abs(f.eval(pts) - form.eval(pts))))


def balk_soundness(f: PolyAnalytic, form: BalkForm, count: int = 100) -> float:
    """Max |f - lambda*conj(Q)/Q| over seeded sample points."""
    return _sample_defect(f, form, count)


def balk_q_zeros(
    form: BalkForm, box: Sequence[float], nodes: int = 5
) -> List[List[complex]]:
    """Zeros of Q inside the box (re_min, re_max, im_min, im_max), per variable.

    In several variables the other coordinates are frozen on a nodes^2 grid
    per variable and Q is rooted in z_1.
    """
    if len(box) != 4:
        raise PreconditionViolation("box needs re_min, re_max, im_min, im_max", {"box": list(box)})
    x0, x1, y0, y1 = (float(b) for b in box)

    def inside(w: complex) -> bool:
        return x0 <= w.real <= x1 and y0 <= w.imag <= y1

    n = form.n
    axis = [complex(x, y) for x in np.linspace(x0, x1, nodes) for y in np.linspace(y0, y1, nodes)]
    frozen = list(itertools.product(axis, repeat=n - 1)) if n > 1 else [()]
    zeros: List[List[complex]] = []
    deg = form.Q.degree(0)
    for rest in frozen:
        if not all(inside(w) for w in rest):
            continue
        coeffs = np.zeros(deg + 1, dtype=complex)
        for m, c in form.Q.terms.items():
            coeffs[deg - m[0]] += c * np.prod([w ** e for w, e in zip(rest, m[1:])])
        nz = np.flatnonzero(np.abs(coeffs) > 1e-14)
        if nz.size == 0 or nz[0] == deg:
            continue
        for root in np.roots(coeffs[nz[0]:]):
            if inside(root):
                zeros.append([complex(root), *rest])
    return zeros

