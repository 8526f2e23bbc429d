"""Hypersurface geometry near 1-convex points.

M = {Im z_n = h(w, Re z_n)} with w = (z_1, ..., z_{n-1}). Complex lines along
the first Levi eigendirection, translated into the side {y > h}, cut out
analytic discs whose boundaries lie on M; sampling |f| on those discs checks
the one-sided maximum modulus property and the constant-modulus conclusion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.linalg import eigh, null_space

from .. import config, report_text
from ..errors import (
    AttachmentFailure,
    CoverageFailure,
    InsufficientSamples,
    NoPositiveEigenvalue,
    NotHermitianWithinTolerance,
    PreconditionViolation,
    RankDeficient,
    SingularOnClosure,
)
from .modulus import BalkForm, balk_decompose, is_constant_modulus
from .polycore import CPoly, graded_lex_key
from .sampling import PointSet, fit_polyanalytic
from .witnesses import MWitness

_FD_STEP = 1e-2
_RAY_SAMPLES = 48
_ANGLES = 64
_BISECTIONS = 60
_CHUNK = 64
_SINGULAR = 1e-8


# --- 1) The graph function ------------------------------------------------------------


@dataclass(frozen=True)
class HTerm:
    """Re(c * w^a * conj(w)^b * x^k)."""

    a: Tuple[int, ...]
    b: Tuple[int, ...]
    k: int
    c: complex

    @property
    def degree(self) -> int:
        return sum(self.a) + sum(self.b) + self.k


HFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GraphHypersurface:
    n: int
    terms: Tuple[HTerm, ...] = ()
    func: Optional[HFunc] = None
    box: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise PreconditionViolation("hypersurfaces need n >= 2", {"n": self.n})
        if self.func is not None and self.terms:
            raise PreconditionViolation("give polynomial terms or a callable, not both")
        m = self.n - 1
        for t in self.terms:
            if len(t.a) != m or len(t.b) != m or t.k < 0 or min(t.a + t.b, default=0) < 0:
                raise PreconditionViolation("term exponents do not fit n", {"n": self.n, "term": repr(t)})
        if self.func is None:
            lin = self._linear_part()
            if any(abs(v) > 1e-14 for v in lin):
                raise PreconditionViolation("h must vanish to second order at 0", {"linear_part": [abs(v) for v in lin]})

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def is_polynomial(self) -> bool:
        return self.func is None

    def is_quadric(self) -> bool:
        return self.is_polynomial and all(t.degree <= 2 for t in self.terms)

    def _linear_part(self) -> List[complex]:
        """h(0), then the coefficients of w_j (complex) and x (real)."""
        m = self.m
        const = sum(t.c.real for t in self.terms if t.degree == 0)
        wj = [0j] * m
        x = 0.0
        for t in self.terms:
            if t.degree != 1:
                continue
            if t.k == 1:
                x += t.c.real
            elif sum(t.a) == 1:
                wj[t.a.index(1)] += 0.5 * t.c
            else:
                wj[t.b.index(1)] += 0.5 * np.conj(t.c)
        return [const, *wj, x]

    def eval(self, w, x) -> np.ndarray:
        w = np.asarray(w, dtype=complex).reshape(-1, self.m)
        x = np.broadcast_to(np.asarray(x, dtype=float).ravel(), (w.shape[0],))
        if self.func is not None:
            return np.asarray(self.func(w, x), dtype=float).ravel()
        out = np.zeros(w.shape[0])
        wb = np.conj(w)
        for t in self.terms:
            mono = np.full(w.shape[0], t.c, dtype=complex)
            for j in range(self.m):
                if t.a[j]:
                    mono = mono * w[:, j] ** t.a[j]
                if t.b[j]:
                    mono = mono * wb[:, j] ** t.b[j]
            if t.k:
                mono = mono * x ** t.k
            out += mono.real
        return out

    def third_bound(self) -> float:
        """Bound on third derivatives over |w_k|, |x| <= box."""
        if self.is_polynomial:
            return float(
                sum(
                    abs(t.c) * t.degree * (t.degree - 1) * (t.degree - 2) * self.box ** (t.degree - 3)
                    for t in self.terms
                    if t.degree >= 3
                )
            )
        return _third_bound_fd(self)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"n": self.n, "box": self.box, "label": self.label, "polynomial": self.is_polynomial}
        if self.is_polynomial:
            out["terms"] = [
                {"a": list(t.a), "b": list(t.b), "k": t.k, "c": [t.c.real, t.c.imag]} for t in self.terms
            ]
        return out


def from_terms(n: int, terms: Sequence[Tuple[Sequence[int], Sequence[int], int, complex]], box: float = 1.0, label: str = "") -> GraphHypersurface:
    hterms = tuple(HTerm(tuple(int(v) for v in a), tuple(int(v) for v in b), int(k), complex(c)) for a, b, k, c in terms)
    return GraphHypersurface(n, hterms, None, box, label)


def from_callable(n: int, func: HFunc, box: float = 1.0, label: str = "") -> GraphHypersurface:
    return GraphHypersurface(n, (), func, box, label)


BUILTIN: Dict[str, Tuple[int, List[Tuple[Tuple[int, ...], Tuple[int, ...], int, complex]]]] = {
    "sphere": (2, [((1,), (1,), 0, 1.0)]),
    "negative": (2, [((1,), (1,), 0, -1.0)]),
    "harmonic": (2, [((2,), (0,), 0, 1.0)]),
    "saddle": (3, [((1, 0), (1, 0), 0, 1.0), ((0, 1), (0, 1), 0, -1.0)]),
    "cubic": (2, [((1,), (1,), 0, 1.0), ((2,), (1,), 0, 0.5)]),
}


def builtin(name: str, box: float = 1.0) -> GraphHypersurface:
    if name not in BUILTIN:
        raise PreconditionViolation("unknown builtin hypersurface", {"id": name, "known": sorted(BUILTIN)})
    n, terms = BUILTIN[name]
    return from_terms(n, terms, box=box, label=name)


def rotate_hypersurface(M: GraphHypersurface, V) -> GraphHypersurface:
    """h'(w, x) = h(V w, x) for a unitary V acting on w."""
    V = np.asarray(V, dtype=complex)
    m = M.m
    if V.shape != (m, m) or np.max(np.abs(V @ V.conj().T - np.eye(m))) > 1e-12:
        raise PreconditionViolation("V must be an (n-1)x(n-1) unitary", {"shape": list(V.shape)})
    if not M.is_polynomial:
        func = M.func
        return from_callable(M.n, lambda w, x: func(w @ V.T, x), M.box, M.label)
    block = np.zeros((2 * m, 2 * m), dtype=complex)
    block[:m, :m] = V
    block[m:, m:] = V.conj()
    collected: Dict[Tuple[Tuple[int, ...], Tuple[int, ...], int], complex] = {}
    for t in M.terms:
        mono = CPoly.monomial(t.a + t.b, t.c).compose_linear(block)
        for exp, c in mono.terms.items():
            key = (exp[:m], exp[m:], t.k)
            collected[key] = collected.get(key, 0j) + c
    scale = max((abs(c) for c in collected.values()), default=0.0)
    terms = [(a, b, k, c) for (a, b, k), c in collected.items() if abs(c) > 1e-14 * scale]
    return from_terms(M.n, terms, M.box, M.label)


def _real_point(M: GraphHypersurface, v: np.ndarray) -> np.ndarray:
    """h at real coordinates v = (Re w, Im w, x), one row per point."""
    m = M.m
    w = v[:, :m] + 1j * v[:, m : 2 * m]
    return M.eval(w, v[:, 2 * m])


def _real_hessian(M: GraphHypersurface, step: float) -> np.ndarray:
    dim = 2 * M.m + 1
    E = np.eye(dim) * step
    H = np.zeros((dim, dim))
    f0 = _real_point(M, np.zeros((1, dim)))[0]
    for p in range(dim):
        plus, minus = _real_point(M, E[p][None, :])[0], _real_point(M, -E[p][None, :])[0]
        H[p, p] = (plus - 2 * f0 + minus) / step ** 2
        for q in range(p + 1, dim):
            pts = np.stack([E[p] + E[q], E[p] - E[q], -E[p] + E[q], -E[p] - E[q]])
            pp, pm, mp, mm = _real_point(M, pts)
            H[p, q] = H[q, p] = (pp - pm - mp + mm) / (4 * step ** 2)
    return H


def _wirtinger_from_hessian(H: np.ndarray, m: int) -> np.ndarray:
    xs, ys = slice(0, m), slice(m, 2 * m)
    return 0.25 * (H[xs, xs] + H[ys, ys] + 1j * (H[xs, ys] - H[ys, xs]))


def _third_bound_fd(M: GraphHypersurface) -> float:
    rng = np.random.default_rng(3)
    dim = 2 * M.m + 1
    s = _FD_STEP * M.box
    base = rng.uniform(-0.5, 0.5, (64, dim)) * M.box
    v = rng.normal(size=(64, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    vals = [_real_point(M, base + k * s * v) for k in (2, 1, -1, -2)]
    third = (vals[0] - 2 * vals[1] + 2 * vals[2] - vals[3]) / (2 * s ** 3)
    return 2.0 * float(np.max(np.abs(third)))


# --- 2) Levi form -----------------------------------------------------------------------


@dataclass(frozen=True)
class LeviData:
    S: np.ndarray
    U: np.ndarray
    Lambda: np.ndarray

    @property
    def positive(self) -> bool:
        return bool(self.Lambda[0] > 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "S": [[[v.real, v.imag] for v in row] for row in self.S],
            "U": [[[v.real, v.imag] for v in row] for row in self.U],
            "eigenvalues": [float(v) for v in self.Lambda],
            "positive_eigenvalue": self.positive,
        }


def _exact_levi(M: GraphHypersurface) -> np.ndarray:
    m = M.m
    S = np.zeros((m, m), dtype=complex)
    for t in M.terms:
        if t.k or sum(t.a) != 1 or sum(t.b) != 1:
            continue
        j, k = t.a.index(1), t.b.index(1)
        S[j, k] += 0.5 * t.c
        S[k, j] += 0.5 * np.conj(t.c)
    return S


def levi_matrix(M: GraphHypersurface) -> np.ndarray:
    """[d^2 h / dw_j dconj(w_k)] at 0; exact for polynomials, Richardson-refined otherwise."""
    if M.is_polynomial:
        return _exact_levi(M)
    coarse = _wirtinger_from_hessian(_real_hessian(M, _FD_STEP), M.m)
    fine = _wirtinger_from_hessian(_real_hessian(M, _FD_STEP / 2), M.m)
    S = (4 * fine - coarse) / 3
    gap = float(np.max(np.abs(fine - coarse)))
    if gap > 1e-3 * (1 + float(np.max(np.abs(S)))):
        logger.warning("finite-difference Levi matrix still moves by {:.2e} under refinement", gap)
    return S


def levi_from_matrix(S) -> LeviData:
    S = np.atleast_2d(np.asarray(S, dtype=complex))
    defect = float(np.max(np.abs(S - S.conj().T))) if S.size else 0.0
    if defect >= config.DEFAULTS.hermitian_defect:
        raise NotHermitianWithinTolerance("Levi matrix is not Hermitian", {"defect": defect})
    S = 0.5 * (S + S.conj().T)
    vals, vecs = eigh(S)
    return LeviData(S, vecs[:, ::-1], vals[::-1].real.copy())


def levi_form(M: GraphHypersurface) -> LeviData:
    L = levi_from_matrix(levi_matrix(M))
    logger.debug("levi eigenvalues {}", L.Lambda)
    return L


# --- 3) Attached discs ------------------------------------------------------------------


@dataclass
class DiscFamily:
    """Discs {zeta : h(w(zeta), x) < y} on lines w = conj(U) (zeta, rest), z_n = x + iy.

    Each disc is star-shaped about zeta = 0; `radii[d, k]` is where the ray at
    angles[k] meets M.
    """

    M: GraphHypersurface
    L: LeviData
    eps: float
    delta: float
    x: np.ndarray
    y: np.ndarray
    rest: np.ndarray
    angles: np.ndarray
    radii: np.ndarray
    c1: float = 0.0
    c2: float = 0.0
    halvings: int = 0
    attachment_defect: float = 0.0
    attachment_tol: float = 0.0
    dropped: int = 0
    coverage: Dict[str, Any] = field(default_factory=dict)
    grid: Dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.x.size)

    def points(self, d: int, zeta) -> np.ndarray:
        """(K, n) points of C^n on line d at parameters zeta."""
        zeta = np.asarray(zeta, dtype=complex).ravel()
        return _line_points(self.L.U, zeta, self.rest[d], self.x[d], self.y[d])

    def boundary(self, d: int) -> np.ndarray:
        return self.points(d, self.radii[d] * np.exp(1j * self.angles))

    def interior(self, d: int, levels: int) -> np.ndarray:
        s = np.linspace(0.0, 1.0, levels + 1)[:-1]
        zeta = (s[:, None] * self.radii[d][None, :] * np.exp(1j * self.angles)[None, :]).ravel()
        return self.points(d, zeta)

    def contains(self, d: int, zeta: complex) -> bool:
        theta = math.atan2(zeta.imag, zeta.real) % (2 * math.pi)
        ang = np.append(self.angles, 2 * math.pi)
        rad = np.append(self.radii[d], self.radii[d][0])
        return abs(zeta) < float(np.interp(theta, ang, rad))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "discs": len(self),
            "eps": self.eps,
            "delta": self.delta,
            "halvings": self.halvings,
            "c1": self.c1,
            "c2": self.c2,
            "attachment_defect": self.attachment_defect,
            "attachment_tol": self.attachment_tol,
            "dropped": self.dropped,
            "angles": int(self.angles.size),
            "eigenvalues": [float(v) for v in self.L.Lambda],
            "coverage": self.coverage,
        }


def _line_points(U: np.ndarray, zeta: np.ndarray, rest: np.ndarray, x: float, y: float) -> np.ndarray:
    omega = np.concatenate([zeta[:, None], np.broadcast_to(rest, (zeta.size, rest.size))], axis=1)
    w = omega @ U.conj().T
    zn = np.full((zeta.size, 1), complex(x, y))
    return np.concatenate([w, zn], axis=1)


def _to_w(U: np.ndarray, zeta: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """w = conj(U) @ (zeta, rest), broadcasting zeta (...,) against rest (..., m-1)."""
    shape = np.broadcast_shapes(zeta.shape, rest.shape[:-1])
    omega = np.concatenate(
        [np.broadcast_to(zeta, shape)[..., None], np.broadcast_to(rest, shape + rest.shape[-1:])], axis=-1
    )
    return omega @ U.conj().T


def _parameter_grid(m: int, eps: float, delta: float, counts: int, rest_counts: int):
    xs = np.linspace(-delta / 2, delta / 2, counts)
    ys = np.linspace(-eps, eps, counts + 2)[1:-1]
    reach = math.sqrt(max(m, 1)) * delta / 2
    axis = np.linspace(-reach, reach, rest_counts) if m > 1 else np.zeros(0)
    rest_axis = [complex(a, b) for a in axis for b in axis] if m > 1 else []
    rest_list = list(itertools.product(rest_axis, repeat=m - 1)) if m > 1 else [()]
    grid = [(x, y, r) for x in xs for y in ys for r in rest_list]
    X = np.array([g[0] for g in grid])
    Y = np.array([g[1] for g in grid])
    R = np.array([g[2] for g in grid], dtype=complex).reshape(len(grid), m - 1)
    return X, Y, R, {"x": xs, "y": ys, "rest": axis}


def _trace_rays(M: GraphHypersurface, U, X, Y, R, delta: float, angles: np.ndarray):
    """Boundary radius per (disc, angle); NaN rows for discs leaving the box."""
    m = M.m
    r = np.linspace(0.0, 2 * delta * math.sqrt(m), _RAY_SAMPLES + 1)
    dirs = np.exp(1j * angles)
    radii = np.full((X.size, angles.size), np.nan)
    for lo in range(0, X.size, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, X.size))
        c = sl.stop - sl.start
        zeta = dirs[None, :, None] * r[None, None, :]
        w = _to_w(U, np.broadcast_to(zeta, (c,) + zeta.shape[1:]), R[sl][:, None, None, :])
        xb = np.broadcast_to(X[sl][:, None, None], w.shape[:-1])
        phi = M.eval(w.reshape(-1, m), xb.ravel()).reshape(w.shape[:-1]) - Y[sl][:, None, None]
        inbox = np.all(np.abs(w) < delta, axis=-1)
        hit = (phi >= 0) | ~inbox
        hit[..., 0] = False
        stop = np.argmax(hit, axis=-1)
        found = hit.any(axis=-1)
        sel = np.take_along_axis
        ok = found & sel(inbox, stop[..., None], -1)[..., 0] & (sel(phi, stop[..., None], -1)[..., 0] >= 0)
        keep = ok.all(axis=1) & (phi[:, :, 0] < 0).all(axis=1)

        later = (np.arange(r.size)[None, None, :] > stop[..., None]) & inbox & (phi < 0)
        bad = keep[:, None] & later.any(axis=-1)
        if bad.any():
            d, k = np.argwhere(bad)[0]
            raise AttachmentFailure(
                "disc boundary is not a single closed curve",
                {"x": float(X[sl][d]), "y": float(Y[sl][d]), "angle": float(angles[k])},
            )
        lo_r = r[np.maximum(stop - 1, 0)]
        hi_r = r[stop]
        for _ in range(_BISECTIONS):
            mid = 0.5 * (lo_r + hi_r)
            wm = _to_w(U, mid * dirs[None, :], R[sl][:, None, :])
            xm = np.broadcast_to(X[sl][:, None], wm.shape[:-1])
            pm = M.eval(wm.reshape(-1, m), xm.ravel()).reshape(wm.shape[:-1]) - Y[sl][:, None]
            inside = pm < 0
            lo_r = np.where(inside, mid, lo_r)
            hi_r = np.where(inside, hi_r, mid)
        block = 0.5 * (lo_r + hi_r)
        block[~keep] = np.nan
        radii[sl] = block
    return radii


def _attachment_defect(M: GraphHypersurface, U, X, Y, R, angles, radii) -> Tuple[float, int]:
    zeta = radii * np.exp(1j * angles)[None, :]
    w = _to_w(U, zeta, R[:, None, :])
    xb = np.broadcast_to(X[:, None], zeta.shape)
    err = np.abs(Y[:, None] - M.eval(w.reshape(-1, M.m), xb.ravel()).reshape(zeta.shape))
    per_disc = err.max(axis=1)
    worst = int(np.argmax(per_disc)) if per_disc.size else 0
    return (float(per_disc[worst]) if per_disc.size else 0.0), worst


def _lipschitz(M: GraphHypersurface, U, delta: float, rng: np.random.Generator) -> Tuple[float, float]:
    """|dh/dx| and |grad_rest h| over the box, in line coordinates."""
    m = M.m
    N = 256
    w = (rng.uniform(-1, 1, (N, m)) + 1j * rng.uniform(-1, 1, (N, m))) * delta / math.sqrt(2)
    x = rng.uniform(-delta, delta, N)
    s = 1e-4 * delta
    Lx = np.max(np.abs(M.eval(w, x + s) - M.eval(w, x - s))) / (2 * s)
    grad = np.zeros(N)
    Ub = U.conj()
    for k in range(1, m):
        for unit in (1.0, 1j):
            shift = s * unit * Ub[:, k]
            grad += ((M.eval(w + shift, x) - M.eval(w - shift, x)) / (2 * s)) ** 2
    return 1.25 * float(Lx), 1.25 * float(np.sqrt(grad.max(initial=0.0)))


def sample_one_sided(
    M: GraphHypersurface, delta: float, eps: float, c1: float, c2: float, count: int, seed: int = 0
) -> np.ndarray:
    """Seeded points of {|w_k| < delta/2, |x| < delta/2, c1 < y - h < c2, |y| < eps}."""
    rng = np.random.default_rng(seed)
    m = M.m
    batch = 4 * count
    rad = delta / 2 * np.sqrt(rng.uniform(0, 1, (batch, m)))
    w = rad * np.exp(2j * math.pi * rng.uniform(0, 1, (batch, m)))
    x = rng.uniform(-delta / 2, delta / 2, batch)
    y = M.eval(w, x) + rng.uniform(c1, c2, batch)
    keep = np.abs(y) < eps
    pts = np.concatenate([w, (x + 1j * y)[:, None]], axis=1)[keep][:count]
    if pts.shape[0] == 0:
        raise CoverageFailure("the one-sided box holds no sample point", {"c1": c1, "c2": c2})
    return pts


def _check_coverage(D: DiscFamily, count: int, seed: int, index: Dict[Tuple[int, ...], int]) -> Dict[str, Any]:
    M, U, m = D.M, D.L.U, D.M.m
    pts = sample_one_sided(M, D.delta, D.eps, D.c1, D.c2, count, seed)
    xs, ys, axis = D.grid["x"], D.grid["y"], D.grid["rest"]
    missed = 0
    worst: Optional[List[float]] = None
    for p in pts:
        omega = U.T @ p[:m]
        key = [int(np.argmin(np.abs(xs - p[m].real))), int(np.argmin(np.abs(ys - p[m].imag)))]
        for r in omega[1:]:
            key += [int(np.argmin(np.abs(axis - r.real))), int(np.argmin(np.abs(axis - r.imag)))]
        d = index.get(tuple(key))
        if d is None or not D.contains(d, complex(omega[0])):
            missed += 1
            worst = [float(v) for v in (p[m].real, p[m].imag)]
    if missed:
        raise CoverageFailure(
            "sampled one-sided points outside every disc",
            {"missed": missed, "samples": int(pts.shape[0]), "example_xy": worst},
        )
    return {"samples": int(pts.shape[0]), "missed": 0, "c1": D.c1, "c2": D.c2}


def build_disc_family(
    M: GraphHypersurface,
    L: LeviData,
    eps: float,
    delta: float,
    counts: Optional[int] = None,
    rest_counts: int = 6,
    seed: int = 0,
    verify_coverage: bool = True,
) -> DiscFamily:
    """Translated complex lines along the first Levi eigendirection, cut by {y > h}.

    eps and delta halve until the third-derivative remainder is dominated by
    lambda_1/4 on the box. Discs whose region leaves the box are dropped; the
    rest are checked for attachment and then for covering a one-sided box.
    """
    if not (eps > 0 and delta > 0):
        raise PreconditionViolation("eps and delta must be positive", {"eps": eps, "delta": delta})
    lam1 = float(L.Lambda[0])
    if lam1 <= 0:
        raise NoPositiveEigenvalue("Levi form has no positive eigenvalue", {"eigenvalues": [float(v) for v in L.Lambda]})
    counts = config.DEFAULTS.disc_count if counts is None else counts
    B3 = M.third_bound()
    halvings = 0
    while B3 * delta / 6 > lam1 / 4:
        if halvings == config.DEFAULTS.max_halvings:
            raise AttachmentFailure(
                "box never entered the quadratic-dominance regime",
                {"halvings": halvings, "third_bound": B3, "lambda1": lam1},
            )
        eps, delta, halvings = eps / 2, delta / 2, halvings + 1
    if halvings:
        logger.info("shrunk box {} times to eps={:.3e} delta={:.3e}", halvings, eps, delta)

    m, U = M.m, L.U
    X, Y, R, grid = _parameter_grid(m, eps, delta, counts, rest_counts)
    w0 = _to_w(U, np.zeros(X.size, dtype=complex), R)
    centre_ok = np.all(np.abs(w0) < delta, axis=-1) & (M.eval(w0, X) < Y)
    grid_keys = list(itertools.product(*(range(k) for k in [counts, counts] + [len(grid["rest"])] * (2 * (m - 1)))))
    X, Y, R = X[centre_ok], Y[centre_ok], R[centre_ok]
    keys = [k for k, ok in zip(grid_keys, centre_ok) if ok]

    angles = np.linspace(0.0, 2 * math.pi, _ANGLES, endpoint=False)
    radii = _trace_rays(M, U, X, Y, R, delta, angles)
    kept = ~np.isnan(radii).any(axis=1)
    dropped = int((~kept).sum())
    X, Y, R, radii = X[kept], Y[kept], R[kept], radii[kept]
    keys = [k for k, ok in zip(keys, kept) if ok]
    if X.size == 0:
        raise AttachmentFailure("no disc stays inside the box", {"eps": eps, "delta": delta})

    tol = 1e-6 * delta if M.is_quadric() else 10 * B3 * delta ** 3
    defect, worst = _attachment_defect(M, U, X, Y, R, angles, radii)
    if defect >= tol:
        raise AttachmentFailure(
            "disc boundary leaves the hypersurface",
            {"defect": defect, "tol": tol, "x": float(X[worst]), "y": float(Y[worst])},
        )

    # margin c1 covers the distance from any parameter to its nearest grid disc
    rng = np.random.default_rng(seed)
    Lx, Lrest = _lipschitz(M, U, delta, rng)
    dx = delta / max(counts - 1, 1)
    dy = 2 * eps / (counts + 1)
    dr = float(grid["rest"][1] - grid["rest"][0]) if grid["rest"].size > 1 else 0.0
    c1 = 2 * (dy / 2 + Lx * dx / 2 + Lrest * dr * math.sqrt(2 * (m - 1)) / 2)
    c2 = eps / 2
    family = DiscFamily(
        M, L, eps, delta, X, Y, R, angles, radii,
        c1=c1, c2=c2, halvings=halvings, attachment_defect=defect, attachment_tol=tol,
        dropped=dropped, grid=grid,
    )
    logger.debug("disc family: {} discs, {} dropped, defect {:.2e}", len(family), dropped, defect)
    if not verify_coverage:
        return family
    if c1 >= c2:
        raise CoverageFailure("parameter grid too coarse for a one-sided box", {"c1": c1, "c2": c2})
    index = {k: i for i, k in enumerate(keys)}
    family.coverage = _check_coverage(family, config.DEFAULTS.coverage_samples, seed, index)
    return family


# --- 4) Maximum modulus on the discs ----------------------------------------------------


@dataclass
class BmmpReport:
    max_interior: float
    max_boundary: float
    defect: float
    bound: float
    holds: bool
    worst_disc: int
    reciprocal: Optional[Dict[str, Any]] = None
    remark: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_interior": self.max_interior,
            "max_boundary": self.max_boundary,
            "defect": self.defect,
            "sampling_bound": self.bound,
            "holds": self.holds,
            "worst_disc": self.worst_disc,
            "reciprocal": self.reciprocal,
            "remark": self.remark,
        }


def _disc_samples(D: DiscFamily, levels: int) -> Tuple[np.ndarray, np.ndarray]:
    inner = np.stack([D.interior(d, levels) for d in range(len(D))])
    outer = np.stack([D.boundary(d) for d in range(len(D))])
    return inner, outer


def _max_principle(inner: np.ndarray, outer: np.ndarray, bpts: np.ndarray) -> Dict[str, Any]:
    """inner (D, K), outer (D, A) moduli; bpts (D, A, n) boundary points."""
    max_i = inner.max(axis=1)
    max_b = outer.max(axis=1)
    step = np.linalg.norm(bpts - np.roll(bpts, 1, axis=1), axis=2)
    jump = np.abs(outer - np.roll(outer, 1, axis=1))
    lip = np.max(jump / np.maximum(step, 1e-300), axis=1)
    bound = lip * step.max(axis=1) + 1e-12 * max_b
    defect = np.maximum(0.0, max_i - max_b)
    ratio = np.where(bound > 0, defect / np.maximum(bound, 1e-300), np.where(defect > 0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    return {
        "max_interior": float(max_i.max()),
        "max_boundary": float(max_b.max()),
        "defect": float(defect[worst]),
        "bound": float(bound[worst]),
        "holds": bool(np.all(defect <= bound)),
        "worst_disc": worst,
        "min_boundary": float(outer.min()),
    }


def bmmp_verify(f: MWitness, D: DiscFamily, grid: Optional[int] = None, reciprocal: bool = False) -> BmmpReport:
    """Compare interior and boundary maxima of |f| on every disc of D."""
    levels = config.DEFAULTS.bmmp_grid if grid is None else grid
    if f.n != D.M.n:
        raise PreconditionViolation("witness and hypersurface differ in dimension", {"f": f.n, "M": D.M.n})
    inner, outer = _disc_samples(D, levels)
    everything = np.concatenate([inner.reshape(-1, f.n), outer.reshape(-1, f.n)])
    den = f.denominator(everything)
    if den.min() < _SINGULAR:
        raise SingularOnClosure("witness has a pole on a disc closure", {"min_denominator": float(den.min())})
    vi = np.abs(f.eval(inner.reshape(-1, f.n))).reshape(inner.shape[:2])
    vo = np.abs(f.eval(outer.reshape(-1, f.n))).reshape(outer.shape[:2])
    main = _max_principle(vi, vo, outer)
    recip = None
    if reciprocal:
        if min(vi.min(), vo.min()) < _SINGULAR:
            raise SingularOnClosure("witness vanishes on a disc closure", {"min_modulus": float(min(vi.min(), vo.min()))})
        r = _max_principle(1.0 / vi, 1.0 / vo, outer)
        recip = {
            **r,
            "applies": f.kind in ("holomorphic", "balk_quotient"),
            "reciprocal_max": max(r["max_interior"], r["max_boundary"]),
            "inverse_min_boundary": 1.0 / main["min_boundary"],
        }
    holds = main["holds"] and (recip is None or not recip["applies"] or recip["holds"])
    logger.debug("bmmp defect {:.3e} bound {:.3e}", main["defect"], main["bound"])
    return BmmpReport(
        main["max_interior"], main["max_boundary"], main["defect"], main["bound"], holds,
        main["worst_disc"], recip, report_text.BMMP_REMARK if holds else "",
    )


# --- 5) Constant modulus on the trace ---------------------------------------------------


@dataclass
class TraceReport:
    verdict: str
    mean_modulus: float
    std_modulus: float
    form: Optional[BalkForm] = None
    slice_form: Optional[BalkForm] = None
    match_residual: Optional[float] = None
    matches_balk_form: Optional[bool] = None
    remark: str = ""

    def to_dict(self) -> Dict[str, Any]:
        def pack(form: Optional[BalkForm]) -> Optional[Dict[str, Any]]:
            if form is None:
                return None
            return {
                "lambda": [form.lam.real, form.lam.imag],
                "modulus": form.modulus,
                "Q": [{"exp": list(k), "c": [c.real, c.imag]} for k, c in sorted(form.Q.terms.items())],
                "Q_degree": form.Q.total_degree(),
            }

        return {
            "verdict": self.verdict,
            "mean_modulus": self.mean_modulus,
            "std_modulus": self.std_modulus,
            "form": pack(self.form),
            "slice_form": pack(self.slice_form),
            "match_residual": self.match_residual,
            "matches_balk_form": self.matches_balk_form,
            "remark": self.remark,
        }


def _central_disc(D: DiscFamily) -> int:
    score = np.abs(D.x) + np.abs(D.y - np.median(D.y)) + (np.abs(D.rest).sum(axis=1) if D.rest.size else 0)
    return int(np.argmin(score))


def _slice_form(f: MWitness, D: DiscFamily) -> Optional[BalkForm]:
    """Balk form of an exact polyanalytic fit along the central disc, if one exists."""
    d = _central_disc(D)
    s = np.linspace(0.0, 1.0, 9)[1:-1]
    zeta = (s[:, None] * D.radii[d][None, :] * np.exp(1j * D.angles)[None, :]).ravel()
    values = f.eval(D.points(d, zeta))
    samples = PointSet(complex(D.radii[d].max() * 2), zeta, values)
    for q in range(1, 4):
        for deg in range(0, 5):
            try:
                fit = fit_polyanalytic(samples, q, deg)
            except (RankDeficient, InsufficientSamples):
                continue
            if fit.residual < 1e-10:
                if is_constant_modulus(fit.f, tol=1e-8) is None:
                    return None
                return balk_decompose(fit.f, tol=1e-8)
    return None


def _monomials(pts: np.ndarray, support: List[Tuple[int, ...]]) -> np.ndarray:
    return np.stack([np.prod(pts ** np.array(g)[None, :], axis=1) for g in support], axis=1)


def _sampled_balk(f: MWitness, pts: np.ndarray, C: float) -> Optional[BalkForm]:
    """Solve f*Q == C*conj(Q) for Q over the samples, with Q of degree < order(f)."""
    support = sorted(
        (tuple(g) for g in itertools.product(*(range(a) for a in f.order()))), key=graded_lex_key, reverse=True
    )
    K = len(support)
    Phi = _monomials(pts, support)
    A = f.eval(pts)[:, None] * Phi
    B = -C * np.conj(Phi)
    plus, minus = A + B, A - B
    system = np.vstack([np.hstack([plus.real, -minus.imag]), np.hstack([plus.imag, minus.real])])
    kernel = null_space(system, rcond=1e-9)
    if kernel.shape[1] == 0:
        return None
    vec = kernel[:, -1]
    q = vec[:K] + 1j * vec[K:]
    Q = CPoly(f.n, {g: c for g, c in zip(support, q) if abs(c) > 1e-9 * np.abs(q).max()})
    _, lead = Q.leading()
    return BalkForm(C * np.conj(lead) / lead, Q.scaled(1 / lead))


def constant_modulus_trace(f: MWitness, M: GraphHypersurface, D: DiscFamily, seed: int = 1) -> TraceReport:
    """Is |f| constant on the M-patch, and is f then lambda*conj(Q)/Q on the extension side?"""
    tol = config.DEFAULTS.trace_tol
    trace = np.concatenate([D.boundary(d) for d in range(len(D))])
    if f.denominator(trace).min() < _SINGULAR:
        raise SingularOnClosure("witness has a pole on the hypersurface patch")
    mod = np.abs(f.eval(trace))
    C, spread = float(mod.mean()), float(mod.std())
    if spread >= tol * (1 + C):
        return TraceReport("non_constant_trace", C, spread)
    if C < tol:
        zero = BalkForm(0j, CPoly.constant(1.0, f.n))
        return TraceReport("constant_trace", C, spread, zero, zero, 0.0, True, report_text.TRACE_REMARK)

    slice_form = _slice_form(f, D)
    side = sample_one_sided(M, D.delta, D.eps, max(D.c1, 1e-12), D.c2, 4 * f.n * 32, seed)
    form = _sampled_balk(f, side, C)
    if form is None:
        return TraceReport("constant_trace", C, spread, None, slice_form, None, False)
    fresh = sample_one_sided(M, D.delta, D.eps, max(D.c1, 1e-12), D.c2, 200, seed + 1)
    keep = np.abs(form.Q.eval(fresh)) > _SINGULAR
    residual = float(np.max(np.abs(f.eval(fresh[keep]) - form.eval(fresh[keep])), initial=0.0))
    matches = residual < 1e-6 * (1 + C)
    logger.debug("trace C={:.6g} balk residual {:.2e}", C, residual)
    return TraceReport(
        "constant_trace", C, spread, form, slice_form, residual, matches,
        report_text.TRACE_REMARK if matches else "",
    )


# --- 6) Heatmap slice -------------------------------------------------------------------


def disc_slice(f: MWitness, D: DiscFamily, d: Optional[int] = None, size: int = 64) -> np.ndarray:
    """|f| on a size x size zeta-grid around disc d; NaN outside the disc."""
    d = _central_disc(D) if d is None else d
    r = float(D.radii[d].max())
    t = np.linspace(-r, r, size)
    zeta = (t[None, :] + 1j * t[::-1, None]).ravel()
    inside = np.array([D.contains(d, z) for z in zeta])
    out = np.full(zeta.size, np.nan)
    if inside.any():
        out[inside] = np.abs(f.eval(D.points(d, zeta[inside])))
    return out.reshape(size, size)
