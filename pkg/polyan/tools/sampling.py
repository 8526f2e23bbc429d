"""Condensation-point geometry, polyanalytic least squares, uniqueness verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.linalg import lstsq

from .. import config
from ..errors import InsufficientSamples, PreconditionViolation, RankDeficient
from .polycore import CPoly, PolyAnalytic

# grid cells per angular_resolution when scanning directions
_SUBDIVISION = 16


@dataclass(frozen=True)
class PointSet:
    base: complex
    points: np.ndarray
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "base", complex(self.base))
        if np.any(pts == self.base):
            raise PreconditionViolation("points must differ from the base point")
        if self.values is not None:
            vals = np.asarray(self.values, dtype=complex).ravel()
            if vals.shape != pts.shape:
                raise PreconditionViolation(
                    "values and points differ in length",
                    {"points": int(pts.size), "values": int(vals.size)},
                )
            object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.points.size)

    def with_values(self, values) -> "PointSet":
        return PointSet(self.base, self.points, values)

    def rotated(self, phi: float) -> "PointSet":
        w = np.exp(1j * phi)
        return PointSet(self.base * w, self.points * w, self.values)


@dataclass
class DirectionReport:
    angles: List[float]
    order: int
    counts: List[int] = field(default_factory=list)
    min_t: List[float] = field(default_factory=list)
    shells: int = 0
    angular_resolution: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "angles": self.angles,
            "order": self.order,
            "clusters": [{"count": c, "min_t": t} for c, t in zip(self.counts, self.min_t)],
            "shells": self.shells,
            "angular_resolution": self.angular_resolution,
        }


@dataclass
class FitResult:
    f: PolyAnalytic
    residual: float
    condition: float

    def __iter__(self) -> Iterator[Any]:
        return iter((self.f, self.residual, self.condition))


# --- 1) Limiting directions ------------------------------------------------------


def _line_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance between line angles modulo pi."""
    d = np.abs(a - b) % math.pi
    return np.minimum(d, math.pi - d)


def _radial_shells(radius: np.ndarray, shells: int) -> List[np.ndarray]:
    """Innermost shell first, as masks over the points.

    Shell boundaries halve in radius from the farthest point. Of all windows of
    `shells` consecutive halvings, the one whose sparsest shell holds the most
    points wins, the deeper one on ties; its innermost shell also takes every
    point closer in.
    """
    # exact halvings stay on their level under rounding
    level = np.floor(np.log2(radius.max() / radius) + 1e-9).astype(int)
    best_count, best = -1, []
    for deepest in range(shells - 1, max(int(level.max()), shells - 1) + 1):
        masks = [level >= deepest] + [level == deepest - k for k in range(1, shells)]
        sparsest = min(int(m.sum()) for m in masks)
        if sparsest >= best_count:
            best_count, best = sparsest, masks
    if best_count < 1:
        raise InsufficientSamples(
            "too few radial scales to populate shells",
            {"points": int(radius.size), "shells": shells, "levels": int(level.max()) + 1},
        )
    return best


def _cyclic_runs(valid: np.ndarray) -> List[Tuple[int, int]]:
    """(start, length) of runs of True on a cyclic array."""
    n = valid.size
    if valid.all():
        return [(0, n)]
    if not valid.any():
        return []
    shift = int(np.argmin(valid))  # a False cell; runs never wrap past it
    rolled = np.roll(valid, -shift)
    runs, k = [], 0
    while k < n:
        if rolled[k]:
            j = k
            while j < n and rolled[j]:
                j += 1
            runs.append(((k + shift) % n, j - k))
            k = j
        else:
            k += 1
    return runs


def limiting_directions(
    E: PointSet,
    shells: Optional[int] = None,
    angular_resolution: Optional[float] = None,
) -> DirectionReport:
    """Line directions along which E accumulates at its base point.

    A direction survives when each of the innermost radial shells (see
    _radial_shells) has a point within angular_resolution of it. Runs of
    surviving angles wider than two resolutions are split into evenly spaced
    directions; narrower neighbours merge.
    """
    shells = config.DEFAULTS.shells if shells is None else shells
    res = config.DEFAULTS.angular_resolution if angular_resolution is None else angular_resolution
    if not 0 < res <= math.pi / 8:
        raise PreconditionViolation("angular_resolution must lie in (0, pi/8]", {"value": res})
    if shells < 1:
        raise PreconditionViolation("shells must be >= 1", {"shells": shells})
    if len(E) < 2 * shells:
        raise InsufficientSamples("need at least 2 points per shell", {"points": len(E)})

    t = E.points - E.base
    theta = np.angle(t) % math.pi
    radius = np.abs(t)

    step = res / _SUBDIVISION
    cells = int(math.ceil(math.pi / step))
    grid = np.arange(cells) * (math.pi / cells)
    valid = np.ones(cells, dtype=bool)
    masks = _radial_shells(radius, shells)
    for shell in masks:
        near = _line_distance(grid[:, None], theta[shell][None, :]) <= res
        valid &= near.any(axis=1)

    angles: List[float] = []
    width = math.pi / cells
    for start, length in _cyclic_runs(valid):
        w = length * width
        k = max(1, int(math.floor(w / (2 * res) + 1e-9)))
        if length == cells:
            angles.extend((i * math.pi / k) for i in range(k))
            continue
        begin = start * width - width / 2
        angles.extend(((begin + (i + 0.5) * w / k) % math.pi) for i in range(k))
    angles.sort()

    used = np.logical_or.reduce(masks)
    counts, min_t = [], []
    for a in angles:
        hit = _line_distance(theta[used], a) <= res
        counts.append(int(hit.sum()))
        min_t.append(float(radius[used][hit].min()) if hit.any() else float("nan"))
    logger.debug("directions {} from {} points", angles, t.size)
    return DirectionReport(angles, len(angles), counts, min_t, shells, res)


def condensation_order(E: PointSet, q: int, **kwargs) -> bool:
    """True iff E has a condensation point of order >= q at its base."""
    if q < 1:
        raise PreconditionViolation("q must be >= 1", {"q": q})
    return limiting_directions(E, **kwargs).order >= q


# --- 2) Least-squares fitting ------------------------------------------------------


def _design(z: np.ndarray, q: int, d: int) -> np.ndarray:
    cols = [z ** m * np.conj(z) ** j for j in range(q) for m in range(d + 1)]
    return np.stack(cols, axis=1)


def fit_polyanalytic(samples: PointSet, q: int, d: int, rcond: Optional[float] = None) -> FitResult:
    """Fit sum_{j<q} a_j(z) conj(z)^j with deg a_j <= d to the sampled values."""
    if samples.values is None:
        raise PreconditionViolation("samples carry no values")
    if q < 1 or d < 0:
        raise PreconditionViolation("need q >= 1 and d >= 0", {"q": q, "d": d})
    unknowns = q * (d + 1)
    if len(samples) < unknowns:
        raise InsufficientSamples(
            "fewer samples than unknowns", {"samples": len(samples), "unknowns": unknowns}
        )
    rcond = config.DEFAULTS.fit_rcond if rcond is None else rcond
    A = _design(samples.points, q, d)
    b = samples.values
    x, _, rank, s = lstsq(A, b, cond=rcond)
    if rank < unknowns:
        raise RankDeficient(
            "design matrix is rank deficient",
            {"rank": int(rank), "unknowns": unknowns, "q": q, "d": d},
        )
    condition = float(s[0] / s[-1])
    norm_b = float(np.linalg.norm(b))
    misfit = float(np.linalg.norm(A @ x - b))
    residual = misfit / norm_b if norm_b > 0 else misfit

    scale = float(np.abs(x).max()) if x.size else 0.0
    polys: Dict[Tuple[int, ...], CPoly] = {}
    for j in range(q):
        block = x[j * (d + 1) : (j + 1) * (d + 1)]
        terms = {(m,): c for m, c in enumerate(block) if abs(c) > rcond * scale}
        if terms:
            polys[(j,)] = CPoly(1, terms)
    f = PolyAnalytic.from_polys(polys, order=(q,)) if polys else PolyAnalytic(1, (q,), {})
    logger.debug("fit q={} d={} residual={:.3e} cond={:.3e}", q, d, residual, condition)
    return FitResult(f, residual, condition)


# --- 3) Uniqueness -----------------------------------------------------------------


@dataclass
class UniquenessReport:
    verdict: str
    max_difference: float
    condensation: bool
    symbolic_equal: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "max_difference": self.max_difference,
            "condensation": self.condensation,
            "symbolic_equal": self.symbolic_equal,
        }


def uniqueness_test(f: PolyAnalytic, g: PolyAnalytic, E: PointSet, q: int) -> UniquenessReport:
    """equal / distinct / inconclusive, by the condensation-point criterion."""
    fv = f.eval(E.points, singular="nan")
    gv = g.eval(E.points, singular="nan")
    ok = np.isfinite(fv) & np.isfinite(gv)
    diff = float(np.max(np.abs(fv[ok] - gv[ok]))) if ok.any() else 0.0
    scale = max(1.0, float(np.max(np.abs(fv[ok]), initial=0.0)), float(np.max(np.abs(gv[ok]), initial=0.0)))
    if diff >= config.DEFAULTS.agreement_tol * scale:
        return UniquenessReport("distinct", diff, False, False)
    try:
        dense = condensation_order(E, q)
    except InsufficientSamples:
        dense = False
    same = f.equals(g)
    if dense and same:
        return UniquenessReport("equal", diff, dense, same)
    logger.warning("agreement on E without a uniqueness certificate (condensation={}, symbolic={})", dense, same)
    return UniquenessReport("inconclusive", diff, dense, same)


def random_disc_points(count: int, seed: int = 42, radius: float = 1.0) -> PointSet:
    """Uniform points in the disc |z| < radius, based at 0."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, count))
    phi = rng.uniform(0, 2 * math.pi, count)
    pts = r * np.exp(1j * phi)
    return PointSet(0j, pts[pts != 0])


def lines_through(base: complex, angles, levels: int = 16) -> PointSet:
    """Points base +- 2^-m e^{i a} for each angle a and m = 1..levels."""
    radii = 2.0 ** -np.arange(1, levels + 1)
    pts = [base + s * r * np.exp(1j * a) for a in angles for r in radii for s in (1, -1)]
    return PointSet(base, np.array(pts))
