"""Planar Dirichlet solver, harmonic conjugation and holomorphic boundary fits.

Domains live on a uniform lattice. Interior nodes carry unknowns; a node whose
lattice neighbour falls outside the domain gets a shortened Shortley-Weller arm
ending at an attachment point on the boundary polyline, where boundary data is
evaluated. The resulting scheme is of positive type, so the discrete maximum
principle holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import ndimage, sparse
from scipy.linalg import lstsq
from scipy.sparse import csgraph
from scipy.sparse import linalg as spla

from .. import config
from ..errors import (
    DisconnectedDomain,
    MultiplyConnected,
    NotHarmonic,
    PreconditionViolation,
    SolverDivergence,
    TargetUnreachable,
)
from .polycore import CPoly

BoundaryData = Callable[[np.ndarray], np.ndarray]

# east, west, north, south as (row, col) offsets; rows follow +y
DIRECTIONS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, -1), (1, 0), (-1, 0))
_CROSS = ndimage.generate_binary_structure(2, 1)
_DEMOTE = 1e-8


# --- 1) Domains ---------------------------------------------------------------


@dataclass(frozen=True)
class Domain2D:
    """Lattice domain with Shortley-Weller arms.

    `arm[d]` is the arm length of direction d in units of h (1 for a full arm),
    `attach[d]` the boundary point an arm ends on (NaN when the arm reaches an
    interior node).
    """

    h: float
    x0: float
    y0: float
    inside: np.ndarray
    arm: np.ndarray
    attach: np.ndarray
    polyline: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.inside.shape

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.shape[1])

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.h * np.arange(self.shape[0])

    @property
    def Z(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.y)
        return X + 1j * Y

    @property
    def unknowns(self) -> int:
        return int(self.inside.sum())

    def coupled(self, d: int) -> np.ndarray:
        """Interior nodes whose arm d reaches another interior node."""
        return self.inside & np.isnan(self.attach[d])

    def attachments(self) -> np.ndarray:
        pts = self.attach[:, self.inside].ravel()
        return np.unique(pts[~np.isnan(pts)])

    def centroid(self) -> complex:
        return complex(self.Z[self.inside].mean())

    def anchor(self) -> Tuple[int, int]:
        """Interior node closest to the centroid."""
        Z = self.Z
        dist = np.where(self.inside, np.abs(Z - self.centroid()), np.inf)
        r, c = np.unravel_index(int(np.argmin(dist)), dist.shape)
        return int(r), int(c)

    def node_index(self, z: complex) -> Tuple[int, int]:
        c = int(round((z.real - self.x0) / self.h))
        r = int(round((z.imag - self.y0) / self.h))
        return min(max(r, 0), self.shape[0] - 1), min(max(c, 0), self.shape[1] - 1)

    def fully_interior(self) -> np.ndarray:
        out = self.inside.copy()
        for d in range(4):
            out &= self.coupled(d)
        return out

    def to_dict(self) -> Dict[str, Any]:
        poly = [] if self.polyline is None else [[p.real, p.imag] for p in self.polyline]
        return {"h": self.h, "boundary": poly, "unknowns": self.unknowns}


def shift_grid(a: np.ndarray, dr: int, dc: int, fill) -> np.ndarray:
    """out[r, c] = a[r + dr, c + dc], padded with fill."""
    out = np.full_like(a, fill)
    R, C = a.shape
    rs = slice(max(-dr, 0), R - max(dr, 0))
    cs = slice(max(-dc, 0), C - max(dc, 0))
    rt = slice(max(dr, 0), R - max(-dr, 0) if dr < 0 else R)
    ct = slice(max(dc, 0), C - max(-dc, 0) if dc < 0 else C)
    out[rs, cs] = a[rt, ct]
    return out


def _crossings(levels: np.ndarray, a: np.ndarray, b: np.ndarray, oa: np.ndarray, ob: np.ndarray):
    """For each level, sorted coordinates where edges (a,oa)->(b,ob) cross a = level."""
    lv = levels[:, None]
    hit = ((a[None, :] <= lv) & (lv < b[None, :])) | ((b[None, :] <= lv) & (lv < a[None, :]))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (lv - a[None, :]) / (b - a)[None, :]
        where = oa[None, :] + t * (ob - oa)[None, :]
    return [np.sort(where[k, hit[k]]) for k in range(levels.size)]


def _validate(inside: np.ndarray) -> None:
    if not inside.any():
        raise PreconditionViolation("domain has no interior node")
    _, count = ndimage.label(inside, structure=_CROSS)
    if count != 1:
        raise DisconnectedDomain("interior is not 4-connected", {"components": int(count)})


def _check_jordan(poly: np.ndarray, chunk: int = 512) -> None:
    """Reject self-intersecting closed polylines."""
    a = poly
    b = np.roll(poly, -1)
    M = a.size
    if M < 3:
        raise PreconditionViolation("boundary polyline needs >= 3 vertices")

    def orient(p, q, r):
        return np.sign((q.real - p.real) * (r.imag - p.imag) - (q.imag - p.imag) * (r.real - p.real))

    j = np.arange(M)
    for start in range(0, M, chunk):
        i = np.arange(start, min(start + chunk, M))[:, None]
        pa, pb = a[i], b[i]
        qa, qb = a[None, :], b[None, :]
        o1, o2 = orient(pa, pb, qa), orient(pa, pb, qb)
        o3, o4 = orient(qa, qb, pa), orient(qa, qb, pb)
        cross = (o1 * o2 < 0) & (o3 * o4 < 0)
        gap = np.abs(i - j[None, :])
        cross &= (gap > 1) & (gap < M - 1)
        if cross.any():
            k, l = np.argwhere(cross)[0]
            raise PreconditionViolation(
                "boundary polyline is not a Jordan curve",
                {"segments": [int(start + k), int(l)]},
            )


def from_polyline(points, h: float, margin: int = 2, check: bool = True) -> Domain2D:
    """Lattice domain bounded by a closed polyline (last vertex joins the first)."""
    poly = np.asarray(points, dtype=complex).ravel()
    if poly.size > 1 and poly[0] == poly[-1]:
        poly = poly[:-1]
    if h <= 0:
        raise PreconditionViolation("grid spacing must be positive", {"h": h})
    if check:
        _check_jordan(poly)
    lo_x = math.floor(poly.real.min() / h) - margin
    hi_x = math.ceil(poly.real.max() / h) + margin
    lo_y = math.floor(poly.imag.min() / h) - margin
    hi_y = math.ceil(poly.imag.max() / h) + margin
    x = h * np.arange(lo_x, hi_x + 1)
    y = h * np.arange(lo_y, hi_y + 1)
    ny, nx = y.size, x.size

    a, b = poly, np.roll(poly, -1)
    rows = _crossings(y, a.imag, b.imag, a.real, b.real)
    cols = _crossings(x, a.real, b.real, a.imag, b.imag)

    inside = np.zeros((ny, nx), dtype=bool)
    on_edge = np.zeros((ny, nx), dtype=bool)
    dist = np.full((4, ny, nx), np.inf)
    for r, xs in enumerate(rows):
        if xs.size == 0:
            continue
        left = np.searchsorted(xs, x, side="left")
        right = np.searchsorted(xs, x, side="right")
        inside[r] = left % 2 == 1
        on_edge[r] |= left != right
        has_e = right < xs.size
        dist[0, r, has_e] = xs[right[has_e]] - x[has_e]
        has_w = left > 0
        dist[1, r, has_w] = x[has_w] - xs[left[has_w] - 1]
    for c, ys in enumerate(cols):
        if ys.size == 0:
            continue
        below = np.searchsorted(ys, y, side="left")
        above = np.searchsorted(ys, y, side="right")
        on_edge[:, c] |= below != above
        has_n = above < ys.size
        dist[2, has_n, c] = ys[above[has_n]] - y[has_n]
        has_s = below > 0
        dist[3, has_s, c] = y[has_s] - ys[below[has_s] - 1]

    demote = inside & ((dist.min(axis=0) < _DEMOTE * h) | on_edge)
    if demote.any():
        logger.debug("demoting {} nodes lying on the boundary", int(demote.sum()))
    inside &= ~demote

    X, Y = np.meshgrid(x, y)
    Z = X + 1j * Y
    arm = np.ones((4, ny, nx))
    attach = np.full((4, ny, nx), np.nan + 0j, dtype=complex)
    for d, (dr, dc) in enumerate(DIRECTIONS):
        neighbour_inside = shift_grid(inside, dr, dc, False)
        short = inside & (dist[d] < h)
        arm[d, short] = dist[d, short] / h
        step = complex(dc, dr) * h
        attach[d, short] = Z[short] + step * arm[d, short]
        # neighbour outside without a crossing closer than h: attach at the node
        far = inside & ~short & ~neighbour_inside
        attach[d, far] = Z[far] + step
    _validate(inside)
    return Domain2D(float(h), float(x[0]), float(y[0]), inside, arm, attach, poly)


def disc(radius: float = 1.0, h: float = 1 / 128, center: complex = 0j) -> Domain2D:
    """Disc domain; the polyline is fine enough that its chord error is far below h^2."""
    if radius <= 0:
        raise PreconditionViolation("radius must be positive", {"radius": radius})
    count = max(512, 8 * int(math.ceil(2 * math.pi * radius / h)))
    theta = 2 * math.pi * np.arange(count) / count
    poly = center + radius * np.exp(1j * theta)
    return from_polyline(poly, h, check=False)


def from_mask(mask: np.ndarray, h: float, x0: float = 0.0, y0: float = 0.0) -> Domain2D:
    """Domain whose boundary is the outer layer of a node mask.

    Mask nodes with a neighbour outside the mask become boundary nodes; arms
    end on them at full length.
    """
    mask = np.asarray(mask, dtype=bool)
    inside = ndimage.binary_erosion(mask, structure=_CROSS, border_value=0)
    _validate(inside)
    ny, nx = mask.shape
    X, Y = np.meshgrid(x0 + h * np.arange(nx), y0 + h * np.arange(ny))
    Z = X + 1j * Y
    arm = np.ones((4, ny, nx))
    attach = np.full((4, ny, nx), np.nan + 0j, dtype=complex)
    for d, (dr, dc) in enumerate(DIRECTIONS):
        edge = inside & ~shift_grid(inside, dr, dc, False)
        attach[d, edge] = Z[edge] + complex(dc, dr) * h
    return Domain2D(float(h), float(x0), float(y0), inside, arm, attach, None)


# --- 2) Fields ----------------------------------------------------------------


@dataclass(frozen=True)
class GridField:
    """Complex samples on a domain's lattice; NaN marks nodes without a value."""

    domain: Domain2D
    values: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def h(self) -> float:
        return self.domain.h

    @classmethod
    def from_function(cls, dom: Domain2D, func: Callable[[np.ndarray], np.ndarray], where=None):
        where = dom.inside if where is None else where
        values = np.full(dom.shape, np.nan + 0j, dtype=complex)
        values[where] = np.asarray(func(dom.Z[where]), dtype=complex)
        return cls(dom, values)

    def at(self, z: complex) -> complex:
        """Value at the node nearest z."""
        r, c = self.domain.node_index(complex(z))
        return complex(self.values[r, c])

    def nearest(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=complex)
        dom = self.domain
        c = np.clip(np.rint((pts.real - dom.x0) / dom.h).astype(int), 0, dom.shape[1] - 1)
        r = np.clip(np.rint((pts.imag - dom.y0) / dom.h).astype(int), 0, dom.shape[0] - 1)
        return self.values[r, c]

    def real(self) -> "GridField":
        return GridField(self.domain, np.where(self.mask, self.values.real, np.nan) + 0j)

    def imag(self) -> "GridField":
        return GridField(self.domain, np.where(self.mask, self.values.imag, np.nan) + 0j)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values[self.mask]), initial=0.0))


def sampled_boundary(points, values) -> BoundaryData:
    """Boundary data given as samples along a closed polyline, linearly interpolated."""
    pts = np.asarray(points, dtype=complex).ravel()
    vals = np.asarray(values, dtype=complex).ravel()
    if pts.size != vals.size or pts.size < 3:
        raise PreconditionViolation("need >= 3 matching boundary samples")
    osc = float(np.ptp(vals.real) + np.ptp(vals.imag))
    jump = float(np.max(np.abs(np.diff(np.append(vals, vals[0])))))
    if osc > 0 and jump >= 0.01 * osc:
        logger.warning("boundary samples are coarse: jump {:.3g} vs oscillation {:.3g}", jump, osc)
    a, b = pts, np.roll(pts, -1)
    va, vb = vals, np.roll(vals, -1)
    seg = b - a
    seg_len2 = np.maximum(np.abs(seg) ** 2, 1e-300)

    def data(q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=complex).ravel()
        out = np.empty(q.size, dtype=complex)
        for start in range(0, q.size, 256):
            qq = q[start : start + 256, None]
            t = np.clip(((qq - a[None, :]) * np.conj(seg)[None, :]).real / seg_len2, 0, 1)
            dist = np.abs(a[None, :] + t * seg[None, :] - qq)
            k = np.argmin(dist, axis=1)
            tk = t[np.arange(k.size), k]
            out[start : start + 256] = va[k] + tk * (vb[k] - va[k])
        return out

    return data


# --- 3) Dirichlet solve -----------------------------------------------------------


def _assemble(dom: Domain2D, g: BoundaryData):
    idx = -np.ones(dom.shape, dtype=int)
    idx[dom.inside] = np.arange(dom.unknowns)
    s = dom.arm
    sE, sW, sN, sS = (s[d][dom.inside] for d in range(4))
    coef = [
        2.0 / (sE * (sE + sW)),
        2.0 / (sW * (sE + sW)),
        2.0 / (sN * (sN + sS)),
        2.0 / (sS * (sN + sS)),
    ]
    diag = coef[0] + coef[1] + coef[2] + coef[3]
    rows, cols, vals = [np.arange(dom.unknowns)], [np.arange(dom.unknowns)], [diag]
    rhs = np.zeros(dom.unknowns, dtype=complex)
    for d, (dr, dc) in enumerate(DIRECTIONS):
        coupled = dom.coupled(d)[dom.inside]
        nbr = shift_grid(idx, dr, dc, -1)[dom.inside]
        rows.append(np.flatnonzero(coupled))
        cols.append(nbr[coupled])
        vals.append(-coef[d][coupled])
        ends = dom.attach[d][dom.inside]
        boundary = ~coupled
        if boundary.any():
            rhs[boundary] += coef[d][boundary] * np.asarray(g(ends[boundary]), dtype=complex)
    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dom.unknowns, dom.unknowns),
    )
    return A, rhs, diag


def _solve_real(A, b: np.ndarray, lu, tol: float) -> np.ndarray:
    if lu is not None:
        return lu.solve(b)
    ilu = spla.spilu(A.tocsc(), drop_tol=1e-5, fill_factor=20)
    M = spla.LinearOperator(A.shape, ilu.solve)
    x, info = spla.bicgstab(A, b, rtol=tol * 1e-2, atol=0.0, maxiter=config.DEFAULTS.iteration_cap, M=M)
    if info != 0:
        raise SolverDivergence("iterative solver stopped early", {"info": int(info)})
    return x


def solve_dirichlet(dom: Domain2D, g: BoundaryData, tol: Optional[float] = None) -> GridField:
    """Discrete harmonic extension of boundary data g (callable on complex points)."""
    tol = config.DEFAULTS.dirichlet_residual if tol is None else tol
    A, rhs, diag = _assemble(dom, g)
    direct = dom.unknowns <= config.DEFAULTS.direct_solve_cap
    logger.debug("dirichlet: {} unknowns, {} solve", dom.unknowns, "direct" if direct else "bicgstab")
    lu = spla.splu(A.tocsc()) if direct else None
    sol = _solve_real(A, rhs.real, lu, tol) + 1j * _solve_real(A, rhs.imag, lu, tol)
    gmax = float(np.max(np.abs(g(dom.attachments())), initial=0.0))
    residual = float(np.max(np.abs(A @ sol - rhs) / diag, initial=0.0))
    if residual > tol * max(gmax, 1e-300):
        raise SolverDivergence(
            "residual above tolerance", {"residual": residual, "bound": tol * gmax}
        )
    values = np.full(dom.shape, np.nan + 0j, dtype=complex)
    values[dom.inside] = sol
    return GridField(dom, values)


# --- 4) Harmonic conjugate ------------------------------------------------------------


def _gradient(dom: Domain2D, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nodal derivatives using interior neighbours only.

    Central where both sides exist, then second-order one-sided, then
    first-order, else zero.
    """
    h = dom.h
    inside = dom.inside
    grads = []
    for fwd, bwd in ((0, 1), (2, 3)):
        dr_f, dc_f = DIRECTIONS[fwd]
        dr_b, dc_b = DIRECTIONS[bwd]
        f1 = shift_grid(U, dr_f, dc_f, np.nan)
        f2 = shift_grid(U, 2 * dr_f, 2 * dc_f, np.nan)
        b1 = shift_grid(U, dr_b, dc_b, np.nan)
        b2 = shift_grid(U, 2 * dr_b, 2 * dc_b, np.nan)
        has_f1 = dom.coupled(fwd)
        has_b1 = dom.coupled(bwd)
        has_f2 = has_f1 & shift_grid(dom.coupled(fwd), dr_f, dc_f, False)
        has_b2 = has_b1 & shift_grid(dom.coupled(bwd), dr_b, dc_b, False)
        out = np.zeros_like(U)
        one_f = inside & has_f1 & ~has_b1
        one_b = inside & has_b1 & ~has_f1
        out[one_f] = (f1 - U)[one_f] / h
        out[one_b] = (U - b1)[one_b] / h
        two_f = inside & has_f2 & ~has_b1
        two_b = inside & has_b2 & ~has_f1
        out[two_f] = (-3 * U + 4 * f1 - f2)[two_f] / (2 * h)
        out[two_b] = (3 * U - 4 * b1 + b2)[two_b] / (2 * h)
        central = inside & has_f1 & has_b1
        out[central] = (f1 - b1)[central] / (2 * h)
        grads.append(out)
    return grads[0], grads[1]


def _holes(dom: Domain2D) -> List[np.ndarray]:
    labels, count = ndimage.label(~dom.inside, structure=_CROSS)
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])))
    return [labels == k for k in range(1, count + 1) if k not in border]


def _flux_around(dom: Domain2D, U: np.ndarray, hole: np.ndarray) -> float:
    """Discrete period of the conjugate differential around a hole."""
    ring = ndimage.binary_dilation(hole, structure=_CROSS, iterations=3)
    flux = 0.0
    for d, (dr, dc) in enumerate(DIRECTIONS):
        a = ring & dom.coupled(d)
        b_in_ring = shift_grid(ring, dr, dc, True)
        edge = a & ~b_in_ring
        flux += float(np.sum((shift_grid(U, dr, dc, np.nan) - U)[edge]))
    return flux


def _check_harmonic(dom: Domain2D, U: np.ndarray) -> float:
    F = dom.fully_interior()
    avg = sum(shift_grid(U, dr, dc, np.nan) for dr, dc in DIRECTIONS) / 4.0
    res = float(np.max(np.abs((U - avg)[F]), initial=0.0))
    return res


def harmonic_conjugate(u: GridField, dom: Optional[Domain2D] = None) -> GridField:
    """v with u + iv discretely holomorphic and v = 0 at the anchor node."""
    dom = u.domain if dom is None else dom
    U = np.where(dom.inside, u.values.real, np.nan)
    scale = float(np.nanmax(np.abs(U))) if dom.inside.any() else 0.0
    res = _check_harmonic(dom, U)
    if res >= config.DEFAULTS.harmonic_residual * (1 + scale):
        raise NotHarmonic("input is not discrete harmonic", {"residual": res})
    for hole in _holes(dom):
        period = _flux_around(dom, U, hole)
        if abs(period) > config.DEFAULTS.period_tol * max(1.0, scale):
            raise MultiplyConnected("conjugate has a nonzero period", {"period": period})

    ux, uy = _gradient(dom, U)
    idx = -np.ones(dom.shape, dtype=int)
    idx[dom.inside] = np.arange(dom.unknowns)
    heads, tails = [], []
    for d in (0, 2):
        dr, dc = DIRECTIONS[d]
        src = dom.coupled(d)
        heads.append(idx[src])
        tails.append(shift_grid(idx, dr, dc, -1)[src])
    heads, tails = np.concatenate(heads), np.concatenate(tails)
    graph = sparse.csr_matrix(
        (np.ones(heads.size), (heads, tails)), shape=(dom.unknowns, dom.unknowns)
    )
    ar, ac = dom.anchor()
    root = int(idx[ar, ac])
    order, pred = csgraph.breadth_first_order(graph, root, directed=False, return_predecessors=True)

    rows, cols = np.nonzero(dom.inside)
    uxf, uyf = ux[dom.inside], uy[dom.inside]
    v = np.zeros(dom.unknowns)
    h = dom.h
    for node in order[1:]:
        p = pred[node]
        if rows[node] == rows[p]:
            dx = (cols[node] - cols[p]) * h
            v[node] = v[p] - dx * 0.5 * (uyf[node] + uyf[p])
        else:
            dy = (rows[node] - rows[p]) * h
            v[node] = v[p] + dy * 0.5 * (uxf[node] + uxf[p])
    values = np.full(dom.shape, np.nan + 0j, dtype=complex)
    values[dom.inside] = v
    return GridField(dom, values)


def cauchy_riemann_residual(u: GridField, v: GridField) -> float:
    """max|u_x - v_y| + max|u_y + v_x| over fully interior nodes."""
    dom = u.domain
    F = dom.fully_interior()
    U, V = u.values.real, v.values.real
    h = dom.h

    def dx(A):
        return (shift_grid(A, 0, 1, np.nan) - shift_grid(A, 0, -1, np.nan)) / (2 * h)

    def dy(A):
        return (shift_grid(A, 1, 0, np.nan) - shift_grid(A, -1, 0, np.nan)) / (2 * h)

    first = np.abs(dx(U) - dy(V))[F]
    second = np.abs(dy(U) + dx(V))[F]
    return float(np.max(first, initial=0.0) + np.max(second, initial=0.0))


def path_independence_residual(u: GridField) -> float:
    """Largest loop integral of the conjugate differential around one lattice cell."""
    dom = u.domain
    U = np.where(dom.inside, u.values.real, np.nan)
    ux, uy = _gradient(dom, U)
    h = dom.h
    cell = dom.coupled(0) & dom.coupled(2) & shift_grid(dom.coupled(2), 0, 1, False)
    cell &= shift_grid(dom.coupled(0), 1, 0, False)

    def at(A, dr, dc):
        return shift_grid(A, dr, dc, np.nan)

    loop = (
        -h * 0.5 * (uy + at(uy, 0, 1))
        + h * 0.5 * (at(ux, 0, 1) + at(ux, 1, 1))
        + h * 0.5 * (at(uy, 1, 1) + at(uy, 1, 0))
        - h * 0.5 * (at(ux, 1, 0) + ux)
    )
    return float(np.max(np.abs(loop[cell]), initial=0.0))


# --- 5) Holomorphic polynomial approximation -------------------------------------------


@dataclass
class HoloApproximation:
    polys: List[CPoly] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    degrees: List[int] = field(default_factory=list)

    @property
    def final(self) -> CPoly:
        return self.polys[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {"degrees": self.degrees, "errors": self.errors, "steps": len(self.polys)}


def _basis(zeta: np.ndarray, k: int) -> np.ndarray:
    """Columns Re(zeta^j), -Im(zeta^j) for j <= k (imag part of j=0 omitted)."""
    cols = [np.ones(zeta.size)]
    for j in range(1, k + 1):
        w = zeta ** j
        cols.extend([w.real, -w.imag])
    return np.stack(cols, axis=1)


def _to_cpoly(coef: np.ndarray, center: complex, radius: float) -> CPoly:
    lin = CPoly(1, {(1,): 1 / radius, (0,): -center / radius})
    out = CPoly.constant(coef[0], 1)
    power = CPoly.constant(1.0, 1)
    for j in range(1, (coef.size - 1) // 2 + 1):
        power = power * lin
        c = complex(coef[2 * j - 1], coef[2 * j])
        out = out + power.scaled(c)
    return out


def holo_poly_approx(
    g: BoundaryData,
    dom: Domain2D,
    degree: Optional[int] = None,
    target: float = 1e-6,
) -> HoloApproximation:
    """Holomorphic polynomials P_j whose real parts approach g on the boundary.

    The Dirichlet extension of g is fitted in the least-squares sense by
    real parts of powers of (z - c)/R, boundary rows dominating; the
    imaginary constant is fixed by the harmonic conjugate at the anchor. The
    degree rises until the boundary error drops below target.
    """
    cap = config.DEFAULTS.degree_cap if degree is None else degree
    W = solve_dirichlet(dom, lambda w: np.asarray(g(w), dtype=complex).real + 0j)
    V = harmonic_conjugate(W.real(), dom)
    center = dom.centroid()
    bpts = dom.attachments()
    radius = float(np.max(np.abs(bpts - center)))
    gb = np.asarray(g(bpts)).real
    zi = dom.Z[dom.inside]
    wi = W.values[dom.inside].real
    weight = dom.h ** 2
    ar, ac = dom.anchor()
    anchor_z = dom.Z[ar, ac]

    result = HoloApproximation()
    best = math.inf
    for k in range(cap + 1):
        A = np.vstack([_basis((bpts - center) / radius, k), weight * _basis((zi - center) / radius, k)])
        rhs = np.concatenate([gb, weight * wi])
        coef, *_ = lstsq(A, rhs)
        P = _to_cpoly(coef, center, radius)
        shift = P.eval(anchor_z)[0].imag - V.values[ar, ac].real
        P = P - CPoly.constant(1j * shift, 1)
        err = float(np.max(np.abs(P.eval(bpts).real - gb)))
        if err < best:
            best = err
            result.polys.append(P)
            result.errors.append(err)
            result.degrees.append(k)
        if err < target:
            logger.debug("approximation reached {:.3e} at degree {}", err, k)
            return result
    raise TargetUnreachable(
        "degree cap reached", {"achieved": best, "target": target, "degree_cap": cap}
    )


def exponential_transfer_check(
    g: BoundaryData, dom: Domain2D, P: CPoly, W: Optional[GridField] = None
) -> Dict[str, Any]:
    """Carry a boundary bound on Re(P - u) into the interior and through exp.

    Compares max_interior Re(P - W) with the boundary error plus a grid error
    estimate for the five-point scheme applied to Re P.
    """
    W = solve_dirichlet(dom, lambda w: np.asarray(g(w)).real + 0j) if W is None else W
    bpts = dom.attachments()
    boundary_error = float(np.max(np.abs(P.eval(bpts).real - np.asarray(g(bpts)).real)))
    zi = dom.Z[dom.inside]
    excess = float(np.max(P.eval(zi).real - W.values[dom.inside].real))
    fourth = P.deriv(0).deriv(0).deriv(0).deriv(0)
    radius = float(np.max(np.abs(bpts - dom.centroid())))
    grid_error = dom.h ** 2 / 6 * float(np.max(np.abs(fourth.eval(bpts)), initial=0.0)) * radius ** 2 / 4
    slack = 10 * dom.h ** 2 * max(1.0, float(np.max(np.abs(W.values[dom.inside]))))
    return {
        "boundary_error": boundary_error,
        "interior_excess": excess,
        "grid_error": grid_error,
        "holds": excess <= boundary_error + grid_error + slack,
        "exp_interior": math.exp(excess),
        "exp_bound": math.exp(boundary_error + grid_error + slack),
    }
