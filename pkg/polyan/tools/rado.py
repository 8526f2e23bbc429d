"""Numerical Rado pipeline across zero sets, and Hartogs-type assembly.

Everything here works on sampled data: a q-analytic candidate is checked by
applying the central-difference Wirtinger operator q times. The scheme error
at each node is estimated by repeating the stencil at twice the step
(Richardson); a node passes when its residual stays below twice that estimate
plus a floor K*h^2*max|f|, K calibrated on a function annihilated exactly.
A function that is annihilated leaves a residual made of scheme error alone
and passes whatever its degree; a jump or a nonzero dbar^q f does not shrink
with the step and fails.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import ndimage

from .. import config, report_text
from ..errors import (
    GridTooSmall,
    NotCqSmooth,
    PolyanError,
    PreconditionViolation,
    SliceViolation,
    TargetUnreachable,
)
from .harmonic import (
    DIRECTIONS,
    Domain2D,
    GridField,
    exponential_transfer_check,
    from_mask,
    holo_poly_approx,
    shift_grid,
    solve_dirichlet,
)
from .polycore import PolyAnalytic

_CROSS = ndimage.generate_binary_structure(2, 1)
# residual may reach this multiple of the estimated scheme error
_RICHARDSON_SAFETY = 2.0
# complex values per chunk when sweeping polydisc lattices
_BLOCK = 1 << 21


@dataclass(frozen=True)
class SampledFunction:
    field: GridField
    q: int
    zero_threshold: Optional[float] = None

    def __post_init__(self):
        if self.q < 1:
            raise PreconditionViolation("claimed order must be >= 1", {"q": self.q})
        vals = self.field.values[self.field.domain.inside]
        if not np.all(np.isfinite(vals)):
            raise PreconditionViolation("samples must be finite on all interior nodes")

    @property
    def zero_set(self) -> np.ndarray:
        F = self.field
        thr = config.DEFAULTS.zero_threshold if self.zero_threshold is None else self.zero_threshold
        mag = np.where(F.mask, np.abs(F.values), np.inf)
        return F.mask & (mag < thr * F.max_abs())


@dataclass
class RadoReport:
    verdict: str
    dbar_residual: float
    band_residual: float
    bound: float
    K: float
    zero_set_size: int
    zero_set_interior_empty: bool
    peak_location: Optional[complex] = None
    floor: float = 0.0
    smooth_across_zero_set: bool = True
    u_on_zero_interior: float = 0.0
    harmonic_deviation: Optional[float] = None
    approximation: Dict[str, Any] = field(default_factory=dict)
    coefficients: List[GridField] = field(default_factory=list)
    remark: str = ""

    def to_dict(self) -> Dict[str, Any]:
        peak = None if self.peak_location is None else [self.peak_location.real, self.peak_location.imag]
        return {
            "verdict": self.verdict,
            "dbar_residual": self.dbar_residual,
            "band_residual": self.band_residual,
            "scheme_bound": self.bound,
            "K": self.K,
            "scheme_floor": self.floor,
            "zero_set_size": self.zero_set_size,
            "zero_set_interior_empty": self.zero_set_interior_empty,
            "smooth_across_zero_set": self.smooth_across_zero_set,
            "u_on_zero_interior": self.u_on_zero_interior,
            "peak_location": peak,
            "harmonic_deviation": self.harmonic_deviation,
            "approximation": self.approximation,
            "coefficients": len(self.coefficients),
            "remark": self.remark,
        }


# --- 1) Discrete Wirtinger operator -------------------------------------------------


def _dbar_once(values: np.ndarray, h: float, stride: int = 1) -> np.ndarray:
    """0.5*(d/dx + i d/dy) by central differences over `stride` nodes; NaN spreads that far."""
    east, west, north, south = (
        shift_grid(values, stride * dr, stride * dc, np.nan) for dr, dc in DIRECTIONS
    )
    span = 2 * stride * h
    return 0.5 * ((east - west) / span + 1j * (north - south) / span)


def numeric_dbar(field: GridField, m: int) -> GridField:
    if m < 1:
        raise PreconditionViolation("repetition count must be >= 1", {"m": m})
    values = np.where(field.mask, field.values, np.nan)
    for _ in range(m):
        values = _dbar_once(values, field.h)
    if not np.isfinite(values).any():
        raise GridTooSmall("no node survives the difference stencil", {"m": m})
    return GridField(field.domain, values)


def _coarse_dbar(field: GridField, m: int) -> np.ndarray:
    """dbar^m at step 2h, on the same lattice."""
    values = np.where(field.mask, field.values, np.nan)
    for _ in range(m):
        values = _dbar_once(values, field.h, stride=2)
    return values


def _node_bounds(fine: np.ndarray, coarse: np.ndarray, floor: float) -> np.ndarray:
    """floor + twice the Richardson estimate of the scheme error at each node."""
    return floor + _RICHARDSON_SAFETY * np.abs(coarse - fine) / 3.0


def _dbar_power(field: GridField, m: int) -> GridField:
    return field if m == 0 else numeric_dbar(field, m)


def _calibrate(field: GridField, q: int) -> float:
    """K from a function annihilated exactly by dbar^q."""
    Z = field.domain.Z
    radius = max(float(np.max(np.abs(Z[field.mask]))), field.h)
    reference = np.where(field.mask, np.conj(Z) ** (q - 1) * np.exp(Z / radius), np.nan)
    res = numeric_dbar(GridField(field.domain, reference), q).values
    scale = float(np.nanmax(np.abs(reference)))
    res_max = float(np.nanmax(np.abs(res)))
    return max(1.0, 8.0 * res_max / (field.h ** 2 * scale))


def _second_differences(values: np.ndarray) -> np.ndarray:
    ex, wx, nx_, sx = (shift_grid(values, dr, dc, np.nan) for dr, dc in DIRECTIONS)
    return np.abs(ex - 2 * values + wx) + np.abs(nx_ - 2 * values + sx)


def _masked_max(a: np.ndarray, where: np.ndarray) -> float:
    sel = a[where & np.isfinite(a)]
    return float(np.max(np.abs(sel))) if sel.size else 0.0


# --- 2) The extension pipeline --------------------------------------------------------


def _harmonic_checks(u: GridField, report: RadoReport, degree: int) -> None:
    """Dirichlet re-solve of Re u, Im u and the polynomial approximation device."""
    try:
        dom = from_mask(u.mask, u.h, u.domain.x0, u.domain.y0)
    except PolyanError as e:
        logger.info("harmonicity check skipped: {}", e.message)
        return
    scale = max(u.max_abs(), 1e-300)
    deviation = 0.0
    fields = {}
    for name, part in (("re", np.real), ("im", np.imag)):
        data = lambda w, part=part: part(u.nearest(w)) + 0j
        W = solve_dirichlet(dom, data)
        fields[name] = (data, W)
        diff = np.abs(W.values[dom.inside].real - part(u.values[dom.inside]))
        deviation = max(deviation, float(diff.max(initial=0.0)))
    report.harmonic_deviation = deviation / scale

    data, W = fields["re"]
    target = max(1e-3 * scale, 1e-12)
    try:
        approx = holo_poly_approx(data, dom, degree=degree, target=target)
    except TargetUnreachable as e:
        logger.info("approximation stopped at {:.3e}", e.details["achieved"])
        report.approximation = {"reached": False, **e.details}
        return
    transfer = exponential_transfer_check(data, dom, approx.final, W)
    report.approximation = {"reached": True, "target": target, **approx.to_dict(), "transfer": transfer}


def rado_verify(
    f: SampledFunction, strict: bool = False, harmonic_checks: bool = True, degree: int = 12
) -> RadoReport:
    """Decide whether f extends q-analytically across its zero set.

    verdict `fails` when dbar^q f exceeds its node bound anywhere off the
    zero-set band (or band_factor times the bound on the band); `inconclusive`
    when the zero set has interior or derivatives below order q jump across
    it; `extends` otherwise. Nodes where the doubled stencil does not fit are
    not tested. With strict=True a jump raises NotCqSmooth instead.
    """
    F, q = f.field, f.q
    h = F.h
    fmax = F.max_abs()
    K = _calibrate(F, q)
    floor = K * h ** 2 * max(fmax, 1e-300)

    Z = f.zero_set
    band = ndimage.binary_dilation(Z, structure=_CROSS, iterations=config.DEFAULTS.band_width) if Z.any() else Z
    interior_Z = ndimage.binary_erosion(Z, structure=_CROSS)

    residual = numeric_dbar(F, q)
    coarse = _coarse_dbar(F, q)
    tested = residual.mask & np.isfinite(coarse)
    if not tested.any():
        raise GridTooSmall("no node survives the doubled difference stencil", {"q": q})
    R = np.abs(residual.values)
    b = np.where(tested, _node_bounds(residual.values, coarse, floor), np.nan)
    bound = float(np.nanmax(b))
    off = _masked_max(R, tested & ~band)
    on = _masked_max(R, tested & band)
    peak_idx = np.unravel_index(int(np.nanargmax(np.where(tested, R, -1.0))), R.shape)
    peak = complex(F.domain.Z[peak_idx])
    report = RadoReport(
        verdict="extends",
        dbar_residual=off,
        band_residual=on,
        bound=bound,
        K=K,
        zero_set_size=int(Z.sum()),
        zero_set_interior_empty=not interior_Z.any(),
        peak_location=peak,
        floor=floor,
    )
    logger.debug("rado q={} off-band={:.3e} band={:.3e} bound={:.3e}", q, off, on, bound)

    with np.errstate(invalid="ignore"):
        above = np.where(band, R > config.DEFAULTS.band_factor * b, R > b)
    if (above & tested).any():
        report.verdict = "fails"
        return report

    # C^{q-1} across Z: second differences on the band against those elsewhere
    if Z.any():
        for k in range(q):
            D = _dbar_power(F, k).values
            s2 = _second_differences(D)
            near = _masked_max(s2, band)
            far = _masked_max(s2, ~band)
            if near > config.DEFAULTS.jump_factor * (far + bound):
                report.smooth_across_zero_set = False
                details = {"derivative_order": k, "band": near, "elsewhere": far}
                if strict:
                    raise NotCqSmooth("derivatives jump across the zero set", details)
                logger.warning("derivative of order {} jumps across the zero set", k)
                break

    u = _dbar_power(F, q - 1)
    if interior_Z.any():
        report.u_on_zero_interior = _masked_max(np.abs(u.values), interior_Z)
    if harmonic_checks:
        _harmonic_checks(u, report, degree)

    if not report.smooth_across_zero_set or not report.zero_set_interior_empty:
        report.verdict = "inconclusive"
        report.remark = report_text.RADO_JUMP if not report.smooth_across_zero_set else report_text.RADO_INTERIOR
        return report
    report.remark = report_text.RADO_REMARK
    report.coefficients = _coefficients(f)
    return report


def _coefficients(f: SampledFunction) -> List[GridField]:
    F, q = f.field, f.q
    zbar = np.conj(F.domain.Z)
    rest = F
    out: List[GridField] = [None] * q  # type: ignore[list-item]
    for j in range(q - 1, -1, -1):
        a = _dbar_power(rest, j)
        a = GridField(F.domain, a.values / math.factorial(j))
        out[j] = a
        rest = GridField(F.domain, rest.values - a.values * zbar ** j)
    return out


def extract_coefficients(f: SampledFunction, verify: bool = True) -> List[GridField]:
    """a_0, ..., a_{q-1} with f = sum a_j conj(z)^j, recovered top-down."""
    if verify:
        report = rado_verify(f, harmonic_checks=False)
        if report.verdict != "extends":
            raise PreconditionViolation(
                "coefficients need an extends verdict", {"verdict": report.verdict}
            )
        return report.coefficients
    return _coefficients(f)


def reproduce(coefficients: Sequence[GridField]) -> GridField:
    """sum_j a_j conj(z)^j on the common valid mask."""
    dom = coefficients[0].domain
    zbar = np.conj(dom.Z)
    total = sum(a.values * zbar ** j for j, a in enumerate(coefficients))
    return GridField(dom, total)


# --- 3) Sample builders ---------------------------------------------------------------


def sample_polyanalytic(f: PolyAnalytic, dom: Domain2D) -> GridField:
    return GridField.from_function(dom, lambda z: f.eval(z, singular="nan"))


def sample_patch(dom: Domain2D) -> GridField:
    """1 - |z|^2 inside the unit circle, |z|^2 - 1 outside."""
    return GridField.from_function(dom, lambda z: np.abs(1 - np.abs(z) ** 2) + 0j)


# --- 4) Hartogs assembly --------------------------------------------------------------


def _polydisc_coordinates(n: int, radius: float, nodes: int) -> List[np.ndarray]:
    t = np.linspace(-radius, radius, nodes)
    grids = np.meshgrid(*([t] * (2 * n)), indexing="ij", sparse=True)
    return [grids[2 * j + 1] + 1j * grids[2 * j] for j in range(n)]


@dataclass(frozen=True)
class PolydiscSamples:
    """Values on the product of n square lattices covering |z_j| <= radius.

    Axis 2j runs along Im z_j, axis 2j+1 along Re z_j.
    """

    n: int
    radius: float
    values: np.ndarray

    @property
    def nodes(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.radius / (self.nodes - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.radius, self.radius, self.nodes)

    def coordinates(self) -> List[np.ndarray]:
        """z_j as arrays that broadcast against values, one per variable."""
        return _polydisc_coordinates(self.n, self.radius, self.nodes)

    def inside(self) -> np.ndarray:
        out = np.ones(self.values.shape, dtype=bool)
        for z in self.coordinates():
            out &= np.abs(z) <= self.radius
        return out


def sample_polydisc(
    func: Callable[[np.ndarray], np.ndarray], n: int, nodes: Optional[int] = None, radius: float = 1.0
) -> PolydiscSamples:
    """Evaluate func on (N, n) points of the polydisc lattice, a block of rows at a time."""
    nodes = config.DEFAULTS.polydisc_nodes if nodes is None else nodes
    shape = (nodes,) * (2 * n)
    coords = [np.broadcast_to(z, shape) for z in _polydisc_coordinates(n, radius, nodes)]
    values = np.empty(shape, dtype=complex)
    block = max(1, _BLOCK // nodes ** (2 * n - 1))
    for start in range(0, nodes, block):
        rows = slice(start, start + block)
        pts = np.stack([z[rows].ravel() for z in coords], axis=1)
        values[rows] = np.asarray(func(pts), dtype=complex).reshape(coords[0][rows].shape)
    return PolydiscSamples(n, radius, values)


def _dbar_axis(values: np.ndarray, j: int, h: float, stride: int = 1) -> np.ndarray:
    ay, ax = 2 * j, 2 * j + 1

    def diff(a: np.ndarray, axis: int) -> np.ndarray:
        out = np.full_like(a, np.nan)
        src = [slice(None)] * a.ndim
        lo, hi, mid = list(src), list(src), list(src)
        hi[axis], lo[axis] = slice(2 * stride, None), slice(None, -2 * stride)
        mid[axis] = slice(stride, -stride)
        out[tuple(mid)] = (a[tuple(hi)] - a[tuple(lo)]) / (2 * stride * h)
        return out

    return 0.5 * (diff(values, ax) + 1j * diff(values, ay))


def _dbar_axis_power(values: np.ndarray, j: int, a: int, h: float, stride: int) -> np.ndarray:
    """(dbar_j)^a, swept in blocks along an axis of another variable."""

    def apply(block: np.ndarray) -> np.ndarray:
        for _ in range(a):
            block = _dbar_axis(block, j, h, stride)
        return block

    if values.ndim == 2:
        return apply(values)
    sweep = 2 if j == 0 else 0
    out = np.empty(values.shape, dtype=complex)
    step = max(1, _BLOCK // (values.size // values.shape[sweep]))
    idx = [slice(None)] * values.ndim
    for start in range(0, values.shape[sweep], step):
        idx[sweep] = slice(start, start + step)
        out[tuple(idx)] = apply(values[tuple(idx)])
    return out


@dataclass
class _Scan:
    residual: float = 0.0
    bound: float = 0.0
    excess: float = 0.0
    at: Tuple[int, ...] = ()
    residual_at: float = 0.0
    bound_at: float = 0.0


def _scan(fine: np.ndarray, coarse: np.ndarray, inside: np.ndarray, floor: float) -> _Scan:
    """Residual against node bounds over the tested nodes, a block of rows at a time."""
    out = _Scan()
    step = max(1, _BLOCK // (fine.size // fine.shape[0]))
    for start in range(0, fine.shape[0], step):
        rows = slice(start, start + step)
        R = np.abs(fine[rows])
        tested = inside[rows] & np.isfinite(R) & np.isfinite(coarse[rows])
        if not tested.any():
            continue
        b = np.where(tested, _node_bounds(fine[rows], coarse[rows], floor), np.inf)
        R = np.where(tested, R, 0.0)
        out.residual = max(out.residual, float(R.max()))
        out.bound = max(out.bound, float(np.max(b, where=tested, initial=0.0)))
        ratio = R / b
        k = int(np.argmax(ratio))
        if ratio.flat[k] > out.excess:
            local = np.unravel_index(k, R.shape)
            out.excess = float(ratio.flat[k])
            out.at = (local[0] + start,) + tuple(int(i) for i in local[1:])
            out.residual_at, out.bound_at = float(R.flat[k]), float(b.flat[k])
    return out


@dataclass
class HartogsReport:
    verdict: str
    alpha: Tuple[int, ...]
    single_residuals: List[float]
    mixed_residual: float
    bound: float
    floor: float = 0.0
    remark: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "alpha": list(self.alpha),
            "single_residuals": self.single_residuals,
            "mixed_residual": self.mixed_residual,
            "scheme_bound": self.bound,
            "scheme_floor": self.floor,
            "remark": self.remark,
        }


def _hartogs_floor(S: PolydiscSamples, alpha: Sequence[int]) -> float:
    """K*h^2*max|f|, K calibrated per order on one disc of the lattice."""
    t = S.axis()
    z = t[None, :] + 1j * t[:, None]
    disc = np.abs(z) <= S.radius
    ratio = 0.0
    for a in sorted(set(alpha)):
        reference = np.exp(z / (S.radius * S.n)) * np.conj(z) ** (a - 1)
        D = _dbar_axis_power(reference, 0, a, S.h, 1)
        ratio = max(ratio, _masked_max(D, disc) / float(np.max(np.abs(reference[disc]))))
    K = max(1.0, 8.0 * ratio / S.h ** 2)
    fmax = float(np.max(np.abs(S.values), where=S.inside(), initial=0.0))
    return K * S.h ** 2 * max(fmax, 1e-300)


def hartogs_assemble(S: PolydiscSamples, alpha: Sequence[int]) -> HartogsReport:
    """Separately polyanalytic slices imply the joint verdict.

    Each (dbar_j)^{alpha_j} is applied over every slice at once and checked
    node by node against floor plus the Richardson error estimate; the first
    slice above its bound raises SliceViolation.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != S.n or any(a < 1 for a in alpha):
        raise PreconditionViolation("alpha must have n entries >= 1", {"alpha": list(alpha)})
    if S.nodes < 4 * max(alpha) + 1:
        raise GridTooSmall("lattice too small for the doubled stencil", {"nodes": S.nodes})
    h = S.h
    floor = _hartogs_floor(S, alpha)
    inside = S.inside()
    singles: List[float] = []
    bound = floor
    mixed, mixed_coarse = S.values, S.values
    for j, a in enumerate(alpha):
        fine = _dbar_axis_power(S.values, j, a, h, 1)
        coarse = _dbar_axis_power(S.values, j, a, h, 2)
        scan = _scan(fine, coarse, inside, floor)
        singles.append(scan.residual)
        bound = max(bound, scan.bound)
        if scan.excess > 1.0:
            frozen = [int(i) for k, i in enumerate(scan.at) if k not in (2 * j, 2 * j + 1)]
            raise SliceViolation(
                f"variable {j + 1} is not polyanalytic of order {a}",
                {"variable": j + 1, "slice": frozen, "residual": scan.residual_at, "bound": scan.bound_at},
            )
        if j == 0:
            mixed, mixed_coarse = fine, coarse
        else:
            del fine, coarse
            mixed = _dbar_axis_power(mixed, j, a, h, 1)
            mixed_coarse = _dbar_axis_power(mixed_coarse, j, a, h, 2)
    scan = _scan(mixed, mixed_coarse, inside, floor)
    bound = max(bound, scan.bound)
    joint = scan.excess <= 1.0
    verdict = "jointly-polyanalytic" if joint else "not-jointly-polyanalytic"
    logger.debug("hartogs alpha={} singles={} mixed={:.3e}", alpha, singles, scan.residual)
    remark = report_text.HARTOGS_REMARK if joint else ""
    return HartogsReport(verdict, alpha, singles, scan.residual, bound, floor, remark)


def polydisc_index(nodes: int, n: int) -> List[Tuple[int, ...]]:
    """Row-major multi-indices of the polydisc lattice, as written to CSV."""
    return list(itertools.product(range(nodes), repeat=2 * n))
