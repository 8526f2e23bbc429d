"""Wire formats: pydantic models for JSON documents, pandas for CSV tables."""

from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import IoError, ParseError, PolyanError
from .tools.harmonic import Domain2D, GridField, disc, from_mask, from_polyline
from .tools.levi import GraphHypersurface, builtin, from_terms
from .tools.polycore import CPoly, PolyAnalytic, RationalHolo
from .tools.rado import PolydiscSamples
from .tools.sampling import PointSet
from .tools.witnesses import HoloExp, MWitness


class _Wire(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TermModel(_Wire):
    pow: List[int]
    re: float
    im: float = 0.0


class CoefficientModel(_Wire):
    beta: List[int]
    num: List[TermModel]
    den: List[TermModel] = Field(default_factory=list)


class PolyAnalyticModel(_Wire):
    n: int = Field(ge=1)
    alpha: List[int]
    terms: List[CoefficientModel] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self) -> "PolyAnalyticModel":
        if len(self.alpha) != self.n:
            raise ValueError("alpha must have n entries")
        for t in self.terms:
            if len(t.beta) != self.n or any(len(m.pow) != self.n for m in t.num + t.den):
                raise ValueError("exponent lengths must equal n")
        return self


class DomainModel(_Wire):
    h: float = Field(gt=0)
    polyline: Optional[List[Tuple[float, float]]] = None
    radius: Optional[float] = Field(default=None, gt=0)
    center: Tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def _one_shape(self) -> "DomainModel":
        if (self.polyline is None) == (self.radius is None):
            raise ValueError("give exactly one of polyline or radius")
        return self


class HTermModel(_Wire):
    a: List[int]
    b: List[int]
    k: int = 0
    re: float
    im: float = 0.0


class HypersurfaceModel(_Wire):
    builtin: Optional[str] = None
    n: Optional[int] = None
    terms: List[HTermModel] = Field(default_factory=list)
    box: float = Field(1.0, gt=0)
    eps: float = 0.1
    delta: float = 0.3

    @model_validator(mode="after")
    def _source(self) -> "HypersurfaceModel":
        if self.builtin is None and self.n is None:
            raise ValueError("give a builtin id or n with terms")
        return self


class ExpModel(_Wire):
    a: List[Tuple[float, float]]
    b: Tuple[float, float] = (0.0, 0.0)


class WitnessModel(_Wire):
    kind: Literal["holomorphic", "balk_quotient", "squared_modulus", "holo_antiholo_product"]
    n: int = Field(ge=1)
    poly: Optional[List[TermModel]] = None
    num: Optional[List[TermModel]] = None
    den: Optional[List[TermModel]] = None
    exp: Optional[ExpModel] = None
    lam: Tuple[float, float] = Field((1.0, 0.0), alias="lambda")
    Q: Optional[List[TermModel]] = None
    P: Optional[List[TermModel]] = None
    G: Optional[List[TermModel]] = None
    H: Optional[List[TermModel]] = None
    label: str = ""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SidecarModel(_Wire):
    q: int = Field(ge=1)
    zero_threshold: float = Field(1e-8, gt=0)


# --- 1) Files --------------------------------------------------------------------------


def read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise IoError("input file not found", {"path": str(path)}) from e
    except OSError as e:
        raise IoError("cannot read input file", {"path": str(path), "reason": str(e)}) from e
    except json.JSONDecodeError as e:
        raise ParseError("malformed JSON", {"path": str(path), "line": e.lineno, "column": e.colno}) from e


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(dumps(payload), encoding="utf-8")
    except OSError as e:
        raise IoError("cannot write output file", {"path": str(path), "reason": str(e)}) from e


def _plain(obj: Any) -> Any:
    """numpy scalars and complex numbers as JSON-native values; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_finite(float(obj.real)), _finite(float(obj.imag))]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    return obj


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def _validate(model, raw: Any, what: str):
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ParseError(f"invalid {what} document", {"problems": problems}) from e


def _read_csv(
    path: Union[str, Path], required: List[str], finite: Optional[List[str]] = None
) -> pd.DataFrame:
    """Numeric table; columns in `finite` (all of them by default) may hold no empty or non-finite cell."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise IoError("input file not found", {"path": str(path)}) from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError("malformed CSV", {"path": str(path), "reason": str(e)}) from e
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError("CSV lacks required columns", {"path": str(path), "missing": missing})
    try:
        frame = frame.astype(float)
    except ValueError as e:
        raise ParseError("CSV holds non-numeric cells", {"path": str(path)}) from e
    checked = frame[list(frame.columns) if finite is None else finite].to_numpy()
    bad = ~np.isfinite(checked).all(axis=1)
    if bad.any():
        rows = [int(i) + 2 for i in np.flatnonzero(bad)[:5]]
        raise ParseError("CSV holds empty or non-finite cells", {"path": str(path), "lines": rows})
    return frame


def _write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    try:
        frame.to_csv(path, index=False, float_format="%.17g")
    except OSError as e:
        raise IoError("cannot write output file", {"path": str(path), "reason": str(e)}) from e


# --- 2) Polynomials and polyanalytic functions ---------------------------------------------


def cpoly_to_json(P: CPoly) -> List[Dict[str, Any]]:
    return [{"pow": list(m), "re": float(c.real), "im": float(c.imag)} for m, c in sorted(P.terms.items())]


def cpoly_from_terms(terms: List[TermModel], n: int) -> CPoly:
    out: Dict[Tuple[int, ...], complex] = {}
    for t in terms:
        if len(t.pow) != n:
            raise ParseError("exponent length differs from n", {"pow": t.pow, "n": n})
        key = tuple(t.pow)
        out[key] = out.get(key, 0j) + complex(t.re, t.im)
    return CPoly(n, out)


def polyanalytic_to_json(f: PolyAnalytic) -> Dict[str, Any]:
    terms = []
    for beta in sorted(f.coeffs):
        a = f.coeffs[beta]
        terms.append({"beta": list(beta), "num": cpoly_to_json(a.num), "den": cpoly_to_json(a.den)})
    return {"n": f.n, "alpha": list(f.order), "terms": terms}


def polyanalytic_from_json(raw: Any) -> PolyAnalytic:
    model = _validate(PolyAnalyticModel, raw, "polyanalytic")
    n = model.n
    coeffs: Dict[Tuple[int, ...], RationalHolo] = {}
    for t in model.terms:
        num = cpoly_from_terms(t.num, n)
        den = cpoly_from_terms(t.den, n) if t.den else CPoly.constant(1.0, n)
        if den.is_zero():
            raise ParseError("zero denominator", {"beta": t.beta})
        coeffs[tuple(t.beta)] = RationalHolo(num, den)
    try:
        return PolyAnalytic(n, tuple(model.alpha), coeffs)
    except PolyanError as e:
        raise ParseError(e.message, e.details) from e


def load_polyanalytic(path: Union[str, Path]) -> PolyAnalytic:
    return polyanalytic_from_json(read_json(path))


# --- 3) Point sets and grid fields --------------------------------------------------------


def read_pointset(path: Union[str, Path], base: complex = 0j) -> PointSet:
    frame = _read_csv(path, ["re", "im"])
    pts = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    values = None
    if {"f_re", "f_im"} <= set(frame.columns):
        values = frame["f_re"].to_numpy() + 1j * frame["f_im"].to_numpy()
    try:
        return PointSet(base, pts, values)
    except PolyanError as e:
        raise ParseError(e.message, e.details) from e


def write_pointset(E: PointSet, path: Union[str, Path]) -> None:
    cols: Dict[str, np.ndarray] = {"re": E.points.real, "im": E.points.imag}
    if E.values is not None:
        cols.update(f_re=E.values.real, f_im=E.values.imag)
    _write_csv(pd.DataFrame(cols), path)


def write_gridfield(F: GridField, path: Union[str, Path]) -> None:
    """One row per valid node, row-major."""
    Z = F.domain.Z
    mask = F.mask
    frame = pd.DataFrame(
        {"x": Z.real[mask], "y": Z.imag[mask], "re": F.values.real[mask], "im": F.values.imag[mask]}
    )
    _write_csv(frame, path)


def _spacing(values: np.ndarray) -> float:
    u = np.unique(values)
    return float(np.min(np.diff(u))) if u.size > 1 else 0.0


def read_gridfield(path: Union[str, Path], h: Optional[float] = None) -> GridField:
    """Rebuild the lattice from node coordinates; the domain is the node mask.

    Coordinates must be finite. An empty or NaN value cell marks a hole: the node
    drops out of the mask.
    """
    frame = _read_csv(path, ["x", "y", "re", "im"], finite=["x", "y"])
    x, y = frame["x"].to_numpy(), frame["y"].to_numpy()
    if x.size == 0:
        raise ParseError("grid CSV has no rows", {"path": str(path)})
    if h is None:
        steps = [s for s in (_spacing(x), _spacing(y)) if s > 0]
        if not steps:
            raise ParseError("cannot infer the lattice step", {"path": str(path)})
        h = min(steps)
    x0, y0 = float(x.min()), float(y.min())
    c = np.rint((x - x0) / h).astype(int)
    r = np.rint((y - y0) / h).astype(int)
    if np.max(np.abs(x - x0 - c * h)) > 1e-6 * h or np.max(np.abs(y - y0 - r * h)) > 1e-6 * h:
        raise ParseError("nodes are not on a square lattice", {"h": h})
    shape = (int(r.max()) + 3, int(c.max()) + 3)
    values = np.full(shape, np.nan + 0j, dtype=complex)
    values[r + 1, c + 1] = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    dom = from_mask(np.isfinite(values), h, x0 - h, y0 - h)
    return GridField(dom, values)


def read_polydisc(path: Union[str, Path]) -> PolydiscSamples:
    """Samples on an m^(2n) lattice of the polydisc, rows in lattice order."""
    try:
        head = pd.read_csv(path, nrows=0)
    except FileNotFoundError as e:
        raise IoError("input file not found", {"path": str(path)}) from e
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError("malformed CSV", {"path": str(path), "reason": str(e)}) from e
    n = sum(1 for c in head.columns if c.endswith("_re") and c.startswith("z"))
    cols = [f"z{j}_{p}" for j in range(1, n + 1) for p in ("re", "im")] + ["f_re", "f_im"]
    frame = _read_csv(path, cols)
    if n < 1:
        raise ParseError("no z columns in polydisc CSV", {"path": str(path)})
    nodes = int(round(len(frame) ** (1.0 / (2 * n))))
    if nodes ** (2 * n) != len(frame):
        raise ParseError("row count is not m^(2n)", {"rows": len(frame), "n": n})
    radius = float(frame["z1_re"].max())
    values = (frame["f_re"].to_numpy() + 1j * frame["f_im"].to_numpy()).reshape((nodes,) * (2 * n))
    return PolydiscSamples(n, radius, values)


def write_polydisc(S: PolydiscSamples, path: Union[str, Path]) -> None:
    cols: Dict[str, np.ndarray] = {}
    for j, z in enumerate(S.coordinates(), start=1):
        z = np.broadcast_to(z, S.values.shape)
        cols[f"z{j}_re"] = z.real.ravel()
        cols[f"z{j}_im"] = z.imag.ravel()
    cols["f_re"] = S.values.real.ravel()
    cols["f_im"] = S.values.imag.ravel()
    _write_csv(pd.DataFrame(cols), path)


# --- 4) Domains, sidecars, hypersurfaces, witnesses -----------------------------------------


def domain_from_json(raw: Any) -> Domain2D:
    model = _validate(DomainModel, raw, "domain")
    try:
        if model.radius is not None:
            return disc(model.radius, model.h, complex(*model.center))
        pts = np.array([complex(x, y) for x, y in model.polyline])
        return from_polyline(pts, model.h)
    except ValueError as e:
        raise ParseError("unusable domain", {"reason": str(e)}) from e


def sidecar_from_json(raw: Any) -> SidecarModel:
    return _validate(SidecarModel, raw, "sidecar")


def hypersurface_from_json(raw: Any) -> Tuple[GraphHypersurface, float, float]:
    """(M, eps, delta)."""
    model = _validate(HypersurfaceModel, raw, "hypersurface")
    if model.builtin is not None:
        M = builtin(model.builtin, box=model.box)
    else:
        terms = [(t.a, t.b, t.k, complex(t.re, t.im)) for t in model.terms]
        M = from_terms(model.n, terms, box=model.box)
    return M, model.eps, model.delta


def witness_from_json(raw: Any) -> MWitness:
    model = _validate(WitnessModel, raw, "witness")
    n = model.n

    def need(terms: Optional[List[TermModel]], name: str) -> CPoly:
        if terms is None:
            raise ParseError(f"witness kind {model.kind} needs {name}")
        return cpoly_from_terms(terms, n)

    if model.kind == "holomorphic":
        if model.exp is not None:
            if len(model.exp.a) != n:
                raise ParseError("exp needs n coefficients", {"n": n})
            g = HoloExp(np.array([complex(*c) for c in model.exp.a]), complex(*model.exp.b))
        elif model.poly is not None:
            g = cpoly_from_terms(model.poly, n)
        else:
            den = need(model.den, "den") if model.den else CPoly.constant(1.0, n)
            g = RationalHolo(need(model.num, "num or poly or exp"), den)
        w = MWitness.holomorphic(g)
    elif model.kind == "balk_quotient":
        w = MWitness.balk_quotient(complex(*model.lam), need(model.Q, "Q"))
    elif model.kind == "squared_modulus":
        w = MWitness.squared_modulus(need(model.P, "P"))
    else:
        w = MWitness.product(need(model.G, "G"), need(model.H, "H"))
    return replace(w, label=model.label)
