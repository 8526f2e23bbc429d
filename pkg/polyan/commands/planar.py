"""dirichlet, rado and hartogs."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import numpy as np
from loguru import logger

from .. import codecs
from ..errors import PolyanError, PreconditionViolation, SliceViolation, TargetUnreachable, VerdictError
from ..heatmap import emit_heatmap
from ..tools import harmonic, rado
from . import Outcome, Request

_DEFAULT_STEP = 1 / 64


def _boundary_data(path: str) -> harmonic.BoundaryData:
    """Re f for a polyanalytic JSON document, else interpolated CSV samples."""
    if Path(path).suffix.lower() == ".json":
        f = codecs.load_polyanalytic(path)
        if f.n != 1:
            raise PreconditionViolation("boundary data must be a function of one variable", {"n": f.n})
        return lambda w: f.eval(w, singular="nan").real + 0j
    E = codecs.read_pointset(path, base=complex(np.inf))
    if E.values is None:
        raise PreconditionViolation("boundary CSV needs f_re, f_im columns")
    return harmonic.sampled_boundary(E.points, E.values.real)


def run_dirichlet(req: Request) -> Outcome:
    dom_path, g_path = req.need_inputs(2)[:2]
    dom = codecs.domain_from_json(codecs.read_json(dom_path))
    g = _boundary_data(g_path)
    u = harmonic.solve_dirichlet(dom, g)
    payload: Dict[str, Any] = {"domain": dom.to_dict(), "max_abs": u.max_abs()}
    negative = False
    try:
        v = harmonic.harmonic_conjugate(u, dom)
        payload["conjugate"] = {
            "cauchy_riemann_residual": harmonic.cauchy_riemann_residual(u, v),
            "path_independence_residual": harmonic.path_independence_residual(u),
        }
    except VerdictError as e:
        logger.warning("no single-valued conjugate: {}", e.message)
        payload["conjugate"] = e.to_dict()
        negative = True
    if req.target is not None:
        try:
            approx = harmonic.holo_poly_approx(g, dom, degree=req.degree, target=req.target)
            payload["approximation"] = {
                **approx.to_dict(),
                "transfer": harmonic.exponential_transfer_check(g, dom, approx.final, u),
            }
        except TargetUnreachable as e:
            payload["approximation"] = e.to_dict()
            negative = True
    if req.field_out:
        codecs.write_gridfield(u, req.field_out)
    if req.heatmap:
        emit_heatmap(u, req.heatmap)
    return Outcome(payload, negative)


def _load_sampled(req: Request) -> rado.SampledFunction:
    paths = req.need_inputs(1)
    q = req.q
    threshold = None
    for extra in paths[1:]:
        side = codecs.sidecar_from_json(codecs.read_json(extra))
        q = side.q if q is None else q
        threshold = side.zero_threshold
    if q is None:
        raise PreconditionViolation("rado needs --q or a sidecar with q")
    source = paths[0]
    if Path(source).suffix.lower() == ".json":
        f = codecs.load_polyanalytic(source)
        dom = harmonic.disc(1.0, req.h or _DEFAULT_STEP)
        field = rado.sample_polyanalytic(f, dom)
    else:
        field = codecs.read_gridfield(source, req.h)
    return rado.SampledFunction(field, q, threshold)


def run_rado(req: Request) -> Outcome:
    f = _load_sampled(req)
    degree = 12 if req.degree is None else req.degree
    report = rado.rado_verify(f, strict=req.strict, degree=degree)
    if req.field_out and report.coefficients:
        stem = Path(req.field_out)
        for j, a in enumerate(report.coefficients):
            codecs.write_gridfield(a, stem.with_name(f"{stem.stem}_a{j}{stem.suffix or '.csv'}"))
    if req.heatmap:
        emit_heatmap(rado.numeric_dbar(f.field, f.q), req.heatmap)
    return Outcome(report.to_dict(), negative=report.verdict == "fails")


def run_hartogs(req: Request) -> Outcome:
    S = codecs.read_polydisc(req.need_inputs(1)[0])
    if req.alpha is None:
        raise PreconditionViolation("hartogs needs --alpha")
    try:
        report = rado.hartogs_assemble(S, req.alpha)
    except SliceViolation as e:
        return Outcome({"verdict": "slice-violation", **e.to_dict()}, negative=True)
    return Outcome(report.to_dict(), negative=report.verdict != "jointly-polyanalytic")
