"""levi, discs and trace."""

from __future__ import annotations

from typing import Any, Dict, Tuple

from .. import codecs
from ..heatmap import emit_heatmap
from ..tools import levi
from ..tools.witnesses import MWitness
from . import Outcome, Request


def _family(req: Request) -> Tuple[levi.GraphHypersurface, levi.DiscFamily]:
    M, eps, delta = codecs.hypersurface_from_json(codecs.read_json(req.inputs[0]))
    L = levi.levi_form(M)
    return M, levi.build_disc_family(M, L, eps, delta, seed=req.seed)


def _witness(req: Request) -> MWitness:
    return codecs.witness_from_json(codecs.read_json(req.need_inputs(2)[1]))


def run_levi(req: Request) -> Outcome:
    M, _, _ = codecs.hypersurface_from_json(codecs.read_json(req.need_inputs(1)[0]))
    L = levi.levi_form(M)
    payload = {"hypersurface": M.to_dict(), **L.to_dict()}
    return Outcome(payload, negative=not L.positive)


def run_discs(req: Request) -> Outcome:
    """Disc family summary; with a witness as second input, the maximum-modulus check too."""
    req.need_inputs(1)
    M, D = _family(req)
    payload: Dict[str, Any] = {"hypersurface": M.to_dict(), "family": D.to_dict()}
    negative = False
    if len(req.inputs) > 1:
        f = _witness(req)
        report = levi.bmmp_verify(f, D, reciprocal=True)
        payload["witness"] = f.describe()
        payload["bmmp"] = report.to_dict()
        negative = not report.holds
        if req.heatmap:
            emit_heatmap(levi.disc_slice(f, D), req.heatmap)
    return Outcome(payload, negative)


def run_trace(req: Request) -> Outcome:
    f = _witness(req)
    M, D = _family(req)
    report = levi.constant_modulus_trace(f, M, D, seed=req.seed + 1)
    payload = {"witness": f.describe(), "family": D.to_dict(), **report.to_dict()}
    if req.heatmap:
        emit_heatmap(levi.disc_slice(f, D), req.heatmap)
    return Outcome(payload, negative=report.verdict == "non_constant_trace")
