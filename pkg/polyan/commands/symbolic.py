"""eval, order, modulus, fit and directions."""

from __future__ import annotations

from typing import Any, Dict

import numpy as np
from loguru import logger

from .. import codecs
from ..errors import PreconditionViolation
from ..tools import modulus, polycore, sampling
from . import Outcome, Request, parse_complex, parse_point


def run_eval(req: Request) -> Outcome:
    f = codecs.load_polyanalytic(req.need_inputs(1)[0])
    if req.at is None:
        raise PreconditionViolation("eval needs --at")
    point = parse_point(req.at)
    if len(point) != f.n:
        raise PreconditionViolation("point dimension differs from n", {"n": f.n, "given": len(point)})
    value = complex(f.eval(np.array([point]))[0])
    return Outcome({"at": [[p.real, p.imag] for p in point], "value": [value.real, value.imag]})


def run_order(req: Request) -> Outcome:
    f = codecs.load_polyanalytic(req.need_inputs(1)[0])
    alpha = polycore.exact_order(f)
    payload: Dict[str, Any] = {
        "declared_order": list(f.order),
        "exact_order": list(alpha),
        "changed_order_bound": list(polycore.changed_order_bound(f)),
        "polynomial_coefficients": f.has_polynomial_coefficients(),
    }
    if req.q is not None:
        # q-fold dbar in every variable vanishes iff the exact order is <= q there
        payload["annihilated_by_q"] = all(
            polycore.dbar(f, j + 1, req.q).is_zero() for j in range(f.n)
        )
    return Outcome(payload)


def run_modulus(req: Request) -> Outcome:
    f = codecs.load_polyanalytic(req.need_inputs(1)[0])
    C = modulus.is_constant_modulus(f)
    if C is None:
        logger.info("modulus is not constant")
        return Outcome({"constant_modulus": False, "C": None, "lambda": None, "Q": None}, negative=True)
    form = modulus.balk_decompose(f)
    payload = {
        "constant_modulus": True,
        "C": C,
        "lambda": [form.lam.real, form.lam.imag],
        "Q": codecs.cpoly_to_json(form.Q),
        "Q_degree": list(form.Q.degrees()),
        "soundness_defect": modulus.balk_soundness(f, form),
    }
    return Outcome(payload)


def run_fit(req: Request) -> Outcome:
    E = codecs.read_pointset(req.need_inputs(1)[0], _base(req))
    q = req.need_q()
    d = 3 if req.degree is None else req.degree
    fit = sampling.fit_polyanalytic(E, q, d)
    return Outcome({"f": codecs.polyanalytic_to_json(fit.f), "residual": fit.residual, "condition": fit.condition})


def run_directions(req: Request) -> Outcome:
    E = codecs.read_pointset(req.need_inputs(1)[0], _base(req))
    report = sampling.limiting_directions(E)
    payload = report.to_dict()
    negative = False
    if req.q is not None:
        payload["condensation_order_at_least_q"] = report.order >= req.q
        negative = report.order < req.q
    return Outcome(payload, negative)


def _base(req: Request) -> complex:
    return 0j if req.base is None else parse_complex(req.base)
