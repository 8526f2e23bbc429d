"""CLI command handlers. Each takes a `Request` and returns an `Outcome`."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..errors import ParseError, PreconditionViolation


@dataclass
class Request:
    command: str
    inputs: List[str] = field(default_factory=list)
    out: Optional[str] = None
    q: Optional[int] = None
    alpha: Optional[Tuple[int, ...]] = None
    seed: int = 0
    at: Optional[str] = None
    heatmap: Optional[str] = None
    field_out: Optional[str] = None
    h: Optional[float] = None
    degree: Optional[int] = None
    base: Optional[str] = None
    target: Optional[float] = None
    strict: bool = False

    def need_inputs(self, count: int) -> List[str]:
        if len(self.inputs) < count:
            raise PreconditionViolation(
                f"{self.command} needs {count} --in file(s)", {"given": len(self.inputs)}
            )
        return self.inputs

    def need_q(self) -> int:
        if self.q is None:
            raise PreconditionViolation(f"{self.command} needs --q")
        return self.q


@dataclass
class Outcome:
    payload: Dict[str, Any]
    negative: bool = False


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as e:
        raise ParseError("not a complex literal", {"value": text}) from e


def parse_point(text: str) -> List[complex]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ParseError("empty point", {"value": text})
    return [parse_complex(p) for p in parts]


Handler = Callable[[Request], Outcome]


def registry() -> Dict[str, Handler]:
    from . import levi, planar, symbolic

    return {
        "eval": symbolic.run_eval,
        "order": symbolic.run_order,
        "modulus": symbolic.run_modulus,
        "fit": symbolic.run_fit,
        "directions": symbolic.run_directions,
        "dirichlet": planar.run_dirichlet,
        "rado": planar.run_rado,
        "hartogs": planar.run_hartogs,
        "levi": levi.run_levi,
        "discs": levi.run_discs,
        "trace": levi.run_trace,
    }


# primary tolerance set by --tol, per command
PRIMARY_TOLERANCE = {
    "eval": "eval_singularity",
    "order": "symbolic_zero",
    "modulus": "modulus_tol",
    "fit": "fit_rcond",
    "directions": "angular_resolution",
    "dirichlet": "dirichlet_residual",
    "rado": "zero_threshold",
    "levi": "hermitian_defect",
    "discs": "hermitian_defect",
    "trace": "trace_tol",
}
