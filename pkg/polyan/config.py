"""Numeric defaults and their overrides.

Every tolerance used anywhere in the package lives in `Tolerances`. Values
resolve in this order: field default, `POLYAN_<FIELD>` from the environment
(a `.env` file is loaded first), then explicit CLI overrides.
"""

from __future__ import annotations

import os
from typing import Any, Dict, Mapping, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ParseError

load_dotenv()

ENV_PREFIX = "POLYAN_"
LOG_LEVEL = os.getenv("POLYAN_LOG_LEVEL", "WARNING").upper()


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # polycore
    symbolic_zero: float = Field(1e-12, gt=0, description="relative coefficient pruning")
    eval_singularity: float = Field(1e-10, gt=0, description="|den| < t(1+|num|) is a pole")
    # modulus
    modulus_tol: float = Field(1e-10, gt=0, description="relative constancy check")
    # sampling
    shells: int = Field(4, ge=1)
    angular_resolution: float = Field(0.1, gt=0)
    fit_rcond: float = Field(1e-10, gt=0)
    agreement_tol: float = Field(1e-9, gt=0)
    # harmonic
    dirichlet_residual: float = Field(1e-10, gt=0)
    direct_solve_cap: int = Field(65536, ge=1, description="unknowns solved by spsolve")
    iteration_cap: int = Field(20000, ge=1)
    harmonic_residual: float = Field(1e-8, gt=0)
    period_tol: float = Field(1e-6, gt=0)
    degree_cap: int = Field(40, ge=0)
    # rado
    zero_threshold: float = Field(1e-8, gt=0)
    band_width: int = Field(2, ge=0)
    band_factor: float = Field(100.0, gt=0)
    jump_factor: float = Field(10.0, gt=0)
    polydisc_nodes: int = Field(16, ge=5)
    # levi
    hermitian_defect: float = Field(1e-8, gt=0)
    max_halvings: int = Field(20, ge=0)
    disc_count: int = Field(16, ge=2)
    bmmp_grid: int = Field(24, ge=4)
    coverage_samples: int = Field(400, ge=1)
    trace_tol: float = Field(1e-6, gt=0)

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Tolerances":
        environ = os.environ if environ is None else environ
        raw: Dict[str, Any] = {}
        for name in cls.model_fields:
            key = ENV_PREFIX + name.upper()
            if key in environ:
                raw[name] = environ[key]
        return cls._build(raw)

    def override(self, **values: Any) -> "Tolerances":
        data = self.model_dump()
        data.update(values)
        return self._build(data)

    @classmethod
    def _build(cls, raw: Dict[str, Any]) -> "Tolerances":
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ParseError("invalid tolerance override", {"problems": _problems(e)}) from e


def _problems(e: ValidationError) -> list:
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]


DEFAULTS = Tolerances.from_env()


def activate(tolerances: Tolerances) -> Tolerances:
    """Make `tolerances` the process-wide settings read by every tool."""
    global DEFAULTS
    DEFAULTS = tolerances
    return tolerances


def defaults_table() -> Dict[str, Any]:
    """The documented defaults, as shown by `polyan --defaults`."""
    return Tolerances().model_dump()
