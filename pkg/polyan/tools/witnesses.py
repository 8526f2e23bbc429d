"""Catalog of functions known to satisfy the one-dimensional boundary maximum
modulus property: holomorphic functions, lambda*conj(Q)/Q, |P|^2 and
G*conj(H). Their moduli restricted to any complex line are log-subharmonic,
and off zeros the same holds for the reciprocal of the holomorphic kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import NotRepresentable, PreconditionViolation
from .modulus import BalkForm
from .polycore import MultiIndex, PolyAnalytic, RationalHolo, CPoly, conj_mul

KINDS = ("holomorphic", "balk_quotient", "squared_modulus", "holo_antiholo_product")


@dataclass(frozen=True)
class HoloExp:
    """exp(b + sum_j a_j z_j)."""

    a: np.ndarray
    b: complex = 0j

    @property
    def n(self) -> int:
        return int(np.asarray(self.a).size)

    def eval(self, z) -> np.ndarray:
        pts = np.asarray(z, dtype=complex).reshape(-1, self.n)
        return np.exp(self.b + pts @ np.asarray(self.a, dtype=complex))


Holo = Union[CPoly, RationalHolo, HoloExp]


def _eval_holo(g: Holo, pts: np.ndarray) -> np.ndarray:
    if isinstance(g, RationalHolo):
        top, bottom = g.eval_parts(pts)
        return top / bottom
    return g.eval(pts)


@dataclass(frozen=True)
class MWitness:
    kind: str
    n: int
    g: Optional[Holo] = None
    lam: complex = 1.0
    Q: Optional[CPoly] = None
    P: Optional[CPoly] = None
    G: Optional[CPoly] = None
    H: Optional[CPoly] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionViolation("unknown witness kind", {"kind": self.kind})
        needed = {
            "holomorphic": ("g",),
            "balk_quotient": ("Q",),
            "squared_modulus": ("P",),
            "holo_antiholo_product": ("G", "H"),
        }[self.kind]
        missing = [k for k in needed if getattr(self, k) is None]
        if missing:
            raise PreconditionViolation("witness payload incomplete", {"missing": missing})

    # constructors
    @classmethod
    def holomorphic(cls, g: Holo) -> "MWitness":
        return cls("holomorphic", g.n, g=g)

    @classmethod
    def balk_quotient(cls, lam: complex, Q: CPoly) -> "MWitness":
        return cls("balk_quotient", Q.n, lam=complex(lam), Q=Q)

    @classmethod
    def squared_modulus(cls, P: CPoly) -> "MWitness":
        return cls("squared_modulus", P.n, P=P)

    @classmethod
    def product(cls, G: CPoly, H: CPoly) -> "MWitness":
        return cls("holo_antiholo_product", G.n, G=G, H=H)

    def _points(self, z) -> np.ndarray:
        pts = np.asarray(z, dtype=complex)
        return pts.reshape(-1, self.n)

    def denominator(self, z) -> np.ndarray:
        """|denominator| at z; ones for kinds without poles."""
        pts = self._points(z)
        if self.kind == "balk_quotient":
            return np.abs(self.Q.eval(pts))
        if self.kind == "holomorphic" and isinstance(self.g, RationalHolo):
            return np.abs(self.g.den.eval(pts))
        return np.ones(pts.shape[0])

    def eval(self, z) -> np.ndarray:
        pts = self._points(z)
        if self.kind == "holomorphic":
            return _eval_holo(self.g, pts)
        if self.kind == "balk_quotient":
            q = self.Q.eval(pts)
            return self.lam * np.conj(q) / q
        if self.kind == "squared_modulus":
            return np.abs(self.P.eval(pts)) ** 2 + 0j
        return self.G.eval(pts) * np.conj(self.H.eval(pts))

    def reciprocal(self, z) -> np.ndarray:
        return 1.0 / self.eval(z)

    def order(self) -> MultiIndex:
        if self.kind == "holomorphic":
            return (1,) * self.n
        if self.kind == "balk_quotient":
            return tuple(d + 1 for d in self.Q.degrees())
        if self.kind == "squared_modulus":
            return tuple(d + 1 for d in self.P.degrees())
        return tuple(d + 1 for d in self.H.degrees())

    def balk_form(self) -> Optional[BalkForm]:
        return BalkForm(self.lam, self.Q) if self.kind == "balk_quotient" else None

    def to_polyanalytic(self) -> PolyAnalytic:
        if self.kind == "holomorphic":
            if isinstance(self.g, HoloExp):
                raise NotRepresentable("exponential has no finite representation")
            return PolyAnalytic.holomorphic(self.g)
        if self.kind == "balk_quotient":
            return BalkForm(self.lam, self.Q).to_polyanalytic()
        if self.kind == "squared_modulus":
            p = PolyAnalytic.holomorphic(self.P)
            return conj_mul(p, p)
        return conj_mul(PolyAnalytic.holomorphic(self.H), PolyAnalytic.holomorphic(self.G))

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "n": self.n, "order": list(self.order()), "label": self.label}


def _random_poly(rng: np.random.Generator, n: int, degree: int) -> CPoly:
    terms = {}
    for m in np.ndindex(*((degree + 1,) * n)):
        if sum(m) <= degree:
            terms[tuple(int(k) for k in m)] = complex(rng.normal(), rng.normal()) / (1 + sum(m))
    return CPoly(n, terms)


def random_witness(kind: str, rng: np.random.Generator, n: int = 2, degree: int = 2) -> MWitness:
    """A seeded member of the catalog; poles of balk quotients sit far outside the unit polydisc."""
    if kind == "holomorphic":
        if rng.uniform() < 0.5:
            return MWitness.holomorphic(HoloExp(rng.normal(size=n) + 1j * rng.normal(size=n)))
        return MWitness.holomorphic(_random_poly(rng, n, degree))
    if kind == "balk_quotient":
        shift = 3.0 + rng.uniform()
        Q = CPoly.var(0, n) + CPoly.constant(-shift * np.exp(2j * np.pi * rng.uniform()), n)
        lam = np.exp(2j * np.pi * rng.uniform()) * (0.5 + rng.uniform())
        return MWitness.balk_quotient(lam, Q)
    if kind == "squared_modulus":
        return MWitness.squared_modulus(_random_poly(rng, n, degree))
    if kind == "holo_antiholo_product":
        return MWitness.product(_random_poly(rng, n, degree), _random_poly(rng, n, degree))
    raise PreconditionViolation("unknown witness kind", {"kind": kind})
