"""
Stevic-Sharma type operators
T^n f = psi1 f^(n)(phi) + psi2 f^(n+1)(phi) and T^{m,n} f = psi1 f^(m)(phi) + psi2 f^(n)(phi),
their derivative decomposition (Tf)' = sum_i E_i f^(i)(phi) and the dilation family
"""

import dataclasses
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DomainError
from .funcalg import AnalyticFunction, Polynomial
from .norms import DiskGrid, grid_sup
from .weights import SpaceParams, Weight

logger = logging.getLogger(__name__)

# Grid sup of |phi| allowed above 1 before a config is rejected
SELF_MAP_SLACK = 1e-9

# Weighted suprema above this count as infinite
OVERFLOW_GUARD = 1e300

# Outer-ring increase of a weighted sup read as growth towards the boundary
BOUNDARY_GROWTH_REL = 1e-3

# 1 - |phi| shrinking below this fraction when the ring depth halves means phi touches the circle
TOUCH_RATIO = 0.75


class OperatorKind(Enum):
    TN = "Tn"
    TMN = "Tmn"


@dataclass(frozen=True)
class SymbolConfig:
    """The symbols (psi1, psi2, phi) with the derivative orders"""

    psi1: AnalyticFunction
    psi2: AnalyticFunction
    phi: AnalyticFunction
    n: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.n < 0:
            raise ConfigError(f"operator order n must be non-negative, got {self.n}")
        if self.m is not None:
            if self.m < 0 or self.n < 1:
                raise ConfigError(f"T^(m,n) needs m >= 0 and n >= 1, got m={self.m}, n={self.n}")
            if self.m >= self.n:
                raise ConfigError(f"T^(m,n) needs m < n, got m={self.m}, n={self.n}")

    @cached_property
    def psi1_prime(self) -> AnalyticFunction:
        return self.psi1.derivative()

    @cached_property
    def psi2_prime(self) -> AnalyticFunction:
        return self.psi2.derivative()

    @cached_property
    def phi_prime(self) -> AnalyticFunction:
        return self.phi.derivative()

    def scaled(self, t: float) -> "SymbolConfig":
        return dataclasses.replace(self, psi1=self.psi1.scale(t), psi2=self.psi2.scale(t))


@dataclass(frozen=True)
class OperatorSpec:
    kind: OperatorKind
    symbols: SymbolConfig
    dilation: float = 1.0

    def __post_init__(self):
        if self.kind is OperatorKind.TMN and self.symbols.m is None:
            raise ConfigError("T^(m,n) needs the order m")
        if self.kind is OperatorKind.TN and self.symbols.m is not None:
            raise ConfigError("T^n takes a single order n; drop m or use kind Tmn")
        if not 0.0 < self.dilation <= 1.0:
            raise ConfigError(f"dilation r must lie in (0, 1], got {self.dilation}")

    @property
    def orders(self) -> Tuple[int, int]:
        """Derivative orders applied to f by the psi1 and psi2 parts"""
        if self.kind is OperatorKind.TN:
            return self.symbols.n, self.symbols.n + 1
        return self.symbols.m, self.symbols.n

    @property
    def merged(self) -> bool:
        """True when the middle E coefficients share an order (T^n, or m + 1 = n)"""
        first, second = self.orders
        return first + 1 == second

    def with_dilation(self, r: float) -> "OperatorSpec":
        return dataclasses.replace(self, dilation=float(r))

    def scaled(self, t: float) -> "OperatorSpec":
        return dataclasses.replace(self, symbols=self.symbols.scaled(t))

    def to_dict(self) -> Dict[str, Any]:
        s = self.symbols
        return {
            "kind": self.kind.value, "n": s.n, "m": s.m, "dilation_r": self.dilation,
            "psi1": s.psi1.to_literal(), "psi2": s.psi2.to_literal(), "phi": s.phi.to_literal(),
        }


@dataclass(frozen=True)
class SourceSpace:
    """Source space of an estimate: Q_K(p,q) (exponent gamma + i - 1) or H^inf (exponent i)"""

    kind: str
    params: Optional[SpaceParams] = None

    @classmethod
    def qk(cls, params: SpaceParams) -> "SourceSpace":
        return cls("qk", params)

    @classmethod
    def hinf(cls) -> "SourceSpace":
        return cls("hinf")

    def exponent(self, order: int) -> float:
        if self.kind == "qk":
            return self.params.gamma + order - 1
        return float(order)


# E coefficient components, evaluated from the symbols
_COMPONENTS = {
    "psi1_prime": lambda s, z: s.psi1_prime.evaluate(z),
    "psi1_phi_prime": lambda s, z: s.psi1.evaluate(z) * s.phi_prime.evaluate(z),
    "psi2_prime": lambda s, z: s.psi2_prime.evaluate(z),
    "psi2_phi_prime": lambda s, z: s.psi2.evaluate(z) * s.phi_prime.evaluate(z),
}


@dataclass(frozen=True)
class ETerm:
    order: int
    components: Tuple[str, ...]
    symbols: SymbolConfig

    @property
    def label(self) -> str:
        return "_plus_".join(self.components)

    def evaluate(self, z):
        total = 0
        for name in self.components:
            total = total + _COMPONENTS[name](self.symbols, z)
        return total

    def __call__(self, z):
        return self.evaluate(z)


@dataclass
class ECoefficients:
    values: Dict[int, complex]
    labels: Dict[int, str]

    def to_dict(self) -> Dict[str, Any]:
        return {str(i): {"label": self.labels[i], "value": [v.real, v.imag]}
                for i, v in sorted(self.values.items())}


def e_terms(spec: OperatorSpec) -> List[ETerm]:
    first, second = spec.orders
    s = spec.symbols
    if spec.merged:
        return [
            ETerm(first, ("psi1_prime",), s),
            ETerm(second, ("psi1_phi_prime", "psi2_prime"), s),
            ETerm(second + 1, ("psi2_phi_prime",), s),
        ]
    return [
        ETerm(first, ("psi1_prime",), s),
        ETerm(first + 1, ("psi1_phi_prime",), s),
        ETerm(second, ("psi2_prime",), s),
        ETerm(second + 1, ("psi2_phi_prime",), s),
    ]


def e_coefficients(spec: OperatorSpec, z: complex) -> ECoefficients:
    terms = e_terms(spec)
    return ECoefficients(
        values={t.order: complex(t.evaluate(complex(z))) for t in terms},
        labels={t.order: t.label for t in terms},
    )


class AppliedOperator:
    """Pointwise evaluator of T f, with its first derivative"""

    def __init__(self, spec: OperatorSpec, f: AnalyticFunction):
        self.spec = spec
        self.f = f
        self.source = f.dilate(spec.dilation)

    def evaluate(self, z):
        s = self.spec.symbols
        first, second = self.spec.orders
        w = s.phi.evaluate(z)
        return (s.psi1.evaluate(z) * self.source.derivative_at(first, w)
                + s.psi2.evaluate(z) * self.source.derivative_at(second, w))

    def derivative_at(self, k: int, z):
        if k == 0:
            return self.evaluate(z)
        if k == 1:
            return derivative_decomposed(self.spec, self.f, z)
        raise DomainError(f"operator images only expose derivatives up to order 1, got {k}")

    def __call__(self, z):
        return self.evaluate(z)


class OperatorDifference:
    """(T - T_r) f as a pointwise evaluator"""

    def __init__(self, spec: OperatorSpec, r: float, f: AnalyticFunction):
        self.full = AppliedOperator(spec.with_dilation(1.0), f)
        self.dilated = AppliedOperator(spec.with_dilation(r), f)

    def derivative_at(self, k: int, z):
        return self.full.derivative_at(k, z) - self.dilated.derivative_at(k, z)


def apply(spec: OperatorSpec, f: AnalyticFunction) -> AppliedOperator:
    return AppliedOperator(spec, f)


def derivative_decomposed(spec: OperatorSpec, f: AnalyticFunction, z):
    """(Tf)'(z) = sum over E terms of E_i(z) f_r^(i)(phi(z))"""
    source = f.dilate(spec.dilation)
    w = spec.symbols.phi.evaluate(z)
    total = 0
    for term in e_terms(spec):
        total = total + term.evaluate(z) * source.derivative_at(term.order, w)
    return total


@dataclass
class BoundaryMeasure:
    value: float
    argmax: complex
    boundary: bool
    gap_ratio: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "argmax": [self.argmax.real, self.argmax.imag],
                "boundary": self.boundary, "gap_ratio": self.gap_ratio}


def ring_gap_ratio(ring_gap: np.ndarray, subdivisions: int = 1) -> float:
    """
    1 - max|phi| on the outer ring over the same quantity where the ring
    depth is twice as large: about 0.5 when phi touches the circle with a
    finite angular derivative, tending to 1 when sup |phi| < 1.
    """
    step = 2 * subdivisions
    last = float(ring_gap[-1])
    if last <= SELF_MAP_SLACK:
        return 0.0
    if ring_gap.size <= step or ring_gap[-1 - step] <= 0:
        return 1.0
    return last / float(ring_gap[-1 - step])


def rho(spec: OperatorSpec, grid: Optional[DiskGrid] = None) -> BoundaryMeasure:
    """
    Grid sup of |phi|. The boundary flag follows the ring-by-ring trend of
    1 - max|phi| (linear decay to 0 when phi touches the circle); a sup above
    1 rejects the symbol.
    """
    grid = grid or DiskGrid()
    phi = spec.symbols.phi
    sup = grid_sup(lambda z, r, t: np.abs(phi.evaluate(z)), grid)
    if sup.value > 1.0 + SELF_MAP_SLACK:
        raise DomainError("phi is not a self-map of the disk",
                          {"sup_abs_phi": sup.value, "argmax": [sup.argmax.real, sup.argmax.imag]})
    ratio = ring_gap_ratio(np.maximum(1.0 - sup.ring_max, 0.0), grid.subdivisions)
    return BoundaryMeasure(sup.value, sup.argmax, bool(ratio < TOUCH_RATIO), ratio)


def _one_minus_abs2(values: np.ndarray) -> np.ndarray:
    mod = np.abs(values)
    return (1.0 - mod) * (1.0 + mod)


def boundedness_suprema(spec: OperatorSpec, w: Weight, grid: Optional[DiskGrid] = None,
                        source: Optional[SourceSpace] = None) -> Dict[str, Any]:
    """
    sup mu|E_i| per E term (necessary for boundedness) and, with a source
    space, sup mu|E_i| / (1-|phi|^2)^e_i (sufficient).
    """
    grid = grid or DiskGrid()
    phi = spec.symbols.phi
    terms: Dict[str, Any] = {}
    bounded = True
    for term in e_terms(spec):
        plain = grid_sup(lambda z, r, t, term=term: w.radial(r, t) * np.abs(term.evaluate(z)), grid)
        entry: Dict[str, Any] = {"order": term.order, "sup": plain.value,
                                 "argmax": [plain.argmax.real, plain.argmax.imag]}
        if source is not None:
            exponent = source.exponent(term.order)

            def weighted(z, r, t, term=term, exponent=exponent):
                mass = w.radial(r, t) * np.abs(term.evaluate(z))
                return np.where(mass > 0, mass / _one_minus_abs2(phi.evaluate(z)) ** exponent, 0.0)

            ws = grid_sup(weighted, grid)
            growing = bool(ws.ring_max[-1] > ws.ring_max[-2] * (1.0 + BOUNDARY_GROWTH_REL) and ws.ring_max[-1] >= ws.value)
            entry.update({"exponent": exponent, "weighted_sup": ws.value, "boundary_growth": growing})
            bounded = bounded and np.isfinite(ws.value) and ws.value < OVERFLOW_GUARD and not growing
        bounded = bounded and np.isfinite(plain.value) and plain.value < OVERFLOW_GUARD
        terms[term.label] = entry
    return {"terms": terms, "bounded": bool(bounded),
            "scale": max((t["sup"] for t in terms.values()), default=0.0)}


def check_self_map(spec: OperatorSpec, grid: Optional[DiskGrid] = None) -> BoundaryMeasure:
    return rho(spec, grid)


def preset_symbols(name: str, u: Optional[AnalyticFunction] = None,
                   phi: Optional[AnalyticFunction] = None) -> Tuple[AnalyticFunction, AnalyticFunction, AnalyticFunction]:
    """
    (psi1, psi2, phi) of the classical operators contained in T^0:
    composition C_phi, multiplication M_u, weighted composition uC_phi,
    differentiation D, C_phi D, uC_phi D, D C_phi and D M_u.
    """
    one, zero, ident = Polynomial.constant(1.0), Polynomial.constant(0.0), Polynomial.identity()
    u = u if u is not None else one
    phi = phi if phi is not None else ident
    table = {
        "composition": lambda: (one, zero, phi),
        "multiplication": lambda: (u, zero, ident),
        "weighted_composition": lambda: (u, zero, phi),
        "differentiation": lambda: (zero, one, ident),
        "composition_differentiation": lambda: (zero, one, phi),
        "weighted_composition_differentiation": lambda: (zero, u, phi),
        "differentiation_composition": lambda: (zero, phi.derivative(), phi),
        "differentiation_multiplication": lambda: (u.derivative(), u, ident),
    }
    if name not in table:
        raise ConfigError(f"unknown operator preset {name!r}", {"known": sorted(table)})
    return table[name]()
