"""
Analytic functions on the unit disk
Polynomials, sums of Mobius powers c(1 - conj(a) z)^(-beta) and truncated
power series, each with exact higher-order derivatives
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import poch

from functions.settings import MAX_DERIVATIVE_ORDER, SERIES_TAIL_TOL
from .errors import DomainError, RepresentationError

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, np.ndarray]

# Largest guard radius a dilated series may carry
RHO_CEILING = 1.0 - 1e-12

# Tolerance on |a| <= 1 for Mobius base points built from rounded data
BASE_POINT_SLACK = 1e-12


def _as_points(z: ComplexLike) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _restore(values: np.ndarray, like: ComplexLike) -> ComplexLike:
    """Return a python complex for scalar input, the array otherwise"""
    if np.ndim(like) == 0:
        return complex(values)
    return values


def _check_order(k: int) -> int:
    if int(k) != k or k < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {k}")
    if k > MAX_DERIVATIVE_ORDER:
        raise DomainError(
            f"derivative order {k} exceeds the configured maximum {MAX_DERIVATIVE_ORDER}",
            {"order": int(k), "max_order": MAX_DERIVATIVE_ORDER},
        )
    return int(k)


def _check_disk(z: np.ndarray) -> None:
    if z.size and np.max(np.abs(z)) >= 1.0:
        raise DomainError(
            "evaluation point outside the open unit disk",
            {"max_modulus": float(np.max(np.abs(z)))},
        )


class AnalyticFunction(ABC):
    """Common interface of the three disk-analytic representations"""

    kind = "abstract"

    def evaluate(self, z: ComplexLike) -> ComplexLike:
        return self.derivative_at(0, z)

    def __call__(self, z: ComplexLike) -> ComplexLike:
        return self.evaluate(z)

    def derivative_at(self, k: int, z: ComplexLike) -> ComplexLike:
        k = _check_order(k)
        points = _as_points(z)
        _check_disk(points)
        return _restore(self._derivative(k, points), z)

    @abstractmethod
    def _derivative(self, k: int, z: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def derivative(self) -> "AnalyticFunction":
        """Symbolic first derivative in the same representation"""

    @abstractmethod
    def dilate(self, r: float) -> "AnalyticFunction":
        """The function z -> f(r z)"""

    @abstractmethod
    def rotate(self, theta: float) -> "AnalyticFunction":
        """The function z -> f(e^(i theta) z)"""

    @abstractmethod
    def to_literal(self) -> Dict[str, Any]:
        ...

    def scale(self, c: complex) -> "AnalyticFunction":
        return linear_combine([c], [self])


@dataclass(frozen=True)
class Polynomial(AnalyticFunction):
    """Coefficients listed from degree 0 upward"""

    coeffs: Tuple[complex, ...]

    kind = "poly"

    def __post_init__(self):
        values = np.trim_zeros(np.asarray(self.coeffs, dtype=complex), 'b')
        if values.size == 0:
            values = np.zeros(1, dtype=complex)
        object.__setattr__(self, 'coeffs', tuple(complex(c) for c in values))

    @classmethod
    def constant(cls, c: complex) -> "Polynomial":
        return cls((c,))

    @classmethod
    def identity(cls) -> "Polynomial":
        return cls((0.0, 1.0))

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Polynomial":
        return cls(tuple([0.0] * k + [c]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _derivative(self, k: int, z: np.ndarray) -> np.ndarray:
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if k:
            coeffs = npoly.polyder(coeffs, k)
        return npoly.polyval(z, coeffs) * np.ones_like(z)

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(npoly.polyder(np.asarray(self.coeffs, dtype=complex))))

    def dilate(self, r: float) -> "Polynomial":
        if r == 1.0:
            return self
        powers = float(r) ** np.arange(len(self.coeffs))
        return Polynomial(tuple(np.asarray(self.coeffs) * powers))

    def rotate(self, theta: float) -> "Polynomial":
        phases = np.exp(1j * theta * np.arange(len(self.coeffs)))
        return Polynomial(tuple(np.asarray(self.coeffs) * phases))

    def to_literal(self) -> Dict[str, Any]:
        return {"poly": [_complex_literal(c) for c in self.coeffs]}


@dataclass(frozen=True)
class MobiusPowerTerm:
    """The map z -> c (1 - conj(a) z)^(-beta), principal branch"""

    c: complex
    a: complex
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"Mobius exponent must be positive, got beta={self.beta}")
        if abs(self.a) > 1.0 + BASE_POINT_SLACK:
            raise DomainError(f"Mobius base point must satisfy |a| <= 1, got |a|={abs(self.a)}")
        object.__setattr__(self, 'c', complex(self.c))
        object.__setattr__(self, 'a', complex(self.a))
        object.__setattr__(self, 'beta', float(self.beta))

    def coefficient(self, k: int) -> complex:
        """c (beta)_k conj(a)^k, the factor in front of the k-th derivative"""
        return self.c * poch(self.beta, k) * np.conj(self.a) ** k

    def derivative_term(self) -> "MobiusPowerTerm":
        return MobiusPowerTerm(self.c * self.beta * np.conj(self.a), self.a, self.beta + 1.0)

    def values(self, k: int, z: np.ndarray) -> np.ndarray:
        base = 1.0 - np.conj(self.a) * z
        if np.any(base == 0):
            raise DomainError("pole contact: evaluation at z = a for a unimodular base point",
                              {"a": _complex_literal(self.a)})
        return self.coefficient(k) * np.power(base, -self.beta - k)


@dataclass(frozen=True)
class MobiusPowerSum(AnalyticFunction):
    """Finite sum of Mobius power terms; like terms are merged on construction"""

    terms: Tuple[MobiusPowerTerm, ...]

    kind = "mobius"

    def __post_init__(self):
        merged: Dict[Tuple[complex, float], complex] = {}
        for term in self.terms:
            key = (term.a, term.beta)
            merged[key] = merged.get(key, 0j) + term.c
        kept = tuple(MobiusPowerTerm(c, a, beta) for (a, beta), c in merged.items() if c != 0)
        object.__setattr__(self, 'terms', kept)

    @classmethod
    def single(cls, c: complex, a: complex, beta: float) -> "MobiusPowerSum":
        return cls((MobiusPowerTerm(c, a, beta),))

    def _derivative(self, k: int, z: np.ndarray) -> np.ndarray:
        out = np.zeros(z.shape, dtype=complex)
        for term in self.terms:
            out = out + term.values(k, z)
        return out

    def derivative(self) -> "MobiusPowerSum":
        return MobiusPowerSum(tuple(t.derivative_term() for t in self.terms))

    def dilate(self, r: float) -> "MobiusPowerSum":
        if r == 1.0:
            return self
        return MobiusPowerSum(tuple(MobiusPowerTerm(t.c, float(r) * t.a, t.beta) for t in self.terms))

    def rotate(self, theta: float) -> "MobiusPowerSum":
        # 1 - conj(a) e^(i theta) z = 1 - conj(a e^(-i theta)) z
        phase = np.exp(-1j * theta)
        return MobiusPowerSum(tuple(MobiusPowerTerm(t.c, complex(t.a * phase), t.beta) for t in self.terms))

    def to_literal(self) -> Dict[str, Any]:
        return {"mobius": [
            {"c": _complex_literal(t.c), "a": _complex_literal(t.a), "beta": t.beta}
            for t in self.terms
        ]}


@dataclass(frozen=True)
class PowerSeries(AnalyticFunction):
    """Truncated Taylor series, evaluated only on |z| <= rho_max"""

    coeffs: Tuple[complex, ...]
    rho_max: float

    kind = "series"

    def __post_init__(self):
        if not 0.0 < self.rho_max < 1.0:
            raise DomainError(f"series guard radius must lie in (0, 1), got {self.rho_max}")
        if len(self.coeffs) == 0:
            raise DomainError("power series needs at least one coefficient")
        object.__setattr__(self, 'coeffs', tuple(complex(c) for c in self.coeffs))
        object.__setattr__(self, 'rho_max', float(self.rho_max))

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def tail_bound(self, k: int, rho: float) -> float:
        """
        Estimate of the k-th derivative of the discarded tail on |z| <= rho.
        The tail coefficients are modelled by the geometric envelope of the
        last quarter of the kept coefficients.
        """
        if rho == 0.0:
            return 0.0
        mags = np.abs(np.asarray(self.coeffs))
        n = self.truncation
        width = max(2, (n + 1) // 4)
        window = np.arange(max(0, n + 1 - width), n + 1)
        live = window[mags[window] > 0]
        # a zero last coefficient marks an exactly truncated (polynomial) series
        if live.size == 0 or mags[n] == 0:
            return 0.0
        log_ratio = 0.0
        if live.size > 1:
            log_ratio = min(0.0, (math.log(mags[n]) - math.log(mags[live[0]])) / (n - live[0]))
        log_envelope = float(np.max(np.log(mags[live]) - live * log_ratio))
        log_x = log_ratio + math.log(rho)
        # envelope too flat to sum within the cap: treat the tail as uncontrolled
        if log_x >= 0.0 or -log_x * 200000 < 40.0:
            return math.inf
        length = int(min(200000, max(2000, (k + 1) * 80.0 / -log_x)))
        j = np.arange(n + 1, n + 1 + length, dtype=float)
        logs = log_envelope + j * log_x - k * math.log(rho) + np.log(poch(j - k + 1.0, k))
        return float(np.sum(np.exp(logs)))

    def _derivative(self, k: int, z: np.ndarray) -> np.ndarray:
        radius = float(np.max(np.abs(z))) if z.size else 0.0
        if radius > self.rho_max * (1.0 + 1e-15):
            raise DomainError(
                "evaluation point outside the series guard radius",
                {"max_modulus": radius, "rho_max": self.rho_max},
            )
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if k:
            coeffs = npoly.polyder(coeffs, k)
        values = npoly.polyval(z, coeffs) * np.ones_like(z)
        tail = self.tail_bound(k, radius)
        scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
        if tail > SERIES_TAIL_TOL * scale:
            raise DomainError(
                "series tail bound exceeds tolerance",
                {"order": k, "radius": radius, "tail_bound": tail, "tolerance": SERIES_TAIL_TOL},
            )
        return values

    def derivative(self) -> "PowerSeries":
        return PowerSeries(tuple(npoly.polyder(np.asarray(self.coeffs, dtype=complex))), self.rho_max)

    def dilate(self, r: float) -> "PowerSeries":
        if r == 1.0:
            return self
        powers = float(r) ** np.arange(len(self.coeffs))
        return PowerSeries(tuple(np.asarray(self.coeffs) * powers), min(self.rho_max / r, RHO_CEILING))

    def rotate(self, theta: float) -> "PowerSeries":
        phases = np.exp(1j * theta * np.arange(len(self.coeffs)))
        return PowerSeries(tuple(np.asarray(self.coeffs) * phases), self.rho_max)

    def to_literal(self) -> Dict[str, Any]:
        return {"series": {"coeffs": [_complex_literal(c) for c in self.coeffs],
                           "rho_max": self.rho_max}}


def evaluate(f: AnalyticFunction, z: ComplexLike) -> ComplexLike:
    return f.evaluate(z)


def eval_derivative(f: AnalyticFunction, k: int, z: ComplexLike) -> ComplexLike:
    return f.derivative_at(k, z)


def _padded_sum(coeffs: Sequence[complex], arrays: Sequence[Tuple[complex, ...]]) -> np.ndarray:
    size = max(len(a) for a in arrays)
    total = np.zeros(size, dtype=complex)
    for c, a in zip(coeffs, arrays):
        total[:len(a)] += complex(c) * np.asarray(a, dtype=complex)
    return total


def linear_combine(coeffs: Sequence[complex], fs: Sequence[AnalyticFunction]) -> AnalyticFunction:
    """Pointwise sum of c_i f_i in a common representation"""
    if len(fs) == 0:
        raise RepresentationError("linear_combine needs at least one function")
    if len(coeffs) != len(fs):
        raise RepresentationError(
            f"got {len(coeffs)} coefficients for {len(fs)} functions")

    kinds = {f.kind for f in fs}
    if kinds == {"poly"}:
        return Polynomial(tuple(_padded_sum(coeffs, [f.coeffs for f in fs])))

    if kinds <= {"poly", "series"}:
        rho = min(f.rho_max for f in fs if isinstance(f, PowerSeries))
        return PowerSeries(tuple(_padded_sum(coeffs, [f.coeffs for f in fs])), rho)

    if kinds <= {"poly", "mobius"}:
        terms: List[MobiusPowerTerm] = []
        for c, f in zip(coeffs, fs):
            if isinstance(f, Polynomial):
                if f.degree > 0:
                    raise RepresentationError(
                        "a non-constant polynomial cannot be combined with Mobius terms")
                # constants are Mobius terms based at the origin
                terms.append(MobiusPowerTerm(complex(c) * f.coeffs[0], 0.0, 1.0))
                continue
            terms.extend(MobiusPowerTerm(complex(c) * t.c, t.a, t.beta) for t in f.terms)
        return MobiusPowerSum(tuple(terms))

    raise RepresentationError(f"incompatible representations: {sorted(kinds)}")


def finite_difference_derivative(
    f: Union[AnalyticFunction, Callable[[np.ndarray], np.ndarray]],
    k: int,
    z: complex,
    h: Optional[float] = None,
    nodes: int = 32,
) -> complex:
    """
    k-th derivative from samples on the circle |w - z| = h.

    Centered complex stencil: the trapezoid rule applied to the Cauchy
    integral, spectrally accurate while the circle stays inside the disk.
    """
    z = complex(z)
    if h is None:
        h = min(0.05, 0.5 * (1.0 - abs(z)))
    if h <= 0 or abs(z) + h >= 1.0:
        raise DomainError("finite-difference stencil leaves the unit disk",
                          {"z": _complex_literal(z), "h": h})
    if nodes <= k:
        raise DomainError(f"stencil needs more than {k} nodes, got {nodes}")

    roots = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    sample = f.evaluate if isinstance(f, AnalyticFunction) else f
    values = np.asarray(sample(z + h * roots), dtype=complex)
    return complex(math.factorial(k) * np.sum(values * roots ** (-k)) / (nodes * h ** k))


def _complex_literal(c: complex) -> Union[float, List[float]]:
    c = complex(c)
    if c.imag == 0.0:
        return c.real
    return [c.real, c.imag]


def parse_complex(value: Union[float, int, Sequence[float]]) -> complex:
    """Config numbers are either real or an [re, im] pair"""
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise RepresentationError(f"not a complex literal: {value!r}")


def from_literal(literal: Dict[str, Any]) -> AnalyticFunction:
    """Build a function from its config literal (poly, mobius or series)"""
    if not isinstance(literal, dict) or len(literal) != 1:
        raise RepresentationError(f"function literal must have exactly one key, got {literal!r}")
    (kind, body), = literal.items()
    if kind == "poly":
        return Polynomial(tuple(parse_complex(c) for c in body))
    if kind == "mobius":
        return MobiusPowerSum(tuple(
            MobiusPowerTerm(parse_complex(t["c"]), parse_complex(t["a"]), float(t["beta"]))
            for t in body
        ))
    if kind == "series":
        return PowerSeries(tuple(parse_complex(c) for c in body["coeffs"]), float(body["rho_max"]))
    raise RepresentationError(f"unknown function kind {kind!r}")
