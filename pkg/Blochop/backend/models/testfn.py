"""
Test-function families
Q_K families f, g, h built from l_1, l_2, l_3; the H^inf families f_{i,a};
an explicit Kronecker-delta family for H^inf; the extremal growth function
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, poch

from .errors import CertificationError, DomainError
from .funcalg import AnalyticFunction, MobiusPowerSum, MobiusPowerTerm, PowerSeries, linear_combine

logger = logging.getLogger(__name__)

VANISHING_TOL = 1e-9
CLOSED_FORM_TOL = 1e-9
DELTA_TOL = 1e-8

# Delta-family solver: condition limit and exponent shifts tried in turn
MAX_CONDITION = 1e12
EXPONENT_SHIFTS = (0.0, 0.5, 1.0, 1.5, 2.0)

QK_KINDS = ("f", "g", "h")


@dataclass(frozen=True)
class BoundarySequence:
    """Points on rays at increasing moduli; angles are fractions of a full turn"""

    moduli: Tuple[float, ...] = (0.9, 0.99, 0.999, 0.9999)
    rays: Tuple[float, ...] = (0.0, 1.0 / 3.0, 2.0 / 3.0)

    def __post_init__(self):
        mods = np.asarray(self.moduli, dtype=float)
        if mods.size == 0 or np.any(np.diff(mods) <= 0) or mods[0] < 0 or mods[-1] >= 1:
            raise DomainError("boundary moduli must increase strictly inside [0, 1)",
                              {"moduli": list(self.moduli)})

    @property
    def points(self) -> List[complex]:
        return [complex(r * np.exp(2j * np.pi * ray)) for ray in self.rays for r in self.moduli]


def _one_minus_abs2(z: complex) -> float:
    # matches the real part of 1 - conj(z) z as computed inside MobiusPowerTerm
    return 1.0 - (z.real * z.real + z.imag * z.imag)


def build_l(i: int, z_k: complex, gamma: float) -> MobiusPowerSum:
    """l_i(z) = (1-|z_k|^2)^i / (1 - conj(z_k) z)^(gamma+i-1)"""
    if i not in (1, 2, 3):
        raise DomainError(f"l_i is defined for i in 1..3, got {i}")
    z_k = complex(z_k)
    if abs(z_k) >= 1.0:
        raise DomainError(f"base point must lie inside the disk, got |z_k|={abs(z_k)}")
    beta = gamma + i - 1
    if not beta > 0:
        raise DomainError(f"exponent gamma + i - 1 must be positive, got {beta}")
    return MobiusPowerSum.single(_one_minus_abs2(z_k) ** i, z_k, beta)


def _products(gamma: float, n: int) -> Dict[str, float]:
    j = np.arange(n, dtype=float)
    return {
        "P1": float(np.prod((gamma + j + 1) * (gamma + j + 2))),
        "P2": float(np.prod((gamma + j) * (gamma + j + 2))),
        "P3": float(np.prod((gamma + j) * (gamma + j + 1))),
        "Q": float(np.prod((gamma + j) * (gamma + j + 1) * (gamma + j + 2))),
    }


def qk_coefficients(kind: str, gamma: float, n: int) -> Tuple[float, float, float]:
    """Weights of l_1, l_2, l_3 in the f, g or h family"""
    p = _products(gamma, n)
    G = gamma + n
    if kind == "f":
        return ((G + 2) / G * p["P1"], -2 * (G + 2) / (G + 1) * p["P2"], p["P3"])
    if kind == "g":
        return ((G + 2) / (G + 1) * p["P1"], -(2 * G + 3) / (G + 1) * p["P2"], p["P3"])
    if kind == "h":
        return (p["P1"], -2 * p["P2"], p["P3"])
    raise DomainError(f"unknown Q_K family kind {kind!r}")


@dataclass(frozen=True)
class QkTestFamily:
    kind: str
    gamma: float
    n: int
    base: complex
    coefficients: Tuple[float, float, float]
    function: MobiusPowerSum
    basis: Tuple[MobiusPowerSum, ...]

    @property
    def nonvanishing_order(self) -> int:
        return self.n + QK_KINDS.index(self.kind)

    @property
    def vanishing_orders(self) -> Tuple[int, int]:
        return tuple(self.n + s for s in range(3) if s != QK_KINDS.index(self.kind))

    @property
    def closed_form_constant(self) -> float:
        """Constant c in f^(o)(z_k) = c conj(z_k)^o (1-|z_k|^2)^(1-gamma-o)"""
        Q = _products(self.gamma, self.n)["Q"]
        G = self.gamma + self.n
        return {"f": 2 * Q / (G * (G + 1)), "g": -Q / (G + 1), "h": 2 * Q}[self.kind]

    def evaluate(self, z):
        return self.function.evaluate(z)

    def derivative_at(self, k: int, z):
        return self.function.derivative_at(k, z)


def build_qk_test(kind: str, z_k: complex, gamma: float, n: int,
                  coefficient_scale: Optional[Sequence[float]] = None) -> QkTestFamily:
    """
    f, g or h family at base point z_k. coefficient_scale multiplies the
    three weights and exists to inject faults into the certificate sweep.
    """
    if n < 0:
        raise DomainError(f"order n must be non-negative, got {n}")
    basis = tuple(build_l(i, z_k, gamma) for i in (1, 2, 3))
    coefficients = qk_coefficients(kind, gamma, n)
    if coefficient_scale is not None:
        coefficients = tuple(c * s for c, s in zip(coefficients, coefficient_scale))
    function = linear_combine(list(coefficients), list(basis))
    return QkTestFamily(kind, float(gamma), int(n), complex(z_k), coefficients, function, basis)


@dataclass
class Certificate:
    name: str
    ok: bool
    residuals: Dict[str, float] = field(default_factory=dict)
    scales: Dict[str, float] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def require(self) -> "Certificate":
        if not self.ok:
            raise CertificationError(f"certificate {self.name} failed", self.to_dict())
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "ok": self.ok, "residuals": self.residuals,
                "scales": self.scales, **self.details}


def _family_name(family: QkTestFamily) -> str:
    z = family.base
    return f"{family.kind}[gamma={family.gamma:g},n={family.n},z=({z.real:.6g},{z.imag:.6g})]"


def _largest_term(family: QkTestFamily, order: int) -> float:
    z = np.asarray(family.base, dtype=complex)
    return max(abs(c * complex(l.terms[0].values(order, z))) if l.terms else 0.0
               for c, l in zip(family.coefficients, family.basis))


def verify_vanishing(family: QkTestFamily, tol: float = VANISHING_TOL,
                     strict: bool = True) -> Certificate:
    """The two orders that must vanish at z_k, relative to the largest single term"""
    residuals, scales = {}, {}
    ok = True
    for order in family.vanishing_orders:
        value = abs(family.derivative_at(order, family.base))
        scale = _largest_term(family, order)
        residuals[str(order)] = value / scale if scale > 0 else value
        scales[str(order)] = scale
        ok = ok and value <= tol * scale
    cert = Certificate(f"vanishing:{_family_name(family)}", bool(ok), residuals, scales)
    if strict:
        cert.require()
    return cert


def closed_form_check(family: QkTestFamily, tol: float = CLOSED_FORM_TOL) -> Certificate:
    """Closed form of the nonvanishing derivative against exact differentiation"""
    order = family.nonvanishing_order
    z = family.base
    expected = (family.closed_form_constant * np.conj(z) ** order
                * _one_minus_abs2(z) ** (1.0 - family.gamma - order))
    computed = complex(family.derivative_at(order, z))
    scale = max(abs(expected), abs(computed))
    error = abs(computed - expected) / scale if scale > 0 else 0.0
    return Certificate(
        f"closed_form:{_family_name(family)}", bool(error <= tol),
        {str(order): error}, {str(order): scale},
        {"closed_form": [expected.real, expected.imag], "computed": [computed.real, computed.imag]},
    )


def closed_form_value(family: QkTestFamily, tol: float = CLOSED_FORM_TOL) -> complex:
    cert = closed_form_check(family, tol)
    cert.require()
    re, im = cert.details["closed_form"]
    return complex(re, im)


@dataclass(frozen=True)
class HinfTestFamily:
    i: int
    a: complex
    function: MobiusPowerSum

    def evaluate(self, z):
        return self.function.evaluate(z)

    def derivative_at(self, k: int, z):
        return self.function.derivative_at(k, z)


def build_hinf_test(i: int, a: complex) -> HinfTestFamily:
    """f_{i,a}(z) = ((1-|a|) / (1 - conj(a) z))^i"""
    a = complex(a)
    if i < 1:
        raise DomainError(f"H^inf family index must be >= 1, got {i}")
    if abs(a) >= 1.0:
        raise DomainError(f"base point must lie inside the disk, got |a|={abs(a)}")
    return HinfTestFamily(i, a, MobiusPowerSum.single((1.0 - abs(a)) ** i, a, float(i)))


@dataclass
class DeltaFunction:
    """g with g^(j)(a) = delta_ij conj(a)^j / (1-|a|^2)^j on the target orders"""

    order: int
    function: MobiusPowerSum
    coefficients: Tuple[float, ...]
    residual: float
    bound: float

    def evaluate(self, z):
        return self.function.evaluate(z)

    def derivative_at(self, k: int, z):
        return self.function.derivative_at(k, z)


@dataclass
class DeltaFamily:
    targets: Tuple[int, ...]
    a: complex
    exponents: Tuple[float, ...]
    condition: float
    members: Dict[int, DeltaFunction]

    def __getitem__(self, order: int) -> DeltaFunction:
        return self.members[order]

    def __iter__(self):
        return iter(self.members[i] for i in self.targets)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "targets": list(self.targets), "a": [self.a.real, self.a.imag],
            "exponents": list(self.exponents), "condition": self.condition,
            "residuals": {str(i): m.residual for i, m in self.members.items()},
            "bounds": {str(i): m.bound for i, m in self.members.items()},
        }


def _delta_system(targets: Sequence[int]) -> Tuple[np.ndarray, np.ndarray, float]:
    size = len(targets)
    for shift in EXPONENT_SHIFTS:
        exponents = shift + np.arange(1, size + 1, dtype=float)
        matrix = poch(exponents[None, :], np.asarray(targets, dtype=float)[:, None])
        condition = float(np.linalg.cond(matrix))
        if condition <= MAX_CONDITION:
            return exponents, matrix, condition
        logger.warning(f"delta system ill-conditioned (cond {condition:.3g}); shifting exponents by 0.5")
    raise CertificationError("delta-family system stays ill-conditioned",
                             {"targets": list(targets), "condition": condition})


def build_hinf_delta_family(targets: Sequence[int], a: complex, tol: float = DELTA_TOL) -> DeltaFamily:
    """
    Realize g_i, i in targets, as combinations of ((1-|a|^2)/(1-conj(a) z))^beta_t.

    Since the j-th derivative of each basis function at a is
    (beta_t)_j conj(a)^j / (1-|a|^2)^j, the weights solve
    sum_t c_t (beta_t)_j = delta_ij independently of a.
    """
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets) or min(targets) < 0:
        raise DomainError(f"delta targets must be distinct non-negative orders, got {targets}")
    a = complex(a)
    if abs(a) >= 1.0:
        raise DomainError(f"base point must lie inside the disk, got |a|={abs(a)}")

    exponents, matrix, condition = _delta_system(targets)
    weights = np.linalg.solve(matrix, np.eye(len(targets)))
    s = _one_minus_abs2(a)
    basis = [MobiusPowerTerm(s ** beta, a, beta) for beta in exponents]
    point = np.asarray(a, dtype=complex)

    members: Dict[int, DeltaFunction] = {}
    for col, i in enumerate(targets):
        column = weights[:, col]
        function = MobiusPowerSum(tuple(MobiusPowerTerm(c * b.c, a, b.beta) for c, b in zip(column, basis)))
        worst = 0.0
        for j in targets:
            expected = (np.conj(a) ** j / s ** j) if j == i else 0.0
            computed = complex(function.derivative_at(j, a))
            scale = max(abs(expected),
                        max(abs(c * complex(b.values(j, point))) for c, b in zip(column, basis)))
            residual = abs(computed - expected) / scale if scale > 0 else abs(computed - expected)
            worst = max(worst, residual)
        if worst > tol:
            raise CertificationError(
                f"delta function for order {i} misses its derivative pattern",
                {"order": i, "residual": worst, "a": [a.real, a.imag], "condition": condition})
        bound = float(np.sum(np.abs(column) * 2.0 ** exponents))
        members[i] = DeltaFunction(i, function, tuple(float(c) for c in column), worst, bound)

    logger.debug(f"delta family {targets} at {a}: cond {condition:.3g}")
    return DeltaFamily(targets, a, tuple(float(b) for b in exponents), condition, members)


def extremal_growth(gamma: float, rho_max: float = 0.9, terms: int = 600) -> AnalyticFunction:
    """
    h with h'(z) = (1 - z)^(-gamma) and h(0) = 0, the extremal growth in the
    gamma-Bloch space. Exact Mobius form for gamma > 1, a power series
    guarded at rho_max otherwise.
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if gamma > 1:
        c = 1.0 / (gamma - 1.0)
        return MobiusPowerSum((MobiusPowerTerm(c, 1.0, gamma - 1.0), MobiusPowerTerm(-c, 0.0, 1.0)))
    k = np.arange(terms, dtype=float)
    # coefficient of z^(k+1) is (gamma)_k / (k+1)!
    coeffs = np.exp(gammaln(gamma + k) - gammaln(gamma) - gammaln(k + 2.0))
    return PowerSeries(tuple(np.concatenate([[0.0], coeffs])), rho_max)
