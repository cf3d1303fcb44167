"""
Verification sweeps for Blochop
Test-function certificates, the derivative-decomposition oracle, A-quantity
calibration, interior-map nullity and the estimator sandwich on random symbols,
plus the norm-level checks: embedding, equivalent-norm band, rotation
invariance of Q_K, weight symmetry and normality, dilation monitoring
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import CertificationError, InconsistentEstimateError
from models.essnorm import a_quantity, dilation_gap, dilation_upper_bound, estimate
from models.funcalg import (
    AnalyticFunction, MobiusPowerSum, MobiusPowerTerm, Polynomial, PowerSeries, finite_difference_derivative,
)
from models.norms import (
    DiskGrid, bloch_alpha_equiv_norm, bloch_alpha_norm, embedding_check, embedding_constant, qk_inner_integral,
)
from models.operators import OperatorKind, OperatorSpec, SourceSpace, SymbolConfig, apply, derivative_decomposed
from models.testfn import (
    QK_KINDS, BoundarySequence, build_hinf_delta_family, build_l, build_qk_test, closed_form_check, verify_vanishing,
)
from models.weights import Kernel, SpaceParams, Weight, check_normal, weight_at
from .settings import WORKERS

logger = logging.getLogger(__name__)

# Tampered middle weight of the f family at gamma = 1, n = 0: -3 becomes -2.9
DEBUG_TAMPER = (1.0, 2.9 / 3.0, 1.0)

# Sandwich slack between the lower and the sum-form upper estimate
SANDWICH_SLACK = 1.05

# Largest admissible ratio between the equivalent alpha-Bloch norms
EQUIVALENCE_BAND = 10.0

# Relative agreement of the Q_K inner integral under a rotation of the disk
ROTATION_REL = 1e-6


def certificate_sweep(gammas: Sequence[float], ns: Sequence[int], sequence: BoundarySequence,
                      vanishing_tol: float = 1e-9, closed_form_tol: float = 1e-9,
                      coefficient_scale: Optional[Sequence[float]] = None,
                      workers: int = WORKERS) -> Dict[str, Any]:
    """Vanishing and closed-form certificates for every (kind, gamma, n, base point)"""
    cases = list(itertools.product(QK_KINDS, gammas, ns, sequence.points))

    def check(case) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        kind, gamma, n, z = case
        family = build_qk_test(kind, z, gamma, n, coefficient_scale)
        vanishing = verify_vanishing(family, vanishing_tol, strict=False)
        closed = closed_form_check(family, closed_form_tol)
        return vanishing.to_dict(), closed.to_dict()

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(check, cases))

    failures = [c for pair in results for c in pair if not c["ok"]]
    worst_vanishing = max(max(v["residuals"].values()) for v, _ in results)
    worst_closed = max(max(c["residuals"].values()) for _, c in results)
    logger.info(f"certificate sweep: {len(cases)} families, {len(failures)} failures")
    return {
        "families": len(cases),
        "vanishing_checks": 2 * len(cases),
        "closed_form_checks": len(cases),
        "worst_vanishing_residual": worst_vanishing,
        "worst_closed_form_error": worst_closed,
        "passed": not failures,
        "failures": failures,
    }


def delta_sweep(targets: Sequence[int], sequence: BoundarySequence) -> Dict[str, Any]:
    """Delta-family construction at every base point"""
    worst, conditions, failures = 0.0, [], []
    for a in sequence.points:
        try:
            family = build_hinf_delta_family(targets, a)
        except CertificationError as e:
            failures.append(e.to_dict())
            continue
        worst = max([worst] + [m.residual for m in family])
        conditions.append(family.condition)
    return {"points": len(sequence.points), "targets": list(targets), "worst_residual": worst,
            "max_condition": max(conditions, default=None), "passed": not failures, "failures": failures}


def _random_poly(rng: np.random.Generator, degree: int, total: float = 1.0) -> Polynomial:
    coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    return Polynomial(tuple(total * coeffs / np.sum(np.abs(coeffs))))


def _random_self_map(rng: np.random.Generator, boundary: bool) -> Polynomial:
    """Interior map with sum |c_k| < 1, or a rotated convex combination of z^k touching the circle"""
    degree = int(rng.integers(1, 4))
    if not boundary:
        return _random_poly(rng, degree, float(rng.uniform(0.3, 0.95)))
    weights = rng.dirichlet(np.ones(degree))
    rotation = np.exp(2j * np.pi * rng.uniform())
    return Polynomial(tuple([0.0] + list(rotation * weights)))


def _random_spec(rng: np.random.Generator, kind: OperatorKind, boundary: bool) -> OperatorSpec:
    psi1 = _random_poly(rng, int(rng.integers(0, 4)), float(rng.uniform(0.5, 2.0)))
    psi2 = _random_poly(rng, int(rng.integers(0, 4)), float(rng.uniform(0.5, 2.0)))
    phi = _random_self_map(rng, boundary)
    if kind is OperatorKind.TN:
        symbols = SymbolConfig(psi1, psi2, phi, int(rng.integers(0, 3)))
    else:
        n = int(rng.integers(1, 4))
        symbols = SymbolConfig(psi1, psi2, phi, n, int(rng.integers(0, n)))
    return OperatorSpec(kind, symbols)


def decomposition_oracle(count: int, seed: int, tol: float = 1e-6, radius: float = 0.9) -> Dict[str, Any]:
    """derivative_decomposed against a Cauchy-circle derivative of apply on random configs"""
    rng = np.random.default_rng(seed)
    worst, failures = 0.0, []
    for index in range(count):
        kind = OperatorKind.TN if index % 2 == 0 else OperatorKind.TMN
        spec = _random_spec(rng, kind, boundary=False)
        f = _random_poly(rng, 6, 4.0)
        z = complex(radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
        exact = complex(derivative_decomposed(spec, f, z))
        numeric = finite_difference_derivative(apply(spec, f).evaluate, 1, z)
        error = abs(exact - numeric) / max(abs(exact), 1e-8)
        worst = max(worst, error)
        if error > tol:
            failures.append({"index": index, "kind": kind.value, "z": [z.real, z.imag], "relative_error": error})
    return {"configs": count, "worst_relative_error": worst, "passed": not failures, "failures": failures}


def calibration_checks(grid: Optional[DiskGrid] = None, J: int = 21, gamma_exp: float = 1.0) -> Dict[str, Any]:
    """
    A(1, id, gamma_exp) under mu = (1-r^2)^alpha for alpha = gamma_exp and
    gamma_exp +/- 0.5: about 1, below 1e-2, and above 1e3 with a divergence flag
    """
    grid = grid or DiskGrid(M=42)
    one, ident = Polynomial.constant(1.0), Polynomial.identity()
    matched = a_quantity(one, ident, gamma_exp, Weight.alpha_weight(gamma_exp), grid, J, "matched")
    decaying = a_quantity(one, ident, gamma_exp, Weight.alpha_weight(gamma_exp + 0.5), grid, J, "decaying")
    growing = a_quantity(one, ident, gamma_exp, Weight.alpha_weight(gamma_exp - 0.5), grid, J, "growing")
    checks = {
        "matched": 0.95 <= matched.value <= 1.05,
        "decaying": decaying.value <= 1e-2,
        "growing": growing.value > 1e3 and growing.divergence,
    }
    return {
        "values": {"matched": matched.value, "decaying": decaying.value, "growing": growing.value},
        "trends": {"matched": matched.trend, "decaying": decaying.trend, "growing": growing.trend},
        "checks": checks,
        "passed": all(checks.values()),
    }


def interior_nullity(grid: Optional[DiskGrid] = None, J: int = 12) -> Dict[str, Any]:
    """phi = z/2 with polynomial psi's: every A-quantity is 0 and the verdict is compact"""
    grid = grid or DiskGrid()
    psi1, psi2, phi = Polynomial((1.0, 1.0)), Polynomial((0.0, 0.0, 1.0)), Polynomial((0.0, 0.5))
    w = Weight.alpha_weight(1.0)
    runs = {
        "Tn": estimate(OperatorSpec(OperatorKind.TN, SymbolConfig(psi1, psi2, phi, 1)),
                       SourceSpace.qk(SpaceParams(2.0, 0.0, Kernel.power(1.0))), w, grid, J),
        "Tmn": estimate(OperatorSpec(OperatorKind.TMN, SymbolConfig(psi1, psi2, phi, 2, 0)),
                        SourceSpace.hinf(), w, grid, J),
    }
    checks = {
        name: report.verdict == "compact" and all(
            est.empty_boundary and est.value == 0.0 for est in report.per_term.values())
        for name, report in runs.items()
    }
    return {"verdicts": {k: r.verdict for k, r in runs.items()}, "checks": checks, "passed": all(checks.values())}


def sandwich_check(count: int, seed: int, grid: Optional[DiskGrid] = None, J: int = 12) -> Dict[str, Any]:
    """lower <= 1.05 upper_sum on random symbols of both operator kinds"""
    rng = np.random.default_rng(seed + 1)
    grid = grid or DiskGrid()
    source_qk = SourceSpace.qk(SpaceParams(2.0, 0.0, Kernel.power(1.0)))
    failures, ratios = [], []
    for index in range(count):
        kind = OperatorKind.TN if index % 2 == 0 else OperatorKind.TMN
        spec = _random_spec(rng, kind, boundary=index % 4 < 2)
        w = Weight.alpha_weight(float(rng.uniform(1.0, 3.0)))
        source = source_qk if kind is OperatorKind.TN else SourceSpace.hinf()
        try:
            report = estimate(spec, source, w, grid, J, workers=1)
        except InconsistentEstimateError as e:
            failures.append({"index": index, **e.to_dict()})
            continue
        if report.upper_sum > 0:
            ratios.append(report.lower / report.upper_sum)
        if report.lower > SANDWICH_SLACK * report.upper_sum:
            failures.append({"index": index, "lower": report.lower, "upper_sum": report.upper_sum})
    return {"configs": count, "max_lower_over_upper": max(ratios, default=0.0),
            "passed": not failures, "failures": failures}


def norm_sample() -> List[AnalyticFunction]:
    """Twelve functions covering every representation, with boundary-heavy members"""
    geometric = PowerSeries(tuple(0.5 ** k for k in range(81)), 1.0 - 1e-9)
    exponential = PowerSeries(tuple(1.0 / math.factorial(k) for k in range(31)), 1.0 - 1e-9)
    return [
        Polynomial.identity(),
        Polynomial.monomial(2),
        Polynomial((1.0, 2.0, -1.0)),
        Polynomial((0.0, 1.0, 0.0, 1.0 / 3.0)),
        Polynomial((0.5, 0.0, 0.0, 0.0, 0.25)),
        MobiusPowerSum.single(1.0, 0.5, 1.0),
        MobiusPowerSum.single(0.5, 0.5j, 2.0),
        MobiusPowerSum.single(1.0, -0.4, 0.5),
        MobiusPowerSum((MobiusPowerTerm(1.0, 0.3, 1.0), MobiusPowerTerm(-0.5, -0.2, 2.0))),
        build_l(1, 0.5, 1.0),
        exponential,
        geometric,
    ]


def embedding_suite(params: Optional[SpaceParams] = None, grid: Optional[DiskGrid] = None,
                    xi_grid: Optional[DiskGrid] = None) -> Dict[str, Any]:
    """gamma-Bloch norm <= max(1, C_K) Q_K norm (5% slack) on the closed-form members of the sample"""
    params = params or SpaceParams(2.0, 0.0, Kernel.power(0.5))
    grid = grid or DiskGrid()
    xi_grid = xi_grid or DiskGrid(M=4)
    ratios, failures = [], []
    for index, f in enumerate(norm_sample()):
        if isinstance(f, PowerSeries):
            continue
        result = embedding_check(f, params, grid, xi_grid)
        ratios.append(result["ratio"])
        if not result["holds"]:
            failures.append({"index": index, "function": f.to_literal(), "ratio": result["ratio"],
                             "constant": result["constant"]})
    return {"functions": len(ratios), "constant": embedding_constant(params),
            "max_ratio": max(ratios, default=0.0), "passed": not failures, "failures": failures}


def equivalence_band(alphas: Sequence[float] = (0.5, 1.0, 2.0), ns: Sequence[int] = (1, 2),
                     grid: Optional[DiskGrid] = None, bound: float = EQUIVALENCE_BAND) -> Dict[str, Any]:
    """
    Ratio of |f(0)| + the derivative-order-n form to the standard alpha-Bloch
    norm; the band C is the largest of ratio and 1/ratio over the sample.
    """
    grid = grid or DiskGrid()
    band, failures = 1.0, []
    for alpha, n in itertools.product(alphas, ns):
        for index, f in enumerate(norm_sample()):
            plain = bloch_alpha_norm(f, alpha, grid, max_refinements=0).value
            equiv = abs(complex(f(0.0))) + bloch_alpha_equiv_norm(f, alpha, n, grid, max_refinements=0).value
            ratio = equiv / plain
            spread = max(ratio, 1.0 / ratio)
            band = max(band, spread)
            if spread > bound:
                failures.append({"alpha": alpha, "n": n, "index": index, "ratio": ratio})
    logger.info(f"equivalent-norm band C = {band:.4g}")
    return {"band": band, "bound": bound, "passed": not failures, "failures": failures}


def rotation_invariance(count: int, seed: int, params: Optional[SpaceParams] = None,
                        tol: float = ROTATION_REL) -> Dict[str, Any]:
    """qk_inner_integral(f, xi) against the rotated pair f(e^(i theta) z), e^(-i theta) xi"""
    params = params or SpaceParams(2.0, 0.0, Kernel.power(1.0))
    rng = np.random.default_rng(seed + 2)
    worst, failures = 0.0, []
    for index in range(count):
        if index % 2 == 0:
            f = _random_poly(rng, 4, 2.0)
        else:
            a = complex(0.5 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
            f = MobiusPowerSum.single(1.0, a, float(rng.uniform(0.5, 2.0)))
        xi = complex(0.5 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
        theta = float(2 * np.pi * rng.uniform())
        base = qk_inner_integral(f, params, xi)
        rotated = qk_inner_integral(f.rotate(theta), params, xi * np.exp(-1j * theta))
        error = abs(rotated - base) / max(abs(base), 1e-300)
        worst = max(worst, error)
        if error > tol:
            failures.append({"index": index, "theta": theta, "xi": [xi.real, xi.imag], "relative_error": error})
    return {"configs": count, "worst_relative_error": worst, "passed": not failures, "failures": failures}


def weight_properties(count: int, seed: int) -> Dict[str, Any]:
    """mu(z) = mu(|z|) exactly, and alpha weights normal for random 0 < a < alpha < b with delta = 0"""
    rng = np.random.default_rng(seed + 3)
    tabulated = Weight.tabulated([0.0, 0.5, 0.9, 0.99], [1.0, 0.8, 0.3, 0.05])
    symmetry_failures, normality_failures = [], []
    for index in range(count):
        alpha = float(rng.uniform(0.2, 3.0))
        z = complex(rng.uniform() * np.exp(2j * np.pi * rng.uniform()))
        for w in (Weight.alpha_weight(alpha), tabulated):
            if not math.isclose(weight_at(w, z), weight_at(w, abs(z)), rel_tol=1e-14, abs_tol=1e-300):
                symmetry_failures.append({"index": index, "weight": w.to_literal(), "z": [z.real, z.imag]})
        a = alpha * float(rng.uniform(0.05, 0.95))
        b = alpha * float(rng.uniform(1.05, 4.0))
        verdict = check_normal(Weight.alpha_weight(alpha), a, b, 0.0)
        if not verdict.ok:
            normality_failures.append({"alpha": alpha, "a": a, "b": b, **verdict.to_dict()})
    return {
        "configs": count,
        "radial_symmetry": not symmetry_failures,
        "alpha_normal": not normality_failures,
        "passed": not symmetry_failures and not normality_failures,
        "failures": symmetry_failures + normality_failures,
    }


def dilation_monitoring(grid: Optional[DiskGrid] = None,
                        r_schedule: Sequence[float] = (0.5, 0.9, 0.99, 1.0)) -> Dict[str, Any]:
    """
    On the compact configuration phi = z/2 the monitoring sequence is
    nonnegative, nonincreasing and 0 at r = 1; the pointwise gap at r = 0.999
    stays below 1e-3.
    """
    grid = grid or DiskGrid(M=12)
    half = Polynomial((0.0, 0.5))
    spec = OperatorSpec(OperatorKind.TMN, SymbolConfig(Polynomial.constant(1.0), Polynomial.identity(), half, 2, 0))
    sequence = dilation_upper_bound(spec, SourceSpace.hinf(), Weight.alpha_weight(1.0), r_schedule, grid)
    values = sequence.values
    gap_spec = OperatorSpec(OperatorKind.TN, SymbolConfig(Polynomial.constant(0.5), Polynomial.constant(0.25), half, 0))
    gap = dilation_gap(gap_spec, Polynomial.monomial(2), 0.999, grid=grid)
    checks = {
        "nonnegative": all(v >= 0.0 for v in values),
        "nonincreasing": all(b <= a for a, b in zip(values, values[1:])),
        "vanishes_at_one": r_schedule[-1] != 1.0 or values[-1] == 0.0,
        "pointwise_gap": gap <= 1e-3,
    }
    return {"sequence": sequence.to_dict(), "gap_at_0.999": gap, "checks": checks,
            "passed": all(checks.values())}
