"""
Essential-norm estimators
Boundary limsup (A-quantity) sequences, the Q_K -> B_mu and H^inf -> B_mu
estimators, compactness verdicts and the dilation monitoring sequence
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from functions.settings import COMPACT_TOL, GRID_M_CAP, LEVELS_J, WORKERS
from .errors import ConfigError, DomainError, InconsistentEstimateError, PairingError
from .funcalg import AnalyticFunction, Polynomial
from .norms import DiskGrid, bloch_mu_norm, hinf_norm, qk_norm
from .operators import (
    SELF_MAP_SLACK, TOUCH_RATIO, AppliedOperator, ETerm, OperatorDifference, OperatorKind, OperatorSpec,
    SourceSpace, boundedness_suprema, derivative_decomposed, e_terms, rho, ring_gap_ratio,
)
from .testfn import build_hinf_delta_family, build_hinf_test, build_qk_test
from .weights import SpaceParams, Weight

logger = logging.getLogger(__name__)

# Relative slack when deciding whether 1 - |phi| reaches a level
LEVEL_SLACK = 1e-9

# Band-to-band change regarded as stable, and per-step growth regarded as divergent
STABLE_REL = 0.05
GROWTH_REL = 0.05

# non_compact needs lower >= NON_COMPACT_FACTOR * tol
NON_COMPACT_FACTOR = 10.0

# Boundary levels on which the H^inf test-family norms are evaluated
FAMILY_TAIL = 3

VERDICTS = ("compact", "non_compact", "inconclusive", "unbounded")


@dataclass
class LimsupEstimate:
    """
    Per-level boundary suprema of mu|u| / (1-|phi|^2)^exponent.

    nested[j] is the sup over 1 - |phi| <= eps_j, band[j] the sup over
    eps_(j+1) < 1 - |phi| <= eps_j; empty levels hold nan. boundary_points[j]
    is the point of the band where |phi| is largest, band_argmax[j] the band
    maximizer of the quotient.
    """

    label: str
    exponent: float
    value: float
    eps: Tuple[float, ...]
    nested: Tuple[float, ...]
    band: Tuple[float, ...]
    argmax: Tuple[Optional[complex], ...]
    trend: str
    empty_boundary: bool = False
    divergence: bool = False
    boundary_points: Tuple[Optional[complex], ...] = ()
    band_argmax: Tuple[Optional[complex], ...] = ()
    unreached_levels: int = 0
    grid_M: int = 0

    @property
    def stabilized(self) -> bool:
        return self.trend == "stable"

    @property
    def deepest_level(self) -> Optional[int]:
        """Index of the deepest populated nested level"""
        populated = [j for j, v in enumerate(self.nested) if not math.isnan(v)]
        return populated[-1] if populated else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "exponent": self.exponent,
            "value": _finite_or_none(self.value),
            "trend": self.trend,
            "stabilized": self.stabilized,
            "empty_boundary": self.empty_boundary,
            "divergence": self.divergence,
            "unreached_levels": self.unreached_levels,
            "grid_M": self.grid_M,
            "levels": [
                {"level": j + 1, "eps": self.eps[j], "nested_sup": _finite_or_none(self.nested[j]),
                 "band_sup": _finite_or_none(self.band[j]),
                 "argmax": _point(self.argmax[j]),
                 "boundary_point": _point(self.boundary_points[j]) if self.boundary_points else None}
                for j in range(len(self.eps))
            ],
        }

    def csv_rows(self) -> List[List[Any]]:
        rows = []
        for j, eps in enumerate(self.eps):
            arg = self.argmax[j]
            rows.append([self.label, j + 1, eps, _finite_or_none(self.nested[j]),
                         _finite_or_none(self.band[j]),
                         None if arg is None else arg.real, None if arg is None else arg.imag])
        return rows


def _point(z: Optional[complex]) -> Optional[List[float]]:
    return None if z is None else [z.real, z.imag]


def _finite_or_none(x: float) -> Optional[float]:
    if x is None or math.isnan(x):
        return None
    return float(x) if math.isfinite(x) else "inf"


def _clip_levels(J: int, grid: DiskGrid) -> int:
    if J < 1:
        raise ConfigError(f"level count J must be at least 1, got {J}")
    limit = max(1, grid.M // 2)
    if J > limit:
        logger.warning(f"level count J={J} exceeds grid depth; clipping to {limit}")
        return limit
    return J


def _trend(band: Sequence[float]) -> str:
    tail = list(band[-3:])
    if len(tail) < 2 or any(math.isnan(b) for b in tail[-2:]):
        return "indeterminate"
    if len(tail) == 3 and not math.isnan(tail[0]) \
            and tail[1] > tail[0] * (1 + GROWTH_REL) and tail[2] > tail[1] * (1 + GROWTH_REL):
        return "diverging"
    last, prev = tail[-1], tail[-2]
    if not math.isfinite(last):
        return "diverging"
    if abs(last - prev) <= STABLE_REL * last:
        return "stable"
    return "increasing" if last > prev else "decreasing"


@dataclass
class BoundaryGrid:
    """A grid deep enough for the boundary levels of phi, with |phi| on its points"""

    grid: DiskGrid
    phi_abs: np.ndarray
    touching: bool
    gap_ratio: float


def _phi_on_grid(phi: AnalyticFunction, grid: DiskGrid) -> Tuple[np.ndarray, np.ndarray]:
    phi_abs = np.abs(np.asarray(phi.evaluate(grid.points)))
    if np.any(phi_abs > 1.0 + SELF_MAP_SLACK):
        raise DomainError("phi is not a self-map of the disk", {"sup_abs_phi": float(phi_abs.max())})
    ring_max = np.full(grid.ring_count, -np.inf)
    np.maximum.at(ring_max, grid.rings, phi_abs)
    return phi_abs, np.maximum(1.0 - ring_max, 0.0)


def boundary_grid(phi: AnalyticFunction, grid: Optional[DiskGrid] = None, J: int = LEVELS_J) -> BoundaryGrid:
    """
    Deepen the grid until some point has 1 - |phi| <= eps_J, as long as phi
    touches the circle and the ring count stays within GRID_M_CAP. The
    number of extra rings comes from the outer-ring slope of 1 - |phi|.
    """
    grid = grid or DiskGrid()
    target = 2.0 ** -J * (1.0 + LEVEL_SLACK)
    cap = max(GRID_M_CAP, grid.M)
    while True:
        phi_abs, ring_gap = _phi_on_grid(phi, grid)
        ratio = ring_gap_ratio(ring_gap, grid.subdivisions)
        touching = ratio < TOUCH_RATIO
        deepest = float(ring_gap[-1])
        if not touching or deepest <= target or grid.M >= cap:
            return BoundaryGrid(grid, phi_abs, touching, ratio)
        slope = deepest / grid.depth
        wanted = int(math.ceil(2.0 * math.log2(slope / target))) + 2
        deeper = min(max(wanted, grid.M + 2), cap)
        logger.info(f"phi stays above eps_J={target:.3g} on M={grid.M} (slope {slope:.4g}); deepening to M={deeper}")
        grid = DiskGrid(deeper, grid.subdivisions, grid.angle_cap)


def a_quantity(u, phi: AnalyticFunction, gamma_exp: float, w: Weight,
               grid: Optional[DiskGrid] = None, J: int = LEVELS_J, label: str = "A") -> LimsupEstimate:
    """
    limsup of mu(z)|u(z)| / (1-|phi(z)|^2)^gamma_exp as |phi(z)| -> 1, level by level.

    The boundary set is empty when no point reaches 1 - |phi| <= eps_1 or
    when sup |phi| < 1. Levels the deepened grid still cannot reach are
    counted in unreached_levels and the value is the deepest populated sup.
    """
    grid = grid or DiskGrid()
    J = _clip_levels(J, grid)
    eps = 2.0 ** -np.arange(1, J + 2, dtype=float)
    reach = eps * (1.0 + LEVEL_SLACK)

    bg = boundary_grid(phi, grid, J)
    grid, phi_abs = bg.grid, bg.phi_abs
    gap = np.maximum(1.0 - phi_abs, 0.0)

    keep = gap <= reach[0]
    if not bg.touching or not np.any(keep):
        logger.debug(f"{label}: sup |phi| < 1 (gap ratio {bg.gap_ratio:.3g}); boundary set empty")
        nan, none = (math.nan,) * J, (None,) * J
        return LimsupEstimate(label, float(gamma_exp), 0.0, tuple(eps[:J]), nan, nan, none, "empty",
                              empty_boundary=True, boundary_points=none, band_argmax=none,
                              grid_M=grid.M)

    z = grid.points[keep]
    r, t, g = grid.radii[keep], grid.one_minus_r[keep], gap[keep]
    mass = w.radial(r, t) * np.abs(np.asarray(u(z)))
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        values = np.where(mass > 0, mass / (g * (1.0 + phi_abs[keep])) ** gamma_exp, 0.0)

    nested, band, argmax, points, band_arg = [], [], [], [], []
    for j in range(J):
        inside = g <= reach[j]
        if np.any(inside):
            idx = np.flatnonzero(inside)
            best = idx[int(np.argmax(values[idx]))]
            nested.append(float(values[best]))
            argmax.append(complex(z[best]))
        else:
            nested.append(math.nan)
            argmax.append(None)
        ring = inside & (g > reach[j + 1])
        if np.any(ring):
            idx = np.flatnonzero(ring)
            band.append(float(values[idx].max()))
            band_arg.append(complex(z[idx[int(np.argmax(values[idx]))]]))
            points.append(complex(z[idx[int(np.argmin(g[idx]))]]))
        else:
            band.append(math.nan)
            band_arg.append(None)
            points.append(None)
        logger.debug(f"{label} level {j + 1}: nested {nested[-1]:.6g}, band {band[-1]:.6g}")

    populated = [j for j in range(J) if not math.isnan(nested[j])]
    deepest = populated[-1]
    unreached = J - 1 - deepest
    if unreached:
        logger.warning(f"{label}: {unreached} deepest level(s) not reached on M={grid.M}; "
                       f"using level {deepest + 1}")
    trend = _trend(band[:deepest + 1])
    value = nested[deepest]
    divergence = trend == "diverging" or not math.isfinite(value)
    if divergence:
        logger.warning(f"{label}: boundary sequence diverging (deepest sup {value:.6g})")
    return LimsupEstimate(label, float(gamma_exp), value, tuple(eps[:J]), tuple(nested), tuple(band),
                          tuple(argmax), trend, divergence=divergence, boundary_points=tuple(points),
                          band_argmax=tuple(band_arg), unreached_levels=unreached, grid_M=grid.M)


@dataclass
class EstimateReport:
    lower: float
    upper_max: float
    upper_sum: float
    per_term: Dict[str, LimsupEstimate]
    verdict: str
    tol: float
    bounded: bool = True
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        levels = next(iter(self.per_term.values())).eps if self.per_term else ()
        return {
            "lower": _finite_or_none(self.lower),
            "upper_max": _finite_or_none(self.upper_max),
            "upper_sum": _finite_or_none(self.upper_sum),
            "terms": {label: est.to_dict() for label, est in self.per_term.items()},
            "verdict": self.verdict,
            "tol": self.tol,
            "bounded": self.bounded,
            "levels": list(levels),
            "diagnostics": self.diagnostics,
        }

    def csv_rows(self) -> List[List[Any]]:
        return [row for est in self.per_term.values() for row in est.csv_rows()]


def compactness_verdict(report: EstimateReport, tol: Optional[float] = None) -> str:
    """compact iff upper_sum <= tol, non_compact iff lower >= 10 tol, else inconclusive"""
    tol = report.tol if tol is None else tol
    slack = max(tol, 1e-9)
    if report.lower > report.upper_sum * (1.0 + slack) + 1e-12:
        raise InconsistentEstimateError(
            "lower estimate exceeds the upper estimate",
            {"lower": report.lower, "upper_sum": report.upper_sum, "tol": tol})
    if not report.bounded:
        return "unbounded"
    if report.upper_sum <= tol:
        return "compact"
    if report.lower >= NON_COMPACT_FACTOR * tol:
        return "non_compact"
    return "inconclusive"


def _point_weight(w: Weight, z: complex) -> float:
    r = np.array([abs(z)])
    return float(w.radial(r, 1.0 - r)[0])


def _a_quantities(spec: OperatorSpec, source: SourceSpace, w: Weight, grid: DiskGrid,
                  J: int, workers: int) -> Tuple[List[ETerm], Dict[str, LimsupEstimate]]:
    terms = e_terms(spec)
    phi = spec.symbols.phi

    def run(term: ETerm) -> LimsupEstimate:
        return a_quantity(term, phi, source.exponent(term.order), w, grid, J, term.label)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        estimates = list(executor.map(run, terms))
    return terms, {est.label: est for est in estimates}


def _level_candidates(est: LimsupEstimate, phi: AnalyticFunction, level: int) -> List[Tuple[complex, complex]]:
    """(z, phi(z)) at the band maximizers of a level; the deepest level adds the nested argmax"""
    points = [est.band_argmax[level], est.boundary_points[level]]
    if level == est.deepest_level:
        points.append(est.argmax[level])
    candidates = []
    for z in dict.fromkeys(p for p in points if p is not None):
        a = complex(phi.evaluate(z))
        if abs(a) < 1.0:
            candidates.append((z, a))
    return candidates


def _lower_sequence(est: LimsupEstimate, phi: AnalyticFunction,
                    value: Callable[[complex, complex], float]) -> Tuple[List[Optional[float]], float]:
    """
    Per-level max of value(z, phi(z)) over the level's candidates, and the
    entry at the deepest populated level (0 for an empty boundary).
    """
    if est.empty_boundary:
        return [None] * len(est.eps), 0.0
    sequence: List[Optional[float]] = []
    for level in range(len(est.eps)):
        found = [value(z, a) for z, a in _level_candidates(est, phi, level)]
        sequence.append(max(found) if found else None)
    deepest = sequence[est.deepest_level]
    return sequence, 0.0 if deepest is None else deepest


def _qk_lower(spec: OperatorSpec, params: SpaceParams, w: Weight, terms: List[ETerm],
              per_term: Dict[str, LimsupEstimate], normalize: bool,
              xi_grid: Optional[DiskGrid]) -> Tuple[Dict[str, float], Dict[str, list], Dict[str, float]]:
    """
    Calibrated test-family values per term along the boundary levels: the
    family whose only nonvanishing derivative at phi(z_k) has the term's order,
    divided by its closed-form constant. The Q_K-normalized form is taken at
    the deepest level only.
    """
    n = spec.symbols.n
    kinds = {n: "f", n + 1: "g", n + 2: "h"}
    phi = spec.symbols.phi
    calibrated, sequences, normalized = {}, {}, {}
    for term in terms:
        kind = kinds[term.order]

        def mass(z: complex, a: complex, kind=kind) -> Tuple[float, Any]:
            family = build_qk_test(kind, a, params.gamma, n)
            return _point_weight(w, z) * abs(complex(derivative_decomposed(spec, family.function, z))), family

        def value(z: complex, a: complex) -> float:
            m, family = mass(z, a)
            return m / abs(family.closed_form_constant)

        est = per_term[term.label]
        sequences[term.label], calibrated[term.label] = _lower_sequence(est, phi, value)
        normalized[term.label] = 0.0
        if normalize and not est.empty_boundary:
            candidates = _level_candidates(est, phi, est.deepest_level)
            if candidates:
                z, a = max(candidates, key=lambda c: value(*c))
                m, family = mass(z, a)
                norm = qk_norm(family.function, params, xi_grid, extra_xi=(a,)).value
                normalized[term.label] = m / norm if norm > 0 else 0.0
    return calibrated, sequences, normalized


def _hinf_lower(spec: OperatorSpec, w: Weight, terms: List[ETerm],
                per_term: Dict[str, LimsupEstimate]) -> Tuple[Dict[str, float], Dict[str, list]]:
    """Delta-family values per term along the boundary levels: g_i picks out E_i at phi(z_k)"""
    targets = tuple(sorted(t.order for t in terms))
    phi = spec.symbols.phi
    families: Dict[complex, Any] = {}
    values, sequences = {}, {}
    for term in terms:

        def value(z: complex, a: complex, order=term.order) -> float:
            if a not in families:
                families[a] = build_hinf_delta_family(targets, a)
            g = families[a][order]
            return _point_weight(w, z) * abs(complex(derivative_decomposed(spec, g.function, z)))

        sequences[term.label], values[term.label] = _lower_sequence(per_term[term.label], phi, value)
    return values, sequences


def _hinf_family_lower(spec: OperatorSpec, w: Weight, grid: DiskGrid, count: int,
                       est: LimsupEstimate) -> Tuple[Dict[str, float], List[Optional[float]]]:
    """
    max_i ||T f_{i,a}||_{B_mu} with a = phi(z_k) on the last FAMILY_TAIL
    populated levels; per-family values are those of the deepest level.
    """
    zeros = {str(i): 0.0 for i in range(1, count + 1)}
    if est.empty_boundary:
        return zeros, []
    deepest = est.deepest_level
    levels = range(max(0, deepest - FAMILY_TAIL + 1), deepest + 1)
    per_family, sequence = zeros, []
    for level in levels:
        z = est.boundary_points[level]
        a = None if z is None else complex(spec.symbols.phi.evaluate(z))
        if a is None or abs(a) >= 1.0:
            sequence.append(None)
            continue
        per_family = {
            str(i): bloch_mu_norm(AppliedOperator(spec, build_hinf_test(i, a).function), w, grid,
                                  max_refinements=0).value
            for i in range(1, count + 1)
        }
        sequence.append(max(per_family.values()))
    return per_family, sequence


def _ratio(num: float, den: float) -> Optional[float]:
    return num / den if den > 0 else None


def _assemble(spec: OperatorSpec, source: SourceSpace, w: Weight, grid: DiskGrid,
              per_term: Dict[str, LimsupEstimate], lower_terms: Dict[str, float],
              compact_rel: float, diagnostics: Dict[str, Any]) -> EstimateReport:
    bounds = boundedness_suprema(spec, w, grid, source)
    boundary = rho(spec, grid)
    values = [est.value for est in per_term.values()]
    upper_max = max(values, default=0.0)
    upper_sum = float(sum(values))
    lower = max(lower_terms.values(), default=0.0)
    tol = compact_rel * bounds["scale"] if bounds["scale"] > 0 else compact_rel

    if boundary.boundary and all(est.empty_boundary for est in per_term.values()):
        raise InconsistentEstimateError(
            "phi touches the circle but no boundary level is populated",
            {"rho": boundary.to_dict()})

    for name in ("lower_normalized", "lower_hinf_family"):
        if name in diagnostics:
            diagnostics[f"band_{name[len('lower_'):]}"] = _ratio(diagnostics[name], upper_max)
    diagnostics = {
        **diagnostics,
        "lower_terms": lower_terms,
        "rho": boundary.to_dict(),
        "boundedness": bounds,
        "band": _ratio(upper_max, lower),
        "unreached_levels": max((est.unreached_levels for est in per_term.values()), default=0),
    }
    report = EstimateReport(lower, upper_max, upper_sum, per_term, "inconclusive", tol,
                            bounded=bounds["bounded"], diagnostics=diagnostics)
    report.verdict = compactness_verdict(report)
    logger.info(f"{spec.kind.value} estimate: lower {lower:.6g}, upper_max {upper_max:.6g}, "
                f"upper_sum {upper_sum:.6g}, verdict {report.verdict}")
    return report


def essnorm_qk_to_bloch(spec: OperatorSpec, params: SpaceParams, w: Weight,
                        grid: Optional[DiskGrid] = None, J: int = LEVELS_J,
                        compact_rel: float = COMPACT_TOL, normalize_lower: bool = False,
                        xi_grid: Optional[DiskGrid] = None, workers: int = WORKERS) -> EstimateReport:
    """T^n : Q_K(p,q) -> B_mu, terms A(E_i, phi, gamma + i - 1) for i = n, n+1, n+2"""
    if spec.kind is not OperatorKind.TN:
        raise PairingError("the Q_K estimator covers T^n only", {"kind": spec.kind.value})
    grid = grid or DiskGrid()
    source = SourceSpace.qk(params)
    terms, per_term = _a_quantities(spec, source, w, grid, J, workers)
    calibrated, sequences, normalized = _qk_lower(spec, params, w, terms, per_term, normalize_lower, xi_grid)
    diagnostics: Dict[str, Any] = {"source": "qk", "gamma": params.gamma, "lower_sequences": sequences}
    if normalize_lower:
        diagnostics["lower_normalized"] = max(normalized.values(), default=0.0)
    return _assemble(spec, source, w, grid, per_term, calibrated, compact_rel, diagnostics)


def _hinf_estimate(spec: OperatorSpec, w: Weight, grid: DiskGrid, J: int,
                   compact_rel: float, workers: int) -> EstimateReport:
    source = SourceSpace.hinf()
    terms, per_term = _a_quantities(spec, source, w, grid, J, workers)
    lower_terms, sequences = _hinf_lower(spec, w, terms, per_term)
    family, family_sequence = _hinf_family_lower(spec, w, grid, len(terms), next(iter(per_term.values())))
    diagnostics = {"source": "hinf", "lower_sequences": sequences,
                   "lower_hinf_family": max(family.values(), default=0.0),
                   "hinf_family": family, "hinf_family_sequence": family_sequence}
    return _assemble(spec, source, w, grid, per_term, lower_terms, compact_rel, diagnostics)


def essnorm_hinf_mn(spec: OperatorSpec, w: Weight, grid: Optional[DiskGrid] = None,
                    J: int = LEVELS_J, compact_rel: float = COMPACT_TOL,
                    workers: int = WORKERS) -> EstimateReport:
    """T^{m,n} : H^inf -> B_mu with m + 1 < n, four terms i in {m, m+1, n, n+1}"""
    if spec.kind is not OperatorKind.TMN or spec.merged:
        raise PairingError("this estimator needs T^(m,n) with m + 1 < n",
                           {"kind": spec.kind.value, "m": spec.symbols.m, "n": spec.symbols.n})
    return _hinf_estimate(spec, w, grid or DiskGrid(), J, compact_rel, workers)


def essnorm_hinf_m1n(spec: OperatorSpec, w: Weight, grid: Optional[DiskGrid] = None,
                     J: int = LEVELS_J, compact_rel: float = COMPACT_TOL,
                     workers: int = WORKERS) -> EstimateReport:
    """T^{m,n} : H^inf -> B_mu with m + 1 = n, the middle coefficients merged"""
    if spec.kind is not OperatorKind.TMN or not spec.merged:
        raise PairingError("this estimator needs T^(m,n) with m + 1 = n",
                           {"kind": spec.kind.value, "m": spec.symbols.m, "n": spec.symbols.n})
    return _hinf_estimate(spec, w, grid or DiskGrid(), J, compact_rel, workers)


def estimate(spec: OperatorSpec, source: SourceSpace, w: Weight, grid: Optional[DiskGrid] = None,
             J: int = LEVELS_J, compact_rel: float = COMPACT_TOL, normalize_lower: bool = False,
             xi_grid: Optional[DiskGrid] = None, workers: int = WORKERS) -> EstimateReport:
    """Dispatch on (operator kind, source space); T^n with H^inf and T^{m,n} with Q_K are rejected"""
    if spec.kind is OperatorKind.TN and source.kind == "qk":
        return essnorm_qk_to_bloch(spec, source.params, w, grid, J, compact_rel, normalize_lower,
                                   xi_grid, workers)
    if spec.kind is OperatorKind.TMN and source.kind == "hinf":
        if spec.merged:
            return essnorm_hinf_m1n(spec, w, grid, J, compact_rel, workers)
        return essnorm_hinf_mn(spec, w, grid, J, compact_rel, workers)
    raise PairingError(f"operator {spec.kind.value} is not paired with source space {source.kind}",
                       {"kind": spec.kind.value, "space": source.kind})


def default_dilation_suite() -> List[AnalyticFunction]:
    return [Polynomial.monomial(k) for k in range(1, 5)] + [Polynomial((0.5, 1.0, -0.25))]


@dataclass
class DilationSequence:
    """Monitoring sequence for ||T - T_r||; each entry is a lower bound, not a certified one"""

    radii: Tuple[float, ...]
    values: Tuple[float, ...]
    maximizers: Tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {"r": list(self.radii), "values": list(self.values),
                "maximizer_index": list(self.maximizers), "certified": False}


def dilation_upper_bound(spec: OperatorSpec, source: SourceSpace, w: Weight,
                         r_schedule: Sequence[float], grid: Optional[DiskGrid] = None,
                         suite: Optional[Sequence[AnalyticFunction]] = None,
                         xi_grid: Optional[DiskGrid] = None, workers: int = WORKERS) -> DilationSequence:
    """For each r, max over the unit-normalized suite of ||(T - T_r) f||_{B_mu}"""
    radii = [float(r) for r in r_schedule]
    if not radii or any(not 0.0 < r <= 1.0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("dilation schedule must increase strictly inside (0, 1]", {"r_schedule": radii})
    grid = grid or DiskGrid()
    suite = list(suite) if suite is not None else default_dilation_suite()

    if source.kind == "qk":
        norms = [qk_norm(f, source.params, xi_grid, workers=workers).value for f in suite]
    else:
        norms = [hinf_norm(f, grid, max_refinements=0).value for f in suite]

    def sweep(r: float) -> Tuple[float, int]:
        best, where = 0.0, -1
        for index, (f, norm) in enumerate(zip(suite, norms)):
            if norm <= 0:
                continue
            value = bloch_mu_norm(OperatorDifference(spec, r, f), w, grid, max_refinements=0).value / norm
            if value > best:
                best, where = value, index
        return best, where

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(sweep, radii))
    for r, (value, _) in zip(radii, results):
        logger.debug(f"dilation r={r}: {value:.6g}")
    return DilationSequence(tuple(radii), tuple(v for v, _ in results), tuple(i for _, i in results))


def dilation_gap(spec: OperatorSpec, f: AnalyticFunction, r: float, radius: float = 0.9,
                 grid: Optional[DiskGrid] = None) -> float:
    """sup over grid points with |z| <= radius of |T_r f(z) - T f(z)|"""
    grid = grid or DiskGrid()
    z = grid.points[grid.radii <= radius]
    full = AppliedOperator(spec.with_dilation(1.0), f).evaluate(z)
    dilated = AppliedOperator(spec.with_dilation(r), f).evaluate(z)
    return float(np.max(np.abs(np.asarray(dilated) - np.asarray(full))))
