"""
Norms on disk-analytic functions
Weighted Bloch, alpha-Bloch (both forms), H^inf and Q_K(p,q), all computed
as maxima over a nested polar grid or, for Q_K, an area quadrature
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from functions.settings import (
    ANGLE_CAP, GRID_M, GRID_M_CAP, MAX_REFINEMENTS, QK_ANGLES, QK_GAUSS_POINTS,
    QK_PANELS_PER_END, WORKERS, XI_GRID_M,
)
from .errors import DivergenceError
from .funcalg import PowerSeries
from .weights import SpaceParams, Weight, check_admissible, check_kernel_integrability

logger = logging.getLogger(__name__)

# Relative change below which a refined sup counts as converged
REFINE_REL = 1e-3

# Slack on the embedding inequality for quadrature error
EMBEDDING_SLACK = 1.05


def _next_pow2(n: np.ndarray) -> np.ndarray:
    return (2 ** np.ceil(np.log2(np.maximum(n, 1)))).astype(int)


@dataclass(frozen=True)
class DiskGrid:
    """
    Polar grid with ring radii r = 1 - 2^(-m/(2s)), m = 0..M*s.

    s = subdivisions (a power of two; s = 1 is the base grid). Angle counts
    are powers of two, so refining with (2M, 2s) keeps every old point.
    """

    M: int = GRID_M
    subdivisions: int = 1
    angle_cap: int = ANGLE_CAP

    @property
    def ring_count(self) -> int:
        return self.M * self.subdivisions + 1

    def ring_depths(self) -> np.ndarray:
        """1 - r for every ring, exact powers of two"""
        m = np.arange(self.ring_count)
        return 2.0 ** (-m / (2.0 * self.subdivisions))

    def ring_angles(self) -> np.ndarray:
        t = self.ring_depths()
        counts = _next_pow2(np.ceil(2 * np.pi * self.subdivisions / t))
        counts = np.clip(counts, 8, self.angle_cap)
        counts[0] = 1
        return counts

    @property
    def _layout(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return _grid_layout(self.M, self.subdivisions, self.angle_cap)

    @property
    def points(self) -> np.ndarray:
        return self._layout[0]

    @property
    def radii(self) -> np.ndarray:
        return self._layout[1]

    @property
    def one_minus_r(self) -> np.ndarray:
        return self._layout[2]

    @property
    def rings(self) -> np.ndarray:
        return self._layout[3]

    @property
    def depth(self) -> float:
        """1 - r of the outermost ring"""
        return 2.0 ** (-self.M / 2.0)

    def refine(self) -> "DiskGrid":
        return DiskGrid(min(2 * self.M, max(GRID_M_CAP, self.M)), 2 * self.subdivisions, self.angle_cap)

    def to_dict(self) -> Dict[str, Any]:
        return {"M": self.M, "subdivisions": self.subdivisions, "angle_cap": self.angle_cap,
                "points": int(self.points.size)}


@lru_cache(maxsize=16)
def _grid_layout(M: int, subdivisions: int, angle_cap: int):
    grid = DiskGrid(M, subdivisions, angle_cap)
    t = grid.ring_depths()
    counts = grid.ring_angles()
    rings = np.repeat(np.arange(grid.ring_count), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    index = np.arange(rings.size) - offsets[rings]
    angles = 2 * np.pi * index / counts[rings]
    depth = t[rings]
    radius = 1.0 - depth
    points = radius * np.exp(1j * angles)
    for arr in (points, radius, depth, rings):
        arr.setflags(write=False)
    return points, radius, depth, rings


@dataclass
class NormReport:
    value: float
    argmax: complex
    grid_level: int
    converged: bool
    flags: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": float(self.value),
            "argmax": [float(self.argmax.real), float(self.argmax.imag)],
            "grid_level": self.grid_level,
            "converged": self.converged,
            "flags": sorted(set(self.flags)),
            **({"details": self.details} if self.details else {}),
        }


@dataclass
class GridSup:
    value: float
    argmax: complex
    ring_max: np.ndarray
    flags: List[str]


def grid_sup(density: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
             grid: DiskGrid, guard: Optional[float] = None) -> GridSup:
    """
    Max of density(z, r, 1 - r) over the grid. Points beyond the guard radius
    are skipped and flagged.
    """
    z, r, t, rings = grid.points, grid.radii, grid.one_minus_r, grid.rings
    flags: List[str] = []
    if guard is not None and np.any(r > guard):
        keep = r <= guard
        z, r, t, rings = z[keep], r[keep], t[keep], rings[keep]
        flags.append("guard_skipped")
        logger.warning(f"skipping {int(np.sum(~keep))} grid points beyond the series guard radius {guard}")
    values = np.asarray(density(z, r, t), dtype=float)
    ring_max = np.full(grid.ring_count, -np.inf)
    np.maximum.at(ring_max, rings, values)
    best = int(np.argmax(values))
    return GridSup(float(values[best]), complex(z[best]), ring_max, flags)


def _guard_of(*fs) -> Optional[float]:
    radii = [f.rho_max for f in fs if isinstance(f, PowerSeries)]
    return min(radii) if radii else None


def refined_sup(density, grid: DiskGrid, guard: Optional[float] = None,
                offset: float = 0.0, max_refinements: int = MAX_REFINEMENTS) -> NormReport:
    """offset + grid sup, refining until the relative change drops below REFINE_REL"""
    current = grid_sup(density, grid, guard)
    level = 0
    converged = False
    while level < max_refinements:
        finer = grid.refine()
        nxt = grid_sup(density, finer, guard)
        level += 1
        change = abs(nxt.value - current.value)
        logger.debug(f"refinement {level}: sup {current.value:.10g} -> {nxt.value:.10g}")
        grid, current = finer, nxt
        if change <= REFINE_REL * max(abs(offset + nxt.value), 1e-300):
            converged = True
            break
    flags = list(current.flags)
    outer = current.ring_max[-1]
    inner = current.ring_max[-2] if current.ring_max.size > 1 else -np.inf
    if outer > inner * (1.0 + 1e-14) and outer > 0:
        flags.append("boundary_attained")
    if not converged:
        flags.append("not_converged")
    return NormReport(offset + current.value, current.argmax, level, converged, flags,
                      {"grid": grid.to_dict()})


def bloch_mu_norm(f, w: Weight, grid: Optional[DiskGrid] = None,
                  max_refinements: int = MAX_REFINEMENTS) -> NormReport:
    """|f(0)| + sup mu(z)|f'(z)|"""
    grid = grid or DiskGrid()
    at_zero = abs(f.derivative_at(0, 0j))

    def density(z, r, t):
        return w.radial(r, t) * np.abs(f.derivative_at(1, z))

    return refined_sup(density, grid, _guard_of(f), at_zero, max_refinements)


def bloch_alpha_norm(f, alpha: float, grid: Optional[DiskGrid] = None,
                     max_refinements: int = MAX_REFINEMENTS) -> NormReport:
    return bloch_mu_norm(f, Weight.alpha_weight(alpha), grid, max_refinements)


def bloch_alpha_equiv_norm(f, alpha: float, n: int, grid: Optional[DiskGrid] = None,
                           max_refinements: int = MAX_REFINEMENTS) -> NormReport:
    """|f'(0)| + ... + |f^(n)(0)| + sup (1-|z|^2)^(alpha+n) |f^(n+1)(z)|"""
    grid = grid or DiskGrid()
    at_zero = sum(abs(f.derivative_at(k, 0j)) for k in range(1, n + 1))
    exponent = alpha + n

    def density(z, r, t):
        return (t * (1.0 + r)) ** exponent * np.abs(f.derivative_at(n + 1, z))

    return refined_sup(density, grid, _guard_of(f), at_zero, max_refinements)


def hinf_norm(f, grid: Optional[DiskGrid] = None,
              max_refinements: int = MAX_REFINEMENTS) -> NormReport:
    grid = grid or DiskGrid()
    return refined_sup(lambda z, r, t: np.abs(f.derivative_at(0, z)), grid, _guard_of(f), 0.0,
                       max_refinements)


@lru_cache(maxsize=8)
def _qk_rule(panels_per_end: int, gauss_points: int, angles: int):
    """Radial nodes rho, 1 - rho and weights on geometric panels, plus angles"""
    x, wts = np.polynomial.legendre.leggauss(gauss_points)
    unit = 0.5 * (x + 1.0)
    edges = [0.0] + [2.0 ** -j for j in range(panels_per_end, 0, -1)]
    rho, one_minus, weight = [], [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        # panels towards 0 in rho
        nodes = lo + (hi - lo) * unit
        rho.append(nodes)
        one_minus.append(1.0 - nodes)
        weight.append(0.5 * (hi - lo) * wts)
        # mirrored panels towards 1, parametrized by t = 1 - rho
        rho.append(1.0 - nodes)
        one_minus.append(nodes)
        weight.append(0.5 * (hi - lo) * wts)
    theta = 2 * np.pi * np.arange(angles) / angles
    return np.concatenate(rho), np.concatenate(one_minus), np.concatenate(weight), theta


def qk_inner_integral(f, params: SpaceParams, xi: complex,
                      panels_per_end: int = QK_PANELS_PER_END,
                      gauss_points: int = QK_GAUSS_POINTS,
                      angles: int = QK_ANGLES) -> float:
    """
    Integral over the disk of |f'(z)|^p (1-|z|^2)^q K(g(z, xi)) dA(z).

    Substituting z = phi_xi(w) moves the Green singularity to w = 0, where
    g = -log|w|; dA is normalized so the disk has area 1.
    """
    xi = complex(xi)
    if abs(xi) >= 1.0:
        raise DivergenceError(f"xi must lie inside the disk, got |xi|={abs(xi)}")
    if params.kernel.is_zero:
        return 0.0

    rho, one_minus, rad_w, theta = _qk_rule(panels_per_end, gauss_points, angles)
    w = rho[:, None] * np.exp(1j * theta)[None, :]
    denom = 1.0 - np.conj(xi) * w
    z = (xi - w) / denom
    one_minus_xi2 = (1.0 - abs(xi)) * (1.0 + abs(xi))
    jac = one_minus_xi2 ** 2 / np.abs(denom) ** 4
    one_minus_z2 = one_minus_xi2 * (one_minus * (1.0 + rho))[:, None] / np.abs(denom) ** 2
    kern = params.kernel(-np.log(rho))[:, None]

    fprime = np.abs(np.asarray(f.derivative_at(1, z)))
    integrand = fprime ** params.p * one_minus_z2 ** params.q * kern * jac
    if not np.all(np.isfinite(integrand)):
        raise DivergenceError("Q_K integrand is not finite", {"xi": [xi.real, xi.imag]})
    # (1/pi) int rho drho dtheta = 2 int rho mean_theta drho
    radial = 2.0 * rad_w * rho * integrand.mean(axis=1)
    return math.fsum(radial.tolist())


@lru_cache(maxsize=32)
def _admissibility(params: SpaceParams) -> Tuple[bool, float]:
    verdicts = check_admissible(params)
    for name, verdict in verdicts.items():
        if not verdict.ok:
            raise DivergenceError(f"space parameters fail the {name} check",
                                  {"check": name, **verdict.to_dict()})
    return True, float(verdicts["kernel_integrability"].value)


def xi_candidates(xi_grid: Optional[DiskGrid] = None, extra_xi: Sequence[complex] = ()) -> np.ndarray:
    xi_grid = xi_grid or DiskGrid(M=XI_GRID_M)
    return np.concatenate([xi_grid.points, np.asarray(list(extra_xi), dtype=complex)])


def qk_norm(f, params: SpaceParams, xi_grid: Optional[DiskGrid] = None,
            extra_xi: Sequence[complex] = (), workers: int = WORKERS) -> NormReport:
    """
    |f(0)| + (sup over xi of the inner integral)^(1/p). The xi sweep runs on a
    thread pool; results are reduced in submission order.
    """
    _admissibility(params)
    candidates = xi_candidates(xi_grid, extra_xi)
    at_zero = abs(f.derivative_at(0, 0j))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        integrals = list(executor.map(lambda xi: qk_inner_integral(f, params, xi), candidates))

    values = np.asarray(integrals)
    best = int(np.argmax(values))
    sup = float(values[best])
    center = float(values[0])
    logger.debug(f"qk sweep over {values.size} xi: sup {sup:.6g} at {candidates[best]}, center {center:.6g}")
    return NormReport(
        value=at_zero + sup ** (1.0 / params.p),
        argmax=complex(candidates[best]),
        grid_level=0,
        converged=True,
        flags=["sup_exceeds_center"] if sup > center * (1.0 + 1e-9) else [],
        details={"sup_integral": sup, "center_integral": center, "xi_count": int(values.size)},
    )


def embedding_constant(params: SpaceParams) -> float:
    """
    (integral over the disk of (1-|w|^2)^q K(-log|w|) dA)^(-1/p); the sharp
    gamma-Bloch / Q_K constant when p = q + 2
    """
    verdict = check_kernel_integrability(params)
    if not verdict.ok or not verdict.value > 0:
        raise DivergenceError("kernel integral is not a positive finite number", verdict.to_dict())
    return (2.0 * verdict.value) ** (-1.0 / params.p)


def embedding_check(f, params: SpaceParams, grid: Optional[DiskGrid] = None,
                    xi_grid: Optional[DiskGrid] = None) -> Dict[str, Any]:
    """
    gamma-Bloch norm against the Q_K norm scaled by the embedding constant.

    Both norms carry |f(0)|, and on that part the Q_K norm already dominates
    with constant 1, so the bound is max(1, C_K) times the Q_K norm; C_K alone
    bounds only the seminorm parts. An unscaled comparison already fails for
    f = z with K = t^(1/2), where C_K is about 1.26.
    """
    bloch = bloch_alpha_norm(f, params.gamma, grid)
    qk = qk_norm(f, params, xi_grid, extra_xi=(bloch.argmax,))
    constant = embedding_constant(params)
    bound = max(1.0, constant) * qk.value
    return {
        "bloch": bloch.to_dict(),
        "qk": qk.to_dict(),
        "constant": constant,
        "ratio": bloch.value / qk.value if qk.value > 0 else math.inf,
        "holds": bool(bloch.value <= bound * EMBEDDING_SLACK),
    }
