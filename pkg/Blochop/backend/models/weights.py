"""
Radial weights, kernels and admissibility checks
Normality of mu and the two kernel integrability conditions of Q_K(p,q)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DivergenceError

logger = logging.getLogger(__name__)

# Dyadic quadrature: Gauss-Legendre nodes per cell, deepest level, convergence
CELL_NODES = 16
MAX_DYADIC_LEVEL = 48
CONVERGED_REL = 1e-10
DIVERGENCE_FACTOR = 1.5
# increments shrinking slower than this per level count as a logarithmic divergence
SLOW_DECAY_RATIO = 0.99

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(CELL_NODES)


@dataclass(frozen=True)
class NormalityParams:
    a: float
    b: float
    delta: float = 0.0

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ConfigError(f"normality constants need 0 < a < b, got a={self.a}, b={self.b}")
        if not (0.0 <= self.delta < 1.0):
            raise ConfigError(f"normality delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class Weight:
    """
    Radial weight mu(z) = mu(|z|).

    kind "alpha": mu(r) = (1 - r^2)^alpha.
    kind "tabulated": linear interpolation between samples (radii ascending,
    first radius 0); beyond the last sample the weight continues as a power
    of (1 - r) matching the last two samples.
    """

    kind: str
    alpha: Optional[float] = None
    radii: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    normality: Optional[NormalityParams] = None

    def __post_init__(self):
        if self.kind == "alpha":
            if self.alpha is None or not self.alpha > 0:
                raise ConfigError(f"alpha weight needs alpha > 0, got {self.alpha}")
            return
        if self.kind != "tabulated":
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.size < 2 or radii.size != values.size:
            raise ConfigError("tabulated weight needs at least two (radius, value) samples")
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0) or radii[-1] >= 1.0:
            raise ConfigError("tabulated radii must start at 0, increase strictly and stay below 1")
        if np.any(values <= 0):
            raise ConfigError("non-positive weight sample", {"values": list(map(float, values))})

    @classmethod
    def alpha_weight(cls, alpha: float, normality: Optional[NormalityParams] = None) -> "Weight":
        return cls(kind="alpha", alpha=float(alpha), normality=normality)

    @classmethod
    def tabulated(cls, radii, values, normality: Optional[NormalityParams] = None) -> "Weight":
        return cls(kind="tabulated", radii=tuple(map(float, radii)),
                   values=tuple(map(float, values)), normality=normality)

    def radial(self, r: np.ndarray, one_minus_r: Optional[np.ndarray] = None) -> np.ndarray:
        """mu as a function of the radius; one_minus_r avoids cancellation near 1"""
        r = np.asarray(r, dtype=float)
        t = 1.0 - r if one_minus_r is None else np.asarray(one_minus_r, dtype=float)
        if self.kind == "alpha":
            return (t * (1.0 + r)) ** self.alpha
        radii = np.asarray(self.radii)
        values = np.asarray(self.values)
        inside = np.interp(r, radii, values)
        t_last, t_prev = 1.0 - radii[-1], 1.0 - radii[-2]
        slope = math.log(values[-1] / values[-2]) / math.log(t_last / t_prev)
        outside = values[-1] * (np.maximum(t, 1e-300) / t_last) ** slope
        return np.where(r <= radii[-1], inside, outside)

    def to_literal(self) -> Dict[str, Any]:
        literal: Dict[str, Any]
        if self.kind == "alpha":
            literal = {"alpha": self.alpha}
        else:
            literal = {"tabulated": {"radii": list(self.radii), "values": list(self.values)}}
        if self.normality is not None:
            literal["normality"] = {"a": self.normality.a, "b": self.normality.b,
                                    "delta": self.normality.delta}
        return literal


def weight_at(w: Weight, z) -> Any:
    """mu(|z|); scalar in, float out"""
    values = w.radial(np.abs(np.asarray(z, dtype=complex)))
    return float(values) if np.ndim(z) == 0 else values


@dataclass(frozen=True)
class Kernel:
    """
    Nondecreasing K on [0, inf).

    kind "power": K(t) = scale * t^s (s = 0 gives a constant kernel,
    scale = 0 the zero kernel). kind "sampled": linear interpolation of
    nondecreasing samples, held constant past the last sample.
    """

    kind: str = "power"
    s: float = 1.0
    scale: float = 1.0
    t_samples: Tuple[float, ...] = ()
    k_samples: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "power":
            if self.s < 0 or self.scale < 0:
                raise ConfigError(f"power kernel needs s >= 0 and scale >= 0, got s={self.s}")
            return
        if self.kind != "sampled":
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        t = np.asarray(self.t_samples, dtype=float)
        k = np.asarray(self.k_samples, dtype=float)
        if t.size < 2 or t.size != k.size or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ConfigError("sampled kernel needs ascending t samples starting at 0")
        if np.any(k < 0):
            raise ConfigError("kernel samples must be non-negative")
        if np.any(np.diff(k) < 0):
            first = int(np.argmax(np.diff(k) < 0))
            raise ConfigError("kernel samples must be nondecreasing",
                              {"index": first, "t": [float(t[first]), float(t[first + 1])]})

    @classmethod
    def power(cls, s: float, scale: float = 1.0) -> "Kernel":
        return cls(kind="power", s=float(s), scale=float(scale))

    @property
    def is_zero(self) -> bool:
        if self.kind == "power":
            return self.scale == 0.0
        return not any(self.k_samples)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            if self.scale == 0.0:
                return np.zeros_like(t)
            return self.scale * np.power(t, self.s)
        return np.interp(t, np.asarray(self.t_samples), np.asarray(self.k_samples))

    def to_literal(self) -> Dict[str, Any]:
        if self.kind == "power":
            return {"power_s": self.s, "scale": self.scale}
        return {"sampled": {"t": list(self.t_samples), "k": list(self.k_samples)}}


@dataclass(frozen=True)
class SpaceParams:
    """Q_K(p,q) parameters with the derived exponent gamma = (q + 2)/p"""

    p: float
    q: float
    kernel: Kernel = field(default_factory=lambda: Kernel.power(1.0))
    gamma: float = field(init=False)

    def __post_init__(self):
        if not self.p > 0:
            raise ConfigError(f"Q_K exponent p must be positive, got {self.p}")
        if not self.q > -2:
            raise ConfigError(f"Q_K exponent q must exceed -2, got {self.q}")
        object.__setattr__(self, 'gamma', (self.q + 2.0) / self.p)


@dataclass
class Verdict:
    ok: bool
    value: Optional[float] = None
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "value": self.value, "witness": self.witness, **self.details}


def _normality_grid(delta: float, per_decade: int, decades: int) -> Tuple[np.ndarray, np.ndarray]:
    steps = np.arange(per_decade * decades + 1)
    t = (1.0 - delta) * 10.0 ** (-steps / per_decade)
    return 1.0 - t, t


def check_normal(w: Weight, a: Optional[float] = None, b: Optional[float] = None,
                 delta: Optional[float] = None, per_decade: int = 20, decades: int = 6) -> Verdict:
    """
    Check mu(r)/(1-r)^a nonincreasing to 0 and mu(r)/(1-r)^b nondecreasing to
    infinity on [delta*, 1) for some grid radius delta* >= delta.

    The limits are read off the log-slopes of both ratios against log(1-r)
    over the last decade of the grid.
    """
    params = _resolve_normality(w, a, b, delta)
    r, t = _normality_grid(params.delta, per_decade, decades)
    mu = w.radial(r, t)
    if np.any(mu <= 0):
        bad = int(np.argmax(mu <= 0))
        raise ConfigError("non-positive weight sample", {"r": float(r[bad])})

    log_t = np.log(t)
    low = np.log(mu) - params.a * log_t
    high = np.log(mu) - params.b * log_t
    rel = 1e-12
    # violation at step i means the ratio moves the wrong way between r[i] and r[i+1]
    bad_low = np.diff(low) > rel * np.maximum(1.0, np.abs(low[1:]))
    bad_high = np.diff(high) < -rel * np.maximum(1.0, np.abs(high[1:]))
    bad_step = bad_low | bad_high

    violating = np.flatnonzero(bad_step)
    start = int(violating[-1] + 1) if violating.size else 0
    tail = slice(len(r) - per_decade - 1, len(r))
    slope_low = (low[tail][-1] - low[tail][0]) / (log_t[tail][-1] - log_t[tail][0])
    slope_high = (high[tail][-1] - high[tail][0]) / (log_t[tail][-1] - log_t[tail][0])
    # ratio ~ (1-r)^slope: decay needs slope > 0, blow-up needs slope < 0
    to_zero = slope_low > 1e-3
    to_inf = slope_high < -1e-3
    ok = start < len(r) - per_decade - 1 and to_zero and to_inf

    witness = None
    if violating.size:
        i = int(violating[0])
        witness = {"r": [float(r[i]), float(r[i + 1])],
                   "condition": "nonincreasing" if bad_low[i] else "nondecreasing"}
    elif not ok:
        witness = {"r": [float(r[tail][0]), float(r[tail][-1])],
                   "condition": "limit", "slope_low": float(slope_low), "slope_high": float(slope_high)}
    logger.debug(f"normality check a={params.a} b={params.b}: ok={ok}, delta*={r[start]:.6g}")
    return Verdict(ok=bool(ok), value=float(r[start]), witness=witness,
                   details={"a": params.a, "b": params.b, "delta": params.delta,
                            "delta_effective": float(r[start])})


def _resolve_normality(w: Weight, a, b, delta) -> NormalityParams:
    if a is not None and b is not None:
        return NormalityParams(a, b, 0.0 if delta is None else delta)
    if w.normality is not None:
        return w.normality
    if w.kind == "alpha":
        return NormalityParams(w.alpha / 2.0, 2.0 * w.alpha, 0.0 if delta is None else delta)
    raise ConfigError("tabulated weight needs explicit normality constants (a, b, delta)")


def _cell_integral(fn, lo: float, hi: float) -> float:
    half = 0.5 * (hi - lo)
    x = lo + half * (_GL_NODES + 1.0)
    return float(half * np.dot(_GL_WEIGHTS, fn(x)))


def _dyadic_integral(near_zero, near_one, label: str) -> Verdict:
    """
    Integrate over (0, 1) split at 1/2: cells [2^-(j+1), 2^-j] in r for the
    left half and in t = 1 - r for the right half, adding one level per step.
    """
    total = 0.0
    increments: List[float] = []
    for level in range(1, MAX_DYADIC_LEVEL + 1):
        lo, hi = 2.0 ** -(level + 1), 2.0 ** -level
        step = _cell_integral(near_zero, lo, hi) + _cell_integral(near_one, lo, hi)
        if not math.isfinite(step):
            raise DivergenceError(f"{label}: integrand not finite on level {level}")
        total += step
        increments.append(abs(step))
        if level >= 4 and abs(step) <= CONVERGED_REL * max(abs(total), 1e-300):
            return Verdict(ok=True, value=total, details={"levels": level, "condition": label})

    last = increments[-4:]
    growing = all(later > DIVERGENCE_FACTOR * earlier for earlier, later in zip(last, last[1:]))
    ratio = (last[-1] / last[0]) ** (1.0 / 3.0) if last[0] > 0 else 0.0
    if not growing and ratio < SLOW_DECAY_RATIO:
        # geometric tail of the increments still missing past the deepest level
        tail = last[-1] * ratio / (1.0 - ratio)
        logger.debug(f"{label}: slow geometric decay (ratio {ratio:.4f}), tail {tail:.3g} added")
        return Verdict(ok=True, value=total + math.copysign(tail, total),
                       details={"levels": MAX_DYADIC_LEVEL, "condition": label,
                                "extrapolated_tail": tail})

    logger.info(f"{label}: diverged after {MAX_DYADIC_LEVEL} dyadic levels, partial value {total:.6g}")
    return Verdict(ok=False, value=total,
                   witness={"increments": [float(x) for x in last], "ratio": float(ratio)},
                   details={"levels": MAX_DYADIC_LEVEL, "condition": label,
                            "trend": "growing" if growing else "stalled"})


def check_kernel_integrability(params: SpaceParams) -> Verdict:
    """Integral over (0,1) of (1-r^2)^q K(-log r) r dr"""
    K, q = params.kernel, params.q

    def near_zero(r):
        return (1.0 - r * r) ** q * K(-np.log(r)) * r

    def near_one(t):
        r = 1.0 - t
        return (t * (2.0 - t)) ** q * K(-np.log1p(-t)) * r

    return _dyadic_integral(near_zero, near_one, "kernel_integrability")


def check_boundary_integrability(params: SpaceParams) -> Verdict:
    """
    Integral over (0,1) of K(-log r)(1-r)^min(-1,q) (log 1/(1-r))^chi r dr,
    chi = 1 exactly when q = -1.
    """
    K, q = params.kernel, params.q
    exponent = min(-1.0, q)
    chi = 1.0 if q == -1.0 else 0.0

    def near_zero(r):
        return K(-np.log(r)) * (1.0 - r) ** exponent * (-np.log1p(-r)) ** chi * r

    def near_one(t):
        r = 1.0 - t
        return K(-np.log1p(-t)) * t ** exponent * (-np.log(t)) ** chi * r

    verdict = _dyadic_integral(near_zero, near_one, "boundary_integrability")
    verdict.details["log_factor"] = bool(chi)
    return verdict


check_condition_8 = check_boundary_integrability


def check_admissible(params: SpaceParams) -> Dict[str, Verdict]:
    return {
        "kernel_integrability": check_kernel_integrability(params),
        "boundary_integrability": check_boundary_integrability(params),
    }
