"""
Run configuration for Blochop
Pydantic schema for YAML/JSON run configs, file lookup and CLI overrides,
plus builders for the domain objects a command needs
"""

import logging
import os
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from models.errors import ConfigError
from models.funcalg import AnalyticFunction, from_literal
from models.norms import DiskGrid
from models.operators import OperatorKind, OperatorSpec, SourceSpace, SymbolConfig, preset_symbols
from models.testfn import BoundarySequence
from models.weights import Kernel, NormalityParams, SpaceParams, Weight
from .settings import (
    ANGLE_CAP, COMPACT_TOL, CONFIG_DIR, GRID_M, LEVELS_J, MAX_REFINEMENTS, XI_GRID_M,
)

logger = logging.getLogger(__name__)

ComplexValue = Union[float, Tuple[float, float]]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MobiusTermLiteral(_Section):
    c: ComplexValue
    a: ComplexValue
    beta: float = Field(gt=0)


class SeriesLiteral(_Section):
    coeffs: List[ComplexValue] = Field(min_length=1)
    rho_max: float = Field(gt=0, lt=1)


class FunctionLiteral(_Section):
    """Exactly one of poly, mobius, series"""

    poly: Optional[List[ComplexValue]] = None
    mobius: Optional[List[MobiusTermLiteral]] = None
    series: Optional[SeriesLiteral] = None

    @model_validator(mode="after")
    def _one_kind(self):
        given = [k for k in ("poly", "mobius", "series") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(f"a function literal needs exactly one of poly, mobius, series; got {given}")
        return self

    def build(self) -> AnalyticFunction:
        return from_literal(self.model_dump(exclude_none=True))


class SymbolsSection(_Section):
    psi1: Optional[FunctionLiteral] = None
    psi2: Optional[FunctionLiteral] = None
    phi: Optional[FunctionLiteral] = None


class OperatorSection(_Section):
    kind: Literal["Tn", "Tmn"] = "Tn"
    n: int = Field(0, ge=0)
    m: Optional[int] = Field(None, ge=0)
    dilation_r: float = Field(1.0, gt=0, le=1)
    preset: Optional[str] = None
    u: Optional[FunctionLiteral] = None


class SampledKernel(_Section):
    t: List[float] = Field(min_length=2)
    k: List[float] = Field(min_length=2)


class KernelSection(_Section):
    power_s: Optional[float] = None
    scale: float = Field(1.0, ge=0)
    sampled: Optional[SampledKernel] = None

    def build(self) -> Kernel:
        if self.sampled is not None:
            if self.power_s is not None:
                raise ConfigError("kernel takes either power_s or sampled, not both")
            return Kernel(kind="sampled", t_samples=tuple(self.sampled.t), k_samples=tuple(self.sampled.k))
        return Kernel.power(1.0 if self.power_s is None else self.power_s, self.scale)


class SpaceSection(_Section):
    kind: Literal["qk", "hinf"] = "qk"
    p: float = 2.0
    q: float = 0.0
    kernel: KernelSection = Field(default_factory=KernelSection)


class NormalitySection(_Section):
    a: float
    b: float
    delta: float = Field(0.0, ge=0, lt=1)


class TabulatedWeight(_Section):
    radii: List[float] = Field(min_length=2)
    values: List[float] = Field(min_length=2)


class WeightSection(_Section):
    alpha: Optional[float] = None
    tabulated: Optional[TabulatedWeight] = None
    normality: Optional[NormalitySection] = None

    def build(self) -> Weight:
        normality = None
        if self.normality is not None:
            normality = NormalityParams(self.normality.a, self.normality.b, self.normality.delta)
        if self.tabulated is not None:
            if self.alpha is not None:
                raise ConfigError("weight takes either alpha or tabulated, not both")
            return Weight.tabulated(self.tabulated.radii, self.tabulated.values, normality)
        return Weight.alpha_weight(1.0 if self.alpha is None else self.alpha, normality)


class GridSection(_Section):
    M: int = Field(GRID_M, ge=2)
    J: int = Field(LEVELS_J, ge=1)
    xi_M: int = Field(XI_GRID_M, ge=0)
    angle_cap: int = Field(ANGLE_CAP, ge=8)
    max_refinements: int = Field(MAX_REFINEMENTS, ge=0)


class TolerancesSection(_Section):
    compact_rel: float = Field(COMPACT_TOL, gt=0)
    vanishing: float = Field(1e-9, gt=0)
    closed_form: float = Field(1e-9, gt=0)
    decomposition: float = Field(1e-6, gt=0)
    normalize_lower: bool = False


class NormSection(_Section):
    which: Literal["bloch_mu", "bloch_alpha", "bloch_alpha_equiv", "hinf", "qk", "embedding"] = "bloch_mu"
    alpha: Optional[float] = Field(None, gt=0)
    n: int = Field(1, ge=0)


class DilationSection(_Section):
    r_schedule: List[float] = Field(default_factory=lambda: [0.5, 0.9, 0.99, 0.999, 1.0], min_length=1)
    gap_radius: float = Field(0.9, gt=0, lt=1)


class VerifySection(_Section):
    gammas: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], min_length=1)
    ns: List[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    moduli: List[float] = Field(default_factory=lambda: [0.9, 0.99, 0.999, 0.9999], min_length=1)
    rays: List[float] = Field(default_factory=lambda: [0.0, 1.0 / 3.0, 2.0 / 3.0], min_length=1)
    delta_targets: List[int] = Field(default_factory=lambda: [0, 1, 2, 3], min_length=1)
    random_configs: int = Field(100, ge=1)
    sandwich_configs: int = Field(10, ge=0)
    rotation_configs: int = Field(20, ge=1)
    weight_configs: int = Field(20, ge=1)
    tamper: Optional[Tuple[float, float, float]] = None


class RunConfig(_Section):
    symbols: SymbolsSection = Field(default_factory=SymbolsSection)
    operator: OperatorSection = Field(default_factory=OperatorSection)
    space: SpaceSection = Field(default_factory=SpaceSection)
    weight: WeightSection = Field(default_factory=WeightSection)
    grid: GridSection = Field(default_factory=GridSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    seed: int = 0
    function: Optional[FunctionLiteral] = None
    norm: NormSection = Field(default_factory=NormSection)
    dilation: DilationSection = Field(default_factory=DilationSection)
    verify: VerifySection = Field(default_factory=VerifySection)

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def build_operator(self) -> OperatorSpec:
        op = self.operator
        if op.preset is not None:
            phi = self.symbols.phi.build() if self.symbols.phi is not None else None
            u = op.u.build() if op.u is not None else None
            psi1, psi2, phi = preset_symbols(op.preset, u, phi)
        else:
            missing = [k for k in ("psi1", "psi2", "phi") if getattr(self.symbols, k) is None]
            if missing:
                raise ConfigError("operator symbols missing", {"loc": [f"symbols.{k}" for k in missing]})
            psi1, psi2, phi = (getattr(self.symbols, k).build() for k in ("psi1", "psi2", "phi"))
        if op.kind == "Tn" and op.m is not None:
            raise ConfigError("operator.m only applies to kind Tmn", {"loc": "operator.m"})
        symbols = SymbolConfig(psi1, psi2, phi, op.n, op.m)
        return OperatorSpec(OperatorKind(op.kind), symbols, op.dilation_r)

    def build_space(self) -> SpaceParams:
        return SpaceParams(self.space.p, self.space.q, self.space.kernel.build())

    def build_source(self) -> SourceSpace:
        if self.space.kind == "hinf":
            return SourceSpace.hinf()
        return SourceSpace.qk(self.build_space())

    def build_weight(self) -> Weight:
        return self.weight.build()

    def build_grid(self) -> DiskGrid:
        return DiskGrid(self.grid.M, 1, self.grid.angle_cap)

    def build_xi_grid(self) -> DiskGrid:
        return DiskGrid(self.grid.xi_M, 1, self.grid.angle_cap)

    def build_function(self) -> AnalyticFunction:
        if self.function is None:
            raise ConfigError("this command needs a function literal", {"loc": "function"})
        return self.function.build()

    def build_boundary_sequence(self) -> BoundarySequence:
        return BoundarySequence(tuple(self.verify.moduli), tuple(self.verify.rays))


def resolve_config_path(path: str) -> str:
    """The path itself if it exists, else the same name under the config directory"""
    if os.path.isfile(path):
        return path
    candidate = os.path.join(CONFIG_DIR, path)
    if os.path.isfile(candidate):
        return candidate
    raise ConfigError(f"config file not found: {path}", {"searched": [path, candidate]})


def _validation_details(error: ValidationError) -> List[Dict[str, Any]]:
    return [{"loc": ".".join(str(p) for p in err["loc"]), "msg": err["msg"]} for err in error.errors()]


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read and validate a run config. overrides maps dotted keys
    (grid.M, grid.J, seed) to values and is applied before validation.
    """
    raw: Dict[str, Any] = {}
    if path:
        resolved = resolve_config_path(path)
        with open(resolved, "r", encoding="utf-8") as handle:
            try:
                raw = yaml.safe_load(handle) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"config is not valid YAML: {e}", {"path": resolved})
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping", {"path": resolved})
        logger.info(f"Loaded config from {resolved}")

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = raw
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override {dotted}: {key} is not a section", {"loc": dotted})
        node[leaf] = value

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        details = _validation_details(e)
        raise ConfigError(f"config failed validation at {details[0]['loc']}", {"errors": details})
