"""
Orchestrator Service for Blochop
Builds domain objects from a validated run config and runs the requested computation
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from models.essnorm import dilation_gap, dilation_upper_bound, estimate
from models.errors import ConfigError
from models.norms import (
    bloch_alpha_equiv_norm, bloch_alpha_norm, bloch_mu_norm, embedding_check, hinf_norm, qk_norm,
)
from models.operators import boundedness_suprema, e_coefficients, rho
from models.weights import check_admissible, check_normal
from .run_config import RunConfig
from .settings import WORKERS
from .verification import (
    DEBUG_TAMPER, calibration_checks, certificate_sweep, decomposition_oracle, delta_sweep, dilation_monitoring,
    embedding_suite, equivalence_band, interior_nullity, rotation_invariance, sandwich_check, weight_properties,
)

logger = logging.getLogger(__name__)


class Orchestrator:
    """Runs one command per call against a validated RunConfig"""

    def __init__(self, config: RunConfig, workers: int = WORKERS):
        self.config = config
        self.workers = workers

    def run_norm(self) -> Dict[str, Any]:
        cfg = self.config
        f = cfg.build_function()
        grid = cfg.build_grid()
        which = cfg.norm.which
        refinements = cfg.grid.max_refinements
        logger.info(f"Computing {which} norm on a grid with M={grid.M}")

        if which == "bloch_mu":
            report = bloch_mu_norm(f, cfg.build_weight(), grid, refinements)
        elif which == "bloch_alpha":
            report = bloch_alpha_norm(f, self._alpha(), grid, refinements)
        elif which == "bloch_alpha_equiv":
            report = bloch_alpha_equiv_norm(f, self._alpha(), cfg.norm.n, grid, refinements)
        elif which == "hinf":
            report = hinf_norm(f, grid, refinements)
        elif which == "qk":
            report = qk_norm(f, cfg.build_space(), cfg.build_xi_grid(), workers=self.workers)
        else:
            return {"norm": which, **embedding_check(f, cfg.build_space(), grid, cfg.build_xi_grid())}
        return {"norm": which, **report.to_dict()}

    def _alpha(self) -> float:
        if self.config.norm.alpha is not None:
            return self.config.norm.alpha
        if self.config.weight.alpha is not None:
            return self.config.weight.alpha
        raise ConfigError("alpha-Bloch norms need norm.alpha or weight.alpha", {"loc": "norm.alpha"})

    def run_essnorm(self) -> Tuple[Dict[str, Any], List[List[Any]]]:
        cfg = self.config
        spec = cfg.build_operator()
        report = estimate(
            spec, cfg.build_source(), cfg.build_weight(), cfg.build_grid(), cfg.grid.J,
            compact_rel=cfg.tolerances.compact_rel,
            normalize_lower=cfg.tolerances.normalize_lower,
            xi_grid=cfg.build_xi_grid(),
            workers=self.workers,
        )
        return {"operator": spec.to_dict(), "space": cfg.space.kind, **report.to_dict()}, report.csv_rows()

    def run_check_bounded(self) -> Dict[str, Any]:
        cfg = self.config
        spec = cfg.build_operator()
        grid = cfg.build_grid()
        w = cfg.build_weight()
        source = cfg.build_source()
        measure = rho(spec, grid)
        result: Dict[str, Any] = {
            "operator": spec.to_dict(),
            "rho": measure.to_dict(),
            "suprema": boundedness_suprema(spec, w, grid, source),
            "e_at_origin": e_coefficients(spec, 0j).to_dict(),
        }
        if w.kind == "alpha" or w.normality is not None:
            result["weight_normal"] = check_normal(w).to_dict()
        if source.kind == "qk":
            result["space_admissible"] = {k: v.to_dict() for k, v in check_admissible(source.params).items()}
        logger.info(f"Boundedness suprema: bounded={result['suprema']['bounded']}, rho={measure.value:.6g}")
        return result

    def run_dilation_sweep(self) -> Dict[str, Any]:
        cfg = self.config
        spec = cfg.build_operator()
        grid = cfg.build_grid()
        sequence = dilation_upper_bound(spec, cfg.build_source(), cfg.build_weight(), cfg.dilation.r_schedule,
                                        grid, xi_grid=cfg.build_xi_grid(), workers=self.workers)
        result = {"operator": spec.to_dict(), "sequence": sequence.to_dict()}
        if cfg.function is not None:
            f = cfg.build_function()
            result["gaps"] = {
                str(r): dilation_gap(spec, f, r, cfg.dilation.gap_radius, grid)
                for r in cfg.dilation.r_schedule
            }
        return result

    def run_verify_paper(self, tamper: bool = False) -> Dict[str, Any]:
        cfg = self.config
        verify, tol = cfg.verify, cfg.tolerances
        sequence = cfg.build_boundary_sequence()
        scale: Optional[Tuple[float, float, float]] = DEBUG_TAMPER if tamper else verify.tamper
        if scale is not None:
            logger.warning(f"Certificate sweep runs with tampered weights {scale}")

        results = {
            "certificates": certificate_sweep(verify.gammas, verify.ns, sequence, tol.vanishing,
                                              tol.closed_form, scale, self.workers),
            "delta_family": delta_sweep(verify.delta_targets, sequence),
            "decomposition": decomposition_oracle(verify.random_configs, cfg.seed, tol.decomposition),
            "calibration": calibration_checks(),
            "interior_nullity": interior_nullity(cfg.build_grid(), cfg.grid.J),
            "embedding": embedding_suite(grid=cfg.build_grid(), xi_grid=cfg.build_xi_grid()),
            "equivalence_band": equivalence_band(grid=cfg.build_grid()),
            "rotation_invariance": rotation_invariance(verify.rotation_configs, cfg.seed),
            "weights": weight_properties(verify.weight_configs, cfg.seed),
            "dilation_monitoring": dilation_monitoring(cfg.build_grid()),
        }
        if verify.sandwich_configs:
            results["sandwich"] = sandwich_check(verify.sandwich_configs, cfg.seed, cfg.build_grid(), cfg.grid.J)
        passed = all(section["passed"] for section in results.values())
        for name, section in results.items():
            logger.info(f"{name}: {'pass' if section['passed'] else 'FAIL'}")
        return {"passed": passed, **results}
