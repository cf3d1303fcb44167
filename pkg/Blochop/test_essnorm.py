"""
Tests for the essential-norm estimators, compactness verdicts and dilation monitoring
"""

import math

import numpy as np
import pytest

from functions.verification import calibration_checks, interior_nullity, sandwich_check
from models.errors import ConfigError, InconsistentEstimateError, PairingError
from models.essnorm import (
    EstimateReport, a_quantity, boundary_grid, compactness_verdict, dilation_gap, dilation_upper_bound,
    essnorm_hinf_m1n, essnorm_hinf_mn, essnorm_qk_to_bloch, estimate,
)
from models.funcalg import Polynomial
from models.norms import DiskGrid
from models.operators import OperatorKind, OperatorSpec, SourceSpace, SymbolConfig
from models.weights import Kernel, SpaceParams, Weight

ONE, ZERO, IDENT = Polynomial.constant(1.0), Polynomial.constant(0.0), Polynomial.identity()
HALF = Polynomial((0.0, 0.5))
GRID = DiskGrid(M=24)
QK = SpaceParams(2.0, 0.0, Kernel.power(1.0))


def tn(psi1, psi2, phi, n=0):
    return OperatorSpec(OperatorKind.TN, SymbolConfig(psi1, psi2, phi, n))


def tmn(psi1, psi2, phi, m, n):
    return OperatorSpec(OperatorKind.TMN, SymbolConfig(psi1, psi2, phi, n, m))


def test_a_quantity_matched_weight_is_one():
    est = a_quantity(ONE, IDENT, 1.0, Weight.alpha_weight(1.0), GRID, 12)
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.trend == "stable"
    assert len(est.nested) == 12


def test_a_quantity_trends():
    decaying = a_quantity(ONE, IDENT, 1.0, Weight.alpha_weight(1.5), GRID, 12)
    growing = a_quantity(ONE, IDENT, 1.0, Weight.alpha_weight(0.5), GRID, 12)
    assert decaying.trend == "decreasing"
    assert not decaying.divergence
    assert growing.trend == "diverging"
    assert growing.divergence


def test_a_quantity_interior_map_has_an_empty_boundary():
    est = a_quantity(ONE, HALF, 1.0, Weight.alpha_weight(1.0), GRID, 12)
    assert est.empty_boundary
    assert est.value == 0.0
    assert all(math.isnan(v) for v in est.nested)


def test_level_count_is_clipped_to_the_grid():
    est = a_quantity(ONE, IDENT, 1.0, Weight.alpha_weight(1.0), DiskGrid(M=8), 12)
    assert len(est.eps) == 4
    with pytest.raises(ConfigError):
        a_quantity(ONE, IDENT, 1.0, Weight.alpha_weight(1.0), GRID, 0)


# touches at z = 1 with angular derivative 1.4; 1 - |phi| stays above 2^-12 on the M=24 grid
STEEP = Polynomial((0.0, 0.6, 0.4))


def test_touching_map_with_steep_boundary_is_not_compact():
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, STEEP), QK, Weight.alpha_weight(2.0), GRID, 12)
    est = report.per_term["psi2_phi_prime"]
    assert not est.empty_boundary
    assert est.unreached_levels == 0
    assert est.grid_M > GRID.M
    # mu |phi'| / (1 - |phi|^2)^2 -> 1.4 / 1.4^2 along the radius to 1
    assert est.value == pytest.approx(1.0 / 1.4, rel=0.02)
    assert report.diagnostics["rho"]["boundary"]
    assert report.diagnostics["unreached_levels"] == 0
    assert report.verdict == "non_compact"


def test_boundary_grid_deepens_only_touching_maps():
    deepened = boundary_grid(STEEP, GRID, 12)
    assert deepened.touching
    assert deepened.grid.M > GRID.M
    assert float(np.min(1.0 - deepened.phi_abs)) <= 2.0 ** -12
    interior = boundary_grid(Polynomial((0.0, 0.99)), GRID, 12)
    assert not interior.touching
    assert interior.grid.M == GRID.M


def test_near_touching_interior_map_stays_compact():
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, Polynomial((0.0, 0.99))), QK, Weight.alpha_weight(2.0), GRID, 12)
    assert all(est.empty_boundary for est in report.per_term.values())
    assert report.upper_max == 0.0
    assert report.verdict == "compact"


def test_vanishing_psi2_zeroes_its_terms_at_every_level():
    qk = essnorm_qk_to_bloch(tn(IDENT, ZERO, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12)
    only = qk.per_term["psi2_phi_prime"]
    assert all(v == 0.0 for v in only.nested)
    assert all(v == 0.0 for v in only.band)
    assert only.value == 0.0
    assert qk.per_term["psi1_prime"].value > 0.0

    hinf = essnorm_hinf_mn(tmn(IDENT, ZERO, IDENT, 0, 2), Weight.alpha_weight(3.0), GRID, 12)
    for label in ("psi2_prime", "psi2_phi_prime"):
        assert all(v == 0.0 for v in hinf.per_term[label].nested), label
        assert hinf.per_term[label].value == 0.0


def test_lower_bound_is_a_sequence_under_the_upper_levels():
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12)
    est = report.per_term["psi2_phi_prime"]
    sequence = report.diagnostics["lower_sequences"]["psi2_phi_prime"]
    assert len(sequence) == 12
    for level, (lower, upper) in enumerate(zip(sequence, est.nested)):
        assert lower is not None, level
        assert lower <= upper * (1 + 1e-9), level
    assert report.lower == pytest.approx(sequence[est.deepest_level])
    assert report.lower <= report.upper_max
    assert report.diagnostics["band"] == pytest.approx(report.upper_max / report.lower)


def test_normalized_qk_lower_form_is_reported_as_a_band():
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12,
                                 normalize_lower=True, xi_grid=DiskGrid(M=4))
    diagnostics = report.diagnostics
    assert diagnostics["lower_normalized"] > 0.0
    # the Q_K norm of a test function is not its closed-form constant, so this form may exceed upper
    assert 0.25 <= diagnostics["band_normalized"] <= 8.0
    assert report.lower <= report.upper_max
    plain = essnorm_qk_to_bloch(tn(ZERO, ONE, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12)
    assert "lower_normalized" not in plain.diagnostics
    assert "band_normalized" not in plain.diagnostics


def test_hinf_test_family_form_is_reported_as_a_band():
    report = essnorm_hinf_mn(tmn(ZERO, ONE, IDENT, 0, 2), Weight.alpha_weight(3.0), GRID, 12)
    diagnostics = report.diagnostics
    assert set(diagnostics["hinf_family"]) == {"1", "2", "3", "4"}
    assert 1 <= len(diagnostics["hinf_family_sequence"]) <= 3
    assert all(v is not None and v > 0 for v in diagnostics["hinf_family_sequence"])
    assert 1.0 <= diagnostics["band_hinf_family"] <= 10.0
    assert report.lower <= report.upper_sum * 1.05


def test_calibration_at_acceptance_depth():
    result = calibration_checks()
    assert result["passed"], result


def test_interior_maps_are_compact():
    result = interior_nullity(GRID, 12)
    assert result["passed"], result


def test_qk_surviving_term():
    # mu = (1 - r^2)^(gamma + n + 1) with gamma = 1, n = 0
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12)
    assert report.per_term["psi2_phi_prime"].value == pytest.approx(1.0, abs=0.05)
    assert report.per_term["psi1_prime"].value == 0.0
    assert report.per_term["psi1_phi_prime_plus_psi2_prime"].value == 0.0
    assert report.upper_max == pytest.approx(1.0, abs=0.05)
    assert report.lower >= 0.5
    assert report.verdict == "non_compact"


def test_hinf_surviving_term():
    report = essnorm_hinf_mn(tmn(ZERO, ONE, IDENT, 0, 2), Weight.alpha_weight(3.0), GRID, 12)
    assert set(report.per_term) == {"psi1_prime", "psi1_phi_prime", "psi2_prime", "psi2_phi_prime"}
    assert report.per_term["psi2_phi_prime"].value == pytest.approx(1.0, abs=0.05)
    assert report.per_term["psi2_prime"].value == 0.0
    assert report.lower >= 0.5
    assert report.verdict == "non_compact"
    assert report.diagnostics["lower_hinf_family"] > 0


def test_merged_middle_term_cancels():
    # phi = id and psi1 = -psi2'
    psi2 = Polynomial.monomial(2)
    spec = tmn(Polynomial((0.0, -2.0)), psi2, IDENT, 1, 2)
    report = essnorm_hinf_m1n(spec, Weight.alpha_weight(3.0), GRID, 12)
    middle = report.per_term["psi1_phi_prime_plus_psi2_prime"]
    assert middle.value == 0.0
    assert all(v == 0.0 for v in middle.nested)


def test_adjacent_orders_reduce_to_tn():
    psi1, psi2, phi = Polynomial((1.0, 1.0)), Polynomial((0.0, 0.5)), Polynomial((0.0, 0.5, 0.5))
    w = Weight.alpha_weight(3.0)
    as_tn = essnorm_qk_to_bloch(tn(psi1, psi2, phi, 1), QK, w, GRID, 8)
    as_tmn = essnorm_hinf_m1n(tmn(psi1, psi2, phi, 1, 2), w, GRID, 8)
    assert set(as_tn.per_term) == set(as_tmn.per_term)
    for label, est in as_tn.per_term.items():
        assert est.value == pytest.approx(as_tmn.per_term[label].value, rel=1e-9, abs=1e-12)


def test_unpaired_configurations_are_rejected():
    w = Weight.alpha_weight(1.0)
    with pytest.raises(PairingError):
        estimate(tn(ONE, ONE, HALF), SourceSpace.hinf(), w, GRID)
    with pytest.raises(PairingError):
        estimate(tmn(ONE, ONE, HALF, 0, 2), SourceSpace.qk(QK), w, GRID)
    with pytest.raises(PairingError):
        essnorm_qk_to_bloch(tmn(ONE, ONE, HALF, 0, 2), QK, w, GRID)
    with pytest.raises(PairingError):
        essnorm_hinf_mn(tmn(ONE, ONE, HALF, 1, 2), w, GRID)
    with pytest.raises(PairingError):
        essnorm_hinf_m1n(tmn(ONE, ONE, HALF, 0, 2), w, GRID)


def test_scaling_the_symbols_scales_the_estimates():
    spec = tn(Polynomial((1.0, 1.0)), Polynomial((0.0, 0.5)), Polynomial((0.0, 0.6, 0.4j)))
    w = Weight.alpha_weight(2.0)
    base = essnorm_qk_to_bloch(spec, QK, w, GRID, 8)
    tripled = essnorm_qk_to_bloch(spec.scaled(3.0), QK, w, GRID, 8)
    assert base.upper_max > 0
    assert tripled.upper_max == pytest.approx(3.0 * base.upper_max, rel=1e-12)
    assert tripled.upper_sum == pytest.approx(3.0 * base.upper_sum, rel=1e-12)
    assert tripled.lower == pytest.approx(3.0 * base.lower, rel=1e-9)


def test_max_and_sum_bracket():
    spec = tmn(Polynomial((1.0, 1.0)), Polynomial((0.0, 0.5)), Polynomial((0.0, 0.6, 0.4j)), 0, 2)
    report = estimate(spec, SourceSpace.hinf(), Weight.alpha_weight(3.0), GRID, 8)
    assert report.upper_max <= report.upper_sum <= len(report.per_term) * report.upper_max
    assert report.lower <= report.upper_sum * 1.05


def test_verdict_rules():
    def report(lower, upper, bounded=True):
        return EstimateReport(lower, upper, upper, {}, "", 1e-3, bounded)

    assert compactness_verdict(report(0.0, 0.0)) == "compact"
    assert compactness_verdict(report(0.5, 1.0)) == "non_compact"
    assert compactness_verdict(report(0.005, 1.0)) == "inconclusive"
    assert compactness_verdict(report(0.0, 1.0, bounded=False)) == "unbounded"
    with pytest.raises(InconsistentEstimateError):
        compactness_verdict(report(2.0, 1.0))


def test_report_serialization_keeps_every_level():
    report = essnorm_qk_to_bloch(tn(ZERO, ONE, IDENT), QK, Weight.alpha_weight(2.0), GRID, 12)
    data = report.to_dict()
    assert data["verdict"] == "non_compact"
    assert len(data["levels"]) == 12
    assert len(data["terms"]["psi2_phi_prime"]["levels"]) == 12
    assert len(report.csv_rows()) == 3 * 12


def test_dilation_sequence_decreases_to_zero():
    spec = tmn(ONE, IDENT, HALF, 0, 2)
    seq = dilation_upper_bound(spec, SourceSpace.hinf(), Weight.alpha_weight(1.0),
                               [0.5, 0.9, 0.99, 1.0], DiskGrid(M=12), workers=2)
    assert seq.values[-1] == 0.0
    assert seq.values[0] > seq.values[1] > seq.values[2] > 0.0
    assert not seq.to_dict()["certified"]


@pytest.mark.parametrize("schedule", [[0.9, 0.5], [0.0, 1.0], []])
def test_dilation_schedule_validation(schedule):
    with pytest.raises(ConfigError):
        dilation_upper_bound(tmn(ONE, IDENT, HALF, 0, 2), SourceSpace.hinf(), Weight.alpha_weight(1.0),
                             schedule, DiskGrid(M=12))


def test_dilation_gap_is_small_near_one():
    spec = tn(Polynomial.constant(0.5), Polynomial.constant(0.25), HALF)
    assert dilation_gap(spec, Polynomial.monomial(2), 0.999) <= 1e-3
    assert dilation_gap(spec, Polynomial.monomial(2), 1.0) == 0.0


@pytest.mark.slow
def test_lower_never_exceeds_upper_on_random_symbols():
    result = sandwich_check(50, seed=0)
    assert result["passed"], result["failures"]
