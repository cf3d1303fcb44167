"""
Tests for grid norms and the Q_K quadrature
"""

import math

import numpy as np
import pytest

from functions.verification import equivalence_band, norm_sample, rotation_invariance
from models.errors import DivergenceError
from models.funcalg import MobiusPowerSum, Polynomial, PowerSeries
from models.norms import (
    DiskGrid, bloch_alpha_equiv_norm, bloch_alpha_norm, bloch_mu_norm, embedding_check,
    embedding_constant, hinf_norm, qk_inner_integral, qk_norm,
)
from models.testfn import extremal_growth
from models.weights import Kernel, SpaceParams, Weight


def test_grid_layout():
    grid = DiskGrid(M=4)
    assert grid.ring_count == 5
    assert grid.points[0] == 0
    assert grid.depth == pytest.approx(0.25)
    assert np.all(np.abs(grid.points) < 1)
    assert np.allclose(grid.one_minus_r, 1.0 - np.abs(grid.points))


def test_refined_grid_contains_the_coarse_grid():
    coarse = DiskGrid(M=4)
    fine = coarse.refine()
    assert (fine.M, fine.subdivisions) == (8, 2)
    fine_points = {(round(z.real, 12), round(z.imag, 12)) for z in fine.points}
    assert all((round(z.real, 12), round(z.imag, 12)) in fine_points for z in coarse.points)


def test_bloch_norm_of_identity():
    report = bloch_mu_norm(Polynomial.identity(), Weight.alpha_weight(1.0))
    assert report.value == pytest.approx(1.0)
    assert report.converged
    assert report.argmax == 0


def test_constant_function_norms():
    c = Polynomial.constant(2.0 - 1.0j)
    assert bloch_mu_norm(c, Weight.alpha_weight(1.0)).value == pytest.approx(abs(2.0 - 1.0j))
    assert hinf_norm(c).value == pytest.approx(abs(2.0 - 1.0j))


def test_hinf_norm_is_attained_at_the_boundary():
    report = hinf_norm(Polynomial.monomial(2))
    assert report.value == pytest.approx(1.0, rel=1e-6)
    assert "boundary_attained" in report.flags


def test_extremal_growth_function_saturates_the_bloch_bound():
    report = bloch_alpha_norm(extremal_growth(2.0), 2.0)
    assert report.value == pytest.approx(4.0, rel=1e-3)
    assert "boundary_attained" in report.flags


def test_series_guard_radius_is_flagged():
    report = bloch_alpha_norm(extremal_growth(0.5), 0.5, max_refinements=0)
    assert "guard_skipped" in report.flags
    assert report.value > 1.0


def test_equivalent_form_of_z_squared():
    report = bloch_alpha_equiv_norm(Polynomial.monomial(2), 1.0, 1)
    assert report.value == pytest.approx(2.0)
    # (1 - r^2) 2r peaks at r = 1/sqrt(3)
    plain = bloch_alpha_norm(Polynomial.monomial(2), 1.0)
    assert plain.value == pytest.approx(4.0 / (3.0 * math.sqrt(3.0)), rel=1e-3)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 2])
def test_equivalent_norm_band(alpha, n):
    grid = DiskGrid(M=24)
    for f in norm_sample():
        plain = bloch_alpha_norm(f, alpha, grid, max_refinements=0).value
        equiv = abs(f(0.0)) + bloch_alpha_equiv_norm(f, alpha, n, grid, max_refinements=0).value
        assert 0.1 <= equiv / plain <= 10.0


@pytest.mark.slow
def test_equivalence_band_sweep_reports_the_band():
    result = equivalence_band(grid=DiskGrid(M=24))
    assert result["passed"], result["failures"]
    assert 1.0 <= result["band"] <= 10.0


def test_qk_inner_integral_at_center():
    params = SpaceParams(2.0, 0.0, Kernel.power(1.0))
    assert qk_inner_integral(Polynomial.identity(), params, 0.0) == pytest.approx(0.5, abs=1e-3)


ROTATED = [
    Polynomial((0.5, 1.0, -0.25j, 0.1)),
    MobiusPowerSum.single(1.0, 0.4 + 0.2j, 1.5),
    PowerSeries(tuple(0.5 ** k for k in range(81)), 1.0 - 1e-9),
]


@pytest.mark.parametrize("f", ROTATED, ids=["polynomial", "mobius", "series"])
@pytest.mark.parametrize("theta", [0.7, 2.0, -1.3])
def test_qk_inner_integral_is_rotation_invariant(f, theta):
    params = SpaceParams(2.0, 0.0, Kernel.power(1.0))
    xi = 0.3 - 0.35j
    base = qk_inner_integral(f, params, xi)
    rotated = qk_inner_integral(f.rotate(theta), params, xi * np.exp(-1j * theta))
    assert rotated == pytest.approx(base, rel=1e-6)


def test_rotation_invariance_sweep_passes():
    result = rotation_invariance(6, seed=11)
    assert result["passed"], result["failures"]
    assert result["worst_relative_error"] < 1e-6


def test_qk_inner_integral_rejects_points_outside():
    params = SpaceParams(2.0, 0.0, Kernel.power(1.0))
    with pytest.raises(DivergenceError):
        qk_inner_integral(Polynomial.identity(), params, 1.0)


def test_qk_norm_of_identity():
    params = SpaceParams(2.0, 0.0, Kernel.power(1.0))
    report = qk_norm(Polynomial.identity(), params, DiskGrid(M=2))
    assert report.value >= math.sqrt(0.5) * (1 - 1e-3)
    assert report.details["center_integral"] == pytest.approx(0.5, abs=1e-3)


def test_qk_norm_with_zero_kernel_is_the_value_at_zero():
    params = SpaceParams(2.0, 0.0, Kernel.power(1.0, 0.0))
    report = qk_norm(Polynomial((3.0, 1.0)), params, DiskGrid(M=2))
    assert report.value == pytest.approx(3.0)


def test_qk_norm_rejects_inadmissible_kernel():
    params = SpaceParams(2.0, 0.0, Kernel.power(0.0))
    with pytest.raises(DivergenceError):
        qk_norm(Polynomial.identity(), params, DiskGrid(M=2))


def test_embedding_constant_for_square_root_kernel():
    params = SpaceParams(2.0, 0.0, Kernel.power(0.5))
    expected = (2.0 * math.gamma(1.5) / 2 ** 1.5) ** -0.5
    assert embedding_constant(params) == pytest.approx(expected, rel=1e-6)


@pytest.mark.slow
def test_embedding_holds_on_the_suite():
    params = SpaceParams(2.0, 0.0, Kernel.power(0.5))
    for f in norm_sample():
        if isinstance(f, PowerSeries):
            continue
        result = embedding_check(f, params, DiskGrid(M=24), DiskGrid(M=4))
        assert result["holds"], result


def test_embedding_is_sharp_for_identity():
    params = SpaceParams(2.0, 0.0, Kernel.power(0.5))
    result = embedding_check(Polynomial.identity(), params, DiskGrid(M=12), DiskGrid(M=2))
    assert result["holds"]
    assert result["ratio"] <= result["constant"] * 1.05


def test_embedding_bound_never_drops_below_the_value_at_zero():
    # a heavy kernel pushes C_K well below 1 while |f(0)| dominates both norms
    params = SpaceParams(2.0, 0.0, Kernel.power(0.5, 100.0))
    result = embedding_check(Polynomial((3.0, 0.01)), params, DiskGrid(M=12), DiskGrid(M=2))
    assert result["constant"] < 0.2
    assert result["ratio"] > result["constant"]
    assert result["holds"]
