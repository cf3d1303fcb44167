"""
Tests for the Q_K and H^inf test-function families
"""

import numpy as np
import pytest

from functions.verification import DEBUG_TAMPER, certificate_sweep, delta_sweep
from models.errors import CertificationError, DomainError
from models.testfn import (
    BoundarySequence, build_hinf_delta_family, build_hinf_test, build_l, build_qk_test,
    closed_form_check, closed_form_value, extremal_growth, qk_coefficients, verify_vanishing,
)


@pytest.mark.parametrize("kind, expected", [
    ("f", (3.0, -3.0, 1.0)),
    ("g", (1.5, -2.5, 1.0)),
    ("h", (1.0, -2.0, 1.0)),
])
def test_coefficients_at_gamma_one(kind, expected):
    assert qk_coefficients(kind, 1.0, 0) == pytest.approx(expected)


def test_coefficients_carry_the_rising_products():
    # gamma = 2, n = 1: P1 = 3*4, P2 = 2*4, P3 = 2*3 and G = 3
    assert qk_coefficients("h", 2.0, 1) == pytest.approx((12.0, -16.0, 6.0))
    assert qk_coefficients("f", 2.0, 1) == pytest.approx((20.0, -20.0, 6.0))


def test_unknown_family_kind():
    with pytest.raises(DomainError):
        qk_coefficients("k", 1.0, 0)


def test_l_functions_equal_one_at_their_base_point():
    for i in (1, 2, 3):
        assert build_l(i, 0.5, 1.0)(0.5) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        build_l(4, 0.5, 1.0)
    with pytest.raises(DomainError):
        build_l(1, 1.0, 1.0)


def test_f_family_value_at_base_point():
    family = build_qk_test("f", 0.5, 1.0, 0)
    assert family.evaluate(0.5) == pytest.approx(1.0)
    assert family.nonvanishing_order == 0
    assert family.vanishing_orders == (1, 2)


def test_h_family_keeps_order_n_plus_two():
    family = build_qk_test("h", 0.9j, 0.5, 1)
    assert family.nonvanishing_order == 3
    assert family.vanishing_orders == (1, 2)
    verify_vanishing(family)
    assert closed_form_check(family).ok


@pytest.mark.parametrize("kind", ["f", "g", "h"])
@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_certificates_near_the_boundary(kind, gamma, n):
    z = 0.999 * np.exp(2j * np.pi / 3)
    family = build_qk_test(kind, z, gamma, n)
    cert = verify_vanishing(family)
    assert all(r <= 1e-9 for r in cert.residuals.values())
    value = closed_form_value(family)
    assert complex(family.derivative_at(family.nonvanishing_order, z)) == pytest.approx(value, rel=1e-9)


def test_certificate_sweep_passes():
    result = certificate_sweep([0.5, 1.0, 2.0], [0, 1, 2], BoundarySequence(), workers=2)
    assert result["families"] == 324
    assert result["passed"], result["failures"]
    assert result["worst_vanishing_residual"] <= 1e-9


def test_tampered_weights_fail_the_certificate():
    family = build_qk_test("f", 0.9, 1.0, 0, coefficient_scale=DEBUG_TAMPER)
    assert family.coefficients[1] == pytest.approx(-2.9)
    with pytest.raises(CertificationError):
        verify_vanishing(family)
    result = certificate_sweep([1.0], [0], BoundarySequence(), coefficient_scale=DEBUG_TAMPER, workers=1)
    assert not result["passed"]


def test_hinf_family_values():
    assert build_hinf_test(1, 0.0)(0.3) == pytest.approx(1.0)
    assert build_hinf_test(2, 0.5)(0.5) == pytest.approx(4.0 / 9.0)
    assert abs(build_hinf_test(3, 0.99).evaluate(0.0)) <= 1.0
    with pytest.raises(DomainError):
        build_hinf_test(0, 0.5)


@pytest.mark.parametrize("a", [0.5, 0.99 * np.exp(1j), -0.9999])
def test_delta_family_derivative_pattern(a):
    family = build_hinf_delta_family((0, 1, 2, 3), a)
    s = 1.0 - abs(a) ** 2
    for member in family:
        for j in family.targets:
            expected = np.conj(a) ** j / s ** j if j == member.order else 0.0
            scale = max(1.0, abs(np.conj(a) ** j / s ** j))
            assert abs(complex(member.derivative_at(j, a)) - expected) <= 1e-6 * scale
        assert np.isfinite(member.bound)


def test_delta_family_weights_do_not_depend_on_the_base_point():
    near = build_hinf_delta_family((0, 1, 2), 0.1)
    far = build_hinf_delta_family((0, 1, 2), 0.999j)
    assert near[1].coefficients == pytest.approx(far[1].coefficients)
    assert near.condition == pytest.approx(far.condition)


def test_delta_family_rejects_bad_targets():
    with pytest.raises(DomainError):
        build_hinf_delta_family((1, 1), 0.5)
    with pytest.raises(DomainError):
        build_hinf_delta_family((0, 1), 1.0)


def test_delta_sweep_passes():
    result = delta_sweep([0, 1, 2, 3], BoundarySequence())
    assert result["points"] == 12
    assert result["passed"]


def test_boundary_sequence_layout_and_validation():
    seq = BoundarySequence((0.5, 0.9), (0.0, 0.25))
    assert seq.points == pytest.approx([0.5, 0.9, 0.5j, 0.9j])
    with pytest.raises(DomainError):
        BoundarySequence((0.9, 0.5))
    with pytest.raises(DomainError):
        BoundarySequence((0.5, 1.0))


def test_extremal_growth_derivative():
    h = extremal_growth(2.0)
    assert h(0.0) == pytest.approx(0.0)
    assert h.derivative_at(1, 0.5) == pytest.approx(4.0)
    series = extremal_growth(0.5)
    assert series.derivative_at(1, 0.5) == pytest.approx(2 ** 0.5, rel=1e-8)
    with pytest.raises(DomainError):
        extremal_growth(0.0)
