"""
Tests for the analytic-function algebra
"""

import math

import numpy as np
import pytest

from models.errors import DomainError, RepresentationError
from models.funcalg import (
    MobiusPowerSum, MobiusPowerTerm, Polynomial, PowerSeries, eval_derivative, evaluate,
    finite_difference_derivative, from_literal, linear_combine,
)


def exp_series(rho_max=0.9):
    return PowerSeries(tuple(1.0 / math.factorial(k) for k in range(31)), rho_max)


def test_polynomial_values_and_derivatives():
    p = Polynomial((1.0, 2.0, 3.0))
    assert evaluate(p, 0.5) == pytest.approx(2.75)
    assert eval_derivative(p, 1, 0.5) == pytest.approx(5.0)
    assert eval_derivative(p, 2, 0.3 + 0.2j) == pytest.approx(6.0)
    assert eval_derivative(p, 3, 0.1) == 0


def test_polynomial_trims_trailing_zeros():
    assert Polynomial((1.0, 0.0, 0.0)).degree == 0
    assert Polynomial(()).coeffs == (0j,)


def test_array_input_keeps_shape():
    z = np.array([[0.1, 0.2], [0.3j, -0.4]])
    values = Polynomial.identity().evaluate(z)
    assert values.shape == (2, 2)
    assert np.allclose(values, z)


def test_mobius_derivatives_match_rising_factorials():
    f = MobiusPowerSum.single(1.0, 0.5, 1.0)
    for k in range(5):
        assert eval_derivative(f, k, 0.0) == pytest.approx(math.factorial(k) * 0.5 ** k)


def test_mobius_like_terms_merge_and_cancel():
    f = MobiusPowerSum((MobiusPowerTerm(1.0, 0.3, 2.0), MobiusPowerTerm(-1.0, 0.3, 2.0),
                        MobiusPowerTerm(2.0, 0.1j, 1.0)))
    assert len(f.terms) == 1
    assert f(0.2) == pytest.approx(2.0 / (1 + 0.1j * 0.2))


def test_mobius_rejects_bad_parameters():
    with pytest.raises(DomainError):
        MobiusPowerTerm(1.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        MobiusPowerTerm(1.0, 1.5, 1.0)


def test_power_series_matches_exponential():
    f = exp_series()
    assert f(0.5) == pytest.approx(math.exp(0.5), rel=1e-12)
    assert eval_derivative(f, 3, -0.4) == pytest.approx(math.exp(-0.4), rel=1e-12)


def test_power_series_guard_radius():
    with pytest.raises(DomainError):
        exp_series(0.5)(0.6)


def test_power_series_tail_rejects_slow_decay():
    # coefficients that do not decay cannot be summed to tolerance near the guard radius
    f = PowerSeries(tuple([1.0] * 10), 0.99)
    with pytest.raises(DomainError):
        f(0.98)


def test_exact_polynomial_series_has_no_tail():
    f = PowerSeries((1.0, 2.0, 0.0), 0.999)
    assert f.tail_bound(2, 0.99) == 0.0
    assert f(0.99) == pytest.approx(2.98)


def test_derivative_order_cap_and_disk():
    p = Polynomial.identity()
    with pytest.raises(DomainError):
        p.derivative_at(13, 0.0)
    with pytest.raises(DomainError):
        p.derivative_at(-1, 0.0)
    with pytest.raises(DomainError):
        p(1.0)


def test_linear_combine_representations():
    q = linear_combine([2.0, -1.0], [Polynomial((1.0, 1.0)), Polynomial((0.0, 2.0, 1.0))])
    assert isinstance(q, Polynomial)
    assert q.coeffs == (2.0, 0.0, -1.0)

    s = linear_combine([1.0, 1.0], [Polynomial((1.0,)), exp_series()])
    assert isinstance(s, PowerSeries)
    assert s(0.2) == pytest.approx(1.0 + math.exp(0.2))

    m = linear_combine([3.0, 1.0], [Polynomial.constant(1.0), MobiusPowerSum.single(1.0, 0.5, 1.0)])
    assert isinstance(m, MobiusPowerSum)
    assert m(0.4) == pytest.approx(3.0 + 1.0 / 0.8)


def test_linear_combine_rejects_mixed_kinds():
    with pytest.raises(RepresentationError):
        linear_combine([], [])
    with pytest.raises(RepresentationError):
        linear_combine([1.0, 1.0], [Polynomial.identity(), MobiusPowerSum.single(1.0, 0.5, 1.0)])
    with pytest.raises(RepresentationError):
        linear_combine([1.0, 1.0], [exp_series(), MobiusPowerSum.single(1.0, 0.5, 1.0)])


def test_symbolic_derivative_and_dilation():
    f = MobiusPowerSum.single(0.5, 0.5j, 2.0)
    z = 0.3 - 0.1j
    assert f.derivative()(z) == pytest.approx(f.derivative_at(1, z))
    assert f.dilate(0.5)(z) == pytest.approx(f(0.5 * z))
    p = Polynomial((1.0, -1.0, 0.5))
    assert p.dilate(0.7)(z) == pytest.approx(p(0.7 * z))
    assert exp_series().dilate(0.5)(0.9) == pytest.approx(math.exp(0.45))


def test_finite_difference_agrees_with_exact_derivatives():
    f = MobiusPowerSum.single(1.0, -0.4, 0.5)
    z = 0.5 + 0.2j
    for k in (1, 2, 3):
        assert finite_difference_derivative(f, k, z) == pytest.approx(f.derivative_at(k, z), rel=1e-8)


def test_finite_difference_stencil_must_stay_inside():
    with pytest.raises(DomainError):
        finite_difference_derivative(Polynomial.identity(), 1, 0.99, h=0.05)


def test_literals():
    f = from_literal({"mobius": [{"c": [1.0, 0.0], "a": [0.0, 0.5], "beta": 2}]})
    assert f(0.2) == pytest.approx(1.0 / (1 + 0.5j * 0.2) ** 2)
    p = Polynomial((1.0, 2.0 + 1.0j))
    assert p.to_literal() == {"poly": [1.0, [2.0, 1.0]]}
    with pytest.raises(RepresentationError):
        from_literal({"rational": [1, 2]})


@pytest.mark.parametrize("seed", range(6))
def test_random_mobius_sums_agree_with_finite_differences(seed):
    rng = np.random.default_rng(seed)
    terms = tuple(
        MobiusPowerTerm(complex(rng.normal(), rng.normal()),
                        complex(rng.uniform(0.5, 0.9) * np.exp(2j * np.pi * rng.uniform())),
                        float(rng.uniform(0.5, 3.0)))
        for _ in range(int(rng.integers(1, 4)))
    )
    f = MobiusPowerSum(terms)
    for _ in range(4):
        z = complex(0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()))
        for k in range(1, 5):
            exact = f.derivative_at(k, z)
            scale = sum(abs(complex(t.values(k, np.asarray(z)))) for t in f.terms)
            assert abs(finite_difference_derivative(f, k, z) - exact) <= 1e-6 * scale, (k, z)


@pytest.mark.parametrize("f", [
    Polynomial((1.0, -2.0, 0.5j, 0.25)),
    MobiusPowerSum((MobiusPowerTerm(1.0, 0.3 + 0.4j, 1.5), MobiusPowerTerm(-0.5, -0.6, 2.0))),
    exp_series(),
], ids=["polynomial", "mobius", "series"])
def test_rotation_composes_with_the_angle(f):
    theta = 1.1
    z = np.array([0.0, 0.4 - 0.3j, -0.7j])
    assert np.allclose(f.rotate(theta)(z), f(np.exp(1j * theta) * z), rtol=1e-12, atol=1e-14)
    assert np.allclose(f.rotate(theta).derivative_at(2, z),
                       np.exp(2j * theta) * f.derivative_at(2, np.exp(1j * theta) * z), rtol=1e-12, atol=1e-14)
