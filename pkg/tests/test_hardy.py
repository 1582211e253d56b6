import numpy as np
import pytest
from hypothesis import given, strategies as st

from shiftlab.hardy import (AliasingError, AnalyticPoly, CauchyKernel, DomainError,
                            backward_shift, boundary_samples, cauchy_kernel, evaluate,
                            inner_product_h2, multiply, poly)

from conftest import coeff_arrays, disc_points


def test_inner_product_orthogonal_by_sign_cancellation():
    assert inner_product_h2(poly(1, 1), poly(1, -1)) == 0


def test_inner_product_monomial():
    z3 = poly(0, 0, 0, 1)
    assert inner_product_h2(z3, z3) == 1


def test_kernel_norm_matches_geometric_series():
    k = cauchy_kernel(0.5, 64)
    oracle = sum(0.25 ** n for n in range(64))
    assert abs(inner_product_h2(k, k) - oracle) < 1e-15
    # the truncated value differs from 4/3 only by the tail (1/4)^64 / (3/4)
    assert abs(inner_product_h2(k, k) - 4 / 3) < 1e-12
    assert k.tail_bound ** 2 == pytest.approx(0.25 ** 64 / 0.75)


def test_inner_product_is_conjugate_linear_in_second_slot():
    f, g = poly(1j, 2), poly(3, -1j)
    assert inner_product_h2(f, g.scaled(2j)) == pytest.approx(np.conj(2j) * inner_product_h2(f, g))


def test_backward_shift_examples():
    np.testing.assert_array_equal(backward_shift(poly(1, 2, 3)).coeffs, [2, 3])
    assert backward_shift(poly(1)).norm() == 0


def test_backward_shift_of_kernel_is_scaled_kernel():
    N = 40
    lam = 0.5
    shifted = backward_shift(cauchy_kernel(lam, N))
    np.testing.assert_array_equal(shifted.coeffs, lam * cauchy_kernel(lam, N - 1).coeffs)


def test_evaluate_examples():
    assert evaluate(poly(1, 1), 0.5) == 1.5
    assert evaluate(poly(0, 1), 1j) == 1j
    k = cauchy_kernel(1 / 3, 64)
    assert abs(evaluate(k, 1 / 3) - 9 / 8) < 1e-12


def test_evaluate_rejects_points_outside_disc():
    with pytest.raises(DomainError):
        evaluate(poly(1, 1), 1.5)
    with pytest.raises(DomainError):
        CauchyKernel(1.0)


def test_boundary_samples_examples():
    np.testing.assert_allclose(boundary_samples(poly(1), 8).values, np.ones(8), atol=1e-15)
    np.testing.assert_allclose(boundary_samples(poly(0, 1), 4).values, [1, 1j, -1, -1j],
                               atol=1e-15)
    s = boundary_samples(poly(1, 1), 4096)
    assert abs(np.mean(np.abs(s.values) ** 2) - 2) < 1e-12


def test_boundary_samples_guards():
    with pytest.raises(AliasingError):
        boundary_samples(AnalyticPoly(np.ones(16)), 8)
    with pytest.raises(ValueError):
        boundary_samples(poly(1), 12)


def test_truncation_bookkeeping():
    k = cauchy_kernel(0.9, 32)
    assert not k.is_exact and k.tail_bound > 0
    cut = poly(1, 2, 3).padded(2)
    assert cut.tail_bound == 3 and cut.trusted_degree == 1
    assert poly(1, 2, 0).padded(2).is_exact


def test_multiply_matches_convolution():
    np.testing.assert_array_equal(multiply(poly(1, 1), poly(1, -1)).coeffs, [1, 0, -1])


@given(coeff_arrays(max_size=64), st.sampled_from([64, 128, 1024]))
def test_parseval_on_grid(c, M):
    f = AnalyticPoly(c)
    energy = np.sum(np.abs(c) ** 2)
    s = boundary_samples(f, M)
    assert abs(np.mean(np.abs(s.values) ** 2) - energy) <= 1e-12 * max(energy, 1e-300) + 1e-300


@given(coeff_arrays())
def test_backward_shift_is_a_contraction(c):
    f = AnalyticPoly(c)
    assert backward_shift(f).norm() <= f.norm()


@given(coeff_arrays(max_size=16), disc_points())
def test_kernel_reproduces_point_values(c, lam):
    f = AnalyticPoly(c)
    k = cauchy_kernel(lam, 32)
    assert inner_product_h2(f, k) == pytest.approx(evaluate(f, lam), rel=1e-12, abs=1e-12)
