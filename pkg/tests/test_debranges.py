import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftlab.debranges import (PythagoreanPair, cyclicity_probe, co_analytic_invariance_residual,
                                divisible_pair, f_property_check, hb_embed, hb_inner,
                                hb_norm_crosscheck, hb_shift_moment, invariant_trace_suite,
                                krylov_rank, random_b, random_poly, spectral_density,
                                verify_theorem_C)
from shiftlab.hardy import AnalyticPoly, backward_shift, cauchy_kernel, poly, sup_norm
from shiftlab.model_spaces import lattice_enumerate, tm_basis
from shiftlab.suite import B_CORPUS, b_poly, double_pole_series, exp_series
from shiftlab.symbols import BlaschkeProduct, NotDivisible
from shiftlab.toeplitz import apply_co_analytic

from conftest import seeds

HALF = PythagoreanPair.from_b(poly(0.5, 0.5))
PAIRS = {name: PythagoreanPair.from_b(b_poly(name)) for name in B_CORPUS}


def witness_for_half(f):
    """For b = (1+z)/2, a = (1-z)/2 the witness equation reads
    x_n - x_{n+1} = f_n + f_{n+1}; the square-summable solution is a tail sum."""
    c = np.concatenate([f, [0]])
    s = c[:-1] + c[1:]
    return np.cumsum(s[::-1])[::-1]


def test_hb_norm_examples():
    one = hb_embed(HALF, poly(1))
    np.testing.assert_allclose(one.fplus.coeffs[:2], [1, 0], atol=1e-14)
    assert one.norm_sq == pytest.approx(2, abs=1e-12)
    z = hb_embed(HALF, poly(0, 1))
    np.testing.assert_allclose(z.fplus.coeffs[:3], [2, 1, 0], atol=1e-14)
    assert z.norm_sq == pytest.approx(6, abs=1e-12)


def test_hb_norm_for_zero_b_is_hardy_norm(rng):
    f = random_poly(rng, 7)
    el = hb_embed(PythagoreanPair.from_b(poly(0)), f)
    assert np.abs(el.fplus.coeffs).max() == 0
    assert el.norm_sq == pytest.approx(f.norm() ** 2, rel=1e-14)


@given(seeds, st.floats(0, 0.95), st.floats(0, 2 * math.pi))
def test_hb_norm_for_constant_b_is_scaled_hardy_norm(seed, r, t):
    f = random_poly(np.random.default_rng(seed), 6)
    c = r * np.exp(1j * t)
    el = hb_embed(PythagoreanPair.from_b(poly(c)), f)
    assert el.norm_sq == pytest.approx(f.norm() ** 2 / (1 - r * r), rel=1e-12)


@given(seeds)
def test_hb_witness_matches_tail_sum_oracle(seed):
    f = random_poly(np.random.default_rng(seed), 9)
    el = hb_embed(HALF, f)
    oracle = witness_for_half(f.coeffs)
    np.testing.assert_allclose(el.fplus.coeffs[:10], oracle, atol=1e-12)
    assert np.abs(el.fplus.coeffs[10:]).max() < 1e-12


def test_crosscheck_examples():
    f = random_poly(np.random.default_rng(3), 5)
    assert hb_norm_crosscheck(PythagoreanPair.from_b(poly(0)), f, 64) == f.norm()
    assert hb_norm_crosscheck(HALF, poly(1), 512) == pytest.approx(math.sqrt(2), rel=0.01)
    assert hb_norm_crosscheck(HALF, poly(0, 1), 512) == pytest.approx(math.sqrt(6), rel=0.01)


@pytest.mark.parametrize("name", list(B_CORPUS))
def test_route_agreement_on_corpus(name):
    rng = np.random.default_rng(7)
    pair = PAIRS[name]
    for f in (poly(1), poly(0, 1), random_poly(rng, 4)):
        exact = hb_embed(pair, f).norm
        assert hb_norm_crosscheck(pair, f, 512) == pytest.approx(exact, rel=0.01)


def test_hb_embed_of_series_doubles_until_stable():
    el = hb_embed(PAIRS["z/sqrt2"], lambda N: cauchy_kernel(0.5, N))
    assert el.trajectory and el.N_used >= 128
    # H(z/sqrt2): f_plus = (1/sqrt2) S* f / (1/sqrt2) = S* f
    k = 4 / 3
    assert el.norm_sq == pytest.approx(k + 0.25 * k, rel=1e-12)


def test_spectral_density_examples():
    u = spectral_density(HALF, poly(1), poly(1), 256)
    np.testing.assert_allclose(u.values, 2, atol=1e-12)
    assert u.moment(0) == pytest.approx(2)
    assert abs(u.moment(1)) < 1e-12
    assert spectral_density(HALF, poly(0, 1), poly(0, 1)).moment(0) == pytest.approx(6, abs=1e-8)


@pytest.mark.parametrize("name", ["half(1+z)", "z/sqrt2", "rand-deg5"])
def test_moments_equal_shifted_inner_products(name):
    rng = np.random.default_rng(11)
    pair = PAIRS[name]
    f, g = random_poly(rng, 6), random_poly(rng, 4)
    u = spectral_density(pair, f, g)
    for n in range(8):
        assert abs(u.moment(n) - hb_shift_moment(pair, f, g, n)) <= 1e-10


def test_co_analytic_spectral_identity_examples():
    assert verify_theorem_C(HALF, poly(1), poly(1), poly(1)) <= 1e-12
    assert verify_theorem_C(HALF, poly(0, 1), poly(1), poly(1)) <= 1e-8
    assert verify_theorem_C(HALF, poly(0.5, 0.5), poly(0, 1), poly(1)) <= 1e-6


def test_co_analytic_spectral_identity_by_hand():
    phi = poly(0.3j, 0.5, -0.2)
    f, g = poly(1, 2, 0.5j), poly(0, 1)
    Tf = apply_co_analytic(phi, f)
    lhs = hb_inner(hb_embed(HALF, Tf), hb_embed(HALF, g))
    u = spectral_density(HALF, f, g)
    z = np.exp(2j * np.pi * np.arange(u.M) / u.M)
    phi_star = np.conj(0.3j) + 0.5 * z - 0.2 * z ** 2
    assert abs(lhs - u.integrate(phi_star)) <= 1e-10


def test_f_property_examples():
    nf, nq = f_property_check(HALF, poly(0, 1), BlaschkeProduct.monomial(1))
    assert (nf, nq) == pytest.approx((math.sqrt(6), math.sqrt(2)))
    with pytest.raises(NotDivisible):
        f_property_check(HALF, poly(1), BlaschkeProduct.monomial(1))
    nf, nq = f_property_check(HALF, poly(0.5, -1), BlaschkeProduct((0.5,)))
    assert nq == pytest.approx(hb_embed(HALF, poly(1, -0.5)).norm, rel=1e-12)
    assert nq <= nf + 1e-8


def test_trace_suite_on_z_squared():
    rep = invariant_trace_suite(HALF, BlaschkeProduct.monomial(2), 128)
    assert [s.dim for s in rep.subspaces] == [0, 1, 2]
    assert [s.divisor.degree for s in rep.subspaces] == [0, 1, 2]
    assert rep.passed()


def test_trace_suite_on_two_distinct_zeros():
    rep = invariant_trace_suite(HALF, BlaschkeProduct((1 / 3, 0.5)), 128)
    assert len(rep.subspaces) == 4
    full = [s for s in rep.subspaces if s.dim == 2][0]
    assert sorted(abs(e) for e in full.eigenfactors) == pytest.approx([0.25, 1 / 3])
    assert rep.passed()


def test_trace_suite_for_zero_b_is_the_model_lattice():
    pair = PythagoreanPair.from_b(poly(0))
    rep = invariant_trace_suite(pair, BlaschkeProduct((0.2, -0.5j, 0.4)), 128)
    assert len(rep.subspaces) == 8
    assert rep.passed()


def test_cyclicity_examples():
    rep = cyclicity_probe(HALF, lambda N: cauchy_kernel(0.5, N))
    assert rep.ranks == {128: 1, 256: 1, 512: 1}
    assert rep.verdict == "finite-rank saturation at 1"
    assert cyclicity_probe(HALF, double_pole_series).saturation_rank == 2
    rep = cyclicity_probe(HALF, exp_series, (256,))
    assert rep.ranks == {256: None} and rep.heuristic
    assert "heuristic" in rep.verdict


def test_krylov_rank_of_polynomial_is_degree_plus_one():
    assert krylov_rank(HALF, poly(1, 2, 3, 4).padded(128)) == 4


@settings(max_examples=100)
@given(seeds, st.sampled_from(sorted(B_CORPUS)))
def test_backward_shift_contracts_in_hb(seed, name):
    f = random_poly(np.random.default_rng(seed), 8)
    pair = PAIRS[name]
    assert hb_embed(pair, backward_shift(f)).norm <= hb_embed(pair, f).norm + 1e-8


@given(seeds, st.sampled_from(sorted(B_CORPUS)))
def test_co_analytic_multiplier_bound(seed, name):
    rng = np.random.default_rng(seed)
    phi, f = random_poly(rng, 5), random_poly(rng, 8)
    pair = PAIRS[name]
    lhs = hb_embed(pair, apply_co_analytic(phi, f)).norm
    assert lhs <= sup_norm(phi) * hb_embed(pair, f).norm + 1e-8


@settings(max_examples=10)
@given(seeds, st.sampled_from(["half(1+z)", "z/sqrt2", "rand-deg3"]))
def test_lattice_inclusion(seed, name):
    rng = np.random.default_rng(seed)
    pair = PAIRS[name]
    K = tm_basis(BlaschkeProduct((0.0, 0.5, -0.3j)), 128)
    for _ in range(10):
        phi = random_poly(rng, int(rng.integers(0, 6)))
        for E in lattice_enumerate(K):
            assert co_analytic_invariance_residual(pair, E, phi) <= 1e-7


@given(seeds, st.sampled_from(sorted(B_CORPUS)), st.builds(complex, st.floats(-2, 2),
                                                           st.floats(-2, 2)))
def test_density_is_sesquilinear_and_nonnegative(seed, name, s):
    rng = np.random.default_rng(seed)
    pair = PAIRS[name]
    f1, f2, g = random_poly(rng, 5), random_poly(rng, 3), random_poly(rng, 4)
    M = 1024
    lhs = spectral_density(pair, f1 + f2.scaled(s), g, M).values
    rhs = (spectral_density(pair, f1, g, M).values
           + s * spectral_density(pair, f2, g, M).values)
    scale = max(1.0, np.abs(lhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-10 * scale
    lhs = spectral_density(pair, g, f1 + f2.scaled(s), M).values
    rhs = (spectral_density(pair, g, f1, M).values
           + np.conj(s) * spectral_density(pair, g, f2, M).values)
    assert np.abs(lhs - rhs).max() <= 1e-10 * scale
    uff = spectral_density(pair, f1, f1, M).values
    assert np.abs(uff.imag).max() <= 1e-12 * max(1.0, np.abs(uff).max())
    assert uff.real.min() >= -1e-9


@settings(max_examples=30)
@given(seeds, st.sampled_from(sorted(B_CORPUS)))
def test_f_property_random(seed, name):
    f, theta = divisible_pair(np.random.default_rng(seed))
    nf, nq = f_property_check(PAIRS[name], f, theta)
    assert nq <= nf + 1e-8
