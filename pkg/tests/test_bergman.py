import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shiftlab.bergman import (CHAIN_NAMES, BergmanPoly, bergman_toeplitz_analytic,
                              bergman_toeplitz_co_analytic, bergman_toeplitz_modulus,
                              identity_chain_probe, lemma52_check, lemma52_difference,
                              subbergman_gram, subbergman_norm)
from shiftlab.debranges import random_b, random_poly
from shiftlab.hardy import poly
from shiftlab.suite import B_CORPUS, b_poly

from conftest import seeds

R = 1 / math.sqrt(2)


def polar_inner(p, q, n_r=64, n_t=128):
    """<p, q>_{A^2} by Gauss-Legendre in r and the trapezoid rule in theta."""
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1)
    wr = 0.5 * w
    t = 2 * np.pi * np.arange(n_t) / n_t
    z = r[:, None] * np.exp(1j * t)[None, :]
    vals = p(z) * np.conj(q(z)) * r[:, None]
    return 2 * np.sum(wr[:, None] * vals) / n_t


def test_bergman_norm_against_polar_quadrature(rng):
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    f = BergmanPoly(c)
    val = polar_inner(lambda z: np.polyval(c[::-1], z), lambda z: np.polyval(c[::-1], z))
    assert f.norm_sq() == pytest.approx(val.real, rel=1e-12)


def test_analytic_toeplitz_entries_against_quadrature():
    N = 5
    T = bergman_toeplitz_analytic(poly(0.3, -1, 0.5j), N).matrix
    e = [lambda z, n=n: math.sqrt(n + 1) * z ** n for n in range(N)]
    phi = lambda z: 0.3 - z + 0.5j * z ** 2
    for n in range(N):
        for m in range(N):
            val = polar_inner(lambda z: phi(z) * e[m](z), e[n])
            assert abs(T[n, m] - val) < 1e-12


def test_weighted_shift_examples():
    N = 6
    S = bergman_toeplitz_analytic(poly(0, 1), N).matrix
    n = np.arange(N - 1)
    np.testing.assert_allclose(np.diag(S, -1), np.sqrt((n + 1) / (n + 2)), atol=1e-15)
    assert np.count_nonzero(S - np.diag(np.diag(S, -1), -1)) == 0
    np.testing.assert_array_equal(bergman_toeplitz_analytic(poly(1), N).matrix, np.eye(N))
    T = bergman_toeplitz_analytic(poly(0, 0, 1), 3).matrix
    expected = np.zeros((3, 3))
    expected[2, 0] = math.sqrt(1 / 3)
    np.testing.assert_allclose(T, expected, atol=1e-15)


def test_co_analytic_is_adjoint():
    p = poly(0.2, 1j, -0.4)
    A = bergman_toeplitz_analytic(p, 8).matrix
    np.testing.assert_array_equal(bergman_toeplitz_co_analytic(p, 8).matrix, A.conj().T)


def test_subbergman_gram_examples():
    N = 40
    n = np.arange(N)
    left = subbergman_gram(poly(0, R), N, "left")
    np.testing.assert_allclose(np.diag(left).real, (n + 3) / (2 * (n + 2)), atol=1e-14)
    np.testing.assert_allclose(np.diag(left)[:3].real, [3 / 4, 2 / 3, 5 / 8])
    np.testing.assert_allclose(subbergman_gram(poly(0), N, "left"), np.eye(N))
    c = 0.3 - 0.4j
    np.testing.assert_allclose(subbergman_gram(poly(c), N, "right"), (1 - abs(c) ** 2) * np.eye(N),
                               atol=1e-15)


def test_weighted_shift_closed_form():
    N = 64
    S = bergman_toeplitz_analytic(poly(0, 1), N + 1).matrix[:, :N]
    n = np.arange(N)
    np.testing.assert_allclose(S.conj().T @ S, np.diag((n + 1) / (n + 2)), atol=1e-14)


def test_shift_compression_inequality_examples():
    N = 64
    n = np.arange(N)
    D = lemma52_difference(poly(0, R), N)
    np.testing.assert_allclose(np.diag(D).real, (n + 5) / (2 * (n + 2) * (n + 3)), atol=1e-14)
    assert lemma52_check(poly(0, R), N).is_psd
    D0 = lemma52_difference(poly(0), N)
    np.testing.assert_allclose(D0, np.diag(1 / (n + 2)), atol=1e-14)
    assert lemma52_check(poly(0.5, 0.5), N).is_psd


@pytest.mark.parametrize("N", [64, 128, 256])
def test_shift_compression_inequality_on_corpus(N):
    for name in B_CORPUS:
        assert lemma52_check(b_poly(name), N).is_psd, name


def test_subbergman_norm_examples(rng):
    c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    f = BergmanPoly(c)
    assert subbergman_norm(poly(0), f, 32) == pytest.approx(math.sqrt(f.norm_sq()), rel=1e-12)
    assert subbergman_norm(poly(0.6), f, 32) == pytest.approx(math.sqrt(f.norm_sq() / 0.64),
                                                             rel=1e-12)
    right = subbergman_gram(poly(0, R), 32, "right")
    assert np.count_nonzero(right - np.diag(np.diag(right))) == 0
    expected = 1 / math.sqrt(right[0, 0].real)
    assert subbergman_norm(poly(0, R), BergmanPoly([1.0]), 32) == pytest.approx(expected)
    assert subbergman_norm(poly(0, R), BergmanPoly([1.0])) == pytest.approx(expected, rel=1e-6)


def test_chain_probe_examples():
    rep = identity_chain_probe(poly(0, R), 64)
    assert rep.entry00["I-TbbarTb"] == pytest.approx(0.75, abs=1e-15)
    assert rep.entry00["TabarTa"] == pytest.approx(0.5, abs=1e-15)
    assert rep.discrepancies[("I-TbbarTb", "TabarTa")] == pytest.approx(0.25, abs=1e-12)
    assert math.isfinite(rep.kappa) and rep.kappa >= 1
    zero = identity_chain_probe(poly(0), 32)
    assert max(zero.discrepancies.values()) == 0
    const = identity_chain_probe(poly(0.6), 32)
    assert const.discrepancies[(CHAIN_NAMES[0], CHAIN_NAMES[1])] < 1e-15


def test_chain_probe_kappa_stable_under_doubling():
    for b in (poly(0, R), poly(0.5, 0.5)):
        k64 = identity_chain_probe(b, 64).kappa
        k128 = identity_chain_probe(b, 128).kappa
        assert abs(k128 - k64) <= 0.05 * k64


@given(seeds)
def test_composition_rule_for_disc_modulus(seed):
    rng = np.random.default_rng(seed)
    b = random_poly(rng, int(rng.integers(0, 5)))
    N = 32
    guard = b.degree
    Tb = bergman_toeplitz_analytic(b, N + guard).matrix[:, :N]
    mod = bergman_toeplitz_modulus(b, b, N).matrix
    k = N - guard
    assert np.abs((Tb.conj().T @ Tb - mod)[:k, :k]).max() <= 1e-12


@settings(max_examples=20)
@given(seeds, st.integers(0, 8))
def test_shift_compression_inequality_random_bounded_b(seed, degree):
    b = random_b(np.random.default_rng(seed), degree, 1.0)
    assert lemma52_check(b, 64).is_psd
