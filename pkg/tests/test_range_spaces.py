import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from shiftlab.hardy import poly
from shiftlab.range_spaces import (NotInRange, NotPSD, RangeSpace, douglas_contraction,
                                   douglas_equal, principal_sqrt, psd_report, range_norm)
from shiftlab.suite import _random_unitary, douglas_contraction_trial, douglas_equal_trial
from shiftlab.symbols import pythagorean_mate
from shiftlab.toeplitz import LaurentSymbol, analytic_toeplitz, toeplitz_truncation

from conftest import seeds


def test_range_norm_examples():
    assert range_norm(np.diag([1, 0.5]), np.array([0, 1])) == pytest.approx(2)
    assert range_norm(np.diag([1.0, 0.0]), np.array([1, 0])) == pytest.approx(1)
    with pytest.raises(NotInRange):
        range_norm(np.diag([1.0, 0.0]), np.array([0, 1]))


def test_range_space_rank_and_inner():
    A = np.array([[1, 1], [1, 1]], dtype=complex)
    M = RangeSpace(A)
    assert M.rank == 1
    h = np.array([2.0, 2.0])
    assert M.inner(h, h) == pytest.approx(M.norm(h) ** 2)


def test_douglas_equal_examples(rng):
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert douglas_equal(A, A @ _random_unitary(rng, 4))
    assert not douglas_equal(np.eye(3), 2 * np.eye(3))


def test_douglas_equal_hardy_mate_factorization():
    b = poly(0.5, 0.5)
    a = pythagorean_mate(b)
    N, guard = 64, 2
    A = toeplitz_truncation(LaurentSymbol.co_analytic(a), N).matrix
    Tb = analytic_toeplitz(b, N)
    B = principal_sqrt(np.eye(N) - Tb.conj().T @ Tb)
    k = N - guard
    assert douglas_equal(A[:k], B[:k], 1e-10)


def test_douglas_contraction_examples(rng):
    B = rng.standard_normal((3, 3))
    rep = douglas_contraction(np.zeros((3, 3)), np.eye(3), B)
    assert rep.is_psd
    assert rep.min_eigenvalue == pytest.approx(np.linalg.eigvalsh(B @ B.T)[0])
    rep = douglas_contraction(2 * np.eye(2), np.eye(2), np.eye(2))
    assert rep.verdict == "not psd" and rep.min_eigenvalue == pytest.approx(-3)


def test_backward_shift_contracts_hardy_hb():
    b = poly(0.5, 0.5)
    N = 64
    Tb = analytic_toeplitz(b, N + 1)
    G = np.eye(N + 1) - Tb @ Tb.conj().T
    root = principal_sqrt(G)
    C = np.eye(N, N + 1, k=1)  # S* truncated
    rep = douglas_contraction(C, root, root[:N])
    assert rep.is_psd


def test_principal_sqrt_examples():
    np.testing.assert_allclose(principal_sqrt(np.diag([4.0, 9.0])), np.diag([2, 3]), atol=1e-15)
    np.testing.assert_array_equal(principal_sqrt(np.zeros((2, 2))), np.zeros((2, 2)))
    Tb = analytic_toeplitz(poly(0, 1 / math.sqrt(2)), 4)
    G = np.eye(4) - Tb @ Tb.conj().T
    R = principal_sqrt(G)
    np.testing.assert_allclose(R @ R, G, atol=1e-12)
    np.testing.assert_allclose(R, scipy.linalg.sqrtm(G), atol=1e-12)
    with pytest.raises(NotPSD):
        principal_sqrt(-np.eye(2))


def test_psd_report_clips_within_tolerance():
    assert psd_report(np.diag([1, -1e-12])).is_psd
    assert not psd_report(np.diag([1, -1e-9])).is_psd


@given(seeds)
def test_douglas_equal_soundness(seed):
    out = douglas_equal_trial(np.random.default_rng(seed))
    assert out["verdict"] == out["engineered_equal"]
    assert out["probes_agree"] == out["verdict"]


@given(seeds)
def test_contraction_transfer(seed):
    out = douglas_contraction_trial(np.random.default_rng(seed))
    assert out["psd"] == (out["scale"] < 1)
    if out["psd"]:
        assert out["probes_hold"]


@settings(max_examples=30)
@given(seeds)
def test_principal_sqrt_fixes_projections(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    r = int(rng.integers(0, n + 1))
    Q = _random_unitary(rng, n)[:, :r]
    P = Q @ Q.conj().T
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    assert np.abs(principal_sqrt(P) - P).max() <= 1e-10
