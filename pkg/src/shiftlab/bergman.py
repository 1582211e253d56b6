"""Bergman space truncations and sub-Bergman range spaces.

Matrices are written in the orthonormal basis ``e_n = sqrt(n+1) z^n`` of A^2.
Every entry comes from the monomial moments
``int z^p conj(z)^q dA = delta_{pq} / (p+1)``; no quadrature is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hardy import AnalyticPoly
from .range_spaces import PSDReport, RangeSpace, principal_sqrt, psd_report
from .symbols import TrigPoly, one_minus_abs_sq, pythagorean_mate

DISC_MODULUS = "disc-modulus"
HARMONIC = "harmonic-extension"


class Unconverged(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BergmanPoly:
    """Analytic polynomial with the A^2 norm ``sum |c_n|^2 / (n+1)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=complex)))

    @property
    def N(self) -> int:
        return self.coeffs.size

    def norm_sq(self) -> float:
        n = np.arange(self.N)
        return float(np.sum(np.abs(self.coeffs) ** 2 / (n + 1)))

    def coords(self, N: int | None = None) -> np.ndarray:
        """Coordinates in the orthonormal basis, zero-padded to N."""
        N = self.N if N is None else N
        out = np.zeros(N, dtype=complex)
        k = min(N, self.N)
        out[:k] = self.coeffs[:k] / np.sqrt(np.arange(1, k + 1))
        return out

    @classmethod
    def from_coords(cls, x: np.ndarray) -> "BergmanPoly":
        x = np.asarray(x, dtype=complex)
        return cls(x * np.sqrt(np.arange(1, x.size + 1)))


@dataclass(frozen=True, eq=False)
class BergmanToeplitz:
    matrix: np.ndarray
    analytic: np.ndarray = field(default_factory=lambda: np.zeros(0))
    co_analytic: np.ndarray = field(default_factory=lambda: np.zeros(0))
    convention: str = DISC_MODULUS

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def H(self) -> "BergmanToeplitz":
        return BergmanToeplitz(self.matrix.conj().T, np.conj(self.co_analytic),
                               np.conj(self.analytic), self.convention)


def _analytic_matrix(coeffs: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """``<phi e_m, e_n> = phi_hat(n-m) sqrt((m+1)/(n+1))`` for ``n >= m``."""
    T = np.zeros((rows, cols), dtype=complex)
    n = np.arange(rows)[:, None]
    m = np.arange(cols)[None, :]
    for l, c in enumerate(coeffs):
        if c != 0:
            T += np.where(n - m == l, c * np.sqrt((m + 1) / (n + 1)), 0)
    return T


def bergman_toeplitz_analytic(phi: AnalyticPoly, N: int) -> BergmanToeplitz:
    c = phi.coeffs[: phi.degree + 1]
    return BergmanToeplitz(_analytic_matrix(c, N, N), c)


def bergman_toeplitz_co_analytic(phi: AnalyticPoly, N: int) -> BergmanToeplitz:
    return bergman_toeplitz_analytic(phi, N).H


def bergman_toeplitz_modulus(p: AnalyticPoly, q: AnalyticPoly, N: int) -> BergmanToeplitz:
    """Toeplitz matrix of the disc function ``conj(q(z)) p(z)``."""
    pc = p.coeffs[: p.degree + 1]
    qc = q.coeffs[: q.degree + 1]
    n = np.arange(N)[:, None]
    m = np.arange(N)[None, :]
    T = np.zeros((N, N), dtype=complex)
    for j, pj in enumerate(pc):
        for k, qk in enumerate(qc):
            if pj != 0 and qk != 0:
                T += np.where(m + j == n + k, pj * np.conj(qk) * np.sqrt((m + 1) * (n + 1))
                              / (m + j + 1), 0)
    return BergmanToeplitz(T, pc, qc, DISC_MODULUS)


def bergman_toeplitz_harmonic(w: TrigPoly, N: int) -> BergmanToeplitz:
    """Toeplitz matrix of the harmonic extension ``sum_{l>=0} c_l z^l + sum_{l>0} c_{-l} conj(z)^l``."""
    pos = np.array([w.coefficient(l) for l in range(w.m + 1)])
    neg = np.array([0] + [w.coefficient(-l) for l in range(1, w.m + 1)], dtype=complex)
    T = _analytic_matrix(pos, N, N) + _analytic_matrix(np.conj(neg), N, N).conj().T
    return BergmanToeplitz(T, pos, np.conj(neg), HARMONIC)


def _left_product(b: AnalyticPoly, N: int) -> np.ndarray:
    """Exact compression of ``T_{conj(b)} T_b`` (the image of T_b needs N + deg b rows)."""
    c = b.coeffs[: b.degree + 1]
    Tb = _analytic_matrix(c, N + b.degree, N)
    return Tb.conj().T @ Tb


def _right_product(b: AnalyticPoly, N: int) -> np.ndarray:
    """Exact compression of ``T_b T_{conj(b)}`` (``T_{conj(b)}`` lowers degree)."""
    Tb = _analytic_matrix(b.coeffs[: b.degree + 1], N, N)
    return Tb @ Tb.conj().T


def subbergman_gram(b: AnalyticPoly, N: int, side: str = "right") -> np.ndarray:
    """``I - T_b T_{conj(b)}`` (right) or ``I - T_{conj(b)} T_b`` (left)."""
    if side == "right":
        return np.eye(N) - _right_product(b, N)
    if side == "left":
        return np.eye(N) - _left_product(b, N)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def lemma52_difference(b: AnalyticPoly, N: int) -> np.ndarray:
    """``(I - T_{conj(b)} T_b) - T_{conj(z)} (I - T_{conj(b)} T_b) T_z`` compressed to N."""
    L = subbergman_gram(b, N + 1, "left")
    Tz = _analytic_matrix(np.array([0, 1.0]), N + 1, N)
    return L[:N, :N] - Tz.conj().T @ L @ Tz


def lemma52_check(b: AnalyticPoly, N: int, tol: float = 1e-10) -> PSDReport:
    if N < 4 * (b.degree + 1):
        raise ValueError(f"N={N} too small for deg b = {b.degree}")
    return psd_report(lemma52_difference(b, N), tol)


def subbergman_norm(b: AnalyticPoly, f: BergmanPoly, N: int | None = None,
                    rtol: float = 1e-6, max_n: int = 2048) -> float:
    """Range norm of f in ``M((I - T_b T_{conj(b)})^{1/2})`` over A^2.

    With ``N`` given a single truncation is used; otherwise N doubles from
    ``max(32, 4 len(f))`` until the norm changes by less than ``rtol``.
    """
    def at(n):
        root = principal_sqrt(subbergman_gram(b, n, "right"))
        return RangeSpace(root).norm(f.coords(n))

    if N is not None:
        return at(N)
    n = max(32, 4 * f.N)
    prev = at(n)
    while 2 * n <= max_n:
        n *= 2
        cur = at(n)
        if abs(cur - prev) <= rtol * cur:
            return cur
        prev = cur
    raise Unconverged(f"sub-Bergman norm did not settle by N={max_n}")


@dataclass
class ChainReport:
    N: int
    guard: int
    names: tuple
    discrepancies: dict  # (name_i, name_j) -> max-entry difference on the guard block
    entry00: dict
    harmonic_discrepancies: dict
    ratios: np.ndarray = field(repr=False)

    @property
    def kappa(self) -> float:
        """max/min of the probe norm ratios; finite iff the norms are equivalent on the probes."""
        return float(self.ratios.max() / self.ratios.min())


CHAIN_NAMES = ("I-TbbarTb", "T[1-|b|^2]", "T[|a|^2]", "TabarTa")


def identity_chain_probe(b: AnalyticPoly, N: int, n_probes: int = 20, probe_degree: int = 8,
                         seed: int = 0, guard: int | None = None) -> ChainReport:
    """Compare the four operators in ``I - T_bbar T_b = T_{1-|b|^2} = T_{|a|^2} = T_abar T_a``
    on A^2, and measure the equivalence of the norms of ``M((I - T_bbar T_b)^{1/2})``
    and ``M(T_abar)`` on seeded polynomial probes."""
    a = pythagorean_mate(b)
    guard = max(a.degree, b.degree) if guard is None else guard
    mats = {
        CHAIN_NAMES[0]: subbergman_gram(b, N, "left"),
        CHAIN_NAMES[1]: np.eye(N) - bergman_toeplitz_modulus(b, b, N).matrix,
        CHAIN_NAMES[2]: bergman_toeplitz_modulus(a, a, N).matrix,
        CHAIN_NAMES[3]: _left_product(a, N),
    }
    k = N - guard
    disc = {}
    for i, p in enumerate(CHAIN_NAMES):
        for q in CHAIN_NAMES[i + 1:]:
            disc[(p, q)] = float(np.abs(mats[p] - mats[q])[:k, :k].max())
    w_b = one_minus_abs_sq(b)
    w_a = TrigPoly.abs_sq(a)
    harm = {
        CHAIN_NAMES[1]: bergman_toeplitz_harmonic(w_b, N).matrix,
        CHAIN_NAMES[2]: bergman_toeplitz_harmonic(w_a, N).matrix,
    }
    hdisc = {
        (CHAIN_NAMES[1], CHAIN_NAMES[2]): float(np.abs(harm[CHAIN_NAMES[1]]
                                                       - harm[CHAIN_NAMES[2]])[:k, :k].max()),
        (CHAIN_NAMES[0], CHAIN_NAMES[1]): float(np.abs(mats[CHAIN_NAMES[0]]
                                                       - harm[CHAIN_NAMES[1]])[:k, :k].max()),
        (CHAIN_NAMES[2], CHAIN_NAMES[3]): float(np.abs(harm[CHAIN_NAMES[2]]
                                                       - mats[CHAIN_NAMES[3]])[:k, :k].max()),
    }
    root = RangeSpace(principal_sqrt(mats[CHAIN_NAMES[0]]))
    Tabar = RangeSpace(_analytic_matrix(a.coeffs[: a.degree + 1], N, N).conj().T)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(n_probes):
        x = np.zeros(N, dtype=complex)
        x[: probe_degree + 1] = (rng.standard_normal(probe_degree + 1)
                                 + 1j * rng.standard_normal(probe_degree + 1))
        ratios.append(root.norm(x) / Tabar.norm(x))
    entry00 = {name: float(mats[name][0, 0].real) for name in CHAIN_NAMES}
    return ChainReport(N, guard, CHAIN_NAMES, disc, entry00, hdisc, np.array(ratios))
