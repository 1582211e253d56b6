"""Toeplitz operators on H^2 with trigonometric-polynomial symbols.

Matrix convention: entry ``(n, k)`` of ``T_phi`` is ``phi_hat(n - k)``, so
analytic symbols give lower-triangular matrices and co-analytic symbols upper
triangular ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .hardy import DEFAULT_GRID, AnalyticPoly, unit_roots


class InconclusiveError(ValueError):
    """The guard band is too small for the requested exactness claim."""


@dataclass(frozen=True, eq=False)
class LaurentSymbol:
    """Finitely supported symbol ``sum_{l=-m}^{m} phi_hat(l) z^l`` on the circle."""

    coeffs: np.ndarray  # phi_hat(-m) .. phi_hat(m)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("Laurent symbol needs an odd number of coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_parts(cls, analytic=(), co_analytic=()) -> "LaurentSymbol":
        """``analytic[l]`` multiplies ``z^l`` (l >= 0); ``co_analytic[l]``
        multiplies ``conj(z)^l`` (l >= 1; entry 0 is ignored)."""
        an = np.asarray(analytic, dtype=complex)
        co = np.asarray(co_analytic, dtype=complex)
        m = max(an.size - 1, co.size - 1, 0)
        c = np.zeros(2 * m + 1, dtype=complex)
        c[m: m + an.size] = an
        for l in range(1, co.size):
            c[m - l] += co[l]
        return cls(c)

    @classmethod
    def analytic(cls, p: AnalyticPoly) -> "LaurentSymbol":
        return cls.from_parts(analytic=p.coeffs[: p.degree + 1])

    @classmethod
    def co_analytic(cls, p: AnalyticPoly) -> "LaurentSymbol":
        """The symbol ``conj(p)`` on the circle."""
        c = np.conj(p.coeffs[: p.degree + 1])
        return cls.from_parts(analytic=c[:1], co_analytic=c)

    @property
    def m(self) -> int:
        return self.coeffs.size // 2

    def __getitem__(self, l: int) -> complex:
        return complex(self.coeffs[l + self.m]) if abs(l) <= self.m else 0j

    @property
    def is_analytic(self) -> bool:
        return not np.any(self.coeffs[: self.m])

    @property
    def analytic_part(self) -> np.ndarray:
        return self.coeffs[self.m:]

    @property
    def co_analytic_part(self) -> np.ndarray:
        """Coefficients of ``conj(z)^l`` for l = 1..m."""
        return self.coeffs[: self.m][::-1]

    def conjugate(self) -> "LaurentSymbol":
        """Pointwise complex conjugate ``conj(phi)`` (the adjoint's symbol)."""
        return LaurentSymbol(np.conj(self.coeffs[::-1]))

    def reflected(self) -> "LaurentSymbol":
        """``phi*(z) = conj(phi(conj(z)))``: conjugate every coefficient."""
        return LaurentSymbol(np.conj(self.coeffs))

    def values(self, M: int = DEFAULT_GRID) -> np.ndarray:
        buf = np.zeros(M, dtype=complex)
        for l in range(-self.m, self.m + 1):
            buf[l % M] += self[l]
        return M * np.fft.ifft(buf)

    def sup_norm(self, M: int = DEFAULT_GRID) -> float:
        return float(np.abs(self.values(M)).max())

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        ls = np.arange(-self.m, self.m + 1)
        return np.sum(self.coeffs * z[..., None] ** ls, axis=-1)


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    N: int
    symbol: LaurentSymbol

    @cached_property
    def matrix(self) -> np.ndarray:
        N, s = self.N, self.symbol
        col = np.array([s[n] for n in range(N)])
        row = np.array([s[-k] for k in range(N)])
        return scipy.linalg.toeplitz(col, row)

    @property
    def H(self) -> "ToeplitzMatrix":
        return ToeplitzMatrix(self.N, self.symbol.conjugate())

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-vector product by summing the (at most 2m+1) nonzero diagonals."""
        x = np.asarray(x, dtype=complex)
        if x.shape[0] != self.N:
            raise ValueError(f"vector length {x.shape[0]} does not match N={self.N}")
        out = np.zeros_like(x)
        s = self.symbol
        for l in range(-s.m, s.m + 1):
            c = s[l]
            if c == 0 or abs(l) >= self.N:
                continue
            if l >= 0:
                out[l:] += c * x[: self.N - l]
            else:
                out[: self.N + l] += c * x[-l:]
        return out

    def __matmul__(self, other):
        if isinstance(other, ToeplitzMatrix):
            return self.matrix @ other.matrix
        return self.matrix @ other


def toeplitz_truncation(phi: LaurentSymbol, N: int) -> ToeplitzMatrix:
    if N < 1:
        raise ValueError("truncation size must be positive")
    return ToeplitzMatrix(N, phi)


def analytic_toeplitz(p: AnalyticPoly, N: int) -> np.ndarray:
    """Dense ``N x N`` truncation of ``T_p`` for an analytic polynomial p."""
    return toeplitz_truncation(LaurentSymbol.analytic(p), N).matrix


def apply_co_analytic(b: AnalyticPoly, f: AnalyticPoly) -> AnalyticPoly:
    """``T_{conj(b)} f``: coefficient n is ``sum_j conj(b_j) f_{n+j}``.

    Exact for polynomial f.  For a truncated series the top ``deg b``
    coefficients lose exactness.
    """
    db = b.degree
    bc = np.conj(b.coeffs[: db + 1])
    N = f.N
    out = np.zeros(N, dtype=complex)
    for j in range(min(db + 1, N)):
        if bc[j] != 0:
            out[: N - j] += bc[j] * f.coeffs[j:]
    if f.is_exact:
        return AnalyticPoly(out)
    tail = float(np.abs(bc).sum()) * f.tail_bound
    return AnalyticPoly(out, max(f.trusted_degree - db, 0), tail)


def apply_analytic(p: AnalyticPoly, f: AnalyticPoly, N: int | None = None) -> AnalyticPoly:
    """``T_p f = p f`` truncated to N (default: same length as f)."""
    from .hardy import multiply

    return multiply(p, f, f.N if N is None else N)


def multiplier_norm_estimate(phi: LaurentSymbol | AnalyticPoly, N: int) -> float:
    """Largest singular value of the N-truncation of ``T_phi`` (analytic phi)."""
    if isinstance(phi, AnalyticPoly):
        phi = LaurentSymbol.analytic(phi)
    if not phi.is_analytic:
        raise ValueError("multiplier norm estimate needs an analytic symbol")
    T = toeplitz_truncation(phi, N).matrix
    # the top singular values cluster as N grows, which makes iterative
    # solvers crawl; a dense SVD is faster at every size used here
    return float(scipy.linalg.svdvals(T)[0])


def composition_check(psi: AnalyticPoly, phi: AnalyticPoly, N: int, guard: int) -> float:
    """Max-entry residual of ``T_{conj(psi)} T_phi - T_{conj(psi) phi}`` on the
    leading ``(N - guard) x (N - guard)`` block.

    The truncated product drops the terms that route through indices >= N,
    which only touch the last ``deg psi`` rows; so a guard of at least
    ``deg psi`` makes the block exact.
    """
    if guard < psi.degree or guard >= N:
        raise InconclusiveError(
            f"guard {guard} cannot certify symbols of degree {psi.degree} at N={N}")
    Tpsi_bar = toeplitz_truncation(LaurentSymbol.co_analytic(psi), N).matrix
    Tphi = analytic_toeplitz(phi, N)
    symbol = _product_symbol(psi, phi)
    Tprod = toeplitz_truncation(symbol, N).matrix
    k = N - guard
    return float(np.abs((Tpsi_bar @ Tphi - Tprod)[:k, :k]).max())


def _product_symbol(psi: AnalyticPoly, phi: AnalyticPoly) -> LaurentSymbol:
    """Laurent coefficients of ``conj(psi) phi`` on the circle."""
    p = psi.coeffs[: psi.degree + 1]
    q = phi.coeffs[: phi.degree + 1]
    m = max(p.size, q.size) - 1
    c = np.zeros(2 * m + 1, dtype=complex)
    for j, pj in enumerate(p):
        for k, qk in enumerate(q):
            c[m + k - j] += np.conj(pj) * qk
    return LaurentSymbol(c)


def kernel_eigen_residual(phi: AnalyticPoly, lam: complex, N: int) -> float:
    """``|| T_{conj(phi)} k_lam - conj(phi(lam)) k_lam ||`` at truncation N."""
    from .hardy import cauchy_kernel, evaluate

    k = cauchy_kernel(lam, N)
    lhs = apply_co_analytic(phi, k).coeffs
    return float(np.linalg.norm(lhs - np.conj(evaluate(phi, lam)) * k.coeffs))


def grid_sup(phi: AnalyticPoly, M: int = DEFAULT_GRID) -> float:
    z = unit_roots(M)
    return float(np.abs(np.polyval(phi.coeffs[::-1], z)).max())
