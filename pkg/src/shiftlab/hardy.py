"""Truncated Hardy space arithmetic.

Functions in H^2 are represented by their first N Taylor coefficients.  Each
value carries ``trusted_degree`` (the last coefficient known to be exact) and
``tail_bound`` (an upper bound on the H^2 norm of the discarded tail), so that
truncation error stays visible instead of silently leaking into results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_N = 256
DEFAULT_GRID = 4096


class DomainError(ValueError):
    """Raised when a point lies outside the closed unit disc."""


class AliasingError(ValueError):
    """Raised when a boundary grid is too coarse for the coefficient vector."""


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
    if arr.ndim != 1:
        raise ValueError(f"coefficients must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        arr = np.zeros(1, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AnalyticPoly:
    """Taylor coefficients ``c_0 .. c_{N-1}`` of an analytic function on the disc.

    ``trusted_degree`` defaults to ``N - 1`` and ``tail_bound`` to ``0``, which
    together mean "this is an exact polynomial".
    """

    coeffs: np.ndarray
    trusted_degree: int | None = None
    tail_bound: float = 0.0

    def __post_init__(self):
        arr = _as_coeffs(self.coeffs)
        object.__setattr__(self, "coeffs", arr)
        td = arr.size - 1 if self.trusted_degree is None else int(self.trusted_degree)
        object.__setattr__(self, "trusted_degree", min(td, arr.size - 1))
        object.__setattr__(self, "tail_bound", float(self.tail_bound))

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def is_exact(self) -> bool:
        return self.trusted_degree == self.N - 1 and self.tail_bound == 0.0

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    @property
    def trusted(self) -> np.ndarray:
        return self.coeffs[: self.trusted_degree + 1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def padded(self, N: int) -> "AnalyticPoly":
        """Zero-pad (or cut) to length N; cutting an exact polynomial is lossless
        only above its degree."""
        out = np.zeros(N, dtype=complex)
        k = min(N, self.N)
        out[:k] = self.coeffs[:k]
        if N >= self.N:
            td = N - 1 if self.is_exact else self.trusted_degree
            return AnalyticPoly(out, td, self.tail_bound)
        lost = float(np.linalg.norm(self.coeffs[N:]))
        if self.is_exact and lost == 0.0:
            return AnalyticPoly(out)
        return AnalyticPoly(out, min(self.trusted_degree, N - 1), self.tail_bound + lost)

    def scaled(self, s: complex) -> "AnalyticPoly":
        return AnalyticPoly(s * self.coeffs, self.trusted_degree, abs(s) * self.tail_bound)

    def __add__(self, other: "AnalyticPoly") -> "AnalyticPoly":
        N = max(self.N, other.N)
        a, b = self.padded(N), other.padded(N)
        return AnalyticPoly(a.coeffs + b.coeffs, min(a.trusted_degree, b.trusted_degree),
                            a.tail_bound + b.tail_bound)

    def __sub__(self, other: "AnalyticPoly") -> "AnalyticPoly":
        return self + other.scaled(-1)

    def __call__(self, z):
        return evaluate(self, z)

    def __repr__(self) -> str:
        shown = np.array2string(self.coeffs[: min(self.N, 6)], precision=6)
        more = "..." if self.N > 6 else ""
        return f"AnalyticPoly(N={self.N}, coeffs={shown}{more}, trusted_degree={self.trusted_degree})"


def poly(*coeffs) -> AnalyticPoly:
    """Shorthand: ``poly(1, 2, 3)`` is ``1 + 2z + 3z^2``."""
    return AnalyticPoly(np.array(coeffs, dtype=complex))


def monomial(k: int, N: int | None = None) -> AnalyticPoly:
    N = k + 1 if N is None else N
    c = np.zeros(N, dtype=complex)
    c[k] = 1.0
    return AnalyticPoly(c)


@dataclass(frozen=True, eq=False)
class CauchyKernel:
    """Reproducing kernel ``k_lambda(z) = 1 / (1 - conj(lambda) z)`` of H^2."""

    lam: complex
    N: int = DEFAULT_N

    def __post_init__(self):
        if abs(self.lam) >= 1:
            raise DomainError(f"kernel point {self.lam} is not in the open disc")

    def norm_sq(self) -> float:
        return 1.0 / (1.0 - abs(self.lam) ** 2)

    def tail_norm_sq(self) -> float:
        r2 = abs(self.lam) ** 2
        return r2 ** self.N / (1.0 - r2)

    def poly(self) -> AnalyticPoly:
        c = np.conj(complex(self.lam)) ** np.arange(self.N)
        return AnalyticPoly(c, self.N - 1, float(np.sqrt(self.tail_norm_sq())))


def cauchy_kernel(lam: complex, N: int = DEFAULT_N) -> AnalyticPoly:
    return CauchyKernel(complex(lam), N).poly()


def inner_product_h2(f: AnalyticPoly, g: AnalyticPoly) -> complex:
    """H^2 pairing, linear in ``f`` and conjugate-linear in ``g``."""
    n = min(f.N, g.N)
    return complex(np.vdot(g.coeffs[:n], f.coeffs[:n]))


def backward_shift(f: AnalyticPoly) -> AnalyticPoly:
    """``(S*f)(z) = (f(z) - f(0)) / z``; output has length ``max(N - 1, 1)``."""
    if f.N == 1:
        return AnalyticPoly(np.zeros(1), tail_bound=f.tail_bound)
    if f.is_exact:
        return AnalyticPoly(f.coeffs[1:])
    return AnalyticPoly(f.coeffs[1:], max(f.trusted_degree - 1, 0), f.tail_bound)


def forward_shift(f: AnalyticPoly) -> AnalyticPoly:
    """Multiplication by z, growing the length by one."""
    c = np.concatenate([[0.0], f.coeffs])
    if f.is_exact:
        return AnalyticPoly(c)
    return AnalyticPoly(c, f.trusted_degree + 1, f.tail_bound)


def multiply(f: AnalyticPoly, g: AnalyticPoly, N: int | None = None) -> AnalyticPoly:
    """Product of two analytic polynomials, truncated to N coefficients."""
    full = np.convolve(f.coeffs, g.coeffs)
    N = full.size if N is None else N
    out = np.zeros(N, dtype=complex)
    out[: min(N, full.size)] = full[:N]
    if f.is_exact and g.is_exact:
        lost = float(np.linalg.norm(full[N:]))
        if lost == 0.0:
            return AnalyticPoly(out)
        return AnalyticPoly(out, N - 1, lost)
    td = min(f.trusted_degree, g.trusted_degree, N - 1)
    # |f g| <= ||f||_inf ||g||, and ||f||_inf <= ||f||_1 for the stored part
    tail = (np.abs(f.coeffs).sum() * g.tail_bound + np.abs(g.coeffs).sum() * f.tail_bound
            + f.tail_bound * g.tail_bound)
    return AnalyticPoly(out, td, float(tail))


def evaluate(f: AnalyticPoly, z):
    """Horner evaluation of the stored polynomial at ``z`` (scalar or array)."""
    za = np.asarray(z, dtype=complex)
    if np.any(np.abs(za) > 1 + 1e-14):
        raise DomainError("evaluation point outside the closed unit disc")
    out = np.zeros_like(za)
    for c in f.coeffs[::-1]:
        out = out * za + c
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Samples of a function at the M-th roots of unity ``exp(2 pi i j / M)``."""

    M: int
    values: np.ndarray = field(repr=False)

    @property
    def points(self) -> np.ndarray:
        return unit_roots(self.M)

    def mean(self) -> complex:
        """Integral against normalized arc length (exact for degree < M)."""
        return complex(self.values.mean())

    def coefficients(self, N: int) -> np.ndarray:
        return (np.fft.fft(self.values) / self.M)[:N]


def unit_roots(M: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(M) / M)


def _check_grid(M: int, N: int) -> None:
    if M < 1 or M & (M - 1):
        raise ValueError(f"grid size must be a power of two, got {M}")
    if M < N:
        raise AliasingError(f"grid of {M} points aliases {N} coefficients")


def boundary_samples(f: AnalyticPoly, M: int = DEFAULT_GRID) -> BoundaryGrid:
    _check_grid(M, f.N)
    padded = np.zeros(M, dtype=complex)
    padded[: f.N] = f.coeffs
    return BoundaryGrid(M, M * np.fft.ifft(padded))


def sup_norm(f: AnalyticPoly, M: int = DEFAULT_GRID) -> float:
    """Grid estimate of the boundary sup norm."""
    M = max(M, 1 << (f.N - 1).bit_length())
    return float(np.abs(boundary_samples(f, M).values).max())
