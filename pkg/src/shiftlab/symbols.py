"""Inner and outer symbols: finite Blaschke products, nonnegative trigonometric
polynomials, Fejer-Riesz factorization and Pythagorean mates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb, gammaln

from .hardy import DEFAULT_GRID, AnalyticPoly

PAIR_TOL = 1e-6
BOUNDARY_TOL = 1e-6
NEGATIVITY_TOL = 1e-12
TAIL_TOL = 1e-10


class FactorizationError(ValueError):
    """Input cannot be written as |a|^2 for a polynomial a."""


class ExtremePointError(FactorizationError):
    """``|b| = 1`` on the circle, so b has no Pythagorean mate."""


class NotDivisible(ValueError):
    pass


class TruncationWarning(UserWarning):
    """A truncated expansion has a tail bound above the requested tolerance."""


def _group_zeros(zeros) -> tuple[tuple[complex, int], ...]:
    grouped: dict[complex, int] = {}
    for z in zeros:
        if isinstance(z, tuple):
            point, mult = complex(z[0]), int(z[1])
        else:
            point, mult = complex(z), 1
        grouped[point] = grouped.get(point, 0) + mult
    return tuple(grouped.items())


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    """``constant * prod_j b_{z_j}^{m_j}`` with ``b_a(z) = (|a|/a)(a - z)/(1 - conj(a) z)``
    and ``b_0(z) = z``.

    ``zeros`` accepts points, or ``(point, multiplicity)`` pairs; repeated
    points are merged.
    """

    zeros: tuple = ()
    constant: complex = 1.0

    def __post_init__(self):
        grouped = _group_zeros(self.zeros)
        for point, mult in grouped:
            if abs(point) >= 1:
                raise ValueError(f"Blaschke zero {point} is not in the open disc")
            if mult < 1:
                raise ValueError(f"multiplicity must be positive, got {mult} at {point}")
        if abs(abs(self.constant) - 1) > 1e-12:
            raise ValueError("Blaschke constant must be unimodular")
        object.__setattr__(self, "zeros", grouped)
        object.__setattr__(self, "constant", complex(self.constant))

    @classmethod
    def monomial(cls, d: int) -> "BlaschkeProduct":
        return cls(((0.0, d),) if d else ())

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.zeros)

    @property
    def flat_zeros(self) -> list[complex]:
        return [p for p, m in self.zeros for _ in range(m)]

    @property
    def is_monomial(self) -> bool:
        return all(p == 0 for p, _ in self.zeros)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.constant, dtype=complex)
        for a in self.flat_zeros:
            out = out * blaschke_factor(a, z)
        return complex(out) if out.ndim == 0 else out

    def __repr__(self) -> str:
        zs = ", ".join(f"{p:.6g}^{m}" if m > 1 else f"{p:.6g}" for p, m in self.zeros)
        return f"BlaschkeProduct([{zs}])"


def blaschke_factor(a: complex, z):
    if a == 0:
        return z
    return (abs(a) / a) * (a - z) / (1 - np.conj(a) * z)


def _factor_series(a: complex, N: int) -> np.ndarray:
    if a == 0:
        c = np.zeros(N, dtype=complex)
        if N > 1:
            c[1] = 1.0
        return c
    geo = np.conj(a) ** np.arange(N)
    c = a * geo
    c[1:] -= geo[:-1]
    return (abs(a) / a) * c


def blaschke_tail_bound(B: BlaschkeProduct, N: int) -> float:
    """Upper bound on the H^2 norm of the Taylor tail of B beyond N terms.

    Writing ``B = z^m P/Q`` with ``Q = prod (1 - conj(a) z)`` over the nonzero
    zeros, ``|c_n| <= (1+r)^d C(n+d-1, d-1) r^(n-d)`` for the nonzero part.
    """
    m0 = sum(m for p, m in B.zeros if p == 0)
    nonzero = [p for p in B.flat_zeros if p != 0]
    d = len(nonzero)
    n0 = N - m0
    if d == 0:
        return 0.0 if n0 > 0 else 1.0
    if n0 < d:
        return 1.0
    r = max(abs(p) for p in nonzero)
    # geometric decay r^2 per term; sum until terms are negligible
    span = int(min(200000, max(64, 80.0 / max(-math.log10(r * r), 1e-12))))
    n = np.arange(n0, n0 + span, dtype=float)
    logc = gammaln(n + d) - gammaln(n + 1) - gammaln(d)
    logt = d * math.log1p(r) + logc + (n - d) * math.log(r)
    bound = math.sqrt(float(np.exp(2 * logt).sum()))
    return min(bound, 1.0)


def blaschke_taylor(B: BlaschkeProduct, N: int, tail_tol: float = TAIL_TOL) -> AnalyticPoly:
    """First N Taylor coefficients of B, with ``tail_bound`` recorded.

    Emits ``TruncationWarning`` when the tail bound exceeds ``tail_tol``.
    """
    c = np.zeros(N, dtype=complex)
    c[0] = B.constant
    for a in B.flat_zeros:
        c = np.convolve(c, _factor_series(a, N))[:N]
    tail = blaschke_tail_bound(B, N)
    if tail > tail_tol:
        warnings.warn(f"{B!r} truncated at N={N} has tail bound {tail:.3g} > {tail_tol:.1g}",
                      TruncationWarning, stacklevel=2)
    return AnalyticPoly(c, N - 1, tail)


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Real trigonometric polynomial ``sum_{|l|<=m} c_l e^{il theta}``.

    ``laurent_coeffs`` holds ``c_{-m} .. c_m``.
    """

    laurent_coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.laurent_coeffs, dtype=complex).copy()
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("Laurent coefficients need odd length 2m+1")
        scale = max(float(np.abs(c).max()), 1.0)
        if np.abs(c - np.conj(c[::-1])).max() > 1e-12 * scale:
            raise ValueError("coefficients are not Hermitian symmetric (symbol not real)")
        c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        object.__setattr__(self, "laurent_coeffs", c)

    @property
    def m(self) -> int:
        return self.laurent_coeffs.size // 2

    def coefficient(self, l: int) -> complex:
        return complex(self.laurent_coeffs[l + self.m]) if abs(l) <= self.m else 0j

    def values(self, M: int = DEFAULT_GRID) -> np.ndarray:
        """Real values at the M-th roots of unity (needs ``M > 2m``)."""
        if M <= 2 * self.m:
            raise ValueError(f"grid of {M} points aliases a degree-{self.m} symbol")
        buf = np.zeros(M, dtype=complex)
        for l in range(-self.m, self.m + 1):
            buf[l % M] += self.laurent_coeffs[l + self.m]
        return np.real(M * np.fft.ifft(buf))

    @classmethod
    def abs_sq(cls, p: AnalyticPoly) -> "TrigPoly":
        """|p|^2 on the circle."""
        c = p.coeffs[: p.degree + 1]
        pos = np.correlate(c, c, mode="full")  # index k <-> lag k - deg
        return cls(pos)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        m = max(self.m, other.m)
        out = np.zeros(2 * m + 1, dtype=complex)
        out[m - self.m: m + self.m + 1] += self.laurent_coeffs
        out[m - other.m: m + other.m + 1] += other.laurent_coeffs
        return TrigPoly(out)

    def __rsub__(self, const: float) -> "TrigPoly":
        out = -self.laurent_coeffs.copy()
        out[self.m] += const
        return TrigPoly(out)


@dataclass(frozen=True, eq=False, repr=False)
class OuterPoly(AnalyticPoly):
    """Analytic polynomial with ``a(0) > 0`` and no zeros in the open disc."""

    roots: tuple = field(default=())

    def __post_init__(self):
        super().__post_init__()
        a0 = self.coeffs[0]
        if not (a0.real > 0 and abs(a0.imag) <= 1e-12 * abs(a0)):
            raise FactorizationError(f"outer polynomial needs a(0) > 0, got {a0}")
        roots = self.roots
        if not roots and self.degree > 0:
            roots = tuple(np.roots(self.coeffs[: self.degree + 1][::-1]))
            object.__setattr__(self, "roots", roots)
        if roots and min(abs(r) for r in roots) < 1 - 1e-8:
            raise FactorizationError("outer polynomial has a zero inside the disc")


def _newton_polish(coeffs_hi: np.ndarray, roots: np.ndarray) -> np.ndarray:
    if roots.size == 0:
        return roots
    dcoeffs = np.polyder(coeffs_hi)
    out = roots.copy()
    for i, r in enumerate(roots):
        p, dp = np.polyval(coeffs_hi, r), np.polyval(dcoeffs, r)
        if dp == 0:
            continue
        cand = r - p / dp
        if abs(np.polyval(coeffs_hi, cand)) < abs(p):
            out[i] = cand
    return out


def _polish_multiple(coeffs_hi: np.ndarray, centre: complex, mult: int) -> complex:
    """One Newton step on the (mult-1)-th derivative, where the root is simple."""
    d = np.polyder(coeffs_hi, mult - 1) if mult > 1 else coeffs_hi
    p, dp = np.polyval(d, centre), np.polyval(np.polyder(d), centre)
    if dp != 0:
        cand = centre - p / dp
        if abs(np.polyval(d, cand)) < abs(p):
            centre = cand
    return centre


def _cluster(points: list[complex], tol: float) -> list[list[complex]]:
    clusters: list[list[complex]] = []
    for p in sorted(points, key=lambda z: np.angle(z)):
        for cl in clusters:
            if min(abs(p - q) for q in cl) < tol:
                cl.append(p)
                break
        else:
            clusters.append([p])
    return clusters


def fejer_riesz(w: TrigPoly, grid: int = DEFAULT_GRID) -> OuterPoly:
    """Outer polynomial ``a`` with ``|a|^2 = w`` on the circle and ``a(0) > 0``.

    Roots of ``z^m w(z)`` come in pairs ``(rho, 1/conj(rho))``; the closed
    exterior member of each pair is kept and boundary roots (which must have
    even multiplicity) are split evenly.
    """
    vals = w.values(max(grid, 1 << (2 * w.m + 1).bit_length()))
    if vals.min() < -NEGATIVITY_TOL:
        raise FactorizationError(f"symbol is negative on the circle (min {vals.min():.3g})")
    if vals.max() <= 0:
        raise FactorizationError("symbol vanishes identically")

    c = w.laurent_coeffs
    scale = float(np.abs(c).max())
    m = w.m
    while m > 0 and abs(c[w.m + m]) <= 1e-14 * scale:
        m -= 1
    c = c[w.m - m: w.m + m + 1]
    if m == 0:
        return OuterPoly(np.array([math.sqrt(c[0].real)]))

    hi = c[::-1]  # z^m w(z) = sum_k c_{k-m} z^k, highest power first
    roots = np.roots(hi)
    on_circle = [r for r in roots if abs(abs(r) - 1) < BOUNDARY_TOL]
    off = _newton_polish(hi, np.array([r for r in roots if abs(abs(r) - 1) >= BOUNDARY_TOL]))
    outside = [r for r in off if abs(r) > 1]
    inside = [r for r in off if abs(r) < 1]

    unmatched = list(inside)
    for r in outside:
        j = min(range(len(unmatched)), key=lambda i: abs(r * np.conj(unmatched[i]) - 1),
                default=None)
        if j is None or abs(r * np.conj(unmatched[j]) - 1) > PAIR_TOL:
            raise FactorizationError(f"root {r} has no reflected partner")
        unmatched.pop(j)
    if unmatched:
        raise FactorizationError(f"roots {unmatched} have no reflected partner")

    kept = list(outside)
    for cl in _cluster(on_circle, BOUNDARY_TOL):
        if len(cl) % 2:
            raise FactorizationError(
                f"boundary root near {np.mean(cl):.6g} has odd multiplicity {len(cl)}")
        centre = _polish_multiple(hi, np.mean(cl), len(cl))
        kept.extend([centre / abs(centre)] * (len(cl) // 2))

    a = np.array([1.0 + 0j])
    for r in kept:
        a = np.convolve(a, [-r, 1.0])
    modulus = math.sqrt(abs(c[-1]) / float(np.prod(np.abs(kept))))
    a = modulus * a * np.exp(-1j * np.angle(a[0]))
    a[0] = abs(a[0])
    return OuterPoly(a, roots=tuple(kept))


def one_minus_abs_sq(b: AnalyticPoly) -> TrigPoly:
    return 1.0 - TrigPoly.abs_sq(b)


def pythagorean_mate(b: AnalyticPoly, grid: int = DEFAULT_GRID) -> OuterPoly:
    """Outer ``a`` with ``a(0) > 0`` and ``|a|^2 + |b|^2 = 1`` on the circle."""
    if b.degree == 0 and b.coeffs[0] == 0:
        return OuterPoly(np.array([1.0]))
    w = one_minus_abs_sq(b)
    M = max(grid, 1 << (2 * b.degree + 1).bit_length())
    if np.abs(w.values(M)).max() < 1e-12:
        raise ExtremePointError("|b| = 1 on the circle; b is an extreme point")
    return fejer_riesz(w, M)


def _taylor_at(f: AnalyticPoly, point: complex, order: int) -> np.ndarray:
    """``f^{(j)}(point) / j!`` for ``j < order``."""
    n = np.arange(f.N)
    out = np.empty(order, dtype=complex)
    for j in range(order):
        w = comb(n, j) * np.where(n >= j, complex(point) ** np.maximum(n - j, 0), 0)
        if point == 0:
            w = (n == j).astype(complex)
        out[j] = np.dot(w, f.coeffs)
    return out


def divide_by_inner(f: AnalyticPoly, B: BlaschkeProduct, tol: float = 1e-8) -> AnalyticPoly:
    """Quotient ``f / B`` as an analytic function, if B divides f.

    On the circle ``f/B = f conj(B)``, so the quotient is ``P_+(conj(B) f)``;
    for a polynomial f only finitely many Taylor coefficients of B are
    involved and the result is exact.
    """
    scale = max(1.0, f.norm())
    for point, mult in B.zeros:
        jet = _taylor_at(f, point, mult)
        bad = np.flatnonzero(np.abs(jet) > tol * scale)
        if bad.size:
            raise NotDivisible(
                f"f does not vanish to order {mult} at {point:.6g} "
                f"(derivative {bad[0]} has size {abs(jet[bad[0]]):.3g})")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        Bc = blaschke_taylor(B, f.N)
    from .toeplitz import apply_co_analytic

    g = apply_co_analytic(Bc, f)
    if not f.is_exact:
        g = AnalyticPoly(g.coeffs, f.trusted_degree, f.tail_bound)
    back = np.convolve(g.coeffs, Bc.coeffs)[: f.N]
    k = g.trusted_degree + 1
    if np.abs(back[:k] - f.coeffs[:k]).max(initial=0.0) > tol * scale + g.tail_bound:
        raise NotDivisible("quotient does not reproduce f; divisibility test was inconclusive")
    return g


__all__ = [
    "BlaschkeProduct", "TrigPoly", "OuterPoly", "FactorizationError", "ExtremePointError",
    "NotDivisible", "TruncationWarning", "blaschke_factor", "blaschke_taylor",
    "blaschke_tail_bound", "fejer_riesz", "pythagorean_mate", "one_minus_abs_sq",
    "divide_by_inner",
]
