"""de Branges-Rovnyak spaces H(b) for non-extreme polynomial b.

For a non-extreme b with Pythagorean mate a, f lies in H(b) exactly when
``T_{conj(b)} f = T_{conj(a)} f_plus`` has a solution f_plus in H^2, and then
``||f||_b^2 = ||f||^2 + ||f_plus||^2``.  The map ``f -> (f, f_plus)`` is an
isometry of H(b) into ``H^2 + H^2`` that intertwines S* with ``S* + S*``; all
H(b) geometry below is done on these stacked witness vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .hardy import (DEFAULT_GRID, AnalyticPoly, backward_shift, evaluate,
                    inner_product_h2, sup_norm, unit_roots)
from .model_spaces import (InvariantSubspace, divisor_from_subspace, lattice_enumerate,
                           random_invariant_search, spans_equal_model, tm_basis)
from .range_spaces import RangeSpace, principal_sqrt
from .symbols import BlaschkeProduct, OuterPoly, divide_by_inner, pythagorean_mate
from .toeplitz import analytic_toeplitz, apply_co_analytic

START_N = 128
MAX_N = 8192
REL_CHANGE = 1e-9

# A series source produces the first N Taylor coefficients on demand.
Series = Union[AnalyticPoly, Callable[[int], AnalyticPoly]]


class Unconverged(RuntimeError):
    def __init__(self, message: str, trajectory: list[tuple[int, float]]):
        super().__init__(message)
        self.trajectory = trajectory


class WitnessMismatch(AssertionError):
    pass


@dataclass(frozen=True, eq=False)
class PythagoreanPair:
    b: AnalyticPoly
    a: OuterPoly

    def __post_init__(self):
        err = mate_identity_error(self.b, self.a)
        if err > 1e-9:
            raise ValueError(f"|a|^2 + |b|^2 = 1 fails by {err:.3g}")

    @classmethod
    def from_b(cls, b: AnalyticPoly) -> "PythagoreanPair":
        """Computes the mate; extreme b is rejected by ``pythagorean_mate``."""
        b = AnalyticPoly(b.coeffs[: b.degree + 1])
        return cls(b, pythagorean_mate(b))


def mate_identity_error(b: AnalyticPoly, a: AnalyticPoly, M: int = DEFAULT_GRID) -> float:
    z = unit_roots(M)
    bv = np.polyval(b.coeffs[::-1], z)
    av = np.polyval(a.coeffs[::-1], z)
    return float(np.abs(np.abs(av) ** 2 + np.abs(bv) ** 2 - 1).max())


@dataclass(frozen=True, eq=False)
class HbElement:
    f: AnalyticPoly
    fplus: AnalyticPoly
    norm_sq: float
    N_used: int
    trajectory: list = field(default_factory=list, repr=False)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.f.coeffs, self.fplus.coeffs])


def solve_witness(pair: PythagoreanPair, f: AnalyticPoly) -> AnalyticPoly:
    """Back-substitution for ``T_{conj(a)} x = T_{conj(b)} f`` at f's length.

    ``T_{conj(a)}`` is upper triangular and banded with diagonal ``a(0) > 0``;
    the truncation sets ``x_n = 0`` for ``n >= N``.
    """
    rhs = apply_co_analytic(pair.b, f)
    N = f.N
    a = np.conj(pair.a.coeffs[: pair.a.degree + 1])
    m = min(a.size - 1, N - 1)
    ab = np.zeros((m + 1, N), dtype=complex)
    for j in range(m + 1):
        ab[m - j, j:] = a[j]
    x = scipy.linalg.solve_banded((0, m), ab, rhs.coeffs)
    if f.is_exact:
        return AnalyticPoly(x)
    return AnalyticPoly(x, rhs.trusted_degree, rhs.tail_bound / abs(a[0]))


def _embed_at(pair: PythagoreanPair, f: AnalyticPoly) -> HbElement:
    fplus = solve_witness(pair, f)
    ns = f.norm() ** 2 + fplus.norm() ** 2
    return HbElement(f, fplus, ns, f.N)


def hb_embed(pair: PythagoreanPair, f: Series, start: int = START_N,
             max_n: int = MAX_N, rtol: float = REL_CHANGE) -> HbElement:
    """H(b) norm and witness of f, doubling the truncation until the norm settles.

    ``f`` is either a fixed AnalyticPoly (exact polynomials converge at the
    first comparison) or a callable ``N -> AnalyticPoly`` producing truncated
    series.
    """
    source = f if callable(f) and not isinstance(f, AnalyticPoly) else None
    if source is None:
        start = max(start, 1 << (f.N - 1).bit_length())
        if f.is_exact:
            el = _embed_at(pair, f.padded(start))
            return HbElement(el.f, el.fplus, el.norm_sq, start, [(start, el.norm_sq)])
    trajectory = []
    N = start
    prev = None
    while N <= max_n:
        fN = source(N) if source else f.padded(N)
        el = _embed_at(pair, fN)
        trajectory.append((N, el.norm_sq))
        if prev is not None and abs(el.norm_sq - prev) <= rtol * max(abs(el.norm_sq), 1e-300):
            return HbElement(el.f, el.fplus, el.norm_sq, N, trajectory)
        prev = el.norm_sq
        N *= 2
    raise Unconverged(f"H(b) norm did not settle by N={max_n}", trajectory)


def hb_inner(x: HbElement, y: HbElement) -> complex:
    return inner_product_h2(x.f, y.f) + inner_product_h2(x.fplus, y.fplus)


def hb_gram_matrix(b: AnalyticPoly, N: int) -> np.ndarray:
    """``I - T_b T_{conj(b)}`` at truncation N (exact compression)."""
    Tb = analytic_toeplitz(b, N)
    return np.eye(N) - Tb @ Tb.conj().T


def hb_norm_crosscheck(pair: PythagoreanPair, f: AnalyticPoly, N: int) -> float:
    """Range norm of f in ``M((I - T_b T_{conj(b)})^{1/2})`` at truncation N."""
    if f.degree > N // 4:
        raise ValueError(f"degree {f.degree} too large for N={N}")
    if pair.b.degree == 0 and pair.b.coeffs[0] == 0:
        return f.norm()
    root = principal_sqrt(hb_gram_matrix(pair.b, N))
    return RangeSpace(root).norm(f.padded(N).coeffs)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    M: int
    values: np.ndarray = field(repr=False)
    f: HbElement = field(repr=False)
    g: HbElement = field(repr=False)

    def moment(self, n: int) -> complex:
        """``int z^n u dm`` by the M-point rule."""
        z = unit_roots(self.M)
        return complex(np.mean(z ** n * self.values))

    def integrate(self, weight: np.ndarray) -> complex:
        return complex(np.mean(weight * self.values))


def _boundary_values(p: AnalyticPoly, M: int, conj_arg: bool) -> np.ndarray:
    if p.N > M:
        raise ValueError(f"grid of {M} points aliases {p.N} coefficients")
    buf = np.zeros(M, dtype=complex)
    buf[: p.N] = p.coeffs
    if conj_arg:
        return np.fft.fft(buf)  # sum_k c_k exp(-2 pi i jk/M) = p(conj(z_j))
    return M * np.fft.ifft(buf)


def spectral_density(pair: PythagoreanPair, f: Series, g: Series,
                     M: int = DEFAULT_GRID) -> SpectralDensity:
    """Density ``u_{f,g}`` on the M-grid with ``int z^n u dm = <S*^n f, g>_b``.

    ``u(z) = (f conj(g) + f_plus conj(g_plus))(conj(z))``.
    """
    F = hb_embed(pair, f)
    G = hb_embed(pair, g)
    N = max(F.N_used, G.N_used)
    if 2 * N > M:
        raise ValueError(f"grid M={M} cannot integrate products of length {N}")
    Ff, Fp = F.f.padded(N), F.fplus.padded(N)
    Gf, Gp = G.f.padded(N), G.fplus.padded(N)
    u = (_boundary_values(Ff, M, True) * np.conj(_boundary_values(Gf, M, True))
         + _boundary_values(Fp, M, True) * np.conj(_boundary_values(Gp, M, True)))
    return SpectralDensity(M, u, F, G)


def hb_shift_moment(pair: PythagoreanPair, f: Series, g: Series, n: int) -> complex:
    """``<S*^n f, g>_{H(b)}`` computed directly from embeddings."""
    F = hb_embed(pair, f)
    G = hb_embed(pair, g)
    x = F.f
    for _ in range(n):
        x = backward_shift(x)
    return hb_inner(hb_embed(pair, x), G)


def verify_theorem_C(pair: PythagoreanPair, phi: AnalyticPoly, f: Series, g: Series,
                     M: int = DEFAULT_GRID, witness_tol: float = 1e-8) -> float:
    """``|<T_{conj(phi)} f, g>_b - int phi*(z) u_{f,g}(z) dm|``.

    Also checks the witness identity ``(T_{conj(phi)} f)_plus = T_{conj(phi)} f_plus``
    and raises WitnessMismatch if it fails.
    """
    u = spectral_density(pair, f, g, M)
    F, G = u.f, u.g
    Tf = apply_co_analytic(phi, F.f)
    lhs_el = _embed_at(pair, Tf)
    gap = np.abs(lhs_el.fplus.coeffs - apply_co_analytic(phi, F.fplus).coeffs)
    k = lhs_el.fplus.trusted_degree + 1
    if gap[:k].max() > witness_tol:
        raise WitnessMismatch(f"witness of T_phibar f differs by {gap[:k].max():.3g}")
    lhs = hb_inner(lhs_el, G)
    z = unit_roots(M)
    phi_star = np.polyval(np.conj(phi.coeffs[: phi.degree + 1])[::-1], z)
    return float(abs(lhs - u.integrate(phi_star)))


def f_property_check(pair: PythagoreanPair, f: AnalyticPoly,
                     theta: BlaschkeProduct) -> tuple[float, float]:
    """``(||f||_b, ||f/theta||_b)``; NotDivisible propagates."""
    q = divide_by_inner(f, theta)
    return hb_embed(pair, f).norm, hb_embed(pair, q).norm


# ---------------------------------------------------------------------------
# invariant subspaces inside H(b)


def _stack(pair: PythagoreanPair, rows: np.ndarray) -> np.ndarray:
    """Witness vectors ``(v, v_plus)`` for each row (kept at the rows' length)."""
    out = []
    for v in rows:
        el = _embed_at(pair, AnalyticPoly(v))
        out.append(np.concatenate([el.f.coeffs, el.fplus.coeffs]))
    return np.array(out, dtype=complex).reshape(len(out), 2 * rows.shape[1])


def _shift_stacked(S: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros_like(S)
    out[:, : N - 1] = S[:, 1:N]
    out[:, N: 2 * N - 1] = S[:, N + 1:]
    return out


def _hb_subspace_residual(stacked: np.ndarray, images: np.ndarray) -> float:
    """Largest relative H(b) distance from each image to the span of ``stacked``."""
    if stacked.shape[0] == 0:
        return 0.0
    Q, _ = np.linalg.qr(stacked.T)
    worst = 0.0
    for w in images:
        nw = np.linalg.norm(w)
        if nw > 0:
            worst = max(worst, float(np.linalg.norm(w - Q @ (Q.conj().T @ w))) / nw)
    return worst


def hb_invariance_residual(pair: PythagoreanPair, E: InvariantSubspace) -> float:
    """Residual of ``S* E subset E`` measured in the H(b) norm."""
    if E.dim == 0:
        return 0.0
    N = E.vectors.shape[1]
    S = _stack(pair, E.vectors)
    return _hb_subspace_residual(S, _shift_stacked(S, N))


def co_analytic_invariance_residual(pair: PythagoreanPair, E: InvariantSubspace,
                                    phi: AnalyticPoly) -> float:
    """Residual of ``T_{conj(phi)} E subset E`` in the H(b) norm."""
    if E.dim == 0:
        return 0.0
    S = _stack(pair, E.vectors)
    images = _stack(pair, np.array([apply_co_analytic(phi, AnalyticPoly(v)).coeffs
                                    for v in E.vectors]))
    return _hb_subspace_residual(S, images)


def mate_action(pair: PythagoreanPair, E: InvariantSubspace) -> dict:
    """How ``T_{conj(a)}`` acts on E: residual of ``T_{conj(a)} E subset E``,
    smallest singular value of the restricted map (onto iff > 0), and the
    kernel eigenfactors ``conj(a(lambda))`` on the distinct-zero lattice."""
    if E.dim == 0:
        return {"residual": 0.0, "min_singular": float("inf"), "eigenfactors": []}
    Q = E.Q
    images = np.array([apply_co_analytic(pair.a, AnalyticPoly(q)).coeffs for q in Q.T])
    resid = max(float(np.linalg.norm(w - Q @ (Q.conj().T @ w))) / max(np.linalg.norm(w), 1e-300)
                for w in images)
    restricted = Q.conj().T @ images.T
    smin = float(np.linalg.svd(restricted, compute_uv=False).min())
    factors = []
    if not E.ambient.theta.is_monomial:
        for v in E.vectors:
            lam = np.conj(v[1] / v[0])
            factors.append(complex(np.conj(evaluate(pair.a, lam))))
    return {"residual": resid, "min_singular": smin, "eigenfactors": factors}


@dataclass
class SubspaceTrace:
    dim: int
    divisor: BlaschkeProduct
    hb_converged: bool
    invariance_residual: float
    mate_residual: float
    mate_min_singular: float
    eigenfactors: list
    divisor_roundtrip: bool


@dataclass
class TraceReport:
    theta: BlaschkeProduct
    subspaces: list[SubspaceTrace]
    search: dict

    @property
    def max_invariance_residual(self) -> float:
        return max((s.invariance_residual for s in self.subspaces), default=0.0)

    @property
    def max_mate_residual(self) -> float:
        return max((s.mate_residual for s in self.subspaces), default=0.0)

    def passed(self, tol: float = 1e-7) -> bool:
        return (all(s.hb_converged and s.divisor_roundtrip for s in self.subspaces)
                and self.max_invariance_residual <= tol
                and self.max_mate_residual <= tol
                and all(s.mate_min_singular > 0 for s in self.subspaces)
                and all(abs(e) > 0 for s in self.subspaces for e in s.eigenfactors)
                and self.search.get("outside", 0) == 0)


def invariant_trace_suite(pair: PythagoreanPair, theta: BlaschkeProduct, N: int = 256,
                          n_search: int = 0, rng: np.random.Generator | None = None
                          ) -> TraceReport:
    """Check every lattice element of ``K_theta`` as a subspace of H(b)."""
    if theta.degree > 6:
        raise ValueError("trace suite supports degree <= 6")
    K = tm_basis(theta, N)
    lattice = lattice_enumerate(K)
    traces = []
    for E in lattice:
        converged = True
        for v in E.vectors:
            try:
                hb_embed(pair, AnalyticPoly(v))
            except Unconverged:
                converged = False
        action = mate_action(pair, E)
        div = divisor_from_subspace(E)
        traces.append(SubspaceTrace(
            dim=E.dim,
            divisor=div,
            hb_converged=converged,
            invariance_residual=hb_invariance_residual(pair, E),
            mate_residual=action["residual"],
            mate_min_singular=action["min_singular"],
            eigenfactors=action["eigenfactors"],
            divisor_roundtrip=spans_equal_model(E, div),
        ))
    search = {}
    if n_search:
        rng = np.random.default_rng(0) if rng is None else rng
        search = random_invariant_search(K, lattice, n_search, rng)
    return TraceReport(theta, traces, search)


# ---------------------------------------------------------------------------
# cyclicity


@dataclass
class CyclicityReport:
    ranks: dict  # N -> Krylov rank (None when no breakdown up to max_rank)
    max_rank: int
    heuristic: bool = field(init=False)

    def __post_init__(self):
        self.heuristic = any(r is None for r in self.ranks.values())

    @property
    def verdict(self) -> str:
        rs = set(self.ranks.values())
        if rs == {None}:
            return f"no saturation observed up to rank {self.max_rank} (heuristic)"
        if None not in rs and len(rs) == 1:
            return f"finite-rank saturation at {rs.pop()}"
        return "inconsistent across truncations"

    @property
    def saturation_rank(self) -> int | None:
        rs = set(self.ranks.values())
        return rs.pop() if len(rs) == 1 else None


def krylov_rank(pair: PythagoreanPair, f: AnalyticPoly, max_rank: int = 32,
                tol: float = 1e-8) -> int | None:
    """Dimension of ``span{f, S*f, ...}`` measured in H(b) by Arnoldi breakdown.

    Returns None when no breakdown occurs within ``max_rank + 1`` steps.  A
    plain SVD rank of the Krylov matrix is not used: Hankel singular values of
    entire functions decay factorially and would fake saturation.
    """
    N = f.N
    el = _embed_at(pair, f)
    w = np.concatenate([el.f.coeffs, el.fplus.coeffs])
    basis: list[np.ndarray] = []
    for _ in range(max_rank + 1):
        nw = np.linalg.norm(w)
        if nw == 0:
            return len(basis)
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        if np.linalg.norm(w) <= tol * nw:
            return len(basis)
        basis.append(w / np.linalg.norm(w))
        w = _shift_stacked(basis[-1][None, :], N)[0]
    return None


def cyclicity_probe(pair: PythagoreanPair, f: Series, N_schedule=(128, 256, 512),
                    max_rank: int = 32, tol: float = 1e-8) -> CyclicityReport:
    ranks = {}
    for N in N_schedule:
        fN = f(N) if callable(f) and not isinstance(f, AnalyticPoly) else f.padded(N)
        ranks[N] = krylov_rank(pair, fN, max_rank, tol)
    return CyclicityReport(ranks, max_rank)


def random_poly(rng: np.random.Generator, degree: int, scale: float = 1.0) -> AnalyticPoly:
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return AnalyticPoly(scale * c / np.sqrt(2 * (degree + 1)))


def random_b(rng: np.random.Generator, degree: int, sup: float = 0.95) -> AnalyticPoly:
    p = random_poly(rng, degree)
    return p.scaled(sup / sup_norm(p))


def divisible_pair(rng: np.random.Generator, max_zeros: int = 3, max_h: int = 4,
                   radius: float = 0.8) -> tuple[AnalyticPoly, BlaschkeProduct]:
    """Random polynomial f together with a Blaschke product dividing it."""
    k = int(rng.integers(1, max_zeros + 1))
    zeros = []
    while len(zeros) < k:
        z = radius * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        if all(abs(z - w) > 0.05 for w in zeros):
            zeros.append(complex(z))
    if rng.random() < 0.3:
        zeros[0] = 0j
    h = random_poly(rng, int(rng.integers(0, max_h + 1)))
    c = h.coeffs
    for z in zeros:
        c = np.convolve(c, [z, -1.0])
    return AnalyticPoly(c), BlaschkeProduct(tuple(zeros))

