"""Model spaces ``K_Theta = H^2 minus Theta H^2`` for finite Blaschke products,
and the lattice of backward-shift invariant subspaces inside them."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .hardy import AnalyticPoly
from .symbols import BlaschkeProduct, _factor_series

CLUSTER_TOL = 1e-8
ANGLE_TOL = 1e-7
INVARIANCE_TOL = 1e-9


class IllConditioned(ValueError):
    pass


class UnsupportedLattice(ValueError):
    pass


class NotInvariant(ValueError):
    pass


def _span_basis(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the rows of ``vectors``."""
    if vectors.shape[0] == 0:
        return np.zeros((vectors.shape[1], 0), dtype=complex)
    Q, _ = np.linalg.qr(vectors.T)
    return Q


def projection_residual(v: np.ndarray, Q: np.ndarray) -> float:
    """``||v - Q Q* v||`` for orthonormal columns Q."""
    return float(np.linalg.norm(v - Q @ (Q.conj().T @ v)))


def shift_rows(V: np.ndarray) -> np.ndarray:
    """Backward shift applied to each row (length preserved, last entry 0)."""
    out = np.zeros_like(V)
    out[:, :-1] = V[:, 1:]
    return out


def same_span(V: np.ndarray, W: np.ndarray, tol: float = ANGLE_TOL) -> bool:
    """Equality of row spans via the largest principal angle."""
    if V.shape[0] != W.shape[0]:
        return False
    if V.shape[0] == 0:
        return True
    angles = scipy.linalg.subspace_angles(V.T, W.T)
    return bool(np.max(angles) < tol)


@dataclass(frozen=True, eq=False)
class ModelSpace:
    theta: BlaschkeProduct
    basis: np.ndarray  # d x N, rows are Taylor coefficient vectors
    N: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def _Q(self) -> np.ndarray:
        return _span_basis(self.basis)

    def vector(self, k: int) -> AnalyticPoly:
        return AnalyticPoly(self.basis[k])

    def gram(self) -> np.ndarray:
        return self.basis.conj() @ self.basis.T

    def project(self, f: AnalyticPoly) -> np.ndarray:
        x = f.padded(self.N).coeffs
        return self._Q @ (self._Q.conj().T @ x)


def tm_basis(theta: BlaschkeProduct, N: int) -> ModelSpace:
    """Takenaka-Malmquist orthonormal basis of ``K_Theta``.

    ``e_k = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} b_{a_j}``, which is
    Gram-Schmidt applied to the kernels (and kernel derivatives, at repeated
    zeros) in the order the zeros are listed.
    """
    d = theta.degree
    if N < d + 16:
        raise ValueError(f"N={N} is too small for a degree-{d} model space (need >= {d + 16})")
    points = [p for p, _ in theta.zeros]
    for p, q in itertools.combinations(points, 2):
        if abs(p - q) < CLUSTER_TOL:
            raise IllConditioned(f"zeros {p} and {q} are closer than {CLUSTER_TOL}")
    rows = []
    prefix = np.zeros(N, dtype=complex)
    prefix[0] = 1.0
    for a in theta.flat_zeros:
        kern = math.sqrt(1 - abs(a) ** 2) * np.conj(a) ** np.arange(N)
        rows.append(np.convolve(prefix, kern)[:N])
        prefix = np.convolve(prefix, _factor_series(a, N))[:N]
    basis = np.array(rows, dtype=complex).reshape(d, N)
    return ModelSpace(theta, basis, N)


def membership(f: AnalyticPoly, K: ModelSpace) -> float:
    """H^2 distance from f to K (0 means f lies in K)."""
    x = f.padded(K.N).coeffs
    return float(np.linalg.norm(x - K.project(f)))


@dataclass(frozen=True, eq=False)
class InvariantSubspace:
    ambient: ModelSpace
    vectors: np.ndarray  # r x N

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @cached_property
    def Q(self) -> np.ndarray:
        return _span_basis(self.vectors)

    def invariance_residual(self) -> float:
        """Largest relative distance from ``S* v`` to the span, over spanning vectors."""
        if self.dim == 0:
            return 0.0
        worst = 0.0
        for v in shift_rows(self.vectors):
            nv = np.linalg.norm(v)
            if nv > 0:
                worst = max(worst, projection_residual(v, self.Q) / nv)
        return worst

    def compressed_shift(self) -> np.ndarray:
        """Matrix of S* on the span in the orthonormal basis ``Q``."""
        return self.Q.conj().T @ shift_rows(self.Q.T).T


def _kernel_rows(points, N: int) -> np.ndarray:
    rows = [math.sqrt(1 - abs(p) ** 2) * np.conj(p) ** np.arange(N) for p in points]
    return np.array(rows, dtype=complex).reshape(len(rows), N)


def lattice_enumerate(K: ModelSpace) -> list[InvariantSubspace]:
    """All S*-invariant subspaces of K.

    Distinct zeros: every span of a subset of the eigenvectors ``k_{z_j}``
    (eigenvalue ``conj(z_j)``).  ``Theta = z^d``: the chain of polynomial
    spaces of degree < r.
    """
    theta, N = K.theta, K.N
    if theta.degree == 0:
        return [InvariantSubspace(K, np.zeros((0, N), dtype=complex))]
    if theta.is_monomial:
        d = theta.degree
        return [InvariantSubspace(K, np.eye(d, N, dtype=complex)[:r]) for r in range(d + 1)]
    if any(m > 1 for _, m in theta.zeros):
        raise UnsupportedLattice("repeated zeros away from the origin are not supported")
    points = [p for p, _ in theta.zeros]
    kern = _kernel_rows(points, N)
    out = []
    for r in range(len(points) + 1):
        for subset in itertools.combinations(range(len(points)), r):
            out.append(InvariantSubspace(K, kern[list(subset)]))
    return out


def divisor_from_subspace(E: InvariantSubspace, tol: float = 1e-6) -> BlaschkeProduct:
    """Blaschke product ``Theta_E`` with ``E = K_{Theta_E}``.

    Its zeros are the conjugated eigenvalues of S* on E, matched against the
    ambient zeros (the divisor of E divides the ambient Theta).
    """
    resid = E.invariance_residual()
    if resid > 1e-8:
        raise NotInvariant(f"subspace is not S*-invariant (residual {resid:.3g})")
    if E.dim == 0:
        return BlaschkeProduct(())
    theta = E.ambient.theta
    if theta.is_monomial:
        A = E.compressed_shift()
        if np.linalg.norm(np.linalg.matrix_power(A, E.dim)) > tol:
            raise NotInvariant("S* is not nilpotent on a subspace of K_{z^d}")
        return BlaschkeProduct.monomial(E.dim)
    eig = np.linalg.eigvals(E.compressed_shift())
    candidates = [p for p, _ in theta.zeros]
    zeros = []
    for mu in eig:
        best = min(candidates, key=lambda p: abs(np.conj(p) - mu))
        if abs(np.conj(best) - mu) > tol:
            raise NotInvariant(f"eigenvalue {mu} matches no ambient zero")
        zeros.append(best)
    return BlaschkeProduct(tuple(zeros))


def spans_equal_model(E: InvariantSubspace, theta: BlaschkeProduct, tol: float = 1e-8) -> bool:
    """Does ``tm_basis(theta)`` span E?"""
    if theta.degree != E.dim:
        return False
    if E.dim == 0:
        return True
    T = tm_basis(theta, E.ambient.N).basis
    return all(projection_residual(row, E.Q) <= tol for row in T) and same_span(T, E.vectors)


def krylov_closure(v: np.ndarray, max_dim: int, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal rows spanning ``{v, S*v, S*^2 v, ...}`` (Arnoldi with breakdown)."""
    rows: list[np.ndarray] = []
    w = v.astype(complex)
    for _ in range(max_dim + 1):
        nw = np.linalg.norm(w)
        for _ in range(2):
            for q in rows:
                w = w - np.vdot(q, w) * q
        if nw == 0 or np.linalg.norm(w) <= tol * nw:
            break
        rows.append(w / np.linalg.norm(w))
        w = shift_rows(rows[-1][None, :])[0]
    return np.array(rows, dtype=complex).reshape(len(rows), v.size)


def random_invariant_search(K: ModelSpace, lattice: list[InvariantSubspace],
                            n_candidates: int, rng: np.random.Generator,
                            threshold: float = 1e-6) -> dict:
    """Search for S*-invariant subspaces of K missing from ``lattice``.

    Half the candidates are random spans inside K (accepted only if their
    invariance residual is below ``threshold``); the other half are Krylov
    closures of random sparse combinations of basis vectors, which are
    invariant by construction.
    """
    d = K.dim
    found_invariant = 0
    outside = 0
    for i in range(n_candidates):
        if i % 2 == 0:
            r = int(rng.integers(1, d + 1))
            coef = rng.standard_normal((r, d)) + 1j * rng.standard_normal((r, d))
            V = coef @ K.basis
        else:
            coef = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            coef[rng.random(d) < 0.5] = 0
            if not coef.any():
                coef[int(rng.integers(d))] = 1.0
            V = krylov_closure(coef @ K.basis, d)
        cand = InvariantSubspace(K, V)
        if cand.invariance_residual() > threshold:
            continue
        found_invariant += 1
        if not any(same_span(cand.vectors, E.vectors, 1e-6) for E in lattice
                   if E.dim == cand.dim):
            outside += 1
    return {"candidates": n_candidates, "invariant": found_invariant, "outside": outside}
