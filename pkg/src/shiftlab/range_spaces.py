"""Range spaces ``M(A)`` with the range norm, and the two Douglas criteria."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RANK_RTOL = 1e-10
RANGE_RTOL = 1e-8
PSD_CLIP = 1e-10


class NotInRange(ValueError):
    pass


class NotPSD(ValueError):
    pass


def hermitian_part(G: np.ndarray) -> np.ndarray:
    G = np.asarray(G, dtype=complex)
    return 0.5 * (G + G.conj().T)


@dataclass(frozen=True, eq=False)
class PSDReport:
    min_eigenvalue: float
    dim: int
    tolerance: float

    @property
    def verdict(self) -> str:
        return "psd" if self.min_eigenvalue >= -self.tolerance else "not psd"

    @property
    def is_psd(self) -> bool:
        return self.verdict == "psd"


def psd_report(G: np.ndarray, tol: float = 1e-10) -> PSDReport:
    G = hermitian_part(G)
    lam = float(np.linalg.eigvalsh(G)[0]) if G.size else 0.0
    return PSDReport(lam, G.shape[0], tol)


@dataclass(frozen=True, eq=False)
class RangeSpace:
    """``M(A)``: the range of A normed by the minimum-norm preimage.

    The SVD is computed at construction; singular values below
    ``rtol * sigma_max`` are treated as zero.
    """

    A: np.ndarray
    rtol: float = RANK_RTOL
    _U: np.ndarray = field(init=False, repr=False)
    _s: np.ndarray = field(init=False, repr=False)
    _Vh: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
        keep = s > self.rtol * (s[0] if s.size else 0.0)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "_U", U[:, keep])
        object.__setattr__(self, "_s", s[keep])
        object.__setattr__(self, "_Vh", Vh[keep])

    @property
    def rank(self) -> int:
        return int(self._s.size)

    def preimage(self, h: np.ndarray, rtol: float = RANGE_RTOL) -> np.ndarray:
        """Minimum-norm x with ``A x = h``; raises NotInRange if no such x."""
        h = np.asarray(h, dtype=complex)
        y = self._U.conj().T @ h
        x = self._Vh.conj().T @ (y / self._s)
        resid = np.linalg.norm(self.A @ x - h)
        if resid > rtol * np.linalg.norm(h):
            raise NotInRange(f"least-squares residual {resid:.3g} exceeds "
                             f"{rtol:.1g} * ||h|| = {rtol * np.linalg.norm(h):.3g}")
        return x

    def norm(self, h: np.ndarray) -> float:
        return float(np.linalg.norm(self.preimage(h)))

    def inner(self, h: np.ndarray, k: np.ndarray) -> complex:
        return complex(np.vdot(self.preimage(k), self.preimage(h)))


def range_norm(A: np.ndarray, h: np.ndarray) -> float:
    return RangeSpace(A).norm(h)


def douglas_equal(A: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> bool:
    """``M(A)`` and ``M(B)`` coincide isometrically iff ``AA* = BB*``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[0] != B.shape[0]:
        raise ValueError("range spaces must live in the same ambient space")
    return bool(np.abs(A @ A.conj().T - B @ B.conj().T).max() <= tol)


def douglas_contraction(C: np.ndarray, A: np.ndarray, B: np.ndarray,
                        tol: float = 1e-10) -> PSDReport:
    """C maps ``M(A)`` contractively into ``M(B)`` iff ``C A A* C* <= B B*``."""
    C = np.asarray(C, dtype=complex)
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    CA = C @ A
    return psd_report(B @ B.conj().T - CA @ CA.conj().T, tol)


def principal_sqrt(G: np.ndarray, clip: float = PSD_CLIP) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition of ``(G + G*)/2``.

    Eigenvalues below ``-clip`` raise NotPSD.  Eigenvalues within rounding
    noise of zero are set to zero before the square root, which would
    otherwise amplify 1e-16 noise to 1e-8.
    """
    G = hermitian_part(G)
    if G.size == 0:
        return G
    lam, V = np.linalg.eigh(G)
    if lam[0] < -clip:
        raise NotPSD(f"minimum eigenvalue {lam[0]:.3g} is below -{clip:.1g}")
    noise = 64 * np.finfo(float).eps * max(abs(lam[-1]), abs(lam[0]))
    root = np.sqrt(np.where(lam > noise, lam, 0.0))
    return (V * root) @ V.conj().T
