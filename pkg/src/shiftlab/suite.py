"""Built-in corpus and the checks run by the ``shiftlab`` command line."""

from __future__ import annotations

import hashlib
import json
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bergman as bg
from . import debranges as hb
from .hardy import AnalyticPoly, backward_shift, cauchy_kernel
from .model_spaces import lattice_enumerate, random_invariant_search, tm_basis
from .range_spaces import RangeSpace, douglas_contraction, douglas_equal
from .symbols import BlaschkeProduct, pythagorean_mate

SQRT_HALF = 1 / math.sqrt(2)


def _seeded_b(seed: int, degree: int) -> list[complex]:
    rng = np.random.default_rng(seed)
    return [complex(c) for c in hb.random_b(rng, degree, 0.95).coeffs]


# Polynomial b's.  The first two have closed-form mates; the rest have
# sup norm <= 0.95 and degree <= 8.
B_CORPUS: dict[str, list[complex]] = {
    "half(1+z)": [0.5, 0.5],
    "z/sqrt2": [0.0, SQRT_HALF],
    "zero": [0.0],
    "const0.6": [0.6],
    "rand-deg2": _seeded_b(102, 2),
    "rand-deg3": _seeded_b(103, 3),
    "rand-deg5": _seeded_b(105, 5),
    "rand-deg8": _seeded_b(108, 8),
}

BOUNDED_B = [name for name in B_CORPUS if name != "half(1+z)"]

THETA_CORPUS: dict[str, tuple] = {
    "z": ((0.0, 1),),
    "z^2": ((0.0, 2),),
    "z^3": ((0.0, 3),),
    "z^6": ((0.0, 6),),
    "b(1/2)": (0.5,),
    "b(1/3)b(1/2)": (1 / 3, 0.5),
    "z*b(1/2)": (0.0, 0.5),
    "distinct4": (0.6j, -0.4, 0.3 + 0.3j, 0.5 - 0.2j),
    "distinct6": (0.2, -0.5j, 0.55 + 0.1j, -0.3 + 0.4j, -0.6, 0.1 - 0.6j),
}

TRACE_B = ["half(1+z)", "z/sqrt2", "zero", "rand-deg3"]


def b_poly(name: str) -> AnalyticPoly:
    return AnalyticPoly(np.array(B_CORPUS[name], dtype=complex))


def theta_of(name: str) -> BlaschkeProduct:
    return BlaschkeProduct(THETA_CORPUS[name])


def case_rng(seed: int, name: str) -> np.random.Generator:
    """Per-check generator, independent of execution order."""
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def digest(inputs) -> str:
    blob = json.dumps(_jsonable(inputs), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class CheckResult:
    check: str
    inputs: dict
    residual: float
    tolerance: float
    verdict: str
    millis: int = 0
    details: dict = field(default_factory=dict)

    @property
    def input_digest(self) -> str:
        return digest(self.inputs)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _verdict(residual: float, tolerance: float) -> str:
    return "pass" if np.isfinite(residual) and residual <= tolerance else "fail"


def timed(check: str, inputs: dict, fn: Callable[[], tuple]) -> CheckResult:
    """Run ``fn() -> (residual, tolerance, details)``; exceptions become verdict 'error'."""
    t0 = time.perf_counter()
    try:
        residual, tolerance, details = fn()
        residual = float(residual)
        verdict = _verdict(residual, tolerance)
    except Exception as exc:  # noqa: BLE001 - reported, never swallowed silently
        residual, tolerance, verdict = float("nan"), float("nan"), "error"
        details = {"error": f"{type(exc).__name__}: {exc}"}
    millis = int(round(1000 * (time.perf_counter() - t0)))
    return CheckResult(check, inputs, residual, tolerance, verdict, millis, _jsonable(details))


# ---------------------------------------------------------------------------
# individual checks


def check_mate(name: str, b: AnalyticPoly, tol: float = 1e-9) -> CheckResult:
    def run():
        a = pythagorean_mate(b)
        return hb.mate_identity_error(b, a), tol, {"a": a.coeffs}
    return timed(f"mate:{name}", {"b": b.coeffs}, run)


def check_mate_closed(name: str, b: AnalyticPoly, expected, tol: float = 1e-10) -> CheckResult:
    def run():
        a = pythagorean_mate(b)
        exp = np.asarray(expected, dtype=complex)
        n = max(a.N, exp.size)
        diff = np.abs(np.pad(a.coeffs, (0, n - a.N)) - np.pad(exp, (0, n - exp.size))).max()
        return diff, tol, {"a": a.coeffs, "expected": exp}
    return timed(f"mate-closed:{name}", {"b": b.coeffs}, run)


def check_hb_norm(bname: str, b: AnalyticPoly, f: AnalyticPoly, expected: float | None,
                  tol: float = 1e-8) -> CheckResult:
    def run():
        el = hb.hb_embed(hb.PythagoreanPair.from_b(b), f)
        resid = abs(el.norm_sq - expected) if expected is not None else 0.0
        return resid, tol, {"norm_sq": el.norm_sq, "fplus": el.fplus.coeffs[: f.degree + 1],
                            "N_used": el.N_used}
    return timed(f"hb-norm:{bname}:f={_short(f)}", {"b": b.coeffs, "f": f.coeffs}, run)


def check_hb_crosscheck(bname: str, b: AnalyticPoly, f: AnalyticPoly, N: int = 512,
                        tol: float = 0.01) -> CheckResult:
    def run():
        pair = hb.PythagoreanPair.from_b(b)
        exact = hb.hb_embed(pair, f).norm
        gram = hb.hb_norm_crosscheck(pair, f, N)
        return abs(gram - exact) / exact, tol, {"solve_norm": exact, "gram_norm": gram}
    return timed(f"hb-crosscheck:{bname}:f={_short(f)}", {"b": b.coeffs, "f": f.coeffs, "N": N},
                 run)


def f_property_trials(seed: int, trials: int, b_names=None) -> dict:
    b_names = list(B_CORPUS) if b_names is None else b_names
    rng = case_rng(seed, "f-property")
    pairs = {n: hb.PythagoreanPair.from_b(b_poly(n)) for n in b_names}
    worst = -np.inf
    violations = 0
    for i in range(trials):
        name = b_names[i % len(b_names)]
        f, theta = hb.divisible_pair(rng)
        nf, nq = hb.f_property_check(pairs[name], f, theta)
        worst = max(worst, nq - nf)
        violations += nq > nf + 1e-8
    return {"trials": trials, "max_excess": float(worst), "violations": int(violations)}


def check_f_property(seed: int, trials: int = 100, tol: float = 1e-8) -> CheckResult:
    def run():
        out = f_property_trials(seed, trials)
        return out["max_excess"], tol, out
    return timed("f-property:random", {"seed": seed, "trials": trials}, run)


def _test_functions(rng: np.random.Generator) -> list[tuple[str, object]]:
    return [
        ("1", AnalyticPoly(np.array([1.0]))),
        ("z", AnalyticPoly(np.array([0.0, 1.0]))),
        ("rand4", hb.random_poly(rng, 4)),
        ("rand7", hb.random_poly(rng, 7)),
        ("k(0.4i)", lambda N: cauchy_kernel(0.4j, N)),
    ]


def spectral_moment_residual(pair, f, g, n_max: int = 16, M: int = 4096) -> float:
    u = hb.spectral_density(pair, f, g, M)
    x = u.f.f
    worst = 0.0
    for n in range(n_max + 1):
        direct = hb.hb_inner(hb.hb_embed(pair, x), u.g)
        worst = max(worst, abs(direct - u.moment(n)))
        x = backward_shift(x).padded(u.f.f.N)
    return worst


def check_spectral(bname: str, seed: int, tol: float = 1e-6, M: int = 4096) -> CheckResult:
    def run():
        pair = hb.PythagoreanPair.from_b(b_poly(bname))
        fs = _test_functions(case_rng(seed, f"spectral:{bname}"))
        worst = 0.0
        for (_, f), (_, g) in zip(fs, fs[1:] + fs[:1]):
            worst = max(worst, spectral_moment_residual(pair, f, g, 16, M))
        for _, f in fs:
            worst = max(worst, spectral_moment_residual(pair, f, f, 16, M))
        return worst, tol, {"pairs": 2 * len(fs), "n_max": 16, "M": M}
    return timed(f"spectral:{bname}", {"b": B_CORPUS[bname], "seed": seed, "M": M}, run)


def check_theorem_c(bname: str, seed: int, n_phi: int = 10, tol: float = 1e-6,
                    M: int = 4096) -> CheckResult:
    def run():
        pair = hb.PythagoreanPair.from_b(b_poly(bname))
        rng = case_rng(seed, f"theorem-c:{bname}")
        fs = _test_functions(rng)
        worst = 0.0
        for i in range(n_phi):
            phi = hb.random_poly(rng, int(rng.integers(0, 7)))
            f = fs[i % len(fs)][1]
            g = fs[(i + 2) % len(fs)][1]
            worst = max(worst, hb.verify_theorem_C(pair, phi, f, g, M))
        return worst, tol, {"n_phi": n_phi, "M": M}
    return timed(f"theorem-c:{bname}", {"b": B_CORPUS[bname], "seed": seed, "M": M}, run)


def check_invariance(bname: str, tname: str, seed: int, n_search: int = 200,
                     tol: float = 1e-7) -> CheckResult:
    def run():
        pair = hb.PythagoreanPair.from_b(b_poly(bname))
        rep = hb.invariant_trace_suite(pair, theta_of(tname), 256, n_search,
                                       case_rng(seed, f"invariance:{bname}:{tname}"))
        resid = max(rep.max_invariance_residual, rep.max_mate_residual)
        structural = all(s.hb_converged and s.divisor_roundtrip and s.mate_min_singular > 0
                         and all(abs(e) > 0 for e in s.eigenfactors) for s in rep.subspaces)
        if not structural or rep.search.get("outside", 0):
            resid = float("inf")
        details = {
            "subspaces": len(rep.subspaces),
            "divisors": [repr(s.divisor) for s in rep.subspaces],
            "eigenfactors": [s.eigenfactors for s in rep.subspaces],
            "min_singular": min(s.mate_min_singular for s in rep.subspaces),
            "search": rep.search,
            "phi_lattice_residual": _phi_lattice_residual(pair, tname, seed),
        }
        return resid, tol, details
    return timed(f"invariance:{bname}:{tname}",
                 {"b": B_CORPUS[bname], "theta": THETA_CORPUS[tname], "seed": seed,
                  "search": n_search}, run)


def _phi_lattice_residual(pair, tname: str, seed: int, n_phi: int = 10) -> float:
    rng = case_rng(seed, f"phi-lattice:{tname}")
    K = tm_basis(theta_of(tname), 256)
    worst = 0.0
    for _ in range(n_phi):
        phi = hb.random_poly(rng, int(rng.integers(0, 6)))
        for E in lattice_enumerate(K):
            worst = max(worst, hb.co_analytic_invariance_residual(pair, E, phi))
    return worst


def check_lattice_search(tname: str, seed: int, n: int = 200) -> CheckResult:
    def run():
        K = tm_basis(theta_of(tname), 256)
        out = random_invariant_search(K, lattice_enumerate(K), n,
                                      case_rng(seed, f"lattice:{tname}"))
        return out["outside"], 0, out
    return timed(f"lattice-search:{tname}", {"theta": THETA_CORPUS[tname], "seed": seed}, run)


def exp_series(N: int) -> AnalyticPoly:
    c = np.array([math.exp(-math.lgamma(n + 1)) for n in range(N)], dtype=complex)
    return AnalyticPoly(c, N - 1, 2 * abs(c[-1]))


def double_pole_series(N: int) -> AnalyticPoly:
    n = np.arange(N)
    c = (n + 1) * 0.5 ** n
    return AnalyticPoly(c.astype(complex), N - 1, float(N * 0.5 ** N * 4))


CYCLICITY_CASES = {
    "k(1/2)": (lambda N: cauchy_kernel(0.5, N), 1),
    "1/(1-z/2)^2": (double_pole_series, 2),
    "exp": (exp_series, None),
}


def check_cyclicity(name: str, bname: str = "half(1+z)",
                    schedule=(128, 256, 512)) -> CheckResult:
    source, expected = CYCLICITY_CASES[name]

    def run():
        rep = hb.cyclicity_probe(hb.PythagoreanPair.from_b(b_poly(bname)), source, schedule)
        ok = all(r == expected for r in rep.ranks.values())
        return (0.0 if ok else 1.0), 0.0, {"ranks": {str(k): v for k, v in rep.ranks.items()},
                                           "verdict": rep.verdict}
    return timed(f"cyclicity:{name}", {"f": name, "b": B_CORPUS[bname],
                                       "schedule": list(schedule)}, run)


def check_lemma52(bname: str, N: int = 128, tol: float = 1e-10) -> CheckResult:
    def run():
        rep = bg.lemma52_check(b_poly(bname), N, tol)
        return -rep.min_eigenvalue, tol, {"min_eigenvalue": rep.min_eigenvalue,
                                          "verdict": rep.verdict}
    return timed(f"bergman-shift-psd:{bname}", {"b": B_CORPUS[bname], "N": N}, run)


def check_bergman_diagonals(N: int = 128, tol: float = 1e-12) -> CheckResult:
    def run():
        b = b_poly("z/sqrt2")
        n = np.arange(N)
        left = np.diag(bg.subbergman_gram(b, N, "left")).real
        diff = np.diag(bg.lemma52_difference(b, N)).real
        e1 = np.abs(left - (n + 3) / (2 * (n + 2))).max()
        e2 = np.abs(diff - (n + 5) / (2 * (n + 2) * (n + 3))).max()
        return max(e1, e2), tol, {"left_diag_err": e1, "difference_diag_err": e2}
    return timed("bergman-diagonals:z/sqrt2", {"N": N}, run)


def check_chain_probe(bname: str = "z/sqrt2", tol: float = 1e-12) -> CheckResult:
    def run():
        b = b_poly(bname)
        rep = bg.identity_chain_probe(b, 64)
        d00 = rep.entry00["I-TbbarTb"] - rep.entry00["TabarTa"]
        expected = 0.25 if bname == "z/sqrt2" else d00
        return abs(d00 - expected), tol, {
            "entry00": rep.entry00, "discrepancy00": d00,
            "discrepancies": {f"{p}|{q}": v for (p, q), v in rep.discrepancies.items()},
            "harmonic": {f"{p}|{q}": v for (p, q), v in rep.harmonic_discrepancies.items()},
        }
    return timed(f"chain-probe:{bname}", {"b": B_CORPUS[bname]}, run)


def check_chain_kappa(bname: str = "z/sqrt2", tol: float = 0.05) -> CheckResult:
    def run():
        b = b_poly(bname)
        k64 = bg.identity_chain_probe(b, 64).kappa
        k128 = bg.identity_chain_probe(b, 128).kappa
        if not (np.isfinite(k64) and np.isfinite(k128)):
            return float("inf"), tol, {"kappa64": k64, "kappa128": k128}
        return abs(k128 - k64) / k64, tol, {"kappa64": k64, "kappa128": k128}
    return timed(f"chain-kappa:{bname}", {"b": B_CORPUS[bname]}, run)


def _random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _random_matrix(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    Y = rng.standard_normal((rank, n)) + 1j * rng.standard_normal((rank, n))
    return X @ Y / n


def douglas_equal_trial(rng: np.random.Generator, n: int = 5, n_probes: int = 20) -> dict:
    """One engineered pair: ``B = A U`` (equal range norms) or ``B = s A U``."""
    A = _random_matrix(rng, n, int(rng.integers(1, n + 1)))
    engineered_equal = bool(rng.random() < 0.5)
    s = 1.0 if engineered_equal else float(rng.choice([0.5, 2.0]))
    B = s * A @ _random_unitary(rng, n)
    verdict = douglas_equal(A, B, 1e-10)
    MA, MB = RangeSpace(A), RangeSpace(B)
    agree = True
    for _ in range(n_probes):
        h = A @ (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        na, nb = MA.norm(h), MB.norm(h)
        if abs(na - nb) > 1e-6 * na:
            agree = False
    return {"verdict": verdict, "probes_agree": agree, "engineered_equal": engineered_equal,
            "scale": s}


def douglas_contraction_trial(rng: np.random.Generator, n: int = 5,
                              n_probes: int = 20) -> dict:
    """C scaled so that ``||B^{-1} C A|| = s`` with s in {0.8, 1.25}."""
    A = _random_matrix(rng, n) + 2 * np.eye(n)
    B = _random_matrix(rng, n) + 2 * np.eye(n)
    C = _random_matrix(rng, n)
    s = float(rng.choice([0.8, 1.25]))
    X = np.linalg.solve(B, C @ A)
    C = C * (s / np.linalg.norm(X, 2))
    rep = douglas_contraction(C, A, B, 1e-10)
    MA, MB = RangeSpace(A), RangeSpace(B)
    probes = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(n_probes)]
    probes.append(np.linalg.svd(np.linalg.solve(B, C @ A))[2][0].conj())
    holds = all(MB.norm(C @ A @ x) <= MA.norm(A @ x) + 1e-6 for x in probes)
    return {"psd": rep.is_psd, "min_eigenvalue": rep.min_eigenvalue, "probes_hold": holds,
            "scale": s}


def check_douglas(seed: int, trials: int = 50) -> list[CheckResult]:
    def eq():
        rng = case_rng(seed, "douglas-equal")
        res = [douglas_equal_trial(rng) for _ in range(trials)]
        mism = sum(r["verdict"] != r["probes_agree"] for r in res)
        wrong = sum(r["verdict"] != r["engineered_equal"] for r in res)
        return mism + wrong, 0, {"trials": trials, "mismatches": mism,
                                 "true_verdicts": sum(r["verdict"] for r in res)}

    def contraction():
        rng = case_rng(seed, "douglas-contraction")
        res = [douglas_contraction_trial(rng) for _ in range(trials)]
        mism = sum(r["psd"] != r["probes_hold"] for r in res)
        return mism, 0, {"trials": trials, "mismatches": mism,
                         "psd_verdicts": sum(r["psd"] for r in res)}

    return [timed("douglas-equal:random", {"seed": seed, "trials": trials}, eq),
            timed("douglas-contraction:random", {"seed": seed, "trials": trials}, contraction)]


def _short(f: AnalyticPoly) -> str:
    terms = []
    for k, c in enumerate(f.coeffs[: f.degree + 1]):
        if c == 0:
            continue
        cs = f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}i)"
        terms.append(cs if k == 0 else (f"{cs}z^{k}" if cs not in ("1",) else f"z^{k}"))
    return "+".join(terms) or "0"


# ---------------------------------------------------------------------------
# corpus manifest


def manifest(seed: int = 0) -> list[tuple[str, Callable[[], list[CheckResult]]]]:
    """Ordered list of (group, thunk) pairs making up the full suite."""
    one = AnalyticPoly(np.array([1.0]))
    z = AnalyticPoly(np.array([0.0, 1.0]))
    half = b_poly("half(1+z)")
    items: list[tuple[str, Callable[[], list[CheckResult]]]] = []
    for name in BOUNDED_B:
        items.append(("mate", lambda name=name: [check_mate(name, b_poly(name))]))
    items.append(("mate", lambda: [check_mate_closed("half(1+z)", half, [0.5, -0.5])]))
    items.append(("mate", lambda: [check_mate_closed("z/sqrt2", b_poly("z/sqrt2"),
                                                     [SQRT_HALF])]))
    items.append(("hb-norm", lambda: [check_hb_norm("half(1+z)", half, one, 2.0),
                                      check_hb_norm("half(1+z)", half, z, 6.0),
                                      check_hb_crosscheck("half(1+z)", half, one),
                                      check_hb_crosscheck("half(1+z)", half, z)]))
    items.append(("f-property", lambda: [check_f_property(seed)]))
    for name in ("half(1+z)", "z/sqrt2", "rand-deg3", "rand-deg8"):
        items.append(("spectral", lambda name=name: [check_spectral(name, seed)]))
        items.append(("theorem-c", lambda name=name: [check_theorem_c(name, seed)]))
    for bname in TRACE_B:
        for tname in THETA_CORPUS:
            n_search = 200 if bname == "half(1+z)" else 0
            items.append(("invariance", lambda b=bname, t=tname, n=n_search:
                          [check_invariance(b, t, seed, n)]))
    for case in CYCLICITY_CASES:
        items.append(("cyclicity", lambda case=case: [check_cyclicity(case)]))
    for name in B_CORPUS:
        items.append(("bergman", lambda name=name: [check_lemma52(name)]))
    items.append(("bergman", lambda: [check_bergman_diagonals()]))
    items.append(("chain-probe", lambda: [check_chain_probe(), check_chain_kappa()]))
    items.append(("douglas", lambda: check_douglas(seed)))
    return items


def run_suite(seed: int = 0, groups: set[str] | None = None) -> list[CheckResult]:
    out: list[CheckResult] = []
    for group, thunk in manifest(seed):
        if groups is None or group in groups:
            out.extend(thunk())
    return out
