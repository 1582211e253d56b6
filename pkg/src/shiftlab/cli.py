"""``shiftlab <command> --config <path> [--out <dir>] [--seed <u64>] [--n <int>] [--grid <int>]``"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import bergman as bg
from . import debranges as hb
from . import suite as st
from .hardy import AnalyticPoly
from .model_spaces import membership, tm_basis
from .range_spaces import RangeSpace
from .symbols import BlaschkeProduct
from .toeplitz import LaurentSymbol, toeplitz_truncation

COMMANDS = ("mate", "hb-norm", "f-property", "spectral", "theorem-c", "invariance",
            "cyclicity", "bergman", "douglas", "chain-probe", "suite")

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_COEFFS = {"type": "array", "items": _COMPLEX, "minItems": 1}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "space": {"enum": ["hb", "mphibar", "subbergman", "model"]},
        "b": _COEFFS,
        "phi": _COEFFS,
        "f": _COEFFS,
        "g": _COEFFS,
        "theta": {"type": "array", "items": _COMPLEX},
        "N": _POS_INT,
        "M": _POS_INT,
        "guard": {"type": "integer", "minimum": 0},
        "trials": _POS_INT,
        "schedule": {"type": "array", "items": _POS_INT, "minItems": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0} for k in
                           ("mate", "norm", "crosscheck", "fproperty", "spectral", "theorem_c",
                            "invariance", "psd", "membership")},
        },
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    space: str = "hb"
    b: AnalyticPoly | None = None
    phi: AnalyticPoly | None = None
    f: AnalyticPoly | None = None
    g: AnalyticPoly | None = None
    theta: BlaschkeProduct | None = None
    N: int | None = None
    M: int = 4096
    guard: int | None = None
    trials: int | None = None
    schedule: tuple = (128, 256, 512)
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _poly(pairs) -> AnalyticPoly | None:
    if pairs is None:
        return None
    return AnalyticPoly(np.array([complex(re, im) for re, im in pairs]))


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw),
                    key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            keys = [p for p in e.absolute_path if isinstance(p, str)]
            if e.validator == "additionalProperties" and isinstance(e.instance, dict):
                keys += sorted(set(e.instance) - set(e.schema.get("properties", {})))
            line = _line_of(text, keys[-1]) if keys else None
            loc = f"{source}:{line}" if line else source
            lines.append(f"{loc}: field '{where}': {e.message}")
        raise ConfigError("\n".join(lines))
    theta = None
    if "theta" in raw:
        try:
            theta = BlaschkeProduct(tuple(complex(re, im) for re, im in raw["theta"]))
        except ValueError as exc:
            raise ConfigError(f"{source}: field 'theta': {exc}") from None
    return ExperimentConfig(
        space=raw.get("space", "hb"),
        b=_poly(raw.get("b")), phi=_poly(raw.get("phi")),
        f=_poly(raw.get("f")), g=_poly(raw.get("g")), theta=theta,
        N=raw.get("N"), M=raw.get("M", 4096), guard=raw.get("guard"),
        trials=raw.get("trials"), schedule=tuple(raw.get("schedule", (128, 256, 512))),
        seed=raw.get("seed", 0), tolerances=raw.get("tolerances", {}), raw=raw,
    )


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), str(p))


# ---------------------------------------------------------------------------
# commands


def _need(cfg: ExperimentConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"command needs config field(s): {', '.join(missing)}")


def cmd_mate(cfg):
    if cfg.b is None:
        return st.run_suite(cfg.seed, {"mate"})
    return [st.check_mate("config", cfg.b, cfg.tol("mate", 1e-9))]


def _witness_residual(pair, el) -> float:
    from .toeplitz import apply_co_analytic

    lhs = apply_co_analytic(pair.a, el.fplus).coeffs
    rhs = apply_co_analytic(pair.b, el.f).coeffs
    return float(np.abs(lhs - rhs).max())


def cmd_hb_norm(cfg):
    if cfg.space == "hb" and cfg.b is None and cfg.f is None:
        return st.run_suite(cfg.seed, {"hb-norm"})
    _need(cfg, "f")
    f = cfg.f
    inputs = {"space": cfg.space, **{k: v for k, v in cfg.raw.items() if k in ("b", "phi", "f",
                                                                             "theta", "N")}}
    if cfg.space == "hb":
        _need(cfg, "b")

        def run():
            pair = hb.PythagoreanPair.from_b(cfg.b)
            el = hb.hb_embed(pair, f)
            return _witness_residual(pair, el), cfg.tol("norm", 1e-9), {
                "norm_sq": el.norm_sq, "fplus": el.fplus.coeffs[: f.degree + 1],
                "N_used": el.N_used}
        out = [st.timed("hb-norm:config", inputs, run)]
        N = cfg.N or 512
        if f.degree <= N // 4:
            out.append(st.check_hb_crosscheck("config", cfg.b, f, N, cfg.tol("crosscheck", 0.01)))
        return out
    if cfg.space == "mphibar":
        _need(cfg, "phi")

        def run():
            N = cfg.N or max(64, 4 * f.N)
            T = toeplitz_truncation(LaurentSymbol.co_analytic(cfg.phi), N).matrix
            space = RangeSpace(T)
            h = f.padded(N).coeffs
            x = space.preimage(h)
            resid = float(np.linalg.norm(T @ x - h))
            return resid, cfg.tol("norm", 1e-9), {"norm_sq": float(np.linalg.norm(x) ** 2),
                                                  "N": N}
        return [st.timed("hb-norm:mphibar", inputs, run)]
    if cfg.space == "subbergman":
        _need(cfg, "b")

        def run():
            n = bg.subbergman_norm(cfg.b, bg.BergmanPoly(f.coeffs), cfg.N)
            return 0.0, cfg.tol("norm", 1e-9), {"norm_sq": n * n}
        return [st.timed("hb-norm:subbergman", inputs, run)]
    _need(cfg, "theta")

    def run():
        K = tm_basis(cfg.theta, cfg.N or 256)
        return membership(f, K), cfg.tol("membership", 1e-8), {"dim": K.dim}
    return [st.timed("hb-norm:model-membership", inputs, run)]


def cmd_f_property(cfg):
    if cfg.f is None:
        trials = cfg.trials or 100

        def run():
            out = st.f_property_trials(cfg.seed, trials)
            return out["max_excess"], cfg.tol("fproperty", 1e-8), out
        return [st.timed("f-property:random", {"seed": cfg.seed, "trials": trials}, run)]
    _need(cfg, "b", "theta")

    def run():
        nf, nq = hb.f_property_check(hb.PythagoreanPair.from_b(cfg.b), cfg.f, cfg.theta)
        return nq - nf, cfg.tol("fproperty", 1e-8), {"norm_f": nf, "norm_quotient": nq}
    return [st.timed("f-property:config", dict(cfg.raw), run)]


def cmd_spectral(cfg):
    if cfg.b is None:
        return st.run_suite(cfg.seed, {"spectral"})
    _need(cfg, "f")
    g = cfg.g if cfg.g is not None else cfg.f

    def run():
        pair = hb.PythagoreanPair.from_b(cfg.b)
        resid = st.spectral_moment_residual(pair, cfg.f, g, 16, cfg.M)
        u = hb.spectral_density(pair, cfg.f, g, cfg.M)
        return resid, cfg.tol("spectral", 1e-6), {
            "moments": [u.moment(n) for n in range(4)],
            "min_real_part": float(u.values.real.min())}
    return [st.timed("spectral:config", dict(cfg.raw), run)]


def cmd_theorem_c(cfg):
    if cfg.b is None:
        return st.run_suite(cfg.seed, {"theorem-c"})
    _need(cfg, "phi", "f")
    g = cfg.g if cfg.g is not None else cfg.f

    def run():
        pair = hb.PythagoreanPair.from_b(cfg.b)
        return hb.verify_theorem_C(pair, cfg.phi, cfg.f, g, cfg.M), cfg.tol("theorem_c", 1e-6), {}
    return [st.timed("theorem-c:config", dict(cfg.raw), run)]


def cmd_invariance(cfg):
    if cfg.b is None or cfg.theta is None:
        return st.run_suite(cfg.seed, {"invariance"})

    def run():
        pair = hb.PythagoreanPair.from_b(cfg.b)
        rng = st.case_rng(cfg.seed, "invariance:config")
        rep = hb.invariant_trace_suite(pair, cfg.theta, cfg.N or 256, cfg.trials or 200, rng)
        resid = max(rep.max_invariance_residual, rep.max_mate_residual)
        if not rep.passed(math.inf):
            resid = math.inf
        return resid, cfg.tol("invariance", 1e-7), {
            "subspaces": len(rep.subspaces),
            "divisors": [repr(s.divisor) for s in rep.subspaces],
            "eigenfactors": [s.eigenfactors for s in rep.subspaces],
            "search": rep.search}
    return [st.timed("invariance:config", dict(cfg.raw), run)]


def cmd_cyclicity(cfg):
    if cfg.f is None:
        return st.run_suite(cfg.seed, {"cyclicity"})
    b = cfg.b if cfg.b is not None else AnalyticPoly(np.zeros(1))

    def run():
        rep = hb.cyclicity_probe(hb.PythagoreanPair.from_b(b), cfg.f, cfg.schedule)
        return 0.0, 0.0, {"ranks": {str(k): v for k, v in rep.ranks.items()},
                          "verdict": rep.verdict, "heuristic": rep.heuristic}
    return [st.timed("cyclicity:config", dict(cfg.raw), run)]


def cmd_bergman(cfg):
    if cfg.b is None:
        return st.run_suite(cfg.seed, {"bergman"})
    N = cfg.N or 128

    def run():
        rep = bg.lemma52_check(cfg.b, N, cfg.tol("psd", 1e-10))
        return -rep.min_eigenvalue, rep.tolerance, {"min_eigenvalue": rep.min_eigenvalue,
                                                    "verdict": rep.verdict, "N": N}
    return [st.timed("bergman-shift-psd:config", dict(cfg.raw), run)]


def cmd_douglas(cfg):
    return st.check_douglas(cfg.seed, cfg.trials or 50)


def cmd_chain_probe(cfg):
    if cfg.b is None:
        return st.run_suite(cfg.seed, {"chain-probe"})
    N = cfg.N or 64

    def run():
        rep = bg.identity_chain_probe(cfg.b, N, seed=cfg.seed, guard=cfg.guard)
        rep2 = bg.identity_chain_probe(cfg.b, 2 * N, seed=cfg.seed, guard=cfg.guard)
        drift = abs(rep2.kappa - rep.kappa) / rep.kappa
        return drift, 0.05, {
            "entry00": rep.entry00,
            "discrepancies": {f"{p}|{q}": v for (p, q), v in rep.discrepancies.items()},
            "harmonic": {f"{p}|{q}": v for (p, q), v in rep.harmonic_discrepancies.items()},
            "kappa": rep.kappa, "kappa_doubled": rep2.kappa}
    return [st.timed("chain-probe:config", dict(cfg.raw), run)]


def cmd_suite(cfg):
    return st.run_suite(cfg.seed)


HANDLERS = {
    "mate": cmd_mate, "hb-norm": cmd_hb_norm, "f-property": cmd_f_property,
    "spectral": cmd_spectral, "theorem-c": cmd_theorem_c, "invariance": cmd_invariance,
    "cyclicity": cmd_cyclicity, "bergman": cmd_bergman, "douglas": cmd_douglas,
    "chain-probe": cmd_chain_probe, "suite": cmd_suite,
}


# ---------------------------------------------------------------------------
# reports


@dataclass
class SuiteReport:
    command: str
    seed: int
    config: dict
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def aggregate(self) -> str:
        return "pass" if self.passed else "fail"


def run(command: str, cfg: ExperimentConfig) -> SuiteReport:
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    return SuiteReport(command, cfg.seed, cfg.raw, HANDLERS[command](cfg))


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, list):
        return [_finite(v) for v in x]
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    return x


CSV_COLUMNS = ("check", "input_digest", "residual", "tolerance", "verdict", "millis")


def report_document(report: SuiteReport, timings: bool = True) -> dict:
    checks = []
    for r in report.results:
        checks.append({
            "check": r.check, "input_digest": r.input_digest, "residual": r.residual,
            "tolerance": r.tolerance, "verdict": r.verdict,
            "millis": r.millis if timings else 0, "details": r.details,
        })
    counts = {v: sum(r.verdict == v for r in report.results) for v in ("pass", "fail", "error")}
    return _finite(st._jsonable({
        "command": report.command, "seed": report.seed, "config": report.config,
        "aggregate": report.aggregate, "counts": counts, "checks": checks,
    }))


def report_write(report: SuiteReport, path, timings: bool = True) -> tuple[Path, Path]:
    """Write ``report.json`` and ``residuals.csv`` into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    jpath, cpath = out / "report.json", out / "residuals.csv"
    doc = report_document(report, timings)
    jpath.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with cpath.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.results:
            w.writerow([r.check, r.input_digest, repr(r.residual), repr(r.tolerance), r.verdict,
                        r.millis if timings else 0])
    return jpath, cpath


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftlab", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON experiment config (complex numbers as [re, im])")
    p.add_argument("--out", default="shiftlab-out", help="report directory")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--n", type=int, help="overrides the config truncation N")
    p.add_argument("--grid", type=int, help="overrides the config grid size M")
    p.add_argument("--stable", action="store_true",
                   help="write 0 for wall times so reports are byte-identical across runs")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.n is not None:
            cfg.N = args.n
        if args.grid is not None:
            cfg.M = args.grid
        report = run(args.command, cfg)
    except ConfigError as exc:
        print(f"shiftlab: config error:\n{exc}", file=sys.stderr)
        return 2
    jpath, cpath = report_write(report, args.out, timings=not args.stable)
    for r in report.results:
        print(f"{r.verdict:5s}  {r.check}  residual={r.residual:.3g}  tol={r.tolerance:.3g}")
    print(f"{report.aggregate}: {len(report.results)} checks -> {jpath}, {cpath}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
