"""Batch verification driver: configuration, seeded Monte Carlo, suites, reports.

Randomness comes from counter-based Philox streams keyed by (seed, suite, replica
block), so results do not depend on execution order.  A report is a JSON
document with the config echo, the records sorted by id and a sha256 hash over
everything except wall-clock fields.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import random
import time
import zlib
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import IO, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import crp, gamma, orthopoly, pascal, unitary, univariate
from .axioms import (AxiomReport, FockRepresentation, check_axioms, random_fock_vector, random_polynomial,
                     random_test_function)
from .exact import GaussianRational, conj
from .fock import FockVector, SiteSpace

__all__ = [
    "SUITES",
    "SEED_ENV",
    "ConfigError",
    "RunConfig",
    "MCEstimate",
    "ReportRecord",
    "rng_stream",
    "mc_blocks",
    "run_suite",
    "build_report",
    "determinism_hash",
    "convergence_study",
    "write_convergence_csv",
]

SUITES = ("axioms-fock", "unitary-bch", "gamma", "pascal", "univariate", "crp", "mc-crosschecks")
SEED_ENV = "SU11LAB_SEED"
DEFAULT_SEED = 20240917


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("seed", f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    suites: List[str] = field(default_factory=lambda: list(SUITES))
    S: int = 2
    alpha: List[str] = field(default_factory=lambda: ["1/2", "3/2"])
    M: Optional[int] = None            # None: per-check defaults (D_check + 20, certified BCH cap)
    d_check: int = 6
    n_cap: int = 6
    s: str = "1/2"
    replicas: int = 10000
    seed: int = field(default_factory=_default_seed)
    eps_alg: float = 1e-12
    eps_num: float = 1e-8
    se_mult: float = 3.0
    n_pairs: int = 50

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not isinstance(self.suites, list) or any(not isinstance(x, str) for x in self.suites):
            raise ConfigError("suites", "must be a list of suite names")
        for name in self.suites:
            if name not in SUITES:
                raise ConfigError("suites", f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        if not isinstance(self.S, int) or self.S < 1:
            raise ConfigError("S", "must be a positive integer")
        if len(self.alpha) != self.S:
            raise ConfigError("alpha", f"expected {self.S} entries, got {len(self.alpha)}")
        try:
            alphas = [Fraction(str(a)) for a in self.alpha]
        except (ValueError, ZeroDivisionError):
            raise ConfigError("alpha", "entries must be rationals such as 1/2 or 3") from None
        if any(a <= 0 for a in alphas):
            raise ConfigError("alpha", "entries must be positive")
        self.alpha = [str(a) for a in alphas]
        if self.M is not None and (not isinstance(self.M, int) or self.M < 1):
            raise ConfigError("M", "must be a positive integer or null")
        if not isinstance(self.d_check, int) or self.d_check < 0:
            raise ConfigError("d_check", "must be a nonnegative integer")
        if self.M is not None and self.M < self.d_check:
            raise ConfigError("M", f"truncation {self.M} is below the degree window d_check={self.d_check}")
        if not isinstance(self.n_cap, int) or self.n_cap < 1:
            raise ConfigError("n_cap", "must be a positive integer")
        try:
            s = Fraction(str(self.s))
        except (ValueError, ZeroDivisionError):
            raise ConfigError("s", "must be a rational such as 1/2") from None
        if not 0 < s < 1:
            raise ConfigError("s", "must lie strictly between 0 and 1")
        self.s = str(s)
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise ConfigError("replicas", "must be a positive integer")
        if "mc-crosschecks" in self.suites and self.replicas < 100:
            raise ConfigError("replicas", "Monte Carlo suites need at least 100 replicas")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")
        for name in ("eps_alg", "eps_num", "se_mult"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(name, "must be positive")
        if not isinstance(self.n_pairs, int) or self.n_pairs < 1:
            raise ConfigError("n_pairs", "must be a positive integer")

    @property
    def space(self) -> SiteSpace:
        return SiteSpace([Fraction(a) for a in self.alpha])

    @property
    def pascal_params(self) -> pascal.PascalParams:
        return pascal.PascalParams(Fraction(self.s))

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: Dict, **overrides) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        merged = dict(data or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        if "alpha" in merged and "S" not in merged:
            merged["S"] = len(merged["alpha"])
        return cls(**merged)

    @classmethod
    def load(cls, path: str, **overrides) -> "RunConfig":
        """YAML or JSON key/value document mirroring the dataclass fields."""
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        return cls.from_mapping(data, **overrides)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    R: int
    seed: int

    @classmethod
    def from_samples(cls, values: np.ndarray, seed: int) -> "MCEstimate":
        values = np.asarray(values, dtype=float)
        R = values.size
        return cls(float(values.mean()), float(values.std(ddof=1) / math.sqrt(R)), R, seed)

    def agrees(self, target: float, se_mult: float) -> bool:
        return abs(self.mean - target) <= se_mult * self.stderr


@dataclass
class ReportRecord:
    id: str
    anchor: str
    status: str            # exact-pass | tol-pass | fail
    residual: float
    runtime: float = 0.0
    detail: Dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def rng_stream(seed: int, suite: str, replica: int = 0) -> np.random.Generator:
    """Independent Philox stream for (seed, suite, replica)."""
    ss = np.random.SeedSequence([seed, zlib.crc32(suite.encode()), replica])
    return np.random.Generator(np.random.Philox(ss))


def mc_blocks(seed: int, key: str, R: int, block: int = 20000) -> Iterator[Tuple[np.random.Generator, int]]:
    """Split R replicas into fixed blocks, each with its own stream."""
    for b, start in enumerate(range(0, R, block)):
        yield rng_stream(seed, key, b), min(block, R - start)


# ------------------------------------------------------------------ helpers

def _finite(x) -> float:
    x = float(abs(complex(x))) if not isinstance(x, (int, float, Fraction)) else float(abs(x))
    return x


def _exact(rid: str, anchor: str, ok: bool, residual=0.0, **detail) -> ReportRecord:
    return ReportRecord(rid, anchor, "exact-pass" if ok else "fail", _finite(residual), detail=detail)


def _tol(rid: str, anchor: str, residual: float, tol: float, **detail) -> ReportRecord:
    residual = float(residual)
    ok = math.isfinite(residual) and residual <= tol
    detail.setdefault("tolerance", tol)
    return ReportRecord(rid, anchor, "tol-pass" if ok else "fail", residual, detail=detail)


def _mc(rid: str, anchor: str, est: MCEstimate, target: float, se_mult: float, **detail) -> ReportRecord:
    ok = est.agrees(target, se_mult)
    detail.update({"mean": est.mean, "stderr": est.stderr, "R": est.R, "seed": est.seed,
                   "target": target, "se_mult": se_mult})
    return ReportRecord(rid, anchor, "tol-pass" if ok else "fail", abs(est.mean - target), detail=detail)


def _timed(fn: Callable[[], Sequence[ReportRecord]], rid: str, anchor: str) -> List[ReportRecord]:
    t0 = time.perf_counter()
    try:
        recs = list(fn())
    except Exception as exc:  # a crashing check is a failing check
        recs = [ReportRecord(rid, anchor, "fail", math.inf, detail={"error": f"{type(exc).__name__}: {exc}"})]
    dt = (time.perf_counter() - t0) / max(len(recs), 1)
    for r in recs:
        r.runtime = dt
    return recs


def _py_rng(cfg: RunConfig, suite: str) -> random.Random:
    return random.Random(int(rng_stream(cfg.seed, suite).integers(2 ** 63)))


def _random_space(rng: random.Random, S_max: int = 3) -> SiteSpace:
    S = rng.randint(1, S_max)
    return SiteSpace([Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(S)])


# ------------------------------------------------------------------- suites

def _axiom_run(cfg: RunConfig, suite: str, kind: str) -> AxiomReport:
    rng = _py_rng(cfg, suite + "/" + kind)
    rep_ = AxiomReport()
    deg = max(min(cfg.n_cap, 6) - 2, 1)
    for _ in range(cfg.n_pairs):
        sp = _random_space(rng)
        phi, theta = random_test_function(rng, sp.S), random_test_function(rng, sp.S)
        if kind == "fock":
            caps = (deg + 2,) * sp.S
            rep = FockRepresentation(sp, caps)
            vecs = [random_fock_vector(rng, sp, deg, caps) for _ in range(2)]
        else:
            if kind == "gamma":
                rep = gamma.GammaRepresentation(sp)
            else:
                rep = pascal.PascalRepresentation(sp, pascal.PascalParams(Fraction(1, rng.randint(2, 5))))
            vecs = [random_polynomial(rng, sp.S, deg) for _ in range(2)]
        check_axioms(rep, phi, theta, vecs, report=rep_)
    return rep_


def _axiom_record(cfg, suite, kind, rid, anchor):
    def run():
        r = _axiom_run(cfg, suite, kind)
        return [_exact(rid, anchor, r.passed, len(r.failures), checks=r.checks, failures=r.failures[:5])]
    return _timed(run, rid, anchor)


def suite_axioms_fock(cfg: RunConfig) -> List[ReportRecord]:
    out = _axiom_record(cfg, "axioms-fock", "fock", "axioms-fock/current-algebra-axioms", "fock-representation")

    def lam():
        rng = _py_rng(cfg, "axioms-fock/lambda")
        from .fock import lambda_weight, lambda_weight_bruteforce, lambda_weight_recursive
        bad = 0
        for _ in range(20):
            sp = _random_space(rng)
            n = rng.randint(1, 5)
            pt = [rng.randrange(sp.S) for _ in range(n)]
            v = lambda_weight(sp, pt)
            bad += v != lambda_weight_bruteforce(sp, pt) or v != lambda_weight_recursive(sp, pt)
        return [_exact("axioms-fock/lambda-weights", "lambda-measures", bad == 0, bad)]
    out += _timed(lam, "axioms-fock/lambda-weights", "lambda-measures")

    def decomp():
        from .fock import decomposition_check
        rng = _py_rng(cfg, "axioms-fock/decomposition")
        worst = 0
        for _ in range(10):
            sp = _random_space(rng)
            r = decomposition_check(sp, random_test_function(rng, sp.S), random_test_function(rng, sp.S), (4,) * sp.S)
            worst = max([worst] + [_finite(v) for v in asdict(r).values()])
        return [_exact("axioms-fock/creation-annihilation-decomposition", "fock-representation", worst == 0, worst)]
    out += _timed(decomp, "axioms-fock/creation-annihilation-decomposition", "fock-representation")
    return out


def _unitary_instances():
    xis = [(0.3 + 0.2j, -0.4j), (0.5, 0.25 + 0.25j), (0.0, 0.6)]
    thetas = [(0.0, 0.0), (0.3, -0.7), (1.1, 0.4)]
    zs = [(0.0, 0.0), (0.3j, -0.2), (0.5, 0.4 - 0.2j)]
    return xis, thetas, zs


def suite_unitary(cfg: RunConfig) -> List[ReportRecord]:
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2)])
    out: List[ReportRecord] = []
    d = cfg.d_check
    M = cfg.M if cfg.M is not None else d + 20
    xis, thetas, zs = _unitary_instances()

    def thm33():
        worst = 0.0
        for xi in xis:
            for th in thetas:
                for z in zs:
                    r, _ = unitary.exponential_action_check(sp, unitary.UnitaryParams(xi, th), z, [M, M], d)
                    worst = max(worst, r)
        return [_tol("unitary-bch/exponential-vector-action", "unitary-on-exponential-vectors", worst, cfg.eps_num,
                     M=M, d_check=d, grid=27)]
    out += _timed(thm33, "unitary-bch/exponential-vector-action", "unitary-on-exponential-vectors")

    def monotone():
        rows = []
        for Mi in (10, 20, 30):
            worst = 0.0
            for xi in xis:
                for th in thetas:
                    for z in zs:
                        worst = max(worst, unitary.exponential_action_check(sp, unitary.UnitaryParams(xi, th), z,
                                                                       [Mi, Mi], min(d, Mi))[0])
            rows.append(worst)
        ok = all(b <= a + 1e-12 for a, b in zip(rows, rows[1:]))
        return [_exact("unitary-bch/exponential-vector-convergence", "unitary-on-exponential-vectors", ok,
                       rows[-1], residuals=rows)]
    out += _timed(monotone, "unitary-bch/exponential-vector-convergence", "unitary-on-exponential-vectors")

    def bch():
        rng = _py_rng(cfg, "unitary-bch/bch")
        recs = []
        worst, worst_tail, caps_used, cert = 0.0, 0.0, [], True
        for k in range(6):
            S = 1 + k % 2
            space = SiteSpace([Fraction(rng.randint(1, 6), 2) for _ in range(S)])
            xi = [complex(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)) for _ in range(S)]
            f = random_fock_vector(rng, space, 4)
            f = FockVector(space, {m: complex(v) for m, v in f.amps.items()})
            Mi = cfg.M if cfg.M is not None else unitary.bch_certified_cap(space, xi, f, cfg.eps_num)
            r = unitary.bch_check(space, xi, f, [Mi] * S, min(4, Mi), cfg.eps_num)
            worst, worst_tail = max(worst, r.residual), max(worst_tail, float(r.tail_bound))
            cert &= bool(r.certified)
            caps_used.append(Mi)
        rec = _tol("unitary-bch/bch-factorization", "bch-factorization", max(worst, worst_tail), cfg.eps_num,
                   comparison=worst, tail_bound=worst_tail, caps=caps_used)
        if not cert:
            rec.status = "fail"
        return [rec]
    out += _timed(bch, "unitary-bch/bch-factorization", "bch-factorization")

    def vac():
        s1 = SiteSpace([1])
        worst = 0.0
        for xi in (0.2, 0.5, 1.0):
            for th in (0.0, 0.3):
                p = unitary.UnitaryParams((xi,), (th,))
                caps = [cfg.M] if cfg.M is not None else None
                v, _ = unitary.vacuum_expectation(s1, p, caps)
                worst = max(worst, abs(v - unitary.vacuum_closed_form(s1, p)))
        return [_tol("unitary-bch/vacuum-expectation", "vacuum-expectation", worst, cfg.eps_num)]
    out += _timed(vac, "unitary-bch/vacuum-expectation", "vacuum-expectation")

    def lemma():
        rng = _py_rng(cfg, "unitary-bch/commutators")
        worst = 0.0
        for _ in range(5):
            f = random_fock_vector(rng, sp, 3)
            f = FockVector(sp, {m: complex(v) for m, v in f.amps.items()})
            v = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
            w = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
            th = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2)]
            worst = max(worst, *unitary.exponential_commutator_checks(sp, v, w, th, f, [d + 2] * 2, d))
        return [_tol("unitary-bch/exponential-commutators", "exponential-commutator-identities", worst, cfg.eps_num)]
    out += _timed(lemma, "unitary-bch/exponential-commutators", "exponential-commutator-identities")
    return out


def _ortho_gate(params: orthopoly.FamilyParams, n: int) -> Tuple[float, float]:
    fam = orthopoly.monic_family(params, n)
    off, norm = 0.0, 0.0
    for i in range(n + 1):
        for j in range(i, n + 1):
            r = orthopoly.orthogonality_oracle(params, fam[i], fam[j])
            if i == j:
                ref = float(orthopoly.squared_norm(params, i))
                norm = max(norm, abs(float(r.value) - ref) / ref)
            else:
                off = max(off, abs(float(r.value)))
    return off, norm


def suite_gamma(cfg: RunConfig) -> List[ReportRecord]:
    out = _axiom_record(cfg, "gamma", "gamma", "gamma/current-algebra-axioms", "gamma-representation")
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2), Fraction(2)])

    def gate():
        off, norm = _ortho_gate(orthopoly.FamilyParams("laguerre", Fraction(2)), 5)
        return [_tol("gamma/laguerre-orthogonality", "laguerre-orthogonality", max(off, norm), 1e-10,
                     off_diagonal=off, norm_relative=norm)]
    out += _timed(gate, "gamma/laguerre-orthogonality", "laguerre-orthogonality")

    def iterates():
        bad = 0
        for blocks in ([[0]], [[0, 2]], [[0], [1, 2]], [[2], [0]]):
            for ns in _ns_grid(len(blocks), 5):
                bad += gamma.laguerre_iterates(sp, blocks, ns) != gamma.laguerre_product(sp, blocks, ns)
        return [_exact("gamma/laguerre-iterates", "raising-iterates-laguerre", bad == 0, bad)]
    out += _timed(iterates, "gamma/laguerre-iterates", "raising-iterates-laguerre")

    def ibp():
        rng = _py_rng(cfg, "gamma/ibp")
        bad = 0
        for _ in range(20):
            phi = random_test_function(rng, sp.S, complex_=False)
            F = random_polynomial(rng, sp.S, 4)
            bad += gamma.ibp_residual(sp, phi, F) != 0
        return [_exact("gamma/integration-by-parts", "gamma-integration-by-parts", bad == 0, bad)]
    out += _timed(ibp, "gamma/integration-by-parts", "gamma-integration-by-parts")

    def spectrum():
        eig = gamma.dw_spectrum_check(sp, 8)
        ok = sorted(set(eig), reverse=True) == [Fraction(-k) for k in range(9)]
        return [_exact("gamma/branching-generator-spectrum", "branching-generator-spectrum", ok)]
    out += _timed(spectrum, "gamma/branching-generator-spectrum", "branching-generator-spectrum")

    def field_ops():
        rng = _py_rng(cfg, "gamma/field")
        bad = 0
        for _ in range(10):
            phi = random_test_function(rng, sp.S, complex_=False)
            F = random_polynomial(rng, sp.S, 3)
            bad += bool(gamma.field_operator_residual(sp, phi, F)) + bool(gamma.sl2_flow_residual(sp, phi, F))
        return [_exact("gamma/field-and-flow-operators", "gamma-field-operator", bad == 0, bad)]
    out += _timed(field_ops, "gamma/field-and-flow-operators", "gamma-field-operator")
    return out


def _ns_grid(l: int, n_max: int):
    if l == 1:
        return [(n,) for n in range(n_max + 1)]
    return [(a, b) for a in range(n_max + 1) for b in range(n_max + 1)]


def suite_pascal(cfg: RunConfig) -> List[ReportRecord]:
    out = _axiom_record(cfg, "pascal", "pascal", "pascal/current-algebra-axioms", "pascal-representation")
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2), Fraction(2)])
    prm = cfg.pascal_params

    def gate():
        off1, n1 = _ortho_gate(orthopoly.FamilyParams("meixner", Fraction(2), s=prm.s), 6)
        off2, n2 = _ortho_gate(orthopoly.FamilyParams("charlier", lam=Fraction(2)), 6)
        return [_tol("pascal/meixner-charlier-orthogonality", "meixner-orthogonality", max(off1, n1, off2, n2), 1e-10)]
    out += _timed(gate, "pascal/meixner-charlier-orthogonality", "meixner-orthogonality")

    def iterates():
        bad = 0
        for blocks in ([[0]], [[0, 2]], [[0], [1, 2]], [[2], [0]]):
            for ns in _ns_grid(len(blocks), 5):
                bad += pascal.meixner_iterates(sp, prm, blocks, ns) != pascal.meixner_product(sp, prm, blocks, ns)
        return [_exact("pascal/meixner-iterates", "raising-iterates-meixner", bad == 0, bad)]
    out += _timed(iterates, "pascal/meixner-iterates", "raising-iterates-meixner")

    def mecke():
        rng = _py_rng(cfg, "pascal/mecke")
        bad = 0
        for _ in range(20):
            G = [random_polynomial(rng, sp.S, 3) for _ in range(sp.S)]
            bad += pascal.mecke_residual(sp, prm, G) != 0
        return [_exact("pascal/mecke-identity", "pascal-mecke-identity", bad == 0, bad)]
    out += _timed(mecke, "pascal/mecke-identity", "pascal-mecke-identity")

    def spectrum():
        eig = pascal.neutral_spectrum_check(sp, prm, 8)
        ok = sorted(set(eig), reverse=True) == [Fraction(-k) for k in range(9)]
        return [_exact("pascal/neutral-generator-spectrum", "birth-death-generator-spectrum", ok)]
    out += _timed(spectrum, "pascal/neutral-generator-spectrum", "birth-death-generator-spectrum")

    def combos():
        rng = _py_rng(cfg, "pascal/aux")
        bad = 0
        for _ in range(10):
            phi = random_test_function(rng, sp.S)
            F = random_polynomial(rng, sp.S, 3)
            bad += any(bool(r) for r in pascal.linear_combination_residuals(sp, prm, phi, F))
            bad += bool(pascal.field_combination_residual(sp, prm, random_test_function(rng, sp.S, complex_=False), F))
        return [_exact("pascal/auxiliary-operator-combinations", "auxiliary-operators", bad == 0, bad)]
    out += _timed(combos, "pascal/auxiliary-operator-combinations", "auxiliary-operators")

    def charlier():
        rng = _py_rng(cfg, "pascal/charlier")
        ops = pascal.CharlierOperators(sp)
        bad = 0
        for _ in range(10):
            f, g = random_test_function(rng, sp.S), random_test_function(rng, sp.S)
            F = random_polynomial(rng, sp.S, 3)
            lhs = ops.annihilation(f)(ops.creation(g)(F)) - ops.creation(g)(ops.annihilation(f)(F))
            ip = sum((conj(x) * y * a for x, y, a in zip(f, g, sp.alpha)), GaussianRational(0))
            bad += lhs != F * ip
        for block in ([0], [1, 2]):
            for n in range(6):
                bad += pascal.charlier_iterates(sp, block, n) != pascal.charlier_product(sp, block, n)
        return [_exact("pascal/poisson-charlier-ccr", "poisson-charlier", bad == 0, bad)]
    out += _timed(charlier, "pascal/poisson-charlier-ccr", "poisson-charlier")
    return out


def suite_univariate(cfg: RunConfig) -> List[ReportRecord]:
    out: List[ReportRecord] = []
    alphas = [Fraction(1, 2), Fraction(1), Fraction(2)]
    ss = [Fraction(1, 3), Fraction(1, 2)]

    def weighted():
        bad = 0
        for a in alphas:
            w = univariate.build_weighted_rep(a, 10)
            bad += any(w.commutator_residuals().values()) + bool(w.casimir_residual()) + bool(w.adjoint_residual())
        return [_exact("univariate/weighted-sequence-rep", "weighted-l2-representation", bad == 0, bad)]
    out += _timed(weighted, "univariate/weighted-sequence-rep", "weighted-l2-representation")

    def intertwine():
        bad = 0
        for a in alphas:
            bad += sum(univariate.intertwine_residuals(univariate.LaguerreRep(a), 8).values())
            bad += univariate.casimir_failures(univariate.LaguerreRep(a), 6)
            for s in ss:
                m = univariate.MeixnerRep(a, s)
                bad += sum(univariate.intertwine_residuals(m, 8).values()) + univariate.casimir_failures(m, 6)
        return [_exact("univariate/polynomial-intertwining", "laguerre-meixner-univariate", bad == 0, bad)]
    out += _timed(intertwine, "univariate/polynomial-intertwining", "laguerre-meixner-univariate")

    def moments():
        recs = []
        for case, par in (("gauss", None), ("poisson", Fraction(1, 2)), ("gamma", None), ("pascal", Fraction(5, 2))):
            vm = univariate.vacuum_moment_dictionary(case, par, 8)
            det = {k: str(v) for k, v in vm.constants.items()}
            recs.append(_tol(f"univariate/vacuum-moments-{case}", "oscillator-vacuum-moments",
                             vm.max_relative_error(), 1e-9, **det))
        return recs
    out += _timed(moments, "univariate/vacuum-moments", "oscillator-vacuum-moments")

    def generators():
        bad = []
        for a in alphas:
            lag = univariate.LaguerreRep(a)
            r = univariate.markov_generator_extract(lag, "laguerre_semigroup")
            if r.diagnostics["spectrum"] != [Fraction(-k) for k in range(9)] or not r.diagnostics["reversible"]:
                bad.append(f"laguerre a={a}")
            if not univariate.markov_generator_extract(lag, "squared_bessel").diagnostics["conservative"]:
                bad.append(f"bessel a={a}")
            for s in ss:
                m = univariate.MeixnerRep(a, s)
                r = univariate.markov_generator_extract(m, "bd_neutral")
                d = r.diagnostics
                if not (d["markov"] and d["detailed_balance"]) or d["spectrum"] != [Fraction(-k) for k in range(9)]:
                    bad.append(f"bd a={a} s={s}")
                if not univariate.markov_generator_extract(m, "bd_lowering").diagnostics["markov"]:
                    bad.append(f"bd-lowering a={a} s={s}")
        return [_exact("univariate/markov-generators", "birth-death-and-diffusion-generators", not bad, len(bad),
                       failures=bad)]
    out += _timed(generators, "univariate/markov-generators", "birth-death-and-diffusion-generators")

    def sip():
        g = univariate.assemble_sip_generator(2, [(0, 1)], 6)
        g3 = univariate.assemble_sip_generator(3, [(0, 1), (1, 2), (0, 2)], 4)
        ok = g.is_markov_on_interior() and g3.is_markov_on_interior() and g.rate((3, 2), (2, 3)) == 3 * 2.5
        return [_exact("univariate/inclusion-process-generator", "inclusion-process-chain", ok)]
    out += _timed(sip, "univariate/inclusion-process-generator", "inclusion-process-chain")
    return out


def suite_crp(cfg: RunConfig) -> List[ReportRecord]:
    out: List[ReportRecord] = []

    def exact_lift():
        rng = _py_rng(cfg, "crp/lift")
        bad = 0
        for _ in range(20):
            sp = _random_space(rng)
            f = random_fock_vector(rng, sp, 5)
            bad += crp.lift(f).norm2() != f.norm2()
            bad += not all(crp.intertwine_check(sp, random_test_function(rng, sp.S), f).values())
        return [_exact("crp/lift-isometry-intertwining", "restaurant-lift", bad == 0, bad)]
    out += _timed(exact_lift, "crp/lift-isometry-intertwining", "restaurant-lift")

    def araki():
        sp = SiteSpace([1, Fraction(1, 2)])
        worst_s, worst_v = 0.0, 0.0
        for xi, th, z in (([0.4, 0.0], [0.3, 0.0], [0.2, 0.0]), ([0.4 + 0.3j, -0.7j], [0.3, -1.1], [0.2, 0.5j])):
            r = crp.araki_identity_check(sp, xi, th, z)
            worst_s = max(worst_s, r.inner_residual, r.norm_residual, r.prefactor_residual, r.tail_bound)
            worst_v = max(worst_v, r.vector_residual)
        return [_tol("crp/araki-scalars", "araki-factorization", worst_s, 1e-9),
                _tol("crp/araki-vector", "araki-factorization", worst_v, cfg.eps_num)]
    out += _timed(araki, "crp/araki", "araki-factorization")

    def ode():
        worst = max(crp.single_table_ode_check(t)[0] for t in (0.0, 0.5, 1.0, -1.5))
        comm = crp.single_table_commutators(30)
        ok_alg = not any(comm.values()) and crp.bargmann_index() == 1
        return [_tol("crp/single-table-ode", "single-table-flow", worst, 1e-9),
                _exact("crp/single-table-algebra", "single-table-flow", ok_alg)]
    out += _timed(ode, "crp/single-table", "single-table-flow")
    return out


def suite_mc(cfg: RunConfig) -> List[ReportRecord]:
    out: List[ReportRecord] = []
    R, k = cfg.replicas, cfg.se_mult
    sp = cfg.space
    prm = cfg.pascal_params

    def ibp_mc():
        rng_p = _py_rng(cfg, "mc/ibp-instance")
        phi = random_test_function(rng_p, sp.S, complex_=False)
        F = random_polynomial(rng_p, sp.S, 3, complex_=False)
        samples = np.concatenate([gamma.sample_gamma(gamma.GammaSampler(sp), rng, n)
                                  for rng, n in mc_blocks(cfg.seed, "mc/ibp", R)])
        est = _est(gamma.ibp_mc(sp, phi, F, samples), cfg.seed)
        return [_mc("mc-crosschecks/gamma-ibp", "gamma-integration-by-parts", est, 0.0, k)]
    out += _timed(ibp_mc, "mc-crosschecks/gamma-ibp", "gamma-integration-by-parts")

    def mecke_mc():
        rng_p = _py_rng(cfg, "mc/mecke-instance")
        G = [random_polynomial(rng_p, sp.S, 2, complex_=False) for _ in range(sp.S)]
        samples = np.concatenate([pascal.sample_pascal(pascal.PascalSampler(sp, prm), rng, n)
                                  for rng, n in mc_blocks(cfg.seed, "mc/mecke", R)])
        est = _est(pascal.mecke_mc(sp, prm, G, samples.astype(float)), cfg.seed)
        return [_mc("mc-crosschecks/pascal-mecke", "pascal-mecke-identity", est, 0.0, k)]
    out += _timed(mecke_mc, "mc-crosschecks/pascal-mecke", "pascal-mecke-identity")

    def nb_mean():
        vals = []
        for rng, n in mc_blocks(cfg.seed, "mc/nb", R):
            vals.append(pascal.sample_pascal(pascal.PascalSampler(sp, prm), rng, n)[:, 0])
        est = MCEstimate.from_samples(np.concatenate(vals), cfg.seed)
        p = float(prm.p)
        return [_mc("mc-crosschecks/nb-sampler-mean", "plumbing", est, float(sp.alpha[0]) * p / (1 - p), k)]
    out += _timed(nb_mean, "mc-crosschecks/nb-sampler-mean", "plumbing")

    def bd_tv():
        recs = []
        for a in (Fraction(1, 2), Fraction(1), Fraction(2)):
            for s in (Fraction(1, 3), Fraction(1, 2)):
                tv, bound = birth_death_tv(float(a), float(s * s), R, rng_stream(cfg.seed, f"mc/bd/{a}/{s}"))
                recs.append(_tol(f"mc-crosschecks/birth-death-tv[alpha={a},s={s}]", "birth-death-reversibility",
                                 tv, k * bound, mc_bound=bound))
        return recs
    out += _timed(bd_tv, "mc-crosschecks/birth-death-tv", "birth-death-reversibility")

    def cir():
        a, x0, T = 1.5, 2.0, 1.0
        vals = []
        for rng, n in mc_blocks(cfg.seed, "mc/cir", R):
            vals.append(univariate.cir_euler_maruyama(a, x0, T, 1e-3, n, rng))
        x = np.concatenate(vals)
        recs = []
        for kk in (1, 2):
            est = MCEstimate.from_samples(x ** kk, cfg.seed)
            recs.append(_mc(f"mc-crosschecks/cir-moment-{kk}", "laguerre-semigroup", est,
                            univariate.cir_exact_moment(Fraction(3, 2), x0, T, kk), k))
        return recs
    out += _timed(cir, "mc-crosschecks/cir", "laguerre-semigroup")
    return out


def _est(r: gamma.MCResult, seed: int) -> MCEstimate:
    return MCEstimate(r.mean, r.stderr, r.R, seed)


def nb_pmf(alpha: float, p: float, n: int) -> np.ndarray:
    from scipy.stats import nbinom
    return nbinom.pmf(np.arange(n + 1), alpha, 1 - p)


def birth_death_tv(alpha: float, p: float, R: int, rng: np.random.Generator, x0: int = 10,
                   horizon: float = 50.0, support: int = 40) -> Tuple[float, float]:
    """TV distance on {0..support} between R Gillespie endpoints at time horizon/gap
    and NB(alpha, p), with the MC scale 1/2 sum sqrt(pi (1 - pi) / R).

    The neutral generator has spectrum -N_0, so the gap is 1."""
    ends = pascal.birth_death_endpoints(alpha, p, x0, horizon, R, rng)
    emp = np.bincount(np.minimum(ends, support + 1), minlength=support + 2)[: support + 1] / R
    pi = nb_pmf(alpha, p, support)
    tv = 0.5 * float(np.sum(np.abs(emp - pi)))
    bound = 0.5 * float(np.sum(np.sqrt(pi * (1 - pi) / R)))
    return tv, bound


_SUITE_FUNCS = {
    "axioms-fock": suite_axioms_fock,
    "unitary-bch": suite_unitary,
    "gamma": suite_gamma,
    "pascal": suite_pascal,
    "univariate": suite_univariate,
    "crp": suite_crp,
    "mc-crosschecks": suite_mc,
}


def run_suite(config: RunConfig) -> List[ReportRecord]:
    records: List[ReportRecord] = []
    for name in config.suites:
        records.extend(_SUITE_FUNCS[name](config))
    return sorted(records, key=lambda r: r.id)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (Fraction, GaussianRational, complex)):
        return str(x)
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def determinism_hash(config: RunConfig, records: Sequence[ReportRecord]) -> str:
    body = {"config": config.to_dict(),
            "records": [{k: v for k, v in asdict(r).items() if k != "runtime"} for r in records]}
    text = json.dumps(_jsonable(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def build_report(config: RunConfig, records: Sequence[ReportRecord]) -> Dict:
    return _jsonable({
        "config": config.to_dict(),
        "records": [asdict(r) for r in records],
        "summary": {"total": len(records), "failed": sum(not r.passed for r in records)},
        "determinism_hash": determinism_hash(config, records),
    })


# ------------------------------------------------------------ convergence

def convergence_study(target: str, M_list: Sequence[int], xi: Optional[Sequence[complex]] = None,
                      theta: Optional[Sequence[float]] = None, z: Optional[Sequence[complex]] = None,
                      space: Optional[SiteSpace] = None, d_check: int = 6) -> List[Dict]:
    if target not in ("thm33", "bch", "vacuum-corollary"):
        raise ValueError(f"unknown target {target!r}")
    if list(M_list) != sorted(M_list) or len(set(M_list)) != len(M_list):
        raise ValueError("M_list must be strictly increasing")
    space = space or SiteSpace([Fraction(1, 2), Fraction(3, 2)])
    xi = xi if xi is not None else [0.3 + 0.2j, -0.4j][: space.S]
    theta = theta if theta is not None else [0.3, -0.7][: space.S]
    z = z if z is not None else [0.3j, -0.2][: space.S]
    return unitary.convergence_rows(target, M_list, space, xi, theta, z, d_check)


def write_convergence_csv(out: IO, rows: Sequence[Dict]):
    w = csv.writer(out)
    w.writerow(["M", "residual", "truncation_loss", "wall_time_ms"])
    for r in rows:
        w.writerow([r["M"], repr(float(r["residual"])), repr(float(r["truncation_loss"])),
                    f"{r['wall_time_ms']:.3f}"])
