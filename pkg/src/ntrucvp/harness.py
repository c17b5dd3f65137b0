"""Experiment orchestration: presets, seeded trials, R sweeps and the reduced-basis cache."""

from __future__ import annotations

import fcntl
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import mpmath
import numpy as np

from .attack import (
    AStrategy,
    AttackConfig,
    ReducedLattice,
    _use_exact,
    attack_with_oracle,
    build_M_a,
    choose_a,
    compute_c_ground_truth,
    in_qary_lattice,
    oracle_E,
    run_attack,
)
from .lattice import LatticeBasis, svp_exact
from .ntru import NtruParams, ParameterError, encrypt, is_prime, keygen, sample_message, sample_nonce
from .ring import ConvPoly

CACHE_MAGIC = "NTRUCVP-BASIS"
CACHE_VERSION = 1
DESK_SCALE = 61


class CacheCorruptError(RuntimeError):
    pass


# ------------------------------------------------------------------- presets

@dataclass(frozen=True)
class Preset:
    n: int
    d: int
    p: int
    q: int
    y: float
    R: int  # largest R reported to succeed at full scale; recorded, not asserted
    strategy: str


PRESETS = {
    1: Preset(239, 71, 3, 256, 2.3, 9, "algorithm1"),
    2: Preset(257, 91, 3, 256, 2.3, 9, "algorithm1"),
    3: Preset(283, 99, 3, 1024, 2.3, 16, "algorithm1"),
    4: Preset(307, 15, 3, 1024, 2.5, 18, "algorithm1"),
    5: Preset(509, 10, 3, 2**11, 2.5, 26, "pm2_shuffled"),
    6: Preset(677, 20, 3, 2**11, 2.5, 17, "structured"),
    7: Preset(557, 40, 3, 2**13, 2.5, 38, "structured"),
}


def scaled_preset(ex: int, n_override: int | None = None) -> Preset:
    """The example's parameters, with N replaced and d scaled proportionally."""
    pre = PRESETS[ex]
    if n_override is None or n_override == pre.n:
        return pre
    if not is_prime(n_override):
        raise ParameterError(f"--scale needs a prime N, got {n_override}")
    d = max(1, round(pre.d * n_override / pre.n))
    d = min(d, (n_override - 1) // 2)
    return Preset(n_override, d, pre.p, pre.q, pre.y, pre.R, pre.strategy)


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class ExperimentSpec:
    params: NtruParams
    attack: AttackConfig
    trials: int
    seed: int
    label: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def to_dict(self) -> dict:
        p, a = self.params, self.attack
        return {
            "label": self.label,
            "N": p.n, "q": p.q, "p": p.p, "d": p.d,
            "y": a.y, "R": a.R, "strategy": a.a_strategy.value,
            "rn_guess": None if a.rn_guess is None else list(a.rn_guess.coeffs),
            "max_oracle_calls": a.max_oracle_calls, "mode": a.mode,
            "trials": self.trials, "seed": self.seed,
        }


@dataclass
class TrialResult:
    instance_seed: int
    oracle_calls_used: int
    success: bool
    wall_time: float
    verified_nonce: bool
    message_matches: bool = False  # the verified candidate equals the encrypted m


@dataclass
class ExperimentReport:
    spec: dict
    a: list
    trials: list[TrialResult]
    success_rate: float
    basis_cache_hit: bool = False
    lll_seconds: float = 0.0
    exact_cvp: bool = False

    @property
    def successes(self) -> int:
        return sum(t.success for t in self.trials)

    def to_dict(self, volatile: bool = False) -> dict:
        """Report as a dict; wall times and cache state are dropped unless volatile=True
        so that reruns with the same seed serialise identically."""
        d = asdict(self)
        d["successes"] = self.successes
        if not volatile:
            d.pop("basis_cache_hit")
            d.pop("lll_seconds")
            for t in d["trials"]:
                t.pop("wall_time")
        return d

    def to_json(self, volatile: bool = False) -> str:
        return json.dumps(self.to_dict(volatile), sort_keys=True, indent=1)


# ------------------------------------------------------------------ seeding

def _seeds(master: int, trials: int) -> tuple[int, list[int]]:
    """Seed for a, and one seed per trial instance, all derived from the master seed."""
    children = np.random.SeedSequence(master).spawn(trials + 1)
    ints = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
    return ints[0], ints[1:]


def derive_a(strategy, n: int, q: int, y: float, seed: int) -> ConvPoly:
    a_seed, _ = _seeds(seed, 0)
    return choose_a(strategy, n, q, y, np.random.default_rng(a_seed))


# -------------------------------------------------------------- basis cache

class BasisCache:
    """LLL-reduced M_a bases on disk, one text file per (N, q, y, strategy, seed, delta)."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def path(self, n, q, y, strategy, seed, delta) -> Path:
        return self.root / f"Ma_N{n}_q{q}_y{y}_{AStrategy(strategy).value}_s{seed}_d{delta}.txt"

    @staticmethod
    def header(n, q, y, strategy, seed, delta) -> str:
        return f"{CACHE_MAGIC} {CACHE_VERSION} {n} {q} {y} {AStrategy(strategy).value} {seed} {delta}"

    def load(self, path: Path, a: ConvPoly, q: int, expect_header: str) -> LatticeBasis:
        try:
            lines = path.read_text().splitlines()
            if not lines or lines[0].strip() != expect_header:
                raise CacheCorruptError(f"{path}: header does not match {expect_header!r}")
            rows = [[int(t) for t in ln.split()] for ln in lines[1:] if ln.strip()]
        except (OSError, ValueError, UnicodeDecodeError) as exc:
            raise CacheCorruptError(f"{path}: {exc}") from exc
        n2 = 2 * a.n
        if len(rows) != n2 or any(len(r) != n2 for r in rows):
            raise CacheCorruptError(f"{path}: expected {n2} rows of {n2} integers")
        if not all(in_qary_lattice(r, a, q) for r in rows):
            raise CacheCorruptError(f"{path}: a row is not in L_a")
        # rows in L_a with the right volume span all of L_a
        sign, logdet = np.linalg.slogdet(np.array(rows, dtype=np.float64))
        if sign == 0 or abs(logdet - a.n * math.log(q)) > 1e-6 * max(1.0, a.n * math.log(q)):
            raise CacheCorruptError(f"{path}: determinant is not q^N")
        return LatticeBasis(rows)

    def get_or_build(self, a: ConvPoly, q: int, y: float, strategy, seed: int, delta: float = 0.99) -> ReducedLattice:
        """Load the reduced basis or compute and store it.  The first process to
        take the entry's lock does the reduction; others wait and load it."""
        self.root.mkdir(parents=True, exist_ok=True)
        n = a.n
        path = self.path(n, q, y, strategy, seed, delta)
        header = self.header(n, q, y, strategy, seed, delta)
        with open(str(path) + ".lock", "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            if path.exists():
                basis = self.load(path, a, q, header)
                return ReducedLattice.from_basis(a, q, basis)
            red = ReducedLattice.build(a, q, delta)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(header + "\n" + "\n".join(" ".join(map(str, r)) for r in red.basis.rows) + "\n")
            os.replace(tmp, path)
            return red


# --------------------------------------------------------------- experiments

def _run_trial(params: NtruParams, cfg: AttackConfig, a: ConvPoly, reduced: ReducedLattice | None,
               instance_seed: int) -> TrialResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(instance_seed)
    kp = keygen(params, rng)
    m = sample_message(params, rng)
    r = sample_nonce(params, rng)
    ct = encrypt(kp.h, m, r, params)
    c = compute_c_ground_truth(a, r, kp.h, params.p, params.q)
    out = attack_with_oracle(ct, kp.h, params, cfg, a, c, rng, reduced)
    return TrialResult(instance_seed, out.oracle_calls, out.success, time.perf_counter() - t0,
                       out.verified_nonce, out.success and out.message == m)


_worker_state: dict = {}


def _worker_init(params, cfg, a, rows, q):
    reduced = None
    if rows is not None:
        reduced = ReducedLattice.from_basis(a, q, LatticeBasis(rows))
    _worker_state.update(params=params, cfg=cfg, a=a, reduced=reduced)


def _worker_trial(seed):
    s = _worker_state
    return _run_trial(s["params"], s["cfg"], s["a"], s["reduced"], seed)


def prepare_lattice(spec: ExperimentSpec, a: ConvPoly, cache: BasisCache | None = None) -> ReducedLattice:
    p, cfg = spec.params, spec.attack
    if _use_exact(cfg.mode, p.n):
        red = ReducedLattice(a=a, q=p.q, basis=build_M_a(a, p.q), gso=None)
        t0 = time.perf_counter()
        red.enum_context()
        red.lll_seconds = time.perf_counter() - t0
        return red
    if cache is not None:
        return cache.get_or_build(a, p.q, cfg.y, cfg.a_strategy, spec.seed)
    return ReducedLattice.build(a, p.q)


def run_experiment(spec: ExperimentSpec, cache: BasisCache | None = None, workers: int = 1,
                   reduced: ReducedLattice | None = None) -> ExperimentReport:
    """keygen, encrypt and attack `spec.trials` independent instances.

    a comes from the master seed, so every trial (and every R of a sweep)
    shares one reduced basis.
    """
    p, cfg = spec.params, spec.attack
    a = derive_a(cfg.a_strategy, p.n, p.q, cfg.y, spec.seed)
    if reduced is None:
        reduced = prepare_lattice(spec, a, cache)
    elif reduced.a != a or reduced.q != p.q:
        raise ValueError("the supplied reduced lattice was built for a different a or q")
    _, seeds = _seeds(spec.seed, spec.trials)
    exact = _use_exact(cfg.mode, p.n)
    if workers > 1:
        rows = None if exact else reduced.basis.rows
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(p, cfg, a, rows, p.q)) as pool:
            results = list(pool.map(_worker_trial, seeds))
    else:
        results = [_run_trial(p, cfg, a, reduced, s) for s in seeds]
    ok = sum(r.success for r in results)
    return ExperimentReport(
        spec=spec.to_dict(), a=list(a.coeffs), trials=results, success_rate=ok / spec.trials,
        basis_cache_hit=reduced.cache_hit, lll_seconds=reduced.lll_seconds, exact_cvp=exact,
    )


def run_sweep(spec: ExperimentSpec, Rs, cache: BasisCache | None = None, workers: int = 1) -> list[ExperimentReport]:
    """The same instances attacked at each R in turn, sharing one reduction."""
    p, cfg = spec.params, spec.attack
    a = derive_a(cfg.a_strategy, p.n, p.q, cfg.y, spec.seed)
    reduced = prepare_lattice(spec, a, cache)
    reports = []
    for R in Rs:
        sub = ExperimentSpec(p, AttackConfig(cfg.y, R, cfg.a_strategy, cfg.rn_guess, cfg.max_oracle_calls, cfg.mode),
                             spec.trials, spec.seed, spec.label)
        reports.append(run_experiment(sub, cache, workers, reduced))
    return reports


def threshold(rates: dict[int, float], level: float = 0.5) -> int | None:
    """Largest R* such that every swept R <= R* has rate >= level; None if R=0 already fails."""
    best = None
    for R in sorted(rates):
        if rates[R] < level:
            break
        best = R
    return best


def spec_from_preset(pre: Preset, R: int | None = None, trials: int = 20, seed: int = 0,
                     max_oracle_calls: int = 100, mode: str = "auto", label: str = "") -> ExperimentSpec:
    params = NtruParams(n=pre.n, q=pre.q, d=pre.d, p=pre.p)
    cfg = AttackConfig(y=pre.y, R=pre.R if R is None else R, a_strategy=pre.strategy,
                       max_oracle_calls=max_oracle_calls, mode=mode)
    return ExperimentSpec(params, cfg, trials, seed, label)


# ------------------------------------------------------ certified exact trials

@dataclass
class CertifiedStats:
    """Exact-CVP trials split by whether the recovery guarantee's hypotheses were certified."""

    trials: int = 0
    certified: int = 0
    certified_recovered: int = 0
    uncertified_recovered: int = 0

    @property
    def certified_rate(self) -> float:
        return self.certified_recovered / self.certified if self.certified else float("nan")


def run_certified_trials(n: int, q: int, y: float, d: int, Rs, trials: int, seed: int,
                         strategy: str = "algorithm1", n_a: int = 8) -> CertifiedStats:
    """Attack `trials` instances with exact CVP, one oracle draw each.

    A trial is certified when |V - E| < q^(1/y) / 2 (checked on the exact
    integers) and lambda_1(L_a) > q^(1/y) (checked by exact SVP).  Under both,
    the closest lattice vector to the target is u, so recovery must succeed.
    """
    params = NtruParams(n=n, q=q, d=d)
    cfg = AttackConfig(y=y, R=0, a_strategy=strategy, mode="exact")
    with mpmath.workprec(200):
        qy = mpmath.power(q, 1 / mpmath.mpf(y))
        qy2 = qy * qy
    # a small pool of a's so that exact SVP runs once per a
    ss = np.random.SeedSequence(seed)
    a_rng = np.random.default_rng(ss.spawn(1)[0])
    pool = []
    for _ in range(n_a):
        a = choose_a(strategy, n, q, y, a_rng)
        red = ReducedLattice(a=a, q=q, basis=build_M_a(a, q), gso=None)
        v, _ = svp_exact(red.enum_context())
        pool.append((a, red, sum(t * t for t in v) > qy2))
    stats = CertifiedStats()
    trial_rng = np.random.default_rng(ss.spawn(1)[0])
    Rs = list(Rs)
    for t in range(trials):
        a, red, lam_ok = pool[t % len(pool)]
        R = Rs[t % len(Rs)]
        kp = keygen(params, trial_rng)
        m = sample_message(params, trial_rng)
        r = sample_nonce(params, trial_rng)
        ct = encrypt(kp.h, m, r, params)
        c = compute_c_ground_truth(a, r, kp.h, params.p, q)
        E = oracle_E(c, R, None, trial_rng)
        V = list(m.coeffs) + list(c.coeffs)
        dist2 = sum((v - e) ** 2 for v, e in zip(V, E.e_vec))
        certified = lam_ok and 4 * dist2 < qy2
        got = run_attack(ct, cfg, a, E, q, red) == m
        stats.trials += 1
        if certified:
            stats.certified += 1
            stats.certified_recovered += got
        else:
            stats.uncertified_recovered += got
    return stats
