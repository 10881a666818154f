"""Deterministic random coefficient sequences and the named verification checks.

Random numbers come from ``numpy.random.default_rng(seed)`` (PCG64).  A
coefficient is ``t * G / ||G||_2`` where ``G`` has independent standard
normal real and imaginary parts (the real block is drawn first, then the
imaginary block, each row-major) and ``t`` is uniform on
``[0.1, norm_cap]``, so ``t`` is the top singular value.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadConfig, MopucError
from .linalg import logdet_remainder
from .measure import flip_measure
from .opuc import VerblunskySequence, bernstein_szego_measure, opuc_basis
from .schur import _stripped_pair, ff1_residual, schur_alphas, stripped_defect_residual
from .sumrule import (
    A_k_term,
    cruz_bound,
    flip_reduce,
    iterated_G,
    lhs_sumrule,
    step_rule_residual,
    sumrule_report,
    sumrule_reports,
)

DEFAULT_G = (-1.0, -0.6, 0.0, 0.3, 0.6, 1.0)
MIN_TOP_SV = 0.1


def random_contraction(rng: np.random.Generator, p: int, norm_cap: float = 0.8) -> np.ndarray:
    re = rng.standard_normal((p, p))
    im = rng.standard_normal((p, p))
    G = re + 1j * im
    t = rng.uniform(MIN_TOP_SV, norm_cap)
    return t * G / np.linalg.norm(G, 2)


def random_sequence(rng, p: int, N: int, norm_cap: float = 0.8) -> VerblunskySequence:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if not 0.1 <= norm_cap < 1:
        raise BadConfig(f"norm_cap must lie in [0.1, 1), got {norm_cap}")
    if N == 0:
        return VerblunskySequence.zeros(0, p)
    return VerblunskySequence(np.stack([random_contraction(rng, p, norm_cap) for _ in range(N)]))


def random_trials(seed: int, count: int, dims=(1, 2, 3), max_len: int = 8, norm_cap: float = 0.8,
                  min_len: int = 1) -> list[VerblunskySequence]:
    """``count`` sequences; dimension and length are drawn uniformly before each sequence."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        p = int(rng.choice(dims))
        N = int(rng.integers(min_len, max_len + 1))
        out.append(random_sequence(rng, p, N, norm_cap))
    return out


@dataclass
class RunConfig:
    grid_size: int = 4096
    trunc: int = 8
    tolerance: float = 1e-6
    seed: int = 0
    g_list: tuple = DEFAULT_G
    dim: int | None = None
    fmt: str = "json"
    trials: int = 10
    norm_cap: float = 0.8

    def validate(self) -> "RunConfig":
        M = self.grid_size
        if M < 8 or M & (M - 1):
            raise BadConfig(f"grid size must be a power of two >= 8, got {M}")
        if M < 8 * self.trunc:
            raise BadConfig(f"grid size {M} below 8 * trunc = {8 * self.trunc}")
        if any(abs(g) > 1 for g in self.g_list):
            raise BadConfig("every g must satisfy |g| <= 1")
        if self.fmt not in ("json", "csv"):
            raise BadConfig(f"unknown format {self.fmt!r}")
        if self.dim is not None and self.dim < 1:
            raise BadConfig("dim must be positive")
        return self


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("MOPUC_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


@dataclass
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    trials: int
    errors: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and self.max_residual < self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "trials": self.trials,
            "passed": self.passed,
            "errors": self.errors,
        }


# Each check maps (alpha, config) to the largest residual it sees on one trial.

def _round_trip(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    return float(np.max(np.abs(opuc_basis(mu, len(a)).alphas.coeffs - a.coeffs)))


def _dual_path(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    gs = opuc_basis(mu, len(a)).alphas.coeffs
    return float(np.max(np.abs(schur_alphas(mu, len(a)).coeffs - gs)))


def _step_rule(a, cfg):
    return max(step_rule_residual(a, g, cfg.grid_size) for g in cfg.g_list if g >= 0)


def _telescoping(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    return max(abs(iterated_G(a, g, len(a)) - lhs_sumrule(mu, g)) for g in cfg.g_list)


def _interior_points(a, n=20):
    rng = np.random.default_rng(zlib.crc32(a.coeffs.tobytes()))
    r = 0.9 * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, n))


def _ff1(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    pair = _stripped_pair(mu)
    return ff1_residual(mu, _interior_points(a), pair=pair)


def _defect(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    pair = _stripped_pair(mu)
    return stripped_defect_residual(mu, _interior_points(a), pair=pair)


def _flip(a, cfg):
    mu = bernstein_szego_measure(a, cfg.grid_size)
    signs = np.array([(-1.0) ** (k + 1) for k in range(len(a))])[:, None, None]
    got = opuc_basis(flip_measure(mu), len(a)).alphas.coeffs
    return float(np.max(np.abs(got - signs * a.coeffs)))


def _flip_report(a, cfg):
    worst = 0.0
    base = sumrule_reports(a, cfg.g_list, cfg.grid_size)
    for g, rep in zip(cfg.g_list, base):
        b, h = flip_reduce(a, g)
        worst = max(worst, abs(sumrule_report(b, h, cfg.grid_size).residual - rep.residual))
    return worst


def _main(a, cfg):
    return max(r.residual for r in sumrule_reports(a, cfg.g_list, cfg.grid_size))


def _entropy(a, cfg):
    worst = 0.0
    for rep in sumrule_reports(a, cfg.g_list, cfg.grid_size):
        worst = max(worst, abs(rep.entropy_lhs - rep.entropy_rhs), -rep.entropy_lhs, -rep.entropy_rhs)
    return worst


def _positivity(a, cfg):
    worst = 0.0
    padded = a.padded(len(a) + 1)
    for k in range(len(a)):
        for g in (0.0, 0.5, 1.0):
            A = A_k_term(padded[k], padded[k + 1], g)
            worst = max(worst, -A, cruz_bound(padded[k], padded[k + 1], g) - A)
        worst = max(worst, -logdet_remainder(padded[k]))
    return worst


CHECKS = {
    "round_trip": _round_trip,
    "dual_path": _dual_path,
    "step_rule": _step_rule,
    "telescoping": _telescoping,
    "ff1_identity": _ff1,
    "stripped_defect_identity": _defect,
    "flip_covariance": _flip,
    "flip_invariance": _flip_report,
    "main_sumrule": _main,
    "entropy_forms": _entropy,
    "A_k_positivity": _positivity,
}


def run_check(name: str, trials, cfg: RunConfig) -> CheckResult:
    fn = CHECKS[name]
    res = CheckResult(name, 0.0, cfg.tolerance, len(trials))

    def one(i_a):
        i, a = i_a
        try:
            return fn(a, cfg), None
        except MopucError as exc:
            return np.inf, f"trial {i}: {exc.code}: {exc}"

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        outcomes = list(pool.map(one, enumerate(trials)))
    for value, err in outcomes:
        res.max_residual = max(res.max_residual, float(value))
        if err:
            res.errors.append(err)
    return res


def run_suite(cfg: RunConfig, names=None) -> list[CheckResult]:
    cfg.validate()
    dims = (cfg.dim,) if cfg.dim else (1, 2, 3)
    trials = random_trials(cfg.seed, cfg.trials, dims=dims, max_len=cfg.trunc, norm_cap=cfg.norm_cap)
    return [run_check(n, trials, cfg) for n in (names or CHECKS)]
