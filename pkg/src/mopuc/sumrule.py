"""Gross-Witten matrix sum rule: both sides, step-by-step identities, gems.

For finitely many nonzero coefficients both sides are exactly computable:
the coefficient side is a finite sum and the spectral side is a rectangle
rule over the Bernstein-Szego density, which converges geometrically.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import as_matrix, dagger, logdet_pd, require_contraction
from .measure import MatrixMeasure, entropy_K, entropy_reference, grid_logdet, weighted_logdet
from .opuc import VerblunskySequence, bernstein_szego_measure

T_FORMS_TOL = 1e-10


def _as_sequence(alpha) -> VerblunskySequence:
    if isinstance(alpha, VerblunskySequence):
        return alpha
    return VerblunskySequence(np.asarray(alpha, dtype=complex))


def _tr(m) -> complex:
    return complex(np.trace(m))


def rhs_T(alpha, check: bool = True) -> float:
    """``T = Re tr(alpha_0 - sum_k alpha_k alpha_{k+1}^dagger)``.

    With ``check`` the expanded form (:func:`rhs_T_alt`) must agree to 1e-10.
    """
    a = _as_sequence(alpha)
    if len(a) == 0:
        return 0.0
    cross = [_tr(a[k] @ dagger(a[k + 1])).real for k in range(len(a) - 1)]
    value = _tr(a[0]).real - math.fsum(cross)
    if check:
        alt = rhs_T_alt(a)
        if abs(alt - value) > T_FORMS_TOL * max(1.0, abs(value)):
            raise ArithmeticError(f"T forms disagree: {value!r} vs {alt!r}")
    return value


def rhs_T_alt(alpha) -> float:
    """``Re tr a_0 + tr(a_0 a_0^dagger)/2 + sum tr|a_k - a_{k+1}|^2 / 2 - sum tr a_k a_k^dagger``."""
    a = _as_sequence(alpha)
    if len(a) == 0:
        return 0.0
    padded = a.padded(len(a) + 1)
    diffs = padded[:-1] - padded[1:]
    terms = [_tr(a[0]).real, 0.5 * _tr(a[0] @ dagger(a[0])).real]
    terms += [0.5 * _tr(d @ dagger(d)).real for d in diffs]
    terms += [-_tr(x @ dagger(x)).real for x in a.coeffs]
    return math.fsum(terms)


def szego_sum(alpha) -> float:
    """``sum_k log det(1 - alpha_k alpha_k^dagger)``."""
    a = _as_sequence(alpha)
    one = np.eye(a.dim)
    return math.fsum(logdet_pd(one - x @ dagger(x)) for x in a.coeffs)


def rhs_sumrule(alpha, g: float) -> float:
    """Coefficient side ``sum_k log det(1 - alpha_k alpha_k^dagger) - g T``."""
    _check_g(g)
    return szego_sum(alpha) - g * rhs_T(alpha)


def lhs_sumrule(mu: MatrixMeasure, g: float) -> float:
    """Spectral side ``int (1 - g cos theta) log det w dlambda_0``; ``-inf`` when degenerate."""
    _check_g(g)
    return weighted_logdet(mu, g)[0]


def _check_g(g: float) -> None:
    if not abs(g) <= 1:
        raise ValueError(f"|g| must be <= 1, got {g}")


def A_k_term(alpha_k, alpha_next, g: float) -> float:
    """``-log det(1 - a a^dagger) - g tr(a a^dagger) + (g/2) tr|b - a|^2``."""
    a = require_contraction(alpha_k)
    b = require_contraction(alpha_next, "alpha_next")
    d = b - a
    s = _tr(a @ dagger(a)).real
    return -logdet_pd(np.eye(a.shape[0]) - a @ dagger(a)) - g * s + 0.5 * g * _tr(d @ dagger(d)).real


def cruz_bound(alpha_k, alpha_next, g: float) -> float:
    """Lower bound ``(1 - g) tr aa^dagger + tr (aa^dagger)^2 / 2 + (g/2) tr|b - a|^2`` for ``A_k``."""
    a = as_matrix(alpha_k)
    b = as_matrix(alpha_next, a.shape[0])
    aa = a @ dagger(a)
    d = b - a
    return (1 - g) * _tr(aa).real + 0.5 * _tr(aa @ aa).real + 0.5 * g * _tr(d @ dagger(d)).real


def step_rule_rhs(alpha, g: float, k: int = 0) -> float:
    """``log det(1 - a_k a_k^dagger) - g Re tr(a_k - a_{k+1} - a_{k+1} a_k^dagger)``."""
    a = _as_sequence(alpha)
    x, y = a[k], a[k + 1]
    one = np.eye(a.dim)
    return logdet_pd(one - x @ dagger(x)) - g * _tr(x - y - y @ dagger(x)).real


def step_rule_lhs(alpha, g: float, M: int = 4096, n: int = 1) -> float:
    """``int log det(w w_n^{-1}) dlambda_g`` with ``w_n`` the density after stripping ``n`` times."""
    a = _as_sequence(alpha)
    mu = bernstein_szego_measure(a, M)
    mu_n = bernstein_szego_measure(a.shifted(n), M)
    logs, _ = grid_logdet(mu)
    logs_n, _ = grid_logdet(mu_n)
    return weighted_logdet(mu, g, logs - logs_n)[0]


def step_rule_residual(alpha, g: float, M: int = 4096) -> float:
    """Gap in the one-step identity, by quadrature on a common grid."""
    _check_g(g)
    a = _as_sequence(alpha)
    if len(a) == 0:
        return 0.0
    return abs(step_rule_lhs(a, g, M) - step_rule_rhs(a, g))


def iterated_G(alpha, g: float, N: int) -> float:
    """Sum of the one-step right-hand sides over ``k < N`` (missing coefficients are zero)."""
    a = _as_sequence(alpha)
    return math.fsum(step_rule_rhs(a, g, k) for k in range(N))


def printed_G_forms(alpha, g: float, N: int) -> tuple[float, float]:
    """Two closed forms of ``G_N`` with a ``-g`` edge term, for comparison with :func:`iterated_G`.

    Returns ``(first, second)``:

    * ``-g Re tr(a_N - a_0) + g sum Re tr a_k a_{k+1}^dagger + sum log det(1 - a_k a_k^dagger)``
    * ``-g Re tr(a_N - a_0) + (g/2) tr(a_N a_N^dagger - a_0 a_0^dagger) - sum A_k``
    """
    a = _as_sequence(alpha)
    one = np.eye(a.dim)
    edge = -g * _tr(a[N] - a[0]).real
    cross = math.fsum(_tr(a[k] @ dagger(a[k + 1])).real for k in range(N))
    logs = math.fsum(logdet_pd(one - a[k] @ dagger(a[k])) for k in range(N))
    first = edge + g * cross + logs
    sq = _tr(a[N] @ dagger(a[N]) - a[0] @ dagger(a[0])).real
    second = edge + 0.5 * g * sq - math.fsum(A_k_term(a[k], a[k + 1], g) for k in range(N))
    return first, second


@dataclass(frozen=True)
class GemDiagnostics:
    """Partial sums of the three summability series, indexed by ``k``."""

    sum_i: np.ndarray
    sum_ii: np.ndarray
    sum_iii: np.ndarray
    governing: str

    def final(self) -> dict:
        last = lambda s: float(s[-1]) if len(s) else 0.0
        return {"sum_i": last(self.sum_i), "sum_ii": last(self.sum_ii), "sum_iii": last(self.sum_iii)}


def gem_diagnostics(alpha, g: float = 0.0) -> GemDiagnostics:
    """Partial sums of ``tr aa^dagger``, ``tr(aa^dagger)^2 + tr|a_{k+1} - a_k|^2`` and its ``+`` variant.

    ``alpha`` may be any array of square matrices (no contraction check).
    The governing series is (i) for ``|g| < 1``, (ii) for ``g = 1``, (iii) for ``g = -1``.
    """
    a = np.asarray(alpha.coeffs if isinstance(alpha, VerblunskySequence) else alpha, dtype=complex)
    if a.ndim == 1:
        a = a[:, None, None]
    n = a.shape[0]
    nxt = np.concatenate([a[1:], np.zeros_like(a[:1])]) if n else a
    aa = a @ dagger(a)
    t1 = np.trace(aa, axis1=-2, axis2=-1).real
    t2 = np.trace(aa @ aa, axis1=-2, axis2=-1).real
    dm, dp = nxt - a, nxt + a
    tm = np.trace(dm @ dagger(dm), axis1=-2, axis2=-1).real
    tp = np.trace(dp @ dagger(dp), axis1=-2, axis2=-1).real
    governing = "i" if abs(g) < 1 else ("ii" if g > 0 else "iii")
    return GemDiagnostics(np.cumsum(t1), np.cumsum(t2 + tm), np.cumsum(t2 + tp), governing)


def flip_reduce(alpha, g: float) -> tuple[VerblunskySequence, float]:
    """Map a negative ``g`` to ``-g`` by rotating the measure by pi: ``a_k -> (-1)^{k+1} a_k``."""
    _check_g(g)
    a = _as_sequence(alpha)
    if g >= 0:
        return a, g
    signs = np.array([(-1.0) ** (k + 1) for k in range(len(a))])
    return VerblunskySequence(a.coeffs * signs[:, None, None]), -g


CSV_COLUMNS = ("g", "p", "N", "lhs", "rhs", "residual", "T", "gem_i", "gem_ii", "gem_iii")
CSV_HEADER = "# mopuc-sumrule v1: " + ",".join(CSV_COLUMNS)


@dataclass
class SumRuleReport:
    g: float
    p: int
    N_trunc: int
    lhs_integral: float
    rhs_series: float
    residual: float
    entropy_lhs: float
    entropy_rhs: float
    T_value: float
    T_alt_value: float
    gem_partial_sums: dict
    gem_governing: str
    flags: dict = field(default_factory=dict)
    tail_estimate: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gem_partial_sums"] = {k: [float(x) for x in v] for k, v in self.gem_partial_sums.items()}
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def csv_row(self) -> str:
        last = lambda k: self.gem_partial_sums[k][-1] if len(self.gem_partial_sums[k]) else 0.0
        vals = (self.g, self.p, self.N_trunc, self.lhs_integral, self.rhs_series, self.residual,
                self.T_value, last("sum_i"), last("sum_ii"), last("sum_iii"))
        return ",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in vals)


def _assemble(mu: MatrixMeasure, a: VerblunskySequence, g: float, tail=None, grid=None) -> SumRuleReport:
    _check_g(g)
    grid = grid or grid_logdet(mu)
    lhs, lhs_inf = weighted_logdet(mu, g, *grid)
    ent = entropy_K(g, mu, grid)
    logs = szego_sum(a)
    T = rhs_T(a)
    rhs = logs - g * T
    ref = a.dim * entropy_reference(g)
    gems = gem_diagnostics(a, g)
    return SumRuleReport(
        g=float(g),
        p=a.dim,
        N_trunc=len(a),
        lhs_integral=lhs,
        rhs_series=rhs,
        residual=abs(lhs - rhs),
        entropy_lhs=ent,
        entropy_rhs=ref - logs + g * T,
        T_value=T,
        T_alt_value=rhs_T_alt(a),
        gem_partial_sums={"sum_i": gems.sum_i, "sum_ii": gems.sum_ii, "sum_iii": gems.sum_iii},
        gem_governing=gems.governing,
        flags={"lhs_infinite": bool(lhs_inf), "entropy_infinite": bool(np.isinf(ent))},
        tail_estimate=tail,
    )


def sumrule_report(alpha, g: float, M: int = 4096) -> SumRuleReport:
    """Both sides of the sum rule for the Bernstein-Szego measure of ``alpha``."""
    a = _as_sequence(alpha)
    return _assemble(bernstein_szego_measure(a, M), a, g)


def sumrule_reports(alpha, g_list, M: int = 4096) -> list[SumRuleReport]:
    """:func:`sumrule_report` for several couplings, building the measure once."""
    a = _as_sequence(alpha)
    mu = bernstein_szego_measure(a, M)
    grid = grid_logdet(mu)
    return [_assemble(mu, a, g, grid=grid) for g in g_list]


def measure_report(mu: MatrixMeasure, alpha, g: float) -> SumRuleReport:
    """Sum rule for an arbitrary measure against its first ``len(alpha)`` coefficients.

    The coefficient side is a partial sum; ``tail_estimate`` extrapolates the
    remaining contribution from the geometric decay of ``tr a_k a_k^dagger``
    over the last coefficients, or is ``None`` when no such decay is visible.
    """
    a = _as_sequence(alpha)
    return _assemble(mu, a, g, tail=_tail_estimate(a, g))


def _tail_estimate(a: VerblunskySequence, g: float) -> float | None:
    if len(a) < 4:
        return None
    t = np.array([_tr(x @ dagger(x)).real for x in a.coeffs[-4:]])
    if np.all(t == 0):
        return 0.0
    if np.any(t[:-1] <= 0):
        return None
    q = float(np.max(t[1:] / t[:-1]))
    if not q < 1:
        return None
    # -log det(1 - aa^dagger) and the g-weighted terms are each O(tr aa^dagger)
    per_term = (1.0 / (1.0 - min(t[-1], 0.5))) + 3.0 * abs(g)
    return float(per_term * t[-1] * q / (1.0 - q))
