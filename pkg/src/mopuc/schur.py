"""Matrix Schur functions, coefficient stripping and the D_0 identity.

A :class:`SchurEvaluator` evaluates one Schur function ``f_k`` on arrays of
points in the disc.  Level 0 comes from the measure through
``f(z) = z^{-1}(F - 1)(F + 1)^{-1}``; deeper levels apply the stripping map
to the level above.  The removable singularity of the stripped function at
the origin is resolved by averaging over a circle.
"""

from __future__ import annotations

import numpy as np

from .errors import ConventionCheckFailed, DepthExceeded, NotContraction, RadiusTooLarge, SingularPencil
from .linalg import as_matrix, contraction_margin, dagger, defect_matrices, hermitian
from .measure import R_MAX, MatrixMeasure, caratheodory_eval, caratheodory_quotient
from .opuc import STRICTNESS, VerblunskySequence

CAUCHY_RADIUS = 0.5
CAUCHY_NODES = 64
PENCIL_COND = 1e12
DUAL_PATH_TOL = 1e-8


def _solve_right(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ inv(b)`` for stacks, with a conditioning guard."""
    cond = np.linalg.cond(b)
    if not np.all(np.isfinite(cond)) or np.max(cond) > PENCIL_COND:
        raise SingularPencil(f"pencil condition number {np.max(cond):.3e}")
    return dagger(np.linalg.solve(dagger(b), dagger(a)))


def _points(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > R_MAX + 1e-15):
        raise RadiusTooLarge(f"|z| = {np.abs(z).max():.6g} exceeds {R_MAX}")
    return z


def cauchy_nodes(r: float = CAUCHY_RADIUS, K: int = CAUCHY_NODES) -> np.ndarray:
    return r * np.exp(2j * np.pi * np.arange(K) / K)


class SchurEvaluator:
    """Evaluator of one Schur function ``f_k`` of a measure (or of a prescribed chain).

    Instances are immutable apart from a private cache of the value at 0.
    """

    def __init__(self, dim: int, level: int, kind: str, measure=None, inner=None, alpha=None, value=None):
        self.dim = dim
        self.level = level
        self._kind = kind
        self._measure = measure
        self._inner = inner
        self._alpha = alpha
        self._value = value
        self._f0 = None
        if alpha is not None:
            self._rho_R, self._rho_L = defect_matrices(alpha)
            self._rho_R_inv = np.linalg.inv(self._rho_R)

    @classmethod
    def from_measure(cls, mu: MatrixMeasure) -> "SchurEvaluator":
        return cls(mu.dim, 0, "measure", measure=mu)

    @classmethod
    def constant(cls, value, level: int = 0) -> "SchurEvaluator":
        """The constant Schur function ``f == value`` (a contraction)."""
        v = as_matrix(value)
        if contraction_margin(v) < 0:
            raise NotContraction("constant Schur value is not a contraction")
        return cls(v.shape[0], level, "const", value=v)

    @property
    def alpha(self):
        """Coefficient stripped (or prepended) at this node, if any."""
        return self._alpha

    @property
    def parent(self):
        return self._inner

    @property
    def measure(self):
        return self._measure

    def __call__(self, z) -> np.ndarray:
        z = _points(z)
        shape = z.shape
        zf = z.reshape(-1)
        out = self._eval(zf)
        return out.reshape(shape + (self.dim, self.dim))

    def _eval(self, z: np.ndarray) -> np.ndarray:
        p = self.dim
        one = np.eye(p)
        if self._kind == "const":
            return np.broadcast_to(self._value, z.shape + (p, p)).copy()
        if self._kind == "measure":
            F = caratheodory_eval(self._measure, z)
            Q = caratheodory_quotient(self._measure, z)
            return _solve_right(Q, F + one)
        a = self._alpha
        if self._kind == "strip":
            out = np.empty(z.shape + (p, p), dtype=complex)
            at0 = z == 0
            if np.any(at0):
                out[at0] = self.at_zero()
            zz = z[~at0]
            if zz.size:
                f = self._inner._eval(zz)
                num = self._rho_R_inv @ (f - a)
                out[~at0] = _solve_right(num, one - dagger(a) @ f) @ self._rho_L / zz[:, None, None]
            return out
        # unstrip: f = rho_R^{-1} (a + z f1)(1 + z a^dagger f1)^{-1} rho_L
        f1 = self._inner._eval(z)
        zf1 = z[:, None, None] * f1
        return self._rho_R_inv @ _solve_right(a + zf1, one + dagger(a) @ zf1) @ self._rho_L

    def at_zero(self) -> np.ndarray:
        """``f_k(0)``; the Cauchy mean over ``|z| = 0.5`` (64 nodes) for stripped levels."""
        if self._f0 is None:
            if self._kind == "strip":
                self._f0 = self._eval(cauchy_nodes()).mean(axis=0)
            else:
                self._f0 = self._eval(np.zeros(1, dtype=complex))[0]
        return self._f0


def schur_eval(e: SchurEvaluator, z) -> np.ndarray:
    return e(z)


def schur_strip(e: SchurEvaluator, alpha0=None) -> SchurEvaluator:
    """``f_1 = z^{-1} rho_R^{-1} (f - a)(1 - a^dagger f)^{-1} rho_L`` with ``a = f(0)``."""
    a = e.at_zero() if alpha0 is None else as_matrix(alpha0, e.dim)
    if contraction_margin(a) <= 0:
        raise NotContraction("stripped coefficient is not a strict contraction")
    return SchurEvaluator(e.dim, e.level + 1, "strip", inner=e, alpha=a)


def schur_unstrip(e1: SchurEvaluator, alpha0) -> SchurEvaluator:
    """Inverse of :func:`schur_strip`: rebuild ``f`` from ``f_1`` and ``alpha_0``."""
    a = as_matrix(alpha0, e1.dim)
    if contraction_margin(a) <= 0:
        raise NotContraction("alpha_0 is not a strict contraction")
    return SchurEvaluator(e1.dim, max(e1.level - 1, 0), "unstrip", inner=e1, alpha=a)


def schur_alphas(mu: MatrixMeasure, N: int) -> VerblunskySequence:
    """``alpha_k = f_k(0)`` for ``k < N`` by repeated stripping."""
    e = SchurEvaluator.from_measure(mu)
    out = []
    for k in range(N):
        a = e.at_zero()
        margin = contraction_margin(a)
        if margin < STRICTNESS:
            raise DepthExceeded(f"alpha_{k} has contraction margin {margin:.3e}")
        out.append(a)
        if k + 1 < N:
            e = schur_strip(e, a)
    return VerblunskySequence.from_list(out, dim=mu.dim)


def verblunsky_via_schur(mu: MatrixMeasure, N: int, cross_check: bool = True) -> VerblunskySequence:
    """Schur-algorithm coefficients, optionally checked against Gram-Schmidt to 1e-8."""
    N = min(N, mu.grid_size // 8)
    alphas = schur_alphas(mu, N)
    if cross_check and N > 0:
        from .opuc import opuc_basis

        other = opuc_basis(mu, N).alphas
        err = float(np.max(np.abs(other.coeffs - alphas.coeffs)))
        if err > DUAL_PATH_TOL:
            raise ConventionCheckFailed(f"Schur and Gram-Schmidt coefficients differ by {err:.3e}")
    return alphas


def caratheodory_from_schur(e: SchurEvaluator, z) -> np.ndarray:
    """``F = (1 + z f)(1 - z f)^{-1}``."""
    z = _points(z)
    f = e(z)
    zf = z[..., None, None] * f
    one = np.eye(e.dim)
    return _solve_right(one + zf, one - zf)


def real_part_F(e: SchurEvaluator, z) -> np.ndarray:
    """``Re F = (1 - conj(z) f^dagger)^{-1} (1 - |z|^2 f^dagger f) (1 - z f)^{-1}``."""
    z = _points(z)
    f = e(z)
    zz = z[..., None, None]
    one = np.eye(e.dim)
    left = np.linalg.solve(one - np.conj(zz) * dagger(f), one - np.abs(zz) ** 2 * dagger(f) @ f)
    return hermitian(_solve_right(left, one - zz * f), tol=1e-6)


def d0_eval(e: SchurEvaluator, e1: SchurEvaluator, alpha0, z) -> np.ndarray:
    """``D_0 = (1 - z f)^{-1} (1 - z f_1) rho_L^{-1} (1 - f alpha_0^dagger)``."""
    z = _points(z)
    a = as_matrix(alpha0, e.dim)
    _, rL = defect_matrices(a)
    f = e(z)
    f1 = e1(z)
    zz = z[..., None, None]
    one = np.eye(e.dim)
    tail = (one - zz * f1) @ np.linalg.inv(rL) @ (one - f @ dagger(a))
    return np.linalg.solve(one - zz * f, tail)


def _stripped_pair(mu: MatrixMeasure) -> tuple[SchurEvaluator, SchurEvaluator, np.ndarray]:
    e = SchurEvaluator.from_measure(mu)
    a0 = e.at_zero()
    return e, schur_strip(e, a0), a0


def ff1_residual(mu: MatrixMeasure, z, pair=None) -> float:
    """Gap between ``det(Re F (Re F_1)^{-1})`` and ``det(D_0 D_0^dagger) det(1 - |z|^2 f^dagger f)/det(1 - f^dagger f)``.

    ``F`` comes from quadrature of the measure, ``F_1`` from the stripped
    Schur function.  Returns the largest absolute gap over the points ``z``.
    """
    z = _points(np.atleast_1d(z))
    e, e1, a0 = pair or _stripped_pair(mu)
    one = np.eye(mu.dim)
    F = caratheodory_eval(mu, z)
    F1 = caratheodory_from_schur(e1, z)
    ReF = 0.5 * (F + dagger(F))
    ReF1 = 0.5 * (F1 + dagger(F1))
    lhs = np.linalg.det(ReF) / np.linalg.det(ReF1)
    D0 = d0_eval(e, e1, a0, z)
    f = e(z)
    zz = np.abs(z)[:, None, None] ** 2
    ratio = np.linalg.det(one - zz * dagger(f) @ f) / np.linalg.det(one - dagger(f) @ f)
    rhs = np.linalg.det(D0 @ dagger(D0)) * ratio
    return float(np.max(np.abs(lhs - rhs)))


def stripped_defect_residual(mu: MatrixMeasure, z, pair=None, printed: bool = False) -> float:
    """Max-entry gap in ``1 - |z|^2 f_1^dagger f_1 = rho_L (1 - f^dagger a)^{-1} (1 - f^dagger f) (1 - a^dagger f)^{-1} rho_L``.

    ``printed=True`` uses ``(1 - f a^dagger)^{-1}`` as the right factor
    instead.  That variant agrees for p = 1 only.
    """
    z = _points(np.atleast_1d(z))
    e, e1, a0 = pair or _stripped_pair(mu)
    _, rL = defect_matrices(a0)
    one = np.eye(mu.dim)
    f = e(z)
    f1 = e1(z)
    zz = np.abs(z)[:, None, None] ** 2
    lhs = one - zz * dagger(f1) @ f1
    right = one - f @ dagger(a0) if printed else one - dagger(a0) @ f
    mid = np.linalg.solve(one - dagger(f) @ a0, one - dagger(f) @ f)
    rhs = rL @ _solve_right(mid, right) @ rL
    return float(np.max(np.abs(lhs - rhs)))
