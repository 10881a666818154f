"""Dense complex Hermitian kernels.

Every function accepts plain ``numpy`` arrays.  Square roots and
log-determinants go through ``numpy.linalg.eigh`` since the matrices are
small (p <= 8 in practice).
"""

from __future__ import annotations

import numpy as np

from .errors import NotContraction, NotHermitian, NotPD, NotPSD

PSD_TOL = 1e-12
HERMITIAN_TOL = 1e-9


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def as_matrix(a, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex matrix; scalars become 1x1."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(A + A^dagger)/2``; raise if ``A`` is visibly non-Hermitian.

    Works on stacks of matrices too (last two axes).
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    skew = np.max(np.abs(m - dagger(m)), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if skew > tol * scale:
        raise NotHermitian(f"asymmetry {skew:.3e} exceeds {tol:g}")
    return 0.5 * (m + dagger(m))


def hermitian_sqrt(a) -> np.ndarray:
    """Unique PSD square root of a Hermitian PSD matrix (or stack).

    Eigenvalues in ``[-1e-12, 0)`` are clamped to zero.
    """
    h = hermitian(a)
    w, v = np.linalg.eigh(h)
    if np.any(w < -PSD_TOL):
        raise NotPSD(f"min eigenvalue {w.min():.3e}")
    s = np.sqrt(np.clip(w, 0.0, None))
    return (v * s[..., None, :]) @ dagger(v)


def inv_hermitian_sqrt(a) -> np.ndarray:
    """``A^{-1/2}`` for Hermitian positive definite ``A``."""
    h = hermitian(a)
    w, v = np.linalg.eigh(h)
    if np.any(w <= 0):
        raise NotPD(f"min eigenvalue {w.min():.3e}")
    return (v * (1.0 / np.sqrt(w))[..., None, :]) @ dagger(v)


def logdet_pd(a) -> float | np.ndarray:
    """log det of a Hermitian positive definite matrix, as a sum of log eigenvalues."""
    w = np.linalg.eigvalsh(hermitian(a))
    if np.any(w <= 0):
        raise NotPD(f"min eigenvalue {w.min():.3e}")
    out = np.sum(np.log(w), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def contraction_margin(m) -> float:
    """``1 - ||M||_2``; positive iff ``M`` lies in the open unit ball."""
    m = as_matrix(m)
    return 1.0 - float(np.linalg.norm(m, 2))


def require_contraction(m, what: str = "alpha") -> np.ndarray:
    m = as_matrix(m)
    margin = contraction_margin(m)
    if margin <= 0:
        raise NotContraction(f"{what} has norm {1 - margin:.6g} >= 1")
    return m


def defect_matrices(alpha) -> tuple[np.ndarray, np.ndarray]:
    """``(rho_R, rho_L) = ((1 - a a^dagger)^{1/2}, (1 - a^dagger a)^{1/2})``."""
    a = require_contraction(alpha)
    one = np.eye(a.shape[0])
    return hermitian_sqrt(one - a @ dagger(a)), hermitian_sqrt(one - dagger(a) @ a)


def _log1m_tail(s: np.ndarray) -> np.ndarray:
    # -log(1 - s) - s - s^2/2 without cancellation for small s
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s < 0.1
    x = s[small]
    acc = np.zeros_like(x)
    term = x**3
    for n in range(3, 40):
        acc += term / n
        term = term * x
    out[small] = acc
    y = s[~small]
    out[~small] = -np.log1p(-y) - y - 0.5 * y * y
    return out


def logdet_remainder(alpha) -> float:
    """``R(a) = -log det(1 - a a^dagger) - tr(a a^dagger) - tr((a a^dagger)^2)/2``.

    Evaluated through the eigenvalues ``s`` of ``a a^dagger`` as
    ``sum_{n>=3} s^n / n`` so that the result stays nonnegative for tiny ``a``.
    """
    a = require_contraction(alpha)
    s = np.clip(np.linalg.eigvalsh(hermitian(a @ dagger(a))), 0.0, None)
    return float(np.sum(_log1m_tail(s)))
