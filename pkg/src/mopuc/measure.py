"""Normalized p x p matrix measures on the unit circle.

A measure is stored as samples of its a.c. density on the uniform grid
``theta_j = 2 pi j / M`` plus a finite list of atoms.  Integrals against
the density use the periodic rectangle rule, which is exact for
trigonometric polynomials of degree < M and geometrically accurate for
the analytic densities produced by finitely many Verblunsky coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .errors import BadSample, MomentOrderTooHigh, NotNormalizable, RadiusTooLarge
from .linalg import PSD_TOL, dagger, hermitian, inv_hermitian_sqrt

R_MAX = 0.99
DET_FLOOR = 1e-300
FLOOR_FRACTION = 0.01
NORMALIZATION_TOL = 1e-8


def grid_angles(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


def _check_grid_size(M: int) -> None:
    if M < 8 or M & (M - 1):
        raise ValueError(f"grid size must be a power of two >= 8, got {M}")


@dataclass(frozen=True)
class Atom:
    theta: float
    weight: np.ndarray


@dataclass(frozen=True)
class MatrixMeasure:
    """Density samples ``W(theta_j)`` of shape ``(M, p, p)`` and point masses.

    Build through :func:`make_measure`; the constructor does no validation.
    """

    density: np.ndarray
    atoms: tuple[Atom, ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return self.density.shape[-1]

    @property
    def grid_size(self) -> int:
        return self.density.shape[0]

    @property
    def angles(self) -> np.ndarray:
        return grid_angles(self.grid_size)

    def total_mass(self) -> np.ndarray:
        mass = self.density.mean(axis=0)
        for atom in self.atoms:
            mass = mass + atom.weight
        return mass


def _as_density(samples, dim: int | None) -> np.ndarray:
    d = np.asarray(samples, dtype=complex)
    if d.ndim == 1:
        d = d[:, None, None]
        if dim is not None and dim > 1:
            d = d * np.eye(dim)
    if d.ndim != 3 or d.shape[1] != d.shape[2]:
        raise BadSample(f"density samples must have shape (M, p, p), got {d.shape}")
    return d


def _check_psd(mats: np.ndarray, what: str) -> np.ndarray:
    try:
        h = hermitian(mats)
    except Exception as exc:
        raise BadSample(f"{what}: {exc}") from exc
    w = np.linalg.eigvalsh(h)
    if np.any(w < -PSD_TOL):
        raise BadSample(f"{what} not PSD (min eigenvalue {w.min():.3e})")
    return h


def make_measure(density, atoms=(), renormalize: bool = False, dim: int | None = None) -> MatrixMeasure:
    """Validate samples and atoms into a normalized :class:`MatrixMeasure`.

    ``density`` is an ``(M, p, p)`` array, or an ``(M,)`` array read as a
    quasi-scalar density (times the ``dim`` x ``dim`` identity).  ``atoms`` is
    an iterable of ``(theta, weight)`` pairs.  With ``renormalize`` the
    whole measure is conjugated by ``S^{-1/2}``, ``S`` the total mass;
    otherwise ``mu(T) = 1`` is checked to 1e-8.
    """
    d = _as_density(density, dim)
    _check_grid_size(d.shape[0])
    p = d.shape[-1]
    d = _check_psd(d, "density sample")
    ats = []
    for theta, weight in atoms:
        w = np.asarray(weight, dtype=complex)
        if w.ndim == 0:
            w = w * np.eye(p)
        w = _check_psd(w.reshape(p, p), "atom weight")
        ats.append(Atom(float(theta) % (2 * np.pi), w))
    mu = MatrixMeasure(d, tuple(ats))
    mass = mu.total_mass()
    if renormalize:
        if np.linalg.eigvalsh(hermitian(mass)).min() <= 1e-14:
            raise NotNormalizable("total mass is singular")
        s = inv_hermitian_sqrt(mass)
        d = hermitian(s @ d @ s)
        ats = [Atom(a.theta, hermitian(s @ a.weight @ s)) for a in ats]
        mu = MatrixMeasure(d, tuple(ats))
    else:
        err = np.max(np.abs(mass - np.eye(p)))
        if err > NORMALIZATION_TOL:
            raise NotNormalizable(f"total mass differs from identity by {err:.3e}")
    return mu


def lambda_g(g: float, dim: int = 1, M: int = 4096) -> MatrixMeasure:
    """Quasi-scalar Gross-Witten reference ``(1 - g cos theta) dtheta/2pi`` times identity."""
    if abs(g) > 1:
        raise ValueError(f"|g| must be <= 1, got {g}")
    _check_grid_size(M)
    w = 1.0 - g * np.cos(grid_angles(M))
    return MatrixMeasure(np.clip(w, 0.0, None)[:, None, None] * np.eye(dim, dtype=complex))


def lambda0(dim: int = 1, M: int = 4096) -> MatrixMeasure:
    return lambda_g(0.0, dim, M)


def moment(mu: MatrixMeasure, n: int) -> np.ndarray:
    """``c_n = int e^{-i n theta} dmu``."""
    return moments(mu, abs(n))[n] if n >= 0 else dagger(moments(mu, -n)[-n])


def moments(mu: MatrixMeasure, nmax: int) -> np.ndarray:
    """Array of ``c_0 .. c_nmax``, shape ``(nmax + 1, p, p)``.

    The density part is one FFT along the grid axis.
    """
    M = mu.grid_size
    if nmax > M // 4:
        raise MomentOrderTooHigh(f"order {nmax} exceeds M/4 = {M // 4}")
    c = np.fft.fft(mu.density, axis=0)[: nmax + 1] / M
    n = np.arange(nmax + 1)
    for atom in mu.atoms:
        c = c + np.exp(-1j * n * atom.theta)[:, None, None] * atom.weight
    c[0] = hermitian(c[0])
    return c


def _kernel_integral(mu: MatrixMeasure, z, kernel) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > R_MAX + 1e-15):
        raise RadiusTooLarge(f"|z| = {np.abs(z).max():.6g} exceeds {R_MAX}")
    zf = z.reshape(-1)
    p = mu.dim
    e = np.exp(1j * mu.angles)
    k = kernel(e[None, :], zf[:, None]) / mu.grid_size
    out = (k @ mu.density.reshape(mu.grid_size, p * p)).reshape(-1, p, p)
    for atom in mu.atoms:
        ea = np.exp(1j * atom.theta)
        out = out + kernel(ea, zf)[:, None, None] * atom.weight
    return out.reshape(z.shape + (p, p))


def caratheodory_eval(mu: MatrixMeasure, z) -> np.ndarray:
    """``F(z) = int (e^{it} + z)/(e^{it} - z) dmu(t)`` for ``|z| <= 0.99``.

    ``z`` may be an array; the result has shape ``z.shape + (p, p)``.
    """
    return _kernel_integral(mu, z, lambda e, z: (e + z) / (e - z))


def caratheodory_quotient(mu: MatrixMeasure, z) -> np.ndarray:
    """``(F(z) - 1)/z = int 2/(e^{it} - z) dmu``; finite at ``z = 0`` where it is ``2 c_1``."""
    return _kernel_integral(mu, z, lambda e, z: 2.0 / (e - z))


def flip_measure(mu: MatrixMeasure) -> MatrixMeasure:
    """Rotate by pi: ``W~(theta_j) = W(theta_{j + M/2})``, atoms shifted by pi."""
    M = mu.grid_size
    d = np.roll(mu.density, -(M // 2), axis=0)
    atoms = tuple(Atom((a.theta + np.pi) % (2 * np.pi), a.weight) for a in mu.atoms)
    return MatrixMeasure(d, atoms)


def entropy_reference(g: float) -> float:
    """``K(lambda_g | lambda_0) = 1 - sqrt(1 - g^2) + log((1 + sqrt(1 - g^2))/2)``."""
    if abs(g) > 1:
        raise ValueError(f"|g| must be <= 1, got {g}")
    s = np.sqrt(max(0.0, 1.0 - g * g))
    return float(1.0 - s + np.log((1.0 + s) / 2.0))


def grid_logdet(mu: MatrixMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Per-node ``log det W(theta_j)`` with degenerate nodes clamped.

    Returns ``(values, clamped)`` where ``clamped`` marks nodes whose
    determinant fell at or below ``DET_FLOOR``.
    """
    w = np.linalg.eigvalsh(mu.density)
    logs = np.log(np.clip(w, DET_FLOOR, None)).sum(axis=-1)
    clamped = logs <= np.log(DET_FLOOR)
    logs = np.maximum(logs, np.log(DET_FLOOR))
    return logs, clamped


def weighted_logdet(mu: MatrixMeasure, g: float, logs=None, clamped=None) -> tuple[float, bool]:
    """``(1/M) sum_j (1 - g cos theta_j) log det W(theta_j)`` and an infinite flag.

    Atoms never enter.  When more than ``FLOOR_FRACTION`` of the nodes are
    clamped the integral is reported as ``-inf``.  Precomputed ``logs`` (and
    ``clamped``) from :func:`grid_logdet` may be passed to skip the
    eigenvalue sweep.
    """
    if abs(g) > 1:
        raise ValueError(f"|g| must be <= 1, got {g}")
    if logs is None:
        logs, clamped = grid_logdet(mu)
    elif clamped is None:
        clamped = np.zeros(len(logs), dtype=bool)
    if clamped.mean() > FLOOR_FRACTION:
        return -np.inf, True
    u = np.clip(1.0 - g * np.cos(mu.angles), 0.0, None)
    return float(np.mean(u * logs)), False


def entropy_K(g: float, mu: MatrixMeasure, grid=None) -> float:
    """Relative entropy of the quasi-scalar ``Lambda_g`` with respect to ``mu``.

    With ``h = W/(1 - g cos)`` the density of ``mu`` relative to ``lambda_g``,
    this is ``-int log det h dlambda_g``.  Returns ``inf`` when the clamping
    rule declares the a.c. part degenerate.  ``grid`` is an optional
    precomputed :func:`grid_logdet` result.
    """
    val, infinite = weighted_logdet(mu, g, *(grid or ()))
    if infinite:
        return np.inf
    u = np.clip(1.0 - g * np.cos(mu.angles), 0.0, None)
    # u log u -> 0 where the reference weight vanishes
    ref = mu.dim * float(np.mean(xlogy(u, u)))
    return -val + ref
