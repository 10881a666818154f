"""Matrix orthogonal polynomials on the unit circle.

Monic polynomials come from block Toeplitz solves on the moments; the
normalized ones fix the leading coefficients ``kappa_k`` by the positivity
conditions ``kappa_k^{-1} kappa_{k+1} > 0`` (right) and
``kappa_{k+1} kappa_k^{-1} > 0`` (left).  The Szego recursion runs in the
opposite direction, from coefficients to polynomials and to the
Bernstein-Szego measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConventionCheckFailed,
    DegreeMismatch,
    InsufficientMoments,
    NotContraction,
    SingularPolynomial,
    TrivialMeasure,
)
from .linalg import as_matrix, contraction_margin, dagger, defect_matrices, hermitian, inv_hermitian_sqrt
from .measure import MatrixMeasure, grid_angles, make_measure, moments

TOEPLITZ_MIN_EIG = 1e-10
STRICTNESS = 1e-8
CROSS_CHECK_TOL = 1e-6
CROSS_CHECK_DEPTH = 16


@dataclass(frozen=True)
class MatrixPolynomial:
    """``P(z) = sum_j coeffs[j] z^j`` with ``coeffs`` of shape ``(d + 1, p, p)``."""

    coeffs: np.ndarray

    @classmethod
    def constant(cls, m) -> "MatrixPolynomial":
        return cls(as_matrix(m)[None])

    @classmethod
    def monomial(cls, k: int, dim: int) -> "MatrixPolynomial":
        c = np.zeros((k + 1, dim, dim), dtype=complex)
        c[k] = np.eye(dim)
        return cls(c)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.broadcast_to(self.coeffs[-1], z.shape + self.coeffs.shape[1:]).copy()
        for c in self.coeffs[-2::-1]:
            out = out * z[..., None, None] + c
        return out

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        n = max(self.degree, other.degree) + 1
        c = np.zeros((n, self.dim, self.dim), dtype=complex)
        c[: self.degree + 1] += self.coeffs
        c[: other.degree + 1] += other.coeffs
        return MatrixPolynomial(c)

    def __sub__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return self + MatrixPolynomial(-other.coeffs)

    def shift(self) -> "MatrixPolynomial":
        """Multiply by ``z``."""
        return MatrixPolynomial(np.concatenate([np.zeros_like(self.coeffs[:1]), self.coeffs]))

    def lmul(self, m) -> "MatrixPolynomial":
        return MatrixPolynomial(np.asarray(m) @ self.coeffs)

    def rmul(self, m) -> "MatrixPolynomial":
        return MatrixPolynomial(self.coeffs @ np.asarray(m))

    def reversed(self, k: int | None = None) -> "MatrixPolynomial":
        return reversed_poly(self, self.degree if k is None else k)


def reversed_poly(P: MatrixPolynomial, k: int) -> MatrixPolynomial:
    """``P^*(z) = z^k P(1/conj z)^dagger``: coefficient ``j`` becomes ``coeff[k - j]^dagger``."""
    if P.degree > k:
        raise DegreeMismatch(f"polynomial of degree {P.degree} reversed at declared degree {k}")
    c = np.zeros((k + 1, P.dim, P.dim), dtype=complex)
    c[: P.degree + 1] = P.coeffs
    return MatrixPolynomial(dagger(c[::-1]))


@dataclass(frozen=True)
class VerblunskySequence:
    """Finite list of strict contractions ``alpha_0 .. alpha_{N-1}``; later ones are zero."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"coefficients must have shape (N, p, p), got {c.shape}")
        for k, a in enumerate(c):
            if contraction_margin(a) <= 0:
                raise NotContraction(f"alpha_{k} has norm >= 1")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_list(cls, mats, dim: int | None = None) -> "VerblunskySequence":
        mats = [as_matrix(m) for m in mats]
        if not mats:
            return cls(np.zeros((0, dim or 1, dim or 1), dtype=complex))
        return cls(np.stack(mats))

    @classmethod
    def zeros(cls, n: int, dim: int) -> "VerblunskySequence":
        return cls(np.zeros((n, dim, dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[-1]

    def __len__(self) -> int:
        return self.coeffs.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        if 0 <= k < len(self):
            return self.coeffs[k]
        if k >= len(self):
            return np.zeros((self.dim, self.dim), dtype=complex)
        raise IndexError(k)

    def padded(self, n: int) -> np.ndarray:
        out = np.zeros((max(n, len(self)), self.dim, self.dim), dtype=complex)
        out[: len(self)] = self.coeffs
        return out

    def shifted(self, n: int = 1) -> "VerblunskySequence":
        """Coefficients of the measure stripped ``n`` times."""
        return VerblunskySequence(self.coeffs[n:].reshape(-1, self.dim, self.dim))


def _moment_lookup(c: np.ndarray):
    def get(n: int) -> np.ndarray:
        if abs(n) >= len(c):
            raise InsufficientMoments(f"moment {n} needed, only up to {len(c) - 1} available")
        return c[n] if n >= 0 else dagger(c[-n])

    return get


def inner_R(f: MatrixPolynomial, g: MatrixPolynomial, c: np.ndarray) -> np.ndarray:
    """``<<f, g>>_R = sum_{j,m} f_j^dagger c_{j-m} g_m``; ``c`` holds ``c_0, c_1, ...``."""
    get = _moment_lookup(c)
    out = np.zeros((f.dim, f.dim), dtype=complex)
    for j, fj in enumerate(f.coeffs):
        for m, gm in enumerate(g.coeffs):
            out += dagger(fj) @ get(j - m) @ gm
    return out


def inner_L(f: MatrixPolynomial, g: MatrixPolynomial, c: np.ndarray) -> np.ndarray:
    """``<<f, g>>_L = sum_{j,m} g_m c_{j-m} f_j^dagger``."""
    get = _moment_lookup(c)
    out = np.zeros((f.dim, f.dim), dtype=complex)
    for j, fj in enumerate(f.coeffs):
        for m, gm in enumerate(g.coeffs):
            out += gm @ get(j - m) @ dagger(fj)
    return out


def block_toeplitz(c: np.ndarray, k: int) -> np.ndarray:
    """``(c_{j-m})_{0 <= j, m < k}`` as a ``(kp, kp)`` Hermitian matrix."""
    get = _moment_lookup(c)
    p = c.shape[-1]
    T = np.empty((k * p, k * p), dtype=complex)
    for j in range(k):
        for m in range(k):
            T[j * p:(j + 1) * p, m * p:(m + 1) * p] = get(j - m)
    return T


def _monic_from_moments(c: np.ndarray, N: int) -> tuple[list, list]:
    p = c.shape[-1]
    get = _moment_lookup(c)
    T = block_toeplitz(c, N + 1)
    lam = np.linalg.eigvalsh(hermitian(T)).min()
    if lam < TOEPLITZ_MIN_EIG:
        raise TrivialMeasure(f"block Toeplitz matrix of order {N + 1} has min eigenvalue {lam:.3e}")
    right = [MatrixPolynomial.monomial(0, p)]
    left = [MatrixPolynomial.monomial(0, p)]
    for k in range(1, N + 1):
        Tk = T[: k * p, : k * p]
        # right: sum_m c_{j-m} B_m = -c_{j-k}
        rhs = np.concatenate([get(j - k) for j in range(k)])
        B = np.linalg.solve(Tk, -rhs).reshape(k, p, p)
        right.append(MatrixPolynomial(np.concatenate([B, np.eye(p)[None]])))
        # left: sum_m B_m c_{j-m} = -c_{j-k}; the system matrix is the block transpose of Tk
        Tt = Tk.reshape(k, p, k, p).transpose(2, 1, 0, 3).reshape(k * p, k * p)
        rhs_l = np.concatenate([get(j - k) for j in range(k)], axis=1)
        Bl = np.linalg.solve(Tt.T, -rhs_l.T).T
        Bl = np.stack([Bl[:, m * p:(m + 1) * p] for m in range(k)])
        left.append(MatrixPolynomial(np.concatenate([Bl, np.eye(p)[None]])))
    return right, left


def monic_orthogonals(mu: MatrixMeasure, N: int) -> tuple[list, list]:
    """Right and left monic orthogonal polynomials ``Phi_0 .. Phi_N``."""
    if N > mu.grid_size // 8:
        raise InsufficientMoments(f"degree {N} exceeds M/8 = {mu.grid_size // 8}")
    return _monic_from_moments(moments(mu, N), N)


@dataclass(frozen=True)
class OPUCBasis:
    monic_R: list
    monic_L: list
    normalized_R: list
    normalized_L: list
    kappa_R: list
    kappa_L: list
    alphas: VerblunskySequence
    defects_R: list
    defects_L: list
    moments: np.ndarray

    @property
    def dim(self) -> int:
        return self.alphas.dim


def opuc_basis(mu: MatrixMeasure, N: int) -> OPUCBasis:
    """Monic and normalized polynomials to degree ``N`` and ``alpha_0 .. alpha_{N-1}``."""
    if N > mu.grid_size // 8:
        raise InsufficientMoments(f"degree {N} exceeds M/8 = {mu.grid_size // 8}")
    c = moments(mu, 2 * N)
    right, left = _monic_from_moments(c, N)
    p = mu.dim
    kR, kL = [np.eye(p, dtype=complex)], [np.eye(p, dtype=complex)]
    for k in range(1, N + 1):
        uR = hermitian(inner_R(right[k], right[k], c))
        uL = hermitian(inner_L(left[k], left[k], c))
        kR.append(kR[-1] @ inv_hermitian_sqrt(dagger(kR[-1]) @ uR @ kR[-1]))
        kL.append(inv_hermitian_sqrt(kL[-1] @ uL @ dagger(kL[-1])) @ kL[-1])
    alphas, dR, dL = [], [], []
    for k in range(N):
        a = -dagger(kR[k]) @ dagger(right[k + 1].coeffs[0]) @ np.linalg.inv(kL[k])
        margin = contraction_margin(a)
        if margin < STRICTNESS:
            raise NotContraction(f"alpha_{k} has contraction margin {margin:.3e}")
        rR, rL = defect_matrices(a)
        alphas.append(a)
        dR.append(rR)
        dL.append(rL)
    return OPUCBasis(
        monic_R=right,
        monic_L=left,
        normalized_R=[P.rmul(k) for P, k in zip(right, kR)],
        normalized_L=[P.lmul(k) for P, k in zip(left, kL)],
        kappa_R=kR,
        kappa_L=kL,
        alphas=VerblunskySequence.from_list(alphas, dim=p),
        defects_R=dR,
        defects_L=dL,
        moments=c,
    )


def verblunsky_from_measure(mu: MatrixMeasure, N: int, cross_check: bool = True) -> VerblunskySequence:
    """``alpha_0 .. alpha_{N-1}`` from block Gram-Schmidt on the moments.

    With ``cross_check`` the first 16 coefficients are compared against the
    Schur algorithm (whose stripping loses accuracy with depth) and
    ``ConventionCheckFailed`` is raised beyond 1e-6.
    """
    N = min(N, mu.grid_size // 8)
    alphas = opuc_basis(mu, N).alphas
    if cross_check and N > 0:
        from .schur import schur_alphas

        depth = min(N, CROSS_CHECK_DEPTH)
        other = schur_alphas(mu, depth)
        err = float(np.max(np.abs(other.coeffs - alphas.coeffs[:depth])))
        if err > CROSS_CHECK_TOL:
            raise ConventionCheckFailed(f"Gram-Schmidt and Schur coefficients differ by {err:.3e}")
    return alphas


def szego_step(phiL: MatrixPolynomial, phiR: MatrixPolynomial, alpha) -> tuple[MatrixPolynomial, MatrixPolynomial]:
    """One step of the normalized Szego recursion.

    ``phi_{k+1}^L = rho_L^{-1} (z phi_k^L - alpha^dagger phi_k^{R*})`` and
    ``phi_{k+1}^R = (z phi_k^R - phi_k^{L*} alpha^dagger) rho_R^{-1}``.
    """
    a = as_matrix(alpha, phiL.dim)
    rR, rL = defect_matrices(a)
    k = max(phiL.degree, phiR.degree)
    ad = dagger(a)
    nextL = (phiL.shift() - reversed_poly(phiR, k).lmul(ad)).lmul(np.linalg.inv(rL))
    nextR = (phiR.shift() - reversed_poly(phiL, k).rmul(ad)).rmul(np.linalg.inv(rR))
    return nextL, nextR


def szego_polynomials(alpha: VerblunskySequence) -> tuple[list, list]:
    """Normalized ``phi_0 .. phi_N`` (left, right) generated by the recursion."""
    one = MatrixPolynomial.monomial(0, alpha.dim)
    left, right = [one], [one]
    for a in alpha.coeffs:
        l, r = szego_step(left[-1], right[-1], a)
        left.append(l)
        right.append(r)
    return left, right


def bernstein_szego_measure(alpha: VerblunskySequence, M: int = 4096, strict: bool = True) -> MatrixMeasure:
    """Measure with density ``[phi_N^R phi_N^R^dagger]^{-1}`` whose coefficients are ``alpha`` then zeros.

    ``strict=False`` skips the 1e-8 normalization check, for quadrature
    studies on grids too coarse to resolve the density.
    """
    N = len(alpha)
    if M < 8 * N:
        raise ValueError(f"grid size {M} below 8 * {N}")
    _, right = szego_polynomials(alpha)
    vals = right[-1](np.exp(1j * grid_angles(M)))
    cond = np.linalg.cond(vals)
    if not np.all(np.isfinite(cond)) or cond.max() > 1e12:
        raise SingularPolynomial(f"phi_{N}^R is numerically singular on the circle (cond {np.max(cond):.3e})")
    density = np.linalg.inv(vals @ dagger(vals))
    if not strict:
        return MatrixMeasure(hermitian(density))
    return make_measure(density)
