"""Normalized elementary symmetric functions of curvature data.

For kappa = (kappa_1, ..., kappa_n) the normalized k-th elementary symmetric
function is E_k = sigma_k / C(n, k), where sigma_k sums the products of all
k-element subsets; E_0 = 1 and E_k = 0 for k > n.  The degree-one quotient
F = E_k / E_{k-1} drives the curvature flows and is well behaved only inside
the Garding cone Gamma_k^+ = {E_1 > 0, ..., E_k > 0}.

Matrix arguments are handled through their eigenvalues: a symmetric operator
is diagonalized with cyclic Jacobi rotations and derivative tensors are
rotated back to the original frame.  Evaluation uses the product-expansion
recurrence over entries, which is exact at the small dimensions (n <= 8)
this package targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolation

__all__ = [
    "CurvatureVector",
    "SymMatrix",
    "sigma_all",
    "elementary_symmetric",
    "ek_derivative_eigen",
    "ek_derivative_tensor",
    "curvature_quotient",
    "curvature_quotient_gradient",
    "gamma_cone_member",
    "cone_threshold",
    "newton_maclaurin_gap",
    "jacobi_eigh",
]


@dataclass(frozen=True)
class CurvatureVector:
    """Ordered list of the n principal curvatures at a point."""

    kappa: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise ValueError("kappa must be a 1-d vector with n >= 2 entries")
        if not np.all(np.isfinite(k)):
            raise ValueError("kappa entries must be finite")
        object.__setattr__(self, "kappa", k)

    @property
    def n(self) -> int:
        return self.kappa.size


@dataclass(frozen=True)
class SymMatrix:
    """Orthonormal-frame components of a symmetric curvature operator."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("entries must be a square matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        if not np.array_equal(a, a.T):
            raise ValueError("entries must be exactly symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _as_kappa(kappa) -> np.ndarray:
    return np.asarray(getattr(kappa, "kappa", kappa), dtype=float)


def _as_matrix(a) -> np.ndarray:
    return np.asarray(getattr(a, "entries", a), dtype=float)


def sigma_all(kappa) -> np.ndarray:
    """All sigma_j, j = 0..n, computed along the trailing axis.

    Accepts batched input of shape (..., n) and returns shape (..., n + 1),
    so per-node curvature data can be reduced in one call.
    """
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    out = np.zeros(kappa.shape[:-1] + (n + 1,))
    out[..., 0] = 1.0
    for i in range(n):
        x = kappa[..., i]
        for j in range(min(i + 1, n), 0, -1):
            out[..., j] += x * out[..., j - 1]
    return out


def elementary_symmetric(kappa, k: int):
    """Normalized E_k along the trailing axis; E_0 = 1, E_k = 0 for k > n."""
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > n:
        return np.zeros(kappa.shape[:-1])[()] if kappa.ndim > 1 else 0.0
    value = sigma_all(kappa)[..., k] / math.comb(n, k)
    return value[()] if value.ndim == 0 else value


def ek_derivative_eigen(kappa, k: int) -> np.ndarray:
    """Eigenvalue derivatives dE_k / dkappa_p, batched over leading axes.

    Equals C(n,k)^-1 * sigma_{k-1} of the remaining n-1 entries.
    """
    kappa = _as_kappa(kappa)
    n = kappa.shape[-1]
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    cols = []
    for p in range(n):
        rest = np.delete(kappa, p, axis=-1)
        cols.append(sigma_all(rest)[..., k - 1])
    return np.stack(cols, axis=-1) / math.comb(n, k)


def ek_derivative_tensor(a, k: int) -> np.ndarray:
    """Matrix derivative dE_k / dA_ij of a symmetric operator A.

    Diagonalizes A, applies the eigenvalue calculus and rotates back, so the
    result satisfies the trace identities

        tr(dE_k)          = k E_{k-1}
        tr(dE_k . A)      = k E_k
        tr(dE_k . A^2)    = n E_1 E_k - (n - k) E_{k+1}

    to round-off.
    """
    a = _as_matrix(a)
    w, q = jacobi_eigh(a)
    d = ek_derivative_eigen(w, k)
    return (q * d) @ q.T


def cone_threshold(kappa, i: int) -> float:
    """Scale-aware strictness floor for E_i > 0 tests."""
    kappa = _as_kappa(kappa)
    scale = float(np.max(np.abs(kappa))) if kappa.size else 0.0
    return 1e-12 * (1.0 + scale**i)


def gamma_cone_member(kappa, k: int) -> bool:
    """True iff E_i(kappa) > 0 for every i = 1..k (scale-aware strict)."""
    kappa = _as_kappa(kappa)
    n = kappa.size
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    sig = sigma_all(kappa)
    for i in range(1, k + 1):
        if sig[i] / math.comb(n, i) <= cone_threshold(kappa, i):
            return False
    return True


def curvature_quotient(kappa, k: int) -> float:
    """F = E_k / E_{k-1}, normalized so F(1, ..., 1) = 1.

    Degree-one homogeneous and strictly increasing on Gamma_k^+.  Raises
    ConeViolation outside the cone, where the quotient is undefined or
    numerically unstable.
    """
    kappa = _as_kappa(kappa)
    n = kappa.size
    if not 1 <= k <= n:
        raise ValueError("k must satisfy 1 <= k <= n")
    if not gamma_cone_member(kappa, k):
        raise ConeViolation(
            f"kappa={kappa.tolist()} is outside Gamma_{k}^+; E_k/E_(k-1) undefined"
        )
    sig = sigma_all(kappa)
    ek = sig[k] / math.comb(n, k)
    ekm1 = sig[k - 1] / math.comb(n, k - 1)
    return float(ek / ekm1)


def curvature_quotient_gradient(kappa, k: int) -> np.ndarray:
    """Per-eigenvalue gradient dF/dkappa_p of F = E_k / E_{k-1}."""
    kappa = _as_kappa(kappa)
    n = kappa.size
    if not gamma_cone_member(kappa, k):
        raise ConeViolation(f"kappa={kappa.tolist()} is outside Gamma_{k}^+")
    ek = elementary_symmetric(kappa, k)
    dk = ek_derivative_eigen(kappa, k)
    if k == 1:
        return dk
    ekm1 = elementary_symmetric(kappa, k - 1)
    dkm1 = ek_derivative_eigen(kappa, k - 1)
    return (dk * ekm1 - ek * dkm1) / ekm1**2


def newton_maclaurin_gap(kappa, k: int, m: int) -> float:
    """Gap E_k E_m - E_{m+1} E_{k-1} of the Newton-MacLaurin inequality.

    Nonnegative on Gamma_k^+ for 1 <= k <= m, vanishing exactly when all
    entries of kappa coincide.
    """
    kappa = _as_kappa(kappa)
    n = kappa.size
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    if not gamma_cone_member(kappa, k):
        raise ConeViolation(f"kappa={kappa.tolist()} is outside Gamma_{k}^+")
    sig = sigma_all(kappa)

    def e(j):
        return sig[j] / math.comb(n, j) if j <= n else 0.0

    return float(e(k) * e(m) - e(m + 1) * e(k - 1))


def jacobi_eigh(a, max_sweeps: int = 50):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi.

    Returns (w, q) with eigenvalues ascending and eigenvectors in the
    columns of q.  Branch-free rotations keep full symmetric accuracy for
    the n <= 8 operators this package works with.
    """
    a = np.array(_as_matrix(a), dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), q
    scale = np.max(np.abs(a)) + 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) <= 1e-18 * scale:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, -s], [s, c]])
                a[[p, r], :] = rot @ a[[p, r], :]
                a[:, [p, r]] = a[:, [p, r]] @ rot.T
                q[:, [p, r]] = q[:, [p, r]] @ rot.T
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], q[:, order]
