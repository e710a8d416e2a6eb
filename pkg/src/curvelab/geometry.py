"""Extrinsic geometry of starshaped and strictly convex hypersurfaces.

Two parametrizations of a closed hypersurface M in R^(n+1) are supported:

* radial graph: M = {r(xi) xi : xi in S^n} with induced metric
  g_ij = r^2 e_ij + (grad r)_i (grad r)_j and second fundamental form
  h_ij = (r^2 e_ij + 2 (grad r)_i (grad r)_j - r hess(r)_ij) / sqrt(r^2 + |grad r|^2),

* inverse Gauss map: X(nu) = h(nu) nu + grad h(nu) for a support function h,
  with principal curvature radii the eigenvalues of b = hess(h) + h e.

Principal curvatures of the radial graph come from the symmetric matrix
lambda = g^(-1/2) h g^(-1/2), with the inverse square root in closed form

    g^(-1/2) = r^(-1) [e - grad r x grad r / (rho (rho + r))],  rho = sqrt(r^2 + |grad r|^2),

which squares exactly to g^(-1).  Everything is evaluated per node in the
orthonormal frame of the round metric, so e_ij = delta_ij throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import (
    ConvexityLost,
    DegenerateMetric,
    NonpositiveSupport,
    NotStarshaped,
    ZeroMeanCurvature,
)
from .sphere_grid import ScalarField, SphericalGrid

__all__ = [
    "CurvatureField",
    "StaticConvexityReport",
    "radial_geometry",
    "support_geometry",
    "radial_mean_curvature_direct",
    "static_convexity",
    "sphericity",
    "enclosed_volume",
    "centroid",
]


@dataclass(frozen=True)
class CurvatureField:
    """Per-node extrinsic geometry of a hypersurface.

    ``kappa`` holds the n principal curvatures sorted ascending (axisymmetric
    bodies repeat the (n-1)-fold tangential curvature).  ``area_factor`` is
    the area element relative to the grid quadrature weight, so that surface
    integrals are ``grid.integrate(density * area_factor)``.  ``normal`` and
    ``position`` are ambient vectors: (..., 3) on full-s2 grids and (N, 2)
    meridian components (orbit direction, symmetry axis) on axisymmetric ones.
    """

    grid: SphericalGrid
    kind: str  # 'radial' | 'support'
    n: int
    scalar: np.ndarray          # defining field (r or h) at the nodes
    grad: tuple                 # orthonormal-frame gradient of the scalar
    kappa: np.ndarray           # (..., n) ascending
    H: np.ndarray               # mean curvature, sum of kappa_i
    A2: np.ndarray              # |A|^2 = sum of kappa_i^2
    area_factor: np.ndarray
    support: np.ndarray         # <X, nu> per node
    normal: np.ndarray
    position: np.ndarray
    _metric_data: tuple = dataclass_field(repr=False, default=())

    def tangential_grad_sq(self, grad_f) -> np.ndarray:
        """|grad^M f|^2 = g^{ij} (grad f)_i (grad f)_j from frame components.

        ``grad_f`` are the parameter-sphere frame components of the gradient
        of f, as returned by ``SphericalGrid.gradient``.
        """
        if self.kind == "radial":
            if self.grid.mode == "axisym":
                (rho,) = self._metric_data
                return grad_f[0] ** 2 / rho**2
            i11, i12, i22 = self._metric_data
            g1, g2 = grad_f
            return i11 * g1**2 + 2.0 * i12 * g1 * g2 + i22 * g2**2
        # support parametrization: g^{-1} = b^{-1} e b^{-1}
        if self.grid.mode == "axisym":
            rho_m, rho_a = self._metric_data
            out = (grad_f[0] / rho_m) ** 2
            if len(grad_f) > 1:
                out = out + (grad_f[1] / rho_a) ** 2
            return out
        b11, b12, b22, det = self._metric_data
        g1, g2 = grad_f
        w1 = (b22 * g1 - b12 * g2) / det
        w2 = (-b12 * g1 + b11 * g2) / det
        return w1**2 + w2**2

    def total_area(self) -> float:
        return self.grid.integrate(self.area_factor)

    def volume(self) -> float:
        """Volume of the enclosed domain.

        Radial bodies use the cone formula (1/(n+1)) int r^(n+1); support
        bodies the divergence identity (n+1) Vol = int <X, nu> dmu.
        """
        if self.kind == "radial":
            return self.grid.integrate(self.scalar ** (self.n + 1)) / (self.n + 1)
        return self.grid.integrate(self.support * self.area_factor) / (self.n + 1)

    def radius_stats(self) -> tuple[float, float, float]:
        """(min, max, area-weighted mean) of |X| over the surface."""
        rr = np.sqrt(np.sum(self.position**2, axis=-1))
        w = self.grid.weights * self.area_factor
        return float(rr.min()), float(rr.max()), float(np.sum(w * rr) / np.sum(w))

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "kappa_min": float(self.kappa.min()),
            "kappa_max": float(self.kappa.max()),
            "H_min": float(self.H.min()),
            "H_max": float(self.H.max()),
            "support_min": float(self.support.min()),
            "support_max": float(self.support.max()),
            "area": self.total_area(),
            "volume": self.volume(),
        }


@dataclass(frozen=True)
class StaticConvexityReport:
    """Pointwise margin of h_ij - h^(-1) g_ij >= 0 in a g-orthonormal frame.

    The eigenvalues of that tensor are kappa_i - 1/h, so the node margin is
    kappa_min - 1/h and the global margin its minimum.  margin >= 0 certifies
    static convexity; for any smooth body other than an origin-centred sphere
    the margin is strictly negative (take the g-trace and integrate: the
    Minkowski identity forces the trace integral to zero, so a nonnegative
    margin pins the body to the round equality case).
    """

    margin: float
    worst_node: tuple
    node_margins: np.ndarray


def _check_finite(kind, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DegenerateMetric(f"{kind} geometry produced non-finite entries")


def radial_geometry(field: ScalarField) -> CurvatureField:
    """Full extrinsic geometry of the starshaped graph r(xi) xi."""
    grid = field.grid
    r = field.values
    n = grid.n
    if r.min() <= 0.0:
        raise NotStarshaped(
            f"radial function must be positive; min r = {r.min():.6g}"
        )

    if grid.mode == "axisym":
        r1 = grid.d_theta(r)
        r2 = grid.d2_theta(r)
        q = r1 * r1
        rho2 = r * r + q
        rho = np.sqrt(rho2)
        kap_m = (r * r + 2.0 * q - r * r2) / (rho2 * rho)
        kap_a = (1.0 - (r1 / r) * grid.cot_t) / rho
        kappa = np.sort(
            np.concatenate([kap_m[:, None], np.repeat(kap_a[:, None], n - 1, axis=1)], axis=1),
            axis=1,
        )
        H = kap_m + (n - 1) * kap_a
        A2 = kap_m**2 + (n - 1) * kap_a**2
        area_factor = r ** (n - 1) * rho
        support = r * r / rho
        normal = np.stack(
            [(r * grid.sin_t - r1 * grid.cos_t) / rho, (r * grid.cos_t + r1 * grid.sin_t) / rho],
            axis=-1,
        )
        position = r[:, None] * grid.xi()
        _check_finite("radial", kappa, H, area_factor)
        return CurvatureField(
            grid, "radial", n, r, (r1,), kappa, H, A2, area_factor, support,
            normal, position, _metric_data=(rho,),
        )

    # full-s2
    d1, d2 = grid.gradient(r)
    h11, h12, h22 = grid.hessian_components(r)
    q = d1 * d1 + d2 * d2
    rho2 = r * r + q
    rho = np.sqrt(rho2)

    # second fundamental form (orthonormal frame of the round metric)
    b11 = (r * r + 2.0 * d1 * d1 - r * h11) / rho
    b12 = (2.0 * d1 * d2 - r * h12) / rho
    b22 = (r * r + 2.0 * d2 * d2 - r * h22) / rho

    # lambda = S b S with S = g^(-1/2) = a I + c (dr x dr)
    a = 1.0 / r
    c = -1.0 / (r * rho * (rho + r))
    w1 = b11 * d1 + b12 * d2
    w2 = b12 * d1 + b22 * d2
    dw = d1 * w1 + d2 * w2
    l11 = a * a * b11 + 2.0 * a * c * d1 * w1 + c * c * dw * d1 * d1
    l12 = a * a * b12 + a * c * (d1 * w2 + d2 * w1) + c * c * dw * d1 * d2
    l22 = a * a * b22 + 2.0 * a * c * d2 * w2 + c * c * dw * d2 * d2

    mean = 0.5 * (l11 + l22)
    disc = np.sqrt(np.maximum(0.25 * (l11 - l22) ** 2 + l12**2, 0.0))
    kappa = np.stack([mean - disc, mean + disc], axis=-1)
    H = l11 + l22
    A2 = kappa[..., 0] ** 2 + kappa[..., 1] ** 2
    area_factor = r ** (n - 1) * rho
    support = r * r / rho

    xi = grid.xi()
    e_theta, e_phi = grid.frame()
    grad_ambient = d1[..., None] * e_theta + d2[..., None] * e_phi
    normal = (r[..., None] * xi - grad_ambient) / rho[..., None]
    position = r[..., None] * xi

    # inverse metric components for tangential gradients
    i11 = (1.0 - d1 * d1 / rho2) / (r * r)
    i12 = (-d1 * d2 / rho2) / (r * r)
    i22 = (1.0 - d2 * d2 / rho2) / (r * r)

    _check_finite("radial", kappa, H, area_factor)
    return CurvatureField(
        grid, "radial", n, r, (d1, d2), kappa, H, A2, area_factor, support,
        normal, position, _metric_data=(i11, i12, i22),
    )


def radial_mean_curvature_direct(field: ScalarField) -> np.ndarray:
    """Mean curvature via the scalar log-radial formula.

    With omega = log r,

        H = (n - (e^{ij} - grad^i omega grad^j omega / (1 + |grad omega|^2))
             hess(omega)_ij) / (r sqrt(1 + |grad omega|^2)),

    an independent algebraic route to the eigenvalue sum of radial_geometry.
    """
    grid = field.grid
    r = field.values
    n = grid.n
    if r.min() <= 0.0:
        raise NotStarshaped("radial function must be positive")
    grad_r = grid.gradient(r)
    hess_r = grid.hessian_components(r)
    if grid.mode == "axisym":
        o1 = grad_r[0] / r
        oo = o1 * o1
        vv = 1.0 + oo
        ho_m = hess_r[0] / r - o1 * o1
        ho_a = hess_r[1] / r
        contract = ho_m + (n - 1) * ho_a - (o1 * o1 * ho_m) / vv
        return (n - contract) / (r * np.sqrt(vv))
    o1, o2 = grad_r[0] / r, grad_r[1] / r
    oo = o1 * o1 + o2 * o2
    vv = 1.0 + oo
    ho11 = hess_r[0] / r - o1 * o1
    ho12 = hess_r[1] / r - o1 * o2
    ho22 = hess_r[2] / r - o2 * o2
    contract = (ho11 + ho22) - (o1 * o1 * ho11 + 2 * o1 * o2 * ho12 + o2 * o2 * ho22) / vv
    return (n - contract) / (r * np.sqrt(vv))


def support_geometry(field: ScalarField) -> CurvatureField:
    """Extrinsic geometry of a strictly convex body from its support function."""
    grid = field.grid
    h = field.values
    n = grid.n
    eps = 1e-10 * (1.0 + float(np.abs(h).max()))

    if grid.mode == "axisym":
        h1 = grid.d_theta(h)
        hess = grid.hessian_components(h)
        rho_m = hess[0] + h
        rho_a = hess[1] + h
        rho_min = min(rho_m.min(), rho_a.min())
        if rho_min <= eps:
            raise ConvexityLost(
                f"support Hessian b lost positivity (min radius {rho_min:.6g})"
            )
        kap_m = 1.0 / rho_m
        kap_a = 1.0 / rho_a
        kappa = np.sort(
            np.concatenate([kap_m[:, None], np.repeat(kap_a[:, None], n - 1, axis=1)], axis=1),
            axis=1,
        )
        H = kap_m + (n - 1) * kap_a
        A2 = kap_m**2 + (n - 1) * kap_a**2
        area_factor = rho_m * rho_a ** (n - 1)
        position = np.stack(
            [h * grid.sin_t + h1 * grid.cos_t, h * grid.cos_t - h1 * grid.sin_t], axis=-1
        )
        normal = grid.xi()
        _check_finite("support", kappa, H, area_factor)
        return CurvatureField(
            grid, "support", n, h, (h1,), kappa, H, A2, area_factor, h,
            normal, position, _metric_data=(rho_m, rho_a),
        )

    d1, d2 = grid.gradient(h)
    h11, h12, h22 = grid.hessian_components(h)
    b11 = h11 + h
    b12 = h12
    b22 = h22 + h
    mean = 0.5 * (b11 + b22)
    disc = np.sqrt(np.maximum(0.25 * (b11 - b22) ** 2 + b12**2, 0.0))
    rho_lo = mean - disc
    rho_hi = mean + disc
    if rho_lo.min() <= eps:
        raise ConvexityLost(
            f"support Hessian b lost positivity (min radius {rho_lo.min():.6g})"
        )
    kappa = np.stack([1.0 / rho_hi, 1.0 / rho_lo], axis=-1)
    H = kappa[..., 0] + kappa[..., 1]
    A2 = kappa[..., 0] ** 2 + kappa[..., 1] ** 2
    det = rho_lo * rho_hi
    area_factor = det

    xi = grid.xi()
    e_theta, e_phi = grid.frame()
    position = h[..., None] * xi + d1[..., None] * e_theta + d2[..., None] * e_phi
    _check_finite("support", kappa, H, area_factor)
    return CurvatureField(
        grid, "support", n, h, (d1, d2), kappa, H, A2, area_factor, h,
        normal=xi, position=position, _metric_data=(b11, b12, b22, det),
    )


def static_convexity(field: CurvatureField) -> StaticConvexityReport:
    """Margin of the static-convexity tensor h_ij - h^(-1) g_ij.

    In a g-orthonormal frame the tensor has eigenvalues kappa_i - 1/h, so the
    report carries min_i kappa_i - 1/h per node and the global minimum.
    """
    h = field.support
    if h.min() <= 0.0:
        raise NonpositiveSupport(
            f"support value must be positive everywhere (min {h.min():.6g})"
        )
    node_margins = field.kappa[..., 0] - 1.0 / h
    worst = np.unravel_index(int(np.argmin(node_margins)), node_margins.shape)
    return StaticConvexityReport(
        margin=float(node_margins.min()),
        worst_node=worst,
        node_margins=node_margins,
    )


def sphericity(field: CurvatureField) -> float:
    """Umbilicity defect max(n |A|^2 / H^2 - 1); zero exactly on round spheres."""
    scale = 1.0 + float(np.abs(field.kappa).max())
    if np.any(np.abs(field.H) <= 1e-15 * scale):
        raise ZeroMeanCurvature("mean curvature vanishes at a node")
    return float(np.max(field.n * field.A2 / field.H**2 - 1.0))


def enclosed_volume(field: ScalarField) -> float:
    """Volume of a starshaped domain by the radial cone formula."""
    if field.values.min() <= 0.0:
        raise NotStarshaped("radial function must be positive")
    n = field.grid.n
    return field.grid.integrate(field.values ** (n + 1)) / (n + 1)


def centroid(field: CurvatureField):
    """Area-weighted centroid of the surface (Steiner point approximation).

    Returns a 3-vector on full-s2 grids.  On axisymmetric grids the orbit
    components vanish by symmetry and the axis component is returned alone.
    """
    w = field.grid.weights * field.area_factor
    area = np.sum(w)
    if field.grid.mode == "full-s2":
        return np.asarray(
            [float(np.sum(w * field.position[..., i])) for i in range(3)]
        ) / area
    return float(np.sum(w * field.position[..., 1]) / area)
