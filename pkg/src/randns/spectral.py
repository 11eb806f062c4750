"""Exact spectral primitives: projection, norms, multipliers, advection.

Norm conventions use the probability measure dx/(2pi)^d on the torus, so
||e_n||_{L^2} = 1 and Parseval reads ||f||_{L^2}^2 = sum |c(n)|^2.

The quadratic advection term is evaluated by zero-padded transforms on a
grid of >= 3M+2 points per axis, which reproduces the sharply truncated
convolution exactly (no 2/3-rule loss).  A direct O(M^{2d}) convolution
is kept as an independent oracle for small M.
"""

from __future__ import annotations

import numpy as np

from .fields import (SpectralField, canonicalize_hermitian, from_physical,
                     require_same_grid, to_physical)
from .grid import GridSpec, k_squared, wavevectors

_REJECTED_P = "finite p must be an even integer in {2, 4, 6, 8}, got %r"


def leray_project(f: SpectralField) -> SpectralField:
    """Apply (I - n n^T / |n|^2) per mode; the zero mode stays zero.

    Idempotent up to roundoff and preserves Hermitian symmetry bitwise
    (the projector is even in n and real).
    """
    wv = wavevectors(f.grid)
    ksq = k_squared(f.grid)
    safe = np.where(ksq == 0, 1.0, ksq)
    ndotc = np.einsum("j...,j...->...", wv, f.coeffs)
    projected = f.coeffs - wv * (ndotc / safe)
    projected[(slice(None),) + (f.grid.M,) * f.grid.d] = 0.0
    return SpectralField(f.grid, projected)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """( sum_n <n>^{2s} sum_i |c_i(n)|^2 )^{1/2} with <n>^2 = 1 + |n|^2."""
    weights = (1.0 + k_squared(f.grid)) ** s
    return float(np.sqrt(np.sum(weights * np.sum(np.abs(f.coeffs) ** 2, axis=0))))


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """Real L^2 pairing (normalized measure) of two real fields."""
    require_same_grid(f, g)
    return float(np.real(np.sum(f.coeffs * np.conj(g.coeffs))))


def gradient_l2_norm(f: SpectralField) -> float:
    """||grad f||_{L^2}: weight |n|^2 on the coefficient energies."""
    return float(np.sqrt(np.sum(k_squared(f.grid) * np.sum(np.abs(f.coeffs) ** 2, axis=0))))


def gradient_coeffs(f: SpectralField) -> np.ndarray:
    """Coefficients of d_j f_i, shape (d, d, lattice...): axis 0 = j."""
    wv = wavevectors(f.grid)
    return 1j * wv[:, None] * f.coeffs[None, :]


def _pointwise_magnitude_sq(coeffs: np.ndarray, grid: GridSpec, points: int) -> np.ndarray:
    phys = to_physical(coeffs, grid, points)
    return np.sum(phys ** 2, axis=0)


def lp_norm(f: SpectralField, p) -> float:
    """L^p norm of the pointwise Euclidean magnitude, normalized measure.

    Finite even p in {2, 4, 6, 8} is evaluated exactly: |f|^p is a
    trigonometric polynomial of degree <= pM per axis and the uniform
    >= pM+2 point grid integrates it without aliasing.  p = inf is the
    max over the pad_factor-oversampled grid and is an approximation.
    """
    if p == np.inf or p == "inf":
        mag_sq = _pointwise_magnitude_sq(f.coeffs, f.grid, f.grid.linf_points())
        return float(np.sqrt(np.max(mag_sq)))
    if p not in (2, 4, 6, 8):
        raise ValueError(_REJECTED_P % (p,))
    mag_sq = _pointwise_magnitude_sq(f.coeffs, f.grid, f.grid.lp_points(p))
    return float(np.mean(mag_sq ** (p // 2)) ** (1.0 / p))


def lp_norm_quadrature(f: SpectralField, p: float, points: int | None = None) -> float:
    """L^p by grid quadrature for arbitrary p >= 1 (approximate).

    Exists for mixed-norm probes with fractional exponents (e.g. p = 8/3);
    unlike even p there is no exactness guarantee, only grid convergence.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if points is None:
        points = f.grid.lp_points(4)
    mag_sq = _pointwise_magnitude_sq(f.coeffs, f.grid, points)
    return float(np.mean(mag_sq ** (p / 2.0)) ** (1.0 / p))


def fractional_laplacian(f: SpectralField, sigma: float) -> SpectralField:
    """Multiply the coefficient at n by |n|^sigma; sigma = 0 is the identity."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return SpectralField(f.grid, f.coeffs.copy())
    ksq = k_squared(f.grid)
    mult = np.where(ksq == 0, 0.0, ksq ** (sigma / 2.0))
    return SpectralField(f.grid, f.coeffs * mult)


def heat_semigroup_multiplier(grid: GridSpec, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return np.exp(-k_squared(grid) * t)


# ----------------------------------------------------------------------
# advection term


def _project_and_truncate(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    wv = wavevectors(grid)
    ksq = k_squared(grid)
    safe = np.where(ksq == 0, 1.0, ksq)
    ndotc = np.einsum("j...,j...->...", wv, coeffs)
    out = coeffs - wv * (ndotc / safe)
    out[(slice(None),) + (grid.M,) * grid.d] = 0.0
    return out


def nonlinear_term(u: SpectralField, v: SpectralField) -> SpectralField:
    """Truncated, Leray-projected transform of (u . grad) v.

    Per mode k this is i (I - k k^T/k^2) sum_{k'+k''=k} (u(k') . k'') v(k''),
    both factors restricted to the lattice; equivalently the projected
    divergence of (v tensor u) when u is divergence-free.  Computed by
    zero-padded transforms (exact truncated convolution).
    """
    require_same_grid(u, v)
    grid = u.grid
    points = grid.product_points()
    u_phys = to_physical(u.coeffs, grid, points)
    dv_phys = to_physical(gradient_coeffs(v), grid, points)
    advected = np.einsum("j...,ji...->i...", u_phys, dv_phys)
    coeffs = from_physical(advected, grid, points)
    return SpectralField(grid, _project_and_truncate(coeffs, grid))


def nonlinear_term_direct(u: SpectralField, v: SpectralField) -> SpectralField:
    """Direct O(M^{2d}) convolution oracle for nonlinear_term (small M)."""
    require_same_grid(u, v)
    grid = u.grid
    d, M, L = grid.d, grid.M, grid.lattice_width
    acc = np.zeros((d,) + (2 * L - 1,) * d, dtype=np.complex128)
    it = np.ndindex(*grid.shape)
    for idx in it:
        kpp = np.array(idx) - M
        v_kpp = v.coeffs[(slice(None),) + idx]
        if not np.any(v_kpp):
            continue
        weight = 1j * np.einsum("j,j...->...", kpp.astype(float), u.coeffs)
        block = (slice(None),) + tuple(slice(i, i + L) for i in idx)
        acc[block] += weight[None] * v_kpp.reshape((d,) + (1,) * d)
    center = (slice(None),) + (slice(M, M + L),) * d
    coeffs = np.ascontiguousarray(acc[center])
    coeffs = canonicalize_hermitian(coeffs, grid)
    return SpectralField(grid, _project_and_truncate(coeffs, grid))


def trilinear_form(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """Discrete b(u, v, w) = <P_M P (u.grad)v, w>; equals the classical
    trilinear form when w is divergence-free and band-limited."""
    return l2_inner(nonlinear_term(u, v), w)
