"""Band-limited vector fields on the torus and their checkpoint format.

A SpectralField stores one complex coefficient per lattice site and
component, axes (component, n_1, ..., n_d) with axis index i mapping to
n = i - M.  Real-valued fields are kept exactly Hermitian
(coeff(-n) == conj(coeff(n)) bitwise): constructors mirror the canonical
half of the lattice, and forward transforms re-canonicalize.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid import (GridSpec, k_squared, keep_mask, negate_lattice,
                   wavevectors)

SNSF_MAGIC = b"SNSF"
SNSF_VERSION = 1

DIVFREE_TOL = 1e-12


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        expected = (self.grid.d,) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")
        if self.coeffs.dtype != np.complex128:
            raise ValueError(f"coefficients must be complex128, got {self.coeffs.dtype}")
        self.coeffs.flags.writeable = False

    # Small arithmetic surface so integrators and tests read naturally.
    def __add__(self, other: "SpectralField") -> "SpectralField":
        require_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        require_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs)

    def coefficient(self, n) -> np.ndarray:
        """Coefficient vector at lattice point n (tuple of ints)."""
        idx = tuple(int(c) + self.grid.M for c in n)
        return self.coeffs[(slice(None),) + idx]


def require_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def hermitian_defect(f: SpectralField) -> float:
    """Largest |coeff(-n) - conj(coeff(n))| over the lattice."""
    mirrored = np.conj(negate_lattice(f.coeffs, f.grid.d))
    return float(np.max(np.abs(f.coeffs - mirrored)))


def mean_mode(f: SpectralField) -> np.ndarray:
    return f.coefficient((0,) * f.grid.d)


def divergence_defect(f: SpectralField) -> float:
    """max |n . coeff(n)| relative to the largest per-mode |n| ||coeff(n)||."""
    wv = wavevectors(f.grid)
    dv = np.abs(np.einsum("j...,j...->...", wv, f.coeffs))
    scale = np.sqrt(k_squared(f.grid) * np.sum(np.abs(f.coeffs) ** 2, axis=0))
    top = float(np.max(scale))
    if top == 0.0:
        return 0.0
    return float(np.max(dv)) / top


def is_divergence_free(f: SpectralField, tol: float = DIVFREE_TOL) -> bool:
    """Per-mode check |n . c(n)| <= tol * ||c(n)|| at every n != 0."""
    wv = wavevectors(f.grid)
    dv = np.abs(np.einsum("j...,j...->...", wv, f.coeffs))
    norms = np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0))
    # Modes with |n| up to M*sqrt(d) inflate the roundoff of the dot
    # product; compare against |n| ||c|| like the projection itself does.
    return bool(np.all(dv <= tol * np.sqrt(np.maximum(k_squared(f.grid), 1.0)) * norms + 1e-300))


def canonicalize_hermitian(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Make coeffs bitwise Hermitian by mirroring the canonical half."""
    mirrored = np.conj(negate_lattice(coeffs, grid.d))
    return np.where(keep_mask(grid), coeffs, mirrored)


# ----------------------------------------------------------------------
# transforms between coefficients and uniform physical grids


def _embed_indices(grid: GridSpec, points: int) -> np.ndarray:
    return np.arange(-grid.M, grid.M + 1) % points


def to_physical(coeffs: np.ndarray, grid: GridSpec, points: int) -> np.ndarray:
    """Evaluate on the uniform points^d grid; returns the real part.

    Exact for Hermitian coefficient tensors (the discarded imaginary part
    is FFT roundoff).  Leading axes of ``coeffs`` are batched.
    """
    lead = coeffs.shape[: coeffs.ndim - grid.d]
    padded = np.zeros(lead + (points,) * grid.d, dtype=np.complex128)
    idx = _embed_indices(grid, points)
    padded[(Ellipsis,) + np.ix_(*([idx] * grid.d))] = coeffs
    axes = tuple(range(-grid.d, 0))
    phys = np.fft.ifftn(padded, axes=axes) * points ** grid.d
    return np.ascontiguousarray(phys.real)


def from_physical(values: np.ndarray, grid: GridSpec, points: int) -> np.ndarray:
    """Forward transform + truncation to the lattice, re-canonicalized.

    Exact (up to roundoff) when ``values`` samples a trigonometric
    polynomial whose degree stays below points - M per axis, so that no
    alias lands inside the lattice.
    """
    axes = tuple(range(-grid.d, 0))
    full = np.fft.fftn(np.asarray(values, dtype=np.float64), axes=axes) / points ** grid.d
    idx = _embed_indices(grid, points)
    coeffs = full[(Ellipsis,) + np.ix_(*([idx] * grid.d))]
    return canonicalize_hermitian(np.ascontiguousarray(coeffs), grid)


def physical_mesh(grid: GridSpec, points: int) -> np.ndarray:
    x = 2.0 * np.pi * np.arange(points) / points
    return np.stack(np.meshgrid(*([x] * grid.d), indexing="ij"))


# ----------------------------------------------------------------------
# constructors


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros((grid.d,) + grid.shape, dtype=np.complex128))


def field_from_modes(grid: GridSpec, entries: dict) -> SpectralField:
    """Build a real field from {n: coefficient vector}, mirroring to -n.

    Entries must be given on one member of each +-n pair only.
    """
    coeffs = np.zeros((grid.d,) + grid.shape, dtype=np.complex128)
    M = grid.M
    for n, vec in entries.items():
        if len(n) != grid.d:
            raise ValueError(f"mode {n} has wrong dimension")
        if any(abs(c) > M for c in n):
            raise ValueError(f"mode {n} outside the lattice at M={M}")
        vec = np.asarray(vec, dtype=np.complex128)
        idx = tuple(c + M for c in n)
        neg = tuple(M - c for c in n)
        if idx == neg and np.max(np.abs(vec.imag)) > 0:
            raise ValueError("origin coefficient must be real (and should be 0)")
        coeffs[(slice(None),) + idx] = vec
        coeffs[(slice(None),) + neg] = np.conj(vec)
    return SpectralField(grid, coeffs)


def single_pair_field(grid: GridSpec, n, component: int, amplitude: float = 1.0) -> SpectralField:
    """Real field amplitude*(e_n + e_{-n}) on one component: 2a cos(n.x)."""
    vec = np.zeros(grid.d, dtype=np.complex128)
    vec[component] = amplitude
    return field_from_modes(grid, {tuple(n): vec})


def taylor_green(grid: GridSpec, amplitude: float = 1.0) -> SpectralField:
    """2D vortex (cos x1 sin x2, -sin x1 cos x2): divergence-free, and its
    self-advection is a pure gradient, so the projected nonlinearity is 0."""
    if grid.d != 2:
        raise ValueError("Taylor-Green field is two-dimensional")
    a = amplitude
    return field_from_modes(grid, {
        (1, 1): np.array([-0.25j * a, 0.25j * a]),
        (1, -1): np.array([0.25j * a, 0.25j * a]),
    })


def abc_flow(grid: GridSpec, a: float = 1.0, b: float = 1.0, c: float = 1.0) -> SpectralField:
    """3D Beltrami field (curl u = u); self-advection is a pure gradient."""
    if grid.d != 3:
        raise ValueError("ABC field is three-dimensional")
    return field_from_modes(grid, {
        (0, 0, 1): np.array([-0.5j * a, 0.5 * a, 0.0]),
        (0, 1, 0): np.array([0.5 * c, 0.0, -0.5j * c]),
        (1, 0, 0): np.array([0.0, -0.5j * b, 0.5 * b]),
    })


def _tangent_directions(grid: GridSpec) -> np.ndarray:
    """A unit vector orthogonal to n at every site (zero at the origin)."""
    wv = wavevectors(grid)
    if grid.d == 2:
        tau = np.stack([-wv[1], wv[0]])
    else:
        # cross(n, e3), falling back to cross(n, e1) where n is parallel to e3
        tau = np.stack([wv[1], -wv[0], np.zeros_like(wv[0])])
        axis = (wv[0] == 0) & (wv[1] == 0)
        tau[1] = np.where(axis, wv[2], tau[1])
        tau[2] = np.where(axis, -wv[1], tau[2])
    norm = np.sqrt(np.sum(tau ** 2, axis=0))
    norm[norm == 0] = 1.0
    return tau / norm


def supercritical_profile(grid: GridSpec, alpha: float, amplitude: float = 1.0) -> SpectralField:
    """Deterministic divergence-free datum sitting exactly at regularity -alpha.

    Coefficient magnitude <n>^(alpha - d/2) along a tangential direction:
    the H^{-alpha} norm is log-marginal in M, every better Sobolev norm
    diverges polynomially, which is the regime the randomization targets.
    """
    ksq = k_squared(grid)
    mag = amplitude * (1.0 + ksq) ** (0.5 * (alpha - grid.d / 2.0))
    mag = np.where(ksq == 0, 0.0, mag)
    coeffs = (_tangent_directions(grid) * mag).astype(np.complex128)
    return SpectralField(grid, canonicalize_hermitian(coeffs, grid))


def random_field(grid: GridSpec, seed: int, decay: float = 1.0,
                 divergence_free: bool = False) -> SpectralField:
    """Gaussian coefficients with |n|^-decay falloff; for tests."""
    rng = np.random.default_rng(seed)
    shape = (grid.d,) + grid.shape
    raw = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    ksq = k_squared(grid)
    raw *= np.where(ksq == 0, 0.0, (1.0 + ksq) ** (-decay / 2.0))
    coeffs = canonicalize_hermitian(raw, grid)
    field = SpectralField(grid, coeffs)
    if divergence_free:
        from .spectral import leray_project
        field = leray_project(field)
    return field


# ----------------------------------------------------------------------
# SNSF binary checkpoints

_HEADER = struct.Struct("<4sIIII")


def save_snsf(f: SpectralField, path) -> None:
    """magic 'SNSF', version, d, M, component count (u32), then coefficients
    as little-endian (re, im) float64 pairs, components outermost, sites in
    lexicographic (n_1, ..., n_d) order."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNSF_MAGIC, SNSF_VERSION, f.grid.d, f.grid.M, f.grid.d))
        fh.write(np.ascontiguousarray(f.coeffs).astype("<c16").tobytes())


def load_snsf(path, pad_factor: float = 4.0) -> SpectralField:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, d, M, ncomp = _HEADER.unpack(header)
        if magic != SNSF_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != SNSF_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        if ncomp != d:
            raise ValueError(f"{path}: component count {ncomp} != dimension {d}")
        grid = GridSpec(d=d, M=M, pad_factor=pad_factor)
        count = d * grid.mode_count
        payload = fh.read(16 * count)
        if len(payload) != 16 * count:
            raise ValueError(f"{path}: truncated payload")
        coeffs = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return SpectralField(grid, coeffs.reshape((d,) + grid.shape))
