"""Truncated Fourier lattice on the periodic torus.

Fields live on the integer lattice n in [-M, M]^d (max-norm truncation,
all lattice points except the origin carry data; the origin is pinned to
zero by the mean-zero convention).  Wavevectors are the integers
themselves: the torus has period 2*pi per axis and e_n(x) = exp(i n.x).

Physical-space evaluation grids are sized so that quadrature of
polynomial expressions in the field is exact:

* products of two fields need >= 3M+2 points per axis,
* |f|^p for even p needs >= p*M+2 points per axis,
* sup norms are approximated on a pad_factor-oversampled grid.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np
from scipy.fft import next_fast_len


@dataclass(frozen=True)
class GridSpec:
    """Spatial dimension, truncation radius and oversampling policy."""

    d: int
    M: int
    pad_factor: float = 4.0

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.M < 1:
            raise ValueError(f"truncation radius must be >= 1, got {self.M}")
        if self.pad_factor < 1:
            raise ValueError(f"pad_factor must be >= 1, got {self.pad_factor}")

    @property
    def lattice_width(self) -> int:
        """Points per axis of the coefficient lattice, 2M+1."""
        return 2 * self.M + 1

    @property
    def shape(self) -> tuple:
        return (self.lattice_width,) * self.d

    @property
    def mode_count(self) -> int:
        return self.lattice_width ** self.d

    def product_points(self) -> int:
        """Grid size per axis for exact quadratic products (>= 3M+2)."""
        return next_fast_len(3 * self.M + 2)

    def lp_points(self, p: int) -> int:
        """Grid size per axis for exact L^p quadrature, p even (>= pM+2)."""
        return next_fast_len(p * self.M + 2)

    def linf_points(self) -> int:
        """Grid size per axis of the sup-norm sampling grid."""
        return next_fast_len(max(ceil(self.pad_factor * self.lattice_width),
                                 2 * self.M + 2))


@lru_cache(maxsize=32)
def _lattice_arrays(d: int, M: int):
    ax = np.arange(-M, M + 1)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    wavevectors = np.stack(mesh).astype(np.float64)
    k_sq = np.sum(wavevectors ** 2, axis=0)

    # Canonical representative of each +-n pair: first nonzero component
    # positive.  The origin is its own (degenerate) pair.
    canonical = np.zeros(k_sq.shape, dtype=bool)
    undecided = np.ones(k_sq.shape, dtype=bool)
    for j in range(d):
        nj = mesh[j]
        canonical |= undecided & (nj > 0)
        undecided &= nj == 0
    keep = canonical | undecided  # canonical sites plus the origin

    for arr in (wavevectors, k_sq, canonical, keep):
        arr.flags.writeable = False
    return wavevectors, k_sq, canonical, keep


def wavevectors(grid: GridSpec) -> np.ndarray:
    """Integer wavevector components, shape (d, 2M+1, ..., 2M+1)."""
    return _lattice_arrays(grid.d, grid.M)[0]


def k_squared(grid: GridSpec) -> np.ndarray:
    """|n|^2 at each lattice site."""
    return _lattice_arrays(grid.d, grid.M)[1]


def canonical_mask(grid: GridSpec) -> np.ndarray:
    """True at the canonical member of each +-n pair (origin excluded)."""
    return _lattice_arrays(grid.d, grid.M)[2]


def keep_mask(grid: GridSpec) -> np.ndarray:
    """Canonical sites plus the origin; the complement mirrors by conjugation."""
    return _lattice_arrays(grid.d, grid.M)[3]


def canonical_coordinates(grid: GridSpec) -> np.ndarray:
    """Integer coordinates of canonical(n) at every site, shape (d, ...).

    canonical(n) is n itself where ``canonical_mask`` holds (and at the
    origin), and -n elsewhere, so paired sites share coordinates.
    """
    wv, _, _, keep = _lattice_arrays(grid.d, grid.M)
    signs = np.where(keep, 1.0, -1.0)
    return (wv * signs).astype(np.int64)


def negate_lattice(arr: np.ndarray, d: int) -> np.ndarray:
    """Index map n -> -n: reverse every lattice axis (the trailing d axes)."""
    sl = (Ellipsis,) + (slice(None, None, -1),) * d
    return arr[sl]
