"""Diagonal randomization with deterministic counter-based streams.

Each lattice site gets one real, mean-zero, unit-variance multiplier and
every Fourier coefficient of the datum is scaled by its site's draw.
Paired sites +-n share a draw so real fields stay real; independence
holds across the canonical half of the lattice and across samples.

Draws are a pure function of (master_seed, sample_index, canonical(n)):
a SplitMix64 mix chain produces 64 bits per site which feed either a
sign (Rademacher) or the inverse normal CDF (Gaussian).  No sequential
generator state exists, so lattice order, truncation radius and worker
scheduling cannot change any value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .fields import SpectralField
from .grid import GridSpec, canonical_coordinates

LAWS = ("gaussian", "rademacher")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class MultiplierLaw:
    """Unit-variance subgaussian multiplier family.

    Both laws satisfy E exp(gamma * l) <= exp(gamma^2 / 2): exactly for
    the standard Gaussian, via cosh(gamma) <= exp(gamma^2/2) for signs.
    """

    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind not in LAWS:
            raise ValueError(f"law must be one of {LAWS}, got {self.kind!r}")


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic stream address: (master seed, Monte Carlo sample index)."""

    master_seed: int
    sample_index: int = 0

    def __post_init__(self):
        if self.sample_index < 0:
            raise ValueError("sample_index must be >= 0")

    def with_sample(self, index: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, index)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = (x + _GOLDEN).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _zigzag(n: np.ndarray) -> np.ndarray:
    """Map signed ints to uint64 (0, -1, 1, -2, ... -> 0, 1, 2, 3, ...)."""
    n = n.astype(np.int64)
    return ((n << 1) ^ (n >> 63)).astype(np.uint64)


def _site_bits(seed: SeedSpec, codes: np.ndarray) -> np.ndarray:
    """64 hash bits per site; ``codes`` has shape (naxes, ...)."""
    with np.errstate(over="ignore"):
        h = _splitmix64(np.uint64(seed.master_seed & 0xFFFFFFFFFFFFFFFF))
        h = _splitmix64(h ^ (np.uint64(seed.sample_index) + _GOLDEN))
        bits = np.broadcast_to(h, codes.shape[1:]).copy()
        for axis_codes in codes:
            bits = _splitmix64(bits ^ (_zigzag(axis_codes) + _GOLDEN))
    return bits


def _bits_to_draws(bits: np.ndarray, law: MultiplierLaw) -> np.ndarray:
    if law.kind == "rademacher":
        return np.where(bits >> np.uint64(63), -1.0, 1.0)
    # 53-bit uniform strictly inside (0, 1), then the exact inverse CDF.
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def sample_multipliers(law: MultiplierLaw, seed: SeedSpec, grid: GridSpec) -> np.ndarray:
    """One real draw per site, shape (2M+1,)^d, with l(-n) = l(n).

    Values at a given n do not depend on the truncation radius, so a
    coarser lattice sees the restriction of a finer one's draws.
    """
    codes = canonical_coordinates(grid)
    return _bits_to_draws(_site_bits(seed, codes), law)


def sequence_multipliers(law: MultiplierLaw, seed: SeedSpec, count: int) -> np.ndarray:
    """Draws for an abstract index sequence r = 0, 1, ...; same stream
    machinery as the lattice sampler, one-axis addressing."""
    codes = np.arange(count, dtype=np.int64)[None, :]
    return _bits_to_draws(_site_bits(seed, codes), law)


def randomize(f: SpectralField, law: MultiplierLaw, seed: SeedSpec) -> SpectralField:
    """Scale every component's coefficient at n by the site draw l(n).

    Real multipliers shared within +-n pairs preserve Hermitian symmetry
    bitwise; diagonal scaling preserves mean zero and n . c(n) = 0.
    """
    mult = sample_multipliers(law, seed, f.grid)
    return SpectralField(f.grid, f.coeffs * mult)


# ----------------------------------------------------------------------
# empirical checks of the subgaussian hypotheses


@dataclass(frozen=True)
class MomentGrowthReport:
    q_values: tuple
    norms: tuple            # empirical || sum c_r l_r ||_{L^q}
    ratios: tuple           # norms / (sqrt(q) ||c||_2)
    std_errors: tuple       # delta-method standard error of each norm
    fitted_constant: float  # max ratio over the q grid
    passed: bool

    def __str__(self):
        rows = ", ".join(f"q={q:g}: {m:.4f} (C_q={r:.4f})"
                         for q, m, r in zip(self.q_values, self.norms, self.ratios))
        return f"MomentGrowth[C={self.fitted_constant:.4f}, {rows}]"


def moment_growth_check(coefficients, law: MultiplierLaw, q_values,
                        samples: int, seed: SeedSpec) -> MomentGrowthReport:
    """Estimate || sum_r c_r l_r ||_{L^q} and test the C sqrt(q) envelope.

    E (sum c_r l_r)^2 = ||c||_2^2 exactly for unit-variance independent
    draws, so C_2 = 1/sqrt(2) anchors the envelope; growth of C_q beyond
    that anchor (past sampling error) flags a law that is not subgaussian
    with the advertised constant.
    """
    c = np.asarray(coefficients, dtype=np.float64)
    if c.size == 0:
        raise ValueError("coefficient sequence is empty")
    q_values = tuple(float(q) for q in q_values)
    if any(q < 2 for q in q_values):
        raise ValueError("q grid must satisfy q >= 2")
    c_norm = float(np.linalg.norm(c))

    draws = np.empty((samples, c.size))
    for i in range(samples):
        draws[i] = sequence_multipliers(law, seed.with_sample(i), c.size)
    sums = draws @ c

    norms, ratios, errors = [], [], []
    for q in q_values:
        powers = np.abs(sums) ** q
        mean_q = float(np.mean(powers))
        se_mean = float(np.std(powers, ddof=1)) / np.sqrt(samples)
        norm_q = mean_q ** (1.0 / q)
        se_norm = se_mean * norm_q / (q * mean_q) if mean_q > 0 else 0.0
        norms.append(norm_q)
        ratios.append(norm_q / (np.sqrt(q) * c_norm))
        errors.append(se_norm)

    anchor = ratios[0] if q_values[0] == 2.0 else 1.0 / np.sqrt(2.0)
    passed = True
    for q, r, m, se in zip(q_values, ratios, norms, errors):
        slack = 4.0 * (se / m if m > 0 else 0.0) + 4.0 * (errors[0] / norms[0])
        if r > anchor * (1.0 + slack) + 1e-12:
            passed = False
    return MomentGrowthReport(q_values, tuple(norms), tuple(ratios),
                              tuple(errors), max(ratios), passed)


@dataclass(frozen=True)
class MgfReport:
    gammas: tuple
    empirical: tuple
    bound: tuple
    passed: bool


def mgf_bound_check(law: MultiplierLaw, gammas, samples: int, seed: SeedSpec,
                    slack_sigmas: float = 4.0) -> MgfReport:
    """Check E exp(gamma l) <= exp(gamma^2 / 2) empirically on a gamma grid."""
    draws = sequence_multipliers(law, seed, samples)
    gammas = tuple(float(g) for g in gammas)
    emp, bound = [], []
    ok = True
    for g in gammas:
        vals = np.exp(g * draws)
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1)) / np.sqrt(samples)
        limit = float(np.exp(0.5 * g * g))
        emp.append(mean)
        bound.append(limit)
        if mean > limit + slack_sigmas * se:
            ok = False
    return MgfReport(gammas, tuple(emp), tuple(bound), ok)
