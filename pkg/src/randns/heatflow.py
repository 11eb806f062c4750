"""Free heat evolution, mixed-norm probes and Monte Carlo tail reports.

The heat semigroup acts diagonally (multiplier exp(-|n|^2 t)).  Probes
measure || t^gamma (-Lap)^{sigma/2} e^{t Lap} f || in L^q of time and L^p
of space on a geometric time grid; tails of the probe norm over the
randomization are estimated empirically with Wilson intervals and a
log-probability versus lambda^2 slope fit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fields import SpectralField, to_physical
from .grid import GridSpec, k_squared
from .randomize import MultiplierLaw, SeedSpec, randomize
from .spectral import gradient_coeffs, lp_norm, lp_norm_quadrature

_EVEN_P = (2, 4, 6, 8)


def heat_flow(f: SpectralField, t: float) -> SpectralField:
    """e^{t Lap} f: coefficient at n scaled by exp(-|n|^2 t); t >= 0."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return SpectralField(f.grid, f.coeffs * np.exp(-k_squared(f.grid) * t))


# ----------------------------------------------------------------------
# deterministic envelope constants (smoothing bounds of the linear flow)


@dataclass(frozen=True)
class HeatBoundReport:
    alpha: float
    k: int
    times: np.ndarray
    l2_values: np.ndarray
    linf_values: np.ndarray
    c2: float      # smallest constant for the (1 + t^{-(alpha+k)/2}) L^2 envelope
    c_inf: float   # smallest constant for the max{t^-1, t^-(k+alpha+d/2)}^{1/2} sup envelope
    data_norm: float


def geometric_times(t_min: float, t_max: float, points: int) -> np.ndarray:
    if points < 2 or t_min <= 0 or t_max <= t_min:
        raise ValueError("need t_max > t_min > 0 and at least two points")
    return np.geomspace(t_min, t_max, points)


def _grad_linf(coeff_stack: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Sup of the pointwise Frobenius norm; axis 0 batches, trailing d axes
    are the lattice, anything in between is tensor components."""
    points = grid.linf_points()
    phys = to_physical(coeff_stack, grid, points)
    mag_sq = np.sum(phys ** 2, axis=tuple(range(1, phys.ndim - grid.d)))
    return np.sqrt(np.max(mag_sq.reshape(mag_sq.shape[0], -1), axis=-1))


def deterministic_bound_check(f: SpectralField, alpha: float, k: int,
                              times: np.ndarray) -> HeatBoundReport:
    """Calibrate the smallest constants for the linear-flow envelopes.

    For each t on the grid computes ||grad^k e^{t Lap} f|| in L^2 and
    L^inf and divides by the envelopes (1 + t^{-(alpha+k)/2}) ||f||_{H^-alpha}
    and max{t^-1, t^-(k+alpha+d/2)}^{1/2} ||f||_{H^-alpha}.
    """
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("empty time grid")
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    grid = f.grid
    ksq = k_squared(grid)
    from .spectral import sobolev_norm
    data_norm = sobolev_norm(f, -alpha)

    energy = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    decay = np.exp(-2.0 * ksq[None] * times.reshape(-1, *([1] * grid.d)))
    weight = ksq ** k if k else np.ones_like(ksq)
    l2_vals = np.sqrt(np.sum(decay * (weight * energy)[None],
                             axis=tuple(range(1, grid.d + 1))))

    heat = np.exp(-ksq[None] * times.reshape(-1, *([1] * grid.d)))
    if k == 0:
        stack = f.coeffs[None] * heat[:, None]
    else:
        stack = gradient_coeffs(f)[None] * heat[:, None, None]
    linf_vals = _grad_linf(stack, grid)

    env2 = (1.0 + times ** (-0.5 * (alpha + k))) * data_norm
    env_inf = np.sqrt(np.maximum(times ** -1.0, times ** -(k + alpha + grid.d / 2.0))) * data_norm
    c2 = float(np.max(l2_vals / env2)) if data_norm > 0 else 0.0
    c_inf = float(np.max(linf_vals / env_inf)) if data_norm > 0 else 0.0
    return HeatBoundReport(alpha, k, times, l2_vals, linf_vals, c2, c_inf, data_norm)


@dataclass(frozen=True)
class HeatBoundStability:
    reports: tuple
    c2_values: tuple
    c_inf_values: tuple
    stable: bool   # constants move by less than 2x across refinements


def heat_bound_stability(f: SpectralField, alpha: float, k: int, t_min: float,
                         t_max: float, points: int, refinements: int = 2) -> HeatBoundStability:
    """Re-run the calibration on successively doubled time grids."""
    reports = []
    for level in range(refinements + 1):
        times = geometric_times(t_min, t_max, points * 2 ** level)
        reports.append(deterministic_bound_check(f, alpha, k, times))
    c2s = tuple(r.c2 for r in reports)
    cis = tuple(r.c_inf for r in reports)
    ok = all(math.isfinite(c) for c in c2s + cis)
    for seq in (c2s, cis):
        for a, b in zip(seq, seq[1:]):
            lo = min(a, b)
            if lo > 0 and max(a, b) / lo > 2.0:
                ok = False
    return HeatBoundStability(tuple(reports), c2s, cis, ok)


# ----------------------------------------------------------------------
# mixed space-time norms of the flow


@dataclass(frozen=True)
class NormProbeSpec:
    """Parameters of a || t^gamma (-Lap)^{sigma/2} e^{t Lap} . ||_{L^q_t L^p_x} probe.

    Admissibility (sigma + alpha - 2 gamma) q < 2 makes the continuum
    time integral converge at t -> 0; the geometric grid truncates at
    t_min and the omitted head is reported as a lower-bound defect.
    """

    sigma: float
    gamma: float
    p: float
    q: float
    T: float
    alpha: float
    t_min: float = 1e-6
    points: int = 400

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not (2 <= self.q <= self.p):
            raise ValueError(f"need 2 <= q <= p, got q={self.q}, p={self.p}")
        if self.T <= self.t_min or self.t_min <= 0:
            raise ValueError("need T > t_min > 0")
        if self.points < 8:
            raise ValueError("time grid needs at least 8 points")
        gap = (self.sigma + self.alpha - 2.0 * self.gamma) * self.q
        if gap >= 2.0:
            raise ValueError(
                f"inadmissible probe: (sigma + alpha - 2*gamma)*q = {gap:g} >= 2")

    def times(self) -> np.ndarray:
        return geometric_times(self.t_min, self.T, self.points)

    def refined(self, factor: int) -> "NormProbeSpec":
        return NormProbeSpec(self.sigma, self.gamma, self.p, self.q, self.T,
                             self.alpha, self.t_min, self.points * factor)


def _spatial_norms(f: SpectralField, probe: NormProbeSpec, times: np.ndarray,
                   chunk: int = 64) -> np.ndarray:
    """||(-Lap)^{sigma/2} e^{t Lap} f||_{L^p} on the time grid."""
    grid = f.grid
    ksq = k_squared(grid)
    mult = ksq ** (probe.sigma / 2.0) if probe.sigma > 0 else np.ones_like(ksq)
    if probe.sigma > 0:
        mult = np.where(ksq == 0, 0.0, mult)
    base = f.coeffs * mult
    exact = float(probe.p) in _EVEN_P and float(probe.p) == int(probe.p)
    p_int = int(probe.p) if exact else None
    points = grid.lp_points(p_int) if exact else grid.lp_points(4)

    out = np.empty(times.size)
    for start in range(0, times.size, chunk):
        ts = times[start:start + chunk]
        decay = np.exp(-ksq[None] * ts.reshape(-1, *([1] * grid.d)))
        stack = base[None] * decay[:, None]
        phys = to_physical(stack, grid, points)
        mag_sq = np.sum(phys ** 2, axis=1).reshape(ts.size, -1)
        out[start:start + chunk] = np.mean(mag_sq ** (probe.p / 2.0), axis=1) ** (1.0 / probe.p)
    return out


def _log_trapezoid(values: np.ndarray, times: np.ndarray) -> float:
    """integral of values dt via the trapezoid rule in log time."""
    u = np.log(times)
    return float(np.trapezoid(values * times, u))


@dataclass(frozen=True)
class MixedNormResult:
    value: float
    head_defect: float  # estimated contribution of (0, t_min], omitted
    probe: NormProbeSpec


def mixed_norm_detail(f: SpectralField, probe: NormProbeSpec) -> MixedNormResult:
    times = probe.times()
    norms = _spatial_norms(f, probe, times)
    integrand = times ** (probe.gamma * probe.q) * norms ** probe.q
    total = _log_trapezoid(integrand, times)
    # For band-limited data the spatial norm is continuous at t = 0, so
    # the missing head is close to N(t_min)^q * t_min^(1+gamma q)/(1+gamma q).
    head = norms[0] ** probe.q * probe.t_min ** (1.0 + probe.gamma * probe.q) \
        / (1.0 + probe.gamma * probe.q)
    return MixedNormResult(total ** (1.0 / probe.q), head ** (1.0 / probe.q), probe)


def mixed_norm(f: SpectralField, probe: NormProbeSpec) -> float:
    """( int_0^T t^{gamma q} ||(-Lap)^{sigma/2} e^{t Lap} f||_{L^p}^q dt )^{1/q}."""
    return mixed_norm_detail(f, probe).value


def tail_probes(d: int, alpha: float, gamma: float, T: float,
                t_min: float = 1e-6, points: int = 400) -> tuple:
    """The dimension-specific probe family whose summed norm drives the
    tail sets: L^4_t L^4_x in 2D; the three-term half-derivative family
    (L^2_t L^6_x and L^{8/3}_t L^{8/3}_x of the half derivative, plus
    L^8_t L^8_x of the flow itself) in 3D."""
    if d == 2:
        return (NormProbeSpec(0.0, gamma, 4, 4, T, alpha, t_min, points),)
    return (NormProbeSpec(0.5, gamma, 6, 2, T, alpha, t_min, points),
            NormProbeSpec(0.5, gamma, 8.0 / 3.0, 8.0 / 3.0, T, alpha, t_min, points),
            NormProbeSpec(0.0, gamma, 8, 8, T, alpha, t_min, points))


def probe_family_norm(f: SpectralField, probes) -> float:
    return float(sum(mixed_norm(f, probe) for probe in probes))


# ----------------------------------------------------------------------
# Monte Carlo exceedance


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need n > 0")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return center - half, center + half


@dataclass(frozen=True)
class ExceedanceReport:
    lambdas: np.ndarray
    p_hat: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    slope: float            # of log p_hat against lambda^2 (fit bins only)
    intercept: float
    r_squared: float
    n_samples: int
    norms: np.ndarray       # per-sample probe norms, sample order
    dyadic_class: np.ndarray  # per sample: smallest j >= 0 with norm <= 2^j
    fit_count: int          # bins entering the fit (>= 10 exceedances)

    def exceedance_counts(self) -> np.ndarray:
        return np.array([(self.norms >= lam).sum() for lam in self.lambdas])


def _fit_tail(lambdas: np.ndarray, counts: np.ndarray, n: int):
    eligible = counts >= 10
    if eligible.sum() < 2:
        return float("nan"), float("nan"), float("nan"), int(eligible.sum())
    x = lambdas[eligible] ** 2
    y = np.log(counts[eligible] / n)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2, int(eligible.sum())


def _dyadic_classes(norms: np.ndarray) -> np.ndarray:
    j = np.zeros(norms.size, dtype=np.int64)
    positive = norms > 1.0
    j[positive] = np.ceil(np.log2(norms[positive])).astype(np.int64)
    return j


def _sample_norms(f: SpectralField, law: MultiplierLaw, probes, seed: SeedSpec,
                  indices) -> list:
    return [probe_family_norm(randomize(f, law, seed.with_sample(i)), probes)
            for i in indices]


def monte_carlo_exceedance(f: SpectralField, law: MultiplierLaw, probes,
                           lambdas, n_samples: int, seed: SeedSpec,
                           workers: int = 1) -> ExceedanceReport:
    """Sample the randomized probe norm and report empirical tails.

    Per-sample values depend only on (seed, sample index), so the report
    is identical for any worker count; aggregation is in index order.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0 or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambda list must be nonempty and strictly increasing")
    if n_samples < 100:
        raise ValueError(f"need at least 100 samples, got {n_samples}")
    if not np.any(f.coeffs):
        raise ValueError("degenerate (identically zero) field")

    indices = list(range(n_samples))
    if workers <= 1:
        norms = np.array(_sample_norms(f, law, probes, seed, indices))
    else:
        chunks = [indices[i::workers] for i in range(workers)]
        results = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sample_norms, f, law, probes, seed, chunk)
                       for chunk in chunks]
            for chunk, fut in zip(chunks, futures):
                for i, value in zip(chunk, fut.result()):
                    results[i] = value
        norms = np.array([results[i] for i in indices])

    counts = np.array([(norms >= lam).sum() for lam in lambdas])
    intervals = [wilson_interval(int(c), n_samples) for c in counts]
    slope, intercept, r2, fit_count = _fit_tail(lambdas, counts, n_samples)
    return ExceedanceReport(
        lambdas=lambdas,
        p_hat=counts / n_samples,
        ci_lo=np.array([lo for lo, _ in intervals]),
        ci_hi=np.array([hi for _, hi in intervals]),
        slope=slope, intercept=intercept, r_squared=r2,
        n_samples=n_samples, norms=norms,
        dyadic_class=_dyadic_classes(norms), fit_count=fit_count)
