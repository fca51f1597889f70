"""Statistical tests and analytic path functionals.

Two-sample Kolmogorov-Smirnov with the asymptotic tail series, chi-square
goodness of fit, exact occupation measures of piecewise-linear paths, and
the reciprocal time change linking an excursion to its width profile.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import chdtrc

from .errors import (
    EmptySampleError,
    LowExpectedCountError,
    NegativePathError,
)
from .paths import CadlagPath
from .reflect import sample_excursion
from .rng import RngState
from .paths import Theta, validate_theta

ALPHA = 0.01
KS_SERIES_TERMS = 100


@dataclass(eq=False)
class TestReport:
    """Outcome of one statistical check at significance ALPHA."""

    suite: str
    statistic: float
    p_value: float
    passed: bool
    n_samples: int
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        obj = {
            "suite": self.suite,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }
        obj.update(self.extra)
        return json.dumps(obj)


def kolmogorov_sf(t: float, terms: int = KS_SERIES_TERMS) -> float:
    """Asymptotic two-sided tail 2 sum (-1)^(k-1) exp(-2 k^2 t^2)."""
    if t <= 1e-8:
        return 1.0
    k = np.arange(1, terms + 1)
    val = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * (k * t) ** 2))
    return float(min(max(val, 0.0), 1.0))


def ks_two_sample(a, b, suite: str = "ks", seed: int | None = None) -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.abs(cdf_a - cdf_b).max())
    ne = a.size * b.size / (a.size + b.size)
    lam = (np.sqrt(ne) + 0.12 + 0.11 / np.sqrt(ne)) * d
    p = kolmogorov_sf(lam)
    return TestReport(suite=suite, statistic=d, p_value=p, passed=p > ALPHA,
                      n_samples=int(min(a.size, b.size)), seed=seed)


def chi_square_gof(counts, expected_probs, suite: str = "chi2",
                   seed: int | None = None) -> TestReport:
    """Pearson chi-square against fixed cell probabilities, dof = cells - 1."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if counts.shape != probs.shape or counts.ndim != 1:
        raise ValueError("counts and probabilities must be same-length vectors")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("expected probabilities must sum to 1")
    total = counts.sum()
    expected = total * probs
    if np.any(expected < 5.0):
        raise LowExpectedCountError(f"min expected count {expected.min():.2f} < 5")
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = counts.size - 1
    p = float(chdtrc(dof, stat))
    return TestReport(suite=suite, statistic=stat, p_value=p, passed=p > ALPHA,
                      n_samples=int(total), seed=seed,
                      extra={"dof": dof})


# ---------------------------------------------------------------------------
# Path functionals
# ---------------------------------------------------------------------------

def lamperti_time(x: CadlagPath, t0: float, t1: float) -> float:
    """Integral of ds / x(s) over [t0, t1], exact on linear segments.

    Returns +inf when the integrand is non-integrable there (the path
    touches zero with linear behavior); raises NegativePathError when the
    path goes below -1e-12 on the interval.
    """
    if t0 == t1:
        return 0.0
    sub = x if (t0, t1) == (x.t0, x.t1) else x.restrict(t0, t1)
    v0 = sub.right[:-1]
    v1 = sub.left[1:]
    dt = np.diff(sub.times)
    if min(v0.min(), v1.min(), sub.left[0], sub.right[-1]) < -1e-12:
        raise NegativePathError("path is negative on the integration interval")
    if np.any(v0 <= 0.0) or np.any(v1 <= 0.0):
        return float("inf")
    flat = v0 == v1
    out = np.empty_like(dt)
    out[flat] = dt[flat] / v0[flat]
    nf = ~flat
    out[nf] = dt[nf] * (np.log(v1[nf]) - np.log(v0[nf])) / (v1[nf] - v0[nf])
    return float(out.sum())


# Expected gap between a Brownian path's true extremum and its best grid
# point, in units of sqrt(grid step) (discrete-monitoring constant).
MONITORING_BETA = 0.5826


@dataclass(eq=False)
class TimeChangeProfile:
    """Running reciprocal integral of an excursion and its inverse.

    Interior segments use the exact logarithmic form; the two end segments
    that touch zero use a square-root local model (excursions leave zero
    like a square root, which the linear chord cannot integrate).
    """

    times: np.ndarray
    cum: np.ndarray
    seg_v0: np.ndarray
    seg_v1: np.ndarray

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    def value_at(self, y: float) -> float:
        """Excursion value at the inverse time change of y."""
        if y < 0:
            raise ValueError("y must be nonnegative")
        if y >= self.total:
            return 0.0
        j = int(np.searchsorted(self.cum, y, side="right")) - 1
        j = max(j, 0)
        rel = y - self.cum[j]
        v0, v1 = self.seg_v0[j], self.seg_v1[j]
        dt = self.times[j + 1] - self.times[j]
        if v0 == 0.0:  # square-root model from zero
            return float(rel * v1 ** 2 / (2.0 * dt))
        if v1 == 0.0:  # square-root model into zero
            remaining = self.cum[j + 1] - y
            return float(remaining * v0 ** 2 / (2.0 * dt))
        slope = (v1 - v0) / dt
        return float(v0 * np.exp(slope * rel)) if slope != 0.0 else float(v0)


def excursion_time_change(x: CadlagPath, shift: float = 0.0) -> TimeChangeProfile:
    """Per-segment running integral of ds / (x(s) + shift) for an excursion.

    A positive shift acts as a continuity correction for sampled paths whose
    origin was relocated to a grid minimum: the true infimum sits about
    MONITORING_BETA * sqrt(grid step) below the best grid point, and the
    reciprocal integral amplifies that gap logarithmically.
    """
    v0 = x.right[:-1] + shift
    v1 = x.left[1:] + shift
    dt = np.diff(x.times)
    if min(x.left.min(), x.right.min()) < -1e-12:
        raise NegativePathError("excursion must be nonnegative")
    v0 = np.where(v0 < 0.0, 0.0, v0)
    v1 = np.where(v1 < 0.0, 0.0, v1)
    contrib = np.empty_like(dt)
    both = (v0 > 0.0) & (v1 > 0.0)
    flat = both & (v0 == v1)
    slope = both & ~flat
    contrib[flat] = dt[flat] / v0[flat]
    contrib[slope] = dt[slope] * (np.log(v1[slope]) - np.log(v0[slope])) / (v1[slope] - v0[slope])
    z0 = (v0 == 0.0) & (v1 > 0.0)
    z1 = (v1 == 0.0) & (v0 > 0.0)
    contrib[z0] = 2.0 * dt[z0] / v1[z0]
    contrib[z1] = 2.0 * dt[z1] / v0[z1]
    dead = (v0 == 0.0) & (v1 == 0.0)
    contrib[dead] = np.inf
    if np.isinf(contrib).any():
        # zero-valued stretch inside the domain: truncate at its start
        first = int(np.argmax(np.isinf(contrib)))
        contrib = contrib[:first]
        times = x.times[: first + 1]
        v0, v1 = v0[:first], v1[:first]
    else:
        times = x.times
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    return TimeChangeProfile(times=times, cum=cum, seg_v0=v0, seg_v1=v1)


def time_changed_width(x: CadlagPath, y_grid) -> np.ndarray:
    """Excursion evaluated at the inverse reciprocal time change.

    The value at the first grid point reports the limit along the grid; past
    the total integral the width is 0 (the profile has run out of mass).
    """
    profile = excursion_time_change(x)
    return np.array([profile.value_at(float(y)) for y in np.asarray(y_grid, dtype=float)])


def time_in_band(x: CadlagPath, lo: float, hi: float) -> float:
    """Exact time the path spends with values in [lo, hi]."""
    v0 = x.right[:-1]
    v1 = x.left[1:]
    dt = np.diff(x.times)
    a = np.minimum(v0, v1)
    b = np.maximum(v0, v1)
    flat = a == b
    inside = flat & (a >= lo) & (a <= hi)
    out = np.where(inside, dt, 0.0)
    nf = ~flat
    overlap = np.clip(np.minimum(b, hi) - np.maximum(a, lo), 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(nf, overlap / (b - a), 0.0)
    return float((out + np.where(nf, frac * dt, 0.0)).sum())


@dataclass(eq=False)
class Histogram:
    """Level histogram: exact occupation time per band of fixed width."""

    edges: np.ndarray
    time_in_bin: np.ndarray

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def density(self) -> np.ndarray:
        return self.time_in_bin / self.bin_width

    @property
    def total_time(self) -> float:
        return float(self.time_in_bin.sum())


def occupation_density(x: CadlagPath, bin_width: float) -> Histogram:
    """Occupation histogram with analytic per-segment band times."""
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    v0 = x.right[:-1]
    v1 = x.left[1:]
    dt = np.diff(x.times)
    a = np.minimum(v0, v1)
    b = np.maximum(v0, v1)
    k_lo = int(np.floor(x.min_value() / bin_width))
    k_hi = int(np.floor(x.max_value() / bin_width)) + 1
    nbins = k_hi - k_lo + 1
    time = np.zeros(nbins)
    ka = np.floor(a / bin_width).astype(int) - k_lo
    kb = np.floor(b / bin_width).astype(int) - k_lo
    same = ka == kb
    np.add.at(time, ka[same], dt[same])
    cross = np.nonzero(~same)[0]
    for idx in cross:
        lo_band, hi_band = ka[idx], kb[idx]
        span = b[idx] - a[idx]
        for kk in range(lo_band, hi_band + 1):
            band_lo = (kk + k_lo) * bin_width
            band_hi = band_lo + bin_width
            ov = min(b[idx], band_hi) - max(a[idx], band_lo)
            if ov > 0.0:
                time[kk] += dt[idx] * ov / span
    edges = (np.arange(nbins + 1) + k_lo) * bin_width
    return Histogram(edges=edges, time_in_bin=time)


# ---------------------------------------------------------------------------
# Local-time identity check
# ---------------------------------------------------------------------------

def jeulin_check(m: int, n_samples: int, rng: RngState, u: float = 0.5,
                 band: float = 0.02) -> TestReport:
    """Distributional check at a fixed time-changed point of the excursion.

    Side A: half the occupation density of a sampled excursion at level u/2.
    Side B: an independent excursion evaluated at the inverse reciprocal
    time change of u.  Both populations follow one law; the report carries
    the two-sample comparison.  Both sides use the grid-minimum continuity
    correction (the relocated origin sits slightly above the true infimum).
    """
    brownian = validate_theta(1.0, ())
    eps = MONITORING_BETA / np.sqrt(m)
    level = u / 2.0 - eps
    side_a = np.empty(n_samples)
    side_b = np.empty(n_samples)
    for k in range(n_samples):
        exc = sample_excursion(brownian, m, rng.child(2 * k))
        occ = time_in_band(exc, level - band / 2.0, level + band / 2.0) / band
        side_a[k] = 0.5 * occ
        exc2 = sample_excursion(brownian, m, rng.child(2 * k + 1))
        side_b[k] = excursion_time_change(exc2, shift=eps).value_at(u)
    rep = ks_two_sample(side_a, side_b, suite="jeulin", seed=rng.seed)
    rep.extra.update({"u": u, "grid": m, "band": band, "shift": eps})
    return rep
