"""Log-space primitives: stable reductions, special functions, pmf/density containers.

All probability mass is carried as natural logarithms; exact zero is the
float('-inf') sentinel, never a denormal. Operations here are pure and
re-entrant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaln, xlogy

NEG_INF = float("-inf")

# Normalization tolerance for Pmf (log-space) and GridDensity (trapezoid).
PMF_NORM_TOL = 1e-12
DENSITY_NORM_TOL = 1e-8

# Combined support above which convolution switches to FFT, and the relative
# level below which post-FFT round-off is clamped to zero.
FFT_THRESHOLD = 4096
FFT_CLAMP = 1e-15


def log_sum_exp(values) -> float:
    """log(sum(exp(values))) with max-shift; -inf iff all inputs are -inf."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("empty reduction")
    if np.isnan(arr).any():
        raise ValueError("NaN in log-space reduction")
    m = float(arr.max())
    if m == NEG_INF:
        return NEG_INF
    return m + float(np.log(np.exp(arr - m).sum()))


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) via log-gamma."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"invalid binomial ({n}, {k})")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_binomial_row(n: int) -> np.ndarray:
    """log C(n, k) for all k in 0..n."""
    if n < 0:
        raise ValueError(f"invalid binomial row n={n}")
    k = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def log_beta_fn(a: float, b: float) -> float:
    """log B(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta function requires positive arguments, got ({a}, {b})")
    return float(gammaln(a) + gammaln(b) - gammaln(a + b))


def nml_log_normalizer(n: int) -> float:
    """Log of the Bernoulli maximized-likelihood sum over all datasets of size n.

    Direct O(n) log-space summation of C(n,j) (j/n)^j (1-j/n)^(n-j) with the
    0^0 = 1 convention.
    """
    if n < 1:
        raise ValueError("normalizer undefined for n < 1")
    j = np.arange(n + 1)
    terms = log_binomial_row(n) + xlogy(j, j / n) + xlogy(n - j, 1.0 - j / n)
    return log_sum_exp(terms)


@dataclass(frozen=True)
class Pmf:
    """Normalized pmf on integer support 0..N, stored as log weights."""

    log_weights: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        object.__setattr__(self, "log_weights", lw)
        lw.setflags(write=False)
        if lw.ndim != 1 or lw.size == 0:
            raise ValueError("pmf needs a nonempty 1-D log-weight array")
        if np.isnan(lw).any():
            raise ValueError("NaN log weight")
        total = log_sum_exp(lw)
        if abs(total) > PMF_NORM_TOL:
            raise ValueError(f"pmf not normalized: log total {total}")
        if (lw > PMF_NORM_TOL).any():
            raise ValueError("pmf entry exceeds 1")

    @property
    def support_size(self) -> int:
        return self.log_weights.size

    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.support_size), self.weights()))

    def variance(self) -> float:
        w = self.weights()
        x = np.arange(self.support_size)
        mu = float(np.dot(x, w))
        return float(np.dot((x - mu) ** 2, w))

    @staticmethod
    def from_log_weights(log_weights) -> "Pmf":
        """Build a pmf from unnormalized log weights."""
        lw = np.asarray(log_weights, dtype=float)
        return Pmf(lw - log_sum_exp(lw))

    @staticmethod
    def from_weights(weights) -> "Pmf":
        w = np.asarray(weights, dtype=float)
        if (w < 0).any():
            raise ValueError("negative weight")
        with np.errstate(divide="ignore"):
            return Pmf.from_log_weights(np.log(w))

    @staticmethod
    def uniform(n: int) -> "Pmf":
        """Uniform pmf on 0..n."""
        return Pmf(np.full(n + 1, -np.log(n + 1)))

    @staticmethod
    def delta(i: int, n: int) -> "Pmf":
        """Point mass at i on support 0..n."""
        lw = np.full(n + 1, NEG_INF)
        lw[i] = 0.0
        return Pmf(lw)


def binomial_pmf(n: int, p: float) -> Pmf:
    """Binomial(n, p) on 0..n, boundary p handled with 0^0 = 1."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    j = np.arange(n + 1)
    lw = log_binomial_row(n) + xlogy(j, p) + xlogy(n - j, 1.0 - p)
    return Pmf.from_log_weights(lw)


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Convolution of two pmfs on [0 .. Na+Nb].

    Direct log-space summation for small supports; FFT on linear weights for
    large ones, with negative round-off clamped to zero and the result
    renormalized.
    """
    na, nb = a.support_size, b.support_size
    if na + nb - 1 > FFT_THRESHOLD:
        wa = np.exp(a.log_weights)
        wb = np.exp(b.log_weights)
        out = fftconvolve(wa, wb)
        out[out < FFT_CLAMP * out.max()] = 0.0
        return Pmf.from_weights(out)
    res = np.full(na + nb - 1, NEG_INF)
    la, lb = a.log_weights, b.log_weights
    if na > nb:
        la, lb = lb, la
        na, nb = nb, na
    for i in range(na):
        if la[i] == NEG_INF:
            continue
        np.logaddexp(res[i : i + nb], la[i] + lb, out=res[i : i + nb])
    return Pmf.from_log_weights(res)


def convolve_all(pmfs) -> Pmf:
    """Left-fold convolution of a sequence of pmfs, in the given order."""
    pmfs = list(pmfs)
    if not pmfs:
        raise ValueError("empty reduction")
    acc = pmfs[0]
    for p in pmfs[1:]:
        acc = convolve(acc, p)
    return acc


def kl_divergence(p: Pmf, q: Pmf) -> float:
    """KL(p || q) in nats; requires p absolutely continuous w.r.t. q."""
    if p.support_size != q.support_size:
        raise ValueError("KL undefined: support mismatch")
    lp, lq = p.log_weights, q.log_weights
    mask = lp > NEG_INF
    if (lq[mask] == NEG_INF).any():
        raise ValueError("KL undefined: q vanishes where p does not")
    return float(np.dot(np.exp(lp[mask]), lp[mask] - lq[mask]))


def total_variation(p: Pmf, q: Pmf) -> float:
    """Total variation distance, in [0, 1]."""
    if p.support_size != q.support_size:
        raise ValueError("support mismatch")
    return 0.5 * float(np.abs(p.weights() - q.weights()).sum())


@dataclass(frozen=True)
class GridDensity:
    """Nonnegative density on a uniform grid inside [0, 1], trapezoid-normalized."""

    grid: np.ndarray
    log_density: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        ld = np.asarray(self.log_density, dtype=float)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "log_density", ld)
        g.setflags(write=False)
        ld.setflags(write=False)
        if g.ndim != 1 or g.size < 2 or g.shape != ld.shape:
            raise ValueError("grid and log_density must be matching 1-D arrays")
        steps = np.diff(g)
        if (steps <= 0).any():
            raise ValueError("grid must be strictly increasing")
        # Floor of a few ulps: rounding of x/total makes adjacent steps
        # differ by up to one ulp of 1.0 regardless of the step size.
        if abs(steps.max() - steps.min()) > max(1e-9 * steps.mean(), 4e-16):
            raise ValueError("grid must be uniform")
        if g[0] < -1e-12 or g[-1] > 1 + 1e-12:
            raise ValueError("grid must lie inside [0, 1]")
        if np.isnan(ld).any():
            raise ValueError("NaN log density")
        integral = np.trapezoid(np.exp(ld), g)
        if abs(integral - 1.0) > DENSITY_NORM_TOL:
            raise ValueError(f"density not normalized: trapezoid integral {integral}")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    @staticmethod
    def from_density(grid, density) -> "GridDensity":
        """Build a density from nonnegative samples, normalizing the trapezoid integral."""
        g = np.asarray(grid, dtype=float)
        d = np.asarray(density, dtype=float)
        if (d < 0).any():
            raise ValueError("negative density value")
        integral = np.trapezoid(d, g)
        if integral <= 0:
            raise ValueError("density integrates to zero")
        with np.errstate(divide="ignore"):
            return GridDensity(g, np.log(d / integral))

    def resampled(self, grid_size: int) -> "GridDensity":
        """Linear-interpolation resample onto a grid_size-point grid over the same span."""
        if grid_size < 2:
            raise ValueError("grid_size must be at least 2")
        g = np.linspace(self.grid[0], self.grid[-1], grid_size)
        d = np.interp(g, self.grid, self.density())
        return GridDensity.from_density(g, d)


def trapezoid_log_weights(density: GridDensity) -> np.ndarray:
    """Log trapezoid quadrature weights for the density's grid."""
    lw = np.full(density.grid.size, np.log(density.step))
    lw[0] -= np.log(2.0)
    lw[-1] -= np.log(2.0)
    return lw
