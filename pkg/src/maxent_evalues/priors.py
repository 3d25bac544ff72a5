"""Group-level induced priors, the optimal null prior, and pseudo densities.

The optimal null prior is the convolution of the per-group induced pmfs; the
pseudo density is its high-resolution limit on the null mean-value space
p0 = n1/n, or (for beta priors) the direct continuous convolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .numerics import (
    GridDensity,
    Pmf,
    convolve_all,
    log_beta_fn,
    log_binomial_row,
    nml_log_normalizer,
)

# Resolution multipliers used throughout: the coarser one for r and sweep
# diagnostics, the finer one for r' evaluations.
DEFAULT_SCALE = 10_000
DEFAULT_SCALE_R_PRIME = 100_000

# Default resample target when a high-resolution density grid gets large.
DEFAULT_DENSITY_GRID = 20_001


@dataclass(frozen=True)
class PriorSpec:
    """Declarative prior on one group's mean-value parameter."""

    kind: str  # "uniform" | "beta" | "nml" | "explicit"
    alpha: float | None = None
    beta: float | None = None
    pmf: Pmf | None = None

    def __post_init__(self):
        if self.kind == "beta":
            if self.alpha is None or self.beta is None or self.alpha <= 0 or self.beta <= 0:
                raise ValueError("beta prior requires strictly positive parameters")
        elif self.kind == "explicit":
            if self.pmf is None:
                raise ValueError("explicit prior requires a pmf")
        elif self.kind not in ("uniform", "nml"):
            raise ValueError(f"unknown prior kind {self.kind!r}")

    @staticmethod
    def uniform() -> "PriorSpec":
        return PriorSpec("uniform")

    @staticmethod
    def from_beta(alpha: float, beta: float) -> "PriorSpec":
        return PriorSpec("beta", alpha=alpha, beta=beta)

    @staticmethod
    def nml() -> "PriorSpec":
        return PriorSpec("nml")

    @staticmethod
    def explicit(pmf: Pmf) -> "PriorSpec":
        return PriorSpec("explicit", pmf=pmf)

    def describe(self) -> str:
        if self.kind == "beta":
            return f"beta({self.alpha:g},{self.beta:g})"
        if self.kind == "explicit":
            return f"explicit[{self.pmf.support_size}]"
        return self.kind


@dataclass(frozen=True)
class PseudoDensity:
    """Continuous null prior on p0, with the route it was obtained by."""

    density: GridDensity
    source: str  # "high_resolution" | "direct_convolution"
    scale: int | None = None

    def __post_init__(self):
        if self.source not in ("high_resolution", "direct_convolution"):
            raise ValueError(f"unknown provenance {self.source!r}")


def induced_group_pmf(spec: PriorSpec, n: int) -> Pmf:
    """Distribution induced on one group's one-count by the alternative marginal."""
    if n < 1:
        raise ValueError("group size must be at least 1")
    if spec.kind == "uniform":
        return Pmf.uniform(n)
    if spec.kind == "beta":
        j = np.arange(n + 1)
        a, b = spec.alpha, spec.beta
        lw = (
            log_binomial_row(n)
            + gammaln(j + a)
            + gammaln(n - j + b)
            - gammaln(n + a + b)
            - log_beta_fn(a, b)
        )
        return Pmf.from_log_weights(lw)
    if spec.kind == "nml":
        j = np.arange(n + 1)
        lw = log_binomial_row(n) + xlogy(j, j / n) + xlogy(n - j, 1.0 - j / n)
        return Pmf(lw - nml_log_normalizer(n))
    if spec.kind == "explicit":
        if spec.pmf.support_size != n + 1:
            raise ValueError(f"explicit pmf support {spec.pmf.support_size} != n+1 = {n + 1}")
        return spec.pmf
    raise ValueError(f"unknown prior kind {spec.kind!r}")


def null_optimal_prior(group_pmfs) -> Pmf:
    """Optimal null prior: convolution of the per-group induced pmfs."""
    return convolve_all(group_pmfs)


def uniform_convolution_closed_form(sizes, n1: int) -> float:
    """Probability that k independent discrete uniforms on 0..n_i sum to n1.

    Inclusion-exclusion over the upper-bound constraints (stars and bars),
    exact in integer arithmetic; equal-size fast path.
    """
    sizes = list(sizes)
    k = len(sizes)
    if k == 0:
        raise ValueError("no groups")
    if k > 20:
        raise ValueError("use numeric convolution")
    total = sum(sizes)
    if not 0 <= n1 <= total:
        return 0.0
    denom = math.prod(m + 1 for m in sizes)
    if len(set(sizes)) == 1:
        m = sizes[0]
        count = sum(
            (-1) ** j * math.comb(k, j) * math.comb(n1 - j * (m + 1) + k - 1, k - 1)
            for j in range(n1 // (m + 1) + 1)
        )
        return count / denom
    count = 0
    for r in range(k + 1):
        for subset in itertools.combinations(sizes, r):
            rem = n1 - sum(m + 1 for m in subset)
            if rem < 0:
                continue
            count += (-1) ** r * math.comb(rem + k - 1, k - 1)
    return count / denom


def discrete_gaussian_approx(group_pmfs) -> Pmf:
    """Discrete Gaussian matching the summed means and variances of the groups."""
    group_pmfs = list(group_pmfs)
    if len(group_pmfs) < 2:
        raise ValueError("need at least 2 groups")
    mu = sum(p.mean() for p in group_pmfs)
    var = sum(p.variance() for p in group_pmfs)
    if var <= 0:
        raise ValueError("degenerate priors")
    n = sum(p.support_size - 1 for p in group_pmfs)
    j = np.arange(n + 1)
    return Pmf.from_log_weights(-((j - mu) ** 2) / (2 * var))


def _scalable(spec: PriorSpec) -> None:
    if spec.kind == "explicit":
        raise ValueError("no high-resolution extension for explicit priors")


def pseudo_null_density(
    specs,
    sizes,
    scale: int = DEFAULT_SCALE,
    grid_size: int | None = None,
) -> PseudoDensity:
    """High-resolution-limit density of the optimal null prior on p0 = n1/n.

    Each group's induced pmf is computed at size scale*n_i, the pmfs are
    convolved, the support is mapped onto [0, 1], and the result is
    normalized as a density. If grid_size is given, the density is resampled
    onto that many points. Beta priors with a parameter below 1 diverge at
    the boundary; their endpoint grid cells are dropped before renormalizing.
    """
    specs = list(specs)
    sizes = list(sizes)
    if len(specs) != len(sizes):
        raise ValueError("specs and sizes length mismatch")
    if scale < 10:
        raise ValueError("scale must be at least 10")
    for s in specs:
        _scalable(s)
    pmfs = [induced_group_pmf(s, scale * n) for s, n in zip(specs, sizes)]
    conv = convolve_all(pmfs)
    total = conv.support_size - 1
    grid = np.arange(conv.support_size) / total
    clip_boundary = any(
        s.kind == "beta" and (s.alpha < 1 or s.beta < 1) for s in specs
    )
    density = conv.weights() * total  # pmf / step
    if clip_boundary:
        grid = grid[1:-1]
        density = density[1:-1]
    gd = GridDensity.from_density(grid, density)
    if grid_size is not None and gd.grid.size > grid_size:
        gd = gd.resampled(grid_size)
    return PseudoDensity(gd, "high_resolution", scale=scale)


def direct_convolution_density(specs, grid_size: int = DEFAULT_DENSITY_GRID) -> PseudoDensity:
    """Continuous convolution of beta prior densities, rescaled to the 1/k average.

    Only defined for beta priors bounded on [0, 1] (all parameters >= 1).
    """
    specs = list(specs)
    if len(specs) < 2:
        raise ValueError("need at least 2 groups")
    norm = [PriorSpec.from_beta(1.0, 1.0) if s.kind == "uniform" else s for s in specs]
    for s in norm:
        if s.kind != "beta":
            raise ValueError("direct convolution requires beta priors")
        if s.alpha < 1 or s.beta < 1:
            raise ValueError("density unbounded at boundary")
    k = len(norm)
    x = np.linspace(0.0, 1.0, grid_size)
    h = x[1] - x[0]

    def beta_density(s):
        with np.errstate(divide="ignore"):
            ld = xlogy(s.alpha - 1, x) + xlogy(s.beta - 1, 1 - x) - log_beta_fn(s.alpha, s.beta)
        return np.exp(ld)

    acc = beta_density(norm[0])
    for s in norm[1:]:
        acc = np.convolve(acc, beta_density(s)) * h
    # acc samples the density of the sum on [0, k]; the density of the mean
    # is k * f_sum(k * p0), which lands back on the original grid points.
    idx = np.arange(grid_size) * k
    mean_density = k * acc[idx]
    gd = GridDensity.from_density(x, mean_density)
    return PseudoDensity(gd, "direct_convolution")
