"""Evaluation machinery: approximation gaps, regret, redundancy, convergence checks.

Every expectation here is an exact sum over sufficient-statistic supports.
Statistics on 2xk tables decompose as a sum of per-group terms plus a term
in the total count, so expectations under product alternatives reduce to
one-dimensional sums against per-group binomials and their convolution.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, xlogy

from .evariables import (
    RIPR_GRID_SIZE,
    RIPR_MAX_ITER,
    RIPR_TOL,
    RiprSolution,
    log_w_pseudo0,
    point_alt_count_pmf,
    ripr_solve,
)
from .numerics import (
    NEG_INF,
    Pmf,
    binomial_pmf,
    kl_divergence,
    log_binomial_row,
    total_variation,
)
from .priors import (
    PriorSpec,
    PseudoDensity,
    induced_group_pmf,
    null_optimal_prior,
    pseudo_null_density,
)

WORKERS_ENV = "MAXENT_EVALUES_WORKERS"

# Worst-case search protocol: interior product grid.
WORST_CASE_BOUNDS = (0.02, 0.98)
WORST_CASE_STEP = 0.02


@dataclass(frozen=True)
class GapReport:
    """Gap between the exact and pseudo null priors, as a KL divergence."""

    r: float
    m: int
    k: int
    prior: str
    per_point: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RegretCurve:
    """Regret versus sample size, with a fitted logarithmic growth a*log m + b."""

    points: tuple[tuple[int, float], ...]
    fitted_a: float
    fitted_b: float
    residual: float
    p_alt: tuple[float, ...]

    def __post_init__(self):
        ms = [m for m, _ in self.points]
        if list(ms) != sorted(ms):
            raise ValueError("points must be sorted by m")


def _log_ratio_exact_vs_pseudo(specs, sizes, density) -> tuple[Pmf, np.ndarray]:
    """Exact null prior on the total count and its pointwise log-ratio to the
    pseudo-induced total-count law."""
    specs = list(specs)
    sizes = list(sizes)
    if len(specs) != len(sizes):
        raise ValueError("specs and sizes length mismatch")
    w0 = null_optimal_prior([induced_group_pmf(s, n) for s, n in zip(specs, sizes)])
    n = sum(sizes)
    log_pseudo = log_w_pseudo0(density, n, np.arange(n + 1))
    mask = w0.log_weights > NEG_INF
    if (np.asarray(log_pseudo)[mask] == NEG_INF).any():
        raise ValueError("density vanished where the exact prior has mass")
    with np.errstate(invalid="ignore"):
        ratio = w0.log_weights - log_pseudo
    ratio[~mask] = 0.0
    return w0, ratio


def gap_r(specs, sizes, density: PseudoDensity) -> GapReport:
    """KL divergence from the exact null prior to the pseudo null prior, on the
    total-count space. Equals the pseudo-minus-exact e-power difference."""
    w0, ratio = _log_ratio_exact_vs_pseudo(specs, sizes, density)
    r = float(np.dot(w0.weights(), ratio))
    specs = list(specs)
    return GapReport(
        r=r,
        m=max(sizes),
        k=len(specs),
        prior=";".join(s.describe() for s in specs),
        per_point=tuple(ratio),
    )


def gap_r_prime(p_alt, specs, sizes, density: PseudoDensity) -> float:
    """Expected exact-vs-pseudo log-ratio under a point alternative.

    Same integrand as gap_r but weighted by the exact total-count law of the
    point alternative instead of the Bayes marginal.
    """
    pvec = np.atleast_1d(np.asarray(p_alt, dtype=float))
    if pvec.size != len(list(sizes)):
        raise ValueError("p_alt length must match the number of groups")
    _, ratio = _log_ratio_exact_vs_pseudo(specs, sizes, density)
    law = point_alt_count_pmf(sizes, pvec)
    return float(np.dot(law.weights(), ratio))


def worst_case_r_prime(
    specs,
    sizes,
    density: PseudoDensity,
    grid_step: float = WORST_CASE_STEP,
    bounds: tuple[float, float] = WORST_CASE_BOUNDS,
) -> tuple[float, tuple[float, ...]]:
    """Maximum of gap_r_prime over an interior product grid of alternatives.

    Ties resolve to the lexicographically smallest grid point, so the result
    does not depend on evaluation order.
    """
    lo, hi = bounds
    if not 0 < lo < hi < 1:
        raise ValueError("bounds must satisfy 0 < lo < hi < 1")
    sizes = list(sizes)
    k = len(sizes)
    _, ratio = _log_ratio_exact_vs_pseudo(specs, sizes, density)
    axis = np.arange(lo, hi + grid_step / 2, grid_step)
    # Per-group binomial pmfs at every grid value, convolved incrementally
    # across groups; the full k-dimensional grid is swept in lexicographic
    # order with partial convolutions cached per prefix depth.
    best = -np.inf
    best_point: tuple[float, ...] = ()
    per_group = [
        [binomial_pmf(n, p).weights() for p in axis] for n in sizes
    ]

    def recurse(depth, conv, point):
        nonlocal best, best_point
        if depth == k:
            val = float(np.dot(conv, ratio))
            if val > best:
                best = val
                best_point = point
            return
        for p, w in zip(axis, per_group[depth]):
            recurse(depth + 1, np.convolve(conv, w), point + (float(p),))

    recurse(0, np.array([1.0]), ())
    return best, best_point


def _group_loglik_terms(n: int, p: float) -> np.ndarray:
    j = np.arange(n + 1)
    return xlogy(j, p) + xlogy(n - j, 1.0 - p)


def _candidate_h(kind, specs, sizes, density, solution, n,
                 grid_size, tol, max_iter) -> np.ndarray:
    """Total-count term of log S_cand, as a vector over c0 = 0..n.

    All candidate statistics share the per-group part log W_i(c1_i) minus
    the group multiplicity; they differ only in how the null mass at the
    total count is computed.
    """
    c0 = np.arange(n + 1)
    if kind == "gro_mic":
        w0 = null_optimal_prior([induced_group_pmf(s, m) for s, m in zip(specs, sizes)])
        return log_binomial_row(n) - w0.log_weights
    if kind == "pseudo":
        if density is None:
            raise ValueError("pseudo candidate requires a density")
        return log_binomial_row(n) - np.asarray(log_w_pseudo0(density, n, c0))
    if kind == "gro_can":
        if solution is None:
            w0 = null_optimal_prior(
                [induced_group_pmf(s, m) for s, m in zip(specs, sizes)]
            )
            solution = ripr_solve(w0, n, grid_size=grid_size, tol=tol, max_iter=max_iter)
        if not solution.converged:
            raise ValueError("refine solver")
        return -solution.log_marginal_count_pmf(n) + log_binomial_row(n)
    raise ValueError(f"unknown candidate kind {kind!r}")


def regret(
    p_alt,
    specs,
    sizes,
    candidate: str,
    density: PseudoDensity | None = None,
    solution: RiprSolution | None = None,
    point_solution: RiprSolution | None = None,
    grid_size: int = RIPR_GRID_SIZE,
    tol: float = RIPR_TOL,
    max_iter: int = RIPR_MAX_ITER,
) -> float:
    """Expected log-growth loss of a candidate statistic against the point GRO.

    candidate is one of "gro_mic", "gro_can", "pseudo". The expectation under
    the point alternative is exact: per-group terms sum against binomials and
    total-count terms against their convolution.
    """
    specs = list(specs)
    sizes = list(sizes)
    pvec = np.atleast_1d(np.asarray(p_alt, dtype=float))
    if pvec.size != len(sizes):
        raise ValueError("p_alt length must match the number of groups")
    n = sum(sizes)
    law = point_alt_count_pmf(sizes, pvec)
    if point_solution is None:
        point_solution = ripr_solve(law, n, grid_size=grid_size, tol=tol, max_iter=max_iter)
    if not point_solution.converged:
        raise ValueError("refine solver")
    # Per-group part of E[log S_point - log S_cand]: the point numerator
    # minus the shared Bayes-marginal numerator.
    group_part = 0.0
    for m, p, s in zip(sizes, pvec, specs):
        b = binomial_pmf(m, p)
        wi = induced_group_pmf(s, m)
        terms = _group_loglik_terms(m, p) + log_binomial_row(m) - wi.log_weights
        group_part += float(np.dot(b.weights(), terms))
    h_point = -point_solution.log_marginal_count_pmf(n) + log_binomial_row(n)
    h_cand = _candidate_h(
        candidate, specs, sizes, density, solution, n, grid_size, tol, max_iter
    )
    return group_part + float(np.dot(law.weights(), h_point - h_cand))


def redundancy(p_alt, specs, sizes) -> float:
    """Expected log-likelihood advantage of the point alternative over the
    Bayes marginal; sums per-group binomial-to-prior divergences."""
    specs = list(specs)
    sizes = list(sizes)
    pvec = np.atleast_1d(np.asarray(p_alt, dtype=float))
    if pvec.size != len(sizes):
        raise ValueError("p_alt length must match the number of groups")
    total = 0.0
    for m, p, s in zip(sizes, pvec, specs):
        b = binomial_pmf(m, p)
        wi = induced_group_pmf(s, m)
        total += kl_divergence(b, wi)
    return total


def fit_log_slope(points) -> tuple[float, float, float]:
    """Least squares of y against log m; returns (slope, intercept, rms residual)."""
    points = list(points)
    ms = np.array([float(m) for m, _ in points])
    ys = np.array([float(y) for _, y in points])
    if np.unique(ms).size < 3:
        raise ValueError("need at least 3 distinct m values")
    x = np.log(ms)
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def regret_curve(
    p_alt,
    spec: PriorSpec,
    ms,
    candidate: str = "gro_mic",
    grid_size: int = RIPR_GRID_SIZE,
    tol: float = RIPR_TOL,
    max_iter: int = RIPR_MAX_ITER,
    workers: int | None = None,
) -> RegretCurve:
    """Regret at a fixed alternative across balanced designs of size m per group."""
    pvec = tuple(float(p) for p in np.atleast_1d(np.asarray(p_alt, dtype=float)))
    ms = sorted(int(m) for m in ms)
    jobs = [
        (pvec, spec, m, candidate, grid_size, tol, max_iter) for m in ms
    ]
    values = _run_parallel(_regret_cell, jobs, workers)
    points = tuple(zip(ms, values))
    a, b, resid = fit_log_slope(points)
    return RegretCurve(points, a, b, resid, pvec)


def _regret_cell(job):
    p_alt, spec, m, candidate, grid_size, tol, max_iter = job
    k = len(p_alt)
    return regret(
        p_alt,
        [spec] * k,
        [m] * k,
        candidate,
        grid_size=grid_size,
        tol=tol,
        max_iter=max_iter,
    )


def theorem1_diagnostic(spec: PriorSpec, m: int, bins: int) -> float:
    """Total variation, over equal cells of [0, 1], between the normalized
    one-count law under the marginal and the prior it should converge to.

    NML is compared against Beta(1/2, 1/2) cell probabilities; a residual
    boundary discrepancy is expected and reported, not hidden.
    """
    if bins < 1:
        raise ValueError("bins must be positive")
    if bins > m + 1:
        raise ValueError("bins must not exceed m+1")
    pmf = induced_group_pmf(spec, m)
    j = np.arange(m + 1)
    cell = np.minimum((j * bins) // m, bins - 1)
    observed = np.bincount(cell, weights=pmf.weights(), minlength=bins)
    edges = np.linspace(0.0, 1.0, bins + 1)
    if spec.kind == "uniform":
        a, b = 1.0, 1.0
    elif spec.kind == "beta":
        a, b = spec.alpha, spec.beta
    elif spec.kind == "nml":
        a, b = 0.5, 0.5
    else:
        raise ValueError("spec has no density representation")
    cdf = betainc(a, b, edges)
    expected = np.diff(cdf)
    return 0.5 * float(np.abs(observed - expected).sum())


def gaussian_approx_tv(spec: PriorSpec, sizes) -> float:
    """TV distance between the exact prior convolution and its discrete
    Gaussian moment-matched approximation."""
    from .priors import discrete_gaussian_approx

    pmfs = [induced_group_pmf(spec, n) for n in sizes]
    exact = null_optimal_prior(pmfs)
    approx = discrete_gaussian_approx(pmfs)
    return total_variation(exact, approx)


@dataclass(frozen=True)
class SweepConfig:
    """Grid of (k, m) cells for one diagnostic under one prior family."""

    diagnostic: str  # "gap_r" | "gap_r_prime" | "worst_case_r_prime" | "theorem1" | "gaussian_tv"
    prior: PriorSpec
    cells: tuple[tuple[int, int], ...]
    scale: int = 10_000
    grid_size: int | None = 20_001
    p_alt: float | None = None
    bins: int = 20
    size_ratio: tuple[int, ...] | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.diagnostic not in (
            "gap_r",
            "gap_r_prime",
            "worst_case_r_prime",
            "theorem1",
            "gaussian_tv",
        ):
            raise ValueError(f"unknown diagnostic {self.diagnostic!r}")
        cells = tuple((int(k), int(m)) for k, m in self.cells)
        object.__setattr__(self, "cells", cells)
        for k, m in cells:
            if k < 1 or m < 1:
                raise ValueError(f"invalid cell ({k}, {m})")


def cells_m_fixed(k_values, m) -> tuple[tuple[int, int], ...]:
    return tuple((int(k), int(m)) for k in k_values)


def cells_n_fixed(k_values, n) -> tuple[tuple[int, int], ...]:
    cells = []
    for k in k_values:
        if n % k:
            raise ValueError(f"n={n} not divisible by k={k}")
        cells.append((int(k), n // int(k)))
    return tuple(cells)


def cells_power_law(k_values, coefficient, exponent) -> tuple[tuple[int, int], ...]:
    return tuple((int(k), int(round(coefficient * k**exponent))) for k in k_values)


def _cell_sizes(config: SweepConfig, k: int, m: int) -> list[int]:
    if config.size_ratio is None:
        return [m] * k
    if len(config.size_ratio) != k:
        raise ValueError("size_ratio length must match k")
    return [m * r for r in config.size_ratio]


def _sweep_cell(job):
    config, k, m = job
    sizes = _cell_sizes(config, k, m)
    specs = [config.prior] * k
    if config.diagnostic == "theorem1":
        return theorem1_diagnostic(config.prior, m, config.bins)
    if config.diagnostic == "gaussian_tv":
        return gaussian_approx_tv(config.prior, sizes)
    density = pseudo_null_density(
        specs, sizes, scale=config.scale, grid_size=config.grid_size
    )
    if config.diagnostic == "gap_r":
        return gap_r(specs, sizes, density).r
    if config.diagnostic == "gap_r_prime":
        if config.p_alt is None:
            raise ValueError("gap_r_prime sweep requires p_alt")
        return gap_r_prime([config.p_alt] * k, specs, sizes, density)
    return worst_case_r_prime(specs, sizes, density)[0]


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_parallel(fn, jobs, workers: int | None):
    count = min(_worker_count(workers), len(jobs))
    if count <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, jobs))


def sweep(config: SweepConfig) -> list[dict]:
    """Evaluate one diagnostic over every (k, m) cell.

    Cells run on a bounded worker pool; results are assembled in cell order,
    so output is identical for any worker count.
    """
    jobs = [(config, k, m) for k, m in config.cells]
    values = _run_parallel(_sweep_cell, jobs, config.workers)
    return [
        {"k": k, "m": m, "diagnostic": config.diagnostic, "value": v}
        for (k, m), v in zip(config.cells, values)
    ]
