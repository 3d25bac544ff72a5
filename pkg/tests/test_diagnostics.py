import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxent_evalues.diagnostics import (
    SweepConfig,
    cells_m_fixed,
    cells_n_fixed,
    cells_power_law,
    fit_log_slope,
    gap_r,
    gap_r_prime,
    gaussian_approx_tv,
    redundancy,
    regret,
    regret_curve,
    sweep,
    theorem1_diagnostic,
    worst_case_r_prime,
)
from maxent_evalues.evariables import e_power, log_e_gro_mic, log_e_pseudo
from maxent_evalues.models import Table
from maxent_evalues.numerics import binomial_pmf, kl_divergence
from maxent_evalues.priors import (
    PriorSpec,
    induced_group_pmf,
    pseudo_null_density,
)


def make_density(priors, sizes, scale=2000):
    return pseudo_null_density(priors, sizes, scale=scale, grid_size=20001)


class TestGapR:
    def test_nonnegative(self):
        priors = [PriorSpec.uniform()] * 2
        g = gap_r(priors, (8, 8), make_density(priors, (8, 8)))
        assert g.r >= -1e-10

    def test_equals_epower_difference(self):
        priors = [PriorSpec.from_beta(2, 2)] * 2
        sizes = (5, 5)
        density = make_density(priors, sizes)
        g = gap_r(priors, sizes, density)
        gp = [induced_group_pmf(s, n) for s, n in zip(priors, sizes)]
        mic = e_power(
            lambda ones: log_e_gro_mic(Table(tuple(zip(sizes, ones))), priors).log_e,
            gp,
        )
        pse = e_power(
            lambda ones: log_e_pseudo(
                Table(tuple(zip(sizes, ones))), priors, density
            ).log_e,
            gp,
        )
        assert g.r == pytest.approx(pse - mic, abs=1e-10)

    def test_decreases_with_m(self):
        priors = [PriorSpec.uniform()] * 2
        values = []
        for m in (10, 20, 40):
            sizes = (m, m)
            values.append(gap_r(priors, sizes, make_density(priors, sizes)).r)
        assert values[0] > values[1] > values[2]

    def test_report_metadata(self):
        priors = [PriorSpec.uniform(), PriorSpec.nml()]
        sizes = (4, 6)
        g = gap_r(priors, sizes, make_density(priors, sizes))
        assert g.k == 2
        assert g.m == 6
        assert "uniform" in g.prior and "nml" in g.prior
        assert len(g.per_point) == 11


class TestGapRPrime:
    def test_interior_value_decreases_with_m(self):
        priors = [PriorSpec.uniform()] * 2
        vals = []
        for m in (20, 80):
            sizes = (m, m)
            vals.append(
                gap_r_prime((0.5, 0.5), priors, sizes, make_density(priors, sizes))
            )
        assert vals[1] < vals[0]

    def test_arity(self):
        priors = [PriorSpec.uniform()] * 2
        with pytest.raises(ValueError):
            gap_r_prime((0.5,), priors, (4, 4), make_density(priors, (4, 4)))


class TestWorstCaseRPrime:
    def test_nonnegative_and_bounded_grid(self):
        priors = [PriorSpec.uniform()] * 2
        sizes = (10, 10)
        value, argmax = worst_case_r_prime(priors, sizes, make_density(priors, sizes))
        assert value >= 0
        assert all(0.02 <= p <= 0.98 for p in argmax)

    def test_dominates_interior_point(self):
        priors = [PriorSpec.uniform()] * 2
        sizes = (10, 10)
        density = make_density(priors, sizes)
        value, _ = worst_case_r_prime(priors, sizes, density)
        assert value >= gap_r_prime((0.5, 0.5), priors, sizes, density) - 1e-12

    def test_deterministic(self):
        priors = [PriorSpec.uniform()] * 2
        sizes = (6, 6)
        density = make_density(priors, sizes)
        a = worst_case_r_prime(priors, sizes, density, grid_step=0.1, bounds=(0.1, 0.9))
        b = worst_case_r_prime(priors, sizes, density, grid_step=0.1, bounds=(0.1, 0.9))
        assert a == b

    def test_bad_bounds(self):
        priors = [PriorSpec.uniform()] * 2
        with pytest.raises(ValueError):
            worst_case_r_prime(
                priors, (4, 4), make_density(priors, (4, 4)), bounds=(0.0, 0.9)
            )


class TestRegret:
    def test_point_gro_candidate_is_zero(self):
        # Regret of the point-GRO against itself: the gro_can candidate with
        # target equal to the point law reproduces it, so use the identity
        # path via matching solutions.
        p_alt = (0.3, 0.7)
        specs = [PriorSpec.from_beta(1.5, 1.5)] * 2
        value = regret(p_alt, specs, (30, 30), "gro_mic")
        assert value >= -1e-8

    def test_bounded_by_redundancy(self):
        p_alt = (0.3, 0.7)
        specs = [PriorSpec.from_beta(1.5, 1.5)] * 2
        for m in (20, 50):
            reg = regret(p_alt, specs, (m, m), "gro_mic")
            red = redundancy(p_alt, specs, (m, m))
            assert red - reg >= -1e-8

    def test_candidate_kinds(self):
        p_alt = (0.4, 0.6)
        specs = [PriorSpec.uniform()] * 2
        sizes = (15, 15)
        density = make_density(specs, sizes)
        r_mic = regret(p_alt, specs, sizes, "gro_mic")
        r_can = regret(p_alt, specs, sizes, "gro_can")
        r_pse = regret(p_alt, specs, sizes, "pseudo", density=density)
        # mic and pseudo share their numerator, so the regret difference is
        # exactly the pointwise gap r' at this alternative.
        assert r_mic - r_pse == pytest.approx(
            gap_r_prime(p_alt, specs, sizes, density), abs=1e-10
        )
        # The canonical statistic differs from mic only through the null
        # mass at the total count; under an interior alternative the two
        # regrets agree closely.
        assert abs(r_can - r_mic) < 0.01

    def test_pseudo_needs_density(self):
        with pytest.raises(ValueError, match="density"):
            regret((0.5, 0.5), [PriorSpec.uniform()] * 2, (5, 5), "pseudo")

    def test_unknown_candidate(self):
        with pytest.raises(ValueError, match="candidate"):
            regret((0.5, 0.5), [PriorSpec.uniform()] * 2, (5, 5), "other")


class TestRedundancy:
    def test_point_prior_zero(self):
        p = 0.35
        specs = [PriorSpec.explicit(binomial_pmf(8, p))] * 2
        assert redundancy((p, p), specs, (8, 8)) == pytest.approx(0.0, abs=1e-12)

    def test_is_sum_of_group_divergences(self):
        specs = [PriorSpec.uniform(), PriorSpec.from_beta(2, 2)]
        sizes = (6, 9)
        p_alt = (0.3, 0.8)
        expect = sum(
            kl_divergence(binomial_pmf(n, p), induced_group_pmf(s, n))
            for n, p, s in zip(sizes, p_alt, specs)
        )
        assert redundancy(p_alt, specs, sizes) == pytest.approx(expect, rel=1e-12)

    def test_bic_like_growth(self):
        # Redundancy grows like (d1/2) log m with d1 = 2 for k = 2.
        specs = [PriorSpec.from_beta(1, 1)] * 2
        points = [
            (m, redundancy((0.4, 0.6), specs, (m, m)))
            for m in (100, 200, 400, 800, 1600)
        ]
        a, _, _ = fit_log_slope(points)
        assert 0.75 <= a <= 1.25


class TestFitLogSlope:
    def test_exact_line(self):
        pts = [(m, 0.5 * math.log(m) + 1.0) for m in (10, 20, 40)]
        a, b, resid = fit_log_slope(pts)
        assert a == pytest.approx(0.5, abs=1e-12)
        assert b == pytest.approx(1.0, abs=1e-12)
        assert resid == pytest.approx(0.0, abs=1e-12)

    def test_constant(self):
        a, b, _ = fit_log_slope([(10, 3.0), (100, 3.0), (1000, 3.0)])
        assert a == pytest.approx(0.0, abs=1e-12)
        assert b == pytest.approx(3.0, abs=1e-12)

    def test_known_coefficients(self):
        pts = [(m, 2 * math.log(m) - 3) for m in (10, 100, 1000)]
        a, b, _ = fit_log_slope(pts)
        assert (a, b) == pytest.approx((2.0, -3.0), abs=1e-10)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            fit_log_slope([(10, 1.0), (10, 2.0), (10, 3.0)])


class TestRegretCurve:
    def test_curve_and_fit(self):
        curve = regret_curve(
            (0.4, 0.6), PriorSpec.from_beta(1.5, 1.5), (20, 40, 80), workers=1
        )
        assert [m for m, _ in curve.points] == [20, 40, 80]
        assert all(np.isfinite(v) for _, v in curve.points)
        assert np.isfinite(curve.fitted_a)


class TestTheorem1:
    def test_uniform_matches_aggregation_error(self):
        for m in (40, 200):
            tv = theorem1_diagnostic(PriorSpec.from_beta(1, 1), m, 20)
            assert tv <= 1 / (m + 1) + 1e-12

    def test_beta22_rate(self):
        tv50 = theorem1_diagnostic(PriorSpec.from_beta(2, 2), 50, 20)
        tv400 = theorem1_diagnostic(PriorSpec.from_beta(2, 2), 400, 20)
        assert tv400 < tv50

    def test_nml_interior_agreement_with_jeffreys(self):
        tv = theorem1_diagnostic(PriorSpec.nml(), 400, 20)
        assert tv < 0.05

    def test_bins_validation(self):
        with pytest.raises(ValueError):
            theorem1_diagnostic(PriorSpec.uniform(), 5, 7)
        with pytest.raises(ValueError):
            theorem1_diagnostic(PriorSpec.uniform(), 5, 0)

    def test_explicit_spec_rejected(self):
        spec = PriorSpec.explicit(binomial_pmf(5, 0.5))
        with pytest.raises(ValueError, match="density"):
            theorem1_diagnostic(spec, 5, 3)


class TestGaussianTv:
    def test_improves_with_k(self):
        tv5 = gaussian_approx_tv(PriorSpec.uniform(), [10] * 5)
        tv50 = gaussian_approx_tv(PriorSpec.uniform(), [10] * 50)
        assert tv50 < tv5


class TestSweep:
    def test_single_cell_matches_direct_call(self):
        priors = [PriorSpec.uniform()] * 2
        sizes = (10, 10)
        direct = gap_r(
            priors, sizes, pseudo_null_density(priors, sizes, scale=2000, grid_size=20001)
        ).r
        cfg = SweepConfig(
            "gap_r", PriorSpec.uniform(), ((2, 10),), scale=2000, workers=1
        )
        rows = sweep(cfg)
        assert rows[0]["value"] == pytest.approx(direct, abs=1e-15)

    def test_worker_count_invariance(self):
        cfg1 = SweepConfig(
            "theorem1", PriorSpec.from_beta(2, 2), ((1, 50), (1, 100), (1, 200)),
            workers=1,
        )
        cfg2 = SweepConfig(
            "theorem1", PriorSpec.from_beta(2, 2), ((1, 50), (1, 100), (1, 200)),
            workers=3,
        )
        assert sweep(cfg1) == sweep(cfg2)

    def test_unknown_diagnostic(self):
        with pytest.raises(ValueError, match="diagnostic"):
            SweepConfig("nonsense", PriorSpec.uniform(), ((2, 5),))

    def test_cell_helpers(self):
        assert cells_m_fixed((2, 4), 8) == ((2, 8), (4, 8))
        assert cells_n_fixed((2, 4), 16) == ((2, 8), (4, 4))
        with pytest.raises(ValueError):
            cells_n_fixed((3,), 16)
        assert cells_power_law((2, 3), 5, 2) == ((2, 20), (3, 45))

    def test_order_preserved(self):
        cfg = SweepConfig(
            "theorem1", PriorSpec.from_beta(2, 2), ((1, 100), (1, 50)), workers=2
        )
        rows = sweep(cfg)
        assert [r["m"] for r in rows] == [100, 50]
