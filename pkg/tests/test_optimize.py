import math

import numpy as np
import pytest

from bellsim import analytic
from bellsim.model import FeasibilityError
from bellsim.optimize import (
    ANALYTIC_BRACKET,
    BellResult,
    NoFeasiblePointError,
    SearchConfig,
    maximize_chsh,
    physical_bracket,
)

# Exhaustive-separable-maximization references for the ideal closed form
# (inner 1-D maxima over 1601-point grids for every outer angle pair).
EXACT_B = {1.0: 1.61824, 2.0: 1.92224, 3.0: 2.10485, 4.0: 2.18539, 6.0: 2.22904}


def ideal(r):
    return lambda a, b: analytic.corr_ideal(a, b, r)


class TestMaximizeChsh:
    def test_matches_exhaustive_reference(self):
        for r, ref in EXACT_B.items():
            result = maximize_chsh(ideal(r), SearchConfig())
            assert abs(result.b_max) == pytest.approx(ref, abs=2e-3)

    def test_deterministic_bit_for_bit(self):
        a = maximize_chsh(ideal(3.3), SearchConfig())
        b = maximize_chsh(ideal(3.3), SearchConfig())
        assert a == b

    def test_b_consistent_with_correlation_matrix(self):
        result = maximize_chsh(ideal(2.5), SearchConfig())
        (c_ab, c_ab2), (c_a2b, c_a2b2) = result.correlations
        assert result.b_max == pytest.approx(c_ab + c_a2b + c_ab2 - c_a2b2, abs=1e-9)

    def test_angles_reproduce_b(self):
        result = maximize_chsh(ideal(2.5), SearchConfig())
        assert analytic.chsh(ideal(2.5), result.angles) == pytest.approx(result.b_max, abs=1e-12)

    def test_monotone_in_squeezing(self):
        rs = np.arange(0.5, 4.01, 0.25)
        values = [abs(maximize_chsh(ideal(float(r)), SearchConfig()).b_max) for r in rs]
        diffs = np.diff(values)
        assert diffs.min() > -1e-4

    def test_never_exceeds_tsirelson(self):
        for r in (1.0, 3.0, 6.0):
            result = maximize_chsh(ideal(r), SearchConfig())
            assert abs(result.b_max) <= analytic.TSIRELSON + 1e-4

    def test_no_feasible_point_raises(self):
        def always_infeasible(a, b):
            raise FeasibilityError("nothing to see")
        with pytest.raises(NoFeasiblePointError):
            maximize_chsh(always_infeasible, SearchConfig())

    def test_infeasible_region_not_exploited(self):
        # the superseded closed form diverges near its denominator zeros;
        # the guard must keep the search away from the fake optimum
        result = maximize_chsh(
            lambda a, b: analytic.corr_ideal_printed(a, b, 3.0), SearchConfig())
        assert abs(result.b_max) <= 2.0 + 1e-6

    def test_extra_seeds_used(self):
        good = maximize_chsh(ideal(4.0), SearchConfig())
        seeded = maximize_chsh(
            ideal(4.0),
            SearchConfig(seeds=1, extra_seeds=(tuple(good.angles.as_tuple()),)))
        assert abs(seeded.b_max) >= abs(good.b_max) - 1e-6

    def test_evaluations_counted(self):
        result = maximize_chsh(ideal(1.0), SearchConfig(coarse_points=7, max_evaluations=800))
        assert result.evaluations >= 7 * 7


def test_argmax_invariance_under_displacement_rescaling():
    # with a power-of-two scale factor the search arithmetic rescales
    # exactly, so b_max must match bit-for-bit and angles double
    from bellsim.physical import PdfVariant, envelope_sigma, make_exact_evaluator
    sigma = envelope_sigma(1.0, PdfVariant.ENVELOPE_CORRECTED)
    results = {}
    for d in (1.0, 2.0):
        cfg = SearchConfig(bracket=physical_bracket(1.0, d, sigma), periodic=False,
                           seeds=3, max_evaluations=1200)
        results[d] = maximize_chsh(make_exact_evaluator(1.0, d, grid_points=201), cfg)
    assert results[2.0].b_max == pytest.approx(results[1.0].b_max, abs=1e-6)
    # the optimum is unique up to a global angle reflection, so compare
    # magnitudes of the scaled quadruples
    ref = sorted(abs(t) * 2.0 for t in results[1.0].angles.as_tuple())
    got = sorted(abs(t) for t in results[2.0].angles.as_tuple())
    for t1, t2 in zip(ref, got):
        assert t2 == pytest.approx(t1, abs=1e-6)


class TestPhysicalBracket:
    def test_narrow_for_wide_envelopes(self):
        wide = physical_bracket(3.3, 1.0, 19.2)
        narrow = physical_bracket(1.0, 1.0, 2.0)
        assert wide[1] < narrow[1]
        assert narrow == (-1.5, 1.5)

    def test_scales_with_displacement_scale(self):
        small = physical_bracket(3.3, 1.0, 19.2)
        big = physical_bracket(3.3, 4.0, 19.2)
        assert big[1] == pytest.approx(4.0 * small[1])


class TestWidening:
    def test_boundary_optimum_triggers_widening(self):
        # correlation peaked at |a|, |b| ~ 2, outside the initial bracket
        def corr(a, b):
            return math.exp(-((abs(a) - 2.0) ** 2 + (abs(b) - 2.0) ** 2))
        cfg = SearchConfig(bracket=(-1.0, 1.0), periodic=False, coarse_points=7)
        result = maximize_chsh(corr, cfg)
        angles = result.angles.as_tuple()
        assert max(abs(t) for t in angles) > 1.0
        assert abs(result.b_max) > 1.9


class TestSearchConfigValidation:
    def test_bad_coarse_points(self):
        with pytest.raises(ValueError):
            SearchConfig(coarse_points=2)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            SearchConfig(tol_b=0.0)
