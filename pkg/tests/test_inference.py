import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as st_sp

from citest.errors import DomainError, InsufficientData
from citest.inference import (
    WILCOXON_EXACT_LIMIT,
    PairedResiduals,
    by_adjust,
    paired_residuals,
    t_test_one_sided,
    wilcoxon_one_sided,
)
from citest.losses import Absolute, Squared

from oracles import by_step_up, wilcoxon_enumerate


def residuals_from(diffs):
    d = np.asarray(diffs, dtype=np.float64)
    if d.size < 2:
        return PairedResiduals(d, 0.0, 0.0, Squared())
    return PairedResiduals(d, float(np.mean(d)), float(np.std(d, ddof=1)), Squared())


class TestPairedResiduals:
    def test_difference_orientation(self):
        r = paired_residuals(Absolute(), [2.0, 2.0], [1.0, 1.0], [0.0, 0.0])
        # baseline loses by 1 on each row, so the diffs are positive
        np.testing.assert_allclose(r.diffs, [1.0, 1.0])

    def test_sample_stddev_divisor(self):
        r = paired_residuals(Squared(), [1.0, 2.0], [0.0, 0.0], [0.0, 0.0])
        assert r.stddev == pytest.approx(np.std([1.0, 4.0], ddof=1))

    def test_single_row_rejected(self):
        with pytest.raises(InsufficientData):
            paired_residuals(Squared(), [1.0], [0.0], [0.0])


class TestTTest:
    def test_frozen_example(self):
        r = residuals_from([1.0, 2.0, 3.0])
        t = r.mean * np.sqrt(3) / r.stddev
        assert t == pytest.approx(2.0 * np.sqrt(3.0))
        assert t_test_one_sided(r) == pytest.approx(0.03708995, abs=1e-6)

    def test_balanced_pair_is_half(self):
        assert t_test_one_sided(residuals_from([-1.0, 1.0])) == pytest.approx(0.5)

    def test_degenerate_zero_spread(self):
        assert t_test_one_sided(residuals_from([0.0, 0.0, 0.0])) == 1.0
        assert t_test_one_sided(residuals_from([2.0, 2.0])) == 0.0
        assert t_test_one_sided(residuals_from([-2.0, -2.0])) == 1.0

    def test_matches_scipy_on_random_draws(self, rng):
        for _ in range(25):
            d = rng.normal(0.3, 1.0, size=rng.integers(4, 30))
            expected = st_sp.ttest_1samp(d, 0.0, alternative="greater").pvalue
            assert t_test_one_sided(residuals_from(d)) == pytest.approx(expected)

    def test_too_short(self):
        with pytest.raises(InsufficientData):
            t_test_one_sided(residuals_from([1.0]))


class TestWilcoxon:
    def test_frozen_all_positive(self):
        assert wilcoxon_one_sided(residuals_from([1.0, 2.0, 3.0])) == pytest.approx(
            1.0 / 8.0
        )

    def test_frozen_all_negative(self):
        assert wilcoxon_one_sided(residuals_from([-1.0, -2.0, -3.0])) == 1.0

    def test_all_zero_diffs_carry_no_evidence(self):
        assert wilcoxon_one_sided(residuals_from([0.0, 0.0, 0.0])) == 1.0

    def test_zeros_are_dropped(self):
        with_zeros = residuals_from([0.0, 1.0, 2.0, 3.0, 0.0])
        assert wilcoxon_one_sided(with_zeros) == pytest.approx(1.0 / 8.0)

    def test_exact_matches_enumeration_with_ties(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            mags = rng.integers(1, 4, size=n).astype(float)
            signs = rng.choice([-1.0, 1.0], size=n)
            d = mags * signs
            assert wilcoxon_one_sided(residuals_from(d)) == pytest.approx(
                wilcoxon_enumerate(d), abs=1e-12
            )

    def test_matches_scipy_exact(self, rng):
        for _ in range(20):
            d = rng.normal(size=12)
            expected = st_sp.wilcoxon(d, alternative="greater", mode="exact").pvalue
            assert wilcoxon_one_sided(residuals_from(d)) == pytest.approx(expected)

    def test_normal_approximation_beyond_limit(self, rng):
        d = rng.normal(0.4, 1.0, size=WILCOXON_EXACT_LIMIT + 15)
        p = wilcoxon_one_sided(residuals_from(d))
        expected = st_sp.wilcoxon(
            d, alternative="greater", mode="approx", correction=True
        ).pvalue
        assert p == pytest.approx(expected, rel=1e-6)

    def test_too_short(self):
        with pytest.raises(InsufficientData):
            wilcoxon_one_sided(residuals_from([1.0]))


class TestByAdjust:
    def test_frozen_example(self):
        res = by_adjust([0.001, 0.010, 0.04, 0.5], 0.05)
        assert res.c_m == pytest.approx(25.0 / 12.0)
        np.testing.assert_array_equal(res.rejected, [True, True, False, False])
        # the step-up threshold for i = 2 is (2/4) * 0.05 / c_4 = 0.012
        assert res.adjusted[1] <= 0.05 < res.adjusted[2]

    def test_adjusted_reproduce_step_up_at_any_alpha(self, rng):
        for _ in range(60):
            m = int(rng.integers(1, 12))
            p = rng.uniform(size=m) ** rng.uniform(0.5, 3.0)
            for alpha in (0.01, 0.05, 0.2):
                res = by_adjust(p, alpha)
                np.testing.assert_array_equal(
                    res.rejected, by_step_up(p, alpha), err_msg=f"p={p}"
                )

    def test_adjusted_monotone_in_raw_order(self, rng):
        p = np.sort(rng.uniform(size=8))
        adj = by_adjust(p, 0.05).adjusted
        assert np.all(np.diff(adj) >= -1e-15)

    def test_clipped_at_one(self):
        assert by_adjust([0.9, 0.95, 1.0], 0.05).adjusted.max() == 1.0

    def test_single_hypothesis_is_unadjusted(self):
        res = by_adjust([0.03], 0.05)
        assert res.adjusted[0] == pytest.approx(0.03)
        assert res.rejected[0]

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            by_adjust([], 0.05)
        with pytest.raises(DomainError):
            by_adjust([0.5, 1.5], 0.05)
        with pytest.raises(DomainError):
            by_adjust([0.5], 0.0)

    @settings(max_examples=80, deadline=None)
    @given(
        st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10),
        st.sampled_from([0.01, 0.05, 0.1, 0.25]),
    )
    def test_step_up_equivalence_property(self, p, alpha):
        res = by_adjust(p, alpha)
        np.testing.assert_array_equal(res.rejected, by_step_up(p, alpha))
