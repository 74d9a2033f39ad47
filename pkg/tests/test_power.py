import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratesplit import InvalidArgumentError
from ratesplit.power import (
    HrsPowerSplit,
    Regime,
    classify_interference_regime,
    common_rate_bound,
    exact_inner_gamma,
    hrs_gain_bounds,
    hrs_power_split,
    interference_gammas,
    rs_gain_bound,
    rs_power_split,
)
from ratesplit.rmt import LOG2E, hrs_asymptotics
from ratesplit.simulate import SplitOptions, grouped_system, hrs_analysis, rs_analysis


def _ttp(system, P, literal=True):
    covs = [m.matrix for m in system.group_models]
    return hrs_asymptotics(
        covs, system.outer, system.group_sizes, system.group_tau, P, literal_group_indices=literal
    )


class TestRsSplit:
    @given(
        ups=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6),
        psi=st.floats(0.01, 10.0),
        tau=st.floats(0.0, 1.0),
        P=st.floats(1e-3, 1e5),
    )
    def test_range_and_accounting(self, ups, psi, tau, P):
        s = rs_power_split(ups, psi, tau, P)
        assert 0 < s.t <= 1
        assert s.common_power + s.K * s.private_power == pytest.approx(P)
        if s.t < 1:
            # private power saturates at K / Gamma
            assert P * s.t == pytest.approx(s.K / s.gamma)

    @given(ups=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6), tau=st.floats(0.05, 1.0))
    def test_monotone_in_power(self, ups, tau):
        ts = [rs_power_split(ups, 1.0, tau, P).t for P in np.logspace(-2, 5, 30)]
        assert np.all(np.diff(ts) <= 1e-15)

    @given(ups=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6), P=st.floats(0.1, 1e5))
    def test_monotone_in_csit_error(self, ups, P):
        ts = [rs_power_split(ups, 1.0, tau, P).t for tau in np.linspace(0, 1, 21)]
        assert np.all(np.diff(ts) <= 1e-15)

    def test_perfect_csit_keeps_everything_private(self):
        assert rs_power_split([1.0, 2.0], 1.0, 0.0, 1e6).t == 1.0
        assert rs_power_split([1.0, 2.0], 1.0, [0.0, 0.5], 1e6).t == 1.0
        with pytest.raises(InvalidArgumentError):
            rs_power_split([1.0], 1.0, 0.1, 0.0)

    def test_bound_helpers(self, small_uniform):
        asym, split = rs_analysis(small_uniform, 10 ** 3.5)
        assert split.t < 1
        bound, active = rs_gain_bound(asym)
        assert active and asym.gain >= bound
        assert common_rate_bound(3.0) == pytest.approx(2.0 - LOG2E)
        low, _ = rs_analysis(small_uniform, 0.1)
        assert rs_gain_bound(low) == (0.0, False)

    def test_private_rate_loss_below_log2e(self, small_uniform):
        # at the closed-form split the private sum rate loses less than log2(e)
        for snr in (25, 30, 35, 40):
            asym, split = rs_analysis(small_uniform, 10 ** (snr / 10))
            assert split.t < 1
            loss = asym.rate_rzf_sum - asym.rate_private
            assert 0 <= loss < LOG2E


class TestClassification:
    def test_disjoint_groups_are_weak(self, disjoint_system):
        assert classify_interference_regime(_ttp(disjoint_system, 1000.0)) is Regime.WEAK

    def test_overlapping_groups(self, overlap_system):
        ttp = _ttp(overlap_system, 1000.0)
        assert classify_interference_regime(ttp, strong_rule="aggregate") is Regime.STRONG
        assert classify_interference_regime(ttp, strong_rule="all") is Regime.GENERAL
        with pytest.raises(InvalidArgumentError):
            classify_interference_regime(ttp, strong_rule="max")

    def test_single_group_is_weak(self):
        s = grouped_system(30, [3], np.pi / 4, 0.3, [10], [10], quadrature_points=64)
        assert classify_interference_regime(_ttp(s, 100.0)) is Regime.WEAK

    def test_threshold_extremes(self, overlap_system):
        ttp = _ttp(overlap_system, 1000.0)
        assert classify_interference_regime(ttp, weak_threshold=1e9) is Regime.WEAK


class TestHrsSplit:
    def test_weak_regime_formula(self, disjoint_system):
        P = 1000.0
        ttp = _ttp(disjoint_system, P)
        s = hrs_power_split(ttp, disjoint_system.group_tau, Regime.WEAK)
        assert s.beta == 1.0 and 0 < s.alpha < 1
        assert s.gamma_ig == pytest.approx(exact_inner_gamma(ttp, disjoint_system.group_tau))
        # private power per group saturates at Kbar / Gamma_IG
        assert P * s.alpha * s.beta == pytest.approx(3 / s.gamma_ig)

    def test_strong_regime_formula(self, overlap_system):
        P = 1000.0
        ttp = _ttp(overlap_system, P)
        s = hrs_power_split(ttp, overlap_system.group_tau, Regime.STRONG)
        assert s.alpha == 1.0
        assert s.beta == pytest.approx(min(12 / (P * s.gamma_og + 3), 1.0))
        assert s.beta < 1

    def test_general_regime_formula(self, overlap_system):
        P, mu = 1000.0, 0.8
        ttp = _ttp(overlap_system, P)
        s = hrs_power_split(ttp, overlap_system.group_tau, Regime.GENERAL, mu=mu)
        og, ig = s.gamma_og, s.gamma_ig
        alpha = min(mu * (P * og + 1) / (P * (og + (1 - mu) * ig) + 1), 1.0)
        assert s.alpha == pytest.approx(alpha)
        assert s.beta == pytest.approx(min(12 / (P * (og + alpha * ig)), 1.0))

    @pytest.mark.parametrize("regime", [Regime.WEAK, Regime.STRONG])
    def test_low_snr_keeps_full_private_power(self, disjoint_system, regime):
        s = hrs_power_split(_ttp(disjoint_system, 1e-3), disjoint_system.group_tau, regime)
        assert s.alpha == 1.0 and s.beta == 1.0

    def test_low_snr_general_alpha_tends_to_mu(self, disjoint_system):
        s = hrs_power_split(_ttp(disjoint_system, 1e-6), disjoint_system.group_tau, Regime.GENERAL)
        assert s.beta == 1.0
        assert s.alpha == pytest.approx(0.9, abs=1e-6)

    def test_perfect_csit_gives_no_inner_common(self):
        s = grouped_system(60, [2, 2], np.pi / 8, 0.0, [12, 12], [16, 16], quadrature_points=64)
        split = hrs_power_split(_ttp(s, 1e4), s.group_tau, Regime.WEAK)
        assert split.alpha == 1.0 and split.gamma_ig == 0.0

    def test_single_user_groups_need_no_inner_common(self):
        s = grouped_system(60, [1, 1], np.pi / 8, 0.4, [12, 12], [16, 16], quadrature_points=64)
        split = hrs_power_split(_ttp(s, 1e4), s.group_tau, Regime.WEAK)
        assert split.alpha == 1.0

    def test_zero_forcing_gamma_limit(self, disjoint_system):
        # the zero-forcing Gamma_IG never exceeds the exact one in magnitude order
        ttp = _ttp(disjoint_system, 1e5)
        og, ig = interference_gammas(ttp.effective_cov, ttp.group_sizes, disjoint_system.group_tau)
        assert og >= 0 and ig >= 0
        s = hrs_power_split(ttp, disjoint_system.group_tau, Regime.WEAK, inner_gamma="approx")
        assert s.gamma_ig == pytest.approx(ig)

    def test_argument_checks(self, disjoint_system):
        ttp = _ttp(disjoint_system, 10.0)
        with pytest.raises(InvalidArgumentError):
            hrs_power_split(ttp, 0.4, Regime.WEAK, mu=0.0)
        with pytest.raises(InvalidArgumentError):
            hrs_power_split(ttp, 0.4, Regime.WEAK, inner_gamma="zf")
        with pytest.raises(ValueError):
            hrs_power_split(ttp, 0.4, "medium")

    @given(
        alpha=st.floats(0.01, 1.0), beta=st.floats(0.01, 1.0), P=st.floats(0.1, 1e4),
        G=st.integers(1, 6), Kg=st.integers(1, 5),
    )
    def test_power_accounting(self, alpha, beta, P, G, Kg):
        s = HrsPowerSplit(alpha, beta, 0.0, 0.0, Regime.GENERAL, P, G * Kg, G)
        assert s.outer_power + G * s.inner_power + G * Kg * s.private_power == pytest.approx(P)


class TestRateLoss:
    def test_weak_regime_loss_below_groups_log2e(self, disjoint_system):
        asym, ttp, split = hrs_analysis(disjoint_system, 10 ** 3.5)
        assert split.regime is Regime.WEAK and split.alpha < 1
        loss = ttp.rate_ttp_sum - asym.rate_private
        assert 0 <= loss < 4 * LOG2E
        bound, active = hrs_gain_bounds(asym, Regime.WEAK)
        assert active and asym.gain >= bound

    def test_strong_regime_loss_below_log2e(self, overlap_system):
        asym, ttp, split = hrs_analysis(overlap_system, 10 ** 3.5)
        assert split.regime is Regime.STRONG and split.beta < 1
        loss = ttp.rate_ttp_sum - asym.rate_private
        assert 0 <= loss < LOG2E
        bound, active = hrs_gain_bounds(asym, Regime.STRONG)
        assert active and asym.gain >= bound

    def test_inactive_bounds(self, disjoint_system):
        ttp = _ttp(disjoint_system, 10.0)
        assert hrs_gain_bounds(ttp, Regime.WEAK) == (0.0, False)
        asym, _, _ = hrs_analysis(disjoint_system, 1e4, SplitOptions(), regime=Regime.GENERAL)
        if asym.alpha < 1 or asym.beta < 1:
            assert hrs_gain_bounds(asym, Regime.GENERAL) == (0.0, False)
