import math

import pytest
from hypothesis import given, strategies as st

from hybrid_ug.game import (
    AIKind,
    GameParams,
    Level,
    PopulationConfig,
    Role,
    perceived_fair_fraction,
    proposer_payoffs,
    receiver_payoffs,
    ug_payoff,
)


class TestUgPayoff:
    def test_accepted_offer_splits_the_unit(self):
        assert ug_payoff(0.5, 0.5) == (0.5, 0.5)
        assert ug_payoff(0.7, 0.2) == pytest.approx((0.3, 0.7))

    def test_acceptance_at_equality(self):
        # A permissive receiver accepts an offer exactly at its threshold.
        assert ug_payoff(0.1, 0.1) == (0.9, 0.1)

    def test_rejected_offer_pays_nothing(self):
        assert ug_payoff(0.1, 0.5) == (0.0, 0.0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ug_payoff(1.5, 0.5)
        with pytest.raises(ValueError):
            ug_payoff(0.5, -0.1)


class TestParamValidation:
    def test_game_params_require_l_below_h(self):
        with pytest.raises(ValueError):
            GameParams(h=0.3, l=0.5)
        with pytest.raises(ValueError):
            GameParams(h=0.5, l=0.5)
        with pytest.raises(ValueError):
            GameParams(h=1.2, l=0.1)

    def test_population_bounds(self):
        with pytest.raises(ValueError):
            PopulationConfig(n_p=1)
        with pytest.raises(ValueError):
            PopulationConfig(m_r=-1)
        with pytest.raises(ValueError):
            PopulationConfig(beta=-0.5)

    def test_role_helpers(self):
        cfg = PopulationConfig(n_p=10, n_r=20, m_p=3, m_r=4)
        assert cfg.human_count(Role.PROPOSER) == 10
        assert cfg.human_count(Role.RECEIVER) == 20
        assert cfg.ai_count(Role.PROPOSER) == 3
        assert cfg.ai_count(Role.RECEIVER) == 4
        assert not cfg.discriminatory
        assert PopulationConfig(ai_kind=AIKind.DISCRIMINATORY).discriminatory


class TestProposerPayoffs:
    def test_fair_proposer_payoff_is_offer_complement(self):
        cfg = PopulationConfig()
        pi_hp, _ = proposer_payoffs(cfg, GameParams(), k_r=37)
        assert pi_hp == 0.5

    def test_low_proposer_paid_only_by_permissive_receivers(self):
        cfg = PopulationConfig()
        _, pi_lp = proposer_payoffs(cfg, GameParams(), k_r=50)
        assert pi_lp == pytest.approx(0.9 * 50 / 100)

    def test_ai_receivers_dilute_low_proposer(self):
        cfg = PopulationConfig(m_r=100)
        _, pi_lp = proposer_payoffs(cfg, GameParams(), k_r=0)
        assert pi_lp == pytest.approx(0.9 * 100 / 200)

    def test_k_r_out_of_range(self):
        with pytest.raises(ValueError):
            proposer_payoffs(PopulationConfig(), GameParams(), k_r=101)


class TestReceiverPayoffs:
    def test_samaritan_ai_proposers_pay_everyone_fairly(self):
        cfg = PopulationConfig(m_p=50)
        pi_hr, pi_lr = receiver_payoffs(cfg, GameParams(), k_p=0)
        assert pi_hr == pytest.approx(0.5 * 50 / 150)
        assert pi_lr == pytest.approx((0.5 * 50 + 0.1 * 100) / 150)

    def test_discriminatory_ai_pays_low_receivers_the_low_offer(self):
        cfg = PopulationConfig(m_p=50, ai_kind=AIKind.DISCRIMINATORY)
        pi_hr, pi_lr = receiver_payoffs(cfg, GameParams(), k_p=0)
        assert pi_hr == pytest.approx(0.5 * 50 / 150)
        assert pi_lr == pytest.approx(0.1 * 150 / 150)

    def test_no_ai_matches_plain_averages(self):
        cfg = PopulationConfig()
        pi_hr, pi_lr = receiver_payoffs(cfg, GameParams(), k_p=50)
        assert pi_hr == pytest.approx(0.25)
        assert pi_lr == pytest.approx(0.3)


class TestPerceivedFairFraction:
    def test_alpha_counts_high_threshold_receivers(self):
        cfg = PopulationConfig(m_r=100, ai_kind=AIKind.DISCRIMINATORY)
        assert perceived_fair_fraction(cfg, k_r=0) == pytest.approx(0.5)
        assert perceived_fair_fraction(cfg, k_r=100) == pytest.approx(1.0)

    def test_requires_discriminatory(self):
        with pytest.raises(ValueError):
            perceived_fair_fraction(PopulationConfig(), k_r=0)


@given(
    h=st.floats(0.05, 1.0),
    l_frac=st.floats(0.0, 0.99),
    k_p=st.integers(0, 50),
    k_r=st.integers(0, 50),
    m_p=st.integers(0, 50),
    m_r=st.integers(0, 50),
    disc=st.booleans(),
)
def test_average_payoffs_stay_in_unit_interval(h, l_frac, k_p, k_r, m_p, m_r, disc):
    game = GameParams(h=h, l=h * l_frac)
    cfg = PopulationConfig(
        n_p=50, n_r=50, m_p=m_p, m_r=m_r,
        ai_kind=AIKind.DISCRIMINATORY if disc else AIKind.SAMARITAN,
    )
    for value in proposer_payoffs(cfg, game, k_r) + receiver_payoffs(cfg, game, k_p):
        assert 0.0 <= value <= 1.0


@given(k_p=st.integers(0, 50), m_p=st.integers(0, 50))
def test_high_receiver_never_below_low_receiver(k_p, m_p):
    # The High receiver collects h from every proposer that the Low receiver
    # collects h from, and at least as much from the rest under Samaritan AI.
    cfg = PopulationConfig(n_p=50, n_r=50, m_p=m_p)
    pi_hr, pi_lr = receiver_payoffs(cfg, GameParams(), k_p)
    assert pi_hr >= pi_lr - 0.1 * (50 - k_p) / (50 + m_p) - 1e-12


def test_level_other():
    assert Level.HIGH.other is Level.LOW
    assert Level.LOW.other is Level.HIGH
