import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_ug.dynamics import (
    FixationQuery,
    fermi,
    fixation_probability,
    log_fixation_probability,
    transition_rates,
)
from hybrid_ug.game import AIKind, GameParams, Level, PopulationConfig, Role

from conftest import fixation_linear_solve, n12_panel


class TestFermi:
    def test_beta_zero_is_coin_flip(self):
        assert fermi(0.9, 0.1, 0.0) == 0.5

    def test_equal_payoffs_are_coin_flip(self):
        assert fermi(0.4, 0.4, 37.0) == 0.5

    def test_limits_under_strong_selection(self):
        assert fermi(0.0, 1.0, 1e6) == pytest.approx(1.0)
        assert fermi(1.0, 0.0, 1e6) == pytest.approx(0.0)

    def test_no_overflow_at_extreme_beta(self):
        value = fermi(0.0, 1.0, 1e9)
        assert math.isfinite(value) and 0.0 <= value <= 1.0

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            fermi(0.1, 0.2, -1.0)

    @given(
        a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0), beta=st.floats(0.0, 100.0)
    )
    def test_complementarity(self, a, b, beta):
        assert fermi(a, b, beta) + fermi(b, a, beta) == pytest.approx(1.0)


class TestTransitionRates:
    def test_bounds_checked(self):
        cfg = PopulationConfig()
        with pytest.raises(ValueError):
            transition_rates(Role.PROPOSER, 101, 0, cfg, GameParams())
        with pytest.raises(ValueError):
            transition_rates(Role.RECEIVER, 0, -1, cfg, GameParams())

    def test_rates_are_probabilities(self):
        cfg = PopulationConfig(m_p=5, m_r=3, beta=2.0)
        for k in (0, 1, 50, 99, 100):
            for role in Role:
                r = transition_rates(role, k, 40, cfg, GameParams())
                assert 0.0 <= r.t_plus <= 1.0
                assert 0.0 <= r.t_minus <= 1.0

    def test_boundary_absorption_without_ai(self):
        # Without committed agents the monomorphic ends are absorbing.
        cfg = PopulationConfig()
        r0 = transition_rates(Role.PROPOSER, 0, 50, cfg, GameParams())
        rn = transition_rates(Role.PROPOSER, 100, 50, cfg, GameParams())
        assert r0.t_plus == 0.0 and rn.t_minus == 0.0

    def test_ai_breaks_absorption_at_zero(self):
        cfg = PopulationConfig(m_p=1)
        r0 = transition_rates(Role.PROPOSER, 0, 50, cfg, GameParams())
        assert r0.t_plus > 0.0

    def test_discriminatory_alpha_weighting(self):
        # With all receivers permissive (k_r = 0, M_R = 0) the discriminatory
        # AI is never perceived as fair, so it cannot seed High proposers.
        cfg = PopulationConfig(m_p=10, ai_kind=AIKind.DISCRIMINATORY)
        r = transition_rates(Role.PROPOSER, 0, 0, cfg, GameParams())
        assert r.t_plus == 0.0
        # With all receivers demanding (k_r = N_R) it always is.
        r = transition_rates(Role.PROPOSER, 0, 100, cfg, GameParams())
        assert r.t_plus > 0.0


def _query(role, mutant, opp, cfg, game=GameParams()):
    return FixationQuery(
        role=role, mutant_level=mutant, opposing_state=opp, cfg=cfg, game=game
    )


class TestClosedForms:
    @pytest.mark.parametrize("n", [2, 12, 20, 100])
    def test_neutral_fixation_is_one_over_n(self, n):
        cfg = PopulationConfig(n_p=n, n_r=n, beta=0.0)
        for role in Role:
            for mutant in Level:
                for opp in Level:
                    rho = fixation_probability(_query(role, mutant, opp, cfg))
                    assert rho == pytest.approx(1.0 / n, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 12, 20, 100])
    def test_one_ai_neutral_edge_is_one_over_harmonic(self, n):
        # A single committed High receiver biases the ratio to j/(j+1), which
        # telescopes the fixation sum to the harmonic number H_N.
        h_n = sum(1.0 / i for i in range(1, n + 1))
        cfg = PopulationConfig(n_p=n, n_r=n, m_r=1, beta=0.0)
        rho = fixation_probability(_query(Role.RECEIVER, Level.HIGH, Level.HIGH, cfg))
        assert rho == pytest.approx(1.0 / h_n, abs=1e-12)

    def test_samaritan_receiver_edge_beta_independent_at_full_fair_proposers(self):
        # With every proposer fair, both receiver strategies earn h exactly,
        # so the Fermi factors cancel at any beta.
        values = []
        for beta in (0.0, 0.1, 1.0, 10.0, 100.0):
            cfg = PopulationConfig(m_r=1, beta=beta)
            values.append(
                fixation_probability(
                    _query(Role.RECEIVER, Level.HIGH, Level.HIGH, cfg)
                )
            )
        assert max(values) - min(values) < 1e-12


class TestLogForm:
    def test_exp_consistency(self):
        cfg = PopulationConfig(m_p=1, m_r=2, beta=1.5)
        q = _query(Role.PROPOSER, Level.HIGH, Level.LOW, cfg)
        assert fixation_probability(q) == pytest.approx(
            math.exp(log_fixation_probability(q)), rel=1e-15
        )

    def test_strong_selection_stays_resolved(self):
        # At beta = 100 this edge is deep in the underflow regime in linear
        # space; the log value must stay finite and negative.
        cfg = PopulationConfig(beta=100.0)
        log_rho = log_fixation_probability(
            _query(Role.PROPOSER, Level.HIGH, Level.LOW, cfg)
        )
        assert math.isfinite(log_rho)
        assert log_rho < -700.0

    def test_valid_configs_never_hit_undefined_ratios(self):
        # Interior transition rates are strictly positive for every valid
        # configuration (the Fermi factor is clamped, never 0), so the 0/0
        # guard must not trigger and log rho stays <= 0.
        cfg = PopulationConfig(m_p=5, ai_kind=AIKind.DISCRIMINATORY, beta=1.0)
        for mutant in Level:
            for opp in Level:
                value = log_fixation_probability(
                    _query(Role.PROPOSER, mutant, opp, cfg)
                )
                assert value <= 0.0


class TestLinearSolveOracle:
    def test_panel_agreement_to_1e10(self):
        for name, q in n12_panel():
            analytic = fixation_probability(q)
            solved = fixation_linear_solve(q)
            assert analytic == pytest.approx(solved, abs=1e-10), name

    @settings(max_examples=30, deadline=None)
    @given(
        m_p=st.integers(0, 3),
        m_r=st.integers(0, 3),
        beta=st.floats(0.0, 5.0),
        disc=st.booleans(),
        role=st.sampled_from(list(Role)),
        mutant=st.sampled_from(list(Level)),
        opp=st.sampled_from(list(Level)),
    )
    def test_random_small_configs_agree(self, m_p, m_r, beta, disc, role, mutant, opp):
        cfg = PopulationConfig(
            n_p=8, n_r=8, m_p=m_p, m_r=m_r, beta=beta,
            ai_kind=AIKind.DISCRIMINATORY if disc else AIKind.SAMARITAN,
        )
        q = _query(role, mutant, opp, cfg)
        assert fixation_probability(q) == pytest.approx(
            fixation_linear_solve(q), abs=1e-10
        )


@settings(max_examples=60, deadline=None)
@given(
    m_p=st.integers(0, 10),
    m_r=st.integers(0, 10),
    beta=st.floats(0.0, 100.0),
    disc=st.booleans(),
    role=st.sampled_from(list(Role)),
    mutant=st.sampled_from(list(Level)),
    opp=st.sampled_from(list(Level)),
)
def test_fixation_probability_is_a_probability(m_p, m_r, beta, disc, role, mutant, opp):
    cfg = PopulationConfig(
        n_p=20, n_r=20, m_p=m_p, m_r=m_r, beta=beta,
        ai_kind=AIKind.DISCRIMINATORY if disc else AIKind.SAMARITAN,
    )
    rho = fixation_probability(_query(role, mutant, opp, cfg))
    assert 0.0 <= rho <= 1.0
