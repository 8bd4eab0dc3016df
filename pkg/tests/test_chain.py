"""Enumerated-chain oracle: normalisation, structure, and closed-form ties."""

import pytest

from dcf80211.chain import stationary_chain_oracle
from dcf80211.params import AccessMode, MacParams
from dcf80211.analytic import tau_two_way, tau_four_way


GRID = (0.05, 0.25, 0.45, 0.65, 0.85)


class TestOracleStructure:
    def test_pmf_normalised(self):
        mac = MacParams(w_min=8, max_stage=3)
        for mode in AccessMode:
            _, pmf = stationary_chain_oracle(mac, mode, 0.3, 0.1)
            assert sum(pmf.values()) == pytest.approx(1.0, abs=1e-12)
            assert all(p >= -1e-15 for p in pmf.values())

    def test_degenerate_failure_free_two_way(self):
        mac = MacParams(w_min=16, max_stage=4)
        tau, pmf = stationary_chain_oracle(mac, AccessMode.TWO_WAY, 0.0, 0.0)
        assert tau == pytest.approx(2.0 / (mac.w_min + 1.0), abs=1e-12)
        # All probability mass sits in stage 0.
        stage_mass = sum(p for (i, _k), p in pmf.items() if i > 0)
        assert stage_mass == pytest.approx(0.0, abs=1e-12)

    def test_attempt_state_geometric_progression(self):
        # b_{i,0} = p_eq^i b_{0,0} for i < m and b_{m,0} = p_eq^m/(1-p_eq) b_{0,0}.
        mac = MacParams(w_min=8, max_stage=3)
        p_col, p_e = 0.3, 0.2
        p_eq = p_col + p_e - p_col * p_e
        for mode in AccessMode:
            _, pmf = stationary_chain_oracle(mac, mode, p_col, p_e)
            b00 = pmf[(0, 0)]
            for i in range(1, mac.max_stage):
                assert pmf[(i, 0)] == pytest.approx(p_eq**i * b00, rel=1e-10)
            expected_last = p_eq**mac.max_stage / (1.0 - p_eq) * b00
            assert pmf[(mac.max_stage, 0)] == pytest.approx(expected_last, rel=1e-10)

    def test_four_way_transmit_state_mass(self):
        # b_{i,-1} = (1 - p_col) b_{i,0}: a contention win moves the station
        # into the data-transmit state.
        mac = MacParams(w_min=8, max_stage=3)
        p_col, p_e = 0.4, 0.1
        _, pmf = stationary_chain_oracle(mac, AccessMode.FOUR_WAY, p_col, p_e)
        for i in range(mac.max_stage + 1):
            assert pmf[(i, -1)] == pytest.approx((1.0 - p_col) * pmf[(i, 0)], rel=1e-10)

    def test_refuses_oversized_chain(self):
        with pytest.raises(ValueError):
            stationary_chain_oracle(MacParams(w_min=1024, max_stage=8),
                                    AccessMode.TWO_WAY, 0.1, 0.1)

    def test_rejects_invalid_probabilities(self):
        with pytest.raises(ValueError):
            stationary_chain_oracle(MacParams(), AccessMode.TWO_WAY, -0.1, 0.0)
        with pytest.raises(ValueError):
            stationary_chain_oracle(MacParams(), AccessMode.TWO_WAY, 0.0, 1.5)


class TestClosedFormEquivalence:
    @pytest.mark.parametrize("w_min,max_stage", [(4, 2), (8, 3), (16, 4)])
    def test_two_way_matches_oracle(self, w_min, max_stage):
        mac = MacParams(w_min=w_min, max_stage=max_stage)
        for p_col in GRID:
            for p_e in GRID:
                p_eq = p_col + p_e - p_col * p_e
                oracle_tau, _ = stationary_chain_oracle(mac, AccessMode.TWO_WAY, p_col, p_e)
                assert tau_two_way(p_eq, mac) == pytest.approx(oracle_tau, abs=1e-8)

    @pytest.mark.parametrize("w_min,max_stage", [(4, 2), (8, 3), (16, 4)])
    def test_four_way_matches_oracle(self, w_min, max_stage):
        mac = MacParams(w_min=w_min, max_stage=max_stage)
        for p_col in GRID:
            for p_e in GRID:
                p_eq = p_col + p_e - p_col * p_e
                oracle_tau, _ = stationary_chain_oracle(mac, AccessMode.FOUR_WAY, p_col, p_e)
                assert tau_four_way(p_eq, p_col, p_e, mac) == pytest.approx(oracle_tau, abs=1e-8)

    def test_half_p_eq_is_regular(self):
        # p_eq = 0.5 makes the textbook (1-2p) form 0/0; the direct sum and
        # the oracle must agree there too.
        mac = MacParams(w_min=4, max_stage=2)
        p_col = 0.5
        oracle_tau, _ = stationary_chain_oracle(mac, AccessMode.TWO_WAY, p_col, 0.0)
        assert tau_two_way(0.5, mac) == pytest.approx(oracle_tau, abs=1e-10)
