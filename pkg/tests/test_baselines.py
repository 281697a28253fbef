import math

import numpy as np
import pytest

from constshape import (
    AwgnChannel,
    ExactQuadrature,
    ObjectiveKind,
    RateRecord,
    mb_optimize,
    mb_rate,
    mi,
    qam_init,
    uniform_rates,
)


class TestMbOptimize:
    def test_high_snr_prefers_uniform(self):
        result = mb_optimize(16, 30.0, ObjectiveKind.MI)
        assert result.nu < 0.05
        assert result.rate_bits == pytest.approx(4.0, abs=1e-3)

    def test_shaping_gain_exists_at_8db(self):
        result = mb_optimize(16, 8.0, ObjectiveKind.MI)
        uniform = mi(qam_init(16), AwgnChannel.from_snr_db(8.0), ExactQuadrature(32))
        assert result.rate_bits > uniform

    def test_rate_consistent_with_reevaluation(self):
        for objective in (ObjectiveKind.MI, ObjectiveKind.GMI):
            result = mb_optimize(16, 8.0, objective)
            again = mb_rate(16, 8.0, result.nu, objective)
            assert result.rate_bits == pytest.approx(again, abs=1e-9)

    def test_gmi_optimum_below_mi_optimum(self):
        for snr_db in (4.0, 8.0, 12.0):
            r_mi = mb_optimize(16, snr_db, ObjectiveKind.MI)
            r_gmi = mb_optimize(16, snr_db, ObjectiveKind.GMI)
            assert r_gmi.rate_bits <= r_mi.rate_bits + 1e-9

    @pytest.mark.parametrize("snr_db", [4.0, 8.0])
    def test_rate_unimodal_in_nu(self, snr_db):
        # grid-scan oracle validating the golden-section assumption
        grid = np.linspace(0.0, 5.0, 101)
        rates = [mb_rate(16, snr_db, nu, ObjectiveKind.MI, gh_nodes=24) for nu in grid]
        interior_maxima = sum(
            1
            for i in range(1, len(rates) - 1)
            if rates[i] > rates[i - 1] + 1e-12 and rates[i] > rates[i + 1] + 1e-12
        )
        assert interior_maxima <= 1

    def test_optimum_beats_grid_scan(self):
        result = mb_optimize(16, 8.0, ObjectiveKind.MI)
        grid_best = max(
            mb_rate(16, 8.0, nu, ObjectiveKind.MI) for nu in np.linspace(0.0, 5.0, 51)
        )
        assert result.rate_bits >= grid_best - 1e-6


class TestUniformRates:
    def test_high_snr_saturates(self):
        records = uniform_rates(16, [40.0])
        for rec in records:
            assert rec.rate_bits == pytest.approx(4.0, abs=1e-6)

    def test_monotone_in_snr(self):
        records = uniform_rates(16, range(0, 21, 2))
        for objective in (ObjectiveKind.MI, ObjectiveKind.GMI):
            rates = [r.rate_bits for r in records if r.objective is objective]
            assert all(a <= b + 1e-9 for a, b in zip(rates, rates[1:]))

    def test_qpsk_at_0db_matches_monte_carlo(self):
        from constshape import BatchMC

        exact = next(
            r.rate_bits
            for r in uniform_rates(4, [0.0])
            if r.objective is ObjectiveKind.MI
        )
        c = qam_init(4)
        ch = AwgnChannel.from_snr_db(0.0)
        estimates = [mi(c, ch, BatchMC(100_000, seed=s)) for s in range(10)]
        stderr = float(np.std(estimates, ddof=1)) / math.sqrt(len(estimates))
        assert abs(exact - float(np.mean(estimates))) < 3 * stderr

    def test_mb_at_least_uniform_across_grid(self):
        grid = [2.0, 6.0, 10.0, 14.0]
        uniform = uniform_rates(16, grid)
        for objective in (ObjectiveKind.MI, ObjectiveKind.GMI):
            for snr_db in grid:
                uni = next(
                    r.rate_bits
                    for r in uniform
                    if r.snr_db == snr_db and r.objective is objective
                )
                assert mb_optimize(16, snr_db, objective).rate_bits >= uni - 1e-9


class TestRateRecord:
    def test_accepts_valid_chain(self):
        RateRecord("uniform", 16, 8.0, ObjectiveKind.MI, 2.5, 4.0)

    def test_rejects_rate_above_entropy(self):
        with pytest.raises(ValueError):
            RateRecord("uniform", 16, 8.0, ObjectiveKind.MI, 4.2, 4.0)

    def test_rejects_entropy_above_log2m(self):
        with pytest.raises(ValueError):
            RateRecord("mb", 16, 8.0, ObjectiveKind.MI, 2.0, 4.5)

    def test_rejects_unknown_scheme(self):
        with pytest.raises(ValueError):
            RateRecord("magic", 16, 8.0, ObjectiveKind.MI, 2.0, 4.0)
