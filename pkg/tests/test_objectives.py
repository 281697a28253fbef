import math

import numpy as np
import pytest

from constshape import (
    AwgnChannel,
    BatchMC,
    Constellation,
    ExactQuadrature,
    ObjectiveKind,
    batch_objective_and_gradient,
    cross_entropy,
    fd_gradient,
    gmi,
    grad_gmi,
    grad_mi,
    gray_labels,
    mi,
    qam_init,
    relative_gradient_error,
    sample_batch,
    smd_log_posterior,
)
from constshape.objectives import _central_difference

EXACT = ExactQuadrature(32)


def bpsk():
    return Constellation(
        points=np.array([1.0 + 0j, -1.0 + 0j]),
        logits=np.zeros(2),
        labels=np.array([[0], [1]]),
    )


def random_constellation(m, seed):
    rng = np.random.default_rng(seed)
    return Constellation(
        points=rng.standard_normal(m) + 1j * rng.standard_normal(m),
        logits=0.7 * rng.standard_normal(m),
        labels=gray_labels(m),
    )


class TestCrossEntropy:
    def test_noiseless_limit(self):
        c = qam_init(16)
        assert cross_entropy(c, AwgnChannel.from_snr_db(60.0), EXACT) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_single_point_degenerate(self):
        c = Constellation(
            points=np.array([1.0 + 0j]), logits=np.zeros(1), labels=np.zeros((1, 0), dtype=int)
        )
        assert cross_entropy(c, AwgnChannel.from_snr_db(0.0), EXACT) == 0.0

    def test_exact_matches_monte_carlo(self):
        c = bpsk()
        ch = AwgnChannel.from_snr_db(0.0)
        exact = cross_entropy(c, ch, EXACT)
        # independent Monte Carlo oracle with a known standard error
        rng = np.random.default_rng(123)
        batch = sample_batch(c.probabilities(), 1_000_000, rng)
        ys = ch.transmit(c.normalized_points()[batch.indices], rng)
        scores = -smd_log_posterior(ys, c, ch)[np.arange(batch.size), batch.indices] / math.log(2)
        stderr = float(np.std(scores)) / math.sqrt(batch.size)
        assert abs(exact - float(np.mean(scores))) < 3 * stderr


class TestMi:
    def test_high_snr_reaches_entropy(self):
        c = qam_init(16)
        assert mi(c, AwgnChannel.from_snr_db(60.0), EXACT) == pytest.approx(4.0, abs=1e-9)

    def test_low_snr_vanishes(self):
        # true MI at -80 dB is ~1.4e-8 bits (snr_linear * log2 e)
        c = qam_init(4)
        assert mi(c, AwgnChannel.from_snr_db(-80.0), EXACT) == pytest.approx(0.0, abs=1e-6)

    def test_capacity_bound(self):
        for seed in range(5):
            c = random_constellation(16, seed)
            for snr_db in (0.0, 6.0, 12.0):
                cap = math.log2(1.0 + 10.0 ** (snr_db / 10.0))
                assert mi(c, AwgnChannel.from_snr_db(snr_db), EXACT) <= cap + 1e-9

    def test_monotone_in_snr(self):
        c = qam_init(16)
        rates = [mi(c, AwgnChannel.from_snr_db(s), EXACT) for s in range(0, 21, 2)]
        assert all(a <= b + 1e-9 for a, b in zip(rates, rates[1:]))

    def test_quadrature_resolution(self):
        # the n=32 rule tracks n=96 to ~1e-13 at 2 dB, ~1e-7 at 8 dB and
        # ~1e-5 at 14 dB (the posterior sharpens with SNR); every consumer of
        # these rates tolerates far more
        c = qam_init(16)
        for snr_db, tol in ((2.0, 1e-12), (8.0, 2e-7), (14.0, 2e-5)):
            ch = AwgnChannel.from_snr_db(snr_db)
            assert mi(c, ch, ExactQuadrature(32)) == pytest.approx(
                mi(c, ch, ExactQuadrature(96)), abs=tol
            )


class TestGmi:
    def test_single_bit_equals_mi(self):
        c = bpsk()
        ch = AwgnChannel.from_snr_db(4.0)
        assert gmi(c, ch, EXACT) == pytest.approx(mi(c, ch, EXACT), abs=1e-12)

    def test_uniform_gray_high_snr(self):
        c = qam_init(16)
        assert gmi(c, AwgnChannel.from_snr_db(60.0), EXACT) == pytest.approx(4.0, abs=1e-9)

    def test_bounded_by_mi(self):
        c = qam_init(16)
        ch = AwgnChannel.from_snr_db(8.0)
        assert gmi(c, ch, EXACT) <= mi(c, ch, EXACT)

    def test_bounded_by_mi_random_constellations(self):
        for seed in range(6):
            c = random_constellation(16, 100 + seed)
            for snr_db in (2.0, 8.0):
                ch = AwgnChannel.from_snr_db(snr_db)
                assert gmi(c, ch, EXACT, clamped=False) <= mi(c, ch, EXACT) + 1e-9

    def test_monotone_in_snr(self):
        c = qam_init(16)
        rates = [gmi(c, AwgnChannel.from_snr_db(s), EXACT) for s in range(0, 21, 2)]
        assert all(a <= b + 1e-9 for a, b in zip(rates, rates[1:]))

    def test_clamp(self):
        # skewed probabilities make the unclamped value negative at very low SNR
        c = qam_init(16).replace(logits=np.linspace(0.0, -6.0, 16))
        ch = AwgnChannel.from_snr_db(-25.0)
        raw = gmi(c, ch, EXACT, clamped=False)
        assert raw < 0.0
        assert gmi(c, ch, EXACT) == 0.0


class TestGradientsAgainstFiniteDifferences:
    def test_symmetric_uniform_qpsk_is_stationary_in_logits(self):
        c = qam_init(4)
        g = grad_mi(c, AwgnChannel.from_snr_db(8.0), EXACT)
        np.testing.assert_allclose(g.d_logits, 0.0, atol=1e-8)

    def test_gmi_symmetric_uniform_qpsk_is_stationary_in_logits(self):
        c = qam_init(4)
        g = grad_gmi(c, AwgnChannel.from_snr_db(8.0), EXACT)
        np.testing.assert_allclose(g.d_logits, 0.0, atol=1e-8)

    @pytest.mark.parametrize("kind", [ObjectiveKind.MI, ObjectiveKind.GMI])
    def test_exact_gradient_matches_fd(self, kind):
        grad_fn = grad_mi if kind is ObjectiveKind.MI else grad_gmi
        c = random_constellation(16, 7)
        ch = AwgnChannel.from_snr_db(8.0)
        analytic = grad_fn(c, ch, EXACT)
        oracle = fd_gradient(c, ch, kind, step=1e-5)
        assert relative_gradient_error(analytic, oracle) <= 1e-6

    def test_consistency_over_random_constellations(self):
        snrs = (2.0, 8.0, 14.0)
        for i in range(10):
            m = (4, 16)[i % 2]
            ch = AwgnChannel.from_snr_db(snrs[i % 3])
            c = random_constellation(m, 1000 + i)
            for kind, grad_fn in ((ObjectiveKind.MI, grad_mi), (ObjectiveKind.GMI, grad_gmi)):
                analytic = grad_fn(c, ch, EXACT)
                oracle = fd_gradient(c, ch, kind, step=1e-5)
                assert relative_gradient_error(analytic, oracle) <= 1e-5

    def test_m2_gmi_gradient_equals_mi_gradient(self):
        c = bpsk().replace(logits=np.array([0.4, -0.4]))
        ch = AwgnChannel.from_snr_db(5.0)
        g_mi = grad_mi(c, ch, EXACT)
        g_gmi = grad_gmi(c, ch, EXACT)
        np.testing.assert_allclose(g_mi.as_vector(), g_gmi.as_vector(), atol=1e-12)

    @pytest.mark.parametrize("kind", [ObjectiveKind.MI, ObjectiveKind.GMI])
    def test_dropping_correction_breaks_fd_check(self, kind):
        # the conditional-score correction exists because the sampling
        # distribution is trainable; without it the gradient is wrong at any
        # nonuniform distribution
        grad_fn = grad_mi if kind is ObjectiveKind.MI else grad_gmi
        base = qam_init(16)
        from constshape import maxwell_boltzmann

        c = base.replace(logits=np.log(maxwell_boltzmann(base.points, 0.2)))
        ch = AwgnChannel.from_snr_db(8.0)
        oracle = fd_gradient(c, ch, kind, step=1e-5)
        ablated = grad_fn(c, ch, EXACT, include_correction=False)
        assert relative_gradient_error(ablated, oracle) > 1e-2

    def test_logit_gradient_sums_to_zero(self):
        ch = AwgnChannel.from_snr_db(6.0)
        for seed in range(5):
            c = random_constellation(16, 50 + seed)
            for grad_fn in (grad_mi, grad_gmi):
                g = grad_fn(c, ch, EXACT)
                assert abs(float(g.d_logits.sum())) < 1e-10

    def test_point_gradient_orthogonal_to_global_scaling(self):
        # the power normalization makes the objective scale-invariant in the
        # raw points, so the gradient has no radial component
        ch = AwgnChannel.from_snr_db(9.0)
        c = random_constellation(16, 77)
        g = grad_mi(c, ch, EXACT)
        d = g.d_points[0::2] + 1j * g.d_points[1::2]
        radial = float(np.sum((np.conj(d) * c.points).real))
        assert abs(radial) < 1e-12 * max(1.0, float(np.abs(d).max()))


class TestBatchMode:
    def test_batch_value_is_deterministic_per_seed(self):
        c = qam_init(16)
        ch = AwgnChannel.from_snr_db(8.0)
        mode = BatchMC(2000, seed=5)
        assert mi(c, ch, mode) == mi(c, ch, mode)
        assert mi(c, ch, mode) != mi(c, ch, BatchMC(2000, seed=6))

    def test_batch_gradient_is_unbiased(self):
        # averaging batch gradients over seeds approaches the exact gradient
        # within 3 standard errors per coordinate
        base = qam_init(16)
        from constshape import maxwell_boltzmann

        c = base.replace(logits=np.log(maxwell_boltzmann(base.points, 0.35)))
        ch = AwgnChannel.from_snr_db(8.0)
        exact = grad_mi(c, ch, EXACT).as_vector()
        seeds = 200
        draws = np.empty((seeds, exact.size))
        for s in range(seeds):
            draws[s] = grad_mi(c, ch, BatchMC(2000, seed=s)).as_vector()
        mean = draws.mean(axis=0)
        stderr = draws.std(axis=0, ddof=1) / math.sqrt(seeds)
        # coordinates with vanishing spread (exactly determined) must agree
        tight = stderr < 1e-12
        np.testing.assert_allclose(mean[tight], exact[tight], atol=1e-9)
        assert np.all(np.abs(mean[~tight] - exact[~tight]) < 3 * stderr[~tight])

    def test_batch_entry_point_matches_mode_api(self):
        c = qam_init(16)
        ch = AwgnChannel.from_snr_db(8.0)
        rng = np.random.default_rng(31)
        batch = sample_batch(c.probabilities(), 4000, rng)
        ys = ch.transmit(c.normalized_points()[batch.indices], rng)
        value, grads = batch_objective_and_gradient(c, ch, batch, ys, ObjectiveKind.MI)
        assert value == pytest.approx(mi(c, ch, BatchMC(4000, seed=31)), abs=1e-12)
        assert np.all(np.isfinite(grads.as_vector()))


class TestFiniteDifferenceMachinery:
    def test_linear_function_recovered_exactly(self):
        coeffs = np.array([2.0, -0.5, 3.25, 0.0, 1e-3])
        fd = _central_difference(lambda x: float(coeffs @ x), np.ones(5), step=1e-4)
        np.testing.assert_allclose(fd, coeffs, rtol=1e-9, atol=1e-12)

    def test_step_halving_is_second_order(self):
        fn = lambda x: float(np.sin(x).sum() + (x**3).sum())
        x0 = np.array([0.3, -0.7])
        exact = np.cos(x0) + 3 * x0**2
        err_h = np.abs(_central_difference(fn, x0, 1e-4) - exact).max()
        err_h2 = np.abs(_central_difference(fn, x0, 5e-5) - exact).max()
        assert err_h2 < err_h / 3.0  # ~factor 4 expected for O(h^2)

    def test_step_range_enforced(self):
        c = qam_init(4)
        ch = AwgnChannel.from_snr_db(5.0)
        with pytest.raises(ValueError):
            fd_gradient(c, ch, ObjectiveKind.MI, step=1e-2)
