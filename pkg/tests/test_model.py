"""Signal/SNR arithmetic and metric checks for the core model."""

import numpy as np
import pytest

import blindirs as bi
from blindirs.model import DimensionMismatchError


def _random_channels(rng, u_count, n_elements):
    direct = rng.standard_normal(u_count) + 1j * rng.standard_normal(u_count)
    refl = (rng.standard_normal((u_count, n_elements))
            + 1j * rng.standard_normal((u_count, n_elements)))
    return bi.ChannelSet(direct=direct, reflected=refl)


class TestPhaseConfig:
    def test_indices_validated(self):
        with pytest.raises(ValueError):
            bi.PhaseConfig(indices=np.array([0, 4]), k=4)
        with pytest.raises(ValueError):
            bi.PhaseConfig(indices=np.array([-1]), k=4)
        with pytest.raises(ValueError):
            bi.PhaseConfig(indices=np.array([0]), k=1)

    def test_angles(self):
        cfg = bi.PhaseConfig(indices=np.array([0, 1, 2, 3]), k=4)
        assert np.allclose(cfg.angles, [0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_hashable_and_eq(self):
        a = bi.PhaseConfig(indices=np.array([0, 1]), k=4)
        b = bi.PhaseConfig(indices=np.array([0, 1]), k=4)
        c = bi.PhaseConfig(indices=np.array([0, 1]), k=8)
        assert a == b and hash(a) == hash(b)
        assert a != c

    def test_immutable(self):
        cfg = bi.PhaseConfig(indices=np.array([0, 1]), k=4)
        with pytest.raises(ValueError):
            cfg.indices[0] = 3

    def test_empty_config_allowed(self):
        cfg = bi.PhaseConfig(indices=np.array([], dtype=np.int64), k=4)
        assert cfg.n == 0


class TestEffectiveGain:
    def test_no_surface_term(self):
        ch = bi.ChannelSet(direct=np.array([1 + 0j]),
                           reflected=np.zeros((1, 0), dtype=complex))
        cfg = bi.PhaseConfig(indices=np.array([], dtype=np.int64), k=4)
        assert bi.effective_gain(ch, cfg, 0) == 1 + 0j

    def test_perfect_alignment(self):
        # h0 = 1, h1 = e^{j pi} = -1; phase pi flips it back: 1 + (-1)(-1) = 2
        ch = bi.ChannelSet(direct=np.array([1 + 0j]),
                           reflected=np.array([[-1 + 0j]]))
        cfg = bi.PhaseConfig(indices=np.array([1]), k=2)
        assert bi.effective_gain(ch, cfg, 0) == pytest.approx(2 + 0j)

    def test_matches_straight_line_oracle(self):
        rng = np.random.default_rng(3)
        ch = _random_channels(rng, 2, 5)
        cfg = bi.PhaseConfig(indices=rng.integers(0, 4, 5), k=4)
        for u in range(2):
            expected = ch.direct[u]
            for n in range(5):
                expected += ch.reflected[u, n] * np.exp(2j * np.pi * cfg.indices[n] / 4)
            got = bi.effective_gain(ch, cfg, u)
            assert abs(got - expected) <= 1e-12 * abs(expected)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(0)
        ch = _random_channels(rng, 1, 3)
        cfg = bi.PhaseConfig(indices=np.array([0, 1]), k=4)
        with pytest.raises(DimensionMismatchError) as exc:
            bi.effective_gain(ch, cfg, 0)
        assert "3" in str(exc.value) and "2" in str(exc.value)


class TestSnr:
    def test_trivial_values(self):
        ch = bi.ChannelSet(direct=np.array([1 + 0j]),
                           reflected=np.array([[-1 + 0j]]))
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        cfg = bi.PhaseConfig(indices=np.array([1]), k=2)
        assert bi.snr_all(ch, cfg, budget)[0] == pytest.approx(4.0)

    def test_matches_gain_oracle(self):
        rng = np.random.default_rng(11)
        ch = _random_channels(rng, 3, 6)
        budget = bi.LinkBudget(power=0.25, noise_power=2.0)
        cfg = bi.PhaseConfig(indices=rng.integers(0, 4, 6), k=4)
        snrs = bi.snr_all(ch, cfg, budget)
        for u in range(3):
            g = bi.effective_gain(ch, cfg, u)
            assert snrs[u] == pytest.approx(abs(g) ** 2 * 0.25 / 2.0, rel=1e-12)

    def test_global_phase_rotation_invariance(self):
        rng = np.random.default_rng(5)
        ch = _random_channels(rng, 2, 4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        cfg = bi.PhaseConfig(indices=rng.integers(0, 4, 4), k=4)
        base = bi.snr_all(ch, cfg, budget)
        rot = np.exp(1j * 1.2345)
        ch2 = bi.ChannelSet(direct=ch.direct * rot, reflected=ch.reflected * rot)
        assert np.allclose(bi.snr_all(ch2, cfg, budget), base, rtol=1e-12)

    def test_channel_scaling_quadratic(self):
        rng = np.random.default_rng(6)
        ch = _random_channels(rng, 2, 4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        cfg = bi.PhaseConfig(indices=rng.integers(0, 4, 4), k=4)
        base = bi.snr_all(ch, cfg, budget)
        ch3 = bi.ChannelSet(direct=3.0 * ch.direct, reflected=3.0 * ch.reflected)
        assert np.allclose(bi.snr_all(ch3, cfg, budget), 9.0 * base, rtol=1e-12)

    def test_zero_gain_element_inert(self):
        rng = np.random.default_rng(7)
        ch = _random_channels(rng, 2, 4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        padded = bi.ChannelSet(
            direct=ch.direct,
            reflected=np.hstack([ch.reflected, np.zeros((2, 1), dtype=complex)]))
        for extra in range(4):
            cfg4 = bi.PhaseConfig(indices=np.array([1, 2, 3, 0]), k=4)
            cfg5 = bi.PhaseConfig(indices=np.array([1, 2, 3, 0, extra]), k=4)
            assert np.allclose(bi.snr_all(padded, cfg5, budget),
                               bi.snr_all(ch, cfg4, budget), rtol=1e-12)


class TestMinSnr:
    def test_basic(self):
        assert bi.min_snr([4.0, 1.0, 2.5]) == 1.0
        assert bi.min_snr([3.25]) == 3.25

    def test_empty(self):
        with pytest.raises(ValueError):
            bi.min_snr([])

    def test_against_sort_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            v = rng.random(rng.integers(1, 20))
            assert bi.min_snr(v) == sorted(v)[0]

    def test_min_below_mean(self):
        rng = np.random.default_rng(10)
        v = rng.random(50)
        assert bi.min_snr(v) <= v.mean()


class TestSumRate:
    def test_noise_free_limit(self):
        rng = np.random.default_rng(1)
        ch = _random_channels(rng, 10, 3)
        cfg = bi.PhaseConfig(indices=np.zeros(3, dtype=np.int64), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1e-30)
        rate = bi.sum_rate_uniform(ch, cfg, budget)
        assert rate == pytest.approx(10 * np.log2(1 + 1 / 9), rel=1e-6)

    def test_zero_gains(self):
        ch = bi.ChannelSet(direct=np.zeros(2, dtype=complex),
                           reflected=np.zeros((2, 1), dtype=complex))
        cfg = bi.PhaseConfig(indices=np.array([0]), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        assert bi.sum_rate_uniform(ch, cfg, budget) == 0.0

    def test_hand_evaluated_case(self):
        # U=2 with |g|^2 P = sigma^2: SINR = 0.5/(0.5 + 1) per position
        ch = bi.ChannelSet(direct=np.array([1 + 0j, 1 + 0j]),
                           reflected=np.zeros((2, 0), dtype=complex))
        cfg = bi.PhaseConfig(indices=np.array([], dtype=np.int64), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        expected = 2 * np.log2(4 / 3)
        assert bi.sum_rate_uniform(ch, cfg, budget) == pytest.approx(expected)

    def test_single_position_rejected(self):
        ch = bi.ChannelSet(direct=np.array([1 + 0j]),
                           reflected=np.zeros((1, 0), dtype=complex))
        cfg = bi.PhaseConfig(indices=np.array([], dtype=np.int64), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        with pytest.raises(ValueError):
            bi.sum_rate_uniform(ch, cfg, budget)


class TestIsGood:
    def test_empty_surface_is_good(self):
        ch = bi.ChannelSet(direct=np.array([1 + 0j, 2 + 0j]),
                           reflected=np.zeros((2, 0), dtype=complex))
        cfg = bi.PhaseConfig(indices=np.array([], dtype=np.int64), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        result = bi.make_result(ch, cfg, budget, "test", 0, 0)
        assert bi.is_good(result, ch, budget)

    def test_destructive_config_is_not_good(self):
        # one element opposing the direct link at one position
        ch = bi.ChannelSet(direct=np.array([1 + 0j]),
                           reflected=np.array([[-0.5 + 0j]]))
        cfg = bi.PhaseConfig(indices=np.array([0]), k=2)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        result = bi.make_result(ch, cfg, budget, "test", 0, 0)
        assert not bi.is_good(result, ch, budget)


class TestDbConversion:
    def test_round_trip(self):
        for x in (1e-11, 0.1, 3.5, 1e14):
            assert bi.from_db(bi.to_db(x)) == pytest.approx(x, rel=1e-12)

    def test_reference_points(self):
        assert bi.to_db(0.1) == pytest.approx(-10.0)
        assert bi.from_db(20.0) == pytest.approx(100.0)


class TestLinkBudget:
    def test_positive_required(self):
        with pytest.raises(ValueError):
            bi.LinkBudget(power=0.0, noise_power=1.0)
        with pytest.raises(ValueError):
            bi.LinkBudget(power=1.0, noise_power=-1.0)


class TestBeamformingResult:
    def test_min_matches_vector(self):
        rng = np.random.default_rng(2)
        ch = _random_channels(rng, 3, 4)
        cfg = bi.PhaseConfig(indices=rng.integers(0, 4, 4), k=4)
        budget = bi.LinkBudget(power=1.0, noise_power=1.0)
        result = bi.make_result(ch, cfg, budget, "test", seed=1, sample_budget=5)
        assert result.min_snr == result.snr_per_position.min()
        assert np.array_equal(result.snr_per_position,
                              bi.snr_all(ch, cfg, budget))
