"""Channel generator statistics, pathloss formulas, and serialization."""

import numpy as np
import pytest
from scipy import stats

import blindirs as bi
from blindirs import channels as chan


class TestAssumption1:
    def test_unit_circle_magnitudes(self):
        params = bi.default_assumption1_params(3, 8, c=1.0)
        ch = bi.gen_assumption1(3, 8, params, seed=0)
        assert np.allclose(np.abs(ch.reflected), 1.0)

    def test_direct_magnitude_default(self):
        params = bi.default_assumption1_params(2, 64, c=0.5)
        ch = bi.gen_assumption1(2, 64, params, seed=1)
        assert np.allclose(np.abs(ch.direct), np.sqrt(64) * 0.5 / 10)

    def test_direct_magnitude_override(self):
        params = bi.default_assumption1_params(2, 16, direct_magnitude=3.0)
        ch = bi.gen_assumption1(2, 16, params, seed=1)
        assert np.allclose(np.abs(ch.direct), 3.0)

    def test_determinism(self):
        params = bi.default_assumption1_params(2, 10)
        a = bi.gen_assumption1(2, 10, params, seed=42)
        b = bi.gen_assumption1(2, 10, params, seed=42)
        assert np.array_equal(a.direct, b.direct)
        assert np.array_equal(a.reflected, b.reflected)
        c = bi.gen_assumption1(2, 10, params, seed=43)
        assert not np.array_equal(a.reflected, c.reflected)

    def test_phase_uniformity(self):
        n = 100_000
        params = bi.default_assumption1_params(1, n)
        ch = bi.gen_assumption1(1, n, params, seed=7)
        phases = np.angle(ch.reflected[0]) % (2 * np.pi)
        assert abs(np.cos(phases).mean()) < 3 / np.sqrt(n)
        d, _ = stats.kstest(phases / (2 * np.pi), "uniform")
        # 1% critical value for the one-sample KS statistic
        assert d < 1.63 / np.sqrt(n)

    def test_cross_pair_independence(self):
        params = bi.default_assumption1_params(2, 10_000)
        ch = bi.gen_assumption1(2, 10_000, params, seed=3)
        x = np.cos(np.angle(ch.reflected[0]))
        y = np.cos(np.angle(ch.reflected[1]))
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.05

    def test_nonpositive_magnitudes_rejected(self):
        with pytest.raises(ValueError):
            bi.Assumption1Params(direct_magnitudes=np.array([0.0]),
                                 reflected_magnitudes=np.array([1.0]))

    def test_no_nan_inf(self):
        params = bi.default_assumption1_params(4, 128)
        ch = bi.gen_assumption1(4, 128, params, seed=9)
        assert np.isfinite(ch.direct).all() and np.isfinite(ch.reflected).all()


class TestPathlossFormulas:
    def test_reference_values(self):
        assert chan.pathloss_bs_user(10.0) == pytest.approx(10 ** -6.93, rel=1e-12)
        assert chan.pathloss_bs_irs(1.0) == pytest.approx(1e-3, rel=1e-12)
        assert chan.pathloss_irs_user(10.0) == pytest.approx(10 ** -5.2, rel=1e-12)

    def test_nonpositive_distance_rejected(self):
        for fn in (chan.pathloss_bs_user, chan.pathloss_bs_irs,
                   chan.pathloss_irs_user):
            with pytest.raises(ValueError):
                fn(0.0)
            with pytest.raises(ValueError):
                fn(-1.0)


class TestDeskTopology:
    def test_receiver_grid(self):
        topo = bi.desk_topology(10)
        # column-major 5-wide grid at 5 m spacing, one row per 5 positions
        assert tuple(topo.receiver_positions[0]) == (5.0, -5.0, 0.0)
        assert tuple(topo.receiver_positions[4]) == (25.0, -5.0, 0.0)
        assert tuple(topo.receiver_positions[5]) == (5.0, -10.0, 0.0)

    def test_distances_positive(self):
        topo = bi.desk_topology(10)
        assert topo.d_bs_irs > 0
        assert (topo.d_bs_user > 0).all()
        assert (topo.d_irs_user > 0).all()


class TestPathlossRayleigh:
    def test_second_moments(self):
        topo = bi.desk_topology(2)
        n = 400
        seeds = 250
        d_sq = np.zeros(2)
        r_sq = np.zeros((2, n))
        for seed in range(seeds):
            ch = bi.gen_pathloss_rayleigh(topo, n, seed)
            d_sq += np.abs(ch.direct) ** 2
            r_sq += np.abs(ch.reflected) ** 2
        d_sq /= seeds
        r_mean = r_sq.mean(axis=1) / seeds
        pl_direct = chan.pathloss_bs_user(topo.d_bs_user)
        pl_refl = chan.pathloss_bs_irs(topo.d_bs_irs) * chan.pathloss_irs_user(
            topo.d_irs_user)
        assert np.allclose(d_sq, pl_direct, rtol=0.2)
        assert np.allclose(r_mean, pl_refl, rtol=0.1)

    def test_shared_bs_side_fades(self):
        # h_{u,n} for different u share the same per-element BS-side factor,
        # so the ratio across positions is constant in n up to the pathloss.
        topo = bi.desk_topology(3)
        ch = bi.gen_pathloss_rayleigh(topo, 50, seed=5)
        # |h_{0,n}| and |h_{1,n}| are both proportional to |delta_BS,n|;
        # correlation of log-magnitudes across n must be clearly positive.
        a = np.log(np.abs(ch.reflected[0]))
        b = np.log(np.abs(ch.reflected[1]))
        assert np.corrcoef(a, b)[0, 1] > 0.3

    def test_determinism(self):
        topo = bi.desk_topology(2)
        a = bi.gen_pathloss_rayleigh(topo, 16, seed=1)
        b = bi.gen_pathloss_rayleigh(topo, 16, seed=1)
        assert np.array_equal(a.reflected, b.reflected)

    def test_no_nan_inf(self):
        topo = bi.desk_topology(10)
        ch = bi.gen_pathloss_rayleigh(topo, 64, seed=2)
        assert np.isfinite(ch.direct).all() and np.isfinite(ch.reflected).all()


class TestSerialization:
    def test_round_trip(self, tmp_path):
        params = bi.default_assumption1_params(3, 7)
        ch = bi.gen_assumption1(3, 7, params, seed=12)
        path = tmp_path / "channels.txt"
        bi.save_channels(ch, path, model_id="assumption1", seed=12)
        loaded, meta = bi.load_channels(path)
        assert np.array_equal(loaded.direct, ch.direct)
        assert np.array_equal(loaded.reflected, ch.reflected)
        assert meta["model"] == "assumption1"
        assert meta["seed"] == 12
