import numpy as np
import pytest

from bspd.errors import ParameterError
from bspd.sysmodel import SystemConfig, angle_grid, angle_transform, nearest_grid_index_periodic, subcarrier_frequencies
from bspd.channel import (assemble_channel, direction_response, dirichlet_kernel,
                          sample_paths, spatial_direction)


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestSamplePaths:
    def test_deterministic_for_fixed_seed(self, small_cfg):
        first = sample_paths(_rng(42), small_cfg)
        second = sample_paths(_rng(42), small_cfg)
        assert first == second

    def test_gain_power_unit_mean(self):
        cfg = SystemConfig(n_antennas=4, n_rf=1, n_subcarriers=1, n_paths=100_000,
                           pilot_slots=1, window_halfwidth=0)
        paths = sample_paths(_rng(1), cfg)
        mean_power = np.mean([abs(p.gain) ** 2 for p in paths])
        assert mean_power == pytest.approx(1.0, rel=0.02)

    def test_direction_sine_follows_arcsine_law(self):
        # sine of a uniform angle on (-pi/2, pi/2): CDF is arcsin(x)/pi + 1/2
        cfg = SystemConfig(n_antennas=4, n_rf=1, n_subcarriers=1, n_paths=100_000,
                           pilot_slots=1, window_halfwidth=0)
        sines = np.sort([p.direction_sine for p in sample_paths(_rng(2), cfg)])
        cdf = np.arcsin(sines) / np.pi + 0.5
        empirical_hi = np.arange(1, sines.size + 1) / sines.size
        empirical_lo = np.arange(0, sines.size) / sines.size
        ks = max(np.max(np.abs(empirical_hi - cdf)), np.max(np.abs(cdf - empirical_lo)))
        assert ks < 0.01

    def test_delays_bounded(self, small_cfg):
        paths = sample_paths(_rng(3), small_cfg, tau_max=20e-9)
        assert all(0 <= p.delay <= 20e-9 for p in paths)

    def test_pinned_directions(self, small_cfg):
        paths = sample_paths(_rng(4), small_cfg, direction_sines=[0.25, -0.5])
        assert [p.direction_sine for p in paths] == [0.25, -0.5]

    def test_bad_tau_rejected(self, small_cfg):
        with pytest.raises(ParameterError):
            sample_paths(_rng(5), small_cfg, tau_max=0.0)


class TestSpatialDirection:
    def test_carrier_identity(self):
        assert spatial_direction(0.37, 100e9, 100e9) == 0.37

    def test_broadside_split_free(self):
        f = np.array([90e9, 100e9, 110e9])
        assert np.all(spatial_direction(0.0, f, 100e9) == 0.0)

    def test_reference_product(self):
        # psi = theta_bar(40) of the 256 grid, scaled by the top-subcarrier ratio
        psi = -177 / 256
        ratio = 1 + (15e9 / 512) * (511 / 2) / 100e9
        expected = psi * ratio  # = -0.743160504...
        assert spatial_direction(psi, ratio * 100e9, 100e9) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(-0.74316, abs=2e-5)

    def test_zero_carrier_rejected(self):
        with pytest.raises(ParameterError):
            spatial_direction(0.1, 1e9, 0.0)


class TestAssembleChannel:
    def test_on_grid_narrowband_single_path_is_one_sparse(self):
        cfg = SystemConfig(n_antennas=32, n_rf=4, n_subcarriers=8, pilot_slots=2,
                           bandwidth_hz=0.0, n_paths=1, window_halfwidth=2)
        grid = angle_grid(32)
        paths = sample_paths(_rng(6), cfg, direction_sines=[grid.theta(11)])
        paths = [type(paths[0])(gain=1.0, delay=0.0, direction_sine=grid.theta(11))]
        ch = assemble_channel(paths, cfg)
        for m in range(cfg.n_subcarriers):
            col = ch.h_angle[:, m]
            assert abs(col[10]) == pytest.approx(np.sqrt(32), rel=1e-12)
            mask = np.ones(32, dtype=bool)
            mask[10] = False
            assert np.max(np.abs(col[mask])) <= 1e-9

    def test_column_norm_sqrt_n(self):
        cfg = SystemConfig(n_antennas=32, n_rf=4, n_subcarriers=16, pilot_slots=2,
                           n_paths=1, window_halfwidth=2)
        paths = sample_paths(_rng(7), cfg)
        paths = [type(paths[0])(gain=1.0, delay=0.0, direction_sine=paths[0].direction_sine)]
        ch = assemble_channel(paths, cfg)
        norms = np.linalg.norm(ch.h_spatial, axis=0)
        assert np.allclose(norms, np.sqrt(32), rtol=1e-12)

    def test_delay_phase_advance(self):
        cfg = SystemConfig(n_antennas=8, n_rf=2, n_subcarriers=16, pilot_slots=2,
                           n_paths=1, window_halfwidth=1)
        tau = 1e-8
        paths = sample_paths(_rng(8), cfg)
        paths = [type(paths[0])(gain=1.0, delay=tau, direction_sine=0.0)]
        ch = assemble_channel(paths, cfg)
        f = subcarrier_frequencies(cfg)
        step = f[1] - f[0]
        top = ch.h_spatial[0, :]
        ratios = top[1:] / top[:-1]
        assert np.allclose(ratios, np.exp(-2j * np.pi * tau * step), atol=1e-12)

    def test_angle_domain_consistency(self, small_cfg):
        ch = assemble_channel(sample_paths(_rng(9), small_cfg), small_cfg)
        f = angle_transform(small_cfg.n_antennas)
        assert np.linalg.norm(ch.h_angle - f @ ch.h_spatial) <= 1e-9 * np.linalg.norm(ch.h_angle)
        assert np.linalg.norm(ch.h_angle) == pytest.approx(np.linalg.norm(ch.h_spatial), rel=1e-9)

    def test_empty_paths_rejected(self, small_cfg):
        with pytest.raises(ParameterError):
            assemble_channel([], small_cfg)

    def test_deterministic_assembly(self, small_cfg):
        a = assemble_channel(sample_paths(_rng(10), small_cfg), small_cfg)
        b = assemble_channel(sample_paths(_rng(10), small_cfg), small_cfg)
        assert np.array_equal(a.h_spatial, b.h_spatial)
        assert np.array_equal(a.h_angle, b.h_angle)


class TestBeamSplitPeaks:
    def test_single_path_peak_follows_periodic_nearest_row(self):
        cfg = SystemConfig(n_antennas=64, n_rf=4, n_subcarriers=32, pilot_slots=2,
                           n_paths=1, window_halfwidth=2)
        f = subcarrier_frequencies(cfg)
        rng = np.random.default_rng(11)
        grid = angle_grid(64)
        checked = 0
        for psi in rng.uniform(-0.98, 0.98, size=12):
            q = direction_response(psi, cfg)
            expected = nearest_grid_index_periodic(spatial_direction(psi, f, cfg.carrier_hz), 64)
            for m in range(cfg.n_subcarriers):
                theta = spatial_direction(psi, f[m], cfg.carrier_hz)
                # exclude near-ties between adjacent samples
                dist = np.abs(((theta - grid.values + 1) % 2) - 1)
                lo, hi = np.sort(dist)[:2]
                if hi - lo < 1e-3:
                    continue
                checked += 1
                assert int(np.argmax(np.abs(q[:, m]))) + 1 == expected[m]
        assert checked > 300


class TestDirichletKernel:
    def test_peak_value(self):
        assert dirichlet_kernel(0.0, 16) == 16.0

    def test_grid_zeros(self):
        n = 16
        for k in (1, 2, 3, 5, 15):
            assert dirichlet_kernel(2 * k / n, n) == pytest.approx(0.0, abs=1e-9)

    def test_reference_value(self):
        # sin(pi/2) / sin(pi/8)
        assert dirichlet_kernel(0.25, 4) == pytest.approx(1 / np.sin(np.pi / 8), rel=1e-12)
        assert dirichlet_kernel(0.25, 4) == pytest.approx(2.6131, abs=1e-4)

    def test_even_multiples_return_peak(self):
        assert dirichlet_kernel(2.0, 8) == 8.0
        assert dirichlet_kernel(-4.0, 8) == 8.0

    def test_matches_steering_inner_product(self):
        # |sum_k e^{j pi k x}| equals |kernel(x)|
        n = 12
        for x in (0.01, 0.3, -0.77, 1.5):
            direct = abs(np.sum(np.exp(1j * np.pi * np.arange(n) * x)))
            assert abs(dirichlet_kernel(x, n)) == pytest.approx(direct, rel=1e-10)

    def test_vectorized(self):
        x = np.array([0.0, 0.25, 0.5])
        out = dirichlet_kernel(x, 4)
        assert out.shape == (3,)
        assert out[0] == 4.0
