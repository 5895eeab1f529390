import numpy as np
import pytest
from scipy.special import j0

from riscovert.channels import (average_power, instantaneous_power, los_mean,
                                nlos_correlation, position_averaged_stats,
                                sample_channel, sample_channels, steering_vector,
                                ChannelStatistics)
from riscovert.errors import GeometryError, NumericalIntegrationError
from riscovert.geometry import PositionRegion, PropagationParams, broadside_angle

from conftest import line_array, propagation


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        geom = line_array(2)
        np.testing.assert_allclose(steering_vector(geom, 0.0), [1.0, 1.0])

    def test_endfire_half_wavelength(self):
        geom = line_array(2)
        # element coordinates are centered, so the relative phase is pi
        vec = steering_vector(geom, np.pi / 2)
        np.testing.assert_allclose(vec[1] / vec[0], -1.0, atol=1e-12)

    def test_thirty_degrees_quadrature_phase(self):
        geom = line_array(2)
        vec = steering_vector(geom, np.pi / 6)
        np.testing.assert_allclose(vec[1] / vec[0], 1j, atol=1e-12)

    def test_unit_modulus_for_random_geometries(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 12))
            geom = line_array(n, spacing=float(rng.uniform(0.25, 1.0)))
            angle = float(rng.uniform(-np.pi / 2, np.pi / 2))
            np.testing.assert_allclose(np.abs(steering_vector(geom, angle)), 1.0)


class TestLosMean:
    def test_zero_rice_factor_gives_zero_vector(self):
        geom = line_array(3)
        params = propagation(rice=0.0)
        mu = los_mean(geom, params, (0.0, 10.0, 0.0))
        np.testing.assert_allclose(mu, 0.0)

    def test_large_rice_factor_limit(self):
        geom = line_array(3)
        params = propagation(rice=1e12, exponent=2.0, gain=1.0)
        mu = los_mean(geom, params, (0.0, 10.0, 0.0))
        beta = 1.0 / 100.0
        np.testing.assert_allclose(mu, np.sqrt(beta) * steering_vector(geom, 0.0),
                                   rtol=1e-10)

    def test_equal_split_two_elements(self):
        geom = line_array(2)
        params = propagation(rice=1.0, exponent=2.0, gain=1.0)
        mu = los_mean(geom, params, (0.0, 1.0, 0.0))  # unit distance, broadside
        np.testing.assert_allclose(mu, [np.sqrt(0.5), np.sqrt(0.5)], rtol=1e-12)

    def test_zero_distance_raises(self):
        geom = line_array(2)
        with pytest.raises(GeometryError):
            los_mean(geom, propagation(), (0.0, 0.0, 0.0))


class TestNlosCorrelation:
    def test_diagonal_is_gain_over_k_plus_one(self):
        geom = line_array(4)
        params = propagation(rice=3.0, exponent=2.0, spread=np.pi / 6, gain=2.0)
        sig = nlos_correlation(geom, params, (0.0, 5.0, 0.0))
        beta = 2.0 * 5.0 ** -2.0
        np.testing.assert_allclose(np.diag(sig).real, beta / 4.0, rtol=1e-12)

    def test_vanishing_spread_limit(self):
        geom = line_array(3)
        params = propagation(rice=0.0, spread=1e-9, gain=1.0)
        position = (5.0 * np.cos(np.pi / 3), 5.0 * np.sin(np.pi / 3), 0.0)
        sig = nlos_correlation(geom, params, position)
        aod = broadside_angle(np.pi / 3)
        beta = 5.0 ** -2.0
        a = steering_vector(geom, aod)
        expected = beta * np.outer(a.conj(), a)
        np.testing.assert_allclose(sig, expected, rtol=0, atol=1e-8 * beta)

    def test_against_dense_trapezoid_oracle(self):
        geom = line_array(4)
        spread = np.pi / 6
        params = propagation(rice=0.0, spread=spread, gain=1.0)
        aod = np.pi / 4
        position = (5.0 * np.cos(np.pi / 2 - aod), 5.0 * np.sin(np.pi / 2 - aod), 0.0)
        sig = nlos_correlation(geom, params, position)
        # brute-force quadrature of the same average with 1e5 trapezoid points
        phis = np.linspace(aod - spread / 2, aod + spread / 2, 100_001)
        a = np.exp(1j * 2 * np.pi * np.outer(geom.element_x, np.sin(phis)))
        oracle = (a.conj() @ a.T) * (5.0 ** -2.0) / phis.size
        # trapezoid endpoint halves
        end = (np.outer(a[:, 0].conj(), a[:, 0]) + np.outer(a[:, -1].conj(), a[:, -1]))
        oracle -= 0.5 * end * (5.0 ** -2.0) / phis.size
        oracle *= phis.size / (phis.size - 1)
        assert np.abs(sig - oracle).max() <= 1e-8

    def test_insufficient_order_raises(self):
        geom = line_array(64)
        params = propagation(spread=2 * np.pi)
        with pytest.raises(NumericalIntegrationError):
            nlos_correlation(geom, params, (0.0, 5.0, 0.0), order=8)


class TestPositionAveragedStats:
    def test_point_mass_matches_single_position(self):
        geom = line_array(4)
        params = propagation(rice=2.0, spread=np.pi / 8, gain=1.0)
        region = PositionRegion(np.pi / 3, 0.0, 12.0)
        stats = position_averaged_stats(geom, params, region)
        p = region.points([np.pi / 3])[0]
        mu = los_mean(geom, params, p)
        expected = np.outer(mu.conj(), mu) + nlos_correlation(geom, params, p)
        np.testing.assert_allclose(stats.correlation, expected, rtol=1e-12)

    def test_isotropic_limit_is_bessel_not_identity(self):
        # K=0 with a full-circle spread: the planar isotropic limit has
        # J0(k dx) correlations (identity only at exact half-wavelength
        # multiples); checked against the closed form
        geom = line_array(4)
        params = PropagationParams(0.0, 2.0, 2 * np.pi, 1.0)
        region = PositionRegion(np.pi / 2, np.pi / 2, 10.0)
        stats = position_averaged_stats(geom, params, region, samples=64,
                                        nlos_order=256)
        beta = 10.0 ** -2.0
        k = geom.wavenumber
        dx = geom.element_x[None, :] - geom.element_x[:, None]
        np.testing.assert_allclose(stats.correlation.real, beta * j0(k * dx),
                                   atol=1e-6 * beta)
        assert np.abs(stats.correlation.imag).max() <= 1e-9 * beta

    def test_trace_identity_against_sampling(self, rng):
        geom = line_array(5)
        params = propagation(rice=4.0, spread=np.pi / 16, gain=3.0)
        region = PositionRegion(np.pi / 3, np.pi / 8, 8.0, 1.0)
        stats = position_averaged_stats(geom, params, region)
        draws, angles = sample_channels(geom, params, region, 40_000, rng)
        mean_gain = np.mean(np.abs(draws) ** 2) * geom.size
        assert np.trace(stats.correlation).real == pytest.approx(mean_gain, rel=0.02)

    def test_factor_reproduces_correlation(self):
        geom = line_array(6)
        params = propagation(rice=1.0, spread=np.pi / 12)
        region = PositionRegion(np.pi / 4, np.pi / 16, 15.0)
        stats = position_averaged_stats(geom, params, region)
        rebuilt = stats.factor.conj().T @ stats.factor
        err = np.linalg.norm(rebuilt - stats.correlation) / np.linalg.norm(stats.correlation)
        assert err <= 1e-10
        assert np.linalg.eigvalsh(stats.correlation).min() >= -1e-10 * np.trace(
            stats.correlation).real
        np.testing.assert_allclose(stats.mean, 0.0)


class TestSampling:
    def test_fixed_seed_bitwise_identical(self):
        geom = line_array(4)
        params = propagation()
        region = PositionRegion(np.pi / 3, np.pi / 16, 9.0)
        one = sample_channel(geom, params, region, 42)
        two = sample_channel(geom, params, region, 42)
        assert np.array_equal(one.vector, two.vector)
        assert np.array_equal(one.conditioning_position, two.conditioning_position)

    def test_infinite_rice_factor_equals_los_mean(self):
        geom = line_array(4)
        params = propagation(rice=1e300, exponent=2.0, gain=1.0)
        region = PositionRegion(np.pi / 3, np.pi / 16, 9.0)
        real = sample_channel(geom, params, region, 7)
        mu = los_mean(geom, params, real.conditioning_position)
        np.testing.assert_allclose(real.vector, mu, rtol=0, atol=1e-140)

    def test_empirical_covariance_matches_statistics(self, rng):
        geom = line_array(6)
        params = propagation(rice=5.0, spread=np.pi / 32, gain=1.0)
        region = PositionRegion(np.pi / 3, np.pi / 16, 20.0)
        stats = position_averaged_stats(geom, params, region)
        draws, _ = sample_channels(geom, params, region, 100_000, rng)
        emp = draws.conj().T @ draws / draws.shape[0]
        err = np.linalg.norm(emp - stats.correlation) / np.linalg.norm(stats.correlation)
        assert err <= 0.02


class TestPowerForms:
    def test_no_reflected_path(self, rng):
        r = np.eye(3, dtype=complex) * 2.0
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        phi = np.zeros((4, 3), dtype=complex)
        rr = np.eye(4, dtype=complex)
        assert average_power(r, rr, phi, v) == pytest.approx(2.0, rel=1e-12)

    def test_identity_quadratic_form(self, rng):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v /= np.linalg.norm(v)
        out = average_power(np.eye(4), np.zeros((2, 2)), np.zeros((2, 4)), v)
        assert out == pytest.approx(1.0, rel=1e-12)

    def test_monte_carlo_linkage(self, rng):
        geom_t = line_array(5)
        geom_h = line_array(3)
        params = propagation(rice=2.0, spread=np.pi / 16, gain=1.0)
        region = PositionRegion(np.pi / 2.5, np.pi / 24, 14.0)
        stats_h = position_averaged_stats(geom_h, params, region)
        stats_t = position_averaged_stats(geom_t, params, region)
        phi = 0.7 * (rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3)))
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        predicted = average_power(stats_h.correlation, stats_t.correlation, phi, v)
        n = 100_000
        h, _ = sample_channels(geom_h, params, region, n, rng)
        t, _ = sample_channels(geom_t, params, region, n, rng)
        # zero-mean ensembles: each path carries an independent absolute
        # carrier phase (position uncertainty spans many wavelengths), which
        # is what makes the cross term between the two links vanish
        h = h * np.exp(2j * np.pi * rng.uniform(0, 1, n))[:, None]
        t = t * np.exp(2j * np.pi * rng.uniform(0, 1, n))[:, None]
        powers = np.abs(h @ v + (t @ phi) @ v) ** 2
        assert np.mean(powers) == pytest.approx(predicted, rel=0.02)

    def test_average_power_nonnegative_real(self, rng):
        for _ in range(50):
            a = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
            r = a.conj().T @ a
            b = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
            rr = b @ b.conj().T
            phi = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v /= np.linalg.norm(v)
            assert average_power(r, rr, phi, v) >= -1e-12

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            average_power(np.eye(3), np.eye(2), np.zeros((2, 4)), np.ones(3))
        with pytest.raises(ValueError):
            instantaneous_power(np.ones(3), np.ones(2), np.zeros((3, 3)), np.ones(3))

    def test_matched_direct_channel(self):
        h = np.array([3.0, 4.0j])
        v = h.conj() / np.linalg.norm(h)
        out = instantaneous_power(h, np.zeros(0), np.zeros((0, 2)), v)
        assert out == pytest.approx(25.0, rel=1e-12)

    def test_destructive_alignment(self, rng):
        t = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        phi = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        h = -(t @ phi)
        assert instantaneous_power(h, t, phi, v) <= 1e-20

    def test_rank_one_decomposition_identity(self, rng):
        # |(h + t phi) v|^2 = v^H h^H h v + v^H phi^H t^H t phi v + cross term
        h = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        t = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        phi = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        inst = instantaneous_power(h, t, phi, v)
        parts = average_power(np.outer(h.conj(), h), np.outer(t.conj(), t), phi, v)
        cross = 2.0 * np.real(np.conj(h @ v) * ((t @ phi) @ v))
        assert inst == pytest.approx(parts + cross, rel=1e-10)


def test_channel_statistics_rejects_non_hermitian():
    bad = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(ValueError):
        ChannelStatistics(bad, bad, np.zeros(2, dtype=complex))
