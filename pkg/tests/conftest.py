import numpy as np
import pytest

from riscovert.channels import ChannelStatistics
from riscovert.geometry import ArrayGeometry, PropagationParams
from riscovert.multiport import RisHardware
from riscovert.optimizer import LinkEnsemble


def line_array(n, wavelength=1.0, spacing=0.5):
    return ArrayGeometry.uniform_planar(1, n, spacing * wavelength, 0.75 * wavelength,
                                        wavelength, 0.46 * wavelength,
                                        wavelength / 500.0)


def random_stats(rng, size, draws=None):
    draws = draws if draws is not None else 2 * size + 2
    a = rng.standard_normal((draws, size)) + 1j * rng.standard_normal((draws, size))
    return ChannelStatistics.from_correlation(a.conj().T @ a / draws)


def random_hardware(rng, m, model="mp", z0=50.0):
    c = 0.3 * (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    zss = z0 * np.eye(m) + 0.5 * (c + c.T) + np.diag(rng.uniform(5.0, 25.0, m))
    return RisHardware(zss, 0.1, z0, 73.0 + 42.0j, 73.0 + 42.0j, model)


def random_ensemble(rng, m, n, s_scale=800.0):
    s = s_scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    return LinkEnsemble(random_stats(rng, n), random_stats(rng, n),
                        random_stats(rng, m), random_stats(rng, m), s)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def propagation(rice=1.0, exponent=2.0, spread=np.pi / 8, gain=1.0):
    return PropagationParams(rice, exponent, spread, gain)
