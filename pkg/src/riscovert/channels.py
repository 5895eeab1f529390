"""Rician channel statistics under position uncertainty.

Builds steering vectors, line-of-sight means, local-scattering NLOS
correlation matrices, position-averaged second-order statistics with their
matrix square-root factors, conditional Monte Carlo channel draws, and the
normalized received-power forms used by the optimizer and the scenario
evaluation.

All channel vectors are zero-mean once averaged over the node position
prior, so a link is fully described by its correlation matrix.  The NLOS
angular integral is normalized by the angular spread so that the per
element power equals ``gain / (K + 1)`` regardless of the spread.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NumericalIntegrationError
from .geometry import ArrayGeometry, PositionRegion, PropagationParams, aod_and_distance

__all__ = [
    "ChannelStatistics",
    "ChannelRealization",
    "steering_vector",
    "steering_matrix",
    "pathloss_gain",
    "los_mean",
    "nlos_correlation",
    "nlos_factor",
    "position_averaged_stats",
    "conditional_draws",
    "sample_channel",
    "sample_channels",
    "average_power",
    "instantaneous_power",
]

DEFAULT_NLOS_ORDER = 64
DEFAULT_REGION_ORDER = 128


def steering_vector(geometry: ArrayGeometry, angle: float) -> np.ndarray:
    """Array response toward a broadside angle: entries exp(j*k*x_m*sin(angle))."""
    return np.exp(1j * geometry.wavenumber * geometry.element_x * np.sin(angle))


def steering_matrix(geometry: ArrayGeometry, angles) -> np.ndarray:
    """Stacked steering vectors, shape (M, len(angles))."""
    a = np.asarray(angles, dtype=float)
    return np.exp(1j * geometry.wavenumber * np.outer(geometry.element_x, np.sin(a)))


def pathloss_gain(params: PropagationParams, distance) -> np.ndarray:
    """Linear power gain at the given 3-D distance(s)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0.0):
        raise GeometryError("pathloss distance must be positive")
    return params.reference_gain * d ** (-params.pathloss_exponent)


def los_mean(geometry, params, position, aperture=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Conditional mean of the Rician channel from `aperture` toward `position`.

    Equals sqrt(gain * K/(K+1)) times the steering vector toward the
    departure angle of the position.
    """
    aod, dist = aod_and_distance(position, aperture)
    beta = pathloss_gain(params, dist[0])
    k = params.rice_factor
    weight = np.sqrt(beta * k / (k + 1.0))
    return weight * steering_vector(geometry, aod[0])


def _spread_quadrature(center, spread, order):
    """Gauss-Legendre nodes/weights over the scattering window, weights sum to 1."""
    u, w = np.polynomial.legendre.leggauss(order)
    return center + 0.5 * spread * u, w / 2.0


def _required_order(geometry, spread):
    """Minimum quadrature order resolving the fastest phase oscillation."""
    span = float(np.ptp(geometry.element_x))
    cycles = geometry.wavenumber * span * spread / (2.0 * np.pi)
    return int(np.ceil(2.0 * cycles)) + 8


def _check_order(geometry, spread, order):
    need = _required_order(geometry, spread)
    if order < need:
        raise NumericalIntegrationError(
            f"angular quadrature order {order} cannot resolve the integrand; "
            f"need at least {need} nodes for this aperture and spread"
        )


def nlos_correlation(geometry, params, position, aperture=(0.0, 0.0, 0.0),
                     order=DEFAULT_NLOS_ORDER) -> np.ndarray:
    """Local-scattering NLOS correlation matrix conditioned on a node position.

    Entry (i, j) is ``gain / ((K+1) * spread)`` times the integral of
    ``exp(j*k*(x_j - x_i)*sin(phi))`` over the angular window of width
    ``spread`` centered on the position's departure angle, evaluated by
    fixed-order Gauss-Legendre quadrature.  The orientation matches
    ``E[h^H h]`` for row channels built from the steering vector, so
    quadratic forms in this matrix agree with powers of sampled channels.
    """
    aod, dist = aod_and_distance(position, aperture)
    return _nlos_from_aod(geometry, params, aod[0], pathloss_gain(params, dist[0]), order)


def _nlos_from_aod(geometry, params, aod, beta, order):
    # correlation of row channels, E[h^H h]: entry (i, j) carries the
    # conjugate steering of element i against element j
    _check_order(geometry, params.angular_spread, order)
    phis, w = _spread_quadrature(aod, params.angular_spread, order)
    a = steering_matrix(geometry, phis)
    scale = beta / (params.rice_factor + 1.0)
    return scale * ((a.conj() * w[None, :]) @ a.T)


def nlos_factor(geometry, params, aod, beta, order=DEFAULT_NLOS_ORDER) -> np.ndarray:
    """Rectangular factor B with B @ B^H equal to the NLOS correlation.

    Used to draw NLOS components exactly (to quadrature accuracy) without
    an eigendecomposition per draw.
    """
    _check_order(geometry, params.angular_spread, order)
    phis, w = _spread_quadrature(aod, params.angular_spread, order)
    a = steering_matrix(geometry, phis)
    scale = beta / (params.rice_factor + 1.0)
    return np.sqrt(scale) * (a.conj() * np.sqrt(w)[None, :])


@dataclass(frozen=True)
class ChannelStatistics:
    """Second-order description of one link: correlation, factor, (zero) mean.

    ``factor`` satisfies factor^H @ factor == correlation; it is built from
    the eigendecomposition with negative eigenvalues clipped at zero.
    """

    correlation: np.ndarray
    factor: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.correlation)
        scale = max(np.linalg.norm(r), 1.0e-300)
        if r.size and np.linalg.norm(r - r.conj().T) > 1.0e-12 * scale:
            raise ValueError("correlation matrix is not Hermitian")

    @property
    def size(self) -> int:
        return self.correlation.shape[0]

    @classmethod
    def from_correlation(cls, correlation) -> "ChannelStatistics":
        r = np.asarray(correlation, dtype=complex)
        r = 0.5 * (r + r.conj().T)
        if r.size == 0:
            return cls(r, r.copy(), np.zeros(0, dtype=complex))
        w, u = np.linalg.eigh(r)
        tr = float(np.trace(r).real)
        if w.size and w.min() < -1.0e-10 * max(tr, 1.0e-300):
            raise ValueError("correlation matrix is not positive semidefinite")
        factor = np.sqrt(np.clip(w, 0.0, None))[:, None] * u.conj().T
        return cls(r, factor, np.zeros(r.shape[0], dtype=complex))


@dataclass(frozen=True)
class ChannelRealization:
    """One conditional channel draw and the node position it was drawn at."""

    vector: np.ndarray
    conditioning_position: np.ndarray


def position_averaged_stats(geometry, params, region: PositionRegion,
                            samples: int = DEFAULT_REGION_ORDER,
                            aperture=(0.0, 0.0, 0.0),
                            nlos_order=DEFAULT_NLOS_ORDER) -> ChannelStatistics:
    """Correlation matrix averaged over the node position prior.

    Averages ``K/(K+1)*gain*a(aod)a(aod)^H + nlos(aod)`` over `samples`
    Gauss-Legendre nodes on the region arc and factors the result.
    """
    if samples < 1:
        raise GeometryError("samples must be >= 1")
    angles, weights = region.quadrature(samples)
    points = region.points(angles)
    aods, dists = aod_and_distance(points, aperture)
    betas = pathloss_gain(params, dists)
    k = params.rice_factor
    m = geometry.size
    r = np.zeros((m, m), dtype=complex)
    a_all = steering_matrix(geometry, aods)
    los_w = weights * betas * (k / (k + 1.0))
    r += (a_all.conj() * los_w[None, :]) @ a_all.T
    for q in range(angles.size):
        r += weights[q] * _nlos_from_aod(geometry, params, aods[q], betas[q], nlos_order)
    return ChannelStatistics.from_correlation(r)


def conditional_draws(geometry, params, region, angles, rng,
                      aperture=(0.0, 0.0, 0.0), nlos_order=DEFAULT_NLOS_ORDER,
                      chunk=512) -> np.ndarray:
    """Rician channel draws conditioned on given arc angles, one per row.

    Conditioned on each position the channel is the LOS mean plus a
    correlated circular complex Gaussian NLOS term whose covariance matches
    the local-scattering quadrature model exactly (the draw uses the same
    quadrature factor).  Draw order is fixed, so results are reproducible
    for a given generator state.
    """
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    points = region.points(angles)
    aods, dists = aod_and_distance(points, aperture)
    betas = pathloss_gain(params, dists)
    k_factor = params.rice_factor
    _check_order(geometry, params.angular_spread, nlos_order)
    phis_rel, w = _spread_quadrature(0.0, params.angular_spread, nlos_order)
    sqrt_w = np.sqrt(w)
    out = np.empty((n, geometry.size), dtype=complex)
    kx = geometry.wavenumber * geometry.element_x
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        aod_c = aods[lo:hi]
        beta_c = betas[lo:hi]
        # (c, q, m) steering phases for every draw and scattering node
        sin_all = np.sin(aod_c[:, None] + phis_rel[None, :])
        a = np.exp(1j * sin_all[:, :, None] * kx[None, None, :])
        g = rng.standard_normal((hi - lo, nlos_order, 2)) @ np.array([1.0, 1.0j])
        g *= np.sqrt(0.5)
        scale = np.sqrt(beta_c / (k_factor + 1.0))
        nlos = scale[:, None] * np.einsum("cq,cqm->cm", g * sqrt_w[None, :], a)
        los_scale = np.sqrt(beta_c * k_factor / (k_factor + 1.0))
        los = los_scale[:, None] * np.exp(1j * np.sin(aod_c)[:, None] * kx[None, :])
        out[lo:hi] = los + nlos
    return out


def sample_channels(geometry, params, region, n, rng, aperture=(0.0, 0.0, 0.0),
                    nlos_order=DEFAULT_NLOS_ORDER, chunk=512):
    """Draw `n` realizations at positions uniform on the region arc.

    Returns ``(vectors, polar_angles)`` with vectors of shape (n, M).
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    angles = region.sample_angles(rng, n)
    out = conditional_draws(geometry, params, region, angles, rng, aperture,
                            nlos_order, chunk)
    return out, angles


def sample_channel(geometry, params, region, rng, aperture=(0.0, 0.0, 0.0),
                   nlos_order=DEFAULT_NLOS_ORDER) -> ChannelRealization:
    """Draw a single conditional channel realization (seed or Generator accepted)."""
    vectors, angles = sample_channels(geometry, params, region, 1, rng,
                                      aperture, nlos_order)
    return ChannelRealization(vectors[0], region.points(angles[:1])[0])


def _as_matrix(x):
    a = np.asarray(x, dtype=complex)
    return a


def average_power(r_direct, r_reflected, phi, v) -> float:
    """Normalized average received power v^H (R_direct + Phi^H R_reflected Phi) v."""
    rd = _as_matrix(r_direct)
    rr = _as_matrix(r_reflected)
    phi = _as_matrix(phi)
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    if rd.shape != (n, n):
        raise ValueError(f"direct correlation shape {rd.shape} does not match precoder size {n}")
    m = phi.shape[0]
    if phi.shape != (m, n) or rr.shape != (m, m):
        raise ValueError("reflected correlation / cascade dimensions do not conform")
    pv = phi @ v
    return float((v.conj() @ rd @ v).real + (pv.conj() @ rr @ pv).real)


def instantaneous_power(h, t, phi, v) -> float:
    """Instantaneous received power |(h + t Phi) v|^2 for one channel draw."""
    h = np.asarray(h, dtype=complex)
    t = np.asarray(t, dtype=complex)
    phi = _as_matrix(phi)
    v = np.asarray(v, dtype=complex)
    if phi.shape != (t.shape[0], v.shape[0]) or h.shape[0] != v.shape[0]:
        raise ValueError("channel / cascade dimensions do not conform")
    return float(np.abs((h + t @ phi) @ v) ** 2)
