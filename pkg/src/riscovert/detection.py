"""Radiometer detection at the warden under bounded noise-power uncertainty.

The warden compares received power against a threshold without knowing its
own noise floor exactly: the noise power is log-uniform on
``[reference_noise/rho, reference_noise*rho]``.  This module provides the
noise pdf/cdf, the detection error probability (false alarm plus missed
detection), the optimal threshold and minimum DEP, the linear lower-bound
approximation, the average DEP seen from the transmitter side, and the
covert received-power budget implied by an average-DEP floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WillieDetector",
    "noise_pdf",
    "noise_cdf",
    "dep",
    "optimal_threshold",
    "min_dep",
    "approx_min_dep",
    "average_dep",
    "covert_budget",
]

# coefficient of the linearized DEP; 0.5 keeps the pointwise approximation's
# constant when averaging (see average_dep)
DEP_COEFFICIENT = 0.5


@dataclass(frozen=True)
class WillieDetector:
    """Warden model: noise uncertainty, reference noise power, covertness slack."""

    uncertainty: float
    reference_noise: float
    covert_slack: float = 0.05

    def __post_init__(self):
        if self.uncertainty < 1.0:
            raise ValueError("uncertainty coefficient must be >= 1")
        if self.reference_noise <= 0.0:
            raise ValueError("reference noise power must be positive")
        if not (0.0 < self.covert_slack < 1.0):
            raise ValueError("covert_slack must lie in (0, 1)")


def noise_pdf(x, det: WillieDetector):
    """Density of the warden's noise power under the bounded uncertainty model."""
    x = np.asarray(x, dtype=float)
    rho, s2 = det.uncertainty, det.reference_noise
    if rho == 1.0:
        raise ValueError("rho = 1 is a point mass; the density is not defined")
    inside = (x >= s2 / rho) & (x <= s2 * rho)
    out = np.zeros_like(x)
    out[inside] = 1.0 / (2.0 * x[inside] * np.log(rho))
    return out if out.ndim else float(out)


def noise_cdf(x, det: WillieDetector):
    """Distribution function of the warden's noise power (step function at rho=1)."""
    x = np.asarray(x, dtype=float)
    rho, s2 = det.uncertainty, det.reference_noise
    if rho == 1.0:
        out = (x >= s2).astype(float)
        return out if out.ndim else float(out)
    out = np.zeros_like(x)
    hi = x >= s2 * rho
    mid = (x > s2 / rho) & ~hi
    out[hi] = 1.0
    out[mid] = np.log(x[mid] * rho / s2) / (2.0 * np.log(rho))
    return out if out.ndim else float(out)


def dep(threshold, received, det: WillieDetector):
    """Detection error probability at a threshold for a given received power.

    ``received`` is the warden-side signal power (transmit power times the
    warden channel gain).  Equal hypothesis priors; the value is the sum of
    the false-alarm and missed-detection probabilities.
    """
    threshold = np.asarray(threshold, dtype=float)
    received = np.asarray(received, dtype=float)
    return 1.0 - noise_cdf(threshold, det) + noise_cdf(threshold - received, det)


def optimal_threshold(received, det: WillieDetector):
    """Threshold minimizing the DEP: min(received + noise/rho, noise*rho)."""
    received = np.asarray(received, dtype=float)
    rho, s2 = det.uncertainty, det.reference_noise
    out = np.minimum(received + s2 / rho, s2 * rho)
    return out if out.ndim else float(out)


def min_dep(received, det: WillieDetector):
    """Minimum DEP over thresholds for a given warden received power."""
    received = np.asarray(received, dtype=float)
    rho, s2 = det.uncertainty, det.reference_noise
    if rho == 1.0:
        out = (received <= 0.0).astype(float)
        return out if out.ndim else float(out)
    edge = s2 * (rho - 1.0 / rho)
    out = np.zeros_like(received)
    low = received <= edge
    out[low] = 1.0 - 0.5 * np.log1p(rho * received[low] / s2) / np.log(rho)
    return out if out.ndim else float(out)


def approx_min_dep(received, det: WillieDetector):
    """Linearized minimum DEP, a lower bound wherever the exact value is positive."""
    received = np.asarray(received, dtype=float)
    rho, s2 = det.uncertainty, det.reference_noise
    if rho == 1.0:
        out = np.where(received <= 0.0, 1.0, -np.inf)
        return out if out.ndim else float(out)
    out = 1.0 - rho * received / (2.0 * s2 * np.log(rho))
    return out if out.ndim else float(out)


def average_dep(p_a, p_w, det: WillieDetector, coefficient=DEP_COEFFICIENT):
    """Average DEP model from transmit power and average warden channel power.

    The expectation of the linearized minimum DEP over warden channel
    draws; the linearization coefficient is exposed because regrouping the
    average drops a factor of two in some conventions.
    """
    rho, s2 = det.uncertainty, det.reference_noise
    if rho == 1.0:
        return 1.0 if p_a * p_w <= 0.0 else 0.0
    return 1.0 - coefficient * rho * p_a * p_w / (s2 * np.log(rho))


def covert_budget(det: WillieDetector, coefficient=DEP_COEFFICIENT) -> float:
    """Cap on average warden-received power keeping the average DEP above 1 - slack.

    Setting average_dep >= 1 - covert_slack and solving for p_a * p_w gives
    ``covert_slack * reference_noise * ln(rho) / (coefficient * rho)``;
    with the default coefficient this is 2*slack*noise*ln(rho)/rho.
    """
    rho, s2 = det.uncertainty, det.reference_noise
    return det.covert_slack * s2 * np.log(rho) / (coefficient * rho)
