"""Array layouts, propagation parameters and node position regions.

Angle conventions used throughout the library:

* steering angles ("aod") are measured from array broadside, so the
  steering phase of an element at ``x`` toward angle ``a`` is
  ``(2*pi/wavelength) * x * sin(a)``;
* scene angles (node placement) are polar angles in the horizontal plane
  measured from the array axis (the x axis).  The two are related by
  ``aod = pi/2 - polar``.

Arrays are planar, with elements laid out along x (columns) and z (rows).
Departure angles are scalars: the planar-geometry assumption keeps
elevation out of the phase model, so heights enter only through the 3-D
distances used for path loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

__all__ = [
    "ArrayGeometry",
    "PropagationParams",
    "PositionRegion",
    "broadside_angle",
    "aod_and_distance",
]


def broadside_angle(polar):
    """Convert a polar scene angle (from the array axis) to a broadside steering angle."""
    return np.pi / 2.0 - np.asarray(polar, dtype=float)


@dataclass(frozen=True)
class ArrayGeometry:
    """Element coordinates and dipole dimensions of one antenna aperture.

    Parameters
    ----------
    element_x, element_z : array_like
        Per-element coordinates in meters along the array axis (x) and the
        vertical (z).  Both have one entry per element.
    wavelength : float
        Carrier wavelength in meters.
    rows, cols : int
        Grid shape; ``rows * cols`` must equal the element count.
    dipole_length, dipole_radius : float
        Dimensions of the identical z-oriented wire dipoles, in meters.
    """

    element_x: np.ndarray
    element_z: np.ndarray
    wavelength: float
    rows: int
    cols: int
    dipole_length: float
    dipole_radius: float

    def __post_init__(self):
        object.__setattr__(self, "element_x", np.asarray(self.element_x, dtype=float))
        object.__setattr__(self, "element_z", np.asarray(self.element_z, dtype=float))
        n = self.element_x.size
        if n != self.element_z.size:
            raise GeometryError("element_x and element_z must have the same length")
        if n < 1 or n != self.rows * self.cols:
            raise GeometryError(
                f"element count {n} does not match rows*cols = {self.rows * self.cols}"
            )
        if self.wavelength <= 0:
            raise GeometryError("wavelength must be positive")
        if self.dipole_length <= 0 or self.dipole_radius <= 0:
            raise GeometryError("dipole dimensions must be positive")
        if self.dipole_radius >= self.dipole_length:
            raise GeometryError("dipole radius must be smaller than its length")

    @property
    def size(self) -> int:
        return self.element_x.size

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @classmethod
    def uniform_planar(cls, rows, cols, spacing_x, spacing_z, wavelength,
                       dipole_length, dipole_radius):
        """Centered uniform planar array: `cols` elements along x, `rows` along z."""
        x = (np.arange(cols) - (cols - 1) / 2.0) * spacing_x
        z = (np.arange(rows) - (rows - 1) / 2.0) * spacing_z
        xx = np.repeat(x, rows)
        zz = np.tile(z, cols)
        return cls(xx, zz, wavelength, rows, cols, dipole_length, dipole_radius)


@dataclass(frozen=True)
class PropagationParams:
    """Rician-fading parameters of one link family.

    ``reference_gain`` is the linear power gain at 1 m; the channel gain at
    distance d is ``reference_gain * d**(-pathloss_exponent)``.
    """

    rice_factor: float
    pathloss_exponent: float
    angular_spread: float
    reference_gain: float

    def __post_init__(self):
        if self.rice_factor < 0:
            raise ValueError("rice_factor must be >= 0")
        if not (0.0 < self.angular_spread <= 2.0 * np.pi):
            raise ValueError("angular_spread must be in (0, 2*pi]")
        if self.pathloss_exponent < 1.0:
            raise ValueError("pathloss_exponent must be >= 1")
        if self.reference_gain <= 0:
            raise ValueError("reference_gain must be positive")


@dataclass(frozen=True)
class PositionRegion:
    """Uniform-on-arc position prior of a single-antenna node.

    The arc is centered on the origin of the scene (where the reflecting
    aperture sits): polar angle uniform on
    ``[center_angle - angular_halfwidth, center_angle + angular_halfwidth]``
    at fixed horizontal ``distance`` and fixed ``height``.  A halfwidth of
    zero is a point mass.
    """

    center_angle: float
    angular_halfwidth: float
    distance: float
    height: float = 0.0

    def __post_init__(self):
        if self.angular_halfwidth < 0:
            raise GeometryError("angular_halfwidth must be >= 0")
        if self.distance <= 0:
            raise GeometryError("region distance must be positive")

    def points(self, polar_angles) -> np.ndarray:
        """Cartesian positions (n, 3) of arc points at the given polar angles."""
        a = np.atleast_1d(np.asarray(polar_angles, dtype=float))
        return np.stack(
            [self.distance * np.cos(a),
             self.distance * np.sin(a),
             np.full_like(a, self.height)],
            axis=-1,
        )

    def quadrature(self, order: int):
        """Gauss-Legendre nodes and weights for averaging over the arc.

        Returns ``(polar_angles, weights)`` with weights summing to one
        (uniform density on the arc).  A zero halfwidth collapses to a
        single node of weight one.
        """
        if order < 1:
            raise GeometryError("quadrature order must be >= 1")
        if self.angular_halfwidth == 0.0:
            return np.array([self.center_angle]), np.array([1.0])
        u, w = np.polynomial.legendre.leggauss(order)
        angles = self.center_angle + self.angular_halfwidth * u
        return angles, w / 2.0

    def sample_angles(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw polar angles uniformly on the arc."""
        lo = self.center_angle - self.angular_halfwidth
        hi = self.center_angle + self.angular_halfwidth
        if lo == hi:
            return np.full(size, lo)
        return rng.uniform(lo, hi, size)


def aod_and_distance(points, aperture):
    """Broadside departure angles and 3-D distances from an aperture to points.

    Parameters
    ----------
    points : array_like, shape (n, 3) or (3,)
        Target positions.
    aperture : array_like, shape (3,)
        Aperture reference position.

    Returns
    -------
    aod : ndarray
        Broadside steering angles (radians) of the horizontal departure
        directions.
    distance : ndarray
        Full 3-D distances in meters.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    ap = np.asarray(aperture, dtype=float)
    d = p - ap[None, :]
    dist = np.linalg.norm(d, axis=-1)
    if np.any(dist <= 0.0):
        raise GeometryError("aperture coincides with a target position")
    polar = np.arctan2(d[:, 1], d[:, 0])
    return broadside_angle(polar), dist
