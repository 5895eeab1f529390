"""Multiport reflection models and analytical dipole impedance computation.

Three reflection-matrix models of a reconfigurable surface built from
z-oriented wire dipoles terminated by tunable reactances:

* ``mp``  — full multiport model -2*Y0*(Z_SS + r0*I + j*diag(b))^-1,
  capturing mutual coupling, phase-amplitude interdependence and
  structural scattering;
* ``imp`` — the idealized diagonal special case obtained for
  Z_SS = Z0*I and r0 = 0;
* ``ct``  — the conventional unit-magnitude phase-shifter model
  diag(J0 * exp(j*phase)), equal to the ideal multiport model plus the
  structural offset (Y0/Z0)*I.

Self and mutual impedances are computed with the induced-EMF method for
sinusoidal dipole currents, which covers side-by-side, echelon and
collinear element pairs with one integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import GeometryError, IllConditionedHardwareError, SingularityError
from .geometry import ArrayGeometry

__all__ = [
    "FREE_SPACE_IMPEDANCE",
    "RisHardware",
    "ReactanceVector",
    "dipole_mutual_impedance",
    "dipole_self_impedance",
    "mutual_impedance_matrix",
    "reflection_matrix_mp",
    "reflection_matrix_imp",
    "reflection_matrix_ct",
    "reflection_from_inverse",
    "phase_to_reactance",
    "reactance_to_phase",
    "cascade_matrix",
    "build_hardware",
    "impedance_to_csv",
]

FREE_SPACE_IMPEDANCE = 376.730313668


def _emf_kernel(z, k, half1, rho):
    """Axial E-field shape of a sinusoidal-current dipole at radial distance rho."""
    r1 = np.sqrt(rho * rho + (z - half1) ** 2)
    r2 = np.sqrt(rho * rho + (z + half1) ** 2)
    r0 = np.sqrt(rho * rho + z * z)
    return (np.exp(-1j * k * r1) / r1 + np.exp(-1j * k * r2) / r2
            - 2.0 * np.cos(k * half1) * np.exp(-1j * k * r0) / r0)


def dipole_mutual_impedance(wavelength, length1, length2, separation, offset=0.0,
                            rtol=1.0e-8):
    """Mutual impedance of two parallel z-oriented dipoles, port referred.

    Parameters
    ----------
    wavelength : float
        Carrier wavelength in meters.
    length1, length2 : float
        Full dipole lengths in meters.
    separation : float
        Radial (horizontal) distance between the dipole axes.  For the
        self term pass the wire radius.
    offset : float
        Vertical offset between the dipole centers (echelon/collinear
        placements).
    """
    if separation <= 0.0:
        raise GeometryError("dipole axis separation must be positive")
    k = 2.0 * np.pi / wavelength
    h1, h2 = 0.5 * length1, 0.5 * length2

    def integrand(z, part):
        val = _emf_kernel(z, k, h1, separation) * np.sin(k * (h2 - abs(z - offset)))
        return val.real if part == 0 else val.imag

    total = 0.0 + 0.0j
    # split at the current kink to help the adaptive rule
    for lo, hi in ((offset - h2, offset), (offset, offset + h2)):
        re, _ = quad(integrand, lo, hi, args=(0,), epsabs=1.0e-12, epsrel=rtol, limit=200)
        im, _ = quad(integrand, lo, hi, args=(1,), epsabs=1.0e-12, epsrel=rtol, limit=200)
        total += re + 1j * im
    z_max_referred = 1j * FREE_SPACE_IMPEDANCE / (4.0 * np.pi) * total
    return z_max_referred / (np.sin(k * h1) * np.sin(k * h2))


def dipole_self_impedance(wavelength, length, radius, rtol=1.0e-8):
    """Self impedance of a thin wire dipole (field evaluated on the wire surface)."""
    return dipole_mutual_impedance(wavelength, length, length, radius, 0.0, rtol)


def mutual_impedance_matrix(geometry: ArrayGeometry, rtol=1.0e-8) -> np.ndarray:
    """Self/mutual impedance matrix of an array of identical parallel dipoles.

    Integrals are evaluated once per unique element displacement and the
    matrix is symmetric by construction.
    """
    x, z = geometry.element_x, geometry.element_z
    m = geometry.size
    lam = geometry.wavelength
    length, radius = geometry.dipole_length, geometry.dipole_radius
    cache: dict[tuple, complex] = {}
    out = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            dx = abs(x[i] - x[j])
            dz = abs(z[i] - z[j])
            if i != j and dx == 0.0 and dz == 0.0:
                raise GeometryError(f"elements {i} and {j} are coincident")
            key = (round(dx / lam, 12), round(dz / lam, 12))
            if key not in cache:
                sep = dx if dx > 0.0 else radius
                cache[key] = dipole_mutual_impedance(lam, length, length, sep, dz, rtol)
            out[i, j] = out[j, i] = cache[key]
    return out


@dataclass(frozen=True)
class RisHardware:
    """Impedance description of the reconfigurable surface and its terminations.

    ``model`` selects how reflection matrices are formed: "mp" uses the
    full impedance matrix, "imp" and "ct" the diagonal idealizations
    ("ct" additionally carries the structural offset, folded in through
    ``eta_ct``).
    """

    impedance_matrix: np.ndarray
    parasitic_resistance: float
    reference_impedance: float
    self_impedance_rx: complex
    self_impedance_tx: complex
    model: str = "mp"

    def __post_init__(self):
        z = np.asarray(self.impedance_matrix, dtype=complex)
        object.__setattr__(self, "impedance_matrix", z)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise ValueError("impedance matrix must be square")
        scale = max(np.linalg.norm(z), 1.0e-300)
        if z.size and np.linalg.norm(z - z.T) > 1.0e-10 * scale:
            raise ValueError("impedance matrix must be complex symmetric (reciprocity)")
        if z.size and np.min(np.diag(z).real) < 0.0:
            raise ValueError("diagonal resistances must be non-negative")
        if self.model not in ("mp", "imp", "ct"):
            raise ValueError(f"unknown model kind '{self.model}'")
        if self.model == "mp" and self.parasitic_resistance <= 0.0:
            raise ValueError("parasitic resistance must be positive for the mp model")
        if self.parasitic_resistance < 0.0:
            raise ValueError("parasitic resistance must be non-negative")
        if self.reference_impedance <= 0.0:
            raise ValueError("reference impedance must be positive")

    @property
    def size(self) -> int:
        return self.impedance_matrix.shape[0]

    @property
    def reference_admittance(self) -> complex:
        z0 = self.reference_impedance
        return z0 / ((z0 + self.self_impedance_rx) * (z0 + self.self_impedance_tx))

    @property
    def eta_ct(self) -> float:
        return 1.0 if self.model == "ct" else 0.0

    def idealized(self, model: str) -> "RisHardware":
        """Same terminations on an uncoupled reference-impedance surface."""
        eye = np.eye(self.size, dtype=complex) * self.reference_impedance
        return RisHardware(eye, 0.0, self.reference_impedance,
                           self.self_impedance_rx, self.self_impedance_tx, model)


def phase_to_reactance(phase, z0=50.0):
    """Reactance b with load reflection coefficient exp(j*phase); b = Z0*cot(phase/2)."""
    p = np.asarray(phase, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 2.0 * np.pi):
        raise SingularityError("phase must lie strictly inside (0, 2*pi)")
    out = z0 / np.tan(0.5 * p)
    return out if out.ndim else float(out)


def reactance_to_phase(b, z0=50.0):
    """Inverse of phase_to_reactance; result lies in (0, 2*pi)."""
    b = np.asarray(b, dtype=float)
    out = 2.0 * np.arctan2(z0, b)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ReactanceVector:
    """Tunable termination state: reactances and the matching phases."""

    b: np.ndarray
    phases: np.ndarray
    z0: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float))
        if self.b.shape != self.phases.shape:
            raise ValueError("b and phases must have the same shape")
        if self.b.size and (np.any(self.phases <= 0.0) or np.any(self.phases >= 2.0 * np.pi)):
            raise SingularityError("phases must lie strictly inside (0, 2*pi)")

    @classmethod
    def from_phases(cls, phases, z0=50.0) -> "ReactanceVector":
        phases = np.asarray(phases, dtype=float)
        return cls(phase_to_reactance(phases, z0) if phases.size else phases.copy(),
                   phases, z0)

    @classmethod
    def from_reactances(cls, b, z0=50.0) -> "ReactanceVector":
        b = np.asarray(b, dtype=float)
        return cls(b, reactance_to_phase(b, z0) if b.size else b.copy(), z0)


def _system_matrix(hw: RisHardware, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return (hw.impedance_matrix
            + hw.parasitic_resistance * np.eye(hw.size)
            + 1j * np.diag(b))


def _checked_inverse(x: np.ndarray) -> np.ndarray:
    try:
        inv = np.linalg.inv(x)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedHardwareError(
            "singular impedance system", condition_number=np.inf) from exc
    cond = np.linalg.norm(x, 1) * np.linalg.norm(inv, 1)
    if not np.isfinite(cond) or cond > 1.0e13:
        raise IllConditionedHardwareError(
            f"impedance system is ill-conditioned (condition number ~ {cond:.3e})",
            condition_number=float(cond))
    return inv


def reflection_matrix_mp(hw: RisHardware, b) -> np.ndarray:
    """Full multiport reflection matrix -2*Y0*(Z_SS + r0*I + j*diag(b))^-1."""
    a = _checked_inverse(_system_matrix(hw, b))
    return -2.0 * hw.reference_admittance * a


def reflection_matrix_imp(hw: RisHardware, b) -> np.ndarray:
    """Diagonal ideal multiport reflection: entries -2*Y0/(Z0 + j*b_m)."""
    b = np.asarray(b, dtype=float)
    y0 = hw.reference_admittance
    return np.diag(-2.0 * y0 / (hw.reference_impedance + 1j * b))


def reflection_matrix_ct(hw: RisHardware, phases) -> np.ndarray:
    """Phase-shifter reflection: diagonal entries (Y0/Z0)*exp(j*phase)."""
    phases = np.asarray(phases, dtype=float)
    j0 = hw.reference_admittance / hw.reference_impedance
    return np.diag(j0 * np.exp(1j * phases))


def reflection_from_inverse(hw: RisHardware, a: np.ndarray) -> np.ndarray:
    """Model reflection matrix from a precomputed system inverse.

    For the "ct" model the structural offset is folded in, so the result
    equals reflection_matrix_ct at the matching phases; for "mp"/"imp" it
    is the plain multiport form.
    """
    eta = hw.eta_ct
    if eta:
        a = a - np.eye(hw.size) / (2.0 * hw.reference_impedance)
    return -2.0 * hw.reference_admittance * a


def reflection_matrix(hw: RisHardware, b) -> np.ndarray:
    """Reflection matrix of the hardware's own model kind at reactances b."""
    return reflection_from_inverse(hw, _checked_inverse(_system_matrix(hw, b)))


def cascade_matrix(delta: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Cascade of the reflection matrix with the feed channel: Delta @ S."""
    delta = np.asarray(delta, dtype=complex)
    s = np.asarray(s, dtype=complex)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise ValueError("reflection matrix must be square")
    if s.shape[0] != delta.shape[1]:
        raise ValueError(
            f"feed matrix has {s.shape[0]} rows, reflection matrix is {delta.shape[0]}x{delta.shape[1]}")
    return delta @ s


def build_hardware(geometry: ArrayGeometry, node_geometry: ArrayGeometry | None = None,
                   parasitic_resistance=0.1, reference_impedance=50.0,
                   model="mp", rtol=1.0e-8) -> RisHardware:
    """Hardware description from array geometry via induced-EMF impedances.

    Transmit/receive port self impedances use the node dipole geometry
    (defaults to the surface's own dipole type).
    """
    zss = mutual_impedance_matrix(geometry, rtol)
    node = node_geometry if node_geometry is not None else geometry
    zport = dipole_self_impedance(node.wavelength, node.dipole_length,
                                  node.dipole_radius, rtol)
    return RisHardware(zss, parasitic_resistance, reference_impedance,
                       zport, zport, model)


def impedance_to_csv(hw: RisHardware, path) -> None:
    """Write the impedance matrix as CSV rows `i,j,real,imag` for inspection."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,j,resistance_ohm,reactance_ohm\n")
        z = hw.impedance_matrix
        for i in range(hw.size):
            for j in range(hw.size):
                fh.write(f"{i},{j},{format(z[i, j].real, '.17g')},"
                         f"{format(z[i, j].imag, '.17g')}\n")
