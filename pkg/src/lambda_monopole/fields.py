"""Shaped Rabi fields, trap potentials and the local three-level eigenproblem.

Units follow the hbar = 1 convention: every energy is an angular frequency
(rad/s), lengths are metres and the mass enters as M/hbar (s/m^2).

The internal basis is ordered (|1>, |2>, |e>).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .constants import HBAR
from .errors import DegeneratePoint, PatchBoundary

Patch = Literal["A", "B"]

DEFAULT_R_MIN = 1e-9
DEFAULT_OVERLAP = math.pi / 12


@dataclass(frozen=True)
class BeamConfig:
    """Probe/control beam shaping.

    ``|Omega_p|^2 = xi (r + z)`` and ``|Omega_c|^2 = xi ((2 eta - 1) r - z)``;
    the probe carries the winding ``exp(i g phi)`` and both beams share the
    propagation phase ``exp(i k z)``.
    """

    xi: float
    g: int
    eta: float = 1.0
    k: float = 0.0
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not self.xi >= 0:
            raise ValueError(f"xi must be non-negative, got {self.xi!r}")
        if not self.eta >= 1:
            raise ValueError(f"eta must be >= 1, got {self.eta!r}")
        if isinstance(self.g, bool) or int(self.g) != self.g:
            raise ValueError(f"g must be an integer, got {self.g!r}")
        object.__setattr__(self, "g", int(self.g))


@dataclass(frozen=True)
class AtomConfig:
    mass_over_hbar: float
    energy_scale: float = 0.0

    def __post_init__(self) -> None:
        if not self.mass_over_hbar > 0:
            raise ValueError("mass_over_hbar must be positive")
        if not self.energy_scale >= 0:
            raise ValueError("energy_scale must be non-negative")

    @classmethod
    def from_si(cls, mass_kg: float, energy_joule: float = 0.0) -> "AtomConfig":
        return cls(mass_over_hbar=mass_kg / HBAR, energy_scale=energy_joule / HBAR)


@dataclass(frozen=True)
class NoTrap:
    def potential(self, x, y, z, mass_over_hbar: float | None = None):
        return np.zeros(np.broadcast(x, y, z).shape)[()]


@dataclass(frozen=True)
class SphericalTrap:
    """Radial potential V(r) given as a table (rad/s vs m), linearly interpolated."""

    radii: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be a strictly increasing table of >= 2 points")
        if len(self.values) != r.size:
            raise ValueError("radii and values must have equal length")
        object.__setattr__(self, "radii", tuple(float(v) for v in self.radii))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def potential(self, x, y, z, mass_over_hbar: float | None = None):
        r = np.sqrt(np.asarray(x) ** 2 + np.asarray(y) ** 2 + np.asarray(z) ** 2)
        return np.interp(r, self.radii, self.values)[()]


@dataclass(frozen=True)
class HarmonicTrap:
    omega: float
    omega_z: float
    z0: float

    def __post_init__(self) -> None:
        if not (self.omega > 0 and self.omega_z > 0 and self.z0 > 0):
            raise ValueError("harmonic trap needs omega, omega_z, z0 > 0")

    def potential(self, x, y, z, mass_over_hbar: float | None = None):
        if mass_over_hbar is None:
            raise ValueError("the harmonic trap potential needs the atomic mass")
        rho2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
        dz = np.asarray(z) - self.z0
        return 0.5 * mass_over_hbar * (self.omega**2 * rho2 + self.omega_z**2 * dz**2)


TrapConfig = Union[NoTrap, SphericalTrap, HarmonicTrap]


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float

    @classmethod
    def spherical(cls, r: float, theta: float, phi: float) -> "Position":
        s = math.sin(theta)
        return cls(r * s * math.cos(phi), r * s * math.sin(phi), r * math.cos(theta))

    @classmethod
    def cylindrical(cls, rho: float, phi: float, z: float) -> "Position":
        return cls(rho * math.cos(phi), rho * math.sin(phi), z)

    @property
    def r(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    @property
    def rho(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def theta(self) -> float:
        return math.atan2(self.rho, self.z)

    @property
    def phi(self) -> float:
        if self.x == 0 and self.y == 0:
            return 0.0
        return math.atan2(self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def _as_position(pos) -> Position:
    if isinstance(pos, Position):
        return pos
    x, y, z = (float(c) for c in pos)
    return Position(x, y, z)


def azimuth(x, y):
    """Azimuthal angle in (-pi, pi], with phi = 0 on the z axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    on_axis = (x == 0) & (y == 0)
    return np.where(on_axis, 0.0, np.arctan2(y, np.where(on_axis, 1.0, x)))


def _cone_terms(x, y, z):
    """Return (r, r + z, r - z) with the cancellation-free branch near the axis."""
    x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
    rho2 = x * x + y * y
    r = np.sqrt(rho2 + z * z)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_plus = np.where(z >= 0, r + z, rho2 / (r - z))
        r_minus = np.where(z <= 0, r - z, rho2 / (r + z))
    r_plus = np.where(r == 0, 0.0, r_plus)
    r_minus = np.where(r == 0, 0.0, r_minus)
    return r, r_plus, r_minus


def rabi_amplitudes(beam: BeamConfig, x, y, z):
    """Moduli (|Omega_p|, |Omega_c|) on arrays of Cartesian coordinates."""
    r, r_plus, r_minus = _cone_terms(x, y, z)
    amp_p = np.sqrt(beam.xi * r_plus)
    amp_c = np.sqrt(beam.xi * (2.0 * (beam.eta - 1.0) * r + r_minus))
    return amp_p, amp_c


def rabi_at(beam: BeamConfig, pos) -> tuple[complex, complex]:
    """Complex Rabi frequencies (Omega_p, Omega_c) at a point."""
    p = _as_position(pos)
    amp_p, amp_c = (float(a) for a in rabi_amplitudes(beam, p.x, p.y, p.z))
    phase_c = beam.k * p.z
    omega_p = amp_p * complex(math.cos(phase_c + beam.g * p.phi), math.sin(phase_c + beam.g * p.phi))
    omega_c = amp_c * complex(math.cos(phase_c), math.sin(phase_c))
    return omega_p, omega_c


def trap_potential(trap: TrapConfig | None, pos, atom: AtomConfig | None = None) -> float:
    if trap is None:
        return 0.0
    p = _as_position(pos)
    mass = atom.mass_over_hbar if atom is not None else None
    return float(trap.potential(p.x, p.y, p.z, mass))


def local_hamiltonian(
    beam: BeamConfig,
    pos,
    trap: TrapConfig | None = None,
    atom: AtomConfig | None = None,
) -> np.ndarray:
    """Internal 3x3 Hamiltonian with V_1 = V_2 = V and V_e = 0."""
    omega_p, omega_c = rabi_at(beam, pos)
    v = trap_potential(trap, pos, atom)
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = h[1, 1] = v
    h[2, 2] = beam.delta
    h[2, 0] = omega_p
    h[2, 1] = omega_c
    h[0, 2] = np.conj(omega_p)
    h[1, 2] = np.conj(omega_c)
    return h


def bright_energies(omega_sq, v, delta):
    """Closed-form (E_+, E_-) for coupling strength Omega^2, trap V and detuning Delta.

    Uses the product of roots for the smaller-magnitude root so neither branch
    suffers cancellation when the local detuning dominates the coupling.
    """
    omega_sq = np.asarray(omega_sq, dtype=float)
    dt = np.asarray(delta, dtype=float) - v
    s = np.sqrt(4.0 * omega_sq + dt * dt)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(dt >= 0, 0.5 * (dt + s), np.where(s - dt > 0, 2.0 * omega_sq / (s - dt), 0.0))
        dn = np.where(dt >= 0, np.where(dt + s > 0, -2.0 * omega_sq / (dt + s), 0.0), 0.5 * (dt - s))
    return up + v, dn + v


def in_patch(theta, patch: Patch, overlap: float = DEFAULT_OVERLAP):
    """Patch membership: A covers theta < pi/2 + overlap, B covers theta > pi/2 - overlap."""
    theta = np.asarray(theta, dtype=float)
    if patch == "A":
        return theta < 0.5 * math.pi + overlap
    if patch == "B":
        return theta > 0.5 * math.pi - overlap
    raise ValueError(f"unknown patch {patch!r}")


def dark_section(beam: BeamConfig, x, y, z, patch: Patch, keep_beam_phase: bool = False) -> np.ndarray:
    """Patch-fixed dark state on arrays of points, shape (..., 3).

    Patch B removes the common beam phase k z; patch A additionally removes the
    winding g phi / eta, so that for eta = 1 the two sections differ by
    exp(i g phi). With ``keep_beam_phase`` the factor exp(i k z) is restored,
    which adds the pure-gauge term k e_z to the connection.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (x, y, z)))
    amp_p, amp_c = rabi_amplitudes(beam, x, y, z)
    omega = np.sqrt(amp_p**2 + amp_c**2)
    phi = azimuth(x, y)
    out = np.zeros(x.shape + (3,), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = -amp_c / omega
        c2 = amp_p / omega
    if patch == "B":
        out[..., 0] = c1
        out[..., 1] = c2 * np.exp(1j * beam.g * phi)
    elif patch == "A":
        w = beam.g / beam.eta
        out[..., 0] = c1 * np.exp(-1j * w * phi)
        out[..., 1] = c2 * np.exp(1j * (beam.g - w) * phi)
    else:
        raise ValueError(f"unknown patch {patch!r}")
    if keep_beam_phase and beam.k != 0:
        out *= np.exp(1j * beam.k * z)[..., None]
    return out


@dataclass(frozen=True)
class EigenFrame:
    e0: float
    e_plus: float
    e_minus: float
    dark: np.ndarray = field(repr=False)
    gap_plus: float
    gap_minus: float
    patch: Patch
    hamiltonian: np.ndarray = field(repr=False)


def eigensystem(
    beam: BeamConfig,
    pos,
    trap: TrapConfig | None = None,
    atom: AtomConfig | None = None,
    patch: Patch = "A",
    *,
    r_min: float = DEFAULT_R_MIN,
    overlap: float = DEFAULT_OVERLAP,
    keep_beam_phase: bool = False,
) -> EigenFrame:
    """Closed-form eigen-decomposition of the internal Hamiltonian at ``pos``.

    Raises DegeneratePoint inside the exclusion ball or wherever the total
    coupling vanishes, and PatchBoundary if ``pos`` is outside ``patch``.
    """
    p = _as_position(pos)
    if p.r < r_min:
        raise DegeneratePoint(f"r = {p.r:g} m lies inside the exclusion ball r_min = {r_min:g} m")
    if not in_patch(p.theta, patch, overlap):
        raise PatchBoundary(f"theta = {p.theta:.6g} is outside patch {patch}")
    amp_p, amp_c = (float(a) for a in rabi_amplitudes(beam, p.x, p.y, p.z))
    omega_sq = amp_p**2 + amp_c**2
    if omega_sq == 0:
        raise DegeneratePoint("total Rabi coupling vanishes; the dark state is not isolated")
    v = trap_potential(trap, p, atom)
    e_plus, e_minus = (float(e) for e in bright_energies(omega_sq, v, beam.delta))
    dark = dark_section(beam, p.x, p.y, p.z, patch, keep_beam_phase)
    return EigenFrame(
        e0=v,
        e_plus=e_plus,
        e_minus=e_minus,
        dark=dark,
        gap_plus=e_plus - v,
        gap_minus=v - e_minus,
        patch=patch,
        hamiltonian=local_hamiltonian(beam, p, trap, atom),
    )
