"""Born-Oppenheimer validity: coupling-to-gap ratio over space.

Both sides use worst-case bounds: the speed is bounded by sqrt(2E/M) and the
trap energy by E, where E = ``atom.energy_scale``. The criterion reads
ratio = coupling_bound / gap_bound <= criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoThreshold, UnsupportedDetuning
from .fields import AtomConfig, BeamConfig


@dataclass(frozen=True)
class AdiabaticReport:
    radius: float
    z: float
    lhs: float
    rhs: float
    ratio: float
    criterion: float

    @property
    def valid(self) -> bool:
        return self.ratio <= self.criterion


@dataclass(frozen=True)
class RegionMap:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    mask: np.ndarray
    criterion: float

    @property
    def valid_fraction(self) -> float:
        return float(np.count_nonzero(self.mask)) / self.mask.size


def coupling_bound(g: int, atom: AtomConfig, r):
    """Upper bound (|g| / r) sqrt(2 E / (M/hbar)) of the dark-bright coupling."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("coupling_bound needs r > 0")
    speed = math.sqrt(2.0 * atom.energy_scale / atom.mass_over_hbar)
    out = abs(g) / r * speed
    return out[()] if out.ndim == 0 else out


def gap_bound(beam: BeamConfig, atom: AtomConfig, r, z):
    """Lower bound (sqrt(4 xi (r + |z|) + E^2) - E) / 2 of the dark-bright gap."""
    if beam.delta != 0:
        raise UnsupportedDetuning("the adiabatic criterion is derived for zero detuning only")
    r = np.asarray(r, dtype=float)
    z = np.abs(np.asarray(z, dtype=float))
    if np.any(r < 0) or np.any(z > r * (1 + 1e-12)):
        raise DomainError("gap_bound needs r >= |z| >= 0")
    e = atom.energy_scale
    a = 4.0 * beam.xi * (r + z)
    # (sqrt(a + e^2) - e) / 2 without cancellation when a << e^2.
    out = 0.5 * a / (np.sqrt(a + e * e) + e)
    out = np.where(a == 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def adiabatic_ratio(beam: BeamConfig, atom: AtomConfig, r, z):
    lhs = np.asarray(coupling_bound(beam.g, atom, r), dtype=float)
    rhs = np.asarray(gap_bound(beam, atom, r, z), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, np.nan))
    # No coupling and no gap: treat as not adiabatic.
    ratio = np.where(np.isnan(ratio), np.inf, ratio)
    return lhs, rhs, ratio


def evaluate(beam: BeamConfig, atom: AtomConfig, r: float, z: float, criterion: float = 1.0) -> AdiabaticReport:
    lhs, rhs, ratio = adiabatic_ratio(beam, atom, r, z)
    return AdiabaticReport(float(r), float(z), float(lhs), float(rhs), float(ratio), criterion)


def threshold_radius(
    beam: BeamConfig,
    atom: AtomConfig,
    direction=(1.0, 0.0, 0.0),
    criterion: float = 1.0,
    *,
    r_min: float = 1e-12,
    r_max: float = 1e6,
    rtol: float = 1e-10,
) -> float:
    """Radius along ``direction`` where the ratio falls to ``criterion``.

    The ratio is strictly decreasing along a ray, so bisection in log r
    brackets a unique crossing.
    """
    if not 0 < criterion <= 1:
        raise ValueError("criterion must lie in (0, 1]")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    cz = abs(float(d[2]))

    def ratio(r):
        return float(adiabatic_ratio(beam, atom, r, cz * r)[2])

    if ratio(r_min) < criterion:
        raise NoThreshold(f"ratio is already below {criterion:g} at r = {r_min:g} m")
    if not ratio(r_max) < criterion:
        raise NoThreshold(f"ratio stays above {criterion:g} out to r = {r_max:g} m")
    lo, hi = math.log(r_min), math.log(r_max)
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if ratio(math.exp(mid)) >= criterion:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


@dataclass(frozen=True)
class CubeGrid:
    """Uniform Cartesian grid over [-half_width, half_width]^3 (cell centres)."""

    half_width: float
    n: int = 41

    def axes(self) -> np.ndarray:
        edges = np.linspace(-self.half_width, self.half_width, self.n + 1)
        return 0.5 * (edges[1:] + edges[:-1])


def region_map(beam: BeamConfig, atom: AtomConfig, grid: CubeGrid, criterion: float = 1.0) -> RegionMap:
    """Elementwise ratio on the grid and the mask of cells where it is <= criterion."""
    ax = grid.axes()
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    safe_r = np.where(r > 0, r, 1.0)
    lhs, rhs, ratio = adiabatic_ratio(beam, atom, safe_r, z)
    ratio = np.where(r > 0, ratio, np.inf)
    lhs = np.where(r > 0, lhs, np.inf)
    mask = ratio <= criterion
    return RegionMap(x, y, z, lhs, rhs, ratio, mask, criterion)
