"""Dark-channel centre-of-mass spectrum in the cylindrical harmonic trap.

The trap V = M/2 (omega^2 rho^2 + omega_z^2 (z - z0)^2) confines the atom
near (0, 0, z0) inside patch A, where the wavefunction is
T_m(rho, z) exp(i m phi) and the monopole enters through the effective
centrifugal term F_m(rho, z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Literal

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import DomainError, GridTooCoarse, NonConverged
from .fields import AtomConfig, HarmonicTrap, _cone_terms

Potential = Literal["ApproxF", "ExactF"]
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class TrapSpectrumParams:
    atom: AtomConfig
    trap: HarmonicTrap
    g: int
    m: int = 0
    n_rho: int = 0
    n_z: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.trap, HarmonicTrap):
            raise TypeError("the trap spectrum needs a HarmonicTrap")
        if self.n_rho < 0 or self.n_z < 0:
            raise ValueError("n_rho and n_z must be non-negative")


@dataclass(frozen=True)
class SpectrumResult:
    labels: tuple
    energy: float
    method: Literal["Analytic", "NumericApproxF", "NumericExactF"]
    grid: dict | None = None
    frequency_shift: float | None = None
    zero_point_shift: float | None = None
    extras: dict = field(default_factory=dict)


def f_exact(m: int, g: int, rho, z):
    """Effective centrifugal term (m/rho + g (z - r) / (2 r rho))^2, r = sqrt(rho^2 + z^2)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("f_exact needs rho > 0")
    z = np.asarray(z, dtype=float)
    r, _, r_minus = _cone_terms(rho, 0.0, z)
    return (m / rho - g * r_minus / (2.0 * r * rho)) ** 2


def f_approx(m: int, g: int, rho, z0: float):
    """Truncated Laurent expansion of f_exact about z = z0, up to the rho^2 term."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0) or not z0 > 0:
        raise DomainError("f_approx needs rho > 0 and z0 > 0")
    return m * m / rho**2 + g * g * rho**2 / (16.0 * z0**4) - m * g / (2.0 * z0**2)


def modified_frequency(atom: AtomConfig, trap: HarmonicTrap, g: int) -> float:
    mass = atom.mass_over_hbar
    return math.sqrt(trap.omega**2 + g * g / (16.0 * mass * mass * trap.z0**4))


def zero_point_shift(atom: AtomConfig, trap: HarmonicTrap, g: int, m: int) -> float:
    return -m * g / (4.0 * atom.mass_over_hbar * trap.z0**2)


def spectrum_analytic(p: TrapSpectrumParams) -> SpectrumResult:
    w_t = modified_frequency(p.atom, p.trap, p.g)
    shift = zero_point_shift(p.atom, p.trap, p.g, p.m)
    energy = (2 * p.n_rho + abs(p.m) + 1) * w_t + shift + (p.n_z + 0.5) * p.trap.omega_z
    return SpectrumResult(
        labels=(p.m, p.n_rho, p.n_z),
        energy=energy,
        method="Analytic",
        frequency_shift=w_t - p.trap.omega,
        zero_point_shift=shift,
        extras={"omega_tilde": w_t},
    )


def analytic_levels(atom: AtomConfig, trap: HarmonicTrap, g: int, m: int, count: int) -> list[SpectrumResult]:
    """Lowest ``count`` analytic levels of the m sector, ascending."""
    out = []
    for n_rho in range(count):
        for n_z in range(count):
            out.append(spectrum_analytic(TrapSpectrumParams(atom, trap, g, m, n_rho, n_z)))
    out.sort(key=lambda s: (s.energy, s.labels))
    return out[:count]


def hyp1f1_terminating(n: int, b: float, x):
    """Confluent hypergeometric 1F1(-n; b; x), a degree-n polynomial in x."""
    x = np.asarray(x)
    term = np.ones_like(x, dtype=np.result_type(x, float))
    total = term.copy()
    for k in range(n):
        term = term * (k - n) / ((b + k) * (k + 1)) * x
        total = total + term
    return total


def _radial_factor(p: TrapSpectrumParams, rho):
    lam = p.atom.mass_over_hbar * modified_frequency(p.atom, p.trap, p.g)
    am = abs(p.m)
    return rho**am * np.exp(-0.5 * lam * rho**2) * hyp1f1_terminating(p.n_rho, am + 1, lam * rho**2)


def _axial_factor(p: TrapSpectrumParams, z):
    beta = math.sqrt(p.atom.mass_over_hbar * p.trap.omega_z)
    u = beta * (z - p.trap.z0)
    coeffs = np.zeros(p.n_z + 1)
    coeffs[-1] = 1.0
    return np.exp(-0.5 * u * u) * np.polynomial.hermite.hermval(u, coeffs)


@lru_cache(maxsize=256)
def _normalisation(p: TrapSpectrumParams) -> float:
    lam = p.atom.mass_over_hbar * modified_frequency(p.atom, p.trap, p.g)
    beta = math.sqrt(p.atom.mass_over_hbar * p.trap.omega_z)
    x, w = np.polynomial.legendre.leggauss(200)
    rho_cut = (math.sqrt(2.0 * (2 * p.n_rho + abs(p.m) + 1)) + 10.0) / math.sqrt(lam)
    rho = 0.5 * rho_cut * (x + 1.0)
    radial = 0.5 * rho_cut * np.sum(w * _radial_factor(p, rho) ** 2 * rho) * 2.0 * math.pi
    z_cut = (math.sqrt(2.0 * p.n_z + 1.0) + 10.0) / beta
    z = p.trap.z0 + z_cut * x
    axial = z_cut * np.sum(w * _axial_factor(p, z) ** 2)
    return 1.0 / math.sqrt(radial * axial)


def wavefunction_analytic(p: TrapSpectrumParams, rho, z, phi):
    """Normalised eigenfunction of the approximated problem in patch A.

    The Gaussian widths are set by omega_tilde in rho and omega_z in z, and
    the Hermite factor is centred on the trap minimum z0.
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    phase = np.exp(1j * p.m * np.asarray(phi, dtype=float))
    return _normalisation(p) * phase * _radial_factor(p, rho) * _axial_factor(p, z)


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid for the (rho, z) eigenproblem.

    Extents default to ``extent`` oscillator lengths: 1/sqrt(M omega_tilde) in
    rho, 1/sqrt(M omega_z) either side of z0 in z. Explicit bounds override.
    """

    n_rho: int = 512
    n_z: int = 512
    extent: float = 8.0
    rho_max: float | None = None
    z_min: float | None = None
    z_max: float | None = None

    def resolve(self, atom: AtomConfig, trap: HarmonicTrap, g: int) -> tuple[float, float, float]:
        l_rho = 1.0 / math.sqrt(atom.mass_over_hbar * modified_frequency(atom, trap, g))
        l_z = 1.0 / math.sqrt(atom.mass_over_hbar * trap.omega_z)
        rho_max = self.rho_max if self.rho_max is not None else self.extent * l_rho
        z_min = self.z_min if self.z_min is not None else trap.z0 - self.extent * l_z
        z_max = self.z_max if self.z_max is not None else trap.z0 + self.extent * l_z
        if rho_max < 6 * l_rho * (1 - 1e-12) or min(trap.z0 - z_min, z_max - trap.z0) < 6 * l_z * (1 - 1e-12):
            raise ValueError("grid must extend at least 6 oscillator lengths from the trap centre")
        return rho_max, z_min, z_max

    def coarsened(self) -> "GridSpec":
        return replace(self, n_rho=max(self.n_rho // 2, 8), n_z=max(self.n_z // 2, 8))


def _radial_operator(n: int, rho_max: float):
    """Symmetrised -(1/rho) d/drho (rho d/drho) on a cell-centred grid.

    rho_i = (i - 1/2) h with zero flux through rho = 0 and Dirichlet data at
    rho_max. Conjugating by sqrt(rho_i) (u = sqrt(rho) T) makes the matrix
    symmetric in the plain Euclidean inner product.
    """
    h = rho_max / (n + 0.5)
    rho = (np.arange(1, n + 1) - 0.5) * h
    face_hi = rho + 0.5 * h
    face_lo = rho - 0.5 * h
    diag = (face_hi + face_lo) / (rho * h * h)
    off = -face_hi[:-1] / (h * h * np.sqrt(rho[:-1] * rho[1:]))
    return sp.diags([diag, off, off], [0, 1, -1], format="csr"), rho, h


def _axial_operator(n: int, z_min: float, z_max: float):
    h = (z_max - z_min) / (n + 1)
    z = z_min + h * np.arange(1, n + 1)
    main = np.full(n, 2.0 / (h * h))
    off = np.full(n - 1, -1.0 / (h * h))
    return sp.diags([main, off, off], [0, 1, -1], format="csr"), z, h


def build_hamiltonian(m: int, atom: AtomConfig, trap: HarmonicTrap, g: int, potential: Potential, grid: GridSpec):
    """Sparse symmetric matrix of (1/2M)[-lap_m + F_m] + V on the tensor grid.

    Returns (H, rho, z, metadata); H acts on sqrt(rho) T flattened rho-major.
    """
    rho_max, z_min, z_max = grid.resolve(atom, trap, g)
    radial, rho, h_rho = _radial_operator(grid.n_rho, rho_max)
    axial, z, h_z = _axial_operator(grid.n_z, z_min, z_max)
    rr, zz = np.meshgrid(rho, z, indexing="ij")
    if potential == "ApproxF":
        f = f_approx(m, g, rr, trap.z0)
    elif potential == "ExactF":
        f = f_exact(m, g, rr, zz)
    else:
        raise ValueError(f"unknown potential {potential!r}")
    mass = atom.mass_over_hbar
    v = trap.potential(rr, 0.0, zz, mass)
    pot = f / (2.0 * mass) + v
    kinetic = sp.kron(radial, sp.identity(grid.n_z), format="csr") + sp.kron(
        sp.identity(grid.n_rho), axial, format="csr"
    )
    ham = (kinetic / (2.0 * mass) + sp.diags(pot.ravel())).tocsc()
    meta = {
        "n_rho": grid.n_rho,
        "n_z": grid.n_z,
        "rho_max": rho_max,
        "z_min": z_min,
        "z_max": z_max,
        "h_rho": h_rho,
        "h_z": h_z,
        "potential_min": float(pot.min()),
    }
    return ham, rho, z, meta


def _lowest_eigenpairs(ham, k: int, sigma: float, seed: int):
    n = ham.shape[0]
    lu = sla.splu((ham - sigma * sp.identity(n, format="csc")).tocsc(), permc_spec="MMD_AT_PLUS_A")
    op = sla.LinearOperator(ham.shape, matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        vals, vecs = sla.eigsh(ham, k=k, sigma=sigma, which="LM", OPinv=op, v0=v0, ncv=max(2 * k + 1, 20))
    except sla.ArpackNoConvergence as exc:
        raise NonConverged(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def solve_sector(
    m: int,
    atom: AtomConfig,
    trap: HarmonicTrap,
    g: int,
    potential: Potential,
    grid: GridSpec,
    n_eigs: int,
    seed: int = 0,
):
    """Lowest ``n_eigs`` eigenvalues of one m sector with residual verification.

    The shift sits just below the ground level of a coarse pre-solve; the
    coarse pre-solve itself is shifted to the minimum of the potential, a
    strict lower bound of the spectrum.
    """
    ham, _, _, meta = build_hamiltonian(m, atom, trap, g, potential, grid)
    coarse_grid = replace(grid, n_rho=max(grid.n_rho // 8, 32), n_z=max(grid.n_z // 8, 32))
    coarse, _, _, cmeta = build_hamiltonian(m, atom, trap, g, potential, coarse_grid)
    floor = min(meta["potential_min"], cmeta["potential_min"])
    e_coarse, _ = _lowest_eigenpairs(coarse, 1, floor, seed)
    sigma = e_coarse[0] - 0.05 * (e_coarse[0] - floor)
    vals, vecs = _lowest_eigenpairs(ham, n_eigs, sigma, seed)
    if vals[0] <= sigma:
        raise NonConverged("shift landed above the ground level; spectrum may be incomplete")
    resid = np.linalg.norm(ham @ vecs - vecs * vals, axis=0)
    bad = resid > RESIDUAL_RTOL * np.abs(vals)
    if np.any(bad):
        raise NonConverged(f"eigenpair residuals {resid[bad]} exceed {RESIDUAL_RTOL:g} |lambda|")
    meta = dict(meta, sigma=sigma, residuals=[float(r) for r in resid])
    return vals, meta


def spectrum_numeric(
    m: int,
    params: TrapSpectrumParams,
    potential: Potential = "ApproxF",
    grid: GridSpec | None = None,
    n_eigs: int = 5,
    *,
    seed: int = 0,
    refine_tol: float | None = None,
) -> list[SpectrumResult]:
    """Finite-difference eigenvalues of the m sector, ascending.

    With ``refine_tol`` set, the same sector is also solved on a grid of half
    the resolution; the Richardson estimate of the fine-grid error,
    |E_fine - E_coarse| / 3, must stay below ``refine_tol`` relative.
    """
    grid = grid or GridSpec()
    vals, meta = solve_sector(m, params.atom, params.trap, params.g, potential, grid, n_eigs, seed)
    if refine_tol is not None:
        coarse_vals, _ = solve_sector(m, params.atom, params.trap, params.g, potential, grid.coarsened(), n_eigs, seed)
        est = np.abs(vals - coarse_vals) / 3.0 / np.abs(vals)
        if np.any(est > refine_tol):
            raise GridTooCoarse(f"estimated discretisation error {est.max():.3g} exceeds {refine_tol:g}")
        meta["richardson_error"] = [float(e) for e in est]
    method = "NumericApproxF" if potential == "ApproxF" else "NumericExactF"
    return [
        SpectrumResult(labels=(m, i), energy=float(e), method=method, grid=meta)
        for i, e in enumerate(vals)
    ]
