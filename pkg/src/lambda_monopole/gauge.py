"""Induced gauge potential of the dark state, its curvature and monopole flux.

Vectors are returned in Cartesian components (x, y, z). The connection of a
section |D> is A = -i <D| grad |D>; its curl is the curvature B. With the
outward normal the flux of B through a sphere around the origin is
-2 pi g / eta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegeneratePoint, NumericalError, OnAxisSingular, PatchBoundary
from .fields import (
    DEFAULT_OVERLAP,
    DEFAULT_R_MIN,
    BeamConfig,
    Patch,
    Position,
    _as_position,
    _cone_terms,
    azimuth,
    dark_section,
    in_patch,
)

IMAG_RESIDUE_TOL = 1e-8


class Quantization(enum.Enum):
    QUANTIZED = "Quantized"
    NOT_QUANTIZED = "NotQuantized"


@dataclass(frozen=True)
class GaugeSample:
    position: Position
    a_vec: np.ndarray
    patch: Patch
    kind: Literal["Connection", "Curvature"]


@dataclass(frozen=True)
class FluxReport:
    radius: float
    flux: float
    chern: float
    quadrature_order: int
    estimated_error: float


def quantization_check(g: int, eta: float) -> Quantization:
    """Single-valuedness of the transition function exp(-i g phi / eta)."""
    w = g / eta
    if abs(w - round(w)) <= 1e-12:
        return Quantization.QUANTIZED
    return Quantization.NOT_QUANTIZED


def _connection_arrays(beam: BeamConfig, x, y, z, patch: Patch, include_kz: bool) -> np.ndarray:
    r, r_plus, r_minus = _cone_terms(x, y, z)
    w = beam.g / beam.eta
    with np.errstate(divide="ignore", invalid="ignore"):
        if patch == "A":
            coef = np.where(r_plus > 0, -w / (2.0 * r * r_plus), np.inf)
        else:
            coef = np.where(r_minus > 0, w / (2.0 * r * r_minus), np.inf)
    if w == 0:
        coef = np.zeros_like(r)
    out = np.stack([-coef * np.asarray(y, float), coef * np.asarray(x, float), np.zeros_like(r)], axis=-1)
    if include_kz:
        out[..., 2] += beam.k
    return out


def connection_analytic(
    beam: BeamConfig,
    pos,
    patch: Patch,
    include_kz: bool = False,
    *,
    r_min: float = DEFAULT_R_MIN,
) -> np.ndarray:
    """Closed-form patch connection, optionally with the pure-gauge term k e_z.

    Patch A: -g (1 - cos theta) / (2 eta r sin theta) e_phi, regular on the north axis.
    Patch B:  g (1 + cos theta) / (2 eta r sin theta) e_phi, regular on the south axis.
    """
    p = _as_position(pos)
    if p.r < r_min:
        raise DegeneratePoint(f"r = {p.r:g} m lies inside the exclusion ball")
    if p.rho == 0 and beam.g != 0:
        if (patch == "A" and p.z < 0) or (patch == "B" and p.z > 0):
            raise OnAxisSingular(f"patch {patch} connection is singular at theta = {p.theta:g}")
    return _connection_arrays(beam, p.x, p.y, p.z, patch, include_kz)


def default_step(beam: BeamConfig, r, include_kz: bool):
    """Finite-difference step: 1e-4 of the shortest length scale (r, or 1/k with the beam phase)."""
    r = np.asarray(r, dtype=float)
    if include_kz and beam.k != 0:
        return 1e-4 * np.minimum(r, 1.0 / abs(beam.k))
    return 1e-4 * r


_AXES = np.eye(3)


def _check_stencil(beam: BeamConfig, pts: np.ndarray, h: np.ndarray, patch: Patch, overlap: float, r_min: float):
    stencil = pts[:, None, :] + h[:, None, None] * np.concatenate([_AXES, -_AXES])[None, :, :]
    x, y, z = stencil[..., 0], stencil[..., 1], stencil[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    if np.any(r < r_min):
        raise DegeneratePoint("finite-difference stencil enters the exclusion ball")
    theta = np.arctan2(np.hypot(x, y), z)
    if not np.all(in_patch(theta, patch, overlap)):
        raise PatchBoundary(f"finite-difference stencil leaves patch {patch}")
    if patch == "A" and quantization_check(beam.g, beam.eta) is Quantization.NOT_QUANTIZED:
        phi0 = azimuth(pts[:, 0], pts[:, 1])[:, None]
        if np.any(np.abs(azimuth(x, y) - phi0) > 0.5 * math.pi):
            raise PatchBoundary("stencil straddles the branch cut of the non-single-valued section")


def _fd_connection(beam: BeamConfig, pts: np.ndarray, h: np.ndarray, patch: Patch, keep: bool) -> np.ndarray:
    """Complex -i <D|grad D> by central differences; shape (N, 3)."""
    d0 = dark_section(beam, pts[:, 0], pts[:, 1], pts[:, 2], patch, keep)
    out = np.empty((pts.shape[0], 3), dtype=complex)
    for j in range(3):
        shift = h[:, None] * _AXES[j]
        fwd = pts + shift
        bwd = pts - shift
        dp = dark_section(beam, fwd[:, 0], fwd[:, 1], fwd[:, 2], patch, keep)
        dm = dark_section(beam, bwd[:, 0], bwd[:, 1], bwd[:, 2], patch, keep)
        deriv = (dp - dm) / (2.0 * h[:, None])
        out[:, j] = -1j * np.sum(np.conj(d0) * deriv, axis=-1)
    return out


def connection_numeric_arrays(
    beam: BeamConfig,
    pts,
    patch: Patch,
    h=None,
    include_kz: bool = False,
    richardson: bool = True,
    *,
    overlap: float = DEFAULT_OVERLAP,
    r_min: float = DEFAULT_R_MIN,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised numeric connection for points of shape (N, 3).

    Returns the real connection (N, 3) and the imaginary residue of
    -i <D|grad D> relative to max(|A|, 1/r).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.linalg.norm(pts, axis=-1)
    h = default_step(beam, r, include_kz) if h is None else np.broadcast_to(np.asarray(h, float), r.shape).copy()
    _check_stencil(beam, pts, h, patch, overlap, r_min)
    val = _fd_connection(beam, pts, h, patch, include_kz)
    if richardson:
        half = _fd_connection(beam, pts, 0.5 * h, patch, include_kz)
        val = (4.0 * half - val) / 3.0
    a = val.real
    scale = np.maximum(np.linalg.norm(a, axis=-1), 1.0 / r)
    residue = np.linalg.norm(val.imag, axis=-1) / scale
    return a, residue


def connection_numeric(
    beam: BeamConfig,
    pos,
    patch: Patch,
    h: float | None = None,
    include_kz: bool = False,
    richardson: bool = True,
    *,
    overlap: float = DEFAULT_OVERLAP,
    r_min: float = DEFAULT_R_MIN,
) -> np.ndarray:
    """Central-difference estimate of -i <D|grad D> for the patch-fixed dark section.

    ``include_kz`` keeps the common beam phase exp(i k z) in the section, so the
    result carries the pure-gauge term k e_z. One Richardson level over
    (h, h/2) is applied unless ``richardson`` is false.
    """
    p = _as_position(pos)
    a, residue = connection_numeric_arrays(
        beam, p.as_array()[None, :], patch, h, include_kz, richardson, overlap=overlap, r_min=r_min
    )
    if residue[0] > IMAG_RESIDUE_TOL:
        raise NumericalError(f"connection has imaginary residue {residue[0]:.3g}; step too coarse")
    return a[0]


def _analytic_curvature_arrays(beam: BeamConfig, pts: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(pts, axis=-1)
    coef = -beam.g / (2.0 * beam.eta * r**3)
    return coef[:, None] * pts


def _numeric_curvature_arrays(beam: BeamConfig, pts: np.ndarray, outer: float, r_min: float) -> np.ndarray:
    r = np.linalg.norm(pts, axis=-1)
    theta = np.arctan2(np.hypot(pts[:, 0], pts[:, 1]), pts[:, 2])
    out = np.empty_like(pts)
    for patch, sel in (("A", theta < 0.5 * math.pi), ("B", theta >= 0.5 * math.pi)):
        if not np.any(sel):
            continue
        sub = pts[sel]
        H = outer * r[sel]

        def curl(step):
            jac = np.empty((sub.shape[0], 3, 3))  # jac[:, i, j] = d A_i / d x_j
            for j in range(3):
                fwd = sub + step[:, None] * _AXES[j]
                bwd = sub - step[:, None] * _AXES[j]
                a_f, _ = connection_numeric_arrays(beam, fwd, patch, r_min=r_min)
                a_b, _ = connection_numeric_arrays(beam, bwd, patch, r_min=r_min)
                jac[:, :, j] = (a_f - a_b) / (2.0 * step[:, None])
            return np.stack(
                [
                    jac[:, 2, 1] - jac[:, 1, 2],
                    jac[:, 0, 2] - jac[:, 2, 0],
                    jac[:, 1, 0] - jac[:, 0, 1],
                ],
                axis=-1,
            )

        out[sel] = (4.0 * curl(0.5 * H) - curl(H)) / 3.0
    return out


def curvature(
    beam: BeamConfig,
    pos,
    mode: Literal["analytic", "numeric"] = "analytic",
    *,
    outer_step: float = 1e-3,
    r_min: float = DEFAULT_R_MIN,
) -> np.ndarray:
    """Curvature B = curl A; analytically -g / (2 eta r^2) e_r, patch independent.

    The numeric mode takes the curl of :func:`connection_numeric` on a stencil of
    relative step ``outer_step`` with one Richardson level.
    """
    p = _as_position(pos)
    if p.r < r_min:
        raise DegeneratePoint(f"r = {p.r:g} m lies inside the exclusion ball")
    pts = p.as_array()[None, :]
    if mode == "analytic":
        return _analytic_curvature_arrays(beam, pts)[0]
    if mode == "numeric":
        return _numeric_curvature_arrays(beam, pts, outer_step, r_min)[0]
    raise ValueError(f"unknown mode {mode!r}")


def curvature_divergence(beam: BeamConfig, pos, h: float | None = None) -> float:
    """Central-difference divergence of the analytic curvature (one Richardson level)."""
    p = _as_position(pos)
    h = 1e-3 * p.r if h is None else h
    c = p.as_array()

    def div(step):
        total = 0.0
        for j in range(3):
            pts = np.stack([c + step * _AXES[j], c - step * _AXES[j]])
            b = _analytic_curvature_arrays(beam, pts)
            total += (b[0, j] - b[1, j]) / (2.0 * step)
        return total

    return (4.0 * div(0.5 * h) - div(h)) / 3.0


def _sphere_flux(beam: BeamConfig, radius: float, order: int, n_phi: int, mode: str) -> float:
    x, w = np.polynomial.legendre.leggauss(order)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1.0 - ct * ct)
    normal = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    pts = radius * normal
    if mode == "analytic":
        b = _analytic_curvature_arrays(beam, pts)
    else:
        b = _numeric_curvature_arrays(beam, pts, 1e-3, DEFAULT_R_MIN)
    bn = np.sum(b * normal, axis=-1).reshape(order, n_phi)
    # np.sum reduces pairwise in a fixed order, so the result is bit-stable.
    per_ring = np.sum(bn, axis=1) * (2.0 * math.pi / n_phi)
    return float(np.sum(w * per_ring) * radius**2)


def monopole_flux(
    beam: BeamConfig,
    radius: float,
    quadrature_order: int = 64,
    n_phi: int = 128,
    mode: Literal["analytic", "numeric"] = "analytic",
    *,
    r_min: float = DEFAULT_R_MIN,
) -> FluxReport:
    """Flux of the curvature through the origin-centred sphere of ``radius``.

    Gauss-Legendre in cos(theta) times the trapezoid rule in phi; the error
    estimate is the change against half the Gauss-Legendre order.
    """
    if radius <= r_min:
        raise DegeneratePoint(f"radius {radius:g} m is inside the exclusion ball")
    if quadrature_order < 2:
        raise ValueError("quadrature_order must be >= 2")
    flux = _sphere_flux(beam, radius, quadrature_order, n_phi, mode)
    coarse = _sphere_flux(beam, radius, max(quadrature_order // 2, 1), n_phi, mode)
    est = abs(flux - coarse) + 16 * np.finfo(float).eps * max(abs(flux), 1.0)
    return FluxReport(
        radius=radius,
        flux=flux,
        chern=flux / (2.0 * math.pi),
        quadrature_order=quadrature_order,
        estimated_error=float(est),
    )


def transition_holonomy(
    beam: BeamConfig,
    r: float,
    theta: float,
    n_samples: int = 256,
    *,
    overlap: float = DEFAULT_OVERLAP,
) -> float:
    """Loop integral of (A_B - A_A) around the circle of colatitude ``theta``."""
    if not abs(theta - 0.5 * math.pi) < overlap:
        raise PatchBoundary(f"theta = {theta:g} is not inside the overlap band")
    phi = 2.0 * math.pi * np.arange(n_samples) / n_samples
    s, c = math.sin(theta), math.cos(theta)
    pts = r * np.stack([s * np.cos(phi), s * np.sin(phi), np.full_like(phi, c)], axis=-1)
    diff = _connection_arrays(beam, pts[:, 0], pts[:, 1], pts[:, 2], "B", False) - _connection_arrays(
        beam, pts[:, 0], pts[:, 1], pts[:, 2], "A", False
    )
    e_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
    dl = r * s * (2.0 * math.pi / n_samples)
    return float(np.sum(np.sum(diff * e_phi, axis=-1)) * dl)


def spherical_components(vec, pos) -> np.ndarray:
    """Project a Cartesian vector onto (e_r, e_theta, e_phi) at ``pos``."""
    p = _as_position(pos)
    th, ph = p.theta, p.phi
    e_r = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    e_t = np.array([math.cos(th) * math.cos(ph), math.cos(th) * math.sin(ph), -math.sin(th)])
    e_p = np.array([-math.sin(ph), math.cos(ph), 0.0])
    v = np.asarray(vec)
    return np.array([v @ e_r, v @ e_t, v @ e_p])
