import math

import numpy as np
import pytest

from lambda_monopole import AtomConfig, HarmonicTrap
from lambda_monopole.errors import DomainError, GridTooCoarse
from lambda_monopole.spectrum import (
    GridSpec,
    TrapSpectrumParams,
    analytic_levels,
    f_approx,
    f_exact,
    hyp1f1_terminating,
    modified_frequency,
    spectrum_analytic,
    spectrum_numeric,
    wavefunction_analytic,
)

ATOM = AtomConfig(mass_over_hbar=1.0)
TRAP = HarmonicTrap(omega=1.0, omega_z=1.7, z0=1.0)


def test_f_exact_examples():
    assert f_exact(1, 2, 1.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    rho = np.array([0.1, 0.5, 2.0])
    np.testing.assert_allclose(f_exact(3, 0, rho, 1.0), 9 / rho**2, rtol=1e-15)
    # g (z - r) / (2 r rho) -> 0 as rho -> 0 at fixed z > 0
    assert f_exact(2, 5, 1e-6, 1.0) == pytest.approx(4e12, rel=1e-10)


def test_f_exact_cancellation_free():
    # For rho << z the naive z - r loses all digits; the stable form keeps them.
    rho, z = 1e-9, 1.0
    val = f_exact(0, 4, rho, z)
    expected = (4 * rho / (4 * z * z)) ** 2  # (g (r - z) / (2 r rho))^2 with r - z ~ rho^2 / 2z
    assert val == pytest.approx(expected, rel=1e-6)


def test_f_exact_domain():
    with pytest.raises(DomainError):
        f_exact(0, 1, 0.0, 1.0)


def test_f_approx_examples():
    assert f_approx(1, 1, 1.0, 1.0) == pytest.approx(0.5625)
    np.testing.assert_allclose(f_approx(2, 0, np.array([0.5, 1.5]), 3.0), 4 / np.array([0.5, 1.5]) ** 2)


def test_f_approx_near_axis():
    z0 = 1.0
    rho = np.linspace(1e-3, 0.1, 50)
    for m, g in [(1, 2), (-2, 10), (0, 4), (2, -6)]:
        exact = f_exact(m, g, rho, z0)
        approx = f_approx(m, g, rho, z0)
        assert np.max(np.abs(approx - exact) / np.abs(exact)) <= 0.05


def test_analytic_plain_oscillator():
    for m in (-2, 0, 3):
        for n_rho in range(3):
            for n_z in range(2):
                res = spectrum_analytic(TrapSpectrumParams(ATOM, TRAP, 0, m, n_rho, n_z))
                assert res.energy == pytest.approx((2 * n_rho + abs(m) + 1) * 1.0 + (n_z + 0.5) * 1.7)
                assert res.frequency_shift == 0.0
                assert res.zero_point_shift == 0.0


def test_analytic_mirror_in_m():
    g, m = 6, 2
    up = spectrum_analytic(TrapSpectrumParams(ATOM, TRAP, g, m, 1, 0)).energy
    down = spectrum_analytic(TrapSpectrumParams(ATOM, TRAP, g, -m, 1, 0)).energy
    assert up - down == pytest.approx(-2 * m * g / (4 * ATOM.mass_over_hbar * TRAP.z0**2))


def test_analytic_levels_sorted():
    levels = analytic_levels(ATOM, TRAP, 4, 1, 6)
    energies = [lv.energy for lv in levels]
    assert energies == sorted(energies)
    assert levels[0].labels == (1, 0, 0)


def test_hyp1f1_polynomial():
    x = np.linspace(0, 3, 7)
    np.testing.assert_allclose(hyp1f1_terminating(0, 2.0, x), 1.0)
    np.testing.assert_allclose(hyp1f1_terminating(1, 2.0, x), 1 - x / 2)
    np.testing.assert_allclose(hyp1f1_terminating(2, 1.0, x), 1 - 2 * x + x * x / 2)


def _quadrature(p, n=240):
    lam = p.atom.mass_over_hbar * modified_frequency(p.atom, p.trap, p.g)
    beta = math.sqrt(p.atom.mass_over_hbar * p.trap.omega_z)
    x, w = np.polynomial.legendre.leggauss(n)
    rho_cut, z_cut = 14.0 / math.sqrt(lam), 14.0 / beta
    rho = 0.5 * rho_cut * (x + 1)
    z = p.trap.z0 + z_cut * x
    rr, zz = np.meshgrid(rho, z, indexing="ij")
    ww = np.outer(0.5 * rho_cut * w * rho, z_cut * w) * 2 * math.pi
    return rr, zz, ww


def _rayleigh_quotient(p):
    mass = p.atom.mass_over_hbar
    rr, zz, ww = _quadrature(p)
    t = wavefunction_analytic(p, rr, zz, 0.0).real
    lr = 1.0 / math.sqrt(mass * modified_frequency(p.atom, p.trap, p.g))
    lz = 1.0 / math.sqrt(mass * p.trap.omega_z)

    def d(fn, step):
        return (-fn(2 * step) + 8 * fn(step) - 8 * fn(-step) + fn(-2 * step)) / (12 * step)

    hr, hz = 1e-3 * lr, 1e-3 * lz
    t_rho = d(lambda s: wavefunction_analytic(p, np.abs(rr + s), zz, 0.0).real * np.sign(rr + s) ** abs(p.m), hr)
    t_z = d(lambda s: wavefunction_analytic(p, rr, zz + s, 0.0).real, hz)
    pot = f_approx(p.m, p.g, rr, p.trap.z0) / (2 * mass) + p.trap.potential(rr, 0.0, zz, mass)
    num = np.sum(ww * ((t_rho**2 + t_z**2) / (2 * mass) + pot * t * t))
    den = np.sum(ww * t * t)
    return num / den, den


@pytest.mark.parametrize("m, n_rho, n_z, g", [(0, 0, 0, 0), (0, 0, 0, 3), (1, 1, 0, 6), (-2, 0, 1, 6), (2, 2, 2, 10)])
def test_wavefunction_rayleigh_quotient(m, n_rho, n_z, g):
    p = TrapSpectrumParams(ATOM, TRAP, g, m, n_rho, n_z)
    energy, norm = _rayleigh_quotient(p)
    assert norm == pytest.approx(1.0, rel=1e-10)
    assert energy == pytest.approx(spectrum_analytic(p).energy, rel=1e-6)


def test_wavefunction_orthogonality():
    for m in (0, 1, -3):
        p0 = TrapSpectrumParams(ATOM, TRAP, 4, m, 0, 0)
        p1 = TrapSpectrumParams(ATOM, TRAP, 4, m, 1, 0)
        rr, zz, ww = _quadrature(p0)
        overlap = np.sum(ww * wavefunction_analytic(p0, rr, zz, 0.0) * np.conj(wavefunction_analytic(p1, rr, zz, 0.0)))
        assert abs(overlap) <= 1e-10


def test_ground_state_is_gaussian():
    p = TrapSpectrumParams(ATOM, TRAP, 0, 0, 0, 0)
    rho = np.array([0.0, 0.5, 1.0])
    vals = wavefunction_analytic(p, rho, 1.0, 0.3).real
    np.testing.assert_allclose(vals / vals[0], np.exp(-0.5 * rho**2), rtol=1e-14)


def test_grid_too_small_rejected():
    with pytest.raises(ValueError):
        GridSpec(extent=4.0).resolve(ATOM, TRAP, 2)


def test_numeric_plain_ground_state():
    res = spectrum_numeric(0, TrapSpectrumParams(ATOM, TRAP, 0), grid=GridSpec(512, 512), n_eigs=1)
    assert res[0].energy == pytest.approx(1.0 + 0.85, rel=1e-3)
    assert res[0].method == "NumericApproxF"


def test_numeric_small_grid_matches_analytic():
    g, m = 4, -1
    params = TrapSpectrumParams(ATOM, TRAP, g, m)
    got = [r.energy for r in spectrum_numeric(m, params, grid=GridSpec(128, 128), n_eigs=4)]
    ref = [lv.energy for lv in analytic_levels(ATOM, TRAP, g, m, 4)]
    np.testing.assert_allclose(got, ref, rtol=2e-2)


def test_numeric_is_deterministic():
    params = TrapSpectrumParams(ATOM, TRAP, 2, 1)
    a = [r.energy for r in spectrum_numeric(1, params, grid=GridSpec(96, 96), n_eigs=3)]
    b = [r.energy for r in spectrum_numeric(1, params, grid=GridSpec(96, 96), n_eigs=3)]
    assert a == b


def test_grid_too_coarse():
    params = TrapSpectrumParams(ATOM, TRAP, 2, 1)
    with pytest.raises(GridTooCoarse):
        spectrum_numeric(1, params, grid=GridSpec(32, 32), n_eigs=2, refine_tol=1e-6)
    res = spectrum_numeric(1, params, grid=GridSpec(64, 64), n_eigs=2, refine_tol=0.05)
    assert len(res[0].grid["richardson_error"]) == 2
