import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambda_monopole import BeamConfig, Position
from lambda_monopole.errors import DegeneratePoint, NumericalError, OnAxisSingular, PatchBoundary
from lambda_monopole.gauge import (
    Quantization,
    connection_analytic,
    connection_numeric,
    connection_numeric_arrays,
    curvature,
    curvature_divergence,
    monopole_flux,
    quantization_check,
    spherical_components,
    transition_holonomy,
)


def e_phi(phi):
    return np.array([-math.sin(phi), math.cos(phi), 0.0])


@pytest.mark.parametrize("patch, expected", [("A", -0.5), ("B", 0.5)])
def test_equatorial_connection(patch, expected):
    a = connection_analytic(BeamConfig(xi=1.0, g=1), Position.spherical(1.0, math.pi / 2, 0.7), patch)
    np.testing.assert_allclose(a, expected * e_phi(0.7), atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(
    g=st.integers(-6, 6),
    r=st.floats(1e-5, 1e2),
    theta=st.floats(0.1, math.pi - 0.1),
    phi=st.floats(-math.pi, math.pi),
)
def test_patch_difference_is_pure_azimuthal(g, r, theta, phi):
    beam = BeamConfig(xi=1.0, g=g)
    pos = Position.spherical(r, theta, phi)
    diff = connection_analytic(beam, pos, "B") - connection_analytic(beam, pos, "A")
    # A_B - A_A = grad(g phi) = g / (r sin theta) e_phi
    np.testing.assert_allclose(diff, g / (r * math.sin(theta)) * e_phi(phi), rtol=1e-12, atol=1e-300)
    comps = spherical_components(connection_analytic(beam, pos, "A"), pos)
    assert abs(comps[0]) <= 1e-12 * (abs(comps[2]) + 1e-300)
    assert abs(comps[1]) <= 1e-12 * (abs(comps[2]) + 1e-300)


def test_connection_singular_axis():
    beam = BeamConfig(xi=1.0, g=1)
    with pytest.raises(OnAxisSingular):
        connection_analytic(beam, Position(0.0, 0.0, -1.0), "A")
    with pytest.raises(OnAxisSingular):
        connection_analytic(beam, Position(0.0, 0.0, 1.0), "B")
    np.testing.assert_array_equal(connection_analytic(beam, Position(0.0, 0.0, 1.0), "A"), 0.0)


def test_numeric_matches_analytic_at_reference_point():
    beam = BeamConfig(xi=1e4, g=2, k=300.0)
    pos = Position.spherical(1e-3, math.pi / 3, 0.4)
    num = connection_numeric(beam, pos, "A", include_kz=True)
    ref = connection_analytic(beam, pos, "A", include_kz=True)
    assert np.linalg.norm(num - ref) <= 1e-6 * np.linalg.norm(ref)


def test_numeric_without_beam_phase_matches_bare_connection():
    beam = BeamConfig(xi=1e4, g=-3, k=300.0)
    pos = Position.spherical(2e-3, 2.0, -1.2)
    num = connection_numeric(beam, pos, "B")
    ref = connection_analytic(beam, pos, "B")
    assert np.linalg.norm(num - ref) <= 1e-8 * np.linalg.norm(ref)


def test_no_winding_is_pure_gauge():
    beam = BeamConfig(xi=2.0, g=0, k=40.0)
    for patch, theta in (("A", 0.6), ("B", 2.4)):
        num = connection_numeric(beam, Position.spherical(0.01, theta, 1.0), patch, include_kz=True)
        np.testing.assert_allclose(num, [0.0, 0.0, 40.0], rtol=1e-8, atol=1e-6)


def test_numeric_convergence_order_two():
    beam = BeamConfig(xi=1e4, g=2)
    pos = Position.spherical(1e-3, math.pi / 3, 0.4)
    ref = connection_analytic(beam, pos, "A")
    hs = np.array([1e-3, 5e-4, 2.5e-4]) * pos.r
    errs = []
    for h in hs:
        a, _ = connection_numeric_arrays(beam, pos.as_array()[None, :], "A", h=h, richardson=False)
        errs.append(np.linalg.norm(a[0] - ref))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.1)


def test_numeric_stencil_errors():
    beam = BeamConfig(xi=1.0, g=1)
    with pytest.raises(PatchBoundary):
        connection_numeric(beam, Position.spherical(1.0, math.pi / 2 + math.pi / 12 - 0.05, 0.0), "A", h=0.1)
    with pytest.raises(DegeneratePoint):
        connection_numeric(beam, Position(2e-9, 0.0, 0.0), "A", h=1.5e-9)


def test_coarse_step_flags_imaginary_residue():
    beam = BeamConfig(xi=1.0, g=2, k=1e3)
    with pytest.raises(NumericalError):
        connection_numeric(beam, Position.spherical(1.0, 1.0, 0.0), "A", h=1e-2, include_kz=True)


@pytest.mark.parametrize("g", [2, -4])
def test_curvature_examples(g):
    beam = BeamConfig(xi=1.0, g=g)
    pos = Position.spherical(1.0, 0.8, 2.0)
    b = curvature(beam, pos)
    np.testing.assert_allclose(spherical_components(b, pos), [-g / 2, 0, 0], atol=1e-15)


def test_curvature_zero_winding():
    np.testing.assert_array_equal(curvature(BeamConfig(xi=1.0, g=0), Position(1.0, 2.0, 3.0)), 0.0)


@pytest.mark.parametrize("theta, patch", [(0.7, "A"), (2.3, "B")])
def test_curvature_is_curl_of_connection(theta, patch):
    # Independent route: finite-difference curl of the closed-form patch connection.
    beam = BeamConfig(xi=1.0, g=3, eta=1.0)
    pos = Position.spherical(0.5, theta, 1.3)
    c = pos.as_array()
    h = 1e-4
    jac = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        jac[:, j] = (
            connection_analytic(beam, Position(*(c + e)), patch) - connection_analytic(beam, Position(*(c - e)), patch)
        ) / (2 * h)
    curl = np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])
    np.testing.assert_allclose(curl, curvature(beam, pos), rtol=1e-6)
    np.testing.assert_allclose(curvature(beam, pos, mode="numeric"), curvature(beam, pos), rtol=1e-6)


def test_curvature_divergence_free():
    beam = BeamConfig(xi=1.0, g=5)
    pos = Position.spherical(2.0, 1.0, 0.3)
    scale = np.linalg.norm(curvature(beam, pos)) / pos.r
    assert abs(curvature_divergence(beam, pos)) <= 1e-8 * scale


def test_flux_unit_winding():
    for radius in (1e-3, 1.0, 30.0):
        rep = monopole_flux(BeamConfig(xi=1.0, g=1), radius)
        assert rep.flux == pytest.approx(-2 * math.pi, rel=1e-13)
        assert rep.chern == pytest.approx(-1.0, abs=1e-12)


def test_flux_zero_winding():
    assert monopole_flux(BeamConfig(xi=1.0, g=0), 1.0).flux == 0.0


def test_flux_radius_invariance():
    fluxes = [monopole_flux(BeamConfig(xi=1.0, g=5), r).flux for r in (1e-4, 1e-3, 1e-2)]
    assert max(fluxes) - min(fluxes) <= 1e-9 * abs(fluxes[0])


def test_flux_fractional_charge():
    rep = monopole_flux(BeamConfig(xi=1.0, g=3, eta=2.0), 1.0)
    assert rep.chern == pytest.approx(-1.5, abs=1e-12)


def test_flux_rejects_inner_sphere():
    with pytest.raises(DegeneratePoint):
        monopole_flux(BeamConfig(xi=1.0, g=1), 1e-12)


@pytest.mark.parametrize("g, eta, expected", [(3, 1.0, 6 * math.pi), (0, 1.0, 0.0), (3, 2.0, 3 * math.pi), (-2, 1.0, -4 * math.pi)])
def test_holonomy(g, eta, expected):
    val = transition_holonomy(BeamConfig(xi=1.0, g=g, eta=eta), 1e-3, math.pi / 2 + 0.1)
    assert val == pytest.approx(expected, abs=1e-10)


def test_holonomy_outside_overlap():
    with pytest.raises(PatchBoundary):
        transition_holonomy(BeamConfig(xi=1.0, g=1), 1.0, 0.3)


@pytest.mark.parametrize(
    "g, eta, verdict",
    [(4, 2.0, Quantization.QUANTIZED), (3, 2.0, Quantization.NOT_QUANTIZED), (0, 7.3, Quantization.QUANTIZED), (5, 1.0, Quantization.QUANTIZED)],
)
def test_quantization_check(g, eta, verdict):
    assert quantization_check(g, eta) is verdict
