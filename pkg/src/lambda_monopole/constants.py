"""Physical constants and the parameter values quoted for the cesium case studies."""

import math

from scipy import constants as _sc

HBAR = _sc.hbar  # J s

CESIUM_MASS_KG = 2.207e-25

# Case 1: atoms around the origin.
CASE1_XI_AMPLITUDE = math.pi * 1e10  # |Omega| slope, rad s^-1 m^-1/2
CASE1_ENERGY_J = 1e-26
CASE1_G = 10
CASE1_THRESHOLD_RADIUS_M = 1e-6
CASE1_ENSEMBLE_SCALE_M = 1e-3

# Case 2: atoms in the harmonic trap centred at (0, 0, z0).
CASE2_Z0_M = 1e-3
CASE2_G = 10_000
CASE2_OMEGA_Z = 1e6
CASE2_OMEGA = 1e2
CASE2_ZERO_POINT_SHIFT = 1e1
