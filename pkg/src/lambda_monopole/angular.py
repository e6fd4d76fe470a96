"""Angular structure of motion in the monopole field.

Half-integer quantum numbers (monopole charge q = g/2, l, m) are handled as
exact doubled integers internally; public functions accept ints, floats or
``fractions.Fraction`` and return Fractions where a quantum number is
returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bessel import bessel_j
from .errors import InvalidQuantum
from .fields import AtomConfig, Patch


def _twice(value) -> int:
    """Return 2*value as an exact int, or raise if value is not a half-integer."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return 2 * int(value)
    if isinstance(value, Fraction):
        d = 2 * value
        if d.denominator != 1:
            raise InvalidQuantum(f"{value} is not a half-integer")
        return int(d)
    f = 2.0 * float(value)
    n = round(f)
    if abs(f - n) > 1e-9:
        raise InvalidQuantum(f"{value!r} is not a half-integer")
    return int(n)


@dataclass(frozen=True)
class MonopoleQuantum:
    q: Fraction
    l: Fraction
    m: Fraction

    def __post_init__(self) -> None:
        q2, l2, m2 = _twice(self.q), _twice(self.l), _twice(self.m)
        _check_monopole(q2, l2, m2)
        object.__setattr__(self, "q", Fraction(q2, 2))
        object.__setattr__(self, "l", Fraction(l2, 2))
        object.__setattr__(self, "m", Fraction(m2, 2))

    @property
    def l_squared(self) -> Fraction:
        return self.l * (self.l + 1)


def _check_monopole(q2: int, l2: int, m2: int) -> None:
    if l2 < abs(q2) or (l2 - abs(q2)) % 2:
        raise InvalidQuantum(f"l = {l2}/2 is not in |q|, |q|+1, ... for q = {q2}/2")
    if abs(m2) > l2 or (l2 - m2) % 2:
        raise InvalidQuantum(f"m = {m2}/2 is not in -l..l for l = {l2}/2")


def allowed_l(g: int, count: int) -> list[Fraction]:
    """The first ``count`` admissible l values |g/2|, |g/2| + 1, ..."""
    if count < 1:
        raise ValueError("count must be >= 1")
    base = Fraction(abs(int(g)), 2)
    return [base + n for n in range(count)]


def allowed_m(l) -> list[Fraction]:
    l2 = _twice(l)
    return [Fraction(m2, 2) for m2 in range(-l2, l2 + 1, 2)]


def mu_index(l, g: int) -> float:
    """Bessel order sqrt(l(l+1) - (g/2)^2 + 1/4) of the free radial solution."""
    l2 = _twice(l)
    q2 = int(g)
    if l2 < abs(q2) or (l2 - abs(q2)) % 2:
        raise InvalidQuantum(f"l = {Fraction(l2, 2)} is not admissible for g = {g}")
    # 4 * (l(l+1) - q^2 + 1/4) in doubled integers.
    four_mu2 = l2 * (l2 + 2) - q2 * q2 + 1
    return 0.5 * math.sqrt(four_mu2)


def free_radial(l, g: int, energy: float, atom: AtomConfig, r):
    """Free (V = 0) radial solution J_mu(k r) / sqrt(k r), k = sqrt(2 (M/hbar) E)."""
    mu = mu_index(l, g)
    if not energy > 0:
        raise ValueError("free radial solutions need E > 0")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    k = math.sqrt(2.0 * atom.mass_over_hbar * energy)
    x = k * r
    return bessel_j(mu, x) / np.sqrt(x)


@lru_cache(maxsize=None)
def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def _wigner_terms(j2: int, a2: int, b2: int) -> list[tuple[float, int, int]]:
    """(signed coefficient, cos power, sin power) for d^j_{a,b}, all indices doubled."""
    jpa, jma = (j2 + a2) // 2, (j2 - a2) // 2
    jpb, jmb = (j2 + b2) // 2, (j2 - b2) // 2
    amb = (a2 - b2) // 2
    log_pref = 0.5 * (_log_factorial(jpa) + _log_factorial(jma) + _log_factorial(jpb) + _log_factorial(jmb))
    terms = []
    for s in range(max(0, -amb), min(jpb, jma) + 1):
        log_den = _log_factorial(jpb - s) + _log_factorial(s) + _log_factorial(amb + s) + _log_factorial(jma - s)
        sign = -1.0 if (amb + s) % 2 else 1.0
        terms.append((sign * math.exp(log_pref - log_den), j2 - amb - 2 * s, amb + 2 * s))
    return terms


def wigner_d(l, m1, m2, theta):
    """Small Wigner-d element d^l_{m1,m2}(theta), scalar or array ``theta``.

    Explicit finite sum with log-factorial coefficients and tracked signs.
    """
    j2, a2, b2 = _twice(l), _twice(m1), _twice(m2)
    if j2 < 0 or abs(a2) > j2 or abs(b2) > j2 or (j2 - a2) % 2 or (j2 - b2) % 2:
        raise InvalidQuantum(f"invalid Wigner indices l={l}, m1={m1}, m2={m2}")
    theta = np.asarray(theta, dtype=float)
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    out = np.zeros_like(theta)
    for coef, pc, ps in _wigner_terms(j2, a2, b2):
        out = out + coef * c**pc * s**ps
    return out[()] if out.ndim == 0 else out


def monopole_harmonic(q, l, m, theta, phi, patch: Patch):
    """Monopole harmonic Y_{q,l,m} on the section of ``patch``.

    Y = sqrt((2l+1)/(4 pi)) d^l_{m,-q}(theta) exp(i (m + q) phi) on patch A
    (regular at theta = 0) and exp(i (m - q) phi) on patch B (regular at
    theta = pi), so Y_B = Y_A exp(-2 i q phi). For q = 0 these are the
    ordinary spherical harmonics with the Condon-Shortley phase.
    """
    q2, l2, m2 = _twice(q), _twice(l), _twice(m)
    _check_monopole(q2, l2, m2)
    norm = math.sqrt((l2 + 1) / (4.0 * math.pi))
    d = wigner_d(Fraction(l2, 2), Fraction(m2, 2), Fraction(-q2, 2), theta)
    if patch == "A":
        n = (m2 + q2) // 2
    elif patch == "B":
        n = (m2 - q2) // 2
    else:
        raise ValueError(f"unknown patch {patch!r}")
    return norm * d * np.exp(1j * n * np.asarray(phi, dtype=float))


def sphere_gram(q, l_max, order: int = 32, n_phi: int = 32, patch: Patch = "A") -> tuple[list[tuple[Fraction, Fraction]], np.ndarray]:
    """Gram matrix of all Y_{q,l,m} with l <= l_max under sphere quadrature.

    Gauss-Legendre in cos(theta) and the trapezoid rule in phi; both are exact
    for the polynomial-times-Fourier integrands when order and n_phi exceed
    2 l_max + 1.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    weights = np.outer(w, np.full(n_phi, 2.0 * math.pi / n_phi))
    labels = []
    values = []
    q2 = _twice(q)
    for l2 in range(abs(q2), _twice(l_max) + 1, 2):
        for m2 in range(-l2, l2 + 1, 2):
            labels.append((Fraction(l2, 2), Fraction(m2, 2)))
            values.append(monopole_harmonic(Fraction(q2, 2), Fraction(l2, 2), Fraction(m2, 2), th, ph, patch).ravel())
    mat = np.array(values)
    gram = (np.conj(mat) * weights.ravel()) @ mat.T
    return labels, gram
