"""Bessel function of the first kind for real non-negative order.

Ascending series below the crossover ``|x| = 12`` and the Hankel asymptotic
expansion above it. When the asymptotic series cannot reach the target
accuracy (large order relative to x) the ascending series is summed in
extended precision instead.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

CROSSOVER = 12.0
TARGET_RTOL = 1e-12


def _series(mu: float, x: float) -> float:
    half = 0.5 * x
    if half == 0.0:
        return 1.0 if mu == 0 else 0.0
    term = math.exp(mu * math.log(half) - math.lgamma(mu + 1.0))
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + mu))
        total += term
        if abs(term) <= 1e-17 * abs(total) and k > half:
            return total
        if k > 500:
            return total


def _series_mp(mu: float, x: float) -> float:
    # Cancellation in the alternating series costs about x / ln(10) digits.
    dps = 30 + int(x / 2.0)
    with mpmath.workdps(dps):
        m = mpmath.mpf(mu)
        half = mpmath.mpf(x) / 2
        term = mpmath.power(half, m) / mpmath.gamma(m + 1)
        total = term
        q = -half * half
        eps = mpmath.mpf(10) ** (-(dps - 5))
        k = 0
        while True:
            k += 1
            term *= q / (k * (k + m))
            total += term
            if abs(term) <= eps * abs(total) and k > half:
                return float(total)


def _asymptotic(mu: float, x: float) -> float | None:
    """Hankel expansion; None if the smallest term exceeds the target accuracy."""
    four_mu2 = 4.0 * mu * mu
    p_sum = 1.0
    q_sum = 0.0
    a = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        a *= (four_mu2 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = abs(a)
        if mag >= prev:
            # Divergent tail: truncate before the smallest term.
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_sum += sign * a
        else:
            q_sum += sign * a
        prev = mag
        if mag < 1e-17 or a == 0.0:
            break
    if prev > TARGET_RTOL * 1e-2:
        return None
    chi = x - (0.5 * mu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def bessel_j_scalar(mu: float, x: float) -> float:
    if mu < 0:
        raise ValueError(f"order must be non-negative, got {mu!r}")
    if x < 0:
        # J_mu(-x) = (-1)^mu J_mu(x) is real only for integer order.
        if mu != int(mu):
            raise ValueError("negative argument needs an integer order")
        return (-1) ** int(mu) * bessel_j_scalar(mu, -x)
    if x < CROSSOVER:
        return _series(mu, x)
    value = _asymptotic(mu, x)
    if value is None:
        return _series_mp(mu, x)
    return value


def bessel_j(mu: float, x):
    """J_mu(x) for scalar or array ``x``."""
    arr = np.asarray(x, dtype=float)
    out = np.vectorize(lambda v: bessel_j_scalar(mu, float(v)), otypes=[float])(arr)
    return out[()] if out.ndim == 0 else out
