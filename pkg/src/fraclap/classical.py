"""Closed-form boundary triplet for the classical Laplacian ``-f''`` on ``(alpha, beta)``.

Boundary maps: ``Ups0 f = (f(alpha), f(beta))`` and
``Ups1 f = (f'(alpha), -f'(beta))``. Everything here is exact up to
floating-point evaluation of trigonometric and hyperbolic functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fraclap._roots import form_margin, locate_roots, nullity, segment_grids
from fraclap.core import BoundaryCondition, Interval
from fraclap.errors import InvalidRange, PoleProximity
from fraclap.results import SpectrumEntry, SpectrumResult, merge_entries

__all__ = [
    "ClassicalWeylSample",
    "classical_gamma",
    "classical_pole_distance",
    "classical_spectrum",
    "classical_weyl",
]

@dataclass(frozen=True, eq=False)
class ClassicalWeylSample:
    lam: complex
    M: np.ndarray
    pole_distance: float


def _tol_pole(lam: complex) -> float:
    return 1e-8 * max(1.0, abs(lam))


def classical_pole_distance(interval: Interval, lam: complex) -> float:
    """Distance from ``lam`` to the nearest ``(k pi / L)^2``, ``k >= 1``."""
    lam = complex(lam)
    w = math.pi / interval.L
    k0 = max(1, int(round(math.sqrt(max(lam.real, 0.0)) / w)))
    return min(abs(lam - (k * w) ** 2) for k in (k0 - 1, k0, k0 + 1) if k >= 1)


def _sinc_ratios(lam: complex, L: float) -> tuple[complex, complex]:
    """Return ``(s cot(sL), s / sin(sL))`` with ``s = sqrt(lam)``."""
    if lam == 0:
        return 1.0 / L, 1.0 / L
    if lam.imag == 0 and lam.real < 0:
        k = math.sqrt(-lam.real)
        kl = k * L
        e = math.exp(-2.0 * kl)
        # k coth(kL) and k / sinh(kL), written to avoid overflow
        return k * (1.0 + e) / (1.0 - e), 2.0 * k * math.exp(-kl) / (1.0 - e)
    s = cmath.sqrt(lam)
    sn = cmath.sin(s * L)
    return s * cmath.cos(s * L) / sn, s / sn


def classical_weyl(interval: Interval, lam: complex) -> ClassicalWeylSample:
    """Weyl function ``M(lam)`` of the classical Laplacian."""
    lam = complex(lam)
    dist = classical_pole_distance(interval, lam)
    if dist <= _tol_pole(lam):
        raise PoleProximity(f"lambda={lam} is within {dist:.2e} of a Dirichlet eigenvalue")
    diag, off = _sinc_ratios(lam, interval.L)
    M = np.array([[-diag, off], [off, -diag]], dtype=complex)
    return ClassicalWeylSample(lam=lam, M=M, pole_distance=dist)


def classical_gamma(interval: Interval, lam: complex, c) -> Callable:
    """gamma-field: the solution of ``-f'' = lam f`` with ``f(alpha), f(beta) = c``."""
    lam = complex(lam)
    c1, c2 = (complex(v) for v in np.asarray(c).reshape(2))
    if lam != 0 and classical_pole_distance(interval, lam) <= _tol_pole(lam):
        raise PoleProximity(f"lambda={lam} is at a Dirichlet eigenvalue")
    L, alpha = interval.L, interval.alpha
    real_out = lam.imag == 0 and c1.imag == 0 and c2.imag == 0

    if lam == 0:
        def kernel(t, u):  # u = L - t
            return t / L

    elif lam.imag == 0 and lam.real < 0:
        k = math.sqrt(-lam.real)

        def kernel(t, u):
            # sinh(k t) / sinh(k L) without overflow
            return np.exp(k * (t - L)) * (1.0 - np.exp(-2.0 * k * t)) / (1.0 - math.exp(-2.0 * k * L))

    else:
        s = cmath.sqrt(lam)
        sl = cmath.sin(s * L)

        def kernel(t, u):
            return np.sin(s * t) / sl

    def f(x):
        x = np.asarray(x, dtype=float)
        t = x - alpha
        u = interval.beta - x
        val = c1 * kernel(u, t) + c2 * kernel(t, u)
        return val.real if real_out else val

    return f


def _coincidence_matrix(bc: BoundaryCondition, L: float, k: int) -> np.ndarray:
    """``B U0 - A U1`` for the defect basis ``{cos, sin}(s (x - alpha))`` at ``s = k pi / L``."""
    s = k * math.pi / L
    sign = -1.0 if k % 2 else 1.0
    U0 = np.array([[1.0, 0.0], [sign, 0.0]])
    U1 = np.array([[0.0, s], [0.0, -sign * s]])
    return bc.B @ U0 - bc.A @ U1


def _lower_cutoff(interval: Interval, bc: BoundaryCondition, floor_factor: float = 1e6) -> float:
    p1 = (math.pi / interval.L) ** 2
    ref = np.linalg.norm(np.linalg.inv(classical_weyl(interval, -p1).M), 2)
    lam = -10.0 * p1
    floor = -floor_factor * p1
    while lam > floor:
        M = classical_weyl(interval, lam).M
        decayed = np.linalg.norm(np.linalg.inv(M), 2) <= 0.1 * ref
        if decayed and form_margin(bc.A, bc.B, M) > 0:
            break
        lam *= 2.0
    return max(lam, floor)


def classical_spectrum(
    interval: Interval,
    bc: BoundaryCondition,
    lambda_max: float,
    n_grid: int = 64,
    lambda_min: float | None = None,
) -> SpectrumResult:
    """All eigenvalues ``<= lambda_max`` of ``-f''`` with ``B Ups0 f = A Ups1 f``."""
    L = interval.L
    p1 = (math.pi / L) ** 2
    lo = _lower_cutoff(interval, bc) if lambda_min is None else float(lambda_min)
    if lambda_max < lo:
        raise InvalidRange(f"lambda_max={lambda_max} is below the search cutoff {lo}")

    kmax = int(math.floor(math.sqrt(max(lambda_max, 0.0)) / math.sqrt(p1)))
    poles = [(k * k) * p1 for k in range(1, kmax + 2)]
    grids = segment_grids(lo, lambda_max, poles, lambda p: 2 * _tol_pole(p), n_grid, p1)

    A, B = bc.A, bc.B
    nA = np.linalg.norm(A, 2)
    nB = np.linalg.norm(B, 2)

    def char_fn(lam: float):
        M = classical_weyl(interval, lam).M
        return B - A @ M, nB + nA * np.linalg.norm(M, 2)

    entries = [
        SpectrumEntry(lam, mult, "weyl_root")
        for lam, mult in locate_roots(char_fn, grids, xtol=1e-14 * max(1.0, p1))
        if lam <= lambda_max
    ]

    for k, p in enumerate(poles, start=1):
        if p > lambda_max:
            break
        C = _coincidence_matrix(bc, L, k)
        scale = nB + nA * math.sqrt(p)
        m = nullity(C, max(scale, 1e-300))
        if m:
            entries.append(SpectrumEntry(p, min(m, 2), "dirichlet_coincidence"))

    return SpectrumResult(
        eigenvalues=merge_entries(entries),
        search_window=(lo, float(lambda_max)),
    )
