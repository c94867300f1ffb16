"""Root location for ``lambda -> B - A M(lambda)`` on pole-free segments.

Shared by the classical and fractional spectrum solvers. Simple roots are
bracketed by sign changes of a real-valued determinant and refined with
Brent's method. Even-order zeros (where the determinant touches zero without
changing sign) are caught by scanning the smallest singular value for dips.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from fraclap.errors import RootRefinementFailed

CharFn = Callable[[float], tuple[np.ndarray, float]]


def cluster_grid(a: float, b: float, n: int) -> np.ndarray:
    """``n`` Chebyshev-Lobatto points on ``[a, b]``, clustered at both ends."""
    j = np.arange(n)
    return a + 0.5 * (b - a) * (1.0 - np.cos(np.pi * j / (n - 1)))


def segment_grids(
    lo: float,
    hi: float,
    poles: list[float],
    gap: Callable[[float], float],
    n: int,
    ref: float,
) -> list[np.ndarray]:
    """Sampling grids on ``[lo, hi]`` split at the sorted ``poles``.

    Each pole ``p`` is excluded together with ``gap(p)`` on either side. The
    scan runs halfway from ``hi`` to the next pole so that a zero at ``hi``
    is interior to a grid; callers filter roots above ``hi``. Below ``-ref``
    the grid is geometric.
    """
    nxt = next((p for p in poles if p > hi), None)
    top = hi + 0.5 * (nxt - hi) if nxt is not None else hi + 0.5 * (1.0 + abs(hi))
    bounds = [lo]
    for p in poles:
        if p - gap(p) >= top:
            break
        bounds.extend([p - gap(p), p + gap(p)])
    bounds.append(top)
    grids = []
    for a, b in zip(bounds[::2], bounds[1::2]):
        if b <= a:
            continue
        if a < -ref:
            g_neg = -np.geomspace(-a, ref, 4 * n)
            grids.append(np.unique(np.concatenate([g_neg, cluster_grid(-ref, b, n)])))
        else:
            grids.append(cluster_grid(a, b, n))
    return grids


def form_margin(A: np.ndarray, B: np.ndarray, M: np.ndarray) -> float:
    """Smallest eigenvalue of ``A B* - A M A*`` restricted to ``ran A``.

    A positive margin at a real ``x`` below the Dirichlet spectrum means the
    realization lies strictly above ``x``. Returns ``inf`` when ``A = 0``.
    """
    U, s, _ = np.linalg.svd(A)
    r = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    if r == 0:
        return np.inf
    Q = U[:, :r]
    F = A @ B.conj().T - A @ M @ A.conj().T
    F = Q.conj().T @ F @ Q
    F = 0.5 * (F + F.conj().T)
    return float(np.linalg.eigvalsh(F)[0] / max(1.0, s[0] ** 2))


def nullity(D: np.ndarray, scale: float, rel: float = 1e-7) -> int:
    s = np.linalg.svd(D, compute_uv=False)
    return int(np.sum(s <= rel * scale))


class _Sampler:
    def __init__(self, fn: CharFn):
        self.fn = fn
        self.cache: dict[float, tuple[np.ndarray, float]] = {}

    def __call__(self, lam: float) -> tuple[np.ndarray, float]:
        key = float(lam)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.fn(key)
            self.cache[key] = hit
        return hit

    def det(self, lam: float) -> complex:
        D, scale = self(lam)
        return complex(np.linalg.det(D)) / scale**2

    def smin(self, lam: float) -> float:
        D, scale = self(lam)
        return float(np.linalg.svd(D, compute_uv=False)[-1]) / scale


def locate_roots(
    char_fn: CharFn,
    grids: list[np.ndarray],
    xtol: float,
    nullity_rel: float = 1e-7,
    dip_rel: float = 1e-8,
) -> list[tuple[float, int]]:
    """Roots of ``det D(lambda)`` on the given grids.

    ``char_fn(lam)`` returns ``(D, scale)``, with ``D = B - A M(lam)`` and
    ``scale`` a size reference (``|B| + |A| |M|``). Each grid must lie in a
    single pole-free segment. Returns sorted ``(lambda, multiplicity)`` pairs.
    """
    sampler = _Sampler(char_fn)
    dets = [np.array([sampler.det(x) for x in g]) for g in grids]

    # for a self-adjoint condition the determinant has constant phase on the real line
    flat = np.concatenate(dets) if dets else np.zeros(0)
    if flat.size == 0:
        return []
    k = int(np.argmax(np.abs(flat)))
    phase = flat[k] / abs(flat[k]) if flat[k] != 0 else 1.0

    def r(x: float) -> float:
        return float((sampler.det(x) * np.conj(phase)).real)

    def refine(lo: float, hi: float) -> float:
        try:
            return brentq(r, lo, hi, xtol=xtol, rtol=1e-13, maxiter=200)
        except (RuntimeError, ValueError) as exc:
            raise RootRefinementFailed(f"bracket [{lo}, {hi}]: {exc}") from exc

    roots: list[float] = []
    for g, d in zip(grids, dets):
        vals = (d * np.conj(phase)).real
        found: list[float] = []
        for i in range(len(g)):
            if vals[i] == 0.0:
                found.append(float(g[i]))
        for i in range(len(g) - 1):
            if vals[i] * vals[i + 1] < 0:
                found.append(refine(g[i], g[i + 1]))
        roots.extend(found)

        smins = np.array([sampler.smin(x) for x in g])
        for i in range(1, len(g) - 1):
            if not (smins[i] < smins[i - 1] and smins[i] <= smins[i + 1]):
                continue
            lo, hi = g[i - 1], g[i + 1]
            if any(lo <= x <= hi for x in found):
                continue
            res = minimize_scalar(
                sampler.smin,
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": max(xtol, 1e-15 * max(abs(lo), abs(hi)))},
            )
            xm = float(res.x)
            rm = r(xm)
            # two simple roots hiding between neighbouring grid points
            if vals[i - 1] * rm < 0 and vals[i + 1] * rm < 0:
                roots.append(refine(lo, xm))
                roots.append(refine(xm, hi))
            elif sampler.smin(xm) <= dip_rel:
                roots.append(xm)

    roots.sort()
    out: list[tuple[float, int]] = []
    for x in roots:
        if out and abs(x - out[-1][0]) <= max(10 * xtol, 1e-9 * abs(x)):
            continue
        D, scale = sampler(x)
        out.append((x, min(2, max(1, nullity(D, scale, nullity_rel)))))
    return out
