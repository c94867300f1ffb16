"""Jacobi polynomials, Gauss-Jacobi rules and log-gamma.

Conventions follow the classical normalization: ``P_n^{(p,q)}`` is orthogonal
on ``(-1, 1)`` against ``(1 - y)^p (1 + y)^q`` and ``P_n^{(p,q)}(1) =
binom(n + p, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from fraclap.errors import DomainError, EigDecompFailed, ValidationError

__all__ = [
    "JacobiParams",
    "QuadratureRule",
    "gauss_jacobi",
    "jacobi_eval",
    "jacobi_norm",
    "jacobi_table",
    "gamma_fn",
    "log_gamma",
]

# Slope of a linear error added to log_gamma; only the self-test fault injection sets it.
_LOG_GAMMA_FAULT = 0.0


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x) + _LOG_GAMMA_FAULT * x


def gamma_fn(x: float) -> float:
    """Euler's gamma function for ``x > 0``, evaluated as ``exp(log_gamma(x))``."""
    return math.exp(log_gamma(x))


@dataclass(frozen=True)
class JacobiParams:
    n: int
    p: float
    q: float

    def __post_init__(self) -> None:
        if self.n < 0 or int(self.n) != self.n:
            raise ValidationError(f"degree must be a nonnegative integer: {self.n!r}")
        if not (self.p > -1 and self.q > -1):
            raise ValidationError(
                f"Jacobi exponents must exceed -1: p={self.p!r}, q={self.q!r}"
            )


def jacobi_table(n: int, p: float, q: float, y) -> np.ndarray:
    """Values of ``P_0, ..., P_{n-1}`` at the points *y*.

    Returns an array of shape ``(n, len(y))`` built with the forward three-term
    recurrence (adequate for ``|y| <= 1`` and ``n <= 500``).
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((n,) + y.shape)
    if n == 0:
        return out
    out[0] = 1.0
    if n == 1:
        return out
    out[1] = 0.5 * ((p + q + 2.0) * y + (p - q))
    s = p + q
    for k in range(2, n):
        c0 = 2.0 * k * (k + s) * (2.0 * k + s - 2.0)
        c1 = (2.0 * k + s - 1.0) * ((2.0 * k + s) * (2.0 * k + s - 2.0) * y + p * p - q * q)
        c2 = 2.0 * (k + p - 1.0) * (k + q - 1.0) * (2.0 * k + s)
        out[k] = (c1 * out[k - 1] - c2 * out[k - 2]) / c0
    return out


def jacobi_eval(params: JacobiParams, y):
    """Evaluate ``P_n^{(p,q)}(y)``; *y* may be a scalar or an array."""
    vals = jacobi_table(params.n + 1, params.p, params.q, y)[params.n]
    return float(vals) if np.ndim(vals) == 0 else vals


def jacobi_norm(n, p: float, q: float):
    """Squared weighted norm ``h_n`` of ``P_n^{(p,q)}``.

    Vectorized over *n*. For ``n = 0`` this is the zeroth moment of the weight.
    """
    n = np.asarray(n, dtype=float)
    lg = np.vectorize(math.lgamma, otypes=[float])
    s = p + q
    with np.errstate(divide="ignore", invalid="ignore"):
        log_h = (
            (s + 1.0) * math.log(2.0)
            + lg(n + p + 1.0)
            + lg(n + q + 1.0)
            - lg(n + 1.0)
            - lg(n + s + 1.0)
            - np.log(2.0 * n + s + 1.0)
        )
    h = np.exp(log_h)
    # n = 0 with p + q = -1 hits Gamma(0)/0; use the moment formula instead
    mu0 = math.exp((s + 1.0) * math.log(2.0) + math.lgamma(p + 1.0) + math.lgamma(q + 1.0) - math.lgamma(s + 2.0))
    h = np.where(n == 0, mu0, h)
    return float(h) if h.ndim == 0 else h


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss rule for ``int_{-1}^{1} g(y) (1 - y)^p (1 + y)^q dy``."""

    nodes: np.ndarray
    weights: np.ndarray
    p: float
    q: float

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> np.ndarray:
        """Contract sampled values (last axis = nodes) against the weights."""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=128)
def _golub_welsch(n: int, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(n, dtype=float)
    s = p + q

    diag = np.empty(n)
    diag[0] = (q - p) / (s + 2.0)
    kk = k[1:]
    diag[1:] = (q * q - p * p) / ((2 * kk + s) * (2 * kk + s + 2))

    off = np.empty(max(n - 1, 0))
    if n > 1:
        off[0] = 4.0 * (1 + p) * (1 + q) / ((2 + s) ** 2 * (3 + s))
        kk = k[2:]
        off[1:] = (
            4.0 * kk * (kk + p) * (kk + q) * (kk + s)
            / ((2 * kk + s) ** 2 * (2 * kk + s + 1) * (2 * kk + s - 1))
        )
        off = np.sqrt(off)

    try:
        nodes, vecs = eigh_tridiagonal(diag, off)
    except LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigDecompFailed(str(exc)) from exc
    if not np.all(np.isfinite(nodes)):
        raise EigDecompFailed("non-finite Jacobi-matrix eigenvalues")

    mu0 = math.exp((s + 1.0) * math.log(2.0) + math.lgamma(p + 1.0) + math.lgamma(q + 1.0) - math.lgamma(s + 2.0))
    weights = mu0 * vecs[0, :] ** 2
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(n: int, p: float, q: float) -> QuadratureRule:
    """Golub-Welsch ``n``-point Gauss-Jacobi rule.

    Exact for polynomials of degree ``2n - 1`` against the weight
    ``(1 - y)^p (1 + y)^q``. Rules are cached; the returned arrays are
    read-only.
    """
    if n < 1 or int(n) != n:
        raise ValidationError(f"number of nodes must be a positive integer: {n!r}")
    if not (p > -1 and q > -1):
        raise ValidationError(f"weight exponents must exceed -1: p={p!r}, q={q!r}")
    nodes, weights = _golub_welsch(int(n), float(p), float(q))
    return QuadratureRule(nodes=nodes, weights=weights, p=float(p), q=float(q))
