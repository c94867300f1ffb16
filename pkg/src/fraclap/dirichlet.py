"""Galerkin model of the Dirichlet realization of the restricted fractional Laplacian.

On the reference variable ``y = 2 (x - mid) / L`` the trial functions are
``phi_n(y) = (1 - y^2)^a P_n^{(a,a)}(y)``. The fractional Laplacian maps them
to polynomials, ``(-Delta)^a phi_n = (2/L)^{2a} c_n P_n^{(a,a)}`` with
``c_n = Gamma(2a + n + 1) / n!``, so the stiffness matrix is diagonal and no
singular integral is ever assembled. Functions in the maximal domain are
represented as a Dirichlet part plus a combination of the two kernel functions
``v1 = (1 - y^2)^(a-1)`` and ``v2 = y v1``.

All inner products are in ``L^2(alpha, beta)`` and include the ``L/2``
Jacobian of the affine map.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular

from fraclap.core import FractionalOrder, Interval, TraceVector
from fraclap.errors import (
    EigDecompFailed,
    IllConditionedMass,
    InvalidN,
    OutOfDomain,
    PoleProximity,
    QuadratureNonConvergence,
    ValidationError,
)
from fraclap.special import QuadratureRule, gamma_fn, gauss_jacobi, jacobi_norm, jacobi_table, log_gamma

__all__ = [
    "DEFAULT_N",
    "DirichletModel",
    "DiscreteFunction",
    "apply_resolvent",
    "build_dirichlet_model",
    "dyda_constants",
    "evaluate",
    "galerkin_traces",
    "inner",
    "pv_fractional_apply",
]

DEFAULT_N = 120
COND_LIMIT = 1e12


def dyda_constants(a: float, n: int) -> np.ndarray:
    """``c_k = Gamma(2a + k + 1) / k!`` for ``k < n``."""
    return np.array([math.exp(log_gamma(2 * a + k + 1) - log_gamma(k + 1)) for k in range(n)])


@dataclass(frozen=True, eq=False)
class DirichletModel:
    interval: Interval
    order: FractionalOrder
    N: int
    stiffness_diag: np.ndarray
    mass: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    kernel_coupling: np.ndarray  # W[m, j] = (phi_m, v_j)
    kernel_gram: np.ndarray  # G[i, j] = (v_i, v_j)
    action_coupling: np.ndarray  # (T phi_m, v_j), exact via the Dyda identity
    end_values: np.ndarray  # rows P_n(-1), P_n(1)
    kernel_map: np.ndarray  # gamma(0) c = v @ (kernel_map c)
    ups0_kernel: np.ndarray
    ups1_kernel: np.ndarray
    ups1_dirichlet_scale: float
    quad: dict[str, QuadratureRule] = field(repr=False)

    @property
    def a(self) -> float:
        return self.order.a

    @property
    def L(self) -> float:
        return self.interval.L

    @property
    def lambda1(self) -> float:
        return float(self.eigvals[0])

    @property
    def Z(self) -> np.ndarray:
        """``Z[k, j] = (phi_hat_k, gamma(0) e_j)``."""
        return self.eigvecs.T @ self.kernel_coupling @ self.kernel_map

    def tol_pole(self, lam: complex) -> float:
        return 1e-9 * (1.0 + abs(lam)) * (1.0 + self.lambda1)

    def pole_distance(self, lam: complex) -> float:
        return float(np.min(np.abs(self.eigvals - lam)))

    def check_pole(self, lam: complex) -> float:
        dist = self.pole_distance(lam)
        if dist <= self.tol_pole(lam):
            raise PoleProximity(f"lambda={lam} within {dist:.2e} of a Dirichlet eigenvalue")
        return dist

    def eigenfunction(self, k: int) -> "DiscreteFunction":
        """Mass-normalized Dirichlet eigenfunction, ``k = 1, 2, ...``."""
        if not 1 <= k <= self.N:
            raise ValidationError(f"eigenfunction index must be in 1..{self.N}")
        c = self.eigvecs[:, k - 1].copy()
        lam = self.eigvals[k - 1]
        flux = lam * self.kernel_map.T @ (self.kernel_coupling.T @ c)
        return DiscreteFunction(self, c, np.zeros(2), flux)

    def kernel_function(self, j: int) -> "DiscreteFunction":
        """``v1`` (``j = 1``) or ``v2`` (``j = 2``)."""
        d = np.zeros(2)
        d[j - 1] = 1.0
        return DiscreteFunction(self, np.zeros(self.N), d)

    def zero(self) -> "DiscreteFunction":
        return DiscreteFunction(self, np.zeros(self.N), np.zeros(2))

    def metadata(self) -> dict:
        return {
            "N": self.N,
            "a": self.a,
            "interval": [self.interval.alpha, self.interval.beta],
            "mass_condition": float(np.linalg.cond(self.mass)),
        }


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """``f = sum_n c_n phi_n + d_1 v1 + d_2 v2``.

    ``flux`` optionally carries the weighted Neumann trace of the Dirichlet
    part recovered from the equation the function solves. It is far more
    accurate than the pointwise endpoint value of a Galerkin approximation
    and is propagated linearly.
    """

    model: DirichletModel
    c: np.ndarray
    d: np.ndarray
    flux: np.ndarray | None = None

    def __post_init__(self) -> None:
        c = np.asarray(self.c)
        d = np.asarray(self.d)
        if c.shape != (self.model.N,) or d.shape != (2,):
            raise ValidationError("coefficient shapes do not match the model")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        if self.flux is not None:
            object.__setattr__(self, "flux", np.asarray(self.flux).reshape(2))

    def dirichlet_flux(self) -> np.ndarray:
        if self.flux is not None:
            return self.flux
        return _pointwise_flux(self.model, self.c)

    def _combine(self, other: "DiscreteFunction", sign: float) -> "DiscreteFunction":
        if other.model is not self.model:
            raise ValidationError("functions belong to different models")
        flux = None
        if self.flux is not None or other.flux is not None:
            flux = self.dirichlet_flux() + sign * other.dirichlet_flux()
        return DiscreteFunction(self.model, self.c + sign * other.c, self.d + sign * other.d, flux)

    def __add__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        return self._combine(other, 1.0)

    def __sub__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        return self._combine(other, -1.0)

    def __mul__(self, s: complex) -> "DiscreteFunction":
        flux = None if self.flux is None else s * self.flux
        return DiscreteFunction(self.model, s * self.c, s * self.d, flux)

    __rmul__ = __mul__

    def __neg__(self) -> "DiscreteFunction":
        return self * -1.0

    def without_flux(self) -> "DiscreteFunction":
        return DiscreteFunction(self.model, self.c, self.d)


def _rule(n: int, e: float) -> QuadratureRule:
    return gauss_jacobi(n, e, e)


def build_dirichlet_model(interval: Interval, order: FractionalOrder, N: int = DEFAULT_N) -> DirichletModel:
    """Assemble and diagonalize the Galerkin model with ``N`` basis functions."""
    if int(N) != N or N < 4:
        raise InvalidN(f"basis size must be an integer >= 4, got {N!r}")
    N = int(N)
    a, L = order.a, interval.L
    jac = 0.5 * L
    scale = (2.0 / L) ** (2 * a)
    nq = 2 * N + 16

    quad = {
        "mass": _rule(nq, 2 * a),
        "coupling": _rule(nq, 2 * a - 1),
        "gram": _rule(nq, 2 * a - 2),
        "action": _rule(nq, a - 1),
    }
    n = np.arange(N)
    cn = dyda_constants(a, N)
    K = scale * cn * jacobi_norm(n, a, a) * jac

    r = quad["mass"]
    P = jacobi_table(N, a, a, r.nodes)
    M = (P * r.weights) @ P.T * jac
    M = 0.5 * (M + M.T)

    r = quad["coupling"]
    P1 = jacobi_table(N, a, a, r.nodes) * r.weights
    W = np.stack([P1.sum(axis=1), P1 @ r.nodes], axis=1) * jac

    r = quad["gram"]
    m0, m1, m2 = r.weights.sum(), r.weights @ r.nodes, r.weights @ r.nodes**2
    G = np.array([[m0, m1], [m1, m2]]) * jac

    r = quad["action"]
    P2 = jacobi_table(N, a, a, r.nodes) * r.weights
    Wt = (scale * cn)[:, None] * np.stack([P2.sum(axis=1), P2 @ r.nodes], axis=1) * jac

    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedMass(f"mass matrix condition {cond:.2e} exceeds {COND_LIMIT:.0e}; reduce N")
    try:
        C = cholesky(M, lower=True)
        X = solve_triangular(C, np.diag(K), lower=True)
        S = solve_triangular(C, X.T, lower=True)
        S = 0.5 * (S + S.T)
        lam, Y = eigh(S)
    except LinAlgError as exc:
        raise IllConditionedMass(f"Cholesky reduction failed: {exc}") from exc
    V = solve_triangular(C.T, Y, lower=False)
    # deterministic sign: largest coefficient positive
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(N)])
    if not (np.all(lam > 0) and np.all(np.diff(lam) > 0)):
        raise EigDecompFailed("Dirichlet eigenvalues are not positive and simple")

    ga, ga1 = gamma_fn(a), gamma_fn(a + 1)
    kappa = (L / 4.0) ** (a - 1) / ga
    kmap = 0.5 * kappa * np.array([[1.0, 1.0], [-1.0, 1.0]])
    ups0 = ga * (4.0 / L) ** (a - 1) * np.array([[1.0, -1.0], [1.0, 1.0]])
    ups1 = ga1 * 4.0 ** (a - 1) / L**a * np.array([[1 - a, 1 + a], [1 - a, -(1 + a)]])

    ends = jacobi_table(N, a, a, np.array([-1.0, 1.0])).T

    arrays = [K, M, lam, V, W, G, Wt, ends, kmap, ups0, ups1]
    for arr in arrays:
        arr.setflags(write=False)
    return DirichletModel(
        interval=interval,
        order=order,
        N=N,
        stiffness_diag=K,
        mass=M,
        eigvals=lam,
        eigvecs=V,
        kernel_coupling=W,
        kernel_gram=G,
        action_coupling=Wt,
        end_values=ends,
        kernel_map=kmap,
        ups0_kernel=ups0,
        ups1_kernel=ups1,
        ups1_dirichlet_scale=ga1 * (4.0 / L) ** a,
        quad=quad,
    )


def _pointwise_flux(model: DirichletModel, c: np.ndarray) -> np.ndarray:
    return model.ups1_dirichlet_scale * (model.end_values @ c)


def galerkin_traces(f: DiscreteFunction, pointwise: bool = False) -> TraceVector:
    """Weighted traces ``(Ups0 f, Ups1 f)``.

    The Dirichlet part contributes only to ``Ups1``. With ``pointwise=True``
    the recovered flux is ignored and the endpoint values of the represented
    function are used.
    """
    m = f.model
    flux = _pointwise_flux(m, f.c) if pointwise else f.dirichlet_flux()
    return TraceVector(ups0=m.ups0_kernel @ f.d, ups1=flux + m.ups1_kernel @ f.d)


def inner(f: DiscreteFunction, g: DiscreteFunction) -> complex:
    """``(f, g) = int f conj(g) dx``."""
    m = f.model
    gc, gd = np.conj(g.c), np.conj(g.d)
    val = (
        f.c @ (m.mass @ gc)
        + f.c @ (m.kernel_coupling @ gd)
        + f.d @ (m.kernel_coupling.T @ gc)
        + f.d @ (m.kernel_gram @ gd)
    )
    return complex(val)


def kernel_moments(f: DiscreteFunction) -> np.ndarray:
    """``((f, v1), (f, v2))``; the kernel functions are real."""
    m = f.model
    return m.kernel_coupling.T @ f.c + m.kernel_gram @ f.d


def apply_resolvent(model: DirichletModel, lam: complex, g: DiscreteFunction) -> DiscreteFunction:
    """``(A_D - lam)^{-1} g`` by eigen-expansion; kernel parts of ``g`` are handled exactly."""
    model.check_pole(lam)
    V = model.eigvecs
    proj = V.T @ (model.mass @ g.c + model.kernel_coupling @ g.d)
    c = V @ (proj / (model.eigvals - lam))
    u = DiscreteFunction(model, c, np.zeros(2, dtype=c.dtype))
    # A_D u = g + lam u gives the flux through the Green identity
    flux = model.kernel_map.T @ (kernel_moments(g) + lam * kernel_moments(u))
    return DiscreteFunction(model, c, u.d, flux)


def evaluate(f: DiscreteFunction, x) -> np.ndarray:
    """Point values of ``f`` at points strictly inside the interval."""
    m = f.model
    x = np.atleast_1d(np.asarray(x, dtype=float))
    iv = m.interval
    if np.any(x <= iv.alpha) or np.any(x >= iv.beta):
        raise OutOfDomain("evaluation points must lie strictly inside the interval")
    y = iv.to_ref(x)
    w = 1.0 - y * y
    P = jacobi_table(m.N, m.a, m.a, y)
    vals = w**m.a * (f.c @ P) + w ** (m.a - 1) * (f.d[0] + f.d[1] * y)
    if np.isrealobj(vals) or np.all(np.imag(vals) == 0):
        return np.real(vals)
    return vals


def pv_fractional_apply(
    order: FractionalOrder,
    interval: Interval,
    f: Callable[[float], float],
    x: float,
    rtol: float = 1e-10,
) -> float:
    """Principal-value evaluation of ``(-Delta)^a`` applied to the zero extension of ``f``.

    Slow, independent of the Galerkin machinery, and meant as an oracle. The
    part of the integral outside the interval is done in closed form; near the
    singularity the symmetric second difference is replaced by its Taylor
    expansion.
    """
    a = order.a
    alpha, beta = interval.alpha, interval.beta
    if not alpha < x < beta:
        raise OutOfDomain(f"x={x} is not inside the interval")
    d1, d2 = x - alpha, beta - x
    dmin, dmax = min(d1, d2), max(d1, d2)
    fx = float(f(x))

    tail = fx * (d1 ** (-2 * a) + d2 ** (-2 * a)) / (2 * a)

    s0 = 0.05 * dmin
    h2 = 1e-3 * dmin
    h4 = 2e-2 * dmin
    fpp = (-f(x + 2 * h2) + 16 * f(x + h2) - 30 * fx + 16 * f(x - h2) - f(x - 2 * h2)) / (12 * h2**2)
    f4 = (f(x + 2 * h4) - 4 * f(x + h4) + 6 * fx - 4 * f(x - h4) + f(x - 2 * h4)) / h4**4
    near = -fpp * s0 ** (2 - 2 * a) / (2 - 2 * a) - f4 * s0 ** (4 - 2 * a) / (12 * (4 - 2 * a))

    sgn = 1.0 if d2 >= d1 else -1.0

    def sym(s: float) -> float:
        return (2 * fx - f(x + s) - f(x - s)) / s ** (1 + 2 * a)

    def one_sided(s: float) -> float:
        return (fx - f(x + sgn * s)) / s ** (1 + 2 * a)

    total = tail + near
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for fn, lo, hi in ((sym, s0, dmin), (one_sided, dmin, dmax)):
            if hi <= lo:
                continue
            val, err = integrate.quad(fn, lo, hi, limit=400, epsabs=0.0, epsrel=rtol)
            if not np.isfinite(val) or err > 1e-6 * (1.0 + abs(val)):
                raise QuadratureNonConvergence(f"integral on [{lo}, {hi}] has error {err:.2e}")
            total += val
    return order.c_a * total
