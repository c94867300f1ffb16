"""gamma-field and Weyl function of the fractional boundary triplet."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fraclap.core import FractionalOrder, Interval, closed_form_M0
from fraclap.dirichlet import (
    DirichletModel,
    DiscreteFunction,
    apply_resolvent,
    galerkin_traces,
    inner,
)
from fraclap.errors import QuadratureNonConvergence, ValidationError
from fraclap.special import gauss_jacobi, jacobi_table

__all__ = [
    "WeylEvaluation",
    "gamma0_apply",
    "gamma_adjoint",
    "gamma_lambda",
    "green_identity_residual",
    "green_identity_terms",
    "quadratic_form_check",
    "weyl_M",
    "weyl_M0",
    "weyl_derivative",
]

_J = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class WeylEvaluation:
    lam: complex
    M: np.ndarray
    pole_distance: float
    hermiticity_residual: float
    swap_residual: float


def weyl_M0(interval: Interval, order: FractionalOrder) -> np.ndarray:
    """Closed form ``M(0) = (a/L) [[-a, 1], [1, -a]]``."""
    return closed_form_M0(order.a, interval.L)


def gamma0_apply(model: DirichletModel, c) -> DiscreteFunction:
    """``gamma(0) c``: the kernel element with ``Ups0 = c``."""
    c = np.asarray(c).reshape(2)
    return DiscreteFunction(model, np.zeros(model.N, dtype=c.dtype), model.kernel_map @ c)


def gamma_lambda(model: DirichletModel, lam: complex, c) -> DiscreteFunction:
    """``gamma(lam) c = (1 + lam (A_D - lam)^{-1}) gamma(0) c``."""
    g0 = gamma0_apply(model, c)
    if lam == 0:
        return g0
    return g0 + lam * apply_resolvent(model, lam, g0)


def gamma_adjoint(model: DirichletModel, lam: complex, g: DiscreteFunction) -> np.ndarray:
    """``gamma(lam)* g``, the vector ``((g, gamma(lam) e_j))_j``."""
    return np.array([inner(g, gamma_lambda(model, lam, e)) for e in np.eye(2)])


def _weyl_matrix(model: DirichletModel, lam: complex) -> np.ndarray:
    P = model.kernel_map
    M0 = model.ups1_kernel @ P
    if lam == 0:
        return M0.copy()
    Z = model.Z
    D = 1.0 / (model.eigvals - lam)
    return M0 + lam * (P.T @ model.kernel_gram @ P) + lam * lam * (Z.T @ (D[:, None] * Z))


def weyl_M(model: DirichletModel, lam: complex) -> WeylEvaluation:
    """``M(lam) = M(0) + gamma(0)* [lam + lam^2 (A_D - lam)^{-1}] gamma(0)``."""
    dist = model.check_pole(lam)
    if isinstance(lam, complex) and lam.imag == 0:
        lam = lam.real
    M = np.asarray(_weyl_matrix(model, lam))
    nrm = np.linalg.norm(M, 2)
    if np.isreal(lam):
        herm = float(np.linalg.norm(M - M.conj().T, 2))
    else:
        herm = float(np.linalg.norm(_weyl_matrix(model, np.conj(lam)) - M.conj().T, 2))
    swap = float(np.linalg.norm(_J @ M @ _J - M, 2))
    return WeylEvaluation(lam, M, dist, herm / (1.0 + nrm), swap / (1.0 + nrm))


def weyl_derivative(model: DirichletModel, lam: float) -> np.ndarray:
    """``M'(lam) = gamma(lam)* gamma(lam)``."""
    model.check_pole(lam)
    P = model.kernel_map
    Z = model.Z
    D = 1.0 / (model.eigvals - lam)
    return P.T @ model.kernel_gram @ P + Z.T @ ((2 * lam * D + lam * lam * D * D)[:, None] * Z)


def green_identity_terms(model: DirichletModel, f: DiscreteFunction, g: DiscreteFunction):
    """The four terms ``(Tf, g), (f, Tg), (Ups1 f, Ups0 g), (Ups0 f, Ups1 g)``.

    ``T`` acts on the Dirichlet part through the exact polynomial image of
    each basis function; traces are the pointwise ones.
    """

    def t_inner(u: DiscreteFunction, w: DiscreteFunction) -> complex:
        return complex(
            u.c @ (model.stiffness_diag * np.conj(w.c)) + u.c @ (model.action_coupling @ np.conj(w.d))
        )

    tf = galerkin_traces(f, pointwise=True)
    tg = galerkin_traces(g, pointwise=True)
    return (
        t_inner(f, g),
        np.conj(t_inner(g, f)),
        complex(tf.ups1 @ np.conj(tg.ups0)),
        complex(tf.ups0 @ np.conj(tg.ups1)),
    )


def green_identity_residual(model: DirichletModel, f: DiscreteFunction, g: DiscreteFunction) -> float:
    """``|(Tf, g) - (f, Tg) - (Ups1 f, Ups0 g) + (Ups0 f, Ups1 g)|``."""
    t1, t2, b1, b2 = green_identity_terms(model, f, g)
    return float(abs(t1 - t2 - b1 + b2))


def _form_double_integral(model: DirichletModel, c: np.ndarray, n: int) -> float:
    a, L = model.a, model.L
    N = model.N

    def F(y):
        return (1.0 - y * y) ** a * (c @ jacobi_table(N, a, a, y.ravel())).reshape(y.shape)

    # s = y - z in (0, 2) with weight s^(1 - 2a), z in (-1, 1 - s) by Gauss-Legendre
    rs = gauss_jacobi(n, 0.0, 1.0 - 2 * a)
    s = 1.0 + rs.nodes
    gl = np.polynomial.legendre.leggauss(n)
    zt, zw = gl
    z = -1.0 + 0.5 * (2.0 - s)[:, None] * (zt[None, :] + 1.0)
    wz = 0.5 * (2.0 - s)[:, None] * zw[None, :]
    diff = F(z + s[:, None]) - F(z)
    inner_s = np.sum(wz * np.abs(diff) ** 2, axis=1)
    double = 2.0 * np.sum(rs.weights * inner_s / s**2)

    # one point inside, the other outside: closed-form kernel tail
    r1 = gauss_jacobi(n, 2 * a, 0.0)
    r2 = gauss_jacobi(n, 0.0, 2 * a)
    p1 = c @ jacobi_table(N, a, a, r1.nodes)
    p2 = c @ jacobi_table(N, a, a, r2.nodes)
    tail_ref = (r1.weights @ np.abs(p1) ** 2 + r2.weights @ np.abs(p2) ** 2) / (2 * a)

    c_a = model.order.c_a
    return float((0.5 * L) ** (1 - 2 * a) * c_a * (0.5 * double + tail_ref))


def quadratic_form_check(model: DirichletModel, f: DiscreteFunction, n: int = 200) -> tuple[float, float]:
    """``(q_double_integral, q_operator)`` for a function with zero kernel part.

    The first value is the nonlocal double integral evaluated by tensor
    quadrature; the second uses the diagonal stiffness. Slow, test use only.
    """
    if np.any(f.d != 0):
        raise ValidationError("quadratic_form_check needs a function with zero kernel part")
    q_op = float(np.real(f.c @ (model.stiffness_diag * np.conj(f.c))))
    if not np.any(f.c):
        return 0.0, q_op
    q = _form_double_integral(model, f.c, n)
    q_coarse = _form_double_integral(model, f.c, (3 * n) // 4)
    if abs(q - q_coarse) > 1e-3 * abs(q):
        raise QuadratureNonConvergence(
            f"double integral unstable under refinement: {q_coarse} vs {q}"
        )
    return q, q_op
