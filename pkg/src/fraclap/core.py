"""Domain types, boundary-condition validation and presets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from fraclap.errors import (
    InvalidTheta,
    NotSymmetricCompatible,
    RankDeficient,
    ValidationError,
)
from fraclap.special import gamma_fn

__all__ = [
    "BoundaryCondition",
    "ExtensionClassification",
    "FractionalOrder",
    "Interval",
    "TraceVector",
    "bc_diagnostics",
    "bc_from_dict",
    "bc_to_dict",
    "compare_theta",
    "closed_form_M0",
    "preset_bc",
    "validate_bc",
]

PRESET_LABELS = ("dirichlet", "neumann", "kvn", "custom")


@dataclass(frozen=True)
class Interval:
    """Bounded interval ``(alpha, beta)``."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValidationError("interval endpoints must be finite")
        if not self.alpha < self.beta:
            raise ValidationError(f"need alpha < beta, got ({self.alpha}, {self.beta})")

    @property
    def L(self) -> float:
        return self.beta - self.alpha

    @property
    def mid(self) -> float:
        return 0.5 * (self.alpha + self.beta)

    def dist(self, x):
        """Distance ``t(x)`` to the nearest endpoint."""
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.alpha, self.beta - x)

    def to_ref(self, x):
        """Map ``x`` in ``(alpha, beta)`` to ``y`` in ``(-1, 1)``."""
        return 2.0 * (np.asarray(x, dtype=float) - self.mid) / self.L

    def from_ref(self, y):
        return self.mid + 0.5 * self.L * np.asarray(y, dtype=float)


@dataclass(frozen=True)
class FractionalOrder:
    """Power ``a`` of the restricted fractional Laplacian, ``1/2 < a < 1``."""

    a: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", float(self.a))
        if not 0.5 < self.a < 1.0:
            raise ValidationError(f"order must satisfy 1/2 < a < 1, got {self.a!r}")

    @property
    def c_a(self) -> float:
        a = self.a
        return a * 4.0**a * gamma_fn(0.5 + a) / (math.sqrt(math.pi) * gamma_fn(1.0 - a))


def _as_matrix(m: Any, name: str) -> np.ndarray:
    try:
        arr = np.array(m, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not a numeric matrix ({exc})") from exc
    if arr.shape != (2, 2):
        raise ValidationError(f"{name} must be 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """Boundary condition ``B Ups0 f = A Ups1 f``.

    Construct through :func:`validate_bc` or :func:`preset_bc`; the
    constructor itself only normalizes shapes.
    """

    A: np.ndarray
    B: np.ndarray
    label: str = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", _as_matrix(self.A, "A"))
        object.__setattr__(self, "B", _as_matrix(self.B, "B"))
        if self.label not in PRESET_LABELS:
            raise ValidationError(f"unknown label {self.label!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundaryCondition):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.B, other.B)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.A.imag == 0) and np.all(self.B.imag == 0))

    def transformed(self, X) -> "BoundaryCondition":
        """Equivalent pair ``(X A, X B)`` for invertible ``X``."""
        X = _as_matrix(X, "X")
        return validate_bc(X @ self.A, X @ self.B)


@dataclass(frozen=True, eq=False)
class TraceVector:
    """Weighted Dirichlet and Neumann traces ``(Ups0 f, Ups1 f)``."""

    ups0: np.ndarray
    ups1: np.ndarray

    def __post_init__(self) -> None:
        for name in ("ups0", "ups1"):
            v = np.array(getattr(self, name), dtype=complex).reshape(2)
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"{name} has non-finite entries")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def bc_residual(self, bc: BoundaryCondition) -> float:
        return float(np.linalg.norm(bc.B @ self.ups0 - bc.A @ self.ups1))


@dataclass(frozen=True)
class ExtensionClassification:
    nonnegative: bool
    lower_bound: float
    num_nonpositive: int
    neumann_like_flag: bool = False
    tolerance: float = 1e-8
    notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.num_nonpositive not in (0, 1, 2):
            raise ValidationError(
                f"num_nonpositive must be 0, 1 or 2, got {self.num_nonpositive}"
            )
        if self.nonnegative and self.lower_bound < -self.tolerance:
            raise ValidationError("nonnegative classification with negative lower bound")


def bc_diagnostics(A, B) -> dict[str, float]:
    """Compatibility residual and singular values of ``(A | B)``."""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    sym = float(np.linalg.norm(A @ B.conj().T - B @ A.conj().T, 2))
    sv = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    return {
        "sym_residual": sym,
        "tol_sym": 1e-10 * (1.0 + scale),
        "sigma_min": float(sv[-1]),
        "sigma_max": float(sv[0]),
        "tol_rank": 1e-10 * float(sv[0]),
    }


def validate_bc(A, B=None, label: str = "custom") -> BoundaryCondition:
    """Validate ``(A, B)`` and wrap it as a :class:`BoundaryCondition`.

    Passing an existing ``BoundaryCondition`` as the only argument re-validates
    it and returns an equal value.
    """
    if isinstance(A, BoundaryCondition) and B is None:
        bc = A
        A, B, label = bc.A, bc.B, bc.label
    if B is None:
        raise ValidationError("validate_bc needs both A and B")
    d = bc_diagnostics(A, B)
    if d["sym_residual"] > d["tol_sym"]:
        raise NotSymmetricCompatible(
            f"A B* - B A* has norm {d['sym_residual']:.3e} > {d['tol_sym']:.3e}"
        )
    if not d["sigma_min"] > d["tol_rank"]:
        raise RankDeficient(
            f"(A | B) has smallest singular value {d['sigma_min']:.3e}"
        )
    return BoundaryCondition(A=np.array(A, dtype=complex), B=np.array(B, dtype=complex), label=label)


def closed_form_M0(a: float, L: float) -> np.ndarray:
    """``(a/L) [[-a, 1], [1, -a]]``; for ``a = 1`` this is the classical ``M(0)``."""
    return (a / L) * np.array([[-a, 1.0], [1.0, -a]])


def _order_value(order) -> float:
    if isinstance(order, FractionalOrder):
        return order.a
    a = float(order)
    if a == 1.0:
        return a
    return FractionalOrder(a).a


def _check_hermitian(theta) -> np.ndarray:
    T = _as_matrix(theta, "theta")
    if np.linalg.norm(T - T.conj().T, 2) > 1e-10 * (1.0 + np.linalg.norm(T, 2)):
        raise InvalidTheta("theta must be Hermitian")
    return T


def preset_bc(
    kind: str,
    interval: Interval | None = None,
    order: FractionalOrder | float | None = None,
    theta=None,
) -> BoundaryCondition:
    """Canonical boundary conditions.

    ``kind`` is one of ``dirichlet``, ``neumann``, ``kvn`` or ``theta``. The
    Krein-von Neumann preset needs the interval and order; ``order=1`` gives
    the classical Laplacian's version.
    """
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    kind = kind.lower()
    if kind == "dirichlet":
        return BoundaryCondition(zero, eye, "dirichlet")
    if kind == "neumann":
        return BoundaryCondition(eye, zero, "neumann")
    if kind == "kvn":
        if interval is None or order is None:
            raise ValidationError("kvn preset requires interval and order")
        B = closed_form_M0(_order_value(order), interval.L)
        return BoundaryCondition(eye, B, "kvn")
    if kind in ("theta", "theta_matrix"):
        if theta is None:
            raise InvalidTheta("theta preset requires a matrix")
        T = _check_hermitian(theta)
        return BoundaryCondition(eye, np.array(T), "custom")
    raise ValidationError(f"unknown preset {kind!r}")


def compare_theta(theta1, theta2, tol: float = 1e-10) -> str:
    """Order two Hermitian matrices: ``leq`` means ``theta1 <= theta2``."""
    T1 = np.asarray(theta1, dtype=complex)
    T2 = np.asarray(theta2, dtype=complex)
    D = T2 - T1
    D = 0.5 * (D + D.conj().T)
    ev = np.linalg.eigvalsh(D)
    eps = tol * (1.0 + max(np.linalg.norm(T1, 2), np.linalg.norm(T2, 2)))
    if np.all(np.abs(ev) <= eps):
        return "equal"
    if np.all(ev >= -eps):
        return "leq"
    if np.all(ev <= eps):
        return "geq"
    return "incomparable"


def _decode_matrix(m, name: str) -> np.ndarray:
    """Accept ``[[re, im], ...]`` pairs or plain numbers per entry."""
    try:
        rows = []
        for row in m:
            out = []
            for e in row:
                if isinstance(e, (list, tuple)):
                    if len(e) != 2:
                        raise ValidationError(f"{name}: complex entries are [re, im] pairs")
                    out.append(complex(float(e[0]), float(e[1])))
                else:
                    out.append(complex(float(e)))
            rows.append(out)
    except TypeError as exc:
        raise ValidationError(f"{name}: malformed matrix") from exc
    return _as_matrix(rows, name)


def bc_from_dict(
    obj: Mapping[str, Any],
    interval: Interval | None = None,
    order: FractionalOrder | float | None = None,
) -> BoundaryCondition:
    """Parse the JSON form of a boundary condition (explicit matrices or preset)."""
    if not isinstance(obj, Mapping):
        raise ValidationError("boundary condition must be a JSON object")
    if "preset" in obj:
        theta = _decode_matrix(obj["theta"], "theta") if "theta" in obj else None
        return preset_bc(str(obj["preset"]), interval, order, theta)
    if "A" not in obj or "B" not in obj:
        raise ValidationError("boundary condition needs keys 'A' and 'B' or 'preset'")
    label = str(obj.get("label", "custom"))
    return validate_bc(_decode_matrix(obj["A"], "A"), _decode_matrix(obj["B"], "B"), label=label)


def bc_to_dict(bc: BoundaryCondition) -> dict[str, Any]:
    def enc(m: np.ndarray):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]

    return {"A": enc(bc.A), "B": enc(bc.B), "label": bc.label}
