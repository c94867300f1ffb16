"""Spectra and classification of self-adjoint realizations ``B Ups0 f = A Ups1 f``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from fraclap._roots import form_margin, locate_roots, segment_grids
from fraclap.core import BoundaryCondition, ExtensionClassification, validate_bc
from fraclap.dirichlet import (
    DirichletModel,
    DiscreteFunction,
    apply_resolvent,
    evaluate,
    galerkin_traces,
    inner,
)
from fraclap.errors import (
    BCMatrixSingular,
    ModelTooCoarse,
    NotAnEigenvalue,
    PencilSolverFailed,
    ValidationError,
)
from fraclap.results import SpectrumEntry, SpectrumResult, merge_entries
from fraclap.special import gamma_fn
from fraclap.weyl import gamma_adjoint, gamma_lambda, weyl_M

__all__ = [
    "EigenfunctionRepr",
    "SpectrumEntry",
    "SpectrumResult",
    "classify",
    "eigenfunction_bound_check",
    "eigenfunctions",
    "krein_resolvent_apply",
    "lambda_min_auto",
    "random_bc",
    "spectrum_pencil",
    "spectrum_weyl",
]

MERGE_REL = 1e-6
FLOOR_FACTOR = 1e6


@dataclass(frozen=True, eq=False)
class EigenfunctionRepr:
    lam: float
    functions: tuple[DiscreteFunction, ...]
    bc_residuals: tuple[float, ...] = field(default_factory=tuple)
    bound_check: float | None = None


def _char(model: DirichletModel, bc: BoundaryCondition):
    nA = np.linalg.norm(bc.A, 2)
    nB = np.linalg.norm(bc.B, 2)

    def char_fn(lam: float):
        M = weyl_M(model, lam).M
        return bc.B - bc.A @ M, nB + nA * np.linalg.norm(M, 2)

    return char_fn


def lambda_min_auto(model: DirichletModel, bc: BoundaryCondition) -> tuple[float, list[str]]:
    """A point below the whole spectrum of the realization.

    Doubles a negative trial point until the boundary form is positive there
    (which places the spectrum strictly above it) and ``|M^{-1}|`` has decayed
    by a factor 10 from its value at ``-lambda_1``.
    """
    lam1 = model.lambda1
    ref = np.linalg.norm(np.linalg.inv(weyl_M(model, -lam1).M), 2)
    x = -4.0 * lam1
    floor = -FLOOR_FACTOR * lam1
    while x > floor:
        M = weyl_M(model, x).M
        if np.linalg.norm(np.linalg.inv(M), 2) <= 0.1 * ref and form_margin(bc.A, bc.B, M) > 0:
            return x, []
        x *= 2.0
    return floor, [f"lower search cutoff hit the floor {floor:.6g}; eigenvalues below it are not searched"]


def _resolved_limit(model: DirichletModel) -> float:
    return float(model.eigvals[max(model.N // 4, 1) - 1])


def _dirichlet_coincidences(model: DirichletModel, bc: BoundaryCondition, lambda_max: float, rel: float = 1e-6):
    out = []
    nA = np.linalg.norm(bc.A, 2)
    for k, lam in enumerate(model.eigvals, start=1):
        if lam > lambda_max:
            break
        flux = model.eigenfunction(k).dirichlet_flux()
        if np.linalg.norm(bc.A @ flux) <= rel * nA * np.linalg.norm(flux):
            out.append(SpectrumEntry(float(lam), 1, "dirichlet_coincidence"))
    return out


def spectrum_weyl(
    model: DirichletModel,
    bc: BoundaryCondition,
    lambda_max: float,
    n_grid: int = 64,
    lambda_min: float | None = None,
    cross_check: bool = True,
) -> SpectrumResult:
    """Eigenvalues ``<= lambda_max`` from the zeros of ``det(B - A M(lambda))``.

    Dirichlet eigenvalues are tested separately: ``lambda_k`` belongs to the
    spectrum when ``A Ups1 phi_k = 0``. With ``cross_check`` the pencil
    solver is run as well and eigenvalues only it can see (typically ones
    sitting on a Dirichlet eigenvalue) are merged in with a warning.
    """
    if not np.isfinite(lambda_max):
        raise ValidationError("lambda_max must be finite")
    if lambda_max > _resolved_limit(model):
        raise ModelTooCoarse(
            f"lambda_max={lambda_max:.6g} exceeds the resolved range "
            f"{_resolved_limit(model):.6g} of an N={model.N} model"
        )
    notes: list[str] = []
    if lambda_min is None:
        lo, w = lambda_min_auto(model, bc)
        notes.extend(w)
    else:
        lo = float(lambda_min)
    lo = min(lo, lambda_max - 1.0)

    lam1 = model.lambda1
    poles = [float(p) for p in model.eigvals]
    grids = segment_grids(lo, lambda_max, poles, lambda p: 2 * model.tol_pole(p), n_grid, lam1)
    roots = locate_roots(_char(model, bc), grids, xtol=1e-14 * max(1.0, lam1))
    entries = [SpectrumEntry(x, m, "weyl_root") for x, m in roots if x <= lambda_max]
    entries.extend(_dirichlet_coincidences(model, bc, lambda_max))
    entries = merge_entries(entries, MERGE_REL)

    if cross_check:
        count = int(np.searchsorted(model.eigvals, lambda_max, side="right")) + 4
        pen = spectrum_pencil(model, bc, min(count, model.N), lambda_min=lo)
        extra = []
        for e in pen.eigenvalues:
            if e.lam > lambda_max or e.lam < lo:
                continue
            if any(abs(e.lam - f.lam) <= MERGE_REL * (1.0 + abs(e.lam)) for f in entries):
                continue
            extra.append(e)
            notes.append(f"eigenvalue {e.lam:.12g} found only by the pencil solver")
        if extra:
            entries = merge_entries(entries + extra, MERGE_REL)

    return SpectrumResult(entries, (lo, float(lambda_max)), tuple(notes))


def _pencil_matrices(model: DirichletModel, bc: BoundaryCondition) -> tuple[np.ndarray, np.ndarray]:
    N = model.N
    A, B = bc.A, bc.B
    P = model.kernel_map
    blk = A @ model.ups1_kernel - B @ model.ups0_kernel
    Abar = np.zeros((N + 2, N + 2), dtype=complex)
    Bbar = np.zeros((N + 2, N + 2), dtype=complex)
    Abar[:N, :N] = np.diag(model.stiffness_diag)
    Abar[N:, N:] = blk
    Bbar[:N, :N] = model.mass
    Bbar[:N, N:] = model.kernel_coupling
    Bbar[N:, :N] = -A @ P.T @ model.kernel_coupling.T
    Bbar[N:, N:] = -A @ P.T @ model.kernel_gram
    if bc.is_real:
        return Abar.real.copy(), Bbar.real.copy()
    return Abar, Bbar


def spectrum_pencil(
    model: DirichletModel,
    bc: BoundaryCondition,
    count: int,
    lambda_min: float = -np.inf,
) -> SpectrumResult:
    """Lowest ``count`` eigenvalues of the ``(N+2) x (N+2)`` linear pencil.

    Unknowns are the Dirichlet coefficients and the two kernel coefficients.
    The first ``N`` rows are the Galerkin equations, the last two impose the
    boundary condition with the Neumann trace of the Dirichlet part taken in
    the weak form ``gamma(0)* (lambda f)``.
    """
    if not 1 <= count <= model.N:
        raise ValidationError(f"count must be in 1..{model.N}")
    Abar, Bbar = _pencil_matrices(model, bc)
    try:
        w = linalg.eig(Abar, Bbar, homogeneous_eigvals=True, right=False)
    except (linalg.LinAlgError, ValueError) as exc:
        raise PencilSolverFailed(str(exc)) from exc
    alpha, beta = w
    finite = np.abs(beta) > 1e-12 * np.abs(alpha) + 1e-300
    lam = alpha[finite] / beta[finite]
    scale = 1.0 + np.abs(lam)
    real = np.abs(lam.imag) <= 1e-8 * scale
    vals = np.sort(lam[real].real)
    vals = vals[vals >= lambda_min - MERGE_REL * (1.0 + abs(lambda_min))] if np.isfinite(lambda_min) else vals
    vals = np.array([_polish(Abar, Bbar, v) for v in vals[: count + 2]])

    entries: list[SpectrumEntry] = []
    i = 0
    while i < len(vals) and len(entries) < count:
        j = i + 1
        while j < len(vals) and abs(vals[j] - vals[i]) <= MERGE_REL * (1.0 + abs(vals[i])):
            j += 1
        cluster = vals[i:j]
        if j - i > 2:
            raise PencilSolverFailed(f"eigenvalue cluster of size {j - i} near {vals[i]:.6g}")
        entries.append(SpectrumEntry(float(np.mean(cluster)), j - i, "pencil"))
        i = j
    if not entries:
        raise PencilSolverFailed("no finite real eigenvalues")
    return SpectrumResult(entries, (float(entries[0].lam), float(entries[-1].lam)))


def _polish(Abar: np.ndarray, Bbar: np.ndarray, lam: float, steps: int = 2) -> float:
    """Two-sided Rayleigh quotient steps on the pencil (no-op for multiple eigenvalues)."""
    n = Abar.shape[0]
    x = np.ones(n)
    y = np.ones(n)
    mu = lam
    for _ in range(steps):
        S = Abar - mu * Bbar
        try:
            with warnings.catch_warnings():
                # an exactly singular shift is harmless for inverse iteration
                warnings.simplefilter("ignore", linalg.LinAlgWarning)
                lu = linalg.lu_factor(S, check_finite=False)
        except (linalg.LinAlgError, ValueError):
            break
        x = linalg.lu_solve(lu, Bbar @ x, check_finite=False)
        y = linalg.lu_solve(lu, Bbar.conj().T @ y, trans=2, check_finite=False)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            break
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        den = y.conj() @ Bbar @ x
        if den == 0:
            break
        new = (y.conj() @ Abar @ x) / den
        if not np.isfinite(new) or abs(new - lam) > 1e-6 * (1.0 + abs(lam)):
            return lam
        mu = float(np.real(new))
    return mu


def classify(model: DirichletModel, bc: BoundaryCondition, tol: float = 1e-10) -> ExtensionClassification:
    """Nonnegativity, a spectral lower bound and the number of nonpositive eigenvalues."""
    A, B = bc.A, bc.B
    M0 = weyl_M(model, 0.0).M
    nonneg = form_margin(A, B, M0) >= -tol
    lam1 = model.lambda1
    notes: list[str] = []

    lo, w = lambda_min_auto(model, bc)
    notes.extend(w)
    hi = lam1 - 1e-6 * lam1

    def margin(x: float) -> float:
        return form_margin(A, B, weyl_M(model, x).M)

    spec = spectrum_weyl(model, bc, lambda_max=0.5 * lam1, lambda_min=lo)
    zero_tol = 1e-8 * lam1
    n_np = spec.num_nonpositive(zero_tol)

    if margin(hi) >= 0:
        lower = lam1
    elif margin(lo) > 0:
        lower = brentq(margin, lo, hi, xtol=1e-13 * lam1, rtol=1e-12)
    else:
        notes.append("form criterion inconclusive; using the smallest computed eigenvalue")
        lower = spec.eigenvalues[0].lam if spec.eigenvalues else lam1
    if nonneg:
        lower = max(lower, 0.0) if lower > -zero_tol else lower
    neumann_like = bool(
        np.linalg.matrix_rank(A) == 2 and np.linalg.norm(B, 2) <= 1e-12 * np.linalg.norm(A, 2)
    )
    if n_np > 2:
        raise ValidationError(f"found {n_np} nonpositive eigenvalues; at most two are possible")
    return ExtensionClassification(
        nonnegative=bool(nonneg),
        lower_bound=float(lower),
        num_nonpositive=n_np,
        neumann_like_flag=neumann_like,
        tolerance=max(zero_tol, 1e-8),
        notes=tuple(notes),
    )


def krein_resolvent_apply(
    model: DirichletModel, bc: BoundaryCondition, lam: complex, g: DiscreteFunction
) -> DiscreteFunction:
    """``(A_D - lam)^{-1} g + gamma(lam) (B - A M(lam))^{-1} A gamma(conj lam)* g``."""
    base = apply_resolvent(model, lam, g)
    if not np.any(bc.A):
        return base
    M = weyl_M(model, lam).M
    D = bc.B - bc.A @ M
    scale = np.linalg.norm(bc.B, 2) + np.linalg.norm(bc.A, 2) * np.linalg.norm(M, 2)
    if np.linalg.svd(D, compute_uv=False)[-1] <= 1e-12 * scale:
        raise BCMatrixSingular(f"B - A M(lambda) is singular at lambda={lam}; it is an eigenvalue")
    rhs = bc.A @ gamma_adjoint(model, np.conj(lam), g)
    h = np.linalg.solve(D, rhs)
    return base + gamma_lambda(model, lam, h)


def _normalize(f: DiscreteFunction) -> DiscreteFunction:
    nrm = np.sqrt(abs(inner(f, f)))
    return f * (1.0 / nrm) if nrm > 0 else f


def _bc_residual(f: DiscreteFunction, bc: BoundaryCondition) -> float:
    tr = galerkin_traces(f)
    scale = np.linalg.norm(tr.ups0) + np.linalg.norm(tr.ups1)
    return tr.bc_residual(bc) / max(scale, 1e-300)


def _pencil_functions(model: DirichletModel, bc: BoundaryCondition, lam: float, rel: float = 1e-7):
    Abar, Bbar = _pencil_matrices(model, bc)
    _, s, vh = np.linalg.svd(Abar - lam * Bbar)
    null = vh[s <= rel * s[0]].conj()
    out = []
    for z in null:
        c, d = z[: model.N], z[model.N:]
        flux = lam * model.kernel_map.T @ (model.kernel_coupling.T @ c + model.kernel_gram @ d)
        out.append(DiscreteFunction(model, c, d, flux))
    return out


def eigenfunctions(
    model: DirichletModel, bc: BoundaryCondition, lam: float, rel: float = 1e-7
) -> EigenfunctionRepr:
    """Basis of ``ker(A_{A,B} - lam)``, each function normalized in ``L^2``."""
    lam = float(lam)
    funcs: list[DiscreteFunction] = []
    k = int(np.argmin(np.abs(model.eigvals - lam)))
    near_pole = abs(model.eigvals[k] - lam) <= MERGE_REL * (1.0 + abs(lam))
    if near_pole:
        phi = model.eigenfunction(k + 1)
        flux = phi.dirichlet_flux()
        if np.linalg.norm(bc.A @ flux) <= 1e-6 * np.linalg.norm(bc.A, 2) * np.linalg.norm(flux):
            funcs.append(phi)
        else:
            funcs.extend(_pencil_functions(model, bc, lam))
    else:
        M = weyl_M(model, lam).M
        D = bc.B - bc.A @ M
        scale = np.linalg.norm(bc.B, 2) + np.linalg.norm(bc.A, 2) * np.linalg.norm(M, 2)
        _, s, vh = np.linalg.svd(D)
        for sv, row in zip(s, vh):
            if sv <= rel * scale:
                funcs.append(gamma_lambda(model, lam, row.conj()))
    if not funcs:
        raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue of this realization")
    funcs = [_normalize(f) for f in funcs]
    return EigenfunctionRepr(lam, tuple(funcs), tuple(_bc_residual(f, bc) for f in funcs))


def eigenfunction_bound_check(model: DirichletModel, k: int, n_grid: int = 1000):
    """Compare ``|phi_k| / |phi_k|_inf`` with ``lambda_k / Gamma(2a+1) (L/2)^(2a) (1 - y^2)^a``.

    The right-hand side is ``lambda_k`` times the solution of
    ``(-Delta)^a f = 1`` with zero exterior values; the dilation from the
    reference interval contributes ``(L/2)^(2a)``. Returns
    ``(max(lhs - rhs), profile)`` where ``profile`` holds the grid and both
    sides.
    """
    iv = model.interval
    a = model.a
    phi = model.eigenfunction(k)
    x = iv.alpha + iv.L * (np.arange(n_grid) + 0.5) / n_grid
    vals = np.abs(evaluate(phi, x))
    # sup norm from a much finer grid
    xf = iv.alpha + iv.L * (np.arange(40 * n_grid) + 0.5) / (40 * n_grid)
    sup = max(np.max(np.abs(evaluate(phi, xf))), np.max(vals))
    y = iv.to_ref(x)
    rhs = model.eigvals[k - 1] / gamma_fn(2 * a + 1) * (0.5 * iv.L) ** (2 * a) * (1.0 - y * y) ** a
    lhs = vals / sup
    profile = {"x": x, "lhs": lhs, "rhs": rhs}
    return float(np.max(lhs - rhs)), profile


def random_bc(rng: np.random.Generator, singular_prob: float = 0.2, complex_prob: float = 0.5, scale: float = 2.0) -> BoundaryCondition:
    """Random self-adjoint boundary condition.

    Usually ``(A, B) = (X, X H)`` with ``X`` invertible and ``H`` Hermitian;
    with probability ``singular_prob`` a relation with a one-dimensional
    multivalued part (one Dirichlet-type and one Robin-type condition in a
    rotated basis).
    """
    cplx = rng.random() < complex_prob

    def gauss(*shape):
        z = rng.standard_normal(shape)
        if cplx:
            z = z + 1j * rng.standard_normal(shape)
        return z

    X = gauss(2, 2)
    while abs(np.linalg.det(X)) < 1e-2:
        X = gauss(2, 2)
    if rng.random() < singular_prob:
        U, _ = np.linalg.qr(gauss(2, 2))
        u, w = U[:, 0], U[:, 1]
        theta = scale * rng.standard_normal()
        A0 = np.vstack([u.conj(), np.zeros(2)])
        B0 = np.vstack([theta * u.conj(), w.conj()])
        return validate_bc(X @ A0, X @ B0)
    H = scale * gauss(2, 2)
    H = 0.5 * (H + H.conj().T)
    return validate_bc(X, X @ H)
