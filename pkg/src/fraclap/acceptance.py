"""Acceptance criteria, runnable from pytest and from ``fraclap selftest``.

Every criterion returns a :class:`CriterionResult`; none of them raises on a
numerical mismatch. Default parameters are the desk-scale ones (``N = 120``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from fraclap._roots import nullity
from fraclap.classical import classical_spectrum, classical_weyl
from fraclap.core import FractionalOrder, Interval, closed_form_M0, preset_bc
from fraclap.dirichlet import DEFAULT_N, build_dirichlet_model, dyda_constants, pv_fractional_apply
from fraclap.extensions import (
    classify,
    eigenfunction_bound_check,
    random_bc,
    spectrum_pencil,
    spectrum_weyl,
)
from fraclap.special import gamma_fn, jacobi_table
from fraclap.weyl import (
    gamma_lambda,
    green_identity_terms,
    quadratic_form_check,
    weyl_M,
)
from fraclap.dirichlet import galerkin_traces

__all__ = ["CRITERIA", "CriterionResult", "robin_shooting", "run_all", "select"]

ORDERS = (0.6, 0.75, 0.9)
REF = Interval(-1.0, 1.0)
PTS = (-0.7, -0.3, 0.1, 0.45, 0.8)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


@lru_cache(maxsize=32)
def _model(alpha: float, beta: float, a: float, N: int = DEFAULT_N):
    return build_dirichlet_model(Interval(alpha, beta), FractionalOrder(a), N)


def robin_shooting(theta: float, L: float = 1.0, bracket: tuple[float, float] = (0.0, 9.0)) -> float:
    """Smallest eigenvalue of ``-f'' = lam f``, ``f'(0) = theta f(0)``, ``-f'(L) = theta f(L)``.

    Integrates the initial value problem ``f(0) = 1, f'(0) = theta`` and finds
    the zero of the right boundary residual.
    """

    def residual(lam: float) -> float:
        sol = solve_ivp(
            lambda x, u: [u[1], -lam * u[0]],
            (0.0, L),
            [1.0, theta],
            rtol=1e-12,
            atol=1e-14,
            method="DOP853",
        )
        f, fp = sol.y[:, -1]
        return fp + theta * f

    return brentq(residual, *bracket, xtol=1e-13, rtol=1e-13)


# ---------------------------------------------------------------- criteria


def c01_classical_dirichlet() -> tuple[bool, str]:
    iv = Interval(0.0, 1.0)
    res = classical_spectrum(iv, preset_bc("dirichlet"), 400.0)
    exact = np.array([(k * math.pi) ** 2 for k in range(1, 7)])
    got = np.array(res.values)
    if got.shape != exact.shape:
        return False, f"expected 6 eigenvalues, got {got.tolist()}"
    err = float(np.max(np.abs(got / exact - 1)))
    return err < 1e-10, f"max rel err {err:.2e}"


def c02_classical_neumann_kvn_robin() -> tuple[bool, str]:
    iv = Interval(0.0, 1.0)
    neu = classical_spectrum(iv, preset_bc("neumann"), 400.0).values
    exact = [0.0] + [(k * math.pi) ** 2 for k in range(1, 7)]
    ok_n = len(neu) == len(exact) and abs(neu[0]) < 1e-10 and all(
        abs(x / y - 1) < 1e-10 for x, y in zip(neu[1:], exact[1:])
    )
    kvn = classical_spectrum(iv, preset_bc("kvn", iv, 1.0), 100.0)
    first = kvn.eigenvalues[0]
    ok_k = abs(first.lam) < 1e-8 and first.multiplicity == 2 and all(e.lam > 0 for e in kvn.eigenvalues[1:])
    rob = classical_spectrum(iv, preset_bc("theta", theta=np.eye(2)), 20.0).values[0]
    ref = robin_shooting(1.0)
    ok_r = abs(rob - ref) < 1e-8
    return ok_n and ok_k and ok_r, (
        f"neumann {'ok' if ok_n else neu}; kvn first {first.lam:.2e} x{first.multiplicity}; "
        f"robin {rob:.12f} vs shooting {ref:.12f}"
    )


def c03_weyl_M0() -> tuple[bool, str]:
    worst = 0.0
    for a in ORDERS:
        for alpha, beta in ((-1.0, 1.0), (0.0, 2.5)):
            m = _model(alpha, beta, a)
            M = weyl_M(m, 0.0).M
            worst = max(worst, float(np.max(np.abs(M - closed_form_M0(a, beta - alpha)))))
    return worst < 1e-10, f"max abs deviation {worst:.2e}"


def _v(a: float, j: int) -> Callable[[float], float]:
    def f(x: float) -> float:
        if not -1.0 < x < 1.0:
            return 0.0
        w = (1.0 - x * x) ** (a - 1)
        return w if j == 1 else x * w

    return f


def c04_kernel_annihilation() -> tuple[bool, str]:
    a = 0.75
    order = FractionalOrder(a)
    worst = max(abs(pv_fractional_apply(order, REF, _v(a, j), x)) for j in (1, 2) for x in PTS)
    return worst < 1e-4, f"max |(-Delta)^a v_j| {worst:.2e}"


def c05_dyda() -> tuple[bool, str]:
    a = 0.75
    order = FractionalOrder(a)
    iv = Interval(0.0, 2.5)
    scale = (2.0 / iv.L) ** (2 * a)
    cn = dyda_constants(a, 4)
    worst = 0.0
    for n in range(4):
        def phi(x: float, n=n) -> float:
            y = float(iv.to_ref(x))
            if not -1.0 < y < 1.0:
                return 0.0
            return (1.0 - y * y) ** a * jacobi_table(n + 1, a, a, np.array([y]))[n, 0]

        for y in PTS:
            x = float(iv.from_ref(y))
            ref = scale * cn[n] * jacobi_table(n + 1, a, a, np.array([y]))[n, 0]
            got = pv_fractional_apply(order, iv, phi, x)
            worst = max(worst, abs(got - ref) / max(abs(ref), 1e-3 * scale * cn[n]))
    g = gamma_fn(2 * a + 1)

    def torsion(y: float) -> float:
        return (1.0 - y * y) ** a / g if -1.0 < y < 1.0 else 0.0

    exact = max(abs(pv_fractional_apply(order, REF, torsion, y) - 1.0) for y in PTS)
    return worst < 1e-3 and exact < 1e-6, f"max rel err n<=3 {worst:.2e}; n=0 identity err {exact:.2e}"


def c06_green_identity(pairs: int = 100) -> tuple[bool, str]:
    m = _model(0.0, 2.5, 0.75)
    rng = np.random.default_rng(6)
    basis = [m.kernel_function(1), m.kernel_function(2)] + [m.eigenfunction(k) for k in range(1, 11)]
    basis = [b.without_flux() for b in basis]

    def draw():
        coef = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        f = complex(coef[0]) * basis[0]
        for cf, b in zip(coef[1:], basis[1:]):
            f = f + complex(cf) * b
        return f

    worst = 0.0
    for _ in range(pairs):
        f, g = draw(), draw()
        terms = green_identity_terms(m, f, g)
        t1, t2, b1, b2 = terms
        worst = max(worst, abs(t1 - t2 - b1 + b2) / (1.0 + max(abs(t) for t in terms)))
    return worst < 1e-6, f"max scaled residual {worst:.2e}"


def c07_neumann() -> tuple[bool, str]:
    msgs = []
    ok = True
    for a in ORDERS:
        m = _model(-1.0, 1.0, a)
        res = spectrum_weyl(m, preset_bc("neumann"), lambda_max=2 * m.lambda1)
        neg = [e for e in res.eigenvalues if e.lam < 0]
        zero = [e for e in res.eigenvalues if abs(e.lam) <= 1e-8]
        good = len(neg) == 1 and neg[0].multiplicity == 1 and not zero
        ok &= good
        msgs.append(f"a={a}: negatives {[round(e.lam, 8) for e in neg]}")
    return ok, "; ".join(msgs)


def c08_kvn() -> tuple[bool, str]:
    msgs = []
    ok = True
    for a in ORDERS:
        m = _model(-1.0, 1.0, a)
        bc = preset_bc("kvn", m.interval, m.order)
        M0 = weyl_M(m, 0.0).M
        D = bc.B - bc.A @ M0
        nul = nullity(D, np.linalg.norm(bc.B, 2) + np.linalg.norm(M0, 2))
        res = spectrum_weyl(m, bc, lambda_max=3 * m.lambda1)
        first = res.eigenvalues[0]
        cls = classify(m, bc)
        good = (
            nul == 2
            and abs(first.lam) < 1e-8
            and first.multiplicity == 2
            and all(e.lam > 0 for e in res.eigenvalues[1:])
            and cls.nonnegative
        )
        ok &= good
        msgs.append(f"a={a}: nullity {nul}, first {first.lam:.1e} x{first.multiplicity}")
    return ok, "; ".join(msgs)


def c09_nonpositive_sweep(count: int = 100) -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.75)
    rng = np.random.default_rng(9)
    worst = 0
    for _ in range(count):
        bc = random_bc(rng)
        res = spectrum_weyl(m, bc, lambda_max=0.5 * m.lambda1)
        worst = max(worst, res.num_nonpositive(0.0))
    return worst <= 2, f"max nonpositive count {worst}"


def _first_weyl(m, bc, k: int) -> list[float]:
    lam_max = 2 * m.lambda1
    while True:
        vals = spectrum_weyl(m, bc, lambda_max=lam_max).values
        if len(vals) >= k:
            return vals[:k]
        lam_max *= 2


def c10_cross_method(count: int = 10) -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.75)
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(count):
        bc = random_bc(rng)
        w = _first_weyl(m, bc, 5)
        p = spectrum_pencil(m, bc, 5).values[:5]
        worst = max(worst, max(abs(x - y) / abs(y) for x, y in zip(w, p)))
    return worst < 1e-6, f"max rel diff {worst:.2e}"


def c11_weyl_structure() -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.75)
    lam1 = m.lambda1
    below = np.linspace(-10 * lam1, 0.99 * lam1, 30)
    above = np.linspace(lam1, m.eigvals[4], 22)[1:-1]
    grid = np.concatenate([below, above])
    evals = [weyl_M(m, float(x)) for x in grid]
    herm = max(e.hermiticity_residual for e in evals)
    swap = max(e.swap_residual for e in evals)
    mono = min(
        float(np.linalg.eigvalsh(evals[i + 1].M - evals[i].M)[0]) for i in range(len(below) - 1)
    )
    inv = [np.linalg.norm(np.linalg.inv(weyl_M(m, -lam1 * 10.0**j).M), 2) for j in range(5)]
    decreasing = all(b < a for a, b in zip(inv, inv[1:]))
    ratio = inv[-1] / inv[0]
    ok = herm < 1e-8 and swap < 1e-8 and mono >= -1e-8 and decreasing and ratio < 0.1
    return ok, f"herm {herm:.1e}, swap {swap:.1e}, min increment eig {mono:.2e}, decay ratio {ratio:.3f}"


def c12_gamma_consistency(count: int = 20) -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.75)
    rng = np.random.default_rng(12)
    w1 = w0 = 0.0
    n = 0
    while n < count:
        lam = complex(rng.uniform(-5, 4) * m.lambda1, rng.choice([0.0, 1.0]) * rng.uniform(-5, 5))
        if m.pole_distance(lam) < 1e-3 * m.lambda1:
            continue
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        tr = galerkin_traces(gamma_lambda(m, lam, c))
        M = weyl_M(m, lam).M
        w1 = max(w1, float(np.max(np.abs(tr.ups1 - M @ c))))
        w0 = max(w0, float(np.max(np.abs(tr.ups0 - c))))
        n += 1
    return w1 < 1e-7 and w0 < 1e-9, f"Ups1 err {w1:.2e}, Ups0 err {w0:.2e}"


def c13_pointwise_bound() -> tuple[bool, str]:
    worst = -np.inf
    for a in ORDERS:
        m = _model(-1.0, 1.0, a)
        for k in range(1, 6):
            worst = max(worst, eigenfunction_bound_check(m, k)[0])
    return worst <= 1e-8, f"max violation {worst:.3e}"


def c14_classical_limit() -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.999)
    lam_err = abs(m.lambda1 / (math.pi**2 / 4) - 1)
    Mc = classical_weyl(m.interval, 0.0).M.real
    M = weyl_M(m, 0.0).M
    m_err = float(np.linalg.norm(M - Mc, 2) / np.linalg.norm(Mc, 2))
    return lam_err < 0.01 and m_err < 0.005, f"lambda_1 rel {lam_err:.2e}, M(0) rel {m_err:.2e}"


def c15_quadratic_form() -> tuple[bool, str]:
    m = _model(-1.0, 1.0, 0.75)
    q, q_op = quadratic_form_check(m, m.eigenfunction(1))
    err = abs(q - m.lambda1) / m.lambda1
    return err < 1e-3 and abs(q_op - m.lambda1) < 1e-10 * m.lambda1, f"q {q:.8f} vs lambda_1 {m.lambda1:.8f}"


def c16_convergence() -> tuple[bool, str]:
    worst = 0.0
    for a in ORDERS:
        lo = _model(-1.0, 1.0, a, 120).eigvals[:5]
        hi = _model(-1.0, 1.0, a, 200).eigvals[:5]
        worst = max(worst, float(np.max(np.abs(lo / hi - 1))))
    return worst < 1e-6, f"max rel change {worst:.2e}"


CRITERIA: list[tuple[int, str, tuple[str, ...], Callable[[], tuple[bool, str]]]] = [
    (1, "classical Dirichlet spectrum", ("classical",), c01_classical_dirichlet),
    (2, "classical Neumann, Krein-von Neumann and Robin", ("classical",), c02_classical_neumann_kvn_robin),
    (3, "fractional M(0) closed form", ("weyl",), c03_weyl_M0),
    (4, "kernel annihilation", ("oracle",), c04_kernel_annihilation),
    (5, "Dyda identity and stiffness", ("oracle",), c05_dyda),
    (6, "Green identity", ("weyl",), c06_green_identity),
    (7, "fractional Neumann: one negative eigenvalue", ("spectrum",), c07_neumann),
    (8, "fractional Krein-von Neumann", ("spectrum",), c08_kvn),
    (9, "at most two nonpositive eigenvalues", ("spectrum",), c09_nonpositive_sweep),
    (10, "Weyl roots vs pencil", ("spectrum",), c10_cross_method),
    (11, "Weyl function structure", ("weyl",), c11_weyl_structure),
    (12, "gamma-field / Weyl consistency", ("weyl",), c12_gamma_consistency),
    (13, "pointwise eigenfunction bound", ("spectrum",), c13_pointwise_bound),
    (14, "a -> 1 continuity", ("classical", "weyl"), c14_classical_limit),
    (15, "quadratic form", ("oracle",), c15_quadratic_form),
    (16, "convergence in N", ("model",), c16_convergence),
]


def run_criterion(number: int) -> CriterionResult:
    for num, title, _, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, reported not raised
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CriterionResult(num, title, bool(ok), detail, time.perf_counter() - t0)
    raise KeyError(number)


def select(filter_: str | None) -> list[int]:
    """Criterion numbers matching a tag, a number, or a title substring."""
    if not filter_:
        return [c[0] for c in CRITERIA]
    key = filter_.lower()
    out = []
    for num, title, tags, _ in CRITERIA:
        if key == str(num) or key in tags or key in title.lower():
            out.append(num)
    return out


def run_all(filter_: str | None = None) -> list[CriterionResult]:
    # models depend on the gamma function, so never reuse them across runs
    _model.cache_clear()
    try:
        return [run_criterion(n) for n in select(filter_)]
    finally:
        _model.cache_clear()
