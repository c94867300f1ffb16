import math

import mpmath
import numpy as np
import pytest

from fraclap.core import FractionalOrder, Interval
from fraclap.dirichlet import (
    DiscreteFunction,
    apply_resolvent,
    build_dirichlet_model,
    dyda_constants,
    evaluate,
    galerkin_traces,
    inner,
    kernel_moments,
    pv_fractional_apply,
)
from fraclap.errors import InvalidN, OutOfDomain, PoleProximity, ValidationError


def test_dyda_constants_mpmath():
    a = 0.7
    c = dyda_constants(a, 6)
    for n in range(6):
        ref = mpmath.gamma(2 * a + n + 1) / mpmath.factorial(n)
        assert c[n] == pytest.approx(float(ref), rel=1e-13)


def test_invalid_basis_size():
    with pytest.raises((InvalidN, ValidationError)):
        build_dirichlet_model(Interval(-1, 1), FractionalOrder(0.75), 0)


def test_mass_spd_and_eigvecs_orthonormal(model):
    assert np.allclose(model.mass, model.mass.T)
    assert np.linalg.eigvalsh(model.mass)[0] > 0
    V = model.eigvecs
    assert np.allclose(V.T @ model.mass @ V, np.eye(model.N), atol=1e-10)


def test_generalized_eigen_equation(model):
    K = np.diag(model.stiffness_diag)
    for k in (1, 4, 9):
        c = model.eigvecs[:, k - 1]
        r = K @ c - model.eigvals[k - 1] * model.mass @ c
        assert np.linalg.norm(r) < 1e-9 * model.eigvals[k - 1]


@pytest.mark.parametrize("a", [0.6, 0.75, 0.9])
def test_eigenvalues_asymptotics(model_factory, a):
    """Large-k asymptotics of the interval spectrum, error O(1/k)."""
    m = model_factory(a)
    k = np.arange(5, 21)
    approx = (k * math.pi / 2 - (2 - 2 * a) * math.pi / 8) ** (2 * a)
    err = np.abs(m.eigvals[k - 1] / approx - 1)
    assert np.all(err < 1e-3)
    assert err[-1] < err[0]


@pytest.mark.parametrize("a", [0.6, 0.75, 0.9])
def test_eigenvalues_below_classical_power(model_factory, a):
    m = model_factory(a)
    k = np.arange(1, 21)
    assert np.all(m.eigvals[:20] < (k * math.pi / 2) ** (2 * a))


def test_ritz_values_decrease_with_basis(model_factory):
    small = model_factory(0.75, 0.0, 2.5, 40)
    big = model_factory(0.75, 0.0, 2.5, 120)
    assert np.all(small.eigvals[:10] >= big.eigvals[:10] - 1e-12)


def test_dilation_scaling(model_factory):
    ref = model_factory(0.75)
    wide = model_factory(0.75, 0.0, 2.5)
    assert np.allclose(wide.eigvals[:10], ref.eigvals[:10] * (2 / 2.5) ** 1.5, rtol=1e-12)


def test_evaluate_outside_raises(model):
    with pytest.raises(OutOfDomain):
        evaluate(model.eigenfunction(1), [1.0])


def test_inner_is_sesquilinear(model):
    f = model.eigenfunction(1) + 2j * model.kernel_function(1)
    g = model.eigenfunction(2) - model.kernel_function(2)
    assert inner(1j * f, g) == pytest.approx(1j * inner(f, g))
    assert inner(f, 1j * g) == pytest.approx(-1j * inner(f, g))
    assert inner(g, f) == pytest.approx(np.conj(inner(f, g)))


def test_inner_matches_pointwise_quadrature(model):
    from scipy.integrate import quad

    f = model.eigenfunction(2) + 0.4 * model.kernel_function(1)
    g = model.eigenfunction(1) - 0.3 * model.kernel_function(2)
    h = lambda x: float(evaluate(f, x)[0] * evaluate(g, x)[0])
    ref, _ = quad(h, -1, 1, limit=400, epsabs=1e-11, points=[0.0])
    assert inner(f, g).real == pytest.approx(ref, rel=1e-6)


def test_kernel_moments(model):
    f = model.eigenfunction(3) + model.kernel_function(2)
    mom = kernel_moments(f)
    assert mom == pytest.approx([inner(f, model.kernel_function(1)), inner(f, model.kernel_function(2))])


def test_resolvent_spectral_identity(model):
    lam = 2.0 + 1.0j
    g = 0.5 * model.eigenfunction(3) + model.kernel_function(1)
    u = apply_resolvent(model, lam, g)
    for k in (1, 2, 5):
        phi = model.eigenfunction(k)
        assert inner(u, phi) * (model.eigvals[k - 1] - lam) == pytest.approx(inner(g, phi), abs=1e-12)


def test_resolvent_at_pole(model):
    with pytest.raises(PoleProximity):
        apply_resolvent(model, model.eigvals[1], model.eigenfunction(1))


def test_kernel_traces(model):
    P = model.kernel_map
    for j, e in enumerate(np.eye(2)):
        f = DiscreteFunction(model, np.zeros(model.N), P @ e)
        assert np.allclose(galerkin_traces(f).ups0, e, atol=1e-13)


def test_pointwise_flux_of_first_basis_function(model_factory):
    """Ups1 of (1 - y^2)^a is Gamma(a + 1) (4/L)^a at both ends."""
    m = model_factory(0.75, 0.0, 2.5)
    a, L = 0.75, 2.5
    c = np.zeros(m.N)
    c[0] = 1.0
    tr = galerkin_traces(DiscreteFunction(m, c, np.zeros(2)), pointwise=True)
    assert np.allclose(tr.ups0, 0.0)
    exact = math.gamma(a + 1) * (4 / L) ** a
    assert np.allclose(tr.ups1, [exact, exact], rtol=1e-12)
    # one-sided finite-difference oracle on t^(1-a) f(alpha + t)
    ts = np.array([1e-4, 2e-4])
    g = ts ** (1 - a) * evaluate(DiscreteFunction(m, c, np.zeros(2)), ts)
    slope = 2 * g[0] / ts[0] - g[1] / ts[1]  # Richardson on g(t)/t
    assert math.gamma(a + 1) * slope == pytest.approx(exact, rel=1e-6)


def test_recovered_flux_matches_pointwise_trend(model_factory):
    """Pointwise and recovered flux of an eigenfunction agree to a few digits."""
    m = model_factory(0.75, N=200)
    phi = m.eigenfunction(1)
    weak = galerkin_traces(phi).ups1
    strong = galerkin_traces(phi, pointwise=True).ups1
    assert np.allclose(weak, strong, rtol=1e-2)


@pytest.mark.slow
def test_pv_oracle_on_first_eigenfunction(model_factory):
    m = model_factory(0.75, 0.0, 2.5)
    phi = m.eigenfunction(1)
    f = lambda x: float(evaluate(phi, x)[0]) if 0.0 < x < 2.5 else 0.0
    for x in (0.4, 1.25, 2.0):
        lhs = pv_fractional_apply(m.order, m.interval, f, x)
        assert lhs == pytest.approx(m.lambda1 * f(x), rel=1e-4)


def test_metadata(model):
    md = model.metadata()
    assert md["N"] == 120 and md["a"] == 0.75 and md["interval"] == [-1.0, 1.0]


def test_resolvent_inverts_operator(model, rng):
    """(A_D - lam)^{-1} (A_D - lam) f = f for f with zero kernel part."""
    lam = -1.0
    c = model.eigvecs[:, :12] @ rng.standard_normal(12)
    K = np.diag(model.stiffness_diag)
    # (A_D - lam) f expressed in the basis: M^{-1}(K - lam M) c
    g_c = np.linalg.solve(model.mass, K @ c) - lam * c
    g = DiscreteFunction(model, g_c, np.zeros(2))
    u = apply_resolvent(model, lam, g)
    assert np.allclose(u.c, c, atol=1e-10)
