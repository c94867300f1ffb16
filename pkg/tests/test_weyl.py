import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap.core import closed_form_M0
from fraclap.dirichlet import apply_resolvent, galerkin_traces, inner
from fraclap.errors import PoleProximity, ValidationError
from fraclap.weyl import (
    gamma0_apply,
    gamma_adjoint,
    gamma_lambda,
    green_identity_residual,
    quadratic_form_check,
    weyl_derivative,
    weyl_M,
    weyl_M0,
)


@pytest.mark.parametrize("a", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("ab", [(-1.0, 1.0), (0.0, 2.5), (3.0, 3.5)])
def test_M0_closed_form(model_factory, a, ab):
    m = model_factory(a, *ab)
    assert np.allclose(weyl_M(m, 0.0).M, closed_form_M0(a, ab[1] - ab[0]), atol=1e-12)
    assert np.allclose(weyl_M0(m.interval, m.order), closed_form_M0(a, ab[1] - ab[0]))


def test_gamma0_traces(model):
    c = np.array([1.5, -0.5])
    tr = galerkin_traces(gamma0_apply(model, c))
    assert np.allclose(tr.ups0, c)
    assert np.allclose(tr.ups1, weyl_M(model, 0.0).M @ c, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(re=st.floats(-40, 30), im=st.floats(0.1, 20))
def test_conjugate_symmetry_and_nevanlinna(model, re, im):
    lam = complex(re, im)
    M = weyl_M(model, lam).M
    Mc = weyl_M(model, lam.conjugate()).M
    assert np.allclose(Mc, M.conj().T, atol=1e-10 * (1 + np.abs(M).max()))
    assert np.linalg.eigvalsh((M - M.conj().T) / 2j)[0] > 0


def test_swap_symmetry_on_symmetric_interval(model):
    J = np.array([[0, 1], [1, 0]])
    for lam in (-5.0, 0.5, 6.0):
        M = weyl_M(model, lam).M
        assert np.allclose(J @ M @ J, M, atol=1e-10)


def test_derivative_finite_difference(model):
    for lam in (-3.0, 0.7, 4.5):
        h = 1e-5
        fd = (weyl_M(model, lam + h).M - weyl_M(model, lam - h).M) / (2 * h)
        assert np.allclose(weyl_derivative(model, lam), fd, rtol=1e-6, atol=1e-8)


def test_derivative_is_gram_of_gamma(model):
    lam = 1.2
    g = [gamma_lambda(model, lam, e) for e in np.eye(2)]
    G = np.array([[inner(g[j], g[i]) for j in range(2)] for i in range(2)])
    assert np.allclose(weyl_derivative(model, lam), G.real, rtol=1e-10)


def test_difference_identity(model):
    """M(lam) - M(mu)* = (lam - conj mu) gamma(mu)* gamma(lam)."""
    lam, mu = 2.0 + 1.0j, -1.0 + 0.5j
    gl = [gamma_lambda(model, lam, e) for e in np.eye(2)]
    gm = [gamma_lambda(model, mu, e) for e in np.eye(2)]
    G = np.array([[inner(gl[j], gm[i]) for j in range(2)] for i in range(2)])
    lhs = weyl_M(model, lam).M - weyl_M(model, mu).M.conj().T
    assert np.allclose(lhs, (lam - np.conj(mu)) * G, atol=1e-11)


def test_gamma_adjoint_second_route(model):
    """gamma(0)* g = Ups1 A_D^{-1} g."""
    g = model.eigenfunction(2) + 0.3 * model.eigenfunction(1) + model.kernel_function(2)
    via_resolvent = galerkin_traces(apply_resolvent(model, 0.0, g)).ups1
    assert np.allclose(gamma_adjoint(model, 0.0, g), via_resolvent, atol=1e-12)


def test_monotone_below_first_pole(model):
    grid = np.linspace(-20, 0.99 * model.lambda1, 40)
    Ms = [weyl_M(model, x).M for x in grid]
    for A, B in zip(Ms, Ms[1:]):
        assert np.linalg.eigvalsh(B - A)[0] > 0


def test_pole_rejected(model):
    with pytest.raises(PoleProximity):
        weyl_M(model, model.eigvals[0])


def test_gamma_field_in_defect_space(model):
    """(S* - lam) gamma(lam) c is orthogonal to the Dirichlet eigenfunctions."""
    lam = 3.0
    c = np.array([1.0, 2.0])
    u = gamma_lambda(model, lam, c)
    tr = galerkin_traces(u)
    for k in (1, 2, 3):
        phi = model.eigenfunction(k)
        # Green identity with phi in the Dirichlet domain
        lhs = (model.eigvals[k - 1] - lam) * inner(u, phi)
        rhs = np.vdot(galerkin_traces(phi).ups1, tr.ups0)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_green_identity_random(model_factory, rng):
    m = model_factory(0.6, 0.0, 2.5)
    for _ in range(10):
        cf = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
        f = complex(cf[0, 0]) * m.kernel_function(1) + complex(cf[0, 1]) * m.kernel_function(2)
        g = complex(cf[1, 0]) * m.kernel_function(1) + complex(cf[1, 1]) * m.kernel_function(2)
        for k in range(2, 8):
            f = f + complex(cf[0, k]) * m.eigenfunction(k).without_flux()
            g = g + complex(cf[1, k]) * m.eigenfunction(k).without_flux()
        assert green_identity_residual(m, f, g) < 1e-8


@pytest.mark.slow
def test_quadratic_form_second_eigenfunction(model):
    q, q_op = quadratic_form_check(model, model.eigenfunction(2).without_flux())
    assert q_op == pytest.approx(model.eigvals[1], rel=1e-10)
    assert q == pytest.approx(model.eigvals[1], rel=1e-3)


def test_quadratic_form_rejects_kernel_part(model):
    with pytest.raises(ValidationError):
        quadratic_form_check(model, model.kernel_function(1))
