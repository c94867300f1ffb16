import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap.core import (
    BoundaryCondition,
    ExtensionClassification,
    FractionalOrder,
    Interval,
    TraceVector,
    bc_diagnostics,
    bc_from_dict,
    bc_to_dict,
    closed_form_M0,
    compare_theta,
    preset_bc,
    validate_bc,
)
from fraclap.errors import (
    InvalidTheta,
    NotSymmetricCompatible,
    RankDeficient,
    ValidationError,
)


def test_interval_geometry():
    iv = Interval(0.0, 2.5)
    assert iv.L == 2.5 and iv.mid == 1.25
    assert iv.dist(0.5) == pytest.approx(0.5)
    assert iv.to_ref(0.0) == -1.0 and iv.to_ref(2.5) == 1.0


@pytest.mark.parametrize("ab", [(1.0, 1.0), (2.0, 1.0), (0.0, float("inf"))])
def test_interval_rejects(ab):
    with pytest.raises(ValidationError):
        Interval(*ab)


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(-50, 50),
    width=st.floats(1e-2, 100),
    y=st.floats(-1, 1),
)
def test_reference_map_round_trip(alpha, width, y):
    iv = Interval(alpha, alpha + width)
    assert float(iv.to_ref(iv.from_ref(y))) == pytest.approx(y, abs=1e-9)


@pytest.mark.parametrize("a", [0.5, 1.0, 0.3, 1.2])
def test_order_bounds(a):
    with pytest.raises(ValidationError):
        FractionalOrder(a)


@pytest.mark.parametrize("a", [0.55, 0.75, 0.95])
def test_c_a_against_mpmath(a):
    ref = a * mpmath.power(4, a) * mpmath.gamma(a + 0.5) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(1 - a))
    assert FractionalOrder(a).c_a == pytest.approx(float(ref), rel=1e-13)


def test_presets_are_valid():
    iv = Interval(-1, 1)
    for kind in ("dirichlet", "neumann", "kvn"):
        bc = preset_bc(kind, iv, 0.75)
        assert validate_bc(bc) == bc
        assert bc.label == kind


def test_kvn_preset_is_M0():
    iv = Interval(0, 3)
    bc = preset_bc("kvn", iv, 0.6)
    assert np.allclose(bc.B, closed_form_M0(0.6, 3.0))
    assert np.allclose(bc.A, np.eye(2))


def test_closed_form_M0_values():
    M = closed_form_M0(0.75, 2.0)
    assert np.allclose(M, 0.375 * np.array([[-0.75, 1], [1, -0.75]]))


def test_rank_deficient_rejected():
    with pytest.raises(RankDeficient):
        validate_bc([[1, 0], [0, 0]], np.zeros((2, 2)))


def test_not_symmetric_rejected():
    with pytest.raises(NotSymmetricCompatible):
        validate_bc(np.eye(2), [[0, 1], [0, 0]])


def test_non_hermitian_theta_rejected():
    with pytest.raises(InvalidTheta):
        preset_bc("theta", theta=[[0, 1], [2, 0]])


def test_diagnostics_report_residual():
    d = bc_diagnostics(np.eye(2), [[0, 1], [0, 0]])
    assert d["sym_residual"] == pytest.approx(1.0)
    assert d["sigma_min"] > 0


def test_bad_shapes_rejected():
    with pytest.raises(ValidationError):
        validate_bc(np.eye(3), np.eye(3))
    with pytest.raises(ValidationError):
        BoundaryCondition(np.eye(2), np.eye(2), label="robin")


def test_bc_is_immutable():
    bc = preset_bc("neumann")
    with pytest.raises(ValueError):
        bc.A[0, 0] = 5


def test_transformed_equivalent(rng):
    bc = preset_bc("theta", theta=[[1, 2j], [-2j, 0]])
    X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    t = bc.transformed(X)
    assert np.allclose(np.linalg.solve(t.A, t.B), bc.B)


def test_compare_theta():
    assert compare_theta(np.eye(2), 2 * np.eye(2)) == "leq"
    assert compare_theta(2 * np.eye(2), np.eye(2)) == "geq"
    assert compare_theta(np.eye(2), np.eye(2)) == "equal"
    assert compare_theta(np.diag([1, 0]), np.diag([0, 1])) == "incomparable"


def test_dict_round_trip():
    bc = validate_bc([[1, 1j], [0, 1]], [[0, 0], [0, 0]])
    back = bc_from_dict(bc_to_dict(bc))
    assert back == bc


def test_dict_plain_numbers_and_preset():
    bc = bc_from_dict({"A": [[1, 0], [0, 1]], "B": [[2, 0], [0, 3]]})
    assert np.allclose(bc.B, np.diag([2, 3]))
    assert bc_from_dict({"preset": "neumann"}).label == "neumann"
    with pytest.raises(ValidationError):
        bc_from_dict({"A": [[1, 0], [0, 1]]})


def test_trace_vector_residual():
    tv = TraceVector([1, 2], [3, 4])
    assert tv.bc_residual(preset_bc("dirichlet")) == pytest.approx(np.sqrt(5))
    with pytest.raises(ValidationError):
        TraceVector([np.nan, 0], [0, 0])


def test_classification_invariants():
    with pytest.raises(ValidationError):
        ExtensionClassification(True, -1.0, 0)
    with pytest.raises(ValidationError):
        ExtensionClassification(False, -1.0, 3)
    ExtensionClassification(False, -1.0, 2)
