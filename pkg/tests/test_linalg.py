import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ivfunctional import linalg
from ivfunctional.linalg import SingularMatrixError

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_spectral_norm_examples():
    assert linalg.spectral_norm(np.eye(4)) == pytest.approx(1.0, rel=1e-10)
    assert linalg.spectral_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-10)
    assert linalg.spectral_norm([[0.0, 2.0], [0.0, 0.0]]) == pytest.approx(2.0, rel=1e-10)
    assert linalg.spectral_norm(np.zeros((3, 3))) == 0.0


def test_spectral_norm_against_eigensolve():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a = rng.standard_normal((5, 5))
        ref = np.sqrt(np.linalg.eigvalsh(a.T @ a).max())
        assert linalg.spectral_norm(a) == pytest.approx(ref, abs=1e-8)


def test_spectral_norm_repeated_top_singular_value():
    q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((6, 6)))
    a = q @ np.diag([2.0, 2.0, 1.0, 0.5, 0.1, 0.0]) @ q.T
    assert linalg.spectral_norm(a) == pytest.approx(2.0, rel=1e-10)


def test_spectral_norm_deterministic():
    a = np.random.default_rng(5).standard_normal((7, 7))
    assert linalg.spectral_norm(a) == linalg.spectral_norm(a.copy())


@given(arrays(np.float64, (4, 4), elements=finite), arrays(np.float64, (4, 4), elements=finite))
def test_submultiplicative(a, b):
    lhs = linalg.spectral_norm(a @ b)
    assert lhs <= linalg.spectral_norm(a) * linalg.spectral_norm(b) * (1 + 1e-9) + 1e-12


def test_invert_examples():
    np.testing.assert_array_equal(linalg.invert(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linalg.invert(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    with pytest.raises(SingularMatrixError):
        linalg.invert([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(np.linalg.LinAlgError):
        linalg.invert(np.zeros((2, 2)))


def test_invert_pivot_tolerance():
    a = np.diag([1.0, 1e-13])
    with pytest.raises(SingularMatrixError):
        linalg.invert(a)
    np.testing.assert_allclose(linalg.invert(a, tol=1e-14), np.diag([1.0, 1e13]))
    with pytest.raises(ValueError):
        linalg.invert(a, tol=0.0)


def test_invert_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(linalg.invert(a), a)


def test_invert_round_trip_well_conditioned():
    rng = np.random.default_rng(7)
    for m in (2, 5, 16, 64):
        for _ in range(5):
            u, _ = np.linalg.qr(rng.standard_normal((m, m)))
            w, _ = np.linalg.qr(rng.standard_normal((m, m)))
            a = u @ np.diag(np.logspace(0, -6, m)) @ w
            err = np.abs(a @ linalg.invert(a) - np.eye(m)).max()
            assert err <= 1e-8


@pytest.mark.parametrize("bad", [np.ones(3), np.ones((2, 3)), [[np.nan, 0], [0, 1]]])
def test_input_validation(bad):
    with pytest.raises(ValueError):
        linalg.invert(bad)


def test_spectral_norm_rectangular_and_nonfinite():
    a = np.arange(6.0).reshape(2, 3)
    assert linalg.spectral_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)
    with pytest.raises(ValueError):
        linalg.spectral_norm([[np.inf]])


def test_matvec():
    np.testing.assert_array_equal(linalg.matvec(np.eye(2) * 2, [1.0, 3.0]), [2.0, 6.0])
