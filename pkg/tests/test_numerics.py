import numpy as np
import pytest

from dfrc_hbf.errors import NotHermitianError, NotPositiveDefiniteError, NotPSDError
from dfrc_hbf.numerics import (
    as_cmatrix,
    cholesky_lower,
    generalized_eig_principal,
    hermitian_eig,
    logdet_plus,
    solve_hpd,
)

from oracles import crandn, random_hermitian, random_pd


def test_as_cmatrix_column_and_finite():
    assert as_cmatrix([1, 2, 3]).shape == (3, 1)
    with pytest.raises(ValueError):
        as_cmatrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_cmatrix(np.zeros((2, 2, 2)))


# -- hermitian_eig -----------------------------------------------------------

def test_eig_diagonal():
    w, v = hermitian_eig(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(w, [1.0, 3.0])
    np.testing.assert_allclose(np.abs(v[:, 0]), [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(np.abs(v[:, 1]), [1.0, 0.0], atol=1e-15)


def test_eig_real_symmetric():
    w, v = hermitian_eig([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(w, [1.0, 3.0])
    top = v[:, 1] * np.exp(-1j * np.angle(v[0, 1]))
    np.testing.assert_allclose(top, np.array([1, 1]) / np.sqrt(2), atol=1e-14)


def test_eig_reconstruction_6x6():
    a = random_hermitian(np.random.default_rng(6), 6)
    w, v = hermitian_eig(a)
    assert np.linalg.norm(a - (v * w) @ v.conj().T) <= 1e-9 * np.linalg.norm(a)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 13, 21, 32])
def test_eig_residuals_many_sizes(n):
    rng = np.random.default_rng(n)
    for _ in range(100 // 7 + 1):
        a = random_hermitian(rng, n)
        w, v = hermitian_eig(a)
        scale = np.linalg.norm(a)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.linalg.norm(a @ v - v * w, axis=0)) <= 1e-9 * scale
        assert np.linalg.norm(v.conj().T @ v - np.eye(n)) <= 1e-9


def test_eig_errors():
    with pytest.raises(ValueError):
        hermitian_eig(np.zeros((2, 3)))
    with pytest.raises(NotHermitianError):
        hermitian_eig([[1.0, 2.0], [0.0, 1.0]])


# -- generalized_eig_principal ----------------------------------------------

def test_geig_diagonal():
    lam, v = generalized_eig_principal(np.diag([2.0, 1.0]), np.eye(2))
    assert lam == pytest.approx(2.0)
    np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-15)


def test_geig_proportional():
    b = random_pd(np.random.default_rng(1), 4)
    lam, v = generalized_eig_principal(2 * b, b)
    assert lam == pytest.approx(2.0, rel=1e-12)
    assert np.linalg.norm(2 * b @ v - lam * b @ v) <= 1e-8 * (2 + lam) * np.linalg.norm(b)


def test_geig_rayleigh_oracle():
    rng = np.random.default_rng(44)
    g = crandn(rng, 4, 2)
    a = g @ g.conj().T  # PSD, rank 2
    b = random_pd(rng, 4)
    lam, v = generalized_eig_principal(a, b)
    assert np.linalg.norm(a @ v - lam * b @ v) <= 1e-8 * (np.linalg.norm(a) + lam * np.linalg.norm(b))
    x = crandn(rng, 4, 100_000)
    num = np.real(np.sum(x.conj() * (a @ x), axis=0))
    den = np.real(np.sum(x.conj() * (b @ x), axis=0))
    assert np.max(num / den) <= lam + 1e-6
    q_v = np.real(np.vdot(v, a @ v)) / np.real(np.vdot(v, b @ v))
    assert q_v == pytest.approx(lam, rel=1e-10)


@pytest.mark.parametrize("n", [2, 7, 16, 32])
def test_geig_residual_and_scale_invariance(n):
    rng = np.random.default_rng(100 + n)
    a = random_pd(rng, n, shift=0.0)
    b = random_pd(rng, n)
    lam, v = generalized_eig_principal(a, b)
    assert np.linalg.norm(a @ v) > 0
    assert np.linalg.norm(a @ v - lam * b @ v) <= 1e-8 * (np.linalg.norm(a) + lam * np.linalg.norm(b))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    lam3, v3 = generalized_eig_principal(3.5 * a, b)
    assert lam3 == pytest.approx(3.5 * lam, rel=1e-9)
    assert abs(np.vdot(v, v3)) == pytest.approx(1.0, abs=1e-9)


def test_geig_not_pd_reports_pivot():
    b = np.diag([1.0, 2.0, -1.0, 4.0])
    with pytest.raises(NotPositiveDefiniteError) as info:
        generalized_eig_principal(np.eye(4), b)
    assert info.value.pivot == 2


def test_cholesky_lower():
    b = random_pd(np.random.default_rng(3), 5)
    low = cholesky_lower(b)
    assert np.allclose(np.triu(low, 1), 0)
    np.testing.assert_allclose(low @ low.conj().T, b, atol=1e-12)


# -- solve_hpd -----------------------------------------------------------------

def test_solve_identity_and_scalar():
    x = crandn(np.random.default_rng(0), 3, 2)
    np.testing.assert_allclose(solve_hpd(np.eye(3), x), x)
    np.testing.assert_allclose(solve_hpd(2 * np.eye(3), x), x / 2)


@pytest.mark.parametrize("n", [2, 9, 32])
def test_solve_residual(n):
    rng = np.random.default_rng(n)
    for _ in range(30):
        b = random_pd(rng, n)
        x = crandn(rng, n, 3)
        y = solve_hpd(b, x)
        assert np.linalg.norm(b @ y - x) <= 1e-9 * np.linalg.norm(x)
        np.testing.assert_allclose(solve_hpd(b, b @ x), x, rtol=1e-8, atol=1e-8 * np.linalg.norm(x))


def test_solve_errors():
    with pytest.raises(NotPositiveDefiniteError):
        solve_hpd(-np.eye(2), np.ones(2))
    with pytest.raises(ValueError):
        solve_hpd(np.eye(2), np.ones(3))


# -- logdet_plus ---------------------------------------------------------------

def test_logdet_trivial():
    assert logdet_plus(np.zeros((3, 3))) == 0.0
    assert logdet_plus(np.diag([1.0, 3.0])) == pytest.approx(3.0)


def test_logdet_matches_lu_determinant():
    rng = np.random.default_rng(5)
    for n in (2, 6, 20):
        g = crandn(rng, n, n)
        a = g @ g.conj().T
        _, logabs = np.linalg.slogdet(np.eye(n) + a)
        assert logdet_plus(a) == pytest.approx(logabs / np.log(2), rel=1e-9)


def test_logdet_rejects_indefinite():
    with pytest.raises(NotPSDError):
        logdet_plus(np.diag([1.0, -1e-6]))
    assert logdet_plus(np.diag([1.0, -1e-12])) == pytest.approx(1.0)
