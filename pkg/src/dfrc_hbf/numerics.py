"""Dense complex linear algebra used by the rest of the package.

Matrices are plain ``numpy`` complex arrays. All tolerances are relative to
Frobenius norms so the contracts do not depend on the scale of the data.
"""

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .errors import NotHermitianError, NotPositiveDefiniteError, NotPSDError

HERMITIAN_RTOL = 1e-10
PSD_ATOL = 1e-9


def as_cmatrix(a, name="matrix"):
    """Return ``a`` as a 2-D complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def hermitian_part(a):
    return 0.5 * (a + a.conj().T)


def _check_square(a, name):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def _check_hermitian(a, name):
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.conj().T) > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"{name} is not Hermitian")


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.
    v : ndarray
        Unit-norm eigenvectors as columns, ``a @ v[:, k] = w[k] * v[:, k]``.
    """
    a = as_cmatrix(a)
    _check_square(a, "A")
    _check_hermitian(a, "A")
    return np.linalg.eigh(hermitian_part(a))


def cholesky_lower(b):
    """Lower Cholesky factor of a Hermitian PD matrix.

    Raises :class:`NotPositiveDefiniteError` with the failing pivot index.
    """
    b = hermitian_part(as_cmatrix(b))
    _check_square(b, "B")
    c, info = lapack.zpotrf(b, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (leading minor {info} fails)",
            pivot=info - 1,
        )
    if info < 0:
        raise ValueError(f"zpotrf: illegal argument {-info}")
    return c


def _fix_phase(v):
    # deterministic phase: largest-magnitude entry made real positive
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def generalized_eig_principal(a, b):
    """Principal eigenpair of the pencil ``(A, B)``, i.e. of ``B^{-1} A``.

    Solved by Cholesky whitening: with ``B = L L^H`` the standard Hermitian
    problem ``L^{-1} A L^{-H} w = lam w`` is solved and ``v = L^{-H} w`` is
    mapped back and normalized to unit norm.

    Parameters
    ----------
    a : array_like
        Hermitian PSD matrix.
    b : array_like
        Hermitian PD matrix.

    Returns
    -------
    lam : float
        Largest generalized eigenvalue.
    v : ndarray
        Unit-norm eigenvector, phase fixed so that its largest-magnitude
        entry is real and positive.
    """
    a = as_cmatrix(a, "A")
    b = as_cmatrix(b, "B")
    _check_square(a, "A")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    _check_hermitian(a, "A")
    _check_hermitian(b, "B")
    low = cholesky_lower(b)
    tmp = linalg.solve_triangular(low, hermitian_part(a), lower=True)
    c = linalg.solve_triangular(low, tmp.conj().T, lower=True).conj().T
    w, u = np.linalg.eigh(hermitian_part(c))
    v = linalg.solve_triangular(low.conj().T, u[:, -1], lower=False)
    v = v / np.linalg.norm(v)
    return float(w[-1]), _fix_phase(v)


def solve_hpd(b, x):
    """Solve ``B Y = X`` for Hermitian PD ``B`` via Cholesky."""
    b = as_cmatrix(b, "B")
    x_arr = np.asarray(x, dtype=np.complex128)
    _check_square(b, "B")
    if x_arr.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: B is {b.shape}, X has {x_arr.shape[0]} rows")
    low = cholesky_lower(b)
    return linalg.cho_solve((low, True), x_arr)


def logdet_plus(a):
    """``log2 |I + A|`` for Hermitian PSD ``A`` (sum of ``log2(1 + lam_k)``)."""
    a = as_cmatrix(a)
    _check_square(a, "A")
    w = np.linalg.eigvalsh(hermitian_part(a))
    if w.size and w[0] < -PSD_ATOL:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    return float(np.sum(np.log2(1.0 + np.maximum(w, 0.0))))
