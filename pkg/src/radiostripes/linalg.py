"""Small dense linear-algebra helpers shared by the rate and design code."""

import numpy as np


class NumericalError(ArithmeticError):
    """A matrix that must be positive definite (or invertible) is not."""


def herm(X):
    return np.swapaxes(X, -1, -2).conj()


def hermitize(X):
    """Return the Hermitian part of a square matrix."""
    return 0.5 * (X + herm(X))


def logdet2(A):
    """log2 det of a Hermitian positive-definite matrix via Cholesky.

    Raises
    ------
    NumericalError
        If the Cholesky factorization fails.
    """
    try:
        L = np.linalg.cholesky(hermitize(A))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(L)))))


def eigh_desc(A):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Ties keep their ascending-solver order reversed (stable). Each
    eigenvector is rotated so its largest-magnitude entry is real positive,
    which makes the basis reproducible across runs.
    """
    w, U = np.linalg.eigh(hermitize(A))
    order = np.argsort(-w, kind="stable")
    w = w[order]
    U = U[:, order]
    idx = np.argmax(np.abs(U), axis=0)
    pivots = U[idx, np.arange(U.shape[1])]
    phase = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return w, U / phase


def inv_sqrtm_psd(A):
    """Hermitian inverse square root ``A^{-1/2}`` of a positive-definite matrix."""
    w, U = np.linalg.eigh(hermitize(A))
    if w[0] <= 0:
        raise NumericalError(f"matrix is not positive definite (min eig {w[0]:.3e})")
    return (U / np.sqrt(w)) @ herm(U)


def sqrtm_psd(A, tol=1e-10):
    """Hermitian square root of a PSD matrix, tolerating tiny negative eigenvalues.

    Eigenvalues below ``-tol * trace(A)`` are rejected.
    """
    w, U = np.linalg.eigh(hermitize(A))
    scale = max(float(np.real(np.trace(A))), 0.0)
    if w.size and w[0] < -tol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not positive semidefinite (min eig {w[0]:.3e})")
    # eigenvalues at roundoff level are zeros; their square roots are not small
    w = np.where(w > w.size * np.finfo(float).eps * max(w.max(initial=0.0), 0.0), w, 0.0)
    return (U * np.sqrt(w)) @ herm(U)


def crandn(rng, *shape):
    """Standard circularly-symmetric complex Gaussian samples, unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
