"""Analog/digital factorization of a combiner for APs with K RF chains."""

from dataclasses import dataclass

import numpy as np

from .linalg import NumericalError, herm

HYBRID_MODES = ("off", "proposed", "random")


@dataclass
class HybridCombiner:
    U_A: np.ndarray
    U_D: np.ndarray

    @property
    def U_hyb(self):
        return self.U_A @ self.U_D


def project_analog(U):
    """Element-wise projection onto unit modulus; zero entries map to 1."""
    U = np.asarray(U, dtype=complex)
    mag = np.abs(U)
    out = np.ones_like(U)
    nz = mag > 0
    out[nz] = U[nz] / mag[nz]
    return out


def fit_digital(U, U_A):
    """Least-squares digital stage: argmin_X ||U - U_A X||_F.

    Raises
    ------
    NumericalError
        If ``U_A`` does not have full column rank.
    """
    U_A = np.asarray(U_A, dtype=complex)
    if np.linalg.matrix_rank(U_A) < U_A.shape[1]:
        raise NumericalError("analog combiner is rank deficient")
    gram = herm(U_A) @ U_A
    return np.linalg.solve(gram, herm(U_A) @ U)


def random_analog(N, K, rng):
    """N x K matrix of i.i.d. phases uniform on [-pi, pi)."""
    return np.exp(1j * rng.uniform(-np.pi, np.pi, size=(N, K)))


def hybrid_combiner(U, mode, rng=None):
    """Factor a fully-digital combiner ``U`` for the given hybrid mode.

    ``"proposed"`` projects ``U`` onto the constant-modulus set;
    ``"random"`` draws the analog stage at random. Either way the digital
    stage is the least-squares fit to ``U``.
    """
    if mode == "proposed":
        U_A = project_analog(U)
    elif mode == "random":
        if rng is None:
            raise ValueError("random analog combining needs an rng")
        U_A = random_analog(U.shape[0], U.shape[1], rng)
    else:
        raise ValueError(f"unknown hybrid mode {mode!r}")
    return HybridCombiner(U_A=U_A, U_D=fit_digital(U, U_A))
