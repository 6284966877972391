"""Reference combiner and quantizer choices the proposed design is compared with."""

import numpy as np

from .linalg import herm


def mrc_combiners(H_hat, first=False):
    """Maximum-ratio combining: ``U = H_hat`` and ``V = I`` (no ``V`` at the head AP)."""
    K = H_hat.shape[1]
    U = H_hat
    V = None if first else np.eye(K, dtype=complex)
    return U, V


def naive_fh(G_hat, Sigma_n, Sigma_x, C_F):
    """Per-element quantizer with ``C_F / K`` bits for each of the K outputs.

    Returns the diagonal covariance ``diag(d)`` with
    ``d_k = [G Sigma_x G^H + Sigma_n]_kk / (2^(C_F/K) - 1)``.
    """
    K = G_hat.shape[0]
    if not C_F > 0:
        raise ValueError("C_F must be positive")
    power = np.real(np.diag(G_hat @ Sigma_x @ herm(G_hat) + Sigma_n))
    d = power / np.expm1(np.log(2.0) * C_F / K)
    return np.diag(d).astype(complex)
