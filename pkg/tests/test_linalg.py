import numpy as np
import pytest

from radiostripes.linalg import (NumericalError, eigh_desc, herm, inv_sqrtm_psd, logdet2,
                                 sqrtm_psd)

from conftest import random_psd


def test_logdet2_matches_slogdet():
    rng = np.random.default_rng(0)
    A = random_psd(rng, 6)
    assert logdet2(A) == pytest.approx(np.linalg.slogdet(A)[1] / np.log(2), abs=1e-10)


def test_logdet2_rejects_indefinite():
    with pytest.raises(NumericalError):
        logdet2(np.diag([1.0, -1.0]))


def test_eigh_desc_order_and_phase():
    rng = np.random.default_rng(1)
    A = random_psd(rng, 5)
    w, U = eigh_desc(A)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(U @ np.diag(w) @ herm(U), A, atol=1e-10)
    piv = U[np.argmax(np.abs(U), axis=0), np.arange(5)]
    np.testing.assert_allclose(piv.imag, 0, atol=1e-14)
    assert np.all(piv.real > 0)


def test_square_roots():
    rng = np.random.default_rng(2)
    A = random_psd(rng, 4)
    S = sqrtm_psd(A)
    Ni = inv_sqrtm_psd(A)
    np.testing.assert_allclose(S @ S, A, atol=1e-10)
    np.testing.assert_allclose(Ni @ A @ Ni, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(Ni, herm(Ni), atol=1e-14)


def test_sqrtm_rejects_negative():
    with pytest.raises(ValueError):
        sqrtm_psd(np.diag([1.0, -0.5]))


def test_herm_batched():
    X = np.arange(8).reshape(2, 2, 2) * (1 + 1j)
    assert herm(X).shape == (2, 2, 2)
    np.testing.assert_array_equal(herm(X)[1], X[1].conj().T)
