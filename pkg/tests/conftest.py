import numpy as np
import pytest

from radiostripes import SystemConfig, draw_scenario


@pytest.fixture(scope="session")
def small_cfg():
    return SystemConfig(M=2, L=4, N=8, K=4, C_F=8.0)


@pytest.fixture(scope="session")
def small_scenario(small_cfg):
    return draw_scenario(small_cfg, np.random.default_rng(11))


def random_psd(rng, n, floor=0.1):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T + floor * np.eye(n)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
