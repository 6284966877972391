import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from radiostripes import SystemConfig, draw_scenario
from radiostripes.linalg import NumericalError, herm
from radiostripes.scenario import (
    channel_statistics,
    estimate_channels,
    estimation_covariances,
    local_scattering_covariance,
    pathloss_db,
    pilot_matrix,
    place_network,
    quadrature_order,
    sample_channel,
    spatial_covariance,
)


@pytest.mark.parametrize("d, gain", [(100.0, -103.9), (1.0, -30.5), (10.0, -67.2)])
def test_pathloss_examples(d, gain):
    assert pathloss_db(d) == pytest.approx(gain, abs=1e-9)


def test_pathloss_rejects_nonpositive():
    with pytest.raises(ValueError):
        pathloss_db(0.0)


def test_circle_layout_angles():
    cfg = SystemConfig(M=1, L=4, N=2, K=3)
    geom = place_network(cfg, np.random.default_rng(0))
    pos = geom.ap_positions[0]
    np.testing.assert_allclose(np.hypot(pos[:, 0], pos[:, 1]), 200.0)
    ang = np.rad2deg(np.arctan2(pos[:, 1], pos[:, 0])) % 360
    np.testing.assert_allclose(ang, [0, 90, 180, 270], atol=1e-9)
    # boresight toward the center
    expect = np.deg2rad([180, 270, 0, 90])
    np.testing.assert_allclose(np.exp(1j * geom.boresight[0]), np.exp(1j * expect), atol=1e-12)


def test_sector_layout_four_stripes():
    cfg = SystemConfig(M=4, L=8, N=2, K=50)
    geom = place_network(cfg, np.random.default_rng(0))
    pos = geom.ap_positions
    assert pos.shape == (4, 8, 2)
    for m in range(4):
        ang = np.arctan2(pos[m, :, 1], pos[m, :, 0]) % (2 * np.pi)
        lo, hi = m * np.pi / 2, (m + 1) * np.pi / 2
        assert np.all((ang >= lo - 1e-9) & (ang < hi))
        radii = np.hypot(pos[m, :, 0], pos[m, :, 1])
        # 4 on the spoke (center excluded), 4 on the arc
        np.testing.assert_allclose(radii[:4], [50, 100, 150, 200])
        np.testing.assert_allclose(radii[4:], 200)
    ue_r = np.hypot(geom.ue_positions[:, 0], geom.ue_positions[:, 1])
    assert np.all(ue_r <= 200)


def test_geometry_seeded():
    cfg = SystemConfig(M=2, L=3, N=2, K=5)
    g1 = place_network(cfg, np.random.default_rng(7))
    g2 = place_network(cfg, np.random.default_rng(7))
    np.testing.assert_array_equal(g1.ue_positions, g2.ue_positions)


def test_ue_uniform_on_disk():
    # the fraction inside half the radius is 1/4 for a uniform drop
    cfg = SystemConfig(M=1, L=1, N=1, K=20000)
    ue = place_network(cfg, np.random.default_rng(3)).ue_positions
    frac = np.mean(np.hypot(ue[:, 0], ue[:, 1]) < 100)
    assert frac == pytest.approx(0.25, abs=0.015)


def _integral_oracle(lag, phi, sigma, d_H=0.5):
    def f(delta, part):
        v = np.exp(2j * np.pi * d_H * lag * np.sin(phi + delta))
        g = np.exp(-delta**2 / (2 * sigma**2)) / np.sqrt(2 * np.pi * sigma**2)
        return (v.real if part == 0 else v.imag) * g

    lim = 12 * sigma
    re = integrate.quad(f, -lim, lim, args=(0,), limit=400, epsabs=1e-13)[0]
    im = integrate.quad(f, -lim, lim, args=(1,), limit=400, epsabs=1e-13)[0]
    return re + 1j * im


@pytest.mark.parametrize("N, phi", [(8, 0.3), (24, -1.1), (64, 0.9)])
def test_covariance_matches_adaptive_integration(N, phi):
    sigma = np.deg2rad(15)
    R = local_scattering_covariance(N, phi, 1.0, sigma)
    for lag in (1, N // 2, N - 1):
        assert R[lag, 0] == pytest.approx(_integral_oracle(lag, phi, sigma), abs=1e-9)


def test_covariance_eigenvalues_vs_monte_carlo():
    sigma = np.deg2rad(15)
    R = local_scattering_covariance(4, 0.0, 1.0, sigma)
    rng = np.random.default_rng(0)
    delta = rng.normal(0, sigma, 1_000_000)
    lags = np.arange(4)
    col = np.exp(2j * np.pi * 0.5 * np.outer(lags, np.sin(delta))).mean(axis=1)
    from scipy.linalg import toeplitz

    R_mc = toeplitz(col, col.conj())
    ev, ev_mc = np.linalg.eigvalsh(R), np.linalg.eigvalsh(R_mc)
    # the smallest eigenvalues are tiny; compare relative to the spectrum scale
    np.testing.assert_allclose(ev, ev_mc, atol=1e-3 * ev.max())


def test_covariance_single_antenna_and_narrow_spread():
    assert local_scattering_covariance(1, 0.4, 2.5, 0.2) == pytest.approx(np.array([[2.5]]))
    phi = 0.7
    R = local_scattering_covariance(5, phi, 1.0, 1e-7)
    a = np.exp(2j * np.pi * 0.5 * np.arange(5) * np.sin(phi))
    np.testing.assert_allclose(R, np.outer(a, a.conj()), atol=1e-9)
    assert np.linalg.matrix_rank(R, tol=1e-6) == 1


def test_order_30_is_too_coarse_for_long_arrays():
    # why the quadrature order adapts to the array length
    sigma = np.deg2rad(15)
    exact = _integral_oracle(23, 0.9, sigma)
    coarse = local_scattering_covariance(24, 0.9, 1.0, sigma, order=30)[23, 0]
    fine = local_scattering_covariance(24, 0.9, 1.0, sigma)[23, 0]
    assert abs(coarse - exact) > 1e-3
    assert abs(fine - exact) < 1e-10
    assert quadrature_order(24, 0.5, sigma) > 30


def test_spatial_covariance_properties(small_cfg):
    geom = place_network(small_cfg, np.random.default_rng(0))
    R = spatial_covariance(geom, (1, 2), 3, small_cfg)
    np.testing.assert_allclose(R, herm(R), atol=1e-12)
    beta = np.real(R[0, 0])
    np.testing.assert_allclose(np.real(np.diag(R)), beta, rtol=1e-12)
    assert np.linalg.eigvalsh(R).min() > -1e-10 * np.trace(R).real


def test_channel_statistics_shapes(small_cfg):
    geom = place_network(small_cfg, np.random.default_rng(0))
    R, beta = channel_statistics(geom, small_cfg)
    assert R.shape == (2, 4, 4, 8, 8)
    np.testing.assert_allclose(np.trace(R, axis1=-2, axis2=-1).real / 8, beta, rtol=1e-12)


def test_sample_channel_examples():
    rng = np.random.default_rng(0)
    np.testing.assert_array_equal(sample_channel(np.zeros((3, 3)), rng), 0)
    H = sample_channel(np.eye(4), rng, size=100_000)
    C = H.T @ H.conj() / H.shape[0]
    assert np.linalg.norm(C - np.eye(4)) / np.linalg.norm(np.eye(4)) < 0.05
    a = np.exp(1j * np.arange(4))
    H1 = sample_channel(np.outer(a, a.conj()), rng, size=50)
    resid = H1 - np.outer(H1 @ a.conj() / 4, a)
    assert np.abs(resid).max() < 1e-10
    with pytest.raises(ValueError):
        sample_channel(np.diag([1.0, -1.0]), rng)


def test_pilots_orthogonal():
    Phi = pilot_matrix(5)
    np.testing.assert_allclose(Phi.conj().T @ Phi, 5 * np.eye(5), atol=1e-12)


def test_scalar_estimate_covariance():
    P, K, beta, s2 = 2.0, 3, 0.7, 0.1
    R = np.full((K, 1, 1), beta, dtype=complex)
    R_hat, R_tilde, _ = estimation_covariances(R, np.full(K, P), s2)
    assert R_hat[0, 0, 0].real == pytest.approx(P * K * beta**2 / (P * K * beta + s2))
    np.testing.assert_allclose(R_hat + R_tilde, R, atol=1e-15)


def test_noiseless_training_recovers_channels():
    cfg = SystemConfig(M=1, L=2, N=4, K=3, sigma_z2=1e-30)
    geom = place_network(cfg, np.random.default_rng(0))
    R, _ = channel_statistics(geom, cfg)
    states = estimate_channels(R, cfg, np.random.default_rng(1))
    for s in states[0]:
        np.testing.assert_allclose(s.h_hat, s.h, atol=1e-6 * np.abs(s.h).max())
        assert np.abs(s.R_tilde).max() < 1e-6 * np.abs(s.R).max()


def test_estimates_monte_carlo():
    """Estimate covariance, and estimate/error orthogonality, over 10^4 draws."""
    cfg = SystemConfig(M=1, L=1, N=4, K=2, sigma_z2=1e-9)
    geom = place_network(cfg, np.random.default_rng(0))
    R, _ = channel_statistics(geom, cfg)
    rng = np.random.default_rng(5)
    T = 10_000
    hh, ee = [], []
    for _ in range(T):
        s = estimate_channels(R, cfg, rng)[0][0]
        hh.append(s.h_hat[0])
        ee.append(s.h[0] - s.h_hat[0])
    hh, ee = np.array(hh), np.array(ee)
    R_hat = s.R_hat[0]
    C = hh.T @ hh.conj() / T
    X = hh.T @ ee.conj() / T
    assert np.linalg.norm(C - R_hat) / np.linalg.norm(R_hat) < 0.05
    assert np.linalg.norm(X) / np.linalg.norm(R_hat) < 0.05


def test_effective_noise(small_scenario, small_cfg):
    for row in small_scenario.states:
        for s in row:
            expect = np.einsum("k,kab->ab", small_cfg.powers, s.R_tilde) + small_cfg.sigma_z2 * np.eye(8)
            np.testing.assert_allclose(s.Sigma_w, expect, rtol=1e-12)
            assert np.linalg.eigvalsh(s.Sigma_w).min() > 0
            rel = np.linalg.norm(s.R_hat + s.R_tilde - s.R) / np.linalg.norm(s.R)
            assert rel < 1e-9


def test_scenario_seeded(small_cfg):
    a = draw_scenario(small_cfg, np.random.default_rng(4))
    b = draw_scenario(small_cfg, np.random.default_rng(4))
    np.testing.assert_array_equal(a.states[1][3].h_hat, b.states[1][3].h_hat)


def test_diagonal_check_raises():
    # an order far too low for a long array cannot reproduce beta
    from radiostripes.scenario import _check_diagonal

    R = np.eye(3) * 1.1
    with pytest.raises(NumericalError):
        _check_diagonal(R, 1.0)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(1, 16), phi=st.floats(-np.pi, np.pi), sig=st.floats(0.01, 0.6))
def test_covariance_invariants(N, phi, sig):
    R = local_scattering_covariance(N, phi, 1.0, sig)
    np.testing.assert_allclose(R, herm(R), atol=1e-12)
    np.testing.assert_allclose(np.real(np.diag(R)), 1.0, atol=1e-12)
    assert np.linalg.eigvalsh(R).min() > -1e-10 * N


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(M=0)
    with pytest.raises(ValueError):
        SystemConfig(C_F=0)
    with pytest.raises(ValueError):
        SystemConfig(sigma_phi=0)
    with pytest.raises(ValueError):
        SystemConfig(placement="grid")
