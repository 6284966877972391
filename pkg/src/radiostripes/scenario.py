"""Network geometry, local-scattering channel statistics and MMSE channel training.

A scenario is built in three steps::

    geom = place_network(cfg, rng)
    R, beta = channel_statistics(geom, cfg)
    states = estimate_channels(R, cfg, rng)

or in one call with :func:`draw_scenario`. Powers are linear (mW), and the
per-AP quantities are indexed ``states[m][i]`` for AP ``i`` of stripe ``m``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag, toeplitz
from scipy.special import roots_hermite

from .config import SystemConfig
from .linalg import NumericalError, crandn, hermitize, sqrtm_psd


@dataclass(frozen=True)
class Geometry:
    """AP and UE positions (meters) and AP boresight angles (radians).

    ``ap_positions`` and ``boresight`` have shape (M, L, 2) and (M, L);
    ``ue_positions`` has shape (K, 2).
    """

    ap_positions: np.ndarray
    ue_positions: np.ndarray
    boresight: np.ndarray


@dataclass
class ApChannelState:
    """Everything AP (m, i) knows about its own channels.

    Attributes
    ----------
    R : ndarray, (K, N, N)
        Spatial covariance of each UE's channel.
    beta : ndarray, (K,)
        Large-scale fading, ``trace(R[k]) / N``.
    h : ndarray, (K, N)
        True channel realization.
    h_hat : ndarray, (K, N)
        MMSE estimate of ``h``.
    R_hat, R_tilde : ndarray, (K, N, N)
        Covariances of the estimate and of the estimation error.
    Sigma_w : ndarray, (N, N)
        Covariance of the effective noise (CSI error plus thermal noise).
    """

    R: np.ndarray
    beta: np.ndarray
    h: np.ndarray
    h_hat: np.ndarray
    R_hat: np.ndarray
    R_tilde: np.ndarray
    Sigma_w: np.ndarray

    @property
    def H_hat(self):
        """Stacked estimate, N x K."""
        return self.h_hat.T

    @property
    def H(self):
        return self.h.T


@dataclass
class Scenario:
    config: SystemConfig
    geometry: Geometry
    states: list

    @property
    def Sigma_x(self):
        return self.config.Sigma_x


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

def _circle_layout(M, L, radius):
    angles = 2 * np.pi * np.arange(M * L) / (M * L)
    pos = radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return pos.reshape(M, L, 2)


def _sector_layout(M, L, radius):
    """Each stripe runs out along its sector's leading spoke, then along the arc."""
    n_spoke = -(-L // 2)
    n_arc = L - n_spoke
    width = 2 * np.pi / M
    pos = np.empty((M, L, 2))
    for m in range(M):
        start = m * width
        r = radius * np.arange(1, n_spoke + 1) / n_spoke
        pos[m, :n_spoke] = np.stack([r * np.cos(start), r * np.sin(start)], axis=-1)
        theta = start + width * np.arange(1, n_arc + 1) / (n_arc + 1)
        pos[m, n_spoke:] = radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return pos


def place_network(config, rng):
    """Drop UEs uniformly on the coverage disk and lay out the APs.

    With ``placement == "circle"`` the M*L APs are equally spaced on the
    disk boundary, stripe by stripe. With ``"sector_L_shape"`` stripe m
    owns the angular sector ``[2*pi*m/M, 2*pi*(m+1)/M)``: the first
    ``ceil(L/2)`` APs sit on the sector's leading radius (center excluded)
    and the rest on the interior of its arc. Boresights point at the center.
    """
    M, L, K = config.M, config.L, config.K
    radius = config.coverage_radius
    if config.resolved_placement == "circle":
        ap = _circle_layout(M, L, radius)
    else:
        ap = _sector_layout(M, L, radius)

    r = radius * np.sqrt(rng.uniform(size=K))
    theta = rng.uniform(-np.pi, np.pi, size=K)
    ue = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    boresight = np.arctan2(-ap[..., 1], -ap[..., 0])
    return Geometry(ap_positions=ap, ue_positions=ue, boresight=boresight)


def pathloss_db(distance_3d):
    """Channel gain in dB at a 3-D distance in meters: -30.5 - 36.7 log10(d)."""
    d = np.asarray(distance_3d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return -30.5 - 36.7 * np.log10(d)


def nominal_angles(geom):
    """UE azimuths in each AP's boresight frame, shape (M, L, K), wrapped to (-pi, pi]."""
    diff = geom.ue_positions[None, None, :, :] - geom.ap_positions[:, :, None, :]
    az = np.arctan2(diff[..., 1], diff[..., 0]) - geom.boresight[..., None]
    return np.angle(np.exp(1j * az))


def distances_3d(geom, height_delta):
    diff = geom.ue_positions[None, None, :, :] - geom.ap_positions[:, :, None, :]
    return np.sqrt(np.sum(diff**2, axis=-1) + height_delta**2)


# ---------------------------------------------------------------------------
# Local scattering model
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _hermite_rule(order):
    x, w = roots_hermite(order)
    return x, w / np.sum(w)


def quadrature_order(N, d_H, sigma_phi, minimum=30):
    """Gauss-Hermite order that resolves the steering phase at the largest lag.

    Order 30 is exact to machine precision only for small arrays; the
    oscillation frequency of the integrand grows with ``d_H * (N - 1)``.
    """
    omega = 2 * np.pi * d_H * (N - 1) * np.sqrt(2) * sigma_phi
    return max(int(minimum), int(np.ceil(30 + 0.3 * omega**2 + 3 * omega)))


def local_scattering_covariance(N, phi, beta, sigma_phi, d_H=0.5, order=None):
    """N x N covariance of a ULA under Gaussian angular spread around ``phi``.

    ``R[a, b] = beta * E[exp(2j*pi*d_H*(a-b)*sin(phi + delta))]`` with
    ``delta ~ N(0, sigma_phi^2)``, evaluated by Gauss-Hermite quadrature.
    """
    if order is None:
        order = quadrature_order(N, d_H, sigma_phi)
    x, w = _hermite_rule(order)
    lags = np.arange(N)
    angles = phi + np.sqrt(2.0) * sigma_phi * x
    col = beta * (np.exp(2j * np.pi * d_H * np.outer(lags, np.sin(angles))) @ w)
    col[0] = col[0].real
    return toeplitz(col, col.conj())


def spatial_covariance(geom, ap, ue, config):
    """Covariance ``R_{m,i,k}`` for AP ``ap = (m, i)`` and UE ``ue``."""
    m, i = ap
    phi = nominal_angles(geom)[m, i, ue]
    d = distances_3d(geom, config.ap_height_delta)[m, i, ue]
    beta = 10.0 ** (pathloss_db(d) / 10.0)
    order = quadrature_order(config.N, config.d_H, config.sigma_phi, config.quadrature_order)
    R = local_scattering_covariance(config.N, phi, beta, config.sigma_phi, config.d_H, order)
    _check_diagonal(R, beta)
    return R


def _check_diagonal(R, beta):
    diag = np.real(np.diagonal(R, axis1=-2, axis2=-1))
    dev = np.abs(diag - np.asarray(beta)[..., None]) / np.asarray(beta)[..., None]
    if np.any(dev > 1e-6):
        raise NumericalError("local scattering quadrature did not reproduce beta on the diagonal")


def channel_statistics(geom, config):
    """All covariances ``R`` (M, L, K, N, N) and gains ``beta`` (M, L, K)."""
    M, L, K, N = config.M, config.L, config.K, config.N
    phi = nominal_angles(geom)
    beta = 10.0 ** (pathloss_db(distances_3d(geom, config.ap_height_delta)) / 10.0)
    order = quadrature_order(N, config.d_H, config.sigma_phi, config.quadrature_order)
    R = np.empty((M, L, K, N, N), dtype=complex)
    for m in range(M):
        for i in range(L):
            for k in range(K):
                R[m, i, k] = local_scattering_covariance(
                    N, phi[m, i, k], beta[m, i, k], config.sigma_phi, config.d_H, order
                )
    _check_diagonal(R, beta)
    return R, beta


# ---------------------------------------------------------------------------
# Channels and training
# ---------------------------------------------------------------------------

def sample_channel(R, rng, size=None):
    """Draw ``h ~ CN(0, R)`` as ``R^{1/2} g``.

    With ``size`` given, returns ``size`` independent draws stacked on the
    first axis.

    Raises
    ------
    ValueError
        If ``R`` has an eigenvalue below ``-1e-10 * trace(R)``.
    """
    R = np.asarray(R, dtype=complex)
    S = sqrtm_psd(R)
    N = R.shape[0]
    if size is None:
        return S @ crandn(rng, N)
    return crandn(rng, size, N) @ S.T


def pilot_matrix(K):
    """K orthogonal length-K pilots as columns, ``phi_k^H phi_l = K delta_kl``."""
    return np.fft.fft(np.eye(K))


def estimation_covariances(R, P, sigma_z2):
    """Estimate and error covariances under orthogonal length-K pilots.

    Parameters
    ----------
    R : ndarray, (K, N, N)
    P : ndarray, (K,)
        Pilot (= data) powers.

    Returns
    -------
    R_hat, R_tilde, Psi_inv
        ``Psi_inv`` is ``(P_k K R_k + sigma_z2 I)^{-1}`` per UE.
    """
    K, N = R.shape[0], R.shape[-1]
    gain = (P * K)[:, None, None]
    Psi = gain * R + sigma_z2 * np.eye(N)
    Psi_inv = np.linalg.inv(Psi)
    R_hat = hermitize(gain * R @ Psi_inv @ R)
    R_tilde = hermitize(R - R_hat)
    return R_hat, R_tilde, Psi_inv


def estimate_channels(R, config, rng, h=None):
    """Run pilot training at every AP.

    Draws the true channels (unless ``h`` of shape (M, L, K, N) is given),
    simulates the received pilot block, despreads it and applies the
    linear MMSE filter.

    Returns
    -------
    list of list of ApChannelState
        ``states[m][i]``.
    """
    M, L, K, N = R.shape[:4]
    P = config.powers
    sigma_z2 = config.sigma_z2
    Phi = pilot_matrix(K)
    states = []
    for m in range(M):
        row = []
        for i in range(L):
            Rmi = R[m, i]
            if h is None:
                hmi = np.stack([sample_channel(Rmi[k], rng) for k in range(K)])
            else:
                hmi = np.asarray(h[m, i])
            Z = np.sqrt(sigma_z2) * crandn(rng, N, K)
            Yp = (hmi.T * np.sqrt(P)) @ Phi.T + Z
            despread = Yp @ Phi.conj() / np.sqrt(K)
            R_hat, R_tilde, Psi_inv = estimation_covariances(Rmi, P, sigma_z2)
            h_hat = np.stack(
                [np.sqrt(P[k] * K) * Rmi[k] @ Psi_inv[k] @ despread[:, k] for k in range(K)]
            )
            Sigma_w = hermitize(np.einsum("k,kab->ab", P, R_tilde) + sigma_z2 * np.eye(N))
            beta = np.real(np.trace(Rmi, axis1=-2, axis2=-1)) / N
            row.append(ApChannelState(Rmi, beta, hmi, h_hat, R_hat, R_tilde, Sigma_w))
        states.append(row)
    return states


def draw_scenario(config, rng=None):
    """Geometry, statistics, channels and estimates for one Monte-Carlo trial."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    geom = place_network(config, rng)
    R, _ = channel_statistics(geom, config)
    states = estimate_channels(R, config, rng)
    return Scenario(config=config, geometry=geom, states=states)


def flat_states(states):
    return [s for row in states for s in row]


def stacked_estimates(states):
    """Per stripe, the ``L*N x K`` stacked estimates and block-diagonal noise."""
    H_bar = [np.vstack([s.H_hat for s in row]) for row in states]
    Sw_bar = [block_diag(*[s.Sigma_w for s in row]) for row in states]
    return H_bar, Sw_bar


__all__ = [
    "ApChannelState",
    "Geometry",
    "Scenario",
    "channel_statistics",
    "draw_scenario",
    "estimate_channels",
    "estimation_covariances",
    "local_scattering_covariance",
    "nominal_angles",
    "pathloss_db",
    "pilot_matrix",
    "place_network",
    "quadrature_order",
    "sample_channel",
    "spatial_covariance",
    "stacked_estimates",
]
