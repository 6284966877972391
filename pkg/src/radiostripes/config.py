"""Scenario parameters and unit conversions."""

from dataclasses import asdict, dataclass, field, replace

import numpy as np

PLACEMENTS = ("circle", "sector_L_shape")


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * np.log10(p_mw)


def gbps_to_bits(c_gbps, bandwidth_hz=100e6):
    """Fronthaul capacity in bits per channel use from a bit rate in Gbps."""
    return c_gbps * 1e9 / bandwidth_hz


@dataclass(frozen=True)
class SystemConfig:
    """All scalars describing one network scenario.

    Powers are in mW, lengths in meters, angles in radians and the
    fronthaul capacity ``C_F`` in bits per channel use. The defaults are the
    M=4, L=8, N=24, K=20 setup with 50 mW UEs, -85 dBm noise and a
    10 Gbps (100 bits per channel use at 100 MHz) fronthaul.
    """

    M: int = 4
    L: int = 8
    N: int = 24
    K: int = 20
    C_F: float = 100.0
    P_tx: float = 50.0
    sigma_z2: float = float(dbm_to_mw(-85.0))
    coverage_radius: float = 200.0
    ap_height_delta: float = 5.0
    sigma_phi: float = float(np.deg2rad(15.0))
    d_H: float = 0.5
    seed: int = 0
    trials: int = 100
    placement: str = "auto"
    bandwidth: float = 100e6
    quadrature_order: int = 30
    P_k: tuple = field(default=None)

    def __post_init__(self):
        for name in ("M", "L", "N", "K"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer, got {getattr(self, name)!r}")
        if not self.C_F > 0:
            raise ValueError(f"C_F must be positive, got {self.C_F}")
        if not (self.P_tx > 0 and self.sigma_z2 > 0):
            raise ValueError("powers must be positive")
        if self.P_k is not None:
            if len(self.P_k) != self.K or min(self.P_k) <= 0:
                raise ValueError("P_k must hold K positive powers")
        if not self.sigma_phi > 0:
            raise ValueError("sigma_phi must be positive")
        if self.coverage_radius <= 0 or self.ap_height_delta < 0 or self.d_H <= 0:
            raise ValueError("invalid geometry parameters")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.quadrature_order < 30:
            raise ValueError("quadrature_order must be >= 30")
        if self.placement not in PLACEMENTS + ("auto",):
            raise ValueError(f"unknown placement {self.placement!r}")

    @property
    def powers(self):
        """Per-UE transmit powers ``P_k`` in mW, shape (K,)."""
        if self.P_k is not None:
            return np.asarray(self.P_k, dtype=float)
        return np.full(self.K, float(self.P_tx))

    @property
    def Sigma_x(self):
        return np.diag(self.powers).astype(complex)

    @property
    def resolved_placement(self):
        if self.placement != "auto":
            return self.placement
        return "circle" if self.M == 1 else "sector_L_shape"

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)
