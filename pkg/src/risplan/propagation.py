"""Path-loss kernels: 3GPP TR 38.901 UMa (LOS/NLOS) and RIS far-field beamforming.

Kernels accept scalars or numpy arrays for the distance arguments and return
the same kind. Shadow fading is not modelled; results are deterministic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

UMA_MIN_D2D = 10.0
UMA_MAX_D2D = 5000.0


@dataclass(frozen=True)
class UmaParams:
    fc: float  # GHz
    h_bs: float
    h_ut: float = 1.5
    h_e: float = 1.0
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.fc > 0:
            raise ValueError(f"carrier frequency must be > 0 GHz, got {self.fc}")
        if not self.h_bs > self.h_e:
            raise ValueError("BS height must exceed the effective environment height")
        if self.h_ut < self.h_e:
            raise ValueError("UT height must be >= the effective environment height")


@dataclass(frozen=True)
class RisPanel:
    """Physical RIS parameters; gains are linear, ``q`` shapes F(theta) = cos(theta)**(2q)."""

    m_elements: int = 102
    n_elements: int = 100
    d_m: float = 0.01
    d_n: float = 0.01
    amplitude: float = 0.9
    g_t: float = 1.0
    g_r: float = 1.0
    g_cell: float = 1.0
    q: float = 1.5

    def __post_init__(self):
        if self.m_elements < 1 or self.n_elements < 1:
            raise ValueError("RIS needs at least one element per axis")
        if not (self.d_m > 0 and self.d_n > 0):
            raise ValueError("RIS element widths must be > 0")
        if not 0 < self.amplitude <= 1:
            raise ValueError("RIS amplitude factor must be in (0, 1]")
        if self.q < 0:
            raise ValueError("pattern exponent q must be >= 0")
        if not (self.g_t > 0 and self.g_r > 0 and self.g_cell > 0):
            raise ValueError("RIS gains must be > 0 (linear)")

    @property
    def size(self) -> tuple[float, float]:
        return self.m_elements * self.d_m, self.n_elements * self.d_n


@dataclass(frozen=True)
class BeamAngles:
    theta_t: float = math.pi / 4
    phi_t: float = math.pi
    theta_r: float = math.pi / 4
    phi_r: float = 0.0


def uma_breakpoint(params: UmaParams) -> float:
    """Effective breakpoint distance d'_BP in meters."""
    if params.h_ut <= params.h_e:
        raise ValueError("UT height must exceed the effective environment height")
    fc_hz = params.fc * 1e9
    return 4.0 * (params.h_bs - params.h_e) * (params.h_ut - params.h_e) * fc_hz / params.c


def _clamped_d2d(d2d):
    d = np.asarray(d2d, dtype=float)
    if np.any(d > UMA_MAX_D2D):
        warnings.warn("UMa evaluated beyond 5 km", RuntimeWarning, stacklevel=3)
    return np.maximum(d, UMA_MIN_D2D)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def uma_pl_los(d2d, params: UmaParams):
    d = _clamped_d2d(d2d)
    dh = params.h_bs - params.h_ut
    d3 = np.sqrt(d * d + dh * dh)
    dbp = uma_breakpoint(params)
    f_term = 20.0 * math.log10(params.fc)
    pl1 = 28.0 + 22.0 * np.log10(d3) + f_term
    pl2 = 28.0 + 40.0 * np.log10(d3) + f_term - 9.0 * math.log10(dbp * dbp + dh * dh)
    return _scalar_or_array(np.where(d <= dbp, pl1, pl2), d2d)


def uma_pl_nlos(d2d, params: UmaParams):
    d = _clamped_d2d(d2d)
    dh = params.h_bs - params.h_ut
    d3 = np.sqrt(d * d + dh * dh)
    pl_nlos = 13.54 + 39.08 * np.log10(d3) + 20.0 * math.log10(params.fc) - 0.6 * (params.h_ut - 1.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pl_los = uma_pl_los(d, params)
    return _scalar_or_array(np.maximum(pl_los, pl_nlos), d2d)


def pattern_gain(theta: float, q: float) -> float:
    """Unit-cell radiation pattern F(theta) = cos(theta)**(2q)."""
    if not 0 <= theta < math.pi / 2:
        raise ValueError(f"elevation angle {theta} outside [0, pi/2)")
    return math.cos(theta) ** (2.0 * q)


def ris_ffbc_pl(d1, d2, wavelength: float, panel: RisPanel, angles: BeamAngles = BeamAngles()):
    """Far-field beamforming path loss (dB) of the BS -> RIS -> MP link.

    ``d1`` is the BS-RIS distance, ``d2`` the RIS-MP distance; either may be
    an array.
    """
    if not wavelength > 0:
        raise ValueError("wavelength must be > 0")
    f_t = pattern_gain(angles.theta_t, panel.q)
    f_r = pattern_gain(angles.theta_r, panel.q)
    aperture = (
        panel.g_t * panel.g_r * panel.g_cell
        * panel.m_elements**2 * panel.n_elements**2
        * panel.d_m * panel.d_n * wavelength**2
        * f_t * f_r * panel.amplitude**2
    )
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise ValueError("RIS hop distances must be > 0")
    # grouped so that swapping the hops is bit-exact
    pl = 10.0 * np.log10(64.0 * math.pi**3 * ((d1 * d1) * (d2 * d2)) / aperture)
    return float(pl) if pl.ndim == 0 else pl


def far_field_distance(panel: RisPanel, wavelength: float) -> float:
    """Minimum distance 2 D^2 / lambda, D being the largest panel side."""
    D = max(panel.size)
    return 2.0 * D * D / wavelength
