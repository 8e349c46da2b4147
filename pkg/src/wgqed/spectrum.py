"""Mean fields, first-order coherence and the inelastic (Mollow) spectrum.

Spectral functions take the absolute frequency ``omega`` and depend on it only
through ``omega - k0``; the overall ``k0`` prefactor of the power spectrum is
left out, so values are shapes per unit ``k0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .correlators import c0_poly, corr_time, m0_poly, r0_poly
from .errors import InvalidParameterError
from .params import SystemParams, derive, stationary_value


@dataclass(frozen=True)
class Amplitudes:
    r_amp: complex
    t_amp: complex

    @property
    def reflectance(self) -> float:
        return abs(self.r_amp) ** 2

    @property
    def transmittance(self) -> float:
        return abs(self.t_amp) ** 2


@dataclass
class SpectrumResult:
    """Inelastic spectrum on a frequency grid, split into its two kernels."""

    omega: np.ndarray
    p_inel: np.ndarray
    m_part: np.ndarray
    c_part: np.ndarray
    T: float


def amplitudes(params: SystemParams) -> Amplitudes:
    """Stationary reflection and transmission amplitudes of the mean field."""
    d, g = params.delta, params.gamma
    r = -1j * g * complex(d, -g) / (params.rabi**2 / 2 + d**2 + g**2)
    return Amplitudes(r_amp=r, t_amp=1 + r)


def g1_tilde(params: SystemParams, T: float, tau):
    """Scattered part of ``<a^+(z1') a(z1)>`` for ``z1' - z1 = tau`` and waiting time ``T``."""
    lam2 = derive(params).lambda_abs2
    if math.isinf(T):
        RT = CT = stationary_value(params)
    else:
        if T < 0:
            raise InvalidParameterError("T must be non-negative")
        RT = corr_time(params, "R", T).real
        CT = corr_time(params, "C", T)
    tau = np.asarray(tau, dtype=float)
    val = lam2 * np.exp(-1j * params.k0 * tau) * (
        RT * corr_time(params, "M", tau) + (np.conj(CT) - RT) * corr_time(params, "C", tau)
    )
    return complex(val) if np.ndim(val) == 0 else val


def _kernels(params: SystemParams, omega):
    x = np.asarray(omega, dtype=float) - params.k0
    r0 = r0_poly(params)(x)
    if np.any(np.abs(r0) == 0):
        raise InvalidParameterError("frequency coincides with a root of R0")
    return 1j * m0_poly(params)(x) / r0, 1j * c0_poly(params)(x) / r0


def _parts(params: SystemParams, omega, R, Cc_minus_R):
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    km, kc = _kernels(params, omega)
    m_part = lam2**2 * R / (2 * math.pi * (g + lam2)) * km.real
    c_part = -np.real(lam2 * g * Cc_minus_R * kc / (2 * math.pi * (g + lam2)))
    return m_part, c_part


def mollow_transient(params: SystemParams, omega, T: float, detail: bool = False):
    """Inelastic spectrum ``p_inel(omega, T)`` at waiting time ``T`` (``inf`` allowed)."""
    T = float(T)
    if math.isnan(T) or T < 0:
        raise InvalidParameterError("T must be non-negative (or inf)")
    if math.isinf(T):
        R = stationary_value(params)
        X = 0.0
    else:
        R = corr_time(params, "R", T).real
        X = np.conj(corr_time(params, "C", T)) - R
    m_part, c_part = _parts(params, omega, R, X)
    total = m_part + c_part
    if detail:
        return SpectrumResult(np.asarray(omega, dtype=float), total, m_part, c_part, T)
    return total


def mollow_stationary(params: SystemParams, omega):
    """Stationary Mollow spectrum ``|l|^4 g/(2 pi (g + |l|^2)^2) Re{i M0/R0}``."""
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    km, _ = _kernels(params, omega)
    return lam2**2 * g / (2 * math.pi * (g + lam2) ** 2) * km.real


def mollow_strong_drive(params: SystemParams, omega):
    """Three-Lorentzian form of the stationary spectrum for ``rabi >> gamma, |delta|``."""
    g = params.gamma
    x = np.asarray(omega, dtype=float) - params.k0
    side = sum(1.5 * g / ((x - s * params.rabi) ** 2 + 2.25 * g * g) for s in (1, -1))
    return g / (4 * math.pi) * (g / (x * x + g * g) + 0.5 * side)


def inelastic_weight(params: SystemParams) -> float:
    """Frequency integral of the stationary spectrum."""
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    return lam2**2 * g / (2 * (g + lam2) ** 2)


def mollow_averaged(params: SystemParams, omega, T0: float):
    """Spectrum averaged over waiting times ``0 <= T <= T0``.

    The spectrum is linear in ``R(T)`` and ``C(T)``, so only those two are
    integrated (adaptively) over ``T``.
    """
    if not (T0 > 0) or math.isinf(T0):
        raise InvalidParameterError("T0 must be positive and finite")
    opts = dict(epsabs=1e-12, epsrel=1e-10, limit=500)
    Rbar = integrate.quad(lambda t: corr_time(params, "R", t).real, 0, T0, **opts)[0] / T0
    cre = integrate.quad(lambda t: corr_time(params, "C", t).real, 0, T0, **opts)[0] / T0
    cim = integrate.quad(lambda t: corr_time(params, "C", t).imag, 0, T0, **opts)[0] / T0
    m_part, c_part = _parts(params, omega, Rbar, complex(cre, -cim) - Rbar)
    return m_part + c_part


def default_omega_grid(params: SystemParams, points: int = 2001) -> np.ndarray:
    half = 2 * params.rabi + 6 * params.gamma
    return params.k0 + np.linspace(-half, half, points)


def find_peaks(x: np.ndarray, y: np.ndarray) -> list[int]:
    """Indices of interior strict local maxima."""
    return [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]


def half_width(x: np.ndarray, y: np.ndarray, i: int, background=None) -> float:
    """Half width at half maximum of the peak at index ``i`` (linear interpolation).

    If ``background`` is given it is subtracted before the measurement.
    """
    yy = y - (background if background is not None else 0.0)
    half = yy[i] / 2
    j = i
    while j < len(yy) - 1 and yy[j] > half:
        j += 1
    right = x[j - 1] + (half - yy[j - 1]) * (x[j] - x[j - 1]) / (yy[j] - yy[j - 1])
    j = i
    while j > 0 and yy[j] > half:
        j -= 1
    left = x[j] + (half - yy[j]) * (x[j + 1] - x[j]) / (yy[j + 1] - yy[j])
    return 0.5 * (right - left)
