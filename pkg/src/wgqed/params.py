"""Physical parameters and dressed single-photon propagators.

All rates are measured in the same (arbitrary) unit as ``gamma``; the CLI
defaults to ``gamma = 1``.  The phase of the coherent amplitude is
fixed so that it is real and non-negative; every observable computed here is
insensitive to that phase.

Displacement arguments ``v_conj`` (and ``u`` on the bra side) are passed as
dimensionless multiples of the coherent amplitude: ``v_conj = 1`` means
``v* = alpha``.  With this convention ``8 Gamma alpha v*/L = rabi**2 * v_conj``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError

#: Relative pole separation below which the confluent propagator forms are used.
CONFLUENT_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Inputs of the scattering problem.

    Parameters
    ----------
    delta : float
        Detuning of the drive from the emitter transition.
    gamma : float
        Emitter relaxation rate (sets the unit scale), must be positive.
    rabi : float
        Rabi frequency of the incident pulse, ``rabi**2 = 8 gamma |alpha|^2/L``.
    k0 : float
        Carrier frequency; only enters spectra and phases.
    """

    delta: float = 0.0
    gamma: float = 1.0
    rabi: float = 0.0
    k0: float = 0.0
    pulse_density: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("delta", "gamma", "rabi", "k0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma!r}")
        if self.rabi < 0:
            raise InvalidParameterError(f"rabi must be non-negative, got {self.rabi!r}")
        # even-mode photon density |alpha|^2/L
        object.__setattr__(self, "pulse_density", self.rabi**2 / (8.0 * self.gamma))

    @classmethod
    def from_pulse(cls, delta: float, gamma: float, pulse_density: float, k0: float = 0.0) -> "SystemParams":
        """Build parameters from the even-mode density ``|alpha|^2/L``."""
        if pulse_density < 0:
            raise InvalidParameterError("pulse_density must be non-negative")
        return cls(delta=delta, gamma=gamma, rabi=math.sqrt(8.0 * gamma * pulse_density), k0=k0)

    @property
    def zeta(self) -> complex:
        """The complex frequency ``delta + i gamma``."""
        return complex(self.delta, self.gamma)

    @property
    def incident_density(self) -> float:
        """Photon density ``|alpha_0|^2/L`` of the incident (right-moving) pulse."""
        return 2.0 * self.pulse_density

    def scaled(self, factor: float) -> "SystemParams":
        """Return parameters with every frequency multiplied by ``factor``."""
        return SystemParams(self.delta * factor, self.gamma * factor, self.rabi * factor, self.k0 * factor)


@dataclass(frozen=True)
class DerivedParams:
    lambda_abs2: float
    w: float
    lam: complex


def derive(params: SystemParams) -> DerivedParams:
    """Coupling quantities ``|lambda|^2``, ``w = |lambda|^2/(2 gamma)`` and ``lambda``."""
    if params.gamma <= 0:
        raise InvalidParameterError("gamma must be positive")
    d, g, om = params.delta, params.gamma, params.rabi
    lambda_abs2 = g * om**2 / (2.0 * (d**2 + g**2))
    w = lambda_abs2 / (2.0 * g)
    # lambda = -2i gamma alpha / ((delta + i gamma) sqrt(L)), alpha real
    lam = -2j * g * math.sqrt(params.pulse_density) / params.zeta
    return DerivedParams(lambda_abs2=lambda_abs2, w=w, lam=lam)


def stationary_value(params: SystemParams) -> float:
    """Common long-time limit ``gamma/(gamma + |lambda|^2)`` of R, C, M, N."""
    return params.gamma / (params.gamma + derive(params).lambda_abs2)


class PolePair(NamedTuple):
    p_plus: complex
    p_minus: complex


def pole_pair(params: SystemParams, v_conj: complex) -> PolePair:
    """Roots of ``p**2 + (delta + i gamma) p - rabi**2 v_conj / 4``.

    The principal square root is used; the propagators are symmetric under
    exchanging the two roots, so the branch choice is immaterial.
    """
    zeta = params.zeta
    disc = np.sqrt(complex(zeta * zeta + params.rabi**2 * v_conj))
    return PolePair(complex((-zeta + disc) / 2), complex((-zeta - disc) / 2))


def coupling(params: SystemParams, v_conj: complex) -> complex:
    """The combination ``lambda v* / sqrt(L)`` driving the propagator ODEs."""
    return -0.25j * params.rabi**2 * v_conj / params.zeta


def _is_confluent(pair: PolePair, gamma: float) -> bool:
    pp, pm = pair
    return abs(pp - pm) < CONFLUENT_TOL * (abs(pp) + abs(pm) + gamma)


# A propagator is stored as terms (coef, power, rate) meaning coef * x**power * exp(-i rate x).
Terms = list


def propagator_terms(params: SystemParams, v_conj: complex) -> dict[str, Terms]:
    """Exponential-polynomial representation of ``d``, ``d~`` and ``d~~``."""
    pair = pole_pair(params, v_conj)
    pp, pm = pair
    if _is_confluent(pair, params.gamma):
        p0 = 0.5 * (pp + pm)
        return {
            "d": [(2j * p0, 1, p0)],
            "dt": [(1.0 + 0j, 0, p0), (1j * p0, 1, p0)],
            "dtt": [(1.0 + 0j, 0, p0), (0.5j * p0, 1, p0)],
        }
    diff = pp - pm
    tot = pp + pm
    return {
        "d": [(-tot / diff, 0, pp), (tot / diff, 0, pm)],
        "dt": [(-pm / diff, 0, pp), (pp / diff, 0, pm)],
        "dtt": [(-pm**2 / (diff * tot), 0, pp), (pp**2 / (diff * tot), 0, pm)],
    }


def evaluate_terms(terms: Terms, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for coef, power, rate in terms:
        out += coef * x**power * np.exp(-1j * rate * x)
    return out


def propagators(params: SystemParams, v_conj: complex, x):
    """Dressed propagators ``(d_v(x), d~_v(x), d~~_v(x))``.

    ``x`` may be a scalar or an array; the three returned values have its shape.
    """
    terms = propagator_terms(params, v_conj)
    vals = tuple(evaluate_terms(terms[k], x) for k in ("d", "dt", "dtt"))
    if np.ndim(x) == 0:
        return tuple(complex(v) for v in vals)
    return vals
