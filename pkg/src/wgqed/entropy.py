"""Reduced density matrix of a spatial interval and its entanglement entropy.

The interval state lives in the span of four non-orthogonal states
(a, b, c, abar).  With weight matrix ``rho`` and Gram matrix ``G`` the
reduced density operator has the spectrum of ``rho @ G``; it is computed from
the similar Hermitian matrix ``G^{1/2} rho G^{1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlators import KINDS, corr_time, gram_from_values
from .errors import ConsistencyError, InvalidParameterError
from .params import SystemParams, derive

LN4 = math.log(4.0)
LN2 = math.log(2.0)
REGIMES = ("bulk_small", "bulk_large", "boundary_small", "boundary_large")


@dataclass(frozen=True)
class EntropyResult:
    tau: float
    T: float
    rho: np.ndarray
    gram: np.ndarray
    eigenvalues: np.ndarray
    entropy: float


def _corr_at(params: SystemParams, T: float):
    if math.isinf(T):
        s = params.gamma / (params.gamma + derive(params).lambda_abs2)
        return s, complex(s)
    return corr_time(params, "R", T).real, corr_time(params, "C", T)


def rho_matrix(params: SystemParams, T: float) -> np.ndarray:
    """Weights ``rho[beta, beta']`` of ``|psi^beta><psi^beta'|`` for waiting time ``T``."""
    T = float(T)
    if math.isnan(T) or T < 0:
        raise InvalidParameterError("T must be non-negative (or inf)")
    w = derive(params).w
    R, C = _corr_at(params, T)
    A = 1 + (1 - w) * R - 2 * C.real
    X = C - R
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = A
    rho[1, 1] = w * A
    rho[2, 2] = R
    rho[3, 3] = w * R
    rho[0, 2] = X
    rho[2, 0] = np.conj(X)
    rho[1, 3] = w * X
    rho[3, 1] = w * np.conj(X)
    return rho


def _psd_sqrt(G: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    H = 0.5 * (G + G.conj().T)
    e, V = np.linalg.eigh(H)
    e = np.where(e > cutoff * max(1.0, e[-1]), e, 0.0)
    return (V * np.sqrt(e)) @ V.conj().T


def von_neumann(eigenvalues, clamp: float = 1e-9) -> float:
    """``-sum l ln l`` with ``0 ln 0 = 0``; round-off dust below ``1e-14`` and in ``[-clamp, 0)`` counts as zero."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < -clamp):
        raise ConsistencyError(f"negative eigenvalue {lam.min():.3g} in a density matrix")
    lam = lam[lam > 1e-14]
    return float(-np.sum(lam * np.log(lam)))


def spectrum(rho: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``rho @ G`` (descending) via the Hermitian similar form."""
    S = _psd_sqrt(G)
    H = S @ rho @ S
    lam = np.linalg.eigvalsh(0.5 * (H + H.conj().T))[::-1]
    return lam


def entanglement_entropy(params: SystemParams, tau: float, T: float = math.inf) -> EntropyResult:
    """Entanglement entropy of an interval of length ``tau`` after waiting time ``T``."""
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0:
        raise InvalidParameterError("tau must be finite and non-negative")
    rho = rho_matrix(params, T)
    R, C, M, N = (corr_time(params, k, tau) for k in KINDS)
    G = gram_from_values(R.real, C, M, N, derive(params).w)
    lam = spectrum(rho, G)
    if lam[-1] < -1e-6 or lam[0] > 1 + 1e-6:
        raise ConsistencyError(f"eigenvalues {lam} outside [0, 1]")
    return EntropyResult(tau=tau, T=float(T), rho=rho, gram=G, eigenvalues=lam, entropy=von_neumann(lam))


def entropy_curve(params: SystemParams, taus, T: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
    """Entropies and eigenvalue rows over a grid of interval lengths."""
    res = [entanglement_entropy(params, t, T) for t in np.asarray(taus, dtype=float)]
    return np.array([r.entropy for r in res]), np.array([r.eigenvalues for r in res])


# ---------------------------------------------------------------------------
# closed-form asymptotics


def sigma(params: SystemParams) -> float:
    """Plateau parameter ``sqrt(g (g + 2|l|^2))/(g + |l|^2)``."""
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    return math.sqrt(g * (g + 2 * lam2)) / (g + lam2)


def _binary(x: float) -> float:
    return -x * math.log(x) if x > 0 else 0.0


def bulk_plateau(params: SystemParams) -> float:
    s = sigma(params)
    return 2 * (_binary((1 + s) / 2) + _binary((1 - s) / 2))


def boundary_plateau(params: SystemParams) -> float:
    s = sigma(params)
    return _binary((1 + s) / 2) + _binary((1 - s) / 2)


def bulk_eigenvalue4(params: SystemParams, tau):
    """Closed form of the eigenvalue of ``rho(inf) G(tau)`` that is ``O(tau^3)`` at small ``tau``."""
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    R = np.real(corr_time(params, "R", tau))
    M = corr_time(params, "M", tau)
    return -(lam2**2) * R / (4 * g * (g + lam2)) - lam2 * (M - 1) / (2 * (g + lam2))


def boundary_eigenvalues(params: SystemParams, tau):
    """The two non-zero eigenvalues of ``rho(0) G(tau)``.

    They follow from the 2x2 (a, b) block; note the ``+`` in front of
    ``|C|^2`` in the discriminant, which is what the plateau value requires.
    """
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    R = np.real(corr_time(params, "R", tau))
    C = corr_time(params, "C", tau)
    disc = (1 - lam2 / g * R) ** 2 + 2 * lam2 / g * np.abs(C) ** 2
    root = np.sqrt(disc)
    return 0.5 * (1 + root), 0.5 * (1 - root)


def entropy_asymptotics(params: SystemParams, regime: str, tau=None):
    """Leading small- and large-``tau`` forms of the entropy.

    ``bulk_small`` and ``boundary_small`` need ``tau``; the plateau regimes
    ignore it.
    """
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    if regime == "bulk_large":
        return bulk_plateau(params)
    if regime == "boundary_large":
        return boundary_plateau(params)
    if tau is None:
        raise InvalidParameterError(f"regime {regime!r} needs tau")
    t = np.asarray(tau, dtype=float)
    if regime == "bulk_small":
        x = g * t
        return -(lam2**2) / (g + lam2) ** 2 * x * np.log(x)
    if regime == "boundary_small":
        x = params.rabi * t
        return -(x**2) * np.log(x)
    raise InvalidParameterError(f"unknown regime {regime!r}; expected one of {REGIMES}")
