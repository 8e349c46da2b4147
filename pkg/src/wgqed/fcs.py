"""Full counting statistics of reflected, chiral and transmitted photons.

Channel index ``kappa``: 0 reflected, 1 chiral (even mode), 2 transmitted.
For ``kappa`` in {0, 2} the physical counting variable is ``z0 = exp(i chi0)``
and every ``z - 1`` of the chiral formulas is replaced by ``(z0 - 1)/2``; this
substitution happens once, in :func:`chiral_zm`, so the core never branches on
the channel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .correlators import corr_time, kernel, laplace_G, r0_poly, SIGMA, MU
from .errors import InvalidParameterError, StabilityError
from .params import SystemParams, derive, stationary_value
from .polykernel import (
    P,
    PmfResult,
    Poly,
    RationalFn,
    char_to_pmf,
    cluster_roots,
    default_samples,
    pole_sum,
    roots,
)

COMBOS = ("aa", "cc", "ca", "ac")
CHANNELS = {"reflected": 0, "chiral": 1, "transmitted": 2}


def check_kappa(kappa) -> int:
    if isinstance(kappa, str):
        if kappa not in CHANNELS:
            raise InvalidParameterError(f"unknown channel {kappa!r}; expected one of {sorted(CHANNELS)}")
        return CHANNELS[kappa]
    if kappa not in (0, 1, 2):
        raise InvalidParameterError(f"kappa must be 0, 1 or 2, got {kappa!r}")
    return int(kappa)


def chiral_zm(kappa: int, z) -> complex:
    """``z - 1`` of the chiral formulas for the channel's counting variable ``z``."""
    kappa = check_kappa(kappa)
    zm = np.asarray(z, dtype=complex) - 1.0
    return zm if kappa == 1 else zm / 2


def _check_time(name: str, value: float, allow_inf: bool = False) -> float:
    value = float(value)
    if math.isnan(value) or value < 0 or (math.isinf(value) and not allow_inf):
        raise InvalidParameterError(f"{name} must be non-negative{' (or inf)' if allow_inf else ' and finite'}, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Laplace-space forms of the Lambda combinations


def quartic(params: SystemParams, zm: complex, kappa: int) -> Poly:
    """Cleared denominator ``D(p) = p R0(p) + rabi^2 (z-1)(p + i g)(i g - kappa (p + i g))``."""
    g = params.gamma
    p1 = P + 1j * g
    return P * r0_poly(params) + params.rabi**2 * zm * p1 * (1j * g - kappa * p1)


def combo_numerator(params: SystemParams, which: str, zm: complex, kappa: int) -> Poly:
    """Numerator over :func:`quartic` of a Lambda combination, without the overall ``i``."""
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    dg = d**2 + g**2
    r0 = r0_poly(params)
    p1 = P + 1j * g
    w = derive(params).w
    if which == "aa":
        return r0 - om2 * kappa * zm / 2 * p1
    if which == "cc":
        return (
            (1 + w) * r0
            + 1j * g * om2 * zm * (1 - kappa) / 2 * (1 + (P + 2j * g) ** 2 * (1.0 / dg))
            - om2 * kappa * zm * (1 + om2 * (kappa * zm + 3) / (8 * dg)) * p1
        )
    if which in ("ca", "ac"):
        s = 1.0 if which == "ca" else -1.0
        dd = s * d
        zb = complex(dd, -g)
        return (
            r0
            + 1j * g * om2 * zm * (1 - kappa) / (2 * zb) * (P + dd + 1j * g)
            - om2 * kappa * zm / 2 * (p1 + P * (P + dd + 1j * g) * (1.0 / (2 * zb)))
        )
    raise InvalidParameterError(f"unknown combination {which!r}; expected one of {COMBOS}")


def stationary_numerator(params: SystemParams, zm: complex, kappa: int) -> Poly:
    """Numerator over :func:`quartic` of the long-waiting-time combination."""
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    dg = d**2 + g**2
    lam2 = derive(params).lambda_abs2
    r0 = r0_poly(params)
    bracket = 1j * g * (1 - kappa) / 2 * (1 + (P + 2j * g) ** 2 * (1.0 / dg)) - kappa * (
        1 + om2 * (kappa * zm + 4) / (8 * dg)
    ) * (P + 1j * g)
    return r0 + g * om2 * zm / (lam2 + g) * bracket


def combo_rational(params: SystemParams, which: str, zm: complex, kappa: int) -> RationalFn:
    return RationalFn(1j * combo_numerator(params, which, zm, kappa), quartic(params, zm, kappa))


def lambda_combo_laplace(params: SystemParams, which: str, p, zm: complex, kappa: int, route: str = "printed"):
    """A Lambda combination in Laplace space, by one of three independent routes.

    ``printed`` uses the cleared quartic form; ``definition`` the compact
    geometric-series form over generic kernels (aa, cc, ca only); ``table``
    resums the full correlator table with the maps sigma and mu.
    """
    kappa = check_kappa(kappa)
    if which not in COMBOS:
        raise InvalidParameterError(f"unknown combination {which!r}; expected one of {COMBOS}")
    if route == "printed":
        return combo_rational(params, which, zm, kappa)(p)
    zk = kappa * zm + 1
    z = zm + 1
    dp = derive(params)
    w, lam2 = dp.w, dp.lambda_abs2
    if route == "definition":
        k = {n: kernel(params, n, p, zk, zk) for n in ("r", "rt", "rtt", "c", "b")}
        den = 1 - z * lam2 * k["r"]
        if which == "aa":
            return (k["rt"] + w * k["r"]) / den
        if which == "cc":
            return k["rtt"] + w * k["rt"] * (1 + 2 * params.gamma * z * k["rt"]) / den
        if which == "ca":
            return k["b"] + w * k["c"] * (1 + 2 * params.gamma * z * k["rt"]) / den
        raise InvalidParameterError("the definition route covers aa, cc and ca only")
    if route == "table":
        pairs = {
            "aa": (("a", "a"), ("b", "b")),
            "cc": (("c", "c"), ("abar", "abar")),
            "ca": (("c", "a"), ("abar", "b")),
            "ac": (("a", "c"), ("b", "abar")),
        }[which]
        G = lambda x, y: laplace_G(params, x, y, p, zk, zk)
        gbb = G("b", "b")
        total = 0
        for weight, (x, y) in zip((1.0, w), pairs):
            lam = G(x, y) + zm * lam2 * G(SIGMA[x], SIGMA[y]) * G(MU[x], MU[y]) / (1 - zm * lam2 * gbb)
            total = total + weight * lam
        return total
    raise InvalidParameterError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# time domain


def _residue_values(nums: list[Poly], den: Poly, tau: float, log_factor: complex = 0.0) -> list[complex]:
    """Inverse transforms of ``i * num / den`` sharing one denominator, times ``exp(log_factor)``.

    The inversion contour passes above every root of ``den``.  For the
    counting-field deformed denominators some roots may lie in the upper half
    plane; their growth in ``tau`` is compensated by the decaying prefactor,
    which is therefore folded into each exponent rather than applied at the end.
    """
    rts = roots(den)
    clusters = cluster_roots(rts)
    if len(clusters) < len(rts):
        vals = [pole_sum(RationalFn(1j * n, den), rts=rts, check=False)(tau, log_factor) for n in nums]
    else:
        dprime = den.deriv()(rts)
        phase = np.exp(log_factor - 1j * rts * tau)
        # -i * Res[e^{-ip tau} i N/D] = N(p_j)/D'(p_j) e^{-i p_j tau}
        vals = [complex(np.sum(n(rts) / dprime * phase)) for n in nums]
    for v in vals:
        if not np.isfinite(v):
            worst = complex(rts[int(np.argmax(rts.imag))])
            raise StabilityError(f"overflow in the residue sum (pole at p = {worst!r})", pole=worst)
    return vals


def lambda_combo(params: SystemParams, which: str, tau: float, z: complex, kappa: int) -> complex:
    """Lambda combination ``which`` in the time domain.

    ``z`` is the chiral counting variable (already substituted for kappa 0, 2).
    """
    kappa = check_kappa(kappa)
    tau = _check_time("tau", tau)
    if which not in COMBOS:
        raise InvalidParameterError(f"unknown combination {which!r}; expected one of {COMBOS}")
    zm = complex(z) - 1
    return _residue_values([combo_numerator(params, which, zm, kappa)], quartic(params, zm, kappa), tau)[0]


def _log_prefactor(params: SystemParams, zm, kappa: int, tau: float):
    return zm * kappa**2 * params.pulse_density * tau


def fcs_generating_z(params: SystemParams, kappa, z, tau: float, T: float = math.inf) -> complex:
    """Generating function at counting variable ``z`` (``z0`` for kappa 0, 2).

    ``z`` may lie off the unit circle, which is how factorial moments are
    extracted by contour integration.
    """
    kappa = check_kappa(kappa)
    tau = _check_time("tau", tau)
    T = _check_time("T", T, allow_inf=True)
    zm = complex(chiral_zm(kappa, z))
    den = quartic(params, zm, kappa)
    lf = _log_prefactor(params, zm, kappa, tau)
    if math.isinf(T):
        (val,) = _residue_values([stationary_numerator(params, zm, kappa)], den, tau, lf)
    elif T == 0:
        (val,) = _residue_values([combo_numerator(params, "aa", zm, kappa)], den, tau, lf)
    else:
        w = derive(params).w
        R = corr_time(params, "R", T).real
        C = corr_time(params, "C", T)
        A = 1 + (1 - w) * R - 2 * C.real
        nums = [combo_numerator(params, k, zm, kappa) for k in COMBOS]
        laa, lcc, lca, lac = _residue_values(nums, den, tau, lf)
        val = A * laa + R * lcc + (C - R) * lac + (np.conj(C) - R) * lca
    return complex(val)


def fcs_generating(params: SystemParams, kappa, chi, tau: float, T: float = math.inf):
    """Generating function ``F(chi) = sum_n exp(i chi n) p(n)``.

    ``chi`` is the channel's own counting field (``chi0`` for reflected and
    transmitted photons) and may be an array.
    """
    chi_arr = np.asarray(chi, dtype=float)
    vals = np.array([fcs_generating_z(params, kappa, np.exp(1j * c), tau, T) for c in chi_arr.ravel()])
    vals = vals.reshape(chi_arr.shape)
    return complex(vals) if vals.ndim == 0 else vals


def fcs_lenstra(params: SystemParams, z0: complex, tau: float) -> complex:
    """Reflected-photon generating function for ``T = 0`` in the compact form.

    Inverts ``i/(p + i g rabi^2 (z0 - 1)(p + i g)/(2 R0(p)))`` directly.
    """
    g = params.gamma
    r0 = r0_poly(params)
    den = P * r0 + 0.5j * g * params.rabi**2 * (z0 - 1) * (P + 1j * g)
    return _residue_values([r0], den, _check_time("tau", tau))[0]


# ---------------------------------------------------------------------------
# long-time closed forms


def _scale(params: SystemParams) -> float:
    return params.rabi**2 + 2 * params.delta**2 + 2 * params.gamma**2


def chiral_mean_rate(params: SystemParams, kappa: int) -> float:
    """``<N>/tau`` of the chiral formula before the channel substitution."""
    kappa = check_kappa(kappa)
    g = params.gamma
    return kappa**2 * params.pulse_density + params.rabi**2 * g * (1 - kappa) / _scale(params)


def mean_counts(params: SystemParams, kappa, tau: float) -> float:
    """Long-window mean photon number in channel ``kappa``."""
    kappa = check_kappa(kappa)
    tau = _check_time("tau", tau)
    if kappa == 1:
        return tau * params.pulse_density
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    den = om2 / 2 + d**2 + g**2
    if kappa == 0:
        return tau * params.incident_density * g**2 / den
    return tau * params.incident_density * (om2 / 2 + d**2) / den


def z_factor(params: SystemParams, kappa) -> float:
    """Slope at ``p = 0`` of the counting-field term of the denominator."""
    kappa = check_kappa(kappa)
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    return om2 * (kappa * (om2 + 3 * d**2 - g**2) + 3 * g**2 - d**2) / _scale(params) ** 2


def mandel_q(params: SystemParams, kappa) -> float:
    """Long-window Mandel Q factor of channel ``kappa``."""
    kappa = check_kappa(kappa)
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    s = _scale(params)
    if kappa == 1:
        return 0.0
    if kappa == 0:
        return -om2 * (3 * g**2 - d**2) / s**2
    if om2 == 0:
        return 0.0
    return om2 * g**2 / (om2 / 2 + d**2) * (2 * om2 + 5 * d**2 + g**2) / s**2


def mandel_q_chiral(params: SystemParams, kappa) -> float:
    """Q factor of the chiral formula in the variable ``z`` (before halving)."""
    kappa = check_kappa(kappa)
    g = params.gamma
    den = kappa**2 / 8 * _scale(params) + g**2 * (1 - kappa)
    if den == 0:
        return 0.0
    return -2 * z_factor(params, kappa) * (1 - kappa) * g**2 / den


def fcs_asymptotic(params: SystemParams, kappa, chi, tau: float):
    """Gaussian-corrected Poisson generating function valid at long ``tau``."""
    kappa = check_kappa(kappa)
    zm = chiral_zm(kappa, np.exp(1j * np.asarray(chi, dtype=float)))
    x = params.rabi**2 * params.gamma * (1 - kappa) / _scale(params)
    n = tau * chiral_mean_rate(params, kappa)
    return np.exp(zm * n) * np.exp(-tau * zm**2 * z_factor(params, kappa) * x)


# ---------------------------------------------------------------------------
# moments and distributions


def q_numeric(params: SystemParams, kappa, tau: float, T: float = math.inf, h: float = 1e-4):
    """Mean, variance and ``Q = var/mean - 1`` from derivatives of ``log F`` at zero.

    Central differences with one Richardson extrapolation step.
    """
    kappa = check_kappa(kappa)

    def logf(c):
        return np.log(fcs_generating_z(params, kappa, np.exp(1j * c), tau, T))

    f0 = logf(0.0)
    fp = {k: logf(k * h) for k in (1, 2)}
    fm = {k: logf(-k * h) for k in (1, 2)}
    d1 = {k: (fp[k] - fm[k]) / (2 * k * h) for k in (1, 2)}
    d2 = {k: (fp[k] - 2 * f0 + fm[k]) / (k * h) ** 2 for k in (1, 2)}
    first = (4 * d1[1] - d1[2]) / 3
    second = (4 * d2[1] - d2[2]) / 3
    mean = float((-1j * first).real)
    var = float((-second).real)
    q = var / mean - 1 if mean > 0 else float("nan")
    return mean, var, q


def factorial_moments(
    params: SystemParams, kappa, tau: float, T: float = math.inf, order: int = 2, radius: float = 0.25, n: int = 32
) -> np.ndarray:
    """Factorial moments ``<N^(m)>``, ``m = 1..order``, by a Cauchy integral in ``z``."""
    kappa = check_kappa(kappa)
    theta = 2 * np.pi * np.arange(n) / n
    vals = np.array([fcs_generating_z(params, kappa, 1 + radius * np.exp(1j * t), tau, T) for t in theta])
    coeffs = np.fft.fft(vals) / n / radius ** np.arange(n)
    return np.array([math.factorial(m) * coeffs[m].real for m in range(1, order + 1)])


@dataclass
class FcsResult:
    """Photon-counting statistics of one channel and window."""

    kappa: int
    tau: float
    T: float
    chi: np.ndarray
    F: np.ndarray
    p: np.ndarray
    mean: float
    variance: float
    q: float
    asymptotic_mean: float
    asymptotic_q: float
    z_factor: float
    quality: dict = field(default_factory=dict)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.p.size)


def pmf(params: SystemParams, kappa, tau: float, T: float = math.inf, n_max: int | None = None,
        n_samples: int | None = None) -> FcsResult:
    """Photon-number distribution from the exact generating function."""
    kappa = check_kappa(kappa)
    tau = _check_time("tau", tau)
    T = _check_time("T", T, allow_inf=True)
    mean_est = mean_counts(params, kappa, tau)
    q_est = mandel_q(params, kappa)
    if n_samples is None:
        n_samples = default_samples(mean_est, q_est)
    if n_max is None:
        n_max = n_samples // 4
    F = lambda chi: fcs_generating(params, kappa, chi, tau, T)
    res: PmfResult = char_to_pmf(F, n_max, n_samples)
    p = res.p
    n = np.arange(p.size)
    m = float(np.sum(n * p))
    var = float(np.sum((n - m) ** 2 * p))
    chi = 2 * np.pi * np.arange(res.n_samples) / res.n_samples
    F_vals = np.fft.ifft(res.raw) * res.n_samples
    return FcsResult(
        kappa=kappa,
        tau=tau,
        T=T,
        chi=chi,
        F=F_vals,
        p=p,
        mean=m,
        variance=var,
        q=var / m - 1 if m > 0 else float("nan"),
        asymptotic_mean=mean_est,
        asymptotic_q=q_est,
        z_factor=z_factor(params, kappa),
        quality={"max_imag": res.max_imag, "deficit": res.deficit, "n_samples": res.n_samples,
                 "min_p": float(np.min(p))},
    )
