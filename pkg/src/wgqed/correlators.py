"""Laplace-space correlators and the time-domain functions R, C, M, N.

Every correlator of the four interval states (a, b, c, abar) reduces to half-line
integrals of products of the dressed propagators.  Those integrals are built
here term by term from the exponential representation of the propagators and
cross-checked against compact closed forms, an ODE integration, and (for
``delta = 0``) elementary analytic solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConsistencyError, InvalidParameterError, StabilityError
from .params import SystemParams, derive, propagator_terms, stationary_value
from .polykernel import P, Poly, PoleSum, RationalFn, pole_sum, roots

LABELS = ("a", "b", "c", "abar")
SIGMA = {"a": "b", "b": "b", "c": "abar", "abar": "abar"}
MU = {"a": "a", "c": "a", "b": "b", "abar": "b"}

# kernel name -> (propagator on the bra side, propagator on the ket side)
KERNELS = {
    "r": ("d", "d"),
    "rt": ("dt", "dt"),
    "rtt": ("dtt", "dtt"),
    "c": ("dt", "d"),
    "cbar": ("d", "dt"),
    "b": ("dtt", "dt"),
    "bbar": ("dt", "dtt"),
    "f": ("dtt", "d"),
    "fbar": ("d", "dtt"),
}

KINDS = ("R", "C", "M", "N")


def _validate_label(label: str) -> str:
    if label not in LABELS:
        raise InvalidParameterError(f"unknown block label {label!r}; expected one of {LABELS}")
    return label


def kernel_terms(params: SystemParams, name: str, u: complex = 1.0, v_conj: complex = 1.0):
    """Simple-fraction data ``(coef, order, pole)`` of a kernel.

    The kernel equals ``sum coef * (i/(p - pole))**(order + 1)``.
    """
    try:
        left, right = KERNELS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}") from None
    # the bra side carries d_u^*(x); its exponent conj(-i w) = +i conj(w)
    bra = propagator_terms(params, np.conj(u))[left]
    ket = propagator_terms(params, v_conj)[right]
    out = []
    for ca, ka, wa in bra:
        for cb, kb, wb in ket:
            k = ka + kb
            out.append((np.conj(ca) * cb * math.factorial(k), k, wb - np.conj(wa)))
    return out


def kernel(params: SystemParams, name: str, p, u: complex = 1.0, v_conj: complex = 1.0):
    """Half-line Laplace integral of a propagator product.

    ``kernel(params, "c", p, u, v)`` is ``int_0^inf conj(d~_u(x)) d_v(x) exp(i p x) dx``
    continued analytically in ``p``.  ``u`` and ``v_conj`` are displacement
    arguments in units of the coherent amplitude.
    """
    p = np.asarray(p, dtype=complex)
    out = np.zeros(p.shape, dtype=complex)
    for coef, k, pole in kernel_terms(params, name, u, v_conj):
        out += coef * (1j / (p - pole)) ** (k + 1)
    return complex(out) if out.ndim == 0 else out


def laplace_G(params: SystemParams, beta_prime: str, beta: str, p, u: complex = 1.0, v_conj: complex = 1.0):
    """Resummed Laplace transform of the correlator between two interval states."""
    _validate_label(beta_prime)
    _validate_label(beta)
    lam2 = derive(params).lambda_abs2
    k = {name: kernel(params, name, p, u, v_conj) for name in KERNELS}
    den = 1.0 - lam2 * k["r"]
    if np.any(np.abs(den) < 1e-300):
        raise StabilityError("evaluation point coincides with a pole of the correlator", pole=complex(np.ravel(p)[0]))
    key = (beta_prime, beta)
    if key in (("a", "a"), ("abar", "abar")):
        return k["rt"] / den
    if key == ("b", "b"):
        return k["r"] / den
    if key == ("c", "c"):
        return k["rtt"] + lam2 * k["rt"] ** 2 / den
    if key in (("a", "b"), ("abar", "b")):
        return k["c"] / den
    if key in (("b", "a"), ("b", "abar")):
        return k["cbar"] / den
    if key in (("c", "a"), ("c", "abar")):
        return k["b"] + lam2 * k["c"] * k["rt"] / den
    if key in (("a", "c"), ("abar", "c")):
        return k["bbar"] + lam2 * k["cbar"] * k["rt"] / den
    if key == ("a", "abar"):
        return k["rt"] + lam2 * k["c"] * k["cbar"] / den
    if key == ("c", "b"):
        return k["f"] + lam2 * k["c"] ** 2 / den
    if key == ("b", "c"):
        return k["fbar"] + lam2 * k["cbar"] ** 2 / den
    raise InvalidParameterError(f"no Laplace-table entry for ({beta_prime}, {beta})")


# ---------------------------------------------------------------------------
# compact closed forms


def r0_poly(params: SystemParams) -> Poly:
    """The cubic ``R0(p)`` whose roots set every relaxation rate."""
    d, g, om = params.delta, params.gamma, params.rabi
    return Poly([-1j * g * (om**2 + 2 * d**2 + 2 * g**2), -(om**2 + d**2 + 5 * g**2), 4j * g, 1.0])


def m0_poly(params: SystemParams) -> Poly:
    g = params.gamma
    return (P + 2j * g) ** 2 - params.rabi**2 / 2


def c0_poly(params: SystemParams) -> Poly:
    g = params.gamma
    lam2 = derive(params).lambda_abs2
    return m0_poly(params) - (g + lam2) / g * params.zeta * (P + 2j * g)


def q0_poly(params: SystemParams, zk: complex) -> Poly:
    """Denominator ``Q0(p, z_k)`` shared by the closed-form kernels."""
    g, om2 = params.gamma, params.rabi**2
    p1 = P + 1j * g
    return P * r0_poly(params) - 1j * g * om2 * p1 - (zk - 1) * om2 * p1 * p1


def closed_form_numerators(params: SystemParams, zk: complex) -> dict[str, Poly]:
    """Numerators over ``Q0(p, z_k)`` of r, r~, r~~, c and b at ``u = v* = z_k``."""
    d, g, om2 = params.delta, params.gamma, params.rabi**2
    dg = d**2 + g**2
    r0 = r0_poly(params)
    p1 = P + 1j * g
    num_r = -2j * dg * p1
    num_rt = 1j * (r0 - om2 / 2 * (zk - 2) * p1)
    num_rtt = 1j * (
        r0
        - 1j * zk * g * om2 * (P * P + dg) * (1.0 / (2 * dg))
        + om2 * p1 * (1 - zk * (d**2 - g**2) / dg - zk**2 * om2 / (8 * dg))
    )
    num_c = 1j * params.zeta * (P + 2j * g) * (P - d + 1j * g)
    num_b = num_rt - 1j * om2 * zk / (4 * (d - 1j * g)) * (P + 2j * g) * (P + d + 1j * g)
    return {"r": num_r, "rt": num_rt, "rtt": num_rtt, "c": num_c, "b": num_b}


def closed_form_kernel(params: SystemParams, name: str, p, zk: complex = 1.0):
    """Closed-form kernel ``name`` at ``u = v* = z_k`` (names r, rt, rtt, c, b)."""
    nums = closed_form_numerators(params, zk)
    if name not in nums:
        raise InvalidParameterError(f"no closed form for kernel {name!r}")
    return nums[name](p) / q0_poly(params, zk)(p)


def fit_numerator(fn, den: Poly, max_degree: int, radius: float, check_tol: float = 1e-9) -> Poly:
    """Recover the polynomial ``fn(p) * den(p)`` from samples on a circle.

    Raises :class:`ConsistencyError` if the product is not a polynomial of
    degree ``<= max_degree`` to within ``check_tol`` (relative).
    """
    n = 4 * (max_degree + 1)
    theta = 2 * np.pi * np.arange(n) / n
    pts = radius * np.exp(1j * theta)
    vals = fn(pts) * den(pts)
    coeffs = np.fft.fft(vals)[: max_degree + 1] / n / radius ** np.arange(max_degree + 1)
    num = Poly(coeffs)
    probe = 0.37 * radius * np.exp(1j * np.array([0.3, 1.9, 4.1])) + 0.1j
    err = np.max(np.abs(num(probe) / den(probe) - fn(probe)))
    scale = np.max(np.abs(fn(probe))) + 1e-300
    if err > check_tol * scale:
        raise ConsistencyError(f"rational fit failed: relative residual {err / scale:.3g}")
    return num


def laplace_rational(params: SystemParams, kind: str) -> RationalFn:
    """Laplace transform of R, C, M or N at ``u = v = alpha`` as a rational function."""
    g = params.gamma
    s_inf = stationary_value(params)
    lam2 = derive(params).lambda_abs2
    r0 = r0_poly(params)
    den = P * r0
    if kind == "R":
        return RationalFn(-2j * (params.delta**2 + g**2) * (P + 1j * g), den)
    if kind == "C":
        return RationalFn(1j * params.zeta * (P + 2j * g) * (P - params.delta + 1j * g), den)
    if kind == "M":
        return RationalFn(1j * s_inf * (r0 + (lam2 / g) * P * m0_poly(params)), den)
    if kind == "N":
        den_n = den * (P + params.zeta)
        rts = roots(den_n)
        radius = 2.0 * float(np.max(np.abs(rts))) + g
        num = fit_numerator(lambda p: laplace_G(params, "c", "b", p), den_n, 4, radius)
        return RationalFn(num, den_n)
    raise InvalidParameterError(f"unknown correlator {kind!r}; expected one of {KINDS}")


# ---------------------------------------------------------------------------
# time domain


@dataclass(frozen=True)
class CorrFunctions:
    """Residue representations of R, C, M and N at ``u = v = alpha``."""

    R: PoleSum
    C: PoleSum
    M: PoleSum
    N: PoleSum
    s_inf: float

    def __getitem__(self, kind: str) -> PoleSum:
        if kind not in KINDS:
            raise InvalidParameterError(f"unknown correlator {kind!r}")
        return getattr(self, kind)

    def values(self, tau):
        """``(R, C, M, N)`` at ``tau`` (scalar or array)."""
        return tuple(self[k](tau) for k in KINDS)



@lru_cache(maxsize=256)
def correlation_functions(params: SystemParams) -> CorrFunctions:
    fns = {}
    for kind in KINDS:
        fns[kind] = pole_sum(laplace_rational(params, kind), scale=params.gamma)
    return CorrFunctions(s_inf=stationary_value(params), **fns)


def _check_tau(tau):
    t = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(t) & ~np.isposinf(t)) or np.any(t < 0):
        raise InvalidParameterError("tau must be non-negative")
    return t


def corr_time(params: SystemParams, kind: str, tau):
    """R, C, M or N at ``tau >= 0`` from residues; ``tau = inf`` gives the stationary value."""
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown correlator {kind!r}; expected one of {KINDS}")
    t = _check_tau(tau)
    fn = correlation_functions(params)
    if np.all(np.isfinite(t)):
        return fn[kind](tau)
    finite = np.where(np.isfinite(t), t, 0.0)
    out = np.where(np.isfinite(t), fn[kind](finite), fn.s_inf + 0j)
    return complex(out) if out.ndim == 0 else out


def _ode_rhs(params: SystemParams):
    d, g, om = params.delta, params.gamma, params.rabi
    a2 = 4 * g
    a1 = om**2 + d**2 + 5 * g**2
    a0 = g * (om**2 + 2 * d**2 + 2 * g**2)
    src = 2 * g * (d**2 + g**2)
    zeta = params.zeta
    zbar = complex(d, -g)
    two_w = 2 * derive(params).w

    def rhs(t, y):
        r, r1, r2, m, m1, m2, c, n = y
        r3 = src - a2 * r2 - a1 * r1 - a0 * r
        m3 = src - a2 * m2 - a1 * m1 - a0 * m
        dc = 1j * zeta * c - 1j * zeta * (1 - two_w * r)
        dn = 1j * zeta * n - zeta / zbar * (m1 + 1j * zbar * m)
        return [r1, r2, r3, m1, m2, m3, dc, dn]

    y0 = np.array([0, 0, 2 * (d**2 + g**2), 1, 0, -(om**2) / 2, 0, 0], dtype=complex)
    return rhs, y0


def corr_time_ode_all(params: SystemParams, tau, rtol: float = 1e-12, atol: float = 1e-14) -> dict:
    """Integrate the coupled correlator ODEs and return R, C, M, N on ``tau``."""
    t = np.atleast_1d(_check_tau(tau))
    if not np.all(np.isfinite(t)):
        raise InvalidParameterError("the ODE route needs finite tau")
    rhs, y0 = _ode_rhs(params)
    tmax = float(np.max(t)) if t.size else 0.0
    out = {k: np.empty(t.shape, dtype=complex) for k in KINDS}
    if tmax == 0.0:
        for k, v in zip(KINDS, (0, 0, 1, 0)):
            out[k][:] = v
        return out
    order = np.argsort(t)
    sol = solve_ivp(rhs, (0.0, tmax), y0, method="DOP853", t_eval=t[order], rtol=rtol, atol=atol)
    if not sol.success:
        raise StabilityError(f"correlator ODE integration failed: {sol.message}")
    idx = {"R": 0, "M": 3, "C": 6, "N": 7}
    for k in KINDS:
        out[k][order] = sol.y[idx[k]]
    return out


def corr_time_ode(params: SystemParams, kind: str, tau):
    """ODE-integration oracle for :func:`corr_time`."""
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown correlator {kind!r}; expected one of {KINDS}")
    vals = corr_time_ode_all(params, tau)[kind]
    return complex(vals[0]) if np.ndim(tau) == 0 else vals


def corr_time_analytic(params: SystemParams, kind: str, tau):
    """Elementary closed forms of R, C, M, N, valid only at zero detuning."""
    if params.delta != 0:
        raise InvalidParameterError("the analytic correlators require delta = 0")
    t = np.asarray(_check_tau(tau), dtype=float)
    g, om2 = params.gamma, params.rabi**2
    ob = np.sqrt(complex(om2 - g * g / 4))
    s0 = 2 * g * g / (om2 + 2 * g * g)
    e3 = np.exp(-1.5 * g * t)
    cs = np.cos(ob * t)
    x = ob * t
    small = np.abs(x) < 1e-3
    # sin(ob t)/ob, regular at ob = 0 (rabi = gamma/2)
    sn = np.where(small, t * (1 - x * x / 6 + x**4 / 120), np.sin(x) / np.where(small, 1.0, ob))
    if kind == "R":
        out = s0 - 2 * g * g * (cs + 1.5 * g * sn) / (om2 + 2 * g * g) * e3
    elif kind == "C":
        out = s0 + g * ((om2 - g * g) * sn - 2 * g * cs) / (om2 + 2 * g * g) * e3
    elif kind in ("M", "N"):
        out = (
            s0
            + 0.5 * np.exp(-g * t)
            + (om2 - 2 * g * g) / (2 * (om2 + 2 * g * g)) * e3 * cs
            + g / 4 * (5 * om2 - 2 * g * g) / (om2 + 2 * g * g) * e3 * sn
        )
        if kind == "N":
            out = out - np.exp(-g * t)
    else:
        raise InvalidParameterError(f"unknown correlator {kind!r}; expected one of {KINDS}")
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out


def gram_from_values(R: complex, C: complex, M: complex, N: complex, w: float) -> np.ndarray:
    """Overlap matrix of the interval states in the basis (a, b, c, abar)."""
    Cc, Mc, Nc = np.conj(C), np.conj(M), np.conj(N)
    return np.array(
        [
            [1 - w * R, C, 1 - w * Cc, M],
            [Cc, R, Nc, Cc],
            [1 - w * C, N, 1 + w * w * R, 1 - w * C],
            [Mc, C, 1 - w * Cc, 1 - w * R],
        ],
        dtype=complex,
    )


def gram(params: SystemParams, tau: float, check: bool = True) -> np.ndarray:
    """Gram matrix of the four interval states for an interval of length ``tau``."""
    R, C, M, N = (corr_time(params, k, tau) for k in KINDS)
    G = gram_from_values(R.real, C, M, N, derive(params).w)
    if check:
        herm = np.max(np.abs(G - G.conj().T))
        if herm > 1e-10:
            raise ConsistencyError(f"Gram matrix not Hermitian (deviation {herm:.3g})")
        ev = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
        if ev[0] < -1e-10 * max(1.0, ev[-1]):
            raise ConsistencyError(f"Gram matrix not positive semidefinite (eigenvalue {ev[0]:.3g})")
    return G


def normalization_residuals(params: SystemParams, tau) -> tuple:
    """Deviations of the three normalization identities, computed from Laplace-table residues.

    ``tau`` may be a scalar or an array; the result has matching shape.

    Uses the generic kernels (not the compact forms) so the identities test the
    resummed table itself.
    """
    w = derive(params).w
    out = []
    for (x, y), (xx, yy), target in (
        (("a", "a"), ("b", "b"), 1.0),
        (("c", "c"), ("abar", "abar"), 1.0 + w),
        (("c", "a"), ("abar", "b"), 1.0),
    ):
        fn = lambda p, x=x, y=y, xx=xx, yy=yy: laplace_G(params, x, y, p) + w * laplace_G(params, xx, yy, p)
        out.append(fn)
    den = P * r0_poly(params)
    radius = 2.0 * float(np.max(np.abs(roots(den)))) + params.gamma
    res = []
    for fn, target in zip(out, (1.0, 1.0 + w, 1.0)):
        num = fit_numerator(fn, den, 3, radius)
        val = pole_sum(RationalFn(num, den), scale=params.gamma)(tau)
        res.append(np.abs(val - target) if np.ndim(tau) else float(abs(val - target)))
    return tuple(res)
