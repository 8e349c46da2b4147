"""Complex polynomials, residue-based inverse Laplace transforms and pmf inversion.

The Laplace convention throughout is

    f(p) = int_0^inf dtau exp(i p tau) f(tau),
    f(tau) = int_{-inf + i0}^{inf + i0} dp/(2 pi) exp(-i p tau) f(p),

so a decaying mode ``exp(-i q tau)`` with ``Im q < 0`` appears as the simple
fraction ``i/(p - q)``.  Closing the inversion contour in the lower half plane
gives ``f(tau) = -i sum_j Res_{p_j}[exp(-i p tau) f(p)]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import InvalidParameterError, StabilityError, TruncationWarning

TRIM_TOL = 1e-14
CLUSTER_TOL = 1e-5


class Poly:
    """Polynomial with complex coefficients in ascending order of degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex]):
        c = np.atleast_1d(np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex))
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        scale = np.max(np.abs(c))
        n = c.size
        while n > 1 and abs(c[n - 1]) <= TRIM_TOL * scale:
            n -= 1
        self.coeffs = c[:n].copy()

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Poly":
        out = cls([lead])
        for r in roots:
            out = out * cls([-r, 1.0])
        return out

    @property
    def degree(self) -> int:
        if self.coeffs.size == 1 and self.coeffs[0] == 0:
            return -1
        return self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def __call__(self, p):
        return np.polynomial.polynomial.polyval(p, self.coeffs)

    def deriv(self, m: int = 1) -> "Poly":
        return Poly(np.polynomial.polynomial.polyder(self.coeffs, m))

    def shift(self, p0: complex) -> "Poly":
        """Coefficients of ``q(h) = self(p0 + h)`` (Taylor coefficients at ``p0``)."""
        c = self.coeffs.copy()
        n = c.size
        # repeated synthetic division
        out = np.empty(n, dtype=complex)
        for k in range(n):
            acc = 0j
            for j in range(n - 1, k - 1, -1):
                acc = acc * p0 + c[j]
                c[j] = acc
            out[k] = c[k]
        return Poly(out)

    def _coerce(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly([other])

    def __add__(self, other):
        return Poly(np.polynomial.polynomial.polyadd(self.coeffs, self._coerce(other).coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        return Poly(np.polynomial.polynomial.polysub(self.coeffs, self._coerce(other).coeffs))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return Poly(np.polynomial.polynomial.polymul(self.coeffs, self._coerce(other).coeffs))

    __rmul__ = __mul__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __pow__(self, n: int):
        out = Poly([1.0])
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"Poly({self.coeffs.tolist()!r})"


P = Poly([0.0, 1.0])  # the monomial p


def roots(poly: Poly, polish: bool = True) -> np.ndarray:
    """All roots of ``poly`` with multiplicity.

    Companion-matrix eigenvalues of the scaled monic polynomial, each refined
    by Newton steps that are kept only while they reduce the residual.
    """
    n = poly.degree
    if n < 1:
        raise InvalidParameterError("roots() needs a polynomial of degree >= 1")
    c = poly.coeffs / poly.lead
    # rescale p = s q so that the monic coefficients are O(1)
    mags = [abs(c[k]) ** (1.0 / (n - k)) for k in range(n) if c[k] != 0]
    s = max(mags) if mags else 1.0
    if s == 0 or not math.isfinite(s):
        s = 1.0
    # power-of-two scale applied through the exponent, so tiny or huge roots
    # neither overflow nor lose bits
    e = int(round(math.log2(s)))
    s = math.ldexp(1.0, e)
    shift = e * (np.arange(n + 1) - n)
    cq = np.ldexp(c.real, shift) + 1j * np.ldexp(c.imag, shift)
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -cq[:n]
    rts = np.linalg.eigvals(comp)
    rts = np.ldexp(rts.real, e) + 1j * np.ldexp(rts.imag, e)
    if polish:
        dpoly = poly.deriv()
        for i, r in enumerate(rts):
            f = poly(r)
            for _ in range(3):
                d = dpoly(r)
                if d == 0:
                    break
                cand = r - f / d
                fc = poly(cand)
                if abs(fc) < abs(f):
                    r, f = cand, fc
                else:
                    break
            rts[i] = r
    return rts


@dataclass(frozen=True)
class RationalFn:
    """Ratio ``num(p)/den(p)`` of two complex polynomials."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.degree < 0:
            raise InvalidParameterError("zero denominator polynomial")

    def __call__(self, p):
        return self.num(p) / self.den(p)

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def require_decay(self) -> None:
        if not self.is_strictly_proper:
            raise InvalidParameterError(
                f"inverse Laplace transform needs deg(num) < deg(den), got {self.num.degree} and {self.den.degree}"
            )


@dataclass(frozen=True)
class PoleSum:
    """Time-domain function ``sum_j P_j(tau) exp(-i p_j tau)``.

    ``weights[j]`` holds the ascending coefficients of the polynomial ``P_j``;
    it has a single entry for a simple pole.
    """

    poles: tuple
    weights: tuple

    def __call__(self, tau, log_factor: complex = 0.0):
        """Evaluate at ``tau``; ``exp(log_factor)`` multiplies every term before summation.

        Folding a decaying prefactor into the exponents avoids overflow when
        individual poles grow faster than the prefactor decays.
        """
        t = np.asarray(tau, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for pole, w in zip(self.poles, self.weights):
            out += np.polynomial.polynomial.polyval(t, w) * np.exp(log_factor - 1j * pole * t)
        if out.ndim == 0:
            return complex(out)
        return out

    def derivative(self) -> "PoleSum":
        new = []
        for pole, w in zip(self.poles, self.weights):
            w = np.asarray(w, dtype=complex)
            dw = np.polynomial.polynomial.polyder(w) if w.size > 1 else np.zeros(1, dtype=complex)
            pad = np.zeros(max(w.size, dw.size), dtype=complex)
            pad[: w.size] += -1j * pole * w
            pad[: dw.size] += dw
            new.append(tuple(pad))
        return PoleSum(self.poles, tuple(new))

    def conj(self) -> "PoleSum":
        """Complex conjugate as a function of real tau."""
        return PoleSum(
            tuple(-np.conj(p) for p in self.poles),
            tuple(tuple(np.conj(np.asarray(w))) for w in self.weights),
        )

    @property
    def decay_rate(self) -> float:
        """Slowest decay rate among the non-stationary poles."""
        rates = [-complex(p).imag for p in self.poles if abs(p) > 1e-12]
        return min(rates) if rates else math.inf


def cluster_roots(rts: np.ndarray, tol: float = CLUSTER_TOL) -> list[tuple[complex, int]]:
    """Group numerically coincident roots into (centre, multiplicity) pairs."""
    scale = max(1.0, float(np.max(np.abs(rts)))) if rts.size else 1.0
    remaining = list(rts)
    out = []
    while remaining:
        r = remaining.pop(0)
        group = [r]
        keep = []
        for q in remaining:
            if abs(q - r) < tol * scale:
                group.append(q)
            else:
                keep.append(q)
        remaining = keep
        out.append((complex(np.mean(group)), len(group)))
    return out


def _refine_multiple(poly: Poly, c: complex, m: int) -> complex:
    """Polish a root of multiplicity ``m`` as a simple root of the (m-1)th derivative."""
    if m == 1:
        return c
    q = poly.deriv(m - 1)
    dq = q.deriv()
    f = q(c)
    for _ in range(4):
        d = dq(c)
        if d == 0:
            break
        cand = c - f / d
        fc = q(cand)
        if abs(fc) < abs(f):
            c, f = cand, fc
        else:
            break
    return complex(c)


def _series_div(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """First ``m`` Taylor coefficients of a(h)/b(h)."""
    a = np.concatenate([a, np.zeros(max(0, m - a.size), dtype=complex)])[:m]
    b = np.concatenate([b, np.zeros(max(0, m - b.size), dtype=complex)])[:m]
    q = np.zeros(m, dtype=complex)
    for k in range(m):
        q[k] = (a[k] - np.dot(q[:k], b[k:0:-1])) / b[0]
    return q


def pole_sum(
    f: RationalFn,
    stability_tol: float = 1e-12,
    scale: float = 1.0,
    exempt: complex | None = None,
    rts: np.ndarray | None = None,
    check: bool = True,
) -> PoleSum:
    """Residue decomposition of ``f``, as a time-domain :class:`PoleSum`.

    Parameters
    ----------
    f : RationalFn
        Strictly proper rational function of ``p``.
    stability_tol, scale : float
        A pole with ``Im p >= stability_tol * scale`` lies above the contour and
        raises :class:`StabilityError`.
    exempt : complex, optional
        The pole closest to this point is excused from the stability check.
        This is used for counting-field dependent poles that continuously
        connect to ``p = 0`` and whose growth is compensated by an explicit
        prefactor; the contour is then taken to pass above it.
    rts : array, optional
        Precomputed roots of ``f.den``.
    check : bool
        With ``False`` the contour is taken above every pole (no stability
        check); used for transforms of functions that may grow.
    """
    f.require_decay()
    if rts is None:
        rts = roots(f.den)
    clusters = [(_refine_multiple(f.den, c, m), m) for c, m in cluster_roots(np.asarray(rts))]
    skip = None
    if exempt is not None:
        skip = int(np.argmin([abs(c - exempt) for c, _ in clusters]))
    for i, (c, _) in enumerate(clusters):
        if check and i != skip and c.imag >= stability_tol * scale:
            raise StabilityError(f"pole at p = {c!r} lies above the inversion contour", pole=c)
    poles, weights = [], []
    lead = f.den.lead
    for i, (c, m) in enumerate(clusters):
        others = [(cc, mm) for j, (cc, mm) in enumerate(clusters) if j != i]
        # Taylor coefficients of N(p)/Dtilde(p) at the cluster centre
        num_t = f.num.shift(c).coeffs
        den_t = np.array([lead], dtype=complex)
        for cc, mm in others:
            for _ in range(mm):
                den_t = np.polynomial.polynomial.polymul(den_t, [c - cc, 1.0])
        g = _series_div(num_t, den_t, m)
        # Res = sum_j (-i tau)^j/j! g_{m-1-j} exp(-i c tau); include the -i prefactor
        w = np.array([(-1j) ** j / math.factorial(j) * g[m - 1 - j] for j in range(m)], dtype=complex)
        poles.append(c)
        weights.append(tuple(-1j * w))
    return PoleSum(tuple(poles), tuple(weights))


def inv_laplace(f: RationalFn, tau, **kwargs):
    """Inverse Laplace transform of ``f`` at ``tau >= 0`` via residues."""
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("tau must be non-negative")
    return pole_sum(f, **kwargs)(tau)


def _asymptotic_coeffs(f: RationalFn, K: int) -> np.ndarray:
    """Coefficients a_1..a_K of f(p) = sum_k a_k p^{-k} as p -> inf."""
    n, d = f.num.coeffs, f.den.coeffs
    dn, dd = n.size - 1, d.size - 1
    # in t = 1/p: f = t^(dd-dn) * rev(num)(t) / rev(den)(t)
    off = dd - dn
    ser = _series_div(n[::-1], d[::-1], K + 1)
    a = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        if 0 <= k - off < ser.size:
            a[k] = ser[k - off]
    return a[1:]


def _tail_basis_coeffs(gamma: float, K: int) -> np.ndarray:
    """Row k: asymptotic coefficients of (i/(p + i gamma))^(k+1)."""
    # i/(p + i g) = i t / (1 + i g t)
    base = _series_div(np.array([0, 1j]), np.array([1, 1j * gamma]), K + 1)
    rows = []
    cur = np.array([1.0 + 0j])
    for _ in range(K):
        cur = np.polynomial.polynomial.polymul(cur, base)[: K + 1]
        full = np.zeros(K + 1, dtype=complex)
        full[: cur.size] = cur
        rows.append(full[1:])
    return np.array(rows)


def inv_laplace_quad(
    f: Callable[[complex], complex] | RationalFn,
    tau: float,
    eps: float = 0.01,
    tail_terms: int = 3,
    breakpoints: Sequence[float] = (),
    epsabs: float = 1e-11,
) -> complex:
    """Inverse Laplace transform by quadrature along ``Im p = eps``.

    The large-|p| behaviour is removed analytically: the first ``tail_terms``
    orders of the asymptotic expansion are matched by powers of
    ``i/(p + i)``, whose inverse transforms are known, so the numerical
    remainder is absolutely integrable and ``tau = 0`` is the ``tau -> 0+``
    limit.  The remainder is integrated with Fourier-weighted QUADPACK rules.
    Used only as an independent check on :func:`inv_laplace`.
    """
    if tau < 0:
        raise InvalidParameterError("tau must be non-negative")
    if not isinstance(f, RationalFn):
        raise InvalidParameterError("inv_laplace_quad needs a RationalFn to subtract the tail")
    f.require_decay()
    K = tail_terms
    gam = 1.0
    a = _asymptotic_coeffs(f, K)
    B = _tail_basis_coeffs(gam, K)  # B[k, j]: coefficient of p^-(j+1) in basis k
    coef = np.linalg.solve(B.T, a)

    def tail(p):
        b = 1j / (p + 1j * gam)
        return sum(coef[k] * b ** (k + 1) for k in range(K))

    tail_tau = sum(coef[k] * tau**k / math.factorial(k) * math.exp(-gam * tau) for k in range(K))

    def g(x):
        p = x + 1j * eps
        return f(p) - tail(p)

    def even(x):
        return g(x) + g(-x)

    def odd(x):
        return g(x) - g(-x)

    rts = roots(f.den)
    marks = sorted({abs(r.real) for r in rts} | {abs(b) for b in breakpoints})
    top = 2.0 * max([abs(r) for r in rts] + [1.0]) + 20.0
    edges = [0.0]
    for m in marks:
        for e in (m - 1.0, m - 0.1, m, m + 0.1, m + 1.0):
            if 0 < e < top:
                edges.append(e)
    edges.append(top)
    edges = sorted(set(edges))

    # Fourier-weighted rules lose accuracy for very slow oscillation; there the
    # trigonometric factor is multiplied in directly
    fourier = tau * top > 1.0
    opts = dict(epsabs=epsabs, epsrel=1e-12, limit=400)

    def piece(fun, weight):
        trig = np.cos if weight == "cos" else np.sin
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if fourier:
                total += integrate.quad(fun, lo, hi, weight=weight, wvar=tau, **opts)[0]
            else:
                total += integrate.quad(lambda x: fun(x) * trig(tau * x), lo, hi, **opts)[0]
        if fourier:
            total += integrate.quad(fun, top, np.inf, weight=weight, wvar=tau, epsabs=epsabs, limlst=200)[0]
        else:
            total += integrate.quad(lambda x: fun(x) * trig(tau * x), top, np.inf, **opts)[0]
        return total

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re_c = piece(lambda x: even(x).real, "cos")
        im_c = piece(lambda x: even(x).imag, "cos")
        if tau == 0:
            re_s = im_s = 0.0
        else:
            re_s = piece(lambda x: odd(x).real, "sin")
            im_s = piece(lambda x: odd(x).imag, "sin")
    # int e^{-ix tau} g = int_0^inf even*cos - i int_0^inf odd*sin
    val = complex(re_c, im_c) - 1j * complex(re_s, im_s)
    return complex(math.exp(eps * tau) * val / (2 * math.pi) + tail_tau)


@dataclass
class PmfResult:
    """Probability table obtained from a characteristic function."""

    p: np.ndarray
    max_imag: float
    deficit: float
    n_samples: int
    raw: np.ndarray = field(repr=False, default=None)


def default_samples(mean: float, q: float = 0.0) -> int:
    """Grid size covering the bulk of a count distribution with margin."""
    mean = max(mean, 0.0)
    n = 8.0 * (mean + 10.0 * math.sqrt(mean * (1.0 + abs(q))) + 20.0)
    return 1 << max(2, math.ceil(math.log2(n)))


def char_to_pmf(F: Callable, n_max: int, n_samples: int | None = None, warn_tol: float = 1e-6) -> PmfResult:
    """Invert ``F(chi) = sum_n exp(i chi n) p(n)`` on a uniform chi grid.

    ``F`` is called once with the full array of grid points; callables that
    only accept scalars are vectorized automatically.
    """
    if n_max < 0:
        raise InvalidParameterError("n_max must be non-negative")
    if n_samples is None:
        n_samples = 1 << max(2, math.ceil(math.log2(4 * (n_max + 1))))
    if n_samples < 4 * n_max or n_samples & (n_samples - 1):
        raise InvalidParameterError("n_samples must be a power of two and at least 4*n_max")
    chi = 2 * np.pi * np.arange(n_samples) / n_samples
    try:
        vals = np.asarray(F(chi), dtype=complex)
        if vals.shape != chi.shape:
            raise TypeError
    except TypeError:
        vals = np.array([F(c) for c in chi], dtype=complex)
    coeffs = np.fft.fft(vals) / n_samples
    p = coeffs[: n_max + 1]
    deficit = 1.0 - float(np.sum(p.real))
    res = PmfResult(
        p=p.real.copy(),
        max_imag=float(np.max(np.abs(p.imag))),
        deficit=deficit,
        n_samples=n_samples,
        raw=coeffs,
    )
    if deficit > warn_tol:
        warnings.warn(
            f"probability table misses mass {deficit:.3g}; increase n_max", TruncationWarning, stacklevel=2
        )
    return res
