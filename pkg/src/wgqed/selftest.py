"""Fast internal consistency checks, shared by the CLI ``selftest`` command."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import correlators as co
from . import entropy as en
from . import fcs
from . import spectrum as sp
from .params import SystemParams, propagators
from .polykernel import Poly, RationalFn, inv_laplace, inv_laplace_quad

GRID = [(d, om) for d in (0.0, 1.0, math.sqrt(3)) for om in (0.5, math.sqrt(2), 4.0)]


def _normalization() -> float:
    worst = 0.0
    for d, om in GRID:
        p = SystemParams(delta=d, rabi=om)
        for kappa in (0, 1, 2):
            for tau in (0.1, 10.0):
                for T in (0.0, 1.0, math.inf):
                    worst = max(worst, abs(fcs.fcs_generating(p, kappa, 0.0, tau, T) - 1))
    return worst


def _identities() -> float:
    worst = 0.0
    for d, om in GRID[:4]:
        p = SystemParams(delta=d, rabi=om)
        worst = max(worst, *co.normalization_residuals(p, 2.7))
    return worst


def _routes() -> float:
    worst = 0.0
    t = np.linspace(0, 20, 21)
    for d, om in GRID[:3]:
        p = SystemParams(delta=d, rabi=om)
        ode = co.corr_time_ode_all(p, t)
        for k in co.KINDS:
            worst = max(worst, float(np.max(np.abs(co.corr_time(p, k, t) - ode[k]))))
    return worst


def _closed_forms() -> float:
    worst = 0.0
    for d, om in GRID[:4]:
        p = SystemParams(delta=d, rabi=om)
        for zk in (1.0, np.exp(0.8j)):
            for name in ("r", "rt", "rtt", "c", "b"):
                pts = np.array([0.4 + 1.5j, -2.0 + 0.7j])
                a = co.kernel(p, name, pts, zk, zk)
                b = co.closed_form_kernel(p, name, pts, zk)
                worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def _quadrature() -> float:
    f = RationalFn(Poly([1.0, 2.0j]), Poly.from_roots([-1j, 0.5 - 2j, -0.3 - 0.4j]))
    return max(abs(inv_laplace(f, t) - inv_laplace_quad(f, t)) for t in (0.0, 1.3))


def _propagator_ode() -> float:
    p = SystemParams(delta=0.7, rabi=1.9)
    x = np.linspace(0.05, 5, 9)
    h = 1e-5
    d, dt, dtt = propagators(p, 1.0, x)
    dtp = (propagators(p, 1.0, x + h)[1] - propagators(p, 1.0, x - h)[1]) / (2 * h)
    from .params import coupling

    return float(np.max(np.abs(dtp - coupling(p, 1.0) * d)))


def _q_factor() -> float:
    p = SystemParams(delta=0.0, rabi=math.sqrt(2))
    return max(abs(fcs.mandel_q(p, 2) - 0.625), abs(fcs.mandel_q(p, 0) + 0.375))


def _amplitudes() -> float:
    worst = 0.0
    for d in (0.0, 0.5, 3.0):
        a = sp.amplitudes(SystemParams(delta=d, rabi=0.0))
        worst = max(worst, abs(a.reflectance + a.transmittance - 1), abs(a.t_amp - 1 - a.r_amp))
    return worst


def _entropy() -> float:
    worst = 0.0
    for om in (4.0, 10.0):
        p = SystemParams(rabi=om)
        for T in (0.0, 1.0, math.inf):
            for tau in (0.5, 5.0):
                r = en.entanglement_entropy(p, tau, T)
                worst = max(worst, r.entropy - en.LN4, abs(np.sum(r.eigenvalues) - 1))
    return worst


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("generating function normalised at chi=0", _normalization, 1e-9),
    ("normalization identities from the Laplace table", _identities, 1e-9),
    ("residue vs ODE correlators", _routes, 1e-7),
    ("generic kernels vs closed forms", _closed_forms, 1e-10),
    ("residues vs Bromwich quadrature", _quadrature, 1e-7),
    ("propagator ODE residual", _propagator_ode, 1e-8),
    ("Mandel Q closed forms", _q_factor, 1e-12),
    ("weak-drive unitarity", _amplitudes, 1e-12),
    ("entropy bound and trace", _entropy, 1e-9),
]


def run_selftest() -> list[tuple[str, bool, float, float]]:
    rows = []
    for name, fn, tol in CHECKS:
        try:
            val = float(fn())
            ok = val <= tol
        except Exception as exc:  # report, don't crash the table
            val, ok = float("nan"), False
            name = f"{name} ({type(exc).__name__}: {exc})"
        rows.append((name, ok, val, tol))
    return rows
