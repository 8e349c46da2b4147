"""Acceptance criteria, one printed PASS/FAIL line per checked statement."""

import math
import time

import numpy as np
import pytest
from scipy import integrate, optimize

from wgqed import correlators as co
from wgqed import entropy as en
from wgqed import fcs
from wgqed import spectrum as sp
from wgqed.params import SystemParams, derive
from wgqed.polykernel import Poly, RationalFn, inv_laplace, inv_laplace_quad

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)


@pytest.fixture
def report(capsys):
    def emit(criterion, label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {label} ({detail})")
        return ok

    return emit


def test_c01_normalization_grid(report):
    start = time.perf_counter()
    worst = 0.0
    for kappa in (0, 1, 2):
        for d in (0.0, 1.0, SQ3, 5.0):
            for om in (0.5, SQ2, 4.0, 10.0):
                p = SystemParams(delta=d, rabi=om)
                for tau in (0.1, 1.0, 10.0, 100.0):
                    for T in (0.0, 1.0, math.inf):
                        worst = max(worst, abs(fcs.fcs_generating(p, kappa, 0.0, tau, T) - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    assert report("C1", "F(0)=1 over 576 grid points in < 10 s", ok, f"max dev {worst:.2e}, {elapsed:.2f} s")


def test_c02_mandel_q_closed_forms(report):
    p = SystemParams(delta=0.0, rabi=SQ2)
    qr, ql = fcs.mandel_q(p, 2), fcs.mandel_q(p, 0)
    ok = abs(qr - 0.625) <= 1e-12 and abs(ql + 0.375) <= 1e-12
    assert report("C2", "closed-form Q_r=0.625, Q_l=-0.375", ok, f"Q_r={qr!r}, Q_l={ql!r}")


def test_c02_mandel_q_numeric(report):
    p = SystemParams(delta=0.0, rabi=SQ2)
    ql = fcs.q_numeric(p, 0, 200.0)[2]
    qr = fcs.q_numeric(p, 2, 200.0)[2]
    err = max(abs(ql + 0.375), abs(qr - 0.625))
    assert report("C2", "q_numeric at tau=200 within 0.02", err < 0.02, f"Q_l={ql:.5f}, Q_r={qr:.5f}")


def test_c02_crossover(report):
    f = lambda d: fcs.mandel_q(SystemParams(delta=d, rabi=SQ2), 0)
    root = optimize.brentq(f, 1.0, 3.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    err = abs(root - SQ3)
    assert report("C2", "Q_l sign change at delta=sqrt(3)", err < 1e-6, f"root {root:.12f}, err {err:.1e}")


def test_c03_mean_counts(report):
    p = SystemParams(delta=0.0, rabi=SQ2)
    nl, nr = fcs.mean_counts(p, 0, 200.0), fcs.mean_counts(p, 2, 200.0)
    ok = abs(nl - 50) <= 1e-12 * 50 and abs(nr - 50) <= 1e-12 * 50
    report("C3", "closed-form <N_l>=<N_r>=50", ok, f"{nl!r}, {nr!r}")
    ml, mr = fcs.pmf(p, 0, 200.0).mean, fcs.pmf(p, 2, 200.0).mean
    ok2 = abs(ml - 50) < 0.5 and abs(mr - 50) < 0.5
    report("C3", "pmf means within 0.5", ok2, f"{ml:.6f}, {mr:.6f}")
    assert ok and ok2


def test_c04_chiral_poisson(report):
    p = SystemParams(delta=0.0, rabi=SQ2)
    mean, var, _ = fcs.q_numeric(p, 1, 200.0)
    dev = abs(var / mean - 1)
    assert report("C4", "chiral |var/mean - 1| < 0.01 at tau=200", dev < 0.01, f"{dev:.2e}")


def test_c05_saturation(report):
    p = SystemParams(delta=0.0, rabi=SQ2)
    devs = {k: abs(co.corr_time(p, k, 50.0) - 0.5) for k in co.KINDS}
    worst = max(devs.values())
    assert report("C5", "R, C, M, N at tau=50 within 1e-6 of 1/2", worst < 1e-6, f"max dev {worst:.1e}")


def test_c05_dual_routes(report):
    t = np.linspace(0.0, 20.0, 201)
    worst = 0.0
    for d in (0.0, 1.0, SQ3, 5.0):
        for om in (0.5, SQ2, 4.0, 10.0):
            p = SystemParams(delta=d, rabi=om)
            ode = co.corr_time_ode_all(p, t)
            for k in co.KINDS:
                res = co.corr_time(p, k, t)
                worst = max(worst, float(np.max(np.abs(res - ode[k]))))
                if d == 0.0:
                    ana = co.corr_time_analytic(p, k, t)
                    worst = max(worst, float(np.max(np.abs(res - ana))), float(np.max(np.abs(ode[k] - ana))))
    assert report("C5", "residue vs ODE vs analytic on [0, 20]", worst < 1e-7, f"max dev {worst:.1e}")


def test_c06_normalization_identities(report):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(200):
        p = SystemParams(delta=rng.uniform(-5, 5), gamma=rng.uniform(0.5, 2.0), rabi=rng.uniform(0.05, 10))
        taus = rng.uniform(0.0, 30.0, 5)
        worst = max(worst, *(float(np.max(r)) for r in co.normalization_residuals(p, taus)))
    assert report("C6", "three identities on 1000 random samples", worst < 1e-9, f"max dev {worst:.1e}")


MOLLOW_P = SystemParams(delta=0.0, rabi=10.0)
MOLLOW_X = np.linspace(-30.0, 30.0, 60001)


@pytest.fixture(scope="module")
def stat():
    return sp.mollow_stationary(MOLLOW_P, MOLLOW_X)


class TestC07Mollow:
    p = MOLLOW_P
    x = MOLLOW_X

    def test_peaks(self, report, stat):
        pk = sp.find_peaks(self.x, stat)
        locs = sorted(self.x[i] for i in pk)
        ok = len(locs) == 3 and all(abs(a - b) < 0.5 for a, b in zip(locs, (-10.0, 0.0, 10.0)))
        assert report("C7", "peaks at {0, +-rabi} within 0.5", ok, f"at {np.round(locs, 3).tolist()}")

    def test_widths_and_ratio(self, report, stat):
        pk = sorted(sp.find_peaks(self.x, stat), key=lambda i: self.x[i])
        side, centre = pk[0], pk[1]
        wc = sp.half_width(self.x, stat, centre)
        ws = sp.half_width(self.x, stat, side)
        ok_w = abs(wc - 1.0) <= 0.1 and abs(ws / 1.5 - 1) <= 0.1
        report("C7", "half widths {1, 1.5} within 10%", ok_w, f"{wc:.4f}, {ws:.4f}")
        ratio = stat[centre] / stat[side]
        ok_r = abs(ratio / 3 - 1) <= 0.1
        report("C7", "centre:side height 3:1 within 10%", ok_r, f"{ratio:.4f}")
        assert ok_w and ok_r

    def test_transient(self, report, stat):
        tr = sp.mollow_transient(self.p, self.x, 10.0)
        dev = float(np.max(np.abs(tr - stat)) / np.max(stat))
        ok = dev < 0.02
        report("C7", "transient T=10 within 2% sup-norm", ok, f"{dev:.1e}")
        zero = sp.mollow_transient(self.p, self.x, 0.0)
        ok0 = bool(np.all(zero == 0.0))
        report("C7", "p_inel(omega, 0) = 0 exactly", ok0, f"max |p| {np.max(np.abs(zero)):.1e}")
        assert ok and ok0


def test_c08_amplitudes(report):
    worst_u = worst_t = 0.0
    for d in np.linspace(-6, 6, 25):
        a = sp.amplitudes(SystemParams(delta=d, rabi=0.0))
        worst_u = max(worst_u, abs(a.reflectance + a.transmittance - 1))
        worst_t = max(worst_t, abs(a.t_amp - (1 + a.r_amp)))
    r0 = sp.amplitudes(SystemParams(delta=0.0, rabi=0.0)).r_amp
    ok = worst_u <= 1e-12 and worst_t == 0.0 and r0 == -1
    assert report("C8", "unitarity, t=1+r, r=-1 on resonance", ok, f"{worst_u:.1e}, {worst_t:.1e}, r={r0}")


class TestC09Entropy:
    def test_bound(self, report):
        worst = -math.inf
        for d in (0.0, 1.0, SQ3):
            for om in (0.5, SQ2, 4.0, 10.0):
                p = SystemParams(delta=d, rabi=om)
                for T in (0.0, 1.0, 5.0, math.inf):
                    s, _ = en.entropy_curve(p, np.geomspace(1e-3, 100, 25), T)
                    worst = max(worst, float(np.max(s)))
        ok = worst <= en.LN4 + 1e-9
        assert report("C9", "S <= ln 4 on all samples", ok, f"max S {worst:.6f}")

    def test_boundary_half_bulk(self, report):
        worst = 0.0
        for om in (4.0, 10.0):
            p = SystemParams(delta=0.0, rabi=om)
            bulk = en.entanglement_entropy(p, 100.0, math.inf).entropy
            bound = en.entanglement_entropy(p, 100.0, 0.0).entropy
            worst = max(worst, abs(bound - bulk / 2))
        assert report("C9", "boundary plateau = bulk/2 at tau=100", worst < 1e-6, f"dev {worst:.1e}")

    def test_strong_drive_plateau(self, report):
        p = SystemParams(delta=0.0, rabi=10.0)
        s = en.entanglement_entropy(p, 100.0, math.inf).entropy
        rel = abs(s / en.LN4 - 1)
        assert report("C9", "bulk plateau within 2% of ln 4 at rabi=10", rel <= 0.02, f"S={s:.5f}, {rel:.2%} off")

    @pytest.mark.parametrize("om", [4.0, 10.0])
    def test_small_tau_bulk(self, report, om):
        p = SystemParams(delta=0.0, rabi=om)
        s = en.entanglement_entropy(p, 1e-3, math.inf).entropy
        a = float(en.entropy_asymptotics(p, "bulk_small", 1e-3))
        rel = abs(s / a - 1)
        assert report("C9", f"bulk small-tau form within 5% (rabi={om:g})", rel <= 0.05, f"{rel:.1%} off")

    @pytest.mark.parametrize("om", [4.0, 10.0])
    def test_small_tau_boundary(self, report, om):
        p = SystemParams(delta=0.0, rabi=om)
        s = en.entanglement_entropy(p, 1e-3, 0.0).entropy
        a = float(en.entropy_asymptotics(p, "boundary_small", 1e-3))
        rel = abs(s / a - 1)
        assert report("C9", f"boundary small-tau form within 5% (rabi={om:g})", rel <= 0.05,
                      f"S={s:.2e} vs {a:.2e}")

    def test_boundary_local_max(self, report):
        p = SystemParams(delta=0.0, rabi=10.0)
        taus = np.linspace(0.01, 6.0, 600)
        s, _ = en.entropy_curve(p, taus, 0.0)
        n = sum(1 for i in range(1, len(s) - 1) if s[i] > s[i - 1] and s[i] > s[i + 1])
        assert report("C9", "boundary curve has an interior local maximum", n >= 1, f"{n} maxima")


def _random_rational(rng):
    n = int(rng.integers(1, 6))
    poles = rng.uniform(-4, 4, n) - 1j * rng.uniform(0.1, 3.0, n)
    num = rng.normal(size=n) + 1j * rng.normal(size=n)
    num[-1] = num[-1] if n == 1 else num[-1] * rng.integers(0, 2)
    return RationalFn(Poly(num[:n]), Poly.from_roots(poles))


def test_c10_bromwich(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        f = _random_rational(rng)
        tau = float(rng.uniform(0.0, 6.0))
        worst = max(worst, abs(inv_laplace(f, tau) - inv_laplace_quad(f, tau)))
    assert report("C10", "residues vs Bromwich quadrature, 100 rationals", worst < 1e-7, f"max dev {worst:.1e}")


def test_c10_closed_forms(report):
    rng = np.random.default_rng(3)
    worst = 0.0
    names = ("r", "rt", "rtt", "c", "b")
    pts = rng.uniform(-5, 5, 6) + 1j * rng.uniform(0.1, 4, 6)
    for d in (0.0, 1.0, SQ3, -2.5):
        for om in (0.5, SQ2, 4.0, 10.0):
            p = SystemParams(delta=d, rabi=om)
            for zk in (1.0, -1.0, np.exp(0.3j), np.exp(2.2j)):
                for name in names:
                    a = co.kernel(p, name, pts, zk, zk)
                    b = co.closed_form_kernel(p, name, pts, zk)
                    worst = max(worst, float(np.max(np.abs(a - b) / (1 + np.abs(b)))))
    assert report("C10", "closed-form kernels vs generic construction", worst < 1e-10, f"max dev {worst:.1e}")


def test_c10_factorial_oracle(report):
    # first two factorial moments of the reflected channel as explicit time
    # integrals of R and C, against the contour-integral extraction
    p = SystemParams(delta=0.7, rabi=1.9)
    dp = derive(p)
    w, lam2 = dp.w, dp.lambda_abs2
    Rf = lambda x: co.corr_time(p, "R", x).real
    Cf = lambda x: co.corr_time(p, "C", x)
    worst = 0.0
    for T in (0.0, 0.8, math.inf):
        RT = co.corr_time(p, "R", T).real
        CT = co.corr_time(p, "C", T)
        A = 1 + (1 - w) * RT - 2 * CT.real
        h = lambda x: A * Rf(x) + RT * (1 - w * Rf(x)) + (CT - RT) * np.conj(Cf(x)) + (np.conj(CT) - RT) * Cf(x)
        for tau in (0.5, 2.0):
            m1 = lam2 * integrate.quad(lambda x: h(x).real, 0, tau, epsabs=1e-13)[0] / 2
            m2 = lam2**2 * integrate.dblquad(
                lambda x1, x2: (h(tau - x2) * Rf(x2 - x1)).real, 0, tau, 0, lambda x2: x2, epsabs=1e-12
            )[0] / 2
            fm = fcs.factorial_moments(p, 0, tau, T)
            worst = max(worst, abs(fm[0] - m1), abs(fm[1] - m2))
    assert report("C10", "factorial moments vs time-ordered integrals", worst < 1e-5, f"max dev {worst:.1e}")
