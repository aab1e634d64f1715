"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import cmath
import math
import time

import numpy as np
import pytest

from ramprime.dataset import SyntheticConfig, density_report, remark_density_inequality, synthesize_sato_tate
from ramprime.dde import (
    buchstab_problem,
    section2_exponent,
    sigma_closed_12,
    sigma_closed_23,
    sigma_problem,
    smallest_zero,
    solve,
)
from ramprime.hecke import (
    LocalPrimeData,
    lift_coefficients,
    nonramanujan_growth,
    u_statistic,
    u_statistic_expanded,
)
from ramprime.multfunc import (
    HSpec,
    adjoint_sequence,
    convolution_lower_bound_check,
    local_factor_identity_check,
    mean_value_report,
)
from ramprime.hecke import SatakePair
from ramprime.sieve import phi_band, phi_rough, phi_rough_asymptotic, primes_up_to

GRID = [2, 3, 5, 10, 30, 100]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def table():
    return primes_up_to(10**6)


def rel(x, y):
    return abs(x - y) / max(1.0, abs(x), abs(y))


def test_c01_sigma_smallest_zero(report):
    t0 = time.perf_counter()
    c = smallest_zero(solve(sigma_problem(), 4.0, 1e-4))
    dt = time.perf_counter() - t0
    ok = abs(c.u0 - 3.65887) <= 5e-4 and c.exponent <= 0.27332 and dt < 2
    report(1, ok, f"u0={c.u0:.10f} exponent={c.exponent:.10f} time={dt:.2f}s")


def test_c02_closed_forms(report):
    t0 = time.perf_counter()
    g = solve(sigma_problem(), 3.0, 1e-4)
    u = g.nodes
    e12 = max(abs(g.y[i] - sigma_closed_12(v)) for i, v in enumerate(u) if 1 <= v <= 2)
    e23 = max(abs(g.y[i] - sigma_closed_23(min(v, 3.0))) for i, v in enumerate(u) if 2 <= v <= 3 + 1e-12)
    seam = abs(sigma_closed_12(2.0) - sigma_closed_23(2.0))
    exact = abs(sigma_closed_12(2.0) - (14 - 16 * math.log(2)))
    dt = time.perf_counter() - t0
    ok = e12 < 1e-8 and e23 < 1e-5 and seam < 1e-10 and exact < 1e-10 and dt < 5
    report(2, ok, f"max err [1,2]={e12:.2e} [2,3]={e23:.2e} seam={seam:.1e} time={dt:.2f}s")


def test_c03_buchstab(report):
    g = solve(buchstab_problem(), 10.0, 1e-4)
    u = g.nodes
    seg = (u >= 1) & (u <= 2)
    exact = bool(np.all(g.y[seg] == 1.0 / u[seg]))
    rng_ok = bool(np.all((g.y >= 0.5) & (g.y <= 1.0)))
    report(3, exact and rng_ok,
           f"omega=1/u on [1,2] exactly: {exact}; range [{g.y.min():.6f}, {g.y.max():.6f}] on [1,10]")


def _trial_lo_hi(n):
    lo = np.zeros(n + 1, dtype=int)
    hi = np.zeros(n + 1, dtype=int)
    for l in range(2, n + 1):
        m, f, first, last = l, 2, 0, 0
        while f * f <= m:
            if m % f == 0:
                first = first or f
                last = f
                while m % f == 0:
                    m //= f
            f += 1
        if m > 1:
            first = first or m
            last = m
        lo[l], hi[l] = first, last
    return lo, hi


def test_c04_sieve_oracle(report):
    t = primes_up_to(10**4)
    lo, hi = _trial_lo_hi(10**4)
    bad = 0
    for Z in GRID:
        cum = np.concatenate([[0, 0], np.cumsum(lo[2:] > Z)])
        bad += sum(phi_rough(X, Z, t) != cum[X - 1] for X in range(1, 10**4 + 1))
        for Y in GRID:
            if Z >= Y:
                continue
            band = np.concatenate([[0, 0], np.cumsum((lo[2:] > Z) & (hi[2:] <= Y))])
            bad += sum(phi_band(X, Y, Z, t) != band[X - 1] for X in range(1, 10**4 + 1))
    ident = 0
    checked = 0
    for Z in GRID:
        for Y in GRID:
            if Z >= Y:
                continue
            for s in range(math.floor(Y) + 1, min(Y * Z, 10**4) + 1):
                checked += 1
                ident += phi_band(s, Y, Z, t) != phi_rough(s, Z, t) - phi_rough(s, Y, t)
    report(4, bad == 0 and ident == 0,
           f"oracle mismatches={bad}; identity failures={ident} of {checked}")


def test_c05_buchstab_asymptotic(report, table):
    exact = phi_rough(1e6, 1e2, table)
    approx = phi_rough_asymptotic(1e6, 1e2)
    err = abs(approx / exact - 1)
    report(5, err < 0.05, f"exact={exact} asymptotic={approx:.1f} rel err={err:.4f}")


def test_c06_hecke_identities(report):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        psi = rng.uniform(0, 2 * math.pi)
        d = LocalPrimeData(int(rng.choice([2, 3, 5, 7, 11])), cmath.exp(0.5j * psi) * rng.uniform(-6, 6),
                           cmath.exp(1j * psi))
        c = lift_coefficients(d)
        A, A3, A4 = c.a_adj, c.a_sym3, c.a_sym4
        worst = max(worst, rel(A * A, A4 + A + 1), rel(A * A4, abs(A3) ** 2 - 1),
                    rel(u_statistic(d), u_statistic_expanded(c)))
    margin = math.inf
    for _ in range(1000):
        psi = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(2 + 1e-6, 6) * rng.choice([-1, 1])
        d = LocalPrimeData(2, cmath.exp(0.5j * psi) * r, cmath.exp(1j * psi))
        for n in range(1, 6):
            margin = min(margin, nonramanujan_growth(d, n) - (2 * n + 1))
    report(6, worst < 1e-8 and margin > 0,
           f"max relative residual={worst:.2e}; min lambda(p^2n) - (2n+1)={margin:.3e}")


def test_c07_euler_factor(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        psi, theta = rng.uniform(0, 2 * math.pi, 2)
        sp = SatakePair(cmath.exp(1j * (psi / 2 + theta)), cmath.exp(1j * (psi / 2 - theta)))
        worst = max(worst, local_factor_identity_check(sp, 30))
    report(7, worst < 1e-9, f"max residual through degree 30={worst:.2e}")


def test_c08_convolution_bounds(report):
    rng = np.random.default_rng(8)
    t = primes_up_to(2000)
    instances = failures = trials = 0
    while instances < 50 and trials < 2000:
        trials += 1
        y = int(rng.choice([2, 3, 5, 7, 11, 13, 17, 23, 31, 47]))
        N = int(rng.choice([1, 1, 2, 3, 5, 6, 7, 15]))
        x = float(rng.uniform(2, 2000))
        data = {}
        for p in t.up_to(x).tolist():
            if N % p == 0:
                continue
            lam = rng.uniform(2.0001, 4.0) if p <= y else 2 * math.cos(rng.uniform(0, math.pi))
            data[p] = LocalPrimeData(p, lam)
        A = adjoint_sequence(data, int(x), t, N)
        r = convolution_lower_bound_check(A, HSpec(y, N), x, t)
        if r.holds_hypothesis:
            instances += 1
            failures += not r.verified
    report(8, instances == 50 and failures == 0,
           f"{instances} instances satisfying the hypothesis ({trials} drawn), {failures} failures")


def test_c09_monte_carlo(report):
    t0 = time.perf_counter()
    t = primes_up_to(15_485_863)  # the 10^6-th prime
    ds = synthesize_sato_tate(SyntheticConfig(15_485_863, 20240601), t)
    r = density_report(ds, 15_485_863, table=t)
    s = remark_density_inequality(ds, 15_485_863, t)
    dt = time.perf_counter() - t0
    ok = (len(ds) == 10**6 and abs(r.mean_nine - 10) <= 0.05 and abs(r.mean_u - 35) <= 0.3
          and abs(s.sup3 - 1) <= 0.05 and abs(r.nonram_fraction_bound - 1 / 35) < 0.01 and dt < 60)
    report(9, ok, f"mean (1+3A)^2={r.mean_nine:.4f} mean U={r.mean_u:.4f} mean |A3|^2={s.sup3:.4f} "
                  f"bound={r.nonram_fraction_bound:.5f} (1/35={1 / 35:.5f}) time={dt:.1f}s")


def test_c10_density_identity(report):
    rng = np.random.default_rng(10)
    t = primes_up_to(5000)
    ps = t.primes
    failures = 0
    for _ in range(100):
        k = int(rng.integers(0, len(ps) + 1))
        viol = sorted((int(q), float(rng.choice([-1, 1]) * rng.uniform(2 + 1e-9, 20)))
                      for q in rng.choice(ps, size=k, replace=False))
        ds = synthesize_sato_tate(SyntheticConfig(5000, int(rng.integers(2**63)), viol), t)
        r = density_report(ds, 5000, table=t)
        failures += not (r.identity_holds and r.pi_X - r.ramanujan_count == k)
    report(10, failures == 0, f"{failures} failures over 100 violation patterns")


def test_c11_mean_value_trend(report):
    t0 = time.perf_counter()
    t = primes_up_to(10**6)
    r2 = mean_value_report(HSpec(1e3), 2.0, t)
    a = mean_value_report(HSpec(1e3), 1.5, t)
    b = mean_value_report(HSpec(1e4), 1.5, t)
    dt = time.perf_counter() - t0
    band = 0.6 <= r2.ratio <= 1.6
    shrink = abs(b.ratio - 1) < abs(a.ratio - 1)
    report(11, band and shrink and dt < 30,
           f"ratio(y=1e3,u=2)={r2.ratio:.4f} in [0.6,1.6]: {band}; "
           f"|r-1| at u=1.5: y=1e3 {abs(a.ratio - 1):.4f} -> y=1e4 {abs(b.ratio - 1):.4f} shrinks: {shrink}; "
           f"time={dt:.1f}s")


def test_c12_section2_exponent(report):
    errs = [abs(section2_exponent(3 / 8 - 10.0**-k) - 8 / 11) for k in range(1, 15)]
    ok = errs[-1] < 1e-12 and all(b <= a for a, b in zip(errs, errs[1:]))
    report(12, ok, f"|exponent - 8/11| at eps=1e-14: {errs[-1]:.1e}")
