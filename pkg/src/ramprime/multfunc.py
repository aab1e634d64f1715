"""Multiplicative functions as dense arrays: convolution, inverse, partial sums.

An ``ArithmeticSequence`` holds f(1..X).  Coprimality with the level N is
applied when summing, never baked into the stored values, so one array
serves every level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .dde import sigma_problem, solve
from .errors import (
    DomainError,
    LengthMismatch,
    MissingCoefficient,
    NotInvertible,
    RangeError,
    TableTooSmall,
)
from .hecke import (
    LocalPrimeData,
    SatakePair,
    lambda_prime_power,
    real_part,
    sym_coefficient_prime_power,
)
from .sieve import PrimeTable, primes_up_to

SEQUENCE_LIMIT = 10**8


@dataclass(frozen=True, eq=False)
class ArithmeticSequence:
    """f(1), ..., f(X) stored at ``values[1:]``; ``values[0]`` is unused."""

    values: np.ndarray

    @classmethod
    def from_list(cls, vals) -> "ArithmeticSequence":
        arr = np.asarray(vals)
        out = np.zeros(len(arr) + 1, dtype=np.result_type(arr, float))
        out[1:] = arr
        return cls(out)

    @property
    def length(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return self.length

    def __getitem__(self, n: int):
        if not 1 <= n <= self.length:
            raise IndexError(f"n={n} outside 1..{self.length}")
        return self.values[n]

    def tolist(self):
        return self.values[1:].tolist()


@dataclass(frozen=True)
class HSpec:
    """h(p) = 3 for p <= y, -1 for p > y, supported on squarefree n."""

    y: float
    N: int = 1

    def __post_init__(self):
        if self.y < 2:
            raise DomainError("HSpec needs y >= 2")
        if self.N < 1:
            raise DomainError("level N must be >= 1")


def delta(X: int) -> ArithmeticSequence:
    v = np.zeros(X + 1)
    v[1] = 1.0
    return ArithmeticSequence(v)


def ones(X: int) -> ArithmeticSequence:
    v = np.ones(X + 1)
    v[0] = 0.0
    return ArithmeticSequence(v)


def _check_size(X: int):
    if X < 1:
        raise DomainError("sequence length must be >= 1")
    if X > SEQUENCE_LIMIT:
        raise RangeError(f"sequence length {X} above memory guard {SEQUENCE_LIMIT}")


def multiplicative_sequence(X: int, table: PrimeTable,
                            local: Callable[[int, int], complex],
                            dtype=float) -> ArithmeticSequence:
    """Dense f(1..X) for the multiplicative f with f(p^k) = local(p, k)."""
    _check_size(X)
    if table.limit < X:
        raise TableTooSmall(f"need primes up to {X}, table limit is {table.limit}")
    vals = np.ones(X + 1, dtype=dtype)
    vals[0] = 0
    for p in table.up_to(X).tolist():
        if p * p > X:
            vals[p::p] *= local(p, 1)
            continue
        idx = np.arange(p, X + 1, p)
        exps = np.ones(len(idx), dtype=np.int64)
        q = p * p
        while q <= X:
            exps[idx % q == 0] += 1
            q *= p
        factors = np.array([local(p, k) for k in range(int(exps.max()) + 1)], dtype=dtype)
        vals[idx] *= factors[exps]
    return ArithmeticSequence(vals)


def h_sequence(spec: HSpec, X: int, table: PrimeTable) -> ArithmeticSequence:
    y = spec.y
    return multiplicative_sequence(
        X, table, lambda p, k: (3.0 if p <= y else -1.0) if k == 1 else 0.0)


def _coprime_mask(n_max: int, N: int) -> np.ndarray:
    mask = np.ones(n_max + 1, dtype=bool)
    mask[0] = False
    m = N
    f = 2
    while f * f <= m:
        if m % f == 0:
            mask[f::f] = False
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        mask[m::m] = False
    return mask


def _squarefree_mask(n_max: int) -> np.ndarray:
    mask = np.ones(n_max + 1, dtype=bool)
    mask[0] = False
    for k in range(2, math.isqrt(n_max) + 1):
        mask[k * k:: k * k] = False
    return mask


def _summation_range(f: ArithmeticSequence, x: float) -> int:
    if x > f.length + 1 - 1e-12 and math.floor(x) > f.length:
        raise RangeError(f"x={x} beyond sequence length {f.length}")
    return max(0, math.floor(x))


def partial_sum(f: ArithmeticSequence, x: float, N: int = 1):
    """sum of f(n) over n <= x with gcd(n, N) = 1."""
    n = _summation_range(f, x)
    if n < 1:
        return 0.0
    mask = _coprime_mask(n, N)
    return f.values[: n + 1][mask].sum()


def log_weighted_sum(f: ArithmeticSequence, x: float, N: int = 1,
                     squarefree_only: bool = False):
    """sum of f(n) log(x/n) over n <= x, gcd(n, N) = 1, optionally squarefree n only."""
    n = _summation_range(f, x)
    if n < 1:
        return 0.0
    mask = _coprime_mask(n, N)
    if squarefree_only:
        mask &= _squarefree_mask(n)
    ns = np.nonzero(mask)[0]
    return np.sum(f.values[ns] * np.log(x / ns))


def dirichlet_convolve(f: ArithmeticSequence, g: ArithmeticSequence) -> ArithmeticSequence:
    if f.length != g.length:
        raise LengthMismatch(f"lengths {f.length} and {g.length} differ")
    X = f.length
    out = np.zeros(X + 1, dtype=np.result_type(f.values, g.values))
    fv, gv = f.values, g.values
    for d in range(1, X + 1):
        fd = fv[d]
        if fd != 0:
            out[d::d] += fd * gv[1: X // d + 1]
    return ArithmeticSequence(out)


def dirichlet_inverse(f: ArithmeticSequence) -> ArithmeticSequence:
    """f^{-1} with f * f^{-1} = delta; requires f(1) = 1."""
    if f.values[1] != 1:
        raise NotInvertible(f"f(1) = {f.values[1]!r}, need 1")
    X = f.length
    fv = f.values
    inv = np.zeros(X + 1, dtype=fv.dtype)
    acc = np.zeros(X + 1, dtype=fv.dtype)
    for n in range(1, X + 1):
        inv[n] = 1 if n == 1 else -acc[n]
        if inv[n] != 0 and 2 * n <= X:
            acc[2 * n:: n] += inv[n] * fv[2: X // n + 1]
    return ArithmeticSequence(inv)


# sequences built from local data -------------------------------------------------

def _local_lookup(data: Mapping[int, LocalPrimeData], p: int) -> LocalPrimeData:
    try:
        return data[p]
    except KeyError:
        raise MissingCoefficient(f"no local data at p={p}") from None


def _divides(p: int, N: int) -> bool:
    return N % p == 0


def lambda_sequence(data: Mapping[int, LocalPrimeData], X: int, table: PrimeTable,
                    N: int = 1) -> ArithmeticSequence:
    """lambda(n) for n <= X from the Hecke relations at each prime (0 at p | N)."""
    sat = {}

    def local(p, k):
        if _divides(p, N):
            return 0.0
        if p not in sat:
            sat[p] = _local_lookup(data, p).satake
        return lambda_prime_power(sat[p], k)

    return multiplicative_sequence(X, table, local, dtype=complex)


def adjoint_sequence(data: Mapping[int, LocalPrimeData], X: int, table: PrimeTable,
                     N: int = 1) -> ArithmeticSequence:
    """A(n) for n <= X as a product of adjoint coefficients at prime powers.

    Values at multiples of primes dividing N are 0 (ramified primes carry no
    data); sums filter them out anyway.
    """
    sat = {}

    def local(p, k):
        if _divides(p, N):
            return 0.0
        if p not in sat:
            sat[p] = _local_lookup(data, p).satake
        return real_part(sym_coefficient_prime_power(sat[p], "adj", k), f"A({p}^{k})")

    return multiplicative_sequence(X, table, local)


@dataclass(frozen=True)
class ConvolutionCheck:
    x: float
    holds_hypothesis: bool
    sflat: float
    hsum: float
    sflat_log: float
    hsum_log: float
    g_prime_min: float

    @property
    def count_bound_holds(self) -> bool:
        return self.sflat >= self.hsum - _slack(self.hsum)

    @property
    def log_bound_holds(self) -> bool:
        return self.sflat_log >= self.hsum_log - _slack(self.hsum_log)

    @property
    def verified(self) -> bool:
        """Both lower bounds hold (only meaningful when the hypothesis holds)."""
        return self.holds_hypothesis and self.count_bound_holds and self.log_bound_holds


def _slack(v: float) -> float:
    # rounding allowance for sums of products of floats
    return 1e-9 * max(1.0, abs(v))


def convolution_lower_bound_check(A: ArithmeticSequence, spec: HSpec, x: float,
                                  table: PrimeTable | None = None) -> ConvolutionCheck:
    """Compare squarefree sums of A with the matching sums of h.

    Both inequalities are claimed only when every partial sum of h up to x
    (over n coprime to N) is non-negative; ``holds_hypothesis`` records that.
    """
    n = _summation_range(A, x)
    X = A.length
    table = table or primes_up_to(max(X, 2))
    N = spec.N
    for p in table.up_to(min(spec.y, X)).tolist():
        if not _divides(p, N) and not A.values[p] > 3:
            raise DomainError(f"A({p}) = {A.values[p]!r} must exceed 3 for p <= y")
    h = h_sequence(spec, X, table)
    if n >= 1:
        cop = _coprime_mask(n, N)
        h_prefix = np.cumsum(np.where(cop, h.values[: n + 1], 0.0))
        holds = bool(np.all(h_prefix[1:] >= 0))
    else:
        holds = True
    sflat = float(np.real(partial_sum(_squarefree_part(A), x, N)))
    hsum = float(partial_sum(h, x, N))
    sflat_log = float(np.real(log_weighted_sum(A, x, N, squarefree_only=True)))
    hsum_log = float(log_weighted_sum(h, x, N))
    g = dirichlet_convolve(A, dirichlet_inverse(h))
    gp = [g.values[p].real for p in table.up_to(n).tolist() if not _divides(p, N)] if n >= 2 else []
    return ConvolutionCheck(x, holds, sflat, hsum, sflat_log, hsum_log, min(gp, default=math.inf))


def _squarefree_part(f: ArithmeticSequence) -> ArithmeticSequence:
    vals = f.values.copy()
    vals[~_squarefree_mask(f.length)] = 0
    vals[0] = 0
    return ArithmeticSequence(vals)


def local_factor_identity_check(sp: SatakePair, degree: int = 30) -> float:
    """Max coefficient residual of L_p(Ad) * cubic * (1 + A x) - (1 + A x) through ``degree``.

    The local adjoint series sum_k A(p^k) x^k times (1 - A x + A x^2 - x^3)
    must collapse to 1 + A x, where A = A(p).
    """
    if not 0 <= degree <= 30:
        raise DomainError("degree must lie in 0..30")
    series = np.array([sym_coefficient_prime_power(sp, "adj", k) for k in range(degree + 1)])
    a = sym_coefficient_prime_power(sp, "adj", 1)
    g_factor = np.convolve([1.0, -a, a, -1.0], [1.0, a])
    prod = np.convolve(series, g_factor)[: degree + 1]
    target = np.zeros(degree + 1, dtype=complex)
    target[: min(2, degree + 1)] = [1.0, a][: degree + 1]
    return float(np.max(np.abs(prod - target)))


@dataclass(frozen=True)
class CConstant:
    N: int
    P: float
    value: float
    tail_bound: float


def _phi_ratio(N: int) -> float:
    r = 1.0
    m = N
    f = 2
    while f * f <= m:
        if m % f == 0:
            r *= 1 - 1 / f
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        r *= 1 - 1 / m
    return r


def c_constant(N: int, P: float, table: PrimeTable) -> CConstant:
    """(phi(N)/N)^3 prod_{p<=P, p∤N} (1-1/p)^3 (1+3/p) with a bound on the omitted tail.

    Each factor equals 1 - 6/p^2 + 8/p^3 - 3/p^4 < 1 and -log of it is at most
    8/p^2, so the infinite product lies in [value - tail_bound, value] with
    tail_bound = value * (1 - exp(-8/floor(P))).
    """
    if N < 1:
        raise DomainError("level N must be >= 1")
    if P < 2:
        raise DomainError("cutoff P must be >= 2")
    if P > table.limit:
        raise TableTooSmall(f"cutoff {P} above table limit {table.limit}")
    ps = table.up_to(P).astype(float)
    ps = ps[np.array([N % int(p) != 0 for p in ps], dtype=bool)] if N > 1 else ps
    log_prod = np.sum(3 * np.log1p(-1 / ps) + np.log1p(3 / ps))
    value = _phi_ratio(N) ** 3 * math.exp(log_prod)
    tail = value * -math.expm1(-8.0 / math.floor(P))
    return CConstant(N, P, value, tail)


@lru_cache(maxsize=4)
def _sigma_grid(u_end: float, h: float):
    return solve(sigma_problem(), u_end, h)


def sigma_value(u: float, h: float = 1e-4) -> float:
    """sigma(u) for u > 0 from the delay-ODE solution (u^2 on (0, 1])."""
    if u <= 0:
        raise DomainError("sigma is defined for u > 0")
    return float(_sigma_grid(max(4.0, float(math.ceil(u))), h)(u))


@dataclass(frozen=True)
class MeanValueReport:
    y: float
    u: float
    N: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def mean_value_report(spec: HSpec, u: float, table: PrimeTable) -> MeanValueReport:
    """H(y^u) next to c(N) sigma(u) (log y)^2 y^u; advisory, nothing asserted."""
    x = spec.y**u
    n = math.floor(x * (1 + 1e-12))
    if n > table.limit:
        raise TableTooSmall(f"y^u = {x:.6g} above table limit {table.limit}")
    h = h_sequence(spec, max(n, 1), table)
    lhs = float(partial_sum(h, n, spec.N))
    c = c_constant(spec.N, table.limit, table).value
    rhs = c * sigma_value(u) * math.log(spec.y) ** 2 * x
    return MeanValueReport(spec.y, u, spec.N, lhs, rhs)


@dataclass(frozen=True)
class S2Sums:
    x: float
    S: float
    S_plus: float
    S_minus: float


def s2_sum(data: Mapping[int, LocalPrimeData], x: float, table: PrimeTable | None = None) -> S2Sums:
    """S(x) = sum_{d<x} lambda(d^2) conj(chi(d)) log(x/d), split by sign of the coefficient."""
    n = int(math.ceil(x)) - 1
    if n < 1:
        return S2Sums(x, 0.0, 0.0, 0.0)
    table = table or primes_up_to(max(n, 2))
    sat = {}

    def local(p, k):
        d = _local_lookup(data, p)
        if p not in sat:
            sat[p] = d.satake
        val = lambda_prime_power(sat[p], 2 * k) * complex(d.chi).conjugate() ** k
        return real_part(val, f"lambda({p}^{2 * k})")

    coeff = multiplicative_sequence(n, table, local).values[1:]
    terms = coeff * np.log(x / np.arange(1, n + 1))
    pos = float(np.sum(terms[coeff > 0]))
    neg = float(np.sum(terms[coeff < 0]))
    return S2Sums(x, pos + neg, pos, neg)
