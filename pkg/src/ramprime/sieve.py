"""Prime tables and exact counts of integers with restricted prime factors.

Counting follows the summation conditions literally: l runs over integers with
1 < l < X (strict), prime factors p > Z, and for band counts also p <= Y.
All counts are exact, computed from smallest/largest prime factor arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .dde import buchstab_problem, solve
from .errors import DomainError, LimitExceeded, TableTooSmall

PRIME_LIMIT_GUARD = 10**9
COUNT_LIMIT_GUARD = 10**8
_SEGMENT = 1 << 20


def _simple_sieve(n: int) -> np.ndarray:
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if is_p[i]:
            is_p[i * i:: i] = False
    return np.nonzero(is_p)[0].astype(np.int64)


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray
    _factor_cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.primes)

    def pi(self, x: float) -> int:
        """Number of primes <= x (x must not exceed the table limit)."""
        if x > self.limit:
            raise TableTooSmall(f"pi({x}) needs a table up to {x}, have {self.limit}")
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def up_to(self, x: float) -> np.ndarray:
        return self.primes[: self.pi(x)]

    def factor_arrays(self, n: int):
        """(spf, lpf): smallest and largest prime factor of every 0 <= l <= n."""
        if n > self.limit:
            raise TableTooSmall(f"need primes up to {n}, table limit is {self.limit}")
        if n > COUNT_LIMIT_GUARD:
            raise LimitExceeded(f"factor arrays above {COUNT_LIMIT_GUARD} are not supported")
        have = self._factor_cache.get("arrays")
        if have is None or len(have[0]) <= n:
            size = min(self.limit, max(n, 1024, 2 * len(have[0]) if have else 0))
            have = _factor_arrays(self.up_to(size), size)
            self._factor_cache["arrays"] = have
        return have[0][: n + 1], have[1][: n + 1]


def _factor_arrays(primes: np.ndarray, n: int):
    spf = np.zeros(n + 1, dtype=np.int32)
    lpf = np.zeros(n + 1, dtype=np.int32)
    root = math.isqrt(n)
    for p in primes[::-1]:
        if p <= root:
            spf[p::p] = p
    unset = spf == 0
    spf[unset] = np.arange(n + 1, dtype=np.int32)[unset]  # primes (and 0, 1) are their own spf
    for p in primes:
        lpf[p::p] = p
    spf[:2] = 0
    lpf[:2] = 0
    return spf, lpf


def primes_up_to(limit: int) -> PrimeTable:
    """All primes <= limit by a segmented sieve of Eratosthenes."""
    limit = int(limit)
    if limit < 2:
        raise DomainError("prime table limit must be >= 2")
    if limit > PRIME_LIMIT_GUARD:
        raise LimitExceeded(f"prime table limit {limit} above guard {PRIME_LIMIT_GUARD}")
    base = _simple_sieve(math.isqrt(limit))
    chunks = [base]
    lo = math.isqrt(limit) + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo:: p] = False
        chunks.append(np.nonzero(seg)[0].astype(np.int64) + lo)
        lo = hi
    return PrimeTable(limit, np.concatenate(chunks))


def _top(X: float) -> int:
    # largest integer l with l < X
    return int(math.ceil(X)) - 1


def _band_mask(X, Y, Z, table):
    n = _top(X)
    if n < 2:
        return None, n
    spf, lpf = table.factor_arrays(n)
    mask = spf[2:] > Z
    if Y is not None:
        mask &= lpf[2:] <= Y
    return mask, n


def phi_rough(X: float, Z: float, table: PrimeTable) -> int:
    """#{1 < l < X : every prime p | l has p > Z}."""
    mask, _ = _band_mask(X, None, Z, table)
    return 0 if mask is None else int(np.count_nonzero(mask))


def phi_band(X: float, Y: float, Z: float, table: PrimeTable) -> int:
    """#{1 < l < X : every prime p | l has Z < p <= Y}.  Empty band (Z >= Y) gives 0."""
    if Z >= Y:
        return 0
    mask, _ = _band_mask(X, Y, Z, table)
    return 0 if mask is None else int(np.count_nonzero(mask))


def phi_band_log(X: float, Y: float, Z: float, table: PrimeTable) -> float:
    """Sum of log(X/l) over the integers counted by ``phi_band``."""
    if Z >= Y:
        return 0.0
    mask, n = _band_mask(X, Y, Z, table)
    if mask is None:
        return 0.0
    ls = np.nonzero(mask)[0] + 2
    return float(np.sum(np.log(X / ls)))


@lru_cache(maxsize=4)
def buchstab_grid(u_end: float = 12.0, h: float = 1e-4):
    return solve(buchstab_problem(), u_end, h)


def phi_rough_asymptotic(X: float, Z: float, omega=None) -> float:
    """Main terms omega(log X/log Z) X/log Z - Z/log Z of the Buchstab asymptotic."""
    if Z < 2 or X < Z:
        raise DomainError(f"need X >= Z >= 2, got X={X}, Z={Z}")
    u = math.log(X) / math.log(Z)
    if u < 1:
        raise DomainError(f"log X / log Z = {u} < 1")
    if omega is None:
        omega = buchstab_grid(max(12.0, math.ceil(u)))
    lz = math.log(Z)
    return float(omega(u)) * X / lz - Z / lz


@dataclass(frozen=True)
class SievebReport:
    X: float
    Y: float
    Z: float
    exact: float
    main: float
    in_range: bool


def sieveb_bound_report(X: float, Y: float, Z: float, table: PrimeTable) -> SievebReport:
    """Exact log-weighted band count next to the main term X/(2 log Z) - X/log Y.

    Nothing is asserted: the error term has an unspecified constant.
    ``in_range`` records whether Z < Y < X <= YZ.
    """
    exact = phi_band_log(X, Y, Z, table)
    main = X / (2 * math.log(Z)) - X / math.log(Y)
    return SievebReport(X, Y, Z, exact, main, Z < Y < X <= Y * Z)


@dataclass(frozen=True)
class ChebyshevReport:
    x: float
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs


def chebyshev_report(x: float, table: PrimeTable) -> ChebyshevReport:
    """pi(x) log x - theta(x) against x / log x."""
    if x < 10:
        raise DomainError("chebyshev_report needs x >= 10")
    ps = table.up_to(x)
    lx = math.log(x)
    lhs = len(ps) * lx - float(np.sum(np.log(ps.astype(float))))
    return ChebyshevReport(x, lhs, x / lx)
