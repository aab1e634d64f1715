"""Local algebra of a Maass form at an unramified prime.

Everything here is a pure function of (lambda(p), chi(p)) or of the Satake
pair {alpha, beta} solving X^2 - lambda X + chi = 0.  Characters are carried
as their values at primes; composite arguments use complete multiplicativity.

Scalar operations take and return Python numbers.  ``lift_arrays`` is the
vectorised counterpart used by the dataset statistics.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import (
    ImaginaryResidual,
    MissingCoefficient,
    NotApplicable,
    ValidationError,
)

# tolerance for every "this value is real" (relative to max(1, |z|)) and "|z| = 1" check
IMAG_TOL = 1e-9

LIFTS = ("adj", "sym3", "sym4")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def real_part(z, what="value", tol=IMAG_TOL) -> float:
    """Return ``z.real`` after checking |Im z| <= tol * max(1, |z|)."""
    z = complex(z)
    if abs(z.imag) > tol * max(1.0, abs(z)):
        raise ImaginaryResidual(f"{what} has imaginary part {z.imag:.3e}")
    return z.real


@dataclass(frozen=True, eq=False)
class SatakePair:
    alpha: complex
    beta: complex

    def __post_init__(self):
        if abs(abs(self.alpha * self.beta) - 1.0) > IMAG_TOL:
            raise ValidationError(f"|alpha*beta| = {abs(self.alpha * self.beta)!r}, expected 1")

    def __eq__(self, other):
        if not isinstance(other, SatakePair):
            return NotImplemented
        return (self.alpha, self.beta) in ((other.alpha, other.beta), (other.beta, other.alpha))

    def __hash__(self):
        return hash(frozenset((self.alpha, self.beta)))


@dataclass(frozen=True)
class LocalPrimeData:
    """One unramified prime: p, the normalised eigenvalue and chi(p)."""

    p: int
    lam: complex
    chi: complex = 1.0

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValidationError(f"p={self.p} is not prime")
        if abs(abs(self.chi) - 1.0) > IMAG_TOL:
            raise ValidationError(f"|chi(p)| = {abs(self.chi)!r} at p={self.p}")
        lam = complex(self.lam)
        if abs(lam - complex(self.chi) * lam.conjugate()) > IMAG_TOL:
            raise ValidationError(f"lambda != chi*conj(lambda) at p={self.p}")

    @property
    def satake(self) -> SatakePair:
        return satake_from_lambda(self.lam, self.chi)


@dataclass(frozen=True)
class LiftCoefficients:
    a_adj: float
    a_sym3: complex
    a_sym4: float


def satake_from_lambda(lam, chi=1.0) -> SatakePair:
    """Roots of X^2 - lam X + chi.  ``alpha`` is the root of larger modulus."""
    lam = complex(lam)
    chi = complex(chi)
    d = cmath.sqrt(lam * lam - 4.0 * chi)
    # take the root without cancellation, recover the other from the product
    r1 = (lam + d) / 2 if abs(lam + d) >= abs(lam - d) else (lam - d) / 2
    r2 = chi / r1
    if abs(r2) > abs(r1):
        r1, r2 = r2, r1
    return SatakePair(r1, r2)


def lambda_prime_power(sp: SatakePair, n: int) -> complex:
    """lambda(p^n) = (alpha^(n+1) - beta^(n+1)) / (alpha - beta)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, b = sp.alpha, sp.beta
    if n == 0:
        return 1.0 + 0j
    if abs(a - b) < 1e-12:
        return (n + 1) * a**n
    if abs(a - b) < 1e-6 * max(1.0, abs(a)):
        # near-double root: the ratio cancels badly, sum the geometric terms instead
        return sum(a**j * b ** (n - j) for j in range(n + 1))
    return (a ** (n + 1) - b ** (n + 1)) / (a - b)


def adjoint_coefficient(d: LocalPrimeData) -> float:
    """A(p) = lambda(p^2) conj(chi(p)), equal to |lambda(p)|^2 - 1."""
    val = lambda_prime_power(d.satake, 2) * complex(d.chi).conjugate()
    return real_part(val, f"A({d.p})")


def character_from_primes(values: Mapping[int, complex]) -> Callable[[int], complex]:
    """Completely multiplicative extension of prime values ``values``."""

    def chi(n: int) -> complex:
        out = 1.0 + 0j
        m = n
        f = 2
        while f * f <= m:
            while m % f == 0:
                if f not in values:
                    raise MissingCoefficient(f"chi({f}) not available")
                out *= values[f]
                m //= f
            f += 1
        if m > 1:
            if m not in values:
                raise MissingCoefficient(f"chi({m}) not available")
            out *= values[m]
        return out

    return chi


def adjoint_coefficient_n(lam_values, chi: Callable[[int], complex], n: int) -> complex:
    """A(n) = sum over k^2 | n of lambda(n^2/k^4) conj(chi(n/k^2)).

    ``lam_values[m]`` must give lambda(m) (1-based); ``chi`` maps integers to
    character values.  Used as the divisor-sum oracle for the multiplicative
    construction of the adjoint coefficients.
    """
    if n < 1:
        raise ValueError("n must be positive")
    total = 0j
    k = 1
    while k * k <= n:
        if n % (k * k) == 0:
            m = n // (k * k)
            try:
                lam = lam_values[m * m]
            except (IndexError, KeyError):
                raise MissingCoefficient(f"lambda({m * m}) not available") from None
            total += complex(lam) * complex(chi(m)).conjugate()
        k += 1
    return total


def lift_parameters(sp: SatakePair, lift: str) -> tuple:
    """Satake tuple of the adjoint, symmetric cube or twisted fourth power."""
    a, b = sp.alpha, sp.beta
    if lift == "adj":
        return (a / b, 1.0 + 0j, b / a)
    if lift == "sym3":
        return (a**3, a**2 * b, a * b**2, b**3)
    if lift == "sym4":
        r = a / b
        s = b / a
        return (r * r, r, 1.0 + 0j, s, s * s)
    raise ValueError(f"unknown lift {lift!r}; expected one of {LIFTS}")


def sym3_coefficient(sp: SatakePair) -> complex:
    return sum(lift_parameters(sp, "sym3"))


def sym4_twisted_coefficient(sp: SatakePair) -> float:
    return real_part(sum(lift_parameters(sp, "sym4")), "A4(p)")


def complete_homogeneous(values, k: int):
    """h_k(values), i.e. the x^k coefficient of prod 1/(1 - v x)."""
    c = [1.0 + 0j] + [0j] * k
    for v in values:
        for j in range(1, k + 1):
            c[j] += v * c[j - 1]
    return c[k]


def sym_coefficient_prime_power(sp: SatakePair, lift: str, k: int) -> complex:
    """Coefficient at p^k of the lift's L-series."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return complete_homogeneous(lift_parameters(sp, lift), k)


def lift_coefficients(d: LocalPrimeData) -> LiftCoefficients:
    sp = d.satake
    return LiftCoefficients(adjoint_coefficient(d), sym3_coefficient(sp), sym4_twisted_coefficient(sp))


def is_ramanujan(d: LocalPrimeData, tol: float = IMAG_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return abs(d.lam) <= 2.0 + tol


def nonramanujan_growth(d: LocalPrimeData, n: int) -> float:
    """lambda(p^(2n)) conj(chi(p))^n for a prime where |lambda(p)| > 2."""
    if is_ramanujan(d, 0.0):
        raise NotApplicable(f"p={d.p} is a Ramanujan prime")
    if n < 1:
        raise ValueError("n must be positive")
    val = lambda_prime_power(d.satake, 2 * n) * complex(d.chi).conjugate() ** n
    return real_part(val, f"lambda({d.p}^{2 * n})")


def u_statistic(d: LocalPrimeData) -> float:
    c = lift_coefficients(d)
    return (1.0 + 3.0 * c.a_adj + 5.0 * c.a_sym4) ** 2


def u_statistic_expanded(c: LiftCoefficients) -> float:
    """U(p) rewritten through the Hecke relations; must equal ``u_statistic``."""
    a, a4 = c.a_adj, c.a_sym4
    return -20.0 + 15.0 * a + 19.0 * a4 + 30.0 * abs(c.a_sym3) ** 2 + 25.0 * a4 * a4


def nine_tenths_statistic(d: LocalPrimeData) -> float:
    return (1.0 + 3.0 * adjoint_coefficient(d)) ** 2


def lift_arrays(lam, chi=None):
    """Vectorised (A, A3, A4) for arrays of eigenvalues and character values.

    Returns real A, complex A3, real A4.  Raises ImaginaryResidual if any
    adjoint or fourth-power value fails the ``real_part`` check.
    """
    lam = np.asarray(lam, dtype=complex)
    chi = np.ones_like(lam) if chi is None else np.asarray(chi, dtype=complex)
    d = np.sqrt(lam * lam - 4.0 * chi)
    plus = lam + d
    minus = lam - d
    r1 = np.where(np.abs(plus) >= np.abs(minus), plus, minus) / 2
    r2 = chi / r1
    ratio = r1 / r2
    inv = r2 / r1
    adj = ratio + 1.0 + inv
    sym3 = r1**3 + r1**2 * r2 + r1 * r2**2 + r2**3
    sym4 = ratio * ratio + ratio + 1.0 + inv + inv * inv
    worst = max(np.max(np.abs(adj.imag) / np.maximum(1.0, np.abs(adj)), initial=0.0),
                np.max(np.abs(sym4.imag) / np.maximum(1.0, np.abs(sym4)), initial=0.0))
    if worst > IMAG_TOL:
        raise ImaginaryResidual(f"lift coefficient imaginary residual {worst:.3e}")
    return adj.real, sym3, sym4.real
