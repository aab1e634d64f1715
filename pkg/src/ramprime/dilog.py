"""Real dilogarithm Li2(x) for x <= 1."""
import math

from .errors import DomainError

PI2_6 = math.pi**2 / 6


def _series(x: float) -> float:
    # |x| <= 1/2: terms shrink at least like 2^-k / k^2
    total = 0.0
    term = x
    k = 1
    while True:
        add = term / (k * k)
        total += add
        if abs(add) <= 1e-18 * max(abs(total), 1e-300):
            return total
        k += 1
        term *= x
        if k > 200:
            return total


def dilog(x: float) -> float:
    """Li2(x) = sum_{k>=1} x^k / k^2, continued to x < -1.

    Uses the series on [-1/2, 1/2], reflection on (1/2, 1], Landen's
    identity on [-1, -1/2) and inversion below -1.
    """
    x = float(x)
    if math.isnan(x) or x > 1.0:
        raise DomainError(f"dilog({x!r}) is complex-valued; real branch needs x <= 1")
    if x == 1.0:
        return PI2_6
    if x == 0.0:
        return 0.0
    if -0.5 <= x <= 0.5:
        return _series(x)
    if x > 0.5:
        return PI2_6 - math.log(x) * math.log1p(-x) - _series(1.0 - x)
    if x >= -1.0:
        # Landen: x/(x-1) lands in [1/3, 1/2)
        return -_series(x / (x - 1.0)) - 0.5 * math.log1p(-x) ** 2
    return -PI2_6 - 0.5 * math.log(-x) ** 2 - dilog(1.0 / x)
