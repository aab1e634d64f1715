"""Linear delay differential equations y'(u) = a(u) y(u) + b(u) y(u-1).

Solved by the method of steps with classical RK4 on a uniform grid whose
step divides 1, so u-1 is always a grid node at full steps.  Half-step
delayed values come from the cubic Hermite interpolant built on the stored
(y, y') pairs; inside the initial segment they are evaluated exactly.

Two instances matter here: the sieve density sigma(u) (u^2 on (0, 1]) and
the Buchstab function omega(u) (1/u on [1, 2]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .dilog import dilog
from .errors import DomainError, NoZeroFound, RangeError, StepSizeInvalid

DEFAULT_H = 1e-4


@dataclass(frozen=True)
class DelayODEProblem:
    """y' = a(u) y + b(u) y(u-1) for u > u_start, y = initial_segment on (u_start-1, u_start].

    ``a``, ``b``, ``initial_segment`` and ``initial_derivative`` must accept
    numpy arrays.
    """

    a: Callable
    b: Callable
    initial_segment: Callable
    initial_derivative: Callable
    u_start: float
    name: str = ""


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """Dense solution on [u_start, u_end] = [problem.u_start - 1, u_end].

    ``y`` and ``dy`` hold the solution and its derivative at the nodes
    ``u_start + i*h``.  At the node problem.u_start the derivative stored is
    the right-hand (ODE) value.
    """

    problem: DelayODEProblem
    u_start: float
    u_end: float
    steps_per_unit: int
    y: np.ndarray
    dy: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.steps_per_unit

    @property
    def nodes(self) -> np.ndarray:
        return self.u_start + np.arange(len(self.y)) / self.steps_per_unit

    def __len__(self):
        return len(self.y)

    def __call__(self, u):
        """Evaluate the solution at ``u`` (scalar or array) by Hermite interpolation."""
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u < self.u_start - 1e-12) or np.any(u > self.u_end + 1e-12):
            raise RangeError(f"u outside the grid range [{self.u_start}, {self.u_end}]")
        out = np.empty_like(u)
        hist = u <= self.problem.u_start
        out[hist] = self.problem.initial_segment(u[hist])
        rest = ~hist
        if np.any(rest):
            out[rest] = _hermite(self, u[rest])
        return out[0] if scalar else out

    def to_csv(self, digits: int = 17) -> str:
        lines = ["u,y"]
        for uu, yy in zip(self.nodes, self.y):
            lines.append(f"{uu:.{digits}g},{yy:.{digits}g}")
        return "\n".join(lines) + "\n"


def _hermite(grid: SolutionGrid, u: np.ndarray) -> np.ndarray:
    m = grid.steps_per_unit
    h = 1.0 / m
    pos = (u - grid.u_start) * m
    j = np.clip(np.floor(pos).astype(np.int64), 0, len(grid.y) - 2)
    t = pos - j
    y0, y1 = grid.y[j], grid.y[j + 1]
    d0, d1 = grid.dy[j], grid.dy[j + 1]
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


def steps_per_unit(h: float) -> int:
    if not h > 0:
        raise StepSizeInvalid(f"step h={h!r} must be positive")
    m = round(1.0 / h)
    if m < 1 or abs(m * h - 1.0) > 1e-12:
        raise StepSizeInvalid(f"step h={h!r} does not divide 1")
    return m


def solve(problem: DelayODEProblem, u_end: float, h: float = DEFAULT_H) -> SolutionGrid:
    m = steps_per_unit(h)
    if u_end < problem.u_start:
        raise RangeError(f"u_end={u_end} is before u_start={problem.u_start}")
    lo = problem.u_start - 1.0
    n = int(math.ceil((u_end - lo) * m - 1e-9))
    u = lo + np.arange(n + 1) / m
    y = np.empty(n + 1)
    dy = np.empty(n + 1)

    y[: m + 1] = problem.initial_segment(u[: m + 1])
    dy[:m] = problem.initial_derivative(u[:m])
    dy[m] = problem.a(u[m]) * y[m] + problem.b(u[m]) * y[0]

    hh = 1.0 / m
    i = m
    while i < n:
        # one unit interval (or the remainder): nodes i..stop, delayed nodes i-m..stop-m
        stop = min(i + m, n)
        k = np.arange(i, stop)
        u0 = u[k]
        um = u0 + 0.5 * hh
        u1 = u[k + 1]
        lag0 = y[k - m]
        lag1 = y[k + 1 - m]
        if i == m:
            lagm = problem.initial_segment(um - 1.0)
        else:
            lagm = 0.5 * (lag0 + lag1) + hh / 8.0 * (dy[k - m] - dy[k + 1 - m])
        a0, am, a1 = problem.a(u0), problem.a(um), problem.a(u1)
        f0 = problem.b(u0) * lag0
        fm = problem.b(um) * lagm
        f1 = problem.b(u1) * lag1
        _rk4_linear(y, dy, i, stop, hh, a0, am, a1, f0, fm, f1)
        i = stop
    return SolutionGrid(problem, lo, float(u[-1]), m, y, dy)


def _rk4_linear(y, dy, start, stop, h, a0, am, a1, f0, fm, f1):
    # scalar loop over one unit; all forcing terms are precomputed
    yi = float(y[start])
    a0 = a0.tolist(); am = am.tolist(); a1 = a1.tolist()
    f0 = f0.tolist(); fm = fm.tolist(); f1 = f1.tolist()
    half = 0.5 * h
    for j in range(stop - start):
        k1 = a0[j] * yi + f0[j]
        k2 = am[j] * (yi + half * k1) + fm[j]
        k3 = am[j] * (yi + half * k2) + fm[j]
        k4 = a1[j] * (yi + h * k3) + f1[j]
        yi = yi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y[start + j + 1] = yi
        dy[start + j + 1] = a1[j] * yi + f1[j]


# sigma'(u) = 2 sigma(u)/u - 4 sigma(u-1)/u  from  (u^-2 sigma)' = -4 sigma(u-1)/u^3
def sigma_problem() -> DelayODEProblem:
    return DelayODEProblem(
        a=lambda u: 2.0 / u,
        b=lambda u: -4.0 / u,
        initial_segment=lambda u: np.asarray(u, dtype=float) ** 2,
        initial_derivative=lambda u: 2.0 * np.asarray(u, dtype=float),
        u_start=1.0,
        name="sigma",
    )


# omega'(u) = -omega(u)/u + omega(u-1)/u  from  (u omega)' = omega(u-1)
def buchstab_problem() -> DelayODEProblem:
    return DelayODEProblem(
        a=lambda u: -1.0 / u,
        b=lambda u: 1.0 / u,
        initial_segment=lambda u: 1.0 / np.asarray(u, dtype=float),
        initial_derivative=lambda u: -1.0 / np.asarray(u, dtype=float) ** 2,
        u_start=2.0,
        name="buchstab",
    )


def sigma_closed_12(u: float) -> float:
    if not 1.0 <= u <= 2.0:
        raise DomainError(f"closed form valid on [1, 2], got u={u}")
    return 7 * u * u - 8 * u + 2 - 4 * u * u * math.log(u)


def sigma_closed_23(u: float) -> float:
    if not 2.0 <= u <= 3.0:
        raise DomainError(f"closed form valid on [2, 3], got u={u}")
    l1 = math.log(u - 1)
    lu = math.log(u)
    u2 = u * u
    return (16 * u2 * dilog(1 - u) + 4 * math.pi**2 * u2 / 3 + 35 * u2 - 24 * u2 * l1
            + 16 * u2 * l1 * lu - 4 * u2 * lu - 80 * u + 32 * u * l1 - 8 * l1 + 34)


@dataclass(frozen=True)
class SigmaConstants:
    u0: float
    exponent: float


def smallest_zero(grid: SolutionGrid, tol: float = 1e-10) -> SigmaConstants:
    """First zero of the solution after problem.u_start, refined by bisection."""
    first = int(round((grid.problem.u_start - grid.u_start) * grid.steps_per_unit)) + 1
    y = grid.y[first:]
    hits = np.nonzero(y <= 0.0)[0]
    if len(hits) == 0 or grid.y[first - 1] <= 0.0:
        raise NoZeroFound(f"no sign change of {grid.problem.name or 'solution'} on the grid")
    j = first + int(hits[0])
    lo, hi = grid.nodes[j - 1], grid.nodes[j]
    if grid.y[j] == 0.0:
        u0 = float(hi)
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = grid(mid)
            if abs(val) < tol * 1e-2 or hi - lo < 1e-15:
                break
            if val > 0:
                lo = mid
            else:
                hi = mid
        u0 = float(0.5 * (lo + hi))
    if abs(grid(u0)) >= tol:
        raise NoZeroFound(f"bisection stalled at u={u0} with residual {grid(u0):.3e}")
    return SigmaConstants(u0, 1.0 / u0)


@lru_cache(maxsize=8)
def sigma_constants(h: float = DEFAULT_H) -> SigmaConstants:
    return smallest_zero(solve(sigma_problem(), 4.0, h))


def section2_exponent(delta: float) -> float:
    """Exponent 1/(1+delta) of y in terms of t when z = y^delta."""
    if not 0.0 < delta < 3.0 / 8.0:
        raise DomainError(f"delta must lie in (0, 3/8), got {delta}")
    return 1.0 / (1.0 + delta)


def ramanujan_prime_bound(N: int, t: float, constants: SigmaConstants) -> float:
    """(N (1+|t|))^(1/u0), the conductor bound with implied constant 1."""
    if N < 1:
        raise DomainError("level N must be >= 1")
    return (N * (1.0 + abs(t))) ** constants.exponent
