"""Hecke-eigenvalue datasets: TSV ingest/export, Sato-Tate synthesis, statistics.

A dataset stores one row per unramified prime p (p does not divide the level)
as three parallel arrays.  Statistics are computed vectorised from those
arrays; ``mapping()`` materialises ``LocalPrimeData`` records for the
sequence code in ``multfunc``.

Real Maass-form data (trivial character, level 1) uses the same TSV schema.
Dihedral or Artin type forms are not detected: nothing at the level of a
finite table of eigenvalues identifies them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dde import SigmaConstants, ramanujan_prime_bound, sigma_constants
from .errors import (
    DomainError,
    IncompleteCoverage,
    OrderError,
    ParseError,
    ValidationError,
)
from .hecke import (
    IMAG_TOL,
    LocalPrimeData,
    _is_prime,
    lift_arrays,
    satake_from_lambda,
    sym_coefficient_prime_power,
)
from .sieve import PRIME_LIMIT_GUARD, PrimeTable, primes_up_to

HEADER = ("p", "lambda_re", "lambda_im", "chi_re", "chi_im")
# tolerance for |chi| = 1 and lambda = chi conj(lambda) on ingest
INGEST_TOL = 1e-6
U_BOUNDARY = 35.0**2


def _fmt(x: float) -> str:
    # 17 significant digits: exact float round trip
    return f"{x:.16e}"


@dataclass(frozen=True, eq=False)
class EigenDataset:
    level: int
    t_phi: float
    p: np.ndarray
    lam: np.ndarray
    chi: np.ndarray
    source: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=np.int64))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=complex))
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=complex))
        if self.level < 1:
            raise ValidationError(f"level must be >= 1, got {self.level}")
        if not (len(self.p) == len(self.lam) == len(self.chi)):
            raise ValidationError("p, lam and chi must have equal length")
        _validate_rows(self.p, self.lam, self.chi, self.level, IMAG_TOL)

    @classmethod
    def from_records(cls, level: int, t_phi: float, records: Iterable[LocalPrimeData],
                     source: str = "") -> "EigenDataset":
        recs = list(records)
        return cls(level, t_phi, [r.p for r in recs], [complex(r.lam) for r in recs],
                   [complex(r.chi) for r in recs], source)

    def __len__(self):
        return len(self.p)

    @property
    def records(self) -> tuple:
        return tuple(self.mapping().values())

    def mapping(self, upto: float | None = None) -> dict:
        """{p: LocalPrimeData} for the rows with p <= upto (all rows by default)."""
        n = len(self.p) if upto is None else int(np.searchsorted(self.p, math.floor(upto), side="right"))
        return {int(q): LocalPrimeData(int(q), complex(l), complex(c))
                for q, l, c in zip(self.p[:n], self.lam[:n], self.chi[:n])}

    def lifts(self):
        """Vectorised (A, A3, A4) over all rows, computed once."""
        if "lifts" not in self._cache:
            self._cache["lifts"] = lift_arrays(self.lam, self.chi)
        return self._cache["lifts"]


def _validate_rows(p, lam, chi, level, tol, lines=None):
    def where(i):
        return None if lines is None else lines[i]

    if len(p) == 0:
        return
    if p[0] < 2:
        raise ValidationError(f"p={p[0]} is not prime", where(0))
    bad = np.nonzero(np.diff(p) <= 0)[0]
    if len(bad):
        i = int(bad[0]) + 1
        raise OrderError(f"p={p[i]} does not exceed previous p={p[i - 1]}", where(i))
    top = int(p[-1])
    if top <= PRIME_LIMIT_GUARD:
        is_p = np.isin(p, primes_up_to(max(top, 2)).primes)
    else:
        is_p = np.array([_is_prime(int(q)) for q in p])
    if not is_p.all():
        i = int(np.argmin(is_p))
        raise ValidationError(f"p={p[i]} is not prime", where(i))
    div = level % p == 0
    if div.any():
        i = int(np.argmax(div))
        raise ValidationError(f"p={p[i]} divides the level {level}", where(i))
    finite = np.isfinite(lam) & np.isfinite(chi)
    if not finite.all():
        i = int(np.argmin(finite))
        raise ValidationError("non-finite value", where(i))
    off = np.abs(np.abs(chi) - 1.0) > tol
    if off.any():
        i = int(np.argmax(off))
        raise ValidationError(f"|chi(p)| = {abs(chi[i])!r} at p={p[i]}", where(i))
    off = np.abs(lam - chi * np.conj(lam)) > tol
    if off.any():
        i = int(np.argmax(off))
        raise ValidationError(f"lambda != chi*conj(lambda) at p={p[i]}", where(i))


def _project(lam, chi):
    """Snap rows that are off by more than IMAG_TOL back onto |chi| = 1, lambda = chi conj(lambda)."""
    lam = lam.copy()
    chi = chi.copy()
    bad = (np.abs(np.abs(chi) - 1.0) > IMAG_TOL) | (np.abs(lam - chi * np.conj(lam)) > IMAG_TOL)
    chi[bad] = chi[bad] / np.abs(chi[bad])
    lam[bad] = 0.5 * (lam[bad] + chi[bad] * np.conj(lam[bad]))
    return lam, chi


def ingest(path, format: str = "tsv") -> EigenDataset:
    if format != "tsv":
        raise DomainError(f"unsupported dataset format {format!r}")
    meta = {}
    header_seen = False
    lines, ps, vals = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    key = key.strip()
                    if key in ("level", "t_phi") and ps:
                        raise ParseError(f"metadata {key!r} after data rows", lineno)
                    meta[key] = (value.strip(), lineno)
                continue
            if not header_seen:
                if tuple(f.strip() for f in line.split("\t")) != HEADER:
                    raise ParseError(f"expected header {chr(9).join(HEADER)!r}", lineno)
                header_seen = True
                for key in ("level", "t_phi"):
                    if key not in meta:
                        raise ParseError(f"missing '# {key}=' before data", lineno)
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ParseError(f"expected 5 fields, got {len(fields)}", lineno)
            try:
                ps.append(int(fields[0]))
                vals.append([float(f) for f in fields[1:]])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            lines.append(lineno)
    if not header_seen:
        raise ParseError("no header line")
    try:
        level = int(meta["level"][0])
    except ValueError:
        raise ParseError(f"bad level {meta['level'][0]!r}", meta["level"][1]) from None
    try:
        t_phi = float(meta["t_phi"][0])
    except ValueError:
        raise ParseError(f"bad t_phi {meta['t_phi'][0]!r}", meta["t_phi"][1]) from None
    if level < 1:
        raise ValidationError(f"level must be >= 1, got {level}", meta["level"][1])
    p = np.array(ps, dtype=np.int64)
    v = np.array(vals, dtype=float).reshape(-1, 4)
    lam = v[:, 0] + 1j * v[:, 1]
    chi = v[:, 2] + 1j * v[:, 3]
    _validate_rows(p, lam, chi, level, INGEST_TOL, lines)
    lam, chi = _project(lam, chi)
    source = meta.get("source", (str(path), 0))[0]
    return EigenDataset(level, t_phi, p, lam, chi, source)


def export(ds: EigenDataset, path) -> None:
    out = [f"# level={ds.level}", f"# t_phi={_fmt(ds.t_phi)}"]
    if ds.source:
        out.append(f"# source={ds.source}")
    out.append("\t".join(HEADER))
    for q, l, c in zip(ds.p.tolist(), ds.lam.tolist(), ds.chi.tolist()):
        out.append("\t".join((str(q), _fmt(l.real), _fmt(l.imag), _fmt(c.real), _fmt(c.imag))))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


# --- synthesis ---------------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniform(seed: int, p: np.ndarray, attempt: int, stream: int) -> np.ndarray:
    """Uniform [0,1) doubles, a pure function of (seed, p, attempt, stream)."""
    with np.errstate(over="ignore"):
        key = _mix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
        ctr = p.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        ctr = ctr + np.uint64((attempt << 1) | stream) * np.uint64(0xD1B54A32D192ED03)
        z = _mix64(_mix64(ctr ^ key) + key)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class SyntheticConfig:
    prime_limit: int
    seed: int
    violations: Sequence[tuple] = ()

    def __post_init__(self):
        if self.prime_limit < 2:
            raise DomainError("prime_limit must be >= 2")
        for q, lam in self.violations:
            if not _is_prime(int(q)):
                raise ValidationError(f"override at non-prime p={q}")
            if not isinstance(lam, (int, float)) or not abs(lam) > 2:
                raise ValidationError(f"override at p={q} must be real with |lambda| > 2, got {lam!r}")


def sato_tate_angles(seed: int, p: np.ndarray) -> np.ndarray:
    """theta in [0, pi] with density (2/pi) sin^2, by rejection from the uniform proposal."""
    theta = np.empty(len(p))
    todo = np.arange(len(p))
    attempt = 0
    while len(todo):
        q = p[todo]
        th = math.pi * _uniform(seed, q, attempt, 0)
        ok = _uniform(seed, q, attempt, 1) <= np.sin(th) ** 2
        theta[todo[ok]] = th[ok]
        todo = todo[~ok]
        attempt += 1
    return theta


def synthesize_sato_tate(config: SyntheticConfig, table: PrimeTable | None = None) -> EigenDataset:
    if table is None:
        table = primes_up_to(config.prime_limit)
    p = table.up_to(config.prime_limit)
    lam = 2.0 * np.cos(sato_tate_angles(config.seed, p))
    for q, val in config.violations:
        i = int(np.searchsorted(p, q))
        if i == len(p) or p[i] != q:
            raise ValidationError(f"override at p={q} outside the prime range <= {config.prime_limit}")
        lam[i] = float(val)
    src = f"sato-tate seed={config.seed} limit={config.prime_limit}"
    if config.violations:
        src += " violations=" + ",".join(f"{q}:{v!r}" for q, v in config.violations)
    return EigenDataset(1, 0.0, p, lam.astype(complex), np.ones(len(p), dtype=complex), src)


# --- statistics --------------------------------------------------------------

def _covered(ds: EigenDataset, X: float, table: PrimeTable | None) -> int:
    """Number of rows with p <= X, after checking every prime p <= X, p not dividing N, is present."""
    if X < 2:
        return 0
    n = int(np.searchsorted(ds.p, math.floor(X), side="right"))
    if table is None or table.limit < X:
        table = primes_up_to(int(X))
    want = table.up_to(X)
    want = want[ds.level % want != 0]
    if n != len(want) or not np.array_equal(ds.p[:n], want):
        missing = np.setdiff1d(want, ds.p[:n])
        first = int(missing[0]) if len(missing) else None
        raise IncompleteCoverage(f"dataset does not cover all primes <= {X}; first missing p={first}")
    return n


@dataclass(frozen=True)
class DensityReport:
    X: float
    pi_X: int
    ramanujan_count: int
    mean_u: float
    mean_nine: float
    nonram_fraction_bound: float

    @property
    def ramanujan_fraction(self) -> float:
        return self.ramanujan_count / self.pi_X

    @property
    def identity_holds(self) -> bool:
        return self.ramanujan_fraction >= 1.0 - self.nonram_fraction_bound


def density_report(ds: EigenDataset, X: float, tol: float = IMAG_TOL,
                   table: PrimeTable | None = None) -> DensityReport:
    """Ramanujan count and the mean U(p), (1+3A)^2 statistics over p <= X."""
    n = _covered(ds, X, table)
    if n == 0:
        raise DomainError(f"no primes <= {X} in the dataset")
    A, _, A4 = ds.lifts()
    A, A4 = A[:n], A4[:n]
    u = (1.0 + 3.0 * A + 5.0 * A4) ** 2
    nine = (1.0 + 3.0 * A) ** 2
    ram = int(np.count_nonzero(np.abs(ds.lam[:n]) <= 2.0 + tol))
    mean_u = float(np.sum(u)) / n
    return DensityReport(X, n, ram, mean_u, float(np.sum(nine)) / n, mean_u / U_BOUNDARY)


@dataclass(frozen=True)
class LeastPrimeReport:
    p: int | None
    bound: float
    within_bound: bool

    @property
    def found(self) -> bool:
        return self.p is not None


def least_ramanujan_prime(ds: EigenDataset, tol: float = IMAG_TOL,
                          constants: SigmaConstants | None = None) -> LeastPrimeReport:
    """Smallest p with |lambda(p)| <= 2 next to (N(1+|t|))^(1/u0), implied constant 1."""
    if len(ds) == 0:
        raise DomainError("empty dataset")
    if constants is None:
        constants = sigma_constants()
    bound = ramanujan_prime_bound(ds.level, ds.t_phi, constants)
    ok = np.abs(ds.lam) <= 2.0 + tol
    if not ok.any():
        return LeastPrimeReport(None, bound, False)
    p = int(ds.p[int(np.argmax(ok))])
    return LeastPrimeReport(p, bound, p <= bound)


@dataclass(frozen=True)
class PNTSums:
    X: float
    sum_A: float
    sum_A4: float
    lambda_sym3_sq: float
    lambda_sym4_sq: float

    @property
    def sum_A_normalized(self) -> float:
        return self.sum_A / (self.X / math.log(self.X))

    @property
    def sum_A4_normalized(self) -> float:
        return self.sum_A4 / (self.X / math.log(self.X))

    @property
    def lambda_sym3_sq_normalized(self) -> float:
        return self.lambda_sym3_sq / self.X

    @property
    def lambda_sym4_sq_normalized(self) -> float:
        return self.lambda_sym4_sq / self.X


def pnt_partial_sums(ds: EigenDataset, X: float, table: PrimeTable | None = None) -> PNTSums:
    """Prime sums of A, A4 and Lambda-weighted |A3(n)|^2, |A4(n)|^2 over n = p^k <= X.

    Prime powers of primes dividing the level are skipped.
    """
    if X < 2:
        raise DomainError("X must be >= 2")
    n = _covered(ds, X, table)
    A, A3, A4 = ds.lifts()
    logp = np.log(ds.p[:n].astype(float))
    s3 = float(np.sum(logp * np.abs(A3[:n]) ** 2))
    s4 = float(np.sum(logp * A4[:n] ** 2))
    for i in range(n):
        q = int(ds.p[i])
        if q * q > X:
            break
        sp = satake_from_lambda(ds.lam[i], ds.chi[i])
        k, qk = 2, q * q
        while qk <= X:
            s3 += logp[i] * abs(sym_coefficient_prime_power(sp, "sym3", k)) ** 2
            s4 += logp[i] * abs(sym_coefficient_prime_power(sp, "sym4", k)) ** 2
            k += 1
            qk *= q
    return PNTSums(X, float(np.sum(A[:n])), float(np.sum(A4[:n])), float(s3), float(s4))


@dataclass(frozen=True)
class LiftSquareMeans:
    X: float
    pi_X: int
    sup3: float
    sup4: float

    @property
    def flagged(self) -> bool:
        """Above 1 by more than five Sato-Tate standard errors (variances 3 and 4)."""
        if self.pi_X == 0:
            return False
        return (self.sup3 > 1 + 5 * math.sqrt(3 / self.pi_X)
                or self.sup4 > 1 + 5 * math.sqrt(4 / self.pi_X))


def remark_density_inequality(ds: EigenDataset, X: float, table: PrimeTable | None = None) -> LiftSquareMeans:
    n = _covered(ds, X, table)
    if n == 0:
        return LiftSquareMeans(X, 0, 0.0, 0.0)
    _, A3, A4 = ds.lifts()
    return LiftSquareMeans(X, n, float(np.sum(np.abs(A3[:n]) ** 2)) / n, float(np.sum(A4[:n] ** 2)) / n)
