"""Command-line entry point: ``ramprime <subcommand> [flags]``.

Output is CSV with a header row by default; ``--format json`` emits a list of
objects with the same field names, ``--format kv`` one ``key=value,...`` line
per row.  Exit codes: 0 success, 2 invalid input, 3 computation failure,
64 usage error.

Solver settings come from an optional key=value config file (``--config`` or
$RS_CONFIG); flags override it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import dataset as dsmod
from .dde import (
    DEFAULT_H,
    buchstab_problem,
    sigma_constants,
    sigma_problem,
    solve,
    steps_per_unit,
)
from .dilog import dilog
from .errors import ComputationError, DomainError, InputError, LimitExceeded, ParseError
from .hecke import (
    IMAG_TOL,
    LocalPrimeData,
    lift_coefficients,
    nonramanujan_growth,
    u_statistic,
    u_statistic_expanded,
)
from .multfunc import HSpec, c_constant, local_factor_identity_check, mean_value_report, s2_sum, sigma_value
from .sieve import (
    PRIME_LIMIT_GUARD,
    phi_band,
    phi_band_log,
    phi_rough,
    phi_rough_asymptotic,
    primes_up_to,
    sieveb_bound_report,
)

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_USAGE = 0, 2, 3, 64
FORMATS = ("csv", "json", "kv")


@dataclass(frozen=True)
class RunConfig:
    step_h: float = DEFAULT_H
    ramanujan_tol: float = IMAG_TOL
    output_format: str = "csv"
    prime_limit_guard: int = PRIME_LIMIT_GUARD
    digits: int = 17

    def validate(self) -> "RunConfig":
        steps_per_unit(self.step_h)
        if not self.ramanujan_tol > 0:
            raise DomainError("ramanujan_tol must be positive")
        if self.output_format not in FORMATS:
            raise DomainError(f"output_format must be one of {FORMATS}")
        if not 1 <= self.prime_limit_guard <= PRIME_LIMIT_GUARD:
            raise DomainError(f"prime_limit_guard must lie in [1, {PRIME_LIMIT_GUARD}]")
        if not 1 <= self.digits <= 17:
            raise DomainError("digits must lie in [1, 17]")
        return self


def load_config(path) -> RunConfig:
    types = {f.name: f.type for f in fields(RunConfig)}
    conv = {"float": float, "int": int, "str": str}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise ParseError(f"bad config entry {raw.strip()!r}", lineno)
            try:
                values[key] = conv[types[key]](value.strip())
            except ValueError:
                raise ParseError(f"bad value for {key}: {value.strip()!r}", lineno) from None
    return RunConfig(**values)


# --- output ------------------------------------------------------------------

def _cell(v, digits):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{digits}g}"
    return str(v)


def _json_value(v, digits):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.{digits}g}")
    return v


def render(rows, cfg: RunConfig) -> str:
    if cfg.output_format == "json":
        return json.dumps([{k: _json_value(v, cfg.digits) for k, v in r.items()} for r in rows]) + "\n"
    if cfg.output_format == "kv":
        return "".join(",".join(f"{k}={_cell(v, cfg.digits)}" for k, v in r.items()) + "\n" for r in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0].keys()))
    for r in rows:
        w.writerow([_cell(v, cfg.digits) for v in r.values()])
    return buf.getvalue()


# --- subcommands -------------------------------------------------------------

def _table(cfg, limit):
    limit = max(2, int(math.ceil(limit)))
    if limit > cfg.prime_limit_guard:
        raise LimitExceeded(f"needs primes up to {limit}, above prime_limit_guard {cfg.prime_limit_guard}")
    return primes_up_to(limit)


def cmd_sigma_zero(a, cfg):
    c = sigma_constants(cfg.step_h)
    return [{"u0": c.u0, "exponent": c.exponent}]


def cmd_sigma_eval(a, cfg):
    return [{"u": a.u, "sigma": sigma_value(a.u, cfg.step_h)}]


def cmd_buchstab(a, cfg):
    if a.u < 1:
        raise DomainError("omega is defined for u >= 1")
    grid = solve(buchstab_problem(), max(2.0, float(math.ceil(a.u))), cfg.step_h)
    return [{"u": a.u, "omega": float(grid(a.u))}]


def cmd_dilog(a, cfg):
    return [{"x": a.x, "li2": dilog(a.x)}]


def cmd_grid(a, cfg):
    prob = sigma_problem() if a.problem == "sigma" else buchstab_problem()
    g = solve(prob, a.u_end, cfg.step_h)
    step = max(1, a.every)
    return [{"u": float(u), "y": float(y)} for u, y in zip(g.nodes[::step], g.y[::step])]


def cmd_sieve_count(a, cfg):
    t = _table(cfg, a.x)
    row = {"x": a.x, "y": a.y, "z": a.z,
           "phi_band": phi_band(a.x, a.y, a.z, t),
           "phi_rough_z": phi_rough(a.x, a.z, t),
           "phi_rough_y": phi_rough(a.x, a.y, t)}
    if a.log_weighted:
        r = sieveb_bound_report(a.x, a.y, a.z, t)
        row.update(band_log=phi_band_log(a.x, a.y, a.z, t), main_term=r.main, in_range=r.in_range)
    if a.asymptotic:
        row["asymptotic_rough_z"] = phi_rough_asymptotic(a.x, a.z)
    return [row]


def cmd_mean_value(a, cfg):
    spec = HSpec(a.y, a.level)
    t = _table(cfg, a.y**a.u * (1 + 1e-12))
    r = mean_value_report(spec, a.u, t)
    return [{"y": r.y, "u": r.u, "level": r.N, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio}]


def cmd_c_constant(a, cfg):
    r = c_constant(a.level, a.cutoff, _table(cfg, a.cutoff))
    return [{"level": r.N, "cutoff": r.P, "value": r.value, "tail_bound": r.tail_bound}]


def cmd_density(a, cfg):
    ds = dsmod.ingest(a.input)
    r = dsmod.density_report(ds, a.x, cfg.ramanujan_tol, _table(cfg, a.x))
    return [{"X": r.X, "pi_X": r.pi_X, "ramanujan_count": r.ramanujan_count,
             "ramanujan_fraction": r.ramanujan_fraction, "mean_u": r.mean_u, "mean_nine": r.mean_nine,
             "nonram_fraction_bound": r.nonram_fraction_bound, "identity_holds": r.identity_holds}]


def _parse_violations(text):
    out = []
    if not text:
        return out
    for item in text.split(","):
        p, sep, lam = item.partition(":")
        try:
            if not sep:
                raise ValueError
            out.append((int(p), float(lam)))
        except ValueError:
            raise DomainError(f"bad violation {item!r}, expected p:lambda") from None
    return out


def cmd_synth(a, cfg):
    conf = dsmod.SyntheticConfig(a.limit, a.seed, _parse_violations(a.violate))
    ds = dsmod.synthesize_sato_tate(conf, _table(cfg, a.limit))
    dsmod.export(ds, a.out)
    return [{"out": a.out, "records": len(ds), "limit": a.limit, "seed": a.seed}]


def cmd_least_prime(a, cfg):
    ds = dsmod.ingest(a.input)
    r = dsmod.least_ramanujan_prime(ds, cfg.ramanujan_tol, sigma_constants(cfg.step_h))
    return [{"p": r.p, "found": r.found, "bound": r.bound, "within_bound": r.within_bound,
             "level": ds.level, "t_phi": ds.t_phi}]


def cmd_pnt_sums(a, cfg):
    ds = dsmod.ingest(a.input)
    r = dsmod.pnt_partial_sums(ds, a.x, _table(cfg, a.x))
    return [{"X": r.X, "sum_A": r.sum_A, "sum_A4": r.sum_A4, "lambda_sym3_sq": r.lambda_sym3_sq,
             "lambda_sym4_sq": r.lambda_sym4_sq, "sum_A_normalized": r.sum_A_normalized,
             "sum_A4_normalized": r.sum_A4_normalized,
             "lambda_sym3_sq_normalized": r.lambda_sym3_sq_normalized,
             "lambda_sym4_sq_normalized": r.lambda_sym4_sq_normalized}]


def cmd_lift_means(a, cfg):
    ds = dsmod.ingest(a.input)
    r = dsmod.remark_density_inequality(ds, a.x, _table(cfg, a.x))
    return [{"X": r.X, "pi_X": r.pi_X, "sup3": r.sup3, "sup4": r.sup4, "flagged": r.flagged}]


def cmd_s_sums(a, cfg):
    t = _table(cfg, a.x)
    if a.input:
        data = dsmod.ingest(a.input).mapping(upto=a.x)
    else:
        ds = dsmod.synthesize_sato_tate(dsmod.SyntheticConfig(t.limit, a.seed), t)
        data = ds.mapping()
    r = s2_sum(data, a.x, t)
    return [{"x": r.x, "S": r.S, "S_plus": r.S_plus, "S_minus": r.S_minus}]


def cmd_identity_check(a, cfg):
    if a.trials < 1:
        raise DomainError("trials must be >= 1")
    rng = np.random.default_rng(a.seed)
    worst = {"quadratic": 0.0, "product": 0.0, "u_expanded": 0.0, "growth_margin": math.inf, "euler": 0.0}
    for _ in range(a.trials):
        psi = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(0, 6)
        d = LocalPrimeData(2, complex(math.cos(psi / 2), math.sin(psi / 2)) * r, complex(math.cos(psi), math.sin(psi)))
        c = lift_coefficients(d)
        A, A3, A4 = c.a_adj, c.a_sym3, c.a_sym4

        def rel(x, y):
            return abs(x - y) / max(1.0, abs(x), abs(y))

        worst["quadratic"] = max(worst["quadratic"], rel(A * A, A4 + A + 1))
        worst["product"] = max(worst["product"], rel(A * A4, abs(A3) ** 2 - 1))
        worst["u_expanded"] = max(worst["u_expanded"], rel(u_statistic(d), u_statistic_expanded(c)))
        if r > 2:
            for n in range(1, 6):
                worst["growth_margin"] = min(worst["growth_margin"], nonramanujan_growth(d, n) - (2 * n + 1))
        theta = rng.uniform(0, math.pi)
        sp = LocalPrimeData(2, 2 * math.cos(theta)).satake
        worst["euler"] = max(worst["euler"], local_factor_identity_check(sp, 30))
    ok = (worst["quadratic"] < 1e-8 and worst["product"] < 1e-8 and worst["u_expanded"] < 1e-8
          and worst["euler"] < 1e-9 and worst["growth_margin"] > 0)
    growth = None if worst["growth_margin"] == math.inf else worst["growth_margin"]
    return [{"trials": a.trials, "max_quadratic": worst["quadratic"], "max_product": worst["product"],
             "max_u_expanded": worst["u_expanded"], "min_growth_margin": growth,
             "max_euler": worst["euler"], "passed": ok}]


# --- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("output and solver options")
    g.add_argument("--format", choices=FORMATS, default=None, help="output format (default csv)")
    g.add_argument("--digits", type=int, default=None, help="significant digits for reals (default 17)")
    g.add_argument("--config", default=None, help="key=value config file (default $RS_CONFIG)")
    g.add_argument("--step-h", type=float, default=None, help="delay-ODE step, must divide 1")
    g.add_argument("--tol", type=float, default=None, help="Ramanujan classification tolerance")

    parser = _Parser(prog="ramprime", description="Ramanujan-prime density and sieve computations.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help):
        p = sub.add_parser(name, parents=[common], help=help, description=help)
        p.set_defaults(func=func)
        return p

    add("sigma-zero", cmd_sigma_zero, "smallest zero u0 of sigma and the exponent 1/u0")
    add("sigma-eval", cmd_sigma_eval, "sigma(u)").add_argument("--u", type=float, required=True)
    add("buchstab", cmd_buchstab, "Buchstab omega(u), u >= 1").add_argument("--u", type=float, required=True)
    add("dilog", cmd_dilog, "real dilogarithm Li2(x), x <= 1").add_argument("--x", type=float, required=True)

    p = add("grid", cmd_grid, "dump a delay-ODE solution grid")
    p.add_argument("--problem", choices=("sigma", "buchstab"), required=True)
    p.add_argument("--u-end", type=float, required=True)
    p.add_argument("--every", type=int, default=1, help="emit every k-th node")

    p = add("sieve-count", cmd_sieve_count, "exact Phi(X,Y,Z), Phi(X,Z), Phi(X,Y)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--log-weighted", action="store_true", help="add the log(X/l)-weighted band sum")
    p.add_argument("--asymptotic", action="store_true", help="add the Buchstab main term for Phi(X,Z)")

    p = add("mean-value", cmd_mean_value, "partial sum of h up to y^u against its main term")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--level", type=int, default=1)

    p = add("c-constant", cmd_c_constant, "truncated Euler product c(N) with tail bound")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--cutoff", type=float, required=True)

    p = add("density", cmd_density, "Ramanujan density statistics of a dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--x", type=float, required=True)

    p = add("synth", cmd_synth, "write a Sato-Tate synthetic dataset")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--violate", default="", help="overrides p:lambda,... with |lambda| > 2")
    p.add_argument("--out", required=True)

    add("least-prime", cmd_least_prime, "least Ramanujan prime and the conductor bound").add_argument(
        "--input", required=True)

    p = add("pnt-sums", cmd_pnt_sums, "prime sums of A, A4 and Lambda-weighted lift coefficients")
    p.add_argument("--input", required=True)
    p.add_argument("--x", type=float, required=True)

    p = add("lift-means", cmd_lift_means, "mean |A3(p)|^2 and |A4(p)|^2 over p <= X")
    p.add_argument("--input", required=True)
    p.add_argument("--x", type=float, required=True)

    p = add("s-sums", cmd_s_sums, "sum of lambda(d^2) log(x/d) over d < x, split by sign")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--input", default=None, help="dataset (default: Sato-Tate synthetic)")
    p.add_argument("--seed", type=int, default=0, help="seed when no --input is given")

    p = add("identity-check", cmd_identity_check, "random checks of the local lift identities")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config(args, environ) -> RunConfig:
    path = args.config or environ.get("RS_CONFIG")
    cfg = load_config(path) if path else RunConfig()
    over = {k: v for k, v in (("output_format", args.format), ("digits", args.digits),
                              ("step_h", args.step_h), ("ramanujan_tol", args.tol)) if v is not None}
    return replace(cfg, **over).validate()


def main(argv=None, environ=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args, os.environ if environ is None else environ)
        rows = args.func(args, cfg)
    except (InputError, OSError) as exc:
        print(f"ramprime: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"ramprime: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    sys.stdout.write(render(rows, cfg))
    if args.command == "identity-check" and not rows[0]["passed"]:
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
