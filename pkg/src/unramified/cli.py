"""Command-line interface: ``unramified {dfunc,probs,verify,simulate,integrate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .dseries import (
    d,
    d_chain_form,
    d_star,
    d_subset_form,
    has_only_integer_t_powers,
    igusa_functional_equation_check,
    inversion_check,
    probabilities,
    render,
)
from .experiments import (
    PHI_REGIONS,
    PROBABILITY_OF_KIND,
    DegenerateRateError,
    ExperimentReport,
    SamplingModel,
    ValidationError,
    Z_THRESHOLD,
    estimate_phi_integral,
    reports_to_csv,
    reports_to_jsonl,
    root_target,
    tally_roots,
    utc_timestamp,
)
from .incidence import VerificationResult, divisors, verify_divisor_poset
from .padic import is_prime

EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY, EXIT_STATS = 0, 1, 2, 3
REPORT_DIR_ENV = "UNRAMIFIED_REPORT_DIR"
MAX_DFUNC_N = 60
MAX_SUBSET_FORM_N = 30
MAX_DSTAR_VERIFY_N = 30
MAX_INCIDENCE_DIVISORS = 12
MAX_P = 10 ** 6


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    n: tuple
    p: int | None = None
    samples: int = 100_000
    seed: int = 0
    precision: int = 40
    out: Path | None = None
    format: str = "text"
    scope: str = "all"
    region: str = "all"
    probabilities: bool = False
    workers: int = 1

    def validate(self) -> None:
        if not self.n:
            raise UsageError("empty range for --n")
        if any(k < 1 for k in self.n):
            raise UsageError("n must be positive")
        if self.p is not None:
            if self.p < 2 or self.p > MAX_P or not is_prime(self.p):
                raise UsageError("p must be prime")
        for name in ("samples", "precision", "workers"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")


def parse_range(text: str) -> tuple[int, ...]:
    """``"5"``, ``"1..12"`` or ``"2,3,8"`` (ranges inclusive)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer range: {text!r}") from None
    return tuple(out)


def _int(text: str) -> int:
    try:
        return int(text.replace("_", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unramified", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, n_required=True, p_required=False, stats=False):
        sp.add_argument("--n", type=parse_range, required=n_required, help="degree, range a..b or list")
        sp.add_argument("--p", type=_int, required=p_required, help="prime")
        sp.add_argument("--format", choices=("json", "csv", "text"), default="text")
        sp.add_argument("--out", type=Path, help="output file")
        if stats:
            sp.add_argument("--samples", type=_int, default=100_000)
            sp.add_argument("--seed", type=_int, default=0)
            sp.add_argument("--precision", type=_int, default=40, help="working precision M")
            sp.add_argument("--workers", type=_int, default=1)

    common(sub.add_parser("dfunc", help="print D_n(u, v) and D*_n(t)"))
    common(sub.add_parser("probs", help="exact rho, alpha, beta"), p_required=True)
    v = sub.add_parser("verify", help="exact identity checks")
    v.add_argument("scope", choices=("incidence", "dseries", "all"))
    v.add_argument("range", nargs="?", type=parse_range, help="values of n (same as --n)")
    common(v, n_required=False)
    s = sub.add_parser("simulate", help="Monte Carlo generating-root counts")
    common(s, p_required=True, stats=True)
    s.add_argument("--probabilities", action="store_true", help="also estimate rho, alpha and beta")
    i = sub.add_parser("integrate", help="Monte Carlo integral of phi")
    common(i, p_required=True, stats=True)
    i.add_argument("--region", choices=("OK", "MK", "all"), default="all")
    return parser


def config_from_args(args) -> CliConfig:
    n = args.n
    if args.command == "verify":
        if args.range is not None and n is not None:
            raise UsageError("give the range either positionally or with --n")
        n = args.range if args.range is not None else n
        if n is None:
            n = tuple(range(1, 13)) if args.scope == "dseries" else (4, 6, 8, 12, 30)
    cfg = CliConfig(
        command=args.command,
        n=n,
        p=args.p,
        samples=getattr(args, "samples", 100_000),
        seed=getattr(args, "seed", 0),
        precision=getattr(args, "precision", 40),
        out=args.out,
        format=args.format,
        scope=getattr(args, "scope", "all"),
        region=getattr(args, "region", "all"),
        probabilities=getattr(args, "probabilities", False),
        workers=getattr(args, "workers", 1),
    )
    cfg.validate()
    return cfg


# -- commands -----------------------------------------------------------------


def cmd_dfunc(cfg: CliConfig) -> tuple[int, str]:
    if any(not 1 <= k <= MAX_DFUNC_N for k in cfg.n):
        raise UsageError(f"n must lie in 1..{MAX_DFUNC_N}")
    rows = [{"n": k, "D": render(d(k)), "D*": render(d_star(k))} for k in cfg.n]
    if cfg.format == "json":
        return EXIT_OK, "".join(json.dumps(r) + "\n" for r in rows)
    if cfg.format == "csv":
        return EXIT_OK, _csv(rows, ("n", "D", "D*"))
    lines = []
    for r in rows:
        lines += [f"D_{r['n']} = {r['D']}", f"D*_{r['n']} = {r['D*']}"]
    return EXIT_OK, "\n".join(lines) + "\n"


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_probs(cfg: CliConfig) -> tuple[int, str]:
    rows = []
    for k in cfg.n:
        t = probabilities(k, cfg.p)
        for name in ("rho", "alpha", "beta"):
            val = getattr(t, name)
            rows.append({"n": k, "p": cfg.p, "quantity": name, "num": str(val.numerator),
                         "den": str(val.denominator), "value": f"{float(val):.12f}"})
    if cfg.format == "json":
        return EXIT_OK, "".join(json.dumps(r) + "\n" for r in rows)
    if cfg.format == "csv":
        return EXIT_OK, _csv(rows, ("n", "p", "quantity", "num", "den", "value"))
    lines = []
    for r in rows:
        exact = str(Fraction(int(r["num"]), int(r["den"])))
        lines.append(f"n={r['n']} p={r['p']} {r['quantity']:<5} = {exact:<24} ~ {r['value']}")
    return EXIT_OK, "\n".join(lines) + "\n"


def _dseries_results(ns) -> list[VerificationResult]:
    def run(name, items):
        checked, failures = 0, []
        for label, ok in items:
            checked += 1
            if not ok:
                failures.append(label)
        return VerificationResult(name, checked, failures)

    if any(k > MAX_DFUNC_N for k in ns):
        raise UsageError(f"dseries checks are capped at n = {MAX_DFUNC_N}")
    return [
        run("inversion", ((k, inversion_check(k)) for k in ns)),
        run("chain form", ((k, d(k) == d_chain_form(k)) for k in ns)),
        run("subset form", ((k, d(k) == d_subset_form(k)) for k in ns if k <= MAX_SUBSET_FORM_N)),
        run("D* in t", ((k, has_only_integer_t_powers(k)) for k in ns if k <= MAX_DSTAR_VERIFY_N)),
        run("igusa symmetry", ((k, igusa_functional_equation_check(k, exponent=k * (k - 1))) for k in ns)),
    ]


def _incidence_results(ns) -> list[VerificationResult]:
    out = []
    for k in ns:
        if len(divisors(k)) > MAX_INCIDENCE_DIVISORS:
            raise UsageError(f"{k} has more than {MAX_INCIDENCE_DIVISORS} divisors")
        for r in verify_divisor_poset(k):
            out.append(VerificationResult(f"{r.name} [n={k}]", r.checked, r.failures))
    return out


def cmd_verify(cfg: CliConfig) -> tuple[int, str]:
    results = []
    if cfg.scope in ("dseries", "all"):
        results += _dseries_results(cfg.n)
    if cfg.scope in ("incidence", "all"):
        results += _incidence_results(cfg.n)
    ok = all(r.ok for r in results)
    rows = [{"check": r.name, "checked": r.checked, "failures": len(r.failures), "ok": r.ok} for r in results]
    if cfg.format == "json":
        text = "".join(json.dumps(r) + "\n" for r in rows)
    elif cfg.format == "csv":
        text = _csv(rows, ("check", "checked", "failures", "ok"))
    else:
        text = "".join(f"{'PASS' if r['ok'] else 'FAIL'} {r['check']} ({r['checked']} checked)\n" for r in rows)
        text += f"{'all checks passed' if ok else 'verification FAILED'}\n"
    return (EXIT_OK if ok else EXIT_VERIFY), text


def _emit_reports(cfg: CliConfig, reports, stem: str) -> tuple[int, str]:
    ok = all(r.estimate.within(Z_THRESHOLD) for r in reports)
    if cfg.format == "json":
        text = reports_to_jsonl(reports)
    elif cfg.format == "csv":
        text = reports_to_csv(reports)
    else:
        lines = [f"{'quantity':<17} {'n':>2} {'p':>3} {'model':<9} {'region':<6} {'mean':>12} {'stderr':>10} "
                 f"{'target':>12} {'z':>7}"]
        for r in reports:
            e, m = r.estimate, r.model
            lines.append(f"{r.quantity:<17} {m.n:>2} {m.p:>3} {m.kind:<9} {r.region:<6} {e.mean:>12.6f} "
                         f"{e.stderr:>10.2e} {float(e.target):>12.6f} {e.z_score:>7.2f}")
        text = "\n".join(lines) + "\n"
    path = cfg.out
    if path is None and os.environ.get(REPORT_DIR_ENV):
        suffix = "csv" if cfg.format == "csv" else "jsonl"
        path = Path(os.environ[REPORT_DIR_ENV]) / f"{stem}.{suffix}"
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        body = reports_to_csv(reports) if cfg.format == "csv" else reports_to_jsonl(reports)
        path.write_text(body, encoding="utf-8")
    return (EXIT_OK if ok else EXIT_STATS), text


def cmd_simulate(cfg: CliConfig) -> tuple[int, str]:
    reports = []
    stamp = utc_timestamp()
    for k in cfg.n:
        haar = SamplingModel("haar", k, cfg.p, cfg.precision)
        tally = tally_roots(haar, cfg.samples, cfg.seed, cfg.workers)
        for region in ("OK", "MK", "ALL"):
            est = tally.estimate(region, root_target(haar, region))
            reports.append(ExperimentReport(haar, "root_expectation", region, est, cfg.seed, stamp))
        if cfg.probabilities:
            for kind, name in PROBABILITY_OF_KIND.items():
                m = SamplingModel(kind, k, cfg.p, cfg.precision)
                t = tally if kind == "haar" else tally_roots(m, cfg.samples, cfg.seed, cfg.workers)
                est = t.estimate("ALL", root_target(m, "ALL"))
                reports.append(ExperimentReport(m, name, "ALL", est, cfg.seed, stamp))
    return _emit_reports(cfg, reports, f"simulate_p{cfg.p}_seed{cfg.seed}")


def cmd_integrate(cfg: CliConfig) -> tuple[int, str]:
    reports = []
    stamp = utc_timestamp()
    regions = PHI_REGIONS if cfg.region == "all" else (cfg.region,)
    for k in cfg.n:
        m = SamplingModel("haar", k, cfg.p, cfg.precision)
        for region in regions:
            est = estimate_phi_integral(m, region, cfg.samples, cfg.seed, cfg.workers)
            reports.append(ExperimentReport(m, "phi_integral", region, est, cfg.seed, stamp))
    return _emit_reports(cfg, reports, f"integrate_p{cfg.p}_seed{cfg.seed}")


COMMANDS = {"dfunc": cmd_dfunc, "probs": cmd_probs, "verify": cmd_verify,
            "simulate": cmd_simulate, "integrate": cmd_integrate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        cfg = config_from_args(args)
        code, text = COMMANDS[cfg.command](cfg)
    except (UsageError, ValidationError) as exc:
        print(f"unramified: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateRateError as exc:
        print(f"unramified: error: {exc}", file=sys.stderr)
        return EXIT_STATS
    except OSError as exc:
        print(f"unramified: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if cfg.out is not None and cfg.command in ("dfunc", "probs", "verify"):
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
