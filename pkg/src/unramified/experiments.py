"""Monte Carlo estimates of generating-root counts, conditional probabilities and φ integrals.

Samples are drawn as base-``p`` digit arrays from counter-style substreams:
block ``b`` of a run with seed ``s`` uses
``Philox(SeedSequence(s, spawn_key=(tag, n, p, b)))``, so results do not depend
on how blocks are scheduled.  Root counts are integers and the φ values are
summed with ``math.fsum``, so the reduction is exact or correctly rounded and
independent of order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dseries import root_targets
from .padic import (
    DegenerateSample,
    PadicPolynomial,
    count_generating_roots,
    gr_context,
    is_prime,
    residue_table,
)

BLOCK_SIZE = 1024
KINDS = ("haar", "monic", "monic_xn")
ROOT_REGIONS = ("OK", "MK", "OUT", "ALL")
PHI_REGIONS = ("OK", "MK")
MAX_DEGENERATE_FRACTION = 0.01
Z_THRESHOLD = 4.0

SCHEMA_KEYS = ("quantity", "n", "p", "model", "region", "samples", "mean", "stderr", "target_num",
               "target_den", "z", "inconclusive", "seed", "version")
EXTRA_KEYS = ("precision", "timestamp")


class ValidationError(ValueError):
    pass


class DegenerateRateError(RuntimeError):
    """Too many samples vanished to half precision; ``M`` is too small for this configuration."""


@dataclass(frozen=True)
class SamplingModel:
    """Distribution of the random polynomial ``xi_0 + ... + xi_n X^n``.

    ``haar``: every coefficient uniform mod ``p^M``.  ``monic``: ``xi_n = 1``.
    ``monic_xn``: monic and ``xi_i`` divisible by ``p`` for ``i < n``.
    """

    kind: str
    n: int
    p: int
    M: int = 40

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown sampling model {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if not is_prime(self.p):
            raise ValidationError("p must be prime")
        if self.M < 4:
            raise ValidationError("precision M must be at least 4")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    inconclusive: int
    target: Fraction
    z_score: float

    @classmethod
    def from_sums(cls, total, total_sq, samples: int, inconclusive: int, target: Fraction) -> Estimate:
        """Mean and standard error from the sum and sum of squares (exact when these are rationals)."""
        if samples < 1:
            raise ValidationError("samples must be positive")
        mean = Fraction(total) / samples
        if samples > 1:
            var = (Fraction(total_sq) - samples * mean * mean) / (samples - 1)
            stderr = math.sqrt(max(var, 0) / samples)
        else:
            stderr = 0.0
        return cls(float(mean), stderr, samples, inconclusive, Fraction(target), _z(mean, target, stderr))

    def within(self, threshold: float = Z_THRESHOLD) -> bool:
        return abs(self.z_score) <= threshold


def _z(mean, target, stderr: float) -> float:
    diff = float(Fraction(mean) - Fraction(target))
    if stderr > 0:
        return diff / stderr
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


@dataclass(frozen=True)
class ExperimentReport:
    model: SamplingModel
    quantity: str
    region: str
    estimate: Estimate
    seed: int
    timestamp: str = ""
    version: str = __version__

    def to_dict(self) -> dict:
        e, m = self.estimate, self.model
        return {
            "quantity": self.quantity,
            "n": m.n,
            "p": m.p,
            "model": m.kind,
            "region": self.region,
            "samples": e.samples,
            "mean": e.mean,
            "stderr": e.stderr,
            "target_num": str(e.target.numerator),
            "target_den": str(e.target.denominator),
            "z": e.z_score,
            "inconclusive": e.inconclusive,
            "seed": self.seed,
            "version": self.version,
            "precision": m.M,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentReport:
        missing = [k for k in SCHEMA_KEYS if k not in d]
        if missing:
            raise ValidationError(f"report is missing keys {missing}")
        model = SamplingModel(d["model"], int(d["n"]), int(d["p"]), int(d.get("precision", 40)))
        target = Fraction(int(d["target_num"]), int(d["target_den"]))
        est = Estimate(float(d["mean"]), float(d["stderr"]), int(d["samples"]), int(d["inconclusive"]),
                       target, float(d["z"]))
        return cls(model, d["quantity"], d["region"], est, int(d["seed"]), d.get("timestamp", ""), d["version"])

    @classmethod
    def from_json(cls, line: str) -> ExperimentReport:
        return cls.from_dict(json.loads(line))

    def payload(self) -> dict:
        """Everything except the timestamp (the reproducible part)."""
        d = self.to_dict()
        d.pop("timestamp")
        return d


# -- random streams -----------------------------------------------------------


def _stream(seed: int, tag: str, n: int, p: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(tag.encode()), n, p, block))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(samples: int):
    for b in range(0, (samples + BLOCK_SIZE - 1) // BLOCK_SIZE):
        start = b * BLOCK_SIZE
        yield b, min(BLOCK_SIZE, samples - start)


def draw_digits(model: SamplingModel, seed: int, block: int, size: int) -> np.ndarray:
    """Base-``p`` digits of the coefficients, shape ``(size, n + 1, M)``."""
    rng = _stream(seed, model.kind, model.n, model.p, block)
    digits = rng.integers(0, model.p, size=(size, model.n + 1, model.M), dtype=np.int64)
    if model.kind in ("monic", "monic_xn"):
        digits[:, model.n, :] = 0
        digits[:, model.n, 0] = 1
    if model.kind == "monic_xn":
        digits[:, : model.n, 0] = 0
    return digits


def _digits_to_ints(digits: np.ndarray, p: int) -> np.ndarray:
    """Collapse the last axis of base-``p`` digits into Python integers (object array)."""
    M = digits.shape[-1]
    chunk = max(1, int(62 / math.log2(p)))
    out = np.zeros(digits.shape[:-1], dtype=object)
    for start in range(0, M, chunk):
        part = digits[..., start:start + chunk]
        weights = p ** np.arange(part.shape[-1], dtype=np.int64)
        vals = part @ weights
        out = out + vals.astype(object) * (p ** start)
    return out


# -- root counting in batches -------------------------------------------------


@dataclass
class CountBlock:
    ok: np.ndarray
    mk: np.ndarray
    out: np.ndarray
    valid: np.ndarray
    inconclusive: int
    degenerate: int


def count_digits(model: SamplingModel, digits: np.ndarray, use_table: bool = True) -> CountBlock:
    """Generating-root counts for a block of sampled polynomials.

    Samples whose residue polynomial (and that of the reciprocal) is settled
    by the level-0 table skip the full search.
    """
    n, p, M = model.n, model.p, model.M
    ctx = gr_context(p, n, M)
    size = digits.shape[0]
    ok = np.zeros(size, dtype=np.int64)
    mk = np.zeros(size, dtype=np.int64)
    out = np.zeros(size, dtype=np.int64)
    valid = np.ones(size, dtype=bool)
    degenerate = np.all(digits[:, :, : M // 2] == 0, axis=(1, 2))
    valid &= ~degenerate
    pending = valid.copy()
    if use_table:
        table = residue_table(p, n, M)
        weights = p ** np.arange(n + 1, dtype=np.int64)
        res = digits[:, :, 0]
        code = res @ weights
        rcode = res[:, ::-1] @ weights
        settled = valid & table.resolved[code] & table.resolved[rcode]
        ok[settled] = table.ok[code[settled]]
        mk[settled] = table.mk[code[settled]]
        out[settled] = table.mk[rcode[settled]]
        pending &= ~settled
    inconclusive = 0
    idx = np.flatnonzero(pending)
    if idx.size:
        coeffs = _digits_to_ints(digits[idx], p)
        for row, i in zip(coeffs, idx):
            try:
                r = count_generating_roots(PadicPolynomial(tuple(int(c) for c in row), p, M), ctx)
            except DegenerateSample:
                valid[i] = False
                degenerate[i] = True
                continue
            ok[i], mk[i], out[i] = r.count_ok, r.count_mk, r.count_outside
            inconclusive += r.inconclusive
    return CountBlock(ok, mk, out, valid, inconclusive, int(degenerate.sum()))


def _count_block(args):
    model, seed, block, size, use_table = args
    return count_digits(model, draw_digits(model, seed, block, size), use_table)


def _map_blocks(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


@dataclass
class RootTally:
    """Exact integer sums of the per-sample counts for each region."""

    model: SamplingModel
    samples: int = 0
    inconclusive: int = 0
    degenerate: int = 0
    sums: dict = field(default_factory=lambda: {r: 0 for r in ROOT_REGIONS})
    squares: dict = field(default_factory=lambda: {r: 0 for r in ROOT_REGIONS})

    def add(self, block: CountBlock) -> None:
        v = block.valid
        per = {"OK": block.ok[v], "MK": block.mk[v], "OUT": block.out[v], "ALL": block.ok[v] + block.out[v]}
        for r, vals in per.items():
            self.sums[r] += int(vals.sum())
            self.squares[r] += int((vals * vals).sum())
        self.samples += int(v.sum())
        self.inconclusive += block.inconclusive
        self.degenerate += block.degenerate

    def estimate(self, region: str, target: Fraction) -> Estimate:
        n = self.model.n
        return Estimate.from_sums(Fraction(self.sums[region], n), Fraction(self.squares[region], n * n),
                                  self.samples, self.inconclusive + self.degenerate, target)


def tally_roots(model: SamplingModel, samples: int, seed: int, workers: int = 1,
                use_table: bool = True) -> RootTally:
    if not isinstance(samples, int) or samples < 1:
        raise ValidationError("samples must be a positive integer")
    jobs = [(model, seed, b, size, use_table) for b, size in _blocks(samples)]
    tally = RootTally(model)
    for block in _map_blocks(_count_block, jobs, workers):
        tally.add(block)
    if tally.degenerate > MAX_DEGENERATE_FRACTION * samples:
        raise DegenerateRateError(f"{tally.degenerate} of {samples} samples degenerate at M = {model.M}")
    return tally


def root_target(model: SamplingModel, region: str) -> Fraction:
    """Exact value of ``E[N(region)] / n`` under ``model``."""
    if region not in ROOT_REGIONS:
        raise ValidationError(f"unknown region {region!r}")
    t = root_targets(model.n, model.p)
    if model.kind == "haar":
        return t[region]
    if model.kind == "monic":
        # every root of a monic polynomial is integral, and a generating root in
        # the maximal ideal forces f = X^n mod p, which has probability p^-n
        mk = Fraction(1, model.p ** model.n) * t["beta"]
        return {"OK": t["alpha"], "MK": mk, "OUT": Fraction(0), "ALL": t["alpha"]}[region]
    # f = X^n mod p puts every root in the maximal ideal
    return {"OK": t["beta"], "MK": t["beta"], "OUT": Fraction(0), "ALL": t["beta"]}[region]


def estimate_root_expectation(model: SamplingModel, region: str, samples: int, seed: int = 0,
                              workers: int = 1) -> Estimate:
    """``E[N(U)] / n`` for ``U`` in ``OK`` (integral), ``MK`` (maximal ideal), ``OUT`` (non-integral), ``ALL``."""
    target = root_target(model, region)
    return tally_roots(model, samples, seed, workers).estimate(region, target)


PROBABILITY_OF_KIND = {"haar": "rho", "monic": "alpha", "monic_xn": "beta"}


def estimate_probability(model: SamplingModel, samples: int, seed: int = 0, workers: int = 1) -> Estimate:
    """Probability that the quotient algebra is the unramified degree-``n`` field, conditioned by ``model``.

    Estimated as the mean number of generating roots divided by ``n``.
    """
    target = root_targets(model.n, model.p)[PROBABILITY_OF_KIND[model.kind]]
    return tally_roots(model, samples, seed, workers).estimate("ALL", target)


# -- φ integral ---------------------------------------------------------------


def _phi_exponents(ctx, xs) -> tuple[list[int], int]:
    """``-log_p phi`` for each coordinate tuple, plus the number of overflows (phi = 0)."""
    n = ctx.n
    exps, overflow = [], 0
    for x in xs:
        total = 0
        for d in range(1, n):
            diff = ctx.sub(x, ctx.frob(x, d))
            v = ctx.valuation(diff)
            if v >= ctx.M:
                total = None
                break
            total += (n - d) * v
        if total is None:
            overflow += 1
            exps.append(-1)
        else:
            exps.append(total)
    return exps, overflow


def _phi_block(args):
    n, p, M, region, seed, block, size = args
    ctx = gr_context(p, n, M)
    rng = _stream(seed, f"phi_{region}", n, p, block)
    digits = rng.integers(0, p, size=(size, n, M), dtype=np.int64)
    coords = _digits_to_ints(digits, p)
    scale = p if region == "MK" else 1
    pM = ctx.pM
    xs = [tuple(int(c) * scale % pM for c in row) for row in coords]
    return _phi_exponents(ctx, xs)


def estimate_phi_integral(ctx_or_model, region: str, samples: int, seed: int = 0, workers: int = 1) -> Estimate:
    """Monte Carlo value of the integral of ``phi`` over ``O_K`` or over ``p O_K``.

    The ``MK`` integral is ``p^-n`` times the mean of ``phi(p y)`` for uniform ``y``;
    overflowing samples (``phi`` below ``p^(-M/2)``) contribute zero and are
    counted as inconclusive.
    """
    if region not in PHI_REGIONS:
        raise ValidationError(f"unknown region {region!r}")
    if not isinstance(samples, int) or samples < 1:
        raise ValidationError("samples must be a positive integer")
    n, p, M = ctx_or_model.n, ctx_or_model.p, ctx_or_model.M
    weight = Fraction(1, p ** n) if region == "MK" else Fraction(1)
    jobs = [(n, p, M, region, seed, b, size) for b, size in _blocks(samples)]
    counts: dict[int, int] = {}
    overflow = 0
    for exps, over in _map_blocks(_phi_block, jobs, workers):
        overflow += over
        for e in exps:
            if e >= 0:
                counts[e] = counts.get(e, 0) + 1
    total = sum(c * weight / p ** e for e, c in counts.items())
    total_sq = sum(c * weight * weight / p ** (2 * e) for e, c in counts.items())
    target = root_targets(n, p)[f"phi_{region}"]
    return Estimate.from_sums(total, total_sq, samples, overflow, target)


# -- suites -------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    n: int
    p: int
    samples: int
    seed: int = 0
    precision: int = 40
    workers: int = 1
    roots: bool = True
    probabilities: bool = True
    phi: bool = True

    def __post_init__(self):
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ValidationError("samples must be a positive integer")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError("n must be a positive integer")
        if not is_prime(self.p):
            raise ValidationError("p must be prime")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.precision < 4:
            raise ValidationError("precision must be at least 4")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_suite(config: SuiteConfig) -> list[ExperimentReport]:
    """Root expectations (haar: OK, MK, OUT, ALL), probabilities (rho, alpha, beta) and φ integrals.

    Haar samples are shared between the root expectations and ``rho``.
    """
    c = config
    reports: list[ExperimentReport] = []
    stamp = utc_timestamp()

    def model(kind):
        return SamplingModel(kind, c.n, c.p, c.precision)

    def add(m, quantity, region, est):
        reports.append(ExperimentReport(m, quantity, region, est, c.seed, stamp))

    targets = root_targets(c.n, c.p)
    if c.roots or c.probabilities:
        haar = model("haar")
        tally = tally_roots(haar, c.samples, c.seed, c.workers)
        if c.roots:
            for region in ROOT_REGIONS:
                add(haar, "root_expectation", region, tally.estimate(region, targets[region]))
        if c.probabilities:
            add(haar, "rho", "ALL", tally.estimate("ALL", targets["rho"]))
            for kind in ("monic", "monic_xn"):
                m = model(kind)
                name = PROBABILITY_OF_KIND[kind]
                est = tally_roots(m, c.samples, c.seed, c.workers).estimate("ALL", targets[name])
                add(m, name, "ALL", est)
    if c.phi:
        haar = model("haar")
        for region in PHI_REGIONS:
            add(haar, "phi_integral", region, estimate_phi_integral(haar, region, c.samples, c.seed, c.workers))
    return reports


def all_within(reports, threshold: float = Z_THRESHOLD) -> bool:
    return all(r.estimate.within(threshold) for r in reports)


# -- persistence --------------------------------------------------------------


COLUMNS = SCHEMA_KEYS + EXTRA_KEYS


def reports_to_jsonl(reports) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.to_dict())
    return buf.getvalue()


def read_jsonl(text: str) -> list[ExperimentReport]:
    return [ExperimentReport.from_json(line) for line in text.splitlines() if line.strip()]


def read_csv(text: str) -> list[ExperimentReport]:
    return [ExperimentReport.from_dict(row) for row in csv.DictReader(io.StringIO(text))]


def write_reports(reports, path: str | Path, fmt: str = "json") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        text = reports_to_jsonl(reports)
    elif fmt == "csv":
        text = reports_to_csv(reports)
    else:
        raise ValidationError(f"unknown report format {fmt!r}")
    path.write_text(text, encoding="utf-8")
    return path
