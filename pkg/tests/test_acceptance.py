"""Acceptance criteria 1-11, each at its stated tolerance and time budget.

Every criterion prints one ``criterion k: PASS|FAIL ...`` line.  Run with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from unramified.dseries import (
    d,
    d_chain_form,
    d_subset_form,
    has_only_integer_t_powers,
    igusa_functional_equation_check,
    inversion_check,
    probabilities,
)
from unramified.experiments import (
    SamplingModel,
    SuiteConfig,
    estimate_phi_integral,
    reports_to_jsonl,
    root_target,
    run_suite,
    tally_roots,
)
from unramified.incidence import DivisorPoset, classical_mobius, mobius, verify_divisor_poset
from unramified.padic import gr_context, phi

MC_CONFIGS = [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3)]
MC_SAMPLES = 100_000
Z_GATE = 4.0


class Outcome:
    def __init__(self, ok: bool, detail: str):
        self.ok, self.detail = ok, detail


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    bad, secs = _timed(lambda: [n for n in range(1, 31) if not inversion_check(n)])
    return Outcome(not bad and secs < 30, f"failures={bad} time={secs:.1f}s (budget 30s)")


def criterion_2():
    def work():
        bad = [("chain", n) for n in range(1, 31) if d(n) != d_chain_form(n)]
        bad += [("subset", n) for n in list(range(2, 13)) + [24, 30] if d(n) != d_subset_form(n)]
        return bad

    bad, secs = _timed(work)
    return Outcome(not bad and secs < 120, f"failures={bad} time={secs:.1f}s (budget 120s)")


def criterion_3():
    bad, secs = _timed(lambda: [n for n in range(1, 16) if not has_only_integer_t_powers(n)])
    return Outcome(not bad and secs < 10, f"failures={bad} time={secs:.1f}s (budget 10s)")


def criterion_4():
    def work():
        bad = [n for n in range(1, 1001) if mobius(DivisorPoset(n))(1, n) != classical_mobius(n)]
        checked = 0
        for n in (4, 6, 8, 12, 30):
            for r in verify_divisor_poset(n):
                checked += r.checked
                if not r.ok:
                    bad.append((n, r.name))
        return bad, checked

    (bad, checked), secs = _timed(work)
    return Outcome(not bad and secs < 300, f"failures={bad} checks={checked} time={secs:.1f}s (budget 300s)")


def criterion_5():
    bad = []
    t = probabilities(2, 3)
    if (t.rho, t.alpha, t.beta) != (Fraction(7, 26), Fraction(3, 8), Fraction(1, 8)):
        bad.append((2, 3))
    for p in (2, 3, 5):
        t = probabilities(1, p)
        if (t.rho, t.alpha, t.beta) != (1, 1, 1):
            bad.append((1, p))
    for n in range(1, 13):
        for p in (2, 3, 5, 7):
            if not probabilities(n, p).consistent():
                bad.append(("identity", n, p))
    return Outcome(not bad, f"failures={bad}")


def _gate(label, est):
    return f"{label}: mean={est.mean:.6f} target={float(est.target):.6f} z={est.z_score:+.2f}"


def criterion_6():
    lines, ok, inconclusive, total = [], True, 0, 0
    t0 = time.perf_counter()
    for n, p in MC_CONFIGS:
        m = SamplingModel("haar", n, p)
        tally = tally_roots(m, MC_SAMPLES, seed=20_000 + 100 * n + p)
        inconclusive += tally.inconclusive + tally.degenerate
        total += MC_SAMPLES
        for region in ("OK", "MK", "ALL"):
            est = tally.estimate(region, root_target(m, region))
            ok &= est.within(Z_GATE)
            lines.append(_gate(f"(n={n},p={p}) {region}", est))
    secs = time.perf_counter() - t0
    frac = inconclusive / total
    ok = ok and secs <= 600 and frac < 1e-3
    return Outcome(ok, f"time={secs:.0f}s inconclusive={frac:.1e}; " + "; ".join(lines))


def criterion_7():
    lines, ok = [], True
    for n, p in MC_CONFIGS:
        for kind in ("monic", "monic_xn"):
            m = SamplingModel(kind, n, p)
            est = tally_roots(m, MC_SAMPLES, seed=30_000 + 100 * n + p).estimate("ALL", root_target(m, "ALL"))
            ok &= est.within(Z_GATE)
            lines.append(_gate(f"(n={n},p={p}) {kind}", est))
    return Outcome(ok, "; ".join(lines))


def criterion_8():
    lines, ok = [], True
    t0 = time.perf_counter()
    for n, p in MC_CONFIGS:
        m = SamplingModel("haar", n, p)
        for region in ("OK", "MK"):
            est = estimate_phi_integral(m, region, MC_SAMPLES, seed=40_000 + 100 * n + p)
            ok &= est.within(Z_GATE)
            lines.append(_gate(f"(n={n},p={p}) {region}", est))
    secs = time.perf_counter() - t0
    ok = ok and secs < 120
    return Outcome(ok, f"time={secs:.0f}s (budget 120s); " + "; ".join(lines))


def criterion_9():
    rng = random.Random(9)
    bad, checked = [], 0
    for n, p in MC_CONFIGS + [(4, 2), (2, 7)]:
        ctx = gr_context(p, n, 40)
        shift = Fraction(p) ** (n * (n - 1) // 2)
        for _ in range(1000):
            x = ctx.element(tuple(rng.randrange(ctx.pM) for _ in range(n)))
            a, b = phi(x), phi(x * p)
            if a == 0 or b == 0:
                continue  # overflow at precision M: valuation not exact
            checked += 1
            if b * shift != a:
                bad.append((n, p, x.coeffs))
    return Outcome(not bad and checked > 6900, f"checked={checked} failures={len(bad)}")


def criterion_10():
    results = {n: igusa_functional_equation_check(n) for n in range(1, 13)}
    failing = [n for n, ok in results.items() if not ok]
    detail = f"Z(u,v)=D_n(1/u,v^n), exponent n(n-1)/2: fails for n={failing}"
    if failing:
        corrected = all(igusa_functional_equation_check(n, exponent=n * (n - 1)) for n in range(1, 13))
        detail += f"; exponent n(n-1) holds for all n<=12: {corrected}"
    return Outcome(not failing, detail)


def criterion_11():
    cfg = SuiteConfig(2, 3, samples=MC_SAMPLES, seed=42)

    def strip(reports):
        return reports_to_jsonl([type(r)(r.model, r.quantity, r.region, r.estimate, r.seed, "") for r in reports])

    a, b = strip(run_suite(cfg)), strip(run_suite(cfg))
    same = a.encode() == b.encode()
    return Outcome(same and a.count("\n") >= 9, f"reports={a.count(chr(10))} byte-identical={same}")


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 12)}


def run_criterion(k: int) -> Outcome:
    out = CRITERIA[k]()
    print(f"criterion {k}: {'PASS' if out.ok else 'FAIL'} {out.detail}")
    sys.stdout.flush()
    return out


@pytest.mark.parametrize("k", list(CRITERIA))
def test_criterion(k, capsys):
    with capsys.disabled():
        out = run_criterion(k)
    assert out.ok, out.detail


if __name__ == "__main__":
    outcomes = [run_criterion(k) for k in CRITERIA]
    sys.exit(0 if all(o.ok for o in outcomes) else 1)
