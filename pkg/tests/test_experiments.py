import math
from fractions import Fraction

import numpy as np
import pytest

from unramified.experiments import (
    BLOCK_SIZE,
    DegenerateRateError,
    Estimate,
    ExperimentReport,
    SamplingModel,
    SuiteConfig,
    ValidationError,
    count_digits,
    draw_digits,
    estimate_phi_integral,
    estimate_probability,
    estimate_root_expectation,
    read_csv,
    read_jsonl,
    reports_to_csv,
    reports_to_jsonl,
    root_target,
    run_suite,
    tally_roots,
    write_reports,
)


def test_model_validation():
    with pytest.raises(ValidationError):
        SamplingModel("uniform", 2, 3)
    with pytest.raises(ValidationError, match="p must be prime"):
        SamplingModel("haar", 2, 9)
    with pytest.raises(ValidationError):
        SamplingModel("haar", 0, 3)
    with pytest.raises(ValidationError):
        estimate_root_expectation(SamplingModel("haar", 2, 3), "OK", 0)
    with pytest.raises(ValidationError):
        SuiteConfig(2, 3, samples=0)


def test_sampled_digits_respect_model():
    m = SamplingModel("monic_xn", 3, 5, 12)
    digits = draw_digits(m, seed=1, block=0, size=64)
    assert digits.shape == (64, 4, 12)
    assert digits.min() >= 0 and digits.max() < 5
    assert (digits[:, 3, 0] == 1).all() and (digits[:, 3, 1:] == 0).all()
    assert (digits[:, :3, 0] == 0).all()
    assert digits[:, :3, 1:].any()
    haar = draw_digits(SamplingModel("haar", 3, 5, 12), seed=1, block=0, size=64)
    assert haar[:, 3, :].any() and haar[:, :, 0].any()


def test_streams_depend_on_seed_and_block():
    m = SamplingModel("haar", 2, 3, 10)
    a = draw_digits(m, 5, 0, 16)
    assert np.array_equal(a, draw_digits(m, 5, 0, 16))
    assert not np.array_equal(a, draw_digits(m, 5, 1, 16))
    assert not np.array_equal(a, draw_digits(m, 6, 0, 16))


@pytest.mark.parametrize("kind", ["haar", "monic", "monic_xn"])
@pytest.mark.parametrize("n,p", [(2, 3), (3, 2), (2, 5)])
def test_batch_counts_equal_scalar_counts(kind, n, p):
    m = SamplingModel(kind, n, p)
    digits = draw_digits(m, seed=3, block=0, size=400)
    fast = count_digits(m, digits, use_table=True)
    slow = count_digits(m, digits, use_table=False)
    for field in ("ok", "mk", "out", "valid"):
        assert np.array_equal(getattr(fast, field), getattr(slow, field))
    assert fast.inconclusive == slow.inconclusive


def test_parallel_equals_serial():
    m = SamplingModel("haar", 2, 3)
    samples = 2 * BLOCK_SIZE + 100
    a = tally_roots(m, samples, seed=9, workers=1)
    b = tally_roots(m, samples, seed=9, workers=2)
    assert a.sums == b.sums and a.squares == b.squares and a.samples == b.samples == samples


def test_estimate_statistics():
    e = Estimate.from_sums(Fraction(3), Fraction(5), 4, 0, Fraction(1, 2))
    assert e.mean == 0.75
    # values with sum 3 and sum of squares 5 over 4 samples: variance (5 - 4 * 9/16) / 3
    assert math.isclose(e.stderr, math.sqrt((5 - 9 / 4) / 3 / 4))
    assert math.isclose(e.z_score, 0.25 / e.stderr)
    flat = Estimate.from_sums(4, 4, 4, 0, Fraction(1))
    assert flat.stderr == 0 and flat.z_score == 0
    off = Estimate.from_sums(4, 4, 4, 0, Fraction(1, 2))
    assert off.z_score == math.inf and not off.within()


def test_degree_one_always_has_one_root():
    m = SamplingModel("haar", 1, 5)
    e = estimate_root_expectation(m, "ALL", 3000, seed=1)
    assert e.mean == 1 and e.target == 1 and e.z_score == 0
    phi = estimate_phi_integral(m, "OK", 500, seed=1)
    assert phi.mean == 1 and phi.target == 1


def test_targets_small_case():
    assert root_target(SamplingModel("haar", 2, 3), "OK") == Fraction(27, 104)
    assert root_target(SamplingModel("haar", 2, 3), "MK") == Fraction(1, 104)
    assert root_target(SamplingModel("monic", 2, 3), "ALL") == Fraction(3, 8)
    assert root_target(SamplingModel("monic_xn", 2, 3), "ALL") == Fraction(1, 8)
    assert root_target(SamplingModel("monic", 2, 3), "OUT") == 0


def test_root_estimates_close_to_targets():
    m = SamplingModel("haar", 2, 3)
    tally = tally_roots(m, 20000, seed=2)
    for region in ("OK", "MK", "OUT", "ALL"):
        assert tally.estimate(region, root_target(m, region)).within()
    assert tally.inconclusive == 0


def test_probability_estimates_close_to_targets():
    for kind, target in (("monic", Fraction(3, 8)), ("monic_xn", Fraction(1, 8))):
        e = estimate_probability(SamplingModel(kind, 2, 3), 10000, seed=4)
        assert e.target == target and e.within()


def test_phi_estimates_close_to_targets():
    m = SamplingModel("haar", 2, 3)
    ok = estimate_phi_integral(m, "OK", 20000, seed=5)
    mk = estimate_phi_integral(m, "MK", 20000, seed=5)
    assert ok.target == Fraction(3, 4) and ok.within()
    assert mk.target == Fraction(1, 36) and mk.within()


def test_stderr_shrinks_with_more_samples():
    m = SamplingModel("haar", 2, 3)
    small = tally_roots(m, 20000, seed=11).estimate("ALL", Fraction(7, 26))
    large = tally_roots(m, 40000, seed=11).estimate("ALL", Fraction(7, 26))
    ratio = small.stderr / large.stderr
    assert abs(ratio / math.sqrt(2) - 1) < 0.2


def test_reciprocal_symmetry_of_outside_and_maximal_ideal():
    m = SamplingModel("haar", 2, 3)
    tally = tally_roots(m, 30000, seed=12)
    out = tally.estimate("OUT", root_target(m, "OUT"))
    mk = tally.estimate("MK", root_target(m, "MK"))
    assert abs(out.mean - mk.mean) <= 4 * math.hypot(out.stderr, mk.stderr)


def test_rho_identity_between_estimates():
    n, p, N = 2, 3, 20000
    rho = estimate_probability(SamplingModel("haar", n, p), N, seed=13)
    alpha = estimate_probability(SamplingModel("monic", n, p), N, seed=13)
    beta = estimate_probability(SamplingModel("monic_xn", n, p), N, seed=13)
    c = (p - 1) / (p ** (n + 1) - 1)
    combined = c * (p ** n * alpha.mean + beta.mean)
    err = math.sqrt(rho.stderr ** 2 + (c * p ** n * alpha.stderr) ** 2 + (c * beta.stderr) ** 2)
    assert abs(rho.mean - combined) <= 4 * err


def test_degenerate_rate_aborts_at_tiny_precision():
    with pytest.raises(DegenerateRateError):
        tally_roots(SamplingModel("haar", 1, 2, 4), 2000, seed=1)


def test_suite_is_reproducible_and_round_trips(tmp_path):
    cfg = SuiteConfig(2, 3, samples=1500, seed=42)
    first, second = run_suite(cfg), run_suite(cfg)
    assert len(first) >= 9
    assert [r.payload() for r in first] == [r.payload() for r in second]
    text = reports_to_jsonl(first)
    back = read_jsonl(text)
    assert [r.to_dict() for r in back] == [r.to_dict() for r in first]
    assert [r.to_dict() for r in read_csv(reports_to_csv(first))] == [r.to_dict() for r in first]
    path = write_reports(first, tmp_path / "out" / "r.jsonl")
    assert read_jsonl(path.read_text()) == back


def test_report_keys_and_order():
    cfg = SuiteConfig(2, 3, samples=300, seed=1, phi=False, probabilities=False)
    d = run_suite(cfg)[0].to_dict()
    assert list(d)[:14] == ["quantity", "n", "p", "model", "region", "samples", "mean", "stderr",
                            "target_num", "target_den", "z", "inconclusive", "seed", "version"]
    assert d["target_num"] == "27" and d["target_den"] == "104"


def test_report_rejects_missing_keys():
    with pytest.raises(ValidationError):
        ExperimentReport.from_dict({"quantity": "rho"})
