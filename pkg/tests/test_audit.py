import pytest

from oneshot_pir.audit import (correctness_suite, enumerate_query_distribution, fingerprint, format_report,
                               privacy_exact_check, privacy_statistical_check, zero_noise)
from oneshot_pir.config import PRESETS
from oneshot_pir.errors import ParameterError


def test_correctness_and_corrupt_control():
    cfg = PRESETS["ss-4-1-2-m2"]
    assert correctness_suite(cfg, 10).ok
    bad = correctness_suite(cfg, 10, corrupt=True)
    assert not bad.ok and bad.counterexample["expected"] != bad.counterexample["got"]
    assert "FAIL" in format_report(bad)


@pytest.mark.parametrize("name", ["one-time-pad", "refined-otp-q3"])
def test_exact_privacy_and_zero_noise_control(name):
    cfg = PRESETS[name]
    good = privacy_exact_check(cfg)
    assert good.ok and good.witness is None
    bad = privacy_exact_check(zero_noise(cfg), T=cfg.T)
    assert not bad.ok and bad.witness is not None


def test_distribution_table():
    cfg = PRESETS["one-time-pad"]
    a = enumerate_query_distribution(cfg, (1,), 1)
    b = enumerate_query_distribution(cfg, (1,), 2)
    assert a.total == b.total == 4 and a.first_difference(b) is None
    assert sum(a.probability(k) for k in a.counts) == 1


def test_fingerprint_range():
    import numpy as np
    rows = np.arange(60, dtype=np.int64).reshape(20, 3)
    fp = fingerprint(rows, 16)
    assert fp.shape == (20,) and fp.min() >= 0 and fp.max() < 16
    assert (fingerprint(rows, 16) == fp).all()


def test_statistical_small_run_and_control():
    cfg = PRESETS["ss-4-1-2-m2"]
    ok = privacy_statistical_check(cfg, 5000, seed=3)
    assert ok.ok
    biased = privacy_statistical_check(cfg, 5000, seed=3, noise_support=[0, 1])
    assert not biased.ok
    with pytest.raises(ParameterError):
        privacy_statistical_check(cfg, 0)
